"""Left/right symmetry of a face and feature-image export.

Run with:  python demos/04_symmetry_and_export.py
"""
import tempfile
from pathlib import Path

from quadpattern.analysis import export_feature_image, symmetry_variance
from quadpattern.imaging import load_image
from quadpattern.synthetic import face_like_set

face = face_like_set(1, seed=4, size=(64, 64))[0]
left, right = face[16:48, 4:30], face[16:48, 34:60]

# The right crop is mirrored before encoding, so a perfectly symmetric face
# gives a zero difference histogram.
for name in ("csqp", "lbp", "cslbp"):
    raw = symmetry_variance(left, right, name, normalize=False)
    norm = symmetry_variance(left, right, name, normalize=True)
    print(f"{name:6s} variance raw={raw.variance:10.3f}  normalized={norm.variance:.3e}")

# %%
out = Path(tempfile.mkdtemp(prefix="quadpattern-demo-"))
for name in ("csqp", "cslbp"):
    path = export_feature_image(face, name, out / f"face_{name}.png")
    print(f"wrote {path} with shape {load_image(path).shape}")
