"""Walk through a single CSQP code by hand, then encode a whole image.

Run with:  python demos/01_csqp_encoding.py
"""
import numpy as np

from quadpattern import csqp

# A 4x4 window. Each bit compares a pixel in the top half against the pixel
# diagonally opposite it in the bottom half.
window = np.array(
    [
        [90, 80, 20, 10],
        [70, 60, 40, 30],
        [55, 50, 45, 35],
        [25, 15, 65, 75],
    ],
    dtype=np.uint8,
)

for bit, ((r1, c1), (r2, c2)) in enumerate(csqp.PAIRS):
    a, b = int(window[r1, c1]), int(window[r2, c2])
    print(f"bit {7 - bit}: ({r1},{c1})={a:3d} vs ({r2},{c2})={b:3d} -> {csqp.encode_c(a, b)}")

code = csqp.encode_csqp_at(window, 0, 0)
print(f"code = {code} = 0b{code:08b}")

# %%
# The same computation over every window of a larger image. The feature image
# loses three rows and three columns; the histogram has one count per window.
rng = np.random.default_rng(1)
img = rng.integers(0, 256, (12, 9)).astype(np.uint8)
fi = csqp.feature_image(img)
fv = csqp.describe(img)
print("feature image shape:", fi.shape)
print("histogram mass:", fv.total, "==", 9 * 6)

# %%
# Only the ordering of intensities matters, so any strictly increasing
# remapping of grey levels leaves the codes untouched.
dark = img // 2
stretched = (dark.astype(np.int32) * 2 + 1).astype(np.uint8)  # v -> 2v + 1
print("unchanged under a monotone map:", csqp.feature_image(dark) == csqp.feature_image(stretched))
