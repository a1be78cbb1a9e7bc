"""Compare how much information each descriptor keeps, measured as histogram entropy.

Run with:  python demos/02_baselines_entropy.py
"""
from quadpattern.analysis import average_entropy
from quadpattern.baselines import DESCRIPTORS, REFERENCE_ONLY
from quadpattern.synthetic import face_like_set

print("registered descriptors:")
for spec in list(DESCRIPTORS.values()) + list(REFERENCE_ONLY.values()):
    state = "implemented" if spec.implemented else "reference only"
    print(f"  {spec.id:6s} bins={spec.bins:5d}  neighbourhood={spec.encoded_neighborhood}  ({state})")

# %%
# Twenty synthetic face-like images stand in for a real face database.
images = face_like_set(20, seed=0)
report = average_entropy(images, ["csqp", "lbp", "cslbp", "csltp", "slbp", "ldp"])
print()
print(report.to_csv())

# %%
e = report.per_descriptor
print("CSQP > LBP > CSLBP:", e["csqp"] > e["lbp"] > e["cslbp"])
