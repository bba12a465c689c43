# %% [markdown]
# # Checking the oracles
#
# The invariant suite samples submodularity, compares gradients with
# central differences, tests the ReLU bound on random pairs and checks that
# envelope cuts are tight at the box corners.  `drsub verify` runs the same code.

# %%
from drsubmax.verify import invariant_suite

for check in invariant_suite(seed=0, trials=2000, points=20):
    print("PASS" if check.passed else "FAIL", check.name, "-", check.detail)
