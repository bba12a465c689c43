# %% [markdown]
# # Overestimators and envelope cuts
#
# A monotone DR-submodular function lies below the ReLU bound built from
# any support point.  Over a box, that bound has an affine concave envelope,
# and that affine function is what the LP sees.

# %%
import numpy as np

from drsubmax import envelope_cut, overestimator_value, single_cut_error_bound
from drsubmax.problems import sqrt_problem

p = sqrt_problem(1)
s = np.array([0.25])
cut = envelope_cut(p, s, p.box)
print("cut coefficients", cut.coeffs, "value at lower corner", cut.value([0.0]))

# %% [markdown]
# Tabulate F, the ReLU overestimator and the envelope on a few points.

# %%
for x in (0.0, 0.1, 0.25, 0.5, 1.0):
    relu = overestimator_value(p, [x], s)
    print(f"x={x:4.2f}  F={p.value([x]):.4f}  relu={relu:.4f}  envelope={cut.value([x]):.4f}")

# %% [markdown]
# The envelope sits furthest above the ReLU bound at the support point itself.

# %%
xs = np.linspace(0, 1, 10_001)[:, None]
gap = cut.values(xs) - (0.5 + np.maximum(xs[:, 0] - 0.25, 0.0))
print("largest gap", gap.max(), "at", xs[gap.argmax(), 0])
print("closed form", single_cut_error_bound(p, s, p.box))
