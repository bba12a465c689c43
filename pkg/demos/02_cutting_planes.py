# %% [markdown]
# # Cutting-plane bounds on a single box
#
# The approximate method adds one envelope cut per LP solve.  The exact
# method keeps the ReLU pieces through binary variables and is limited to
# tiny problems.

# %%
from drsubmax import ExactOptions, approximate_cutting_plane, exact_cutting_plane
from drsubmax.problems import bilinear_problem, build_problem, gen_quadratic

toy = bilinear_problem(budget=1.0)  # x1 + x2 - x1 x2 with x1 + x2 <= 1
res = approximate_cutting_plane(toy)
print(f"approx: lb={res.lower_bound:.4f} ub={res.upper_bound:.4f} "
      f"iters={res.iterations} stop={res.termination.value}")

# %%
exact = exact_cutting_plane(toy, epsilon=0.01)
print(f"exact:  lb={exact.lower_bound:.4f} ub={exact.upper_bound:.4f} stop={exact.termination.value}")

# %% [markdown]
# On a random quadratic the single-box gap stays open; that is why the
# branch-and-bound demo splits the box.

# %%
quad = build_problem(gen_quadratic(3, 3, seed=0))
res = approximate_cutting_plane(quad)
print(f"quadratic root: lb={res.lower_bound:.4f} ub={res.upper_bound:.4f} gap={res.gap:.4f}")
