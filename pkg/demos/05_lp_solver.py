# %% [markdown]
# # The bundled LP solver
#
# Bounded-variable primal simplex; used for every cut LP.  Rows are
# (coefficients, sense, rhs) and each variable carries (lower, upper).

# %%
from drsubmax import lp

model = lp.LpModel(
    [3.0, 2.0],
    (([1.0, 1.0], lp.LE, 4.0), ([1.0, 3.0], lp.LE, 6.0)),
    ((0.0, 3.0), (0.0, 10.0)),
)
sol = lp.solve(model)
print(sol.status.value, sol.x, sol.objective_value)

# %% [markdown]
# Appending a row returns a new model; infeasibility is reported, not raised.

# %%
tight = lp.add_row(model, [1.0, 0.0], lp.GE, 5.0)
print(lp.solve(tight).status.value)
