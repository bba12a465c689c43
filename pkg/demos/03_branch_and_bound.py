# %% [markdown]
# # Spatial branch-and-bound
#
# Nodes are boxes.  Each node runs the approximate cutting plane with its
# parent's cuts, the best upper bound is expanded first and the widest edge
# is halved.  Here SBB is compared with brute force on a 3-variable quadratic.

# %%
import io

from drsubmax import SbbOptions, sbb_solve
from drsubmax.problems import build_problem, gen_quadratic
from drsubmax.verify import grid_maximize

p = build_problem(gen_quadratic(3, 3, seed=2))
log = io.StringIO()
res = sbb_solve(p, SbbOptions(rel_gap=0.01, progress=log))
print(f"sbb: lb={res.best_lb:.5f} ub={res.best_ub:.5f} nodes={res.nodes_explored} "
      f"gap={res.rel_gap:.4f} stop={res.termination.value}")
print("incumbent", res.incumbent.round(4))

# %%
grid = grid_maximize(p, 0.01)
print(f"grid: best={grid.best_value:.5f} over {grid.points_evaluated} points")

# %% [markdown]
# The progress log has one CSV line per bounded node.

# %%
print("\n".join(log.getvalue().splitlines()[:6]))
