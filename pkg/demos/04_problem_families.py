# %% [markdown]
# # Benchmark families
#
# Covering and influence objectives are expectations of set functions
# under independent availability probabilities.  With the identity
# availability the value at a 0/1 point equals the set function.

# %%
import numpy as np

from drsubmax.problems import (
    family_of, gen_covering, gen_influence, solve_assignment, subset_masks,
)

cov = family_of(gen_covering(4, 30, budget=2.0, capacitated=True, seed=1, g_kind="identity"))
masks = subset_masks(4).astype(float)
print("vertex identity holds:", np.array_equal(cov.extension.value_batch(masks), cov.set_values))

# %% [markdown]
# Capacitated coverage of an open set is a small assignment LP.

# %%
print("capacities", cov.capacity.round(3))
for S in ([0], [0, 1], [0, 1, 2, 3]):
    print(S, "covers", round(solve_assignment(cov, S), 4))

# %% [markdown]
# Influence spread averages reachability over sampled live-arc graphs.

# %%
inf = family_of(gen_influence(6, budget=2.0, g_kind="contest", seed=3))
p = inf.to_problem()
x = np.full(6, 1 / 3)
print("arcs", len(inf.arcs), "spread at uniform spend", round(p.value(x), 4))
print("gradient", p.gradient(x).round(4))
