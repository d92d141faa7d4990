# %% [markdown]
# On a 3 x 3 grid roadmap per robot the tensor graph has only 81 vertices,
# so it can be built explicitly and searched with Dijkstra. That optimum is
# the reference for implicit A* and for repeated dRRT* runs.

# %%
from drrtstar import resolve_scenario, verify_small_instance

rep = verify_small_instance(resolve_scenario("minimal_nine"), runs=20, budgets=(100, 1_000, 10_000))
for key, value in rep.to_dict().items():
    print(f"{key:20s} {value}")
