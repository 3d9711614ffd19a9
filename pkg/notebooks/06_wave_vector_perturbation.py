"""
How different are two nearby launches?
======================================

Cases a and i differ only by a small change of the wave vector. The
difference of the initial packets is bounded by a linear estimate using
worst-case second moments; the grid value and the closed form are much
smaller. Without an absorber the evolution is unitary, so the difference
keeps its size.
"""

# %%
import numpy as np

from slitbilliard import (EvolutionState, PacketSpec, StepperConfig, evolve, gaussian_packet,
                          make_grid, norm_squared)
from slitbilliard.analysis import k_perturbation_bound
from slitbilliard.geometry import PotentialField

grid = make_grid(1.6, 1.2, 0.004, y_min=-1.1)
b = k_perturbation_bound((0, 180), (-2, 179.99), 0.09, grid)
print(b)

# %%
V = PotentialField(np.zeros(grid.shape), np.zeros(grid.shape))
cfg = StepperConfig(2e-6)
p = gaussian_packet(PacketSpec(k=(0, 180)), grid)
q = gaussian_packet(PacketSpec(k=(-2, 179.99)), grid)
d0 = np.sqrt(norm_squared(p - q, grid))
sp = evolve(EvolutionState(p, grid, tau=cfg.tau), V, cfg, n_steps=1000)
sq = evolve(EvolutionState(q, grid, tau=cfg.tau), V, cfg, n_steps=1000)
print("difference at start", d0, "after 1000 steps", np.sqrt(norm_squared(sp.psi - sq.psi, grid)))
