"""
Taylor stepper against the exact propagator
===========================================

A 24 x 24 grid is small enough to build the Hamiltonian as a dense matrix
and exponentiate it. The fourth-order series should agree to within the
truncation error, which falls by about 2**5 when the step is halved.
"""

# %%
import numpy as np

from slitbilliard import EvolutionState, StepperConfig, evolve, make_grid, norm_squared
from slitbilliard.geometry import PotentialField
from slitbilliard.oracle import dense_hamiltonian, expm_propagate
from slitbilliard.propagator import STABILITY_LIMIT, Propagator, imaginary_axis_limit

rng = np.random.default_rng(0)
grid = make_grid(0.48, 0.48, 0.02)
VB = rng.uniform(0, 1e4, grid.shape)
V = PotentialField(0.5 * (VB + VB[:, ::-1]), np.zeros(grid.shape))
psi = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
psi /= np.sqrt(norm_squared(psi, grid))
H = dense_hamiltonian(grid, V)

# %%
# 100 steps of 1e-6
cfg = StepperConfig(1e-6)
out = evolve(EvolutionState(psi, grid, tau=cfg.tau), V, cfg, n_steps=100)
exact = expm_propagate(psi, H, 100 * cfg.tau)
print("L2 error after 100 steps:", np.sqrt(norm_squared(out.psi - exact, grid)))

# %%
# one-step error for tau and tau/2
errs = []
for tau in (4e-6, 2e-6):
    one = Propagator(grid, V, StepperConfig(tau)).advance(psi)
    errs.append(np.sqrt(norm_squared(one - expm_propagate(psi, H, tau), grid)))
print("one-step error ratio:", errs[0] / errs[1])

# %%
# stability interval of the truncated series on the imaginary axis
for p in range(1, 7):
    print(f"order {p}: |R(iy)| <= 1 up to y = {imaginary_axis_limit(p):.4f}")
print("limit used for order 4:", STABILITY_LIMIT)
