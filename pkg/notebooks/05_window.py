"""
Early-time window in an asymmetric Sinai billiard
=================================================

With the ring off axis, the first impact on the slitted side still comes
from a symmetric packet, so the intensity collected before reflections off
the ring arrive is fringed. Collecting for longer washes the fringes out.
"""

# %%
from slitbilliard.analysis import FringeError, fringe_visibility, pattern_symmetry_defect
from slitbilliard.experiment import recipe, reduced, simulate

cfg = reduced(recipe("m"), max_steps=30000).replace(observers={"history_stride": 100})
r = simulate(cfg)
window = cfg.stopping.intensity_window_steps


def describe(label, prof):
    try:
        vis = f"{fringe_visibility(prof):.3f}"
    except FringeError:
        vis = "n/a"
    print(f"{label}: visibility {vis}, symmetry defect {pattern_symmetry_defect(prof).defect:.3e}")


describe(f"first {window} steps", r.profile(windowed=True))
describe(f"all {r.state.n} steps", r.profile())
