"""
Closing one slit at a time
==========================

When the slit phases wander, the two-slit pattern approaches the sum of
the two one-slit patterns. The comparison score is the L1 distance of the
unit-area profiles (0 for identical shapes, about 0.64 for fully modulated
fringes against a smooth sum).
"""

# %%
from slitbilliard.experiment import recipe, reduced, run_one_slit_pair

for name in ("a", "f"):
    cfg = reduced(recipe(name), max_steps=20000)
    res = run_one_slit_pair(cfg, two_slit=True, write=False)
    print(f"case {name}: incoherent sum score {res.score:.3f}")
