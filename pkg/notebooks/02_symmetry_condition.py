"""
Predicting fringes before running
=================================

Fringes are expected when both the barrier potential and the initial
packet are mirror symmetric about x = 0. ``validate_config`` measures both
defects for every bundled recipe.
"""

# %%
from slitbilliard.experiment import RECIPES, recipe, validate_config

for name in RECIPES:
    cfg = recipe(name)
    r = validate_config(cfg)
    verdict = "satisfied" if r.sc_satisfied else "violated"
    print(f"{name:13s} k={cfg.packet.k!s:16s} V defect={r.potential_defect:9.3e} "
          f"packet defect={r.packet_defect:9.3e} -> {verdict}")

# %%
# the stability estimate is dominated by the barrier height
print(validate_config(recipe("a")).stability.summary())
