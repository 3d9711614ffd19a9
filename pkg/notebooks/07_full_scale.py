"""
Full-resolution runs (long)
===========================

The bundled recipes use spacing 0.002 and step 1e-6 (a 800 x 600 grid)
and stop when 85% of the probability has left the billiard. On one core
each step takes roughly 15 ms, so a complete run is many hours. This script
runs any subset of recipes and writes the usual artifacts under ``runs/``.

    python notebooks/07_full_scale.py a c m --max-steps 200000
"""

# %%
import argparse

from slitbilliard import recipe, run_experiment, validate_config

ap = argparse.ArgumentParser()
ap.add_argument("cases", nargs="*", default=["a", "b", "c", "d", "e", "f", "g", "h", "i", "l", "m"])
ap.add_argument("--max-steps", type=int, default=None)
ap.add_argument("--snapshot-stride", type=int, default=None)
args = ap.parse_args()

# %%
for case in args.cases:
    cfg = recipe(case)
    report = validate_config(cfg)
    print(f"{cfg.name}: symmetry condition {'satisfied' if report.sc_satisfied else 'violated'}")
    r = run_experiment(cfg, f"runs/{cfg.name}", args.max_steps, args.snapshot_stride)
    print(f"  {r.stop_reason} after {r.state.n} steps, leaked {r.leaked:.3f}, {r.wall_time / 3600:.2f} h")
