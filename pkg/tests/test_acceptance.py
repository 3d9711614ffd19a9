"""Acceptance criteria 1-10.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts. Long runs use the coarse grid (spacing 0.004, step 2e-6) and
fixed step budgets; they are cached per session and shared between criteria.
"""
import time

import numpy as np
import pytest

from slitbilliard import (
    EvolutionState,
    PacketSpec,
    SlitSpec,
    Square,
    StepperConfig,
    build_billiard,
    evolve,
    gaussian_packet,
    make_grid,
    mirror_x,
    norm_squared,
)
from slitbilliard.analysis import (
    FringeError,
    IntensityProfile,
    fringe_extrema,
    fringe_visibility,
    incoherent_sum_compare,
    k_perturbation_bound,
    pattern_symmetry_defect,
)
from slitbilliard.experiment import one_slit_configs, recipe, reduced, simulate
from slitbilliard.geometry import PotentialField
from slitbilliard.observables import first_impact_time, predicted_extrema
from slitbilliard.oracle import dense_hamiltonian, free_gaussian_analytic, moments
from slitbilliard.propagator import Propagator

# pinned tolerances
ORACLE_L2 = 1e-8
ERROR_RATIO = (24.0, 40.0)
NORM_DRIFT = 1e-6
FREE_REL = 0.01
MIRROR_TOL = 1e-9
VIS_SC = 0.9
SYM_SC = 1e-6
SYM_BROKEN = 0.05
COS_STD = 0.3
SCORE_INCOHERENT = 0.1
SCORE_COHERENT = 0.3
DIFF_DRIFT = 1e-6
SPECTRAL_RATIO = (3.0e-2, 3.2e-2)

# step budgets on the coarse grid (step 2e-6)
SHORT_STEPS = 20_000
LONG_STEPS = 100_000
WINDOW_RUN_STEPS = 40_000
# first-impact window of the asymmetric-ring case at table resolution, in
# steps of 1e-6, and the free-flight time it is scaled against
WINDOW_REFERENCE = (13_000, 1e-6)


class MirrorDefect:
    stride = 100

    def __init__(self):
        self.worst = 0.0
        self.samples = 0

    def __call__(self, state):
        psi = state.psi
        d = np.sqrt(norm_squared(psi - mirror_x(psi, state.grid), state.grid)
                    / norm_squared(psi, state.grid))
        self.worst = max(self.worst, d)
        self.samples += 1


_RUNS = {}


def run(key, cfg, **kw):
    if key not in _RUNS:
        _RUNS[key] = simulate(cfg, **kw)
    return _RUNS[key]


def short(case, **obs):
    cfg = reduced(recipe(case), max_steps=SHORT_STEPS)
    if obs:
        cfg = cfg.replace(observers=obs)
    return cfg


def visibility(profile, window=(-0.3, 0.3)):
    try:
        return fringe_visibility(profile, window)
    except FringeError:
        return 0.0


def case_a_short():
    mirror = MirrorDefect()
    r = run("a_short", short("a"), extra_observers=[mirror])
    if not hasattr(r, "mirror"):
        r.mirror = mirror
    return r


# ---------------------------------------------------------------------------


def test_c01_oracle_equivalence(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    grid = make_grid(0.48, 0.48, 0.02)
    VB = rng.uniform(0, 1e4, grid.shape)
    V = PotentialField(0.5 * (VB + VB[:, ::-1]), np.zeros(grid.shape))
    psi = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    psi /= np.sqrt(norm_squared(psi, grid))
    w, U = np.linalg.eigh(dense_hamiltonian(grid, V))
    coeffs = U.conj().T @ psi.ravel()

    def exact(t):
        return (U @ (np.exp(-1j * w * t) * coeffs)).reshape(grid.shape)

    cfg = StepperConfig(1e-6)
    out = evolve(EvolutionState(psi, grid, tau=cfg.tau), V, cfg, n_steps=100)
    err100 = np.sqrt(norm_squared(out.psi - exact(100 * cfg.tau), grid))
    per_step = []
    for tau in (1e-6, 5e-7):
        one = Propagator(grid, V, StepperConfig(tau)).advance(psi)
        per_step.append(np.sqrt(norm_squared(one - exact(tau), grid)))
    ratio = per_step[0] / per_step[1]
    elapsed = time.perf_counter() - t0
    ok = err100 < ORACLE_L2 and ERROR_RATIO[0] <= ratio <= ERROR_RATIO[1] and elapsed < 10
    criterion(1, ok, f"L2 error {err100:.2e} (< {ORACLE_L2:g}), halving ratio {ratio:.2f} "
                     f"(in {ERROR_RATIO}), {elapsed:.1f} s")
    assert ok


def test_c02_norm_conservation(criterion):
    # quarter-size rectangle around a closed half-size square billiard
    t0 = time.perf_counter()
    grid = make_grid(0.8, 0.6, 0.002, y_min=-0.55)
    V = build_billiard(Square(0.5), 1e6, 0.008, grid)
    cfg = StepperConfig(1e-6)
    psi = gaussian_packet(PacketSpec((0.0, -0.25), (0.0, 180.0), 0.03), grid)
    drift = []

    class Watch:
        stride = 50

        def __call__(self, state):
            drift.append(abs(norm_squared(state.psi, grid) - 1.0))

    evolve(EvolutionState(psi, grid, tau=cfg.tau), V, cfg, [Watch()], n_steps=2000)
    worst = max(drift)
    elapsed = time.perf_counter() - t0
    ok = worst < NORM_DRIFT and elapsed < 120
    criterion(2, ok, f"max |norm - 1| over 2000 steps {worst:.2e} (< {NORM_DRIFT:g}), "
                     f"{elapsed:.1f} s")
    assert ok


def test_c03_free_packet(criterion):
    t0 = time.perf_counter()
    grid = make_grid(0.4, 0.4, 0.002)
    spec = PacketSpec((-0.02, -0.03), (60.0, 80.0), 0.02)
    V = PotentialField(np.zeros(grid.shape), np.zeros(grid.shape))
    cfg = StepperConfig(1e-6)
    t = 5e-4
    s = evolve(EvolutionState(gaussian_packet(spec, grid), grid, tau=cfg.tau), V, cfg,
               n_steps=int(round(t / cfg.tau)))
    xc, yc, sx, sy = moments(s.psi, grid)
    drift = np.hypot(spec.k[0] * t, spec.k[1] * t)
    centre_err = np.hypot(xc - spec.center[0] - spec.k[0] * t, yc - spec.center[1] - spec.k[1] * t)
    # rms width of |psi|^2 along each axis equals sigma(t)
    width = spec.sigma * np.sqrt(1 + (t / (2 * spec.sigma**2)) ** 2)
    width_err = max(abs(sx - width), abs(sy - width)) / width
    l2 = np.sqrt(norm_squared(s.psi - free_gaussian_analytic(spec, t, grid), grid))
    elapsed = time.perf_counter() - t0
    ok = centre_err / drift < FREE_REL and width_err < FREE_REL and elapsed < 60
    criterion(3, ok, f"centre error {centre_err / drift:.2%} of |k|t, width error "
                     f"{width_err:.2%} (both < 1%), L2 vs analytic {l2:.1e}, {elapsed:.1f} s")
    assert ok


def test_c04_mirror_equivariance(criterion):
    r = case_a_short()
    cos = r.phases.valid_cos()
    cos_err = np.abs(cos - 1).max()
    final = np.sqrt(norm_squared(r.state.psi - mirror_x(r.state.psi, r.setup.grid),
                                 r.setup.grid))
    ok = r.mirror.worst < MIRROR_TOL and cos_err < MIRROR_TOL and len(cos) > 100
    criterion(4, ok, f"square, k=(0,180), {r.state.n} steps: max mirror defect "
                     f"{r.mirror.worst:.1e} over {r.mirror.samples} samples, final {final:.1e}; "
                     f"max |cos dphi - 1| {cos_err:.1e} over {len(cos)} valid samples "
                     f"(< {MIRROR_TOL:g})")
    assert ok


@pytest.mark.slow
def test_c05_fringes_follow_symmetry(criterion):
    t0 = time.perf_counter()
    lines, ok = [], True
    for sym, broken in (("a", "c"), ("b", "d")):
        rs = case_a_short() if sym == "a" else run(f"{sym}_short", short(sym))
        rb = run(f"{broken}_short", short(broken))
        ps, pb = rs.profile(), rb.profile()
        vis = visibility(ps)
        dsym = pattern_symmetry_defect(ps).defect
        dbrk = pattern_symmetry_defect(pb).defect
        std = np.std(rb.phases.valid_cos(), ddof=1)
        good = vis > VIS_SC and dsym < SYM_SC and dbrk > SYM_BROKEN and std > COS_STD
        ok &= good
        lines.append(f"{sym}: vis {vis:.3f} defect {dsym:.1e}; {broken}: defect {dbrk:.3f} "
                     f"cos std {std:.3f}")
    elapsed = time.perf_counter() - t0
    criterion(5, ok, "; ".join(lines) + f" ({SHORT_STEPS} coarse steps, {elapsed:.0f} s)")
    assert ok


def one_slit_score(case):
    base = reduced(recipe(case), max_steps=LONG_STEPS)
    two = run(f"{case}_long", base)
    only_a, only_b = one_slit_configs(base)
    ra = run(f"{case}_long_a", only_a)
    rb = run(f"{case}_long_b", only_b)
    return incoherent_sum_compare(two.profile(), ra.profile(), rb.profile()), two


@pytest.mark.slow
def test_c06_incoherent_sum(criterion):
    t0 = time.perf_counter()
    score_f, two_f = one_slit_score("f")
    score_a, two_a = one_slit_score("a")
    elapsed = time.perf_counter() - t0
    ok = score_f < SCORE_INCOHERENT and score_a > SCORE_COHERENT
    criterion(6, ok, f"case f score {score_f:.3f} (< {SCORE_INCOHERENT}), case a score "
                     f"{score_a:.3f} (> {SCORE_COHERENT}); {LONG_STEPS} coarse steps, leaked "
                     f"{two_f.leaked:.2f} / {two_a.leaked:.2f}, {elapsed / 60:.0f} min")
    assert ok


@pytest.mark.slow
def test_c07_first_impact_window(criterion):
    t0 = time.perf_counter()
    cfg = reduced(recipe("m"), max_steps=WINDOW_RUN_STEPS).replace(
        observers={"history_stride": 100}, stopping={"intensity_window_steps": None})
    r = run("m_window", cfg)
    tau = cfg.stepper.tau
    nominal = abs(cfg.packet.center[1]) / np.hypot(*cfg.packet.k)
    t1 = first_impact_time(r.phases.rows, t_max=2 * nominal)
    ref_steps, ref_tau = WINDOW_REFERENCE
    window = int(round(ref_steps * ref_tau * (t1 / nominal) / tau))
    win = IntensityProfile(r.screen.x, r.screen.up_to(window))
    full = r.profile()
    vw, vf = visibility(win), visibility(full)
    dw, df = pattern_symmetry_defect(win).defect, pattern_symmetry_defect(full).defect
    elapsed = time.perf_counter() - t0
    ok = vw > VIS_SC and vf < vw and df > dw and df > SYM_BROKEN
    criterion(7, ok, f"first impact at t={t1:.2e} (free flight {nominal:.2e}) -> window "
                     f"{window} coarse steps: vis {vw:.3f} defect {dw:.1e}; full "
                     f"{r.state.n} steps: vis {vf:.3f} defect {df:.3f}, {elapsed:.0f} s")
    assert ok


def test_c08_two_source_extrema(criterion):
    r = case_a_short()
    prof = r.profile()
    k = np.hypot(*r.config.packet.k)
    slits = SlitSpec(r.config.slits.width, r.config.slits.distance)
    pmax, pmin = predicted_extrema(slits, r.setup.grid.y[r.screen.row],
                                   2 * np.pi / k, (-0.3, 0.3))
    spacing = np.diff(pmax).min()
    smax, smin, _, _ = fringe_extrema(prof, (-0.2, 0.2))
    errs = [np.abs(pmax - prof.x[i]).min() for i in smax]
    errs += [np.abs(pmin - prof.x[i]).min() for i in smin]
    worst = max(errs)
    ok = len(smax) >= 3 and len(smin) >= 2 and worst < spacing
    criterion(8, ok, f"{len(smax)} maxima, {len(smin)} minima in |x| <= 0.2; worst offset "
                     f"{worst:.4f} vs fringe spacing {spacing:.4f}")
    assert ok


def test_c09_perturbation_premise(criterion):
    grid = make_grid(1.6, 1.2, 0.004, y_min=-1.1)
    V = PotentialField(np.zeros(grid.shape), np.zeros(grid.shape))
    cfg = StepperConfig(2e-6)
    k, kt = (0.0, 180.0), (-2.0, 179.99)
    p = gaussian_packet(PacketSpec(k=k), grid)
    q = gaussian_packet(PacketSpec(k=kt), grid)
    d0 = np.sqrt(norm_squared(p - q, grid))
    sp, sq = EvolutionState(p, grid, tau=cfg.tau), EvolutionState(q, grid, tau=cfg.tau)
    prop = Propagator(grid, V, cfg)
    worst = 0.0
    for _ in range(10):
        sp = evolve(sp, V, cfg, n_steps=100, propagator=prop)
        sq = evolve(sq, V, cfg, n_steps=100, propagator=prop)
        worst = max(worst, abs(np.sqrt(norm_squared(sp.psi - sq.psi, grid)) - d0))
    bound = k_perturbation_bound(k, kt, 0.09, grid)
    ok = worst < DIFF_DRIFT and bound.exact <= bound.worst_case
    criterion(9, ok, f"||psi - psi~|| = {d0:.6f} drifts {worst:.1e} over 1000 steps "
                     f"(< {DIFF_DRIFT:g}); grid value {bound.exact:.4f} <= worst-case bound "
                     f"{bound.worst_case:.4f} (closed form {bound.analytic:.4f})")
    assert ok


def test_c10_table_resolution(criterion):
    ratio = PacketSpec().spectral_ratio
    cfg = recipe("a")
    ok = SPECTRAL_RATIO[0] <= ratio <= SPECTRAL_RATIO[1] and cfg.grid.spacing == 0.002
    criterion(10, ok, f"spectral ratio {ratio:.4f} (3.1e-2 +- 0.1e-2); full-resolution "
                      f"reproduction is the optional notebooks/07_full_scale.py (hours)")
    assert ok
