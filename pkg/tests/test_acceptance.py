"""Acceptance gate: the ten headline properties, each at its pinned
tolerance, one printed pass/fail line per criterion.

Run with `pytest tests/test_acceptance.py -v -s`.  The full gate takes
roughly a quarter hour on one core; the two long-horizon criteria (4 and
8) dominate.
"""

import numpy as np
import pytest

from modedamp import (
    DampingMask,
    Lattice,
    ModeSet,
    SolverConfig,
    SpectralVorticity,
    build_triads,
    damped_laplacian,
    decay_experiment,
    enstrophy,
    kappa_max,
    linf_growth_constant,
    nonlinear_term,
    random_vorticity,
    run,
)
from modedamp.census import (
    build_census,
    degenerate_sets,
    is_degenerate_mask,
    mask_to_set,
    scan_witnesses,
)
from modedamp.cli import EXIT_OK, main
from modedamp.modesets import classify_set
from modedamp.presets import run_preset
from modedamp.solver import final_state_and_ledger, run_batch
from modedamp.triads import rhs_arrays

CIRCLE1 = ModeSet.finite([(1, 0), (-1, 0), (0, 1), (0, -1)])
LINE1 = ModeSet.finite([(1, 0), (-1, 0), (2, 0), (-2, 0), (3, 0), (-3, 0)])
COFINITE1 = ModeSet.cofinite(CIRCLE1.members)


def verdict(num: int, ok: bool, detail: str):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_degenerate_supports_exactly_steady():
    """Every degenerate symmetric set in the size-3 box is bit-exactly
    steady under the triad dynamics, for random reality-constrained data."""
    census = build_census(3)
    sets = degenerate_sets(census)
    lat = Lattice(6)  # all pair sums of box-3 members stay on the lattice
    rng = np.random.default_rng(0)
    worst = 0.0
    for s in sets:
        table = build_triads(lat, support=s)
        w = random_vorticity(lat, rng, support=set(s.members))
        worst = max(worst, float(np.max(np.abs(rhs_arrays(table, w.coeffs)))))
    verdict(1, worst == 0.0,
            f"{len(sets)} degenerate sets, max |d/dt| = {worst:g} (exact zero required)")


def test_criterion_02_every_nondegenerate_set_has_unique_witness():
    """Exhaustive scan of all 2^24 symmetric sets in the size-3 box: each
    non-degenerate set admits a mode outside it reachable as the sum of
    exactly one non-degenerate member pair."""
    census = build_census(3)
    n_deg, n_nondeg, n_fail, failing = scan_witnesses(census)
    total_ok = n_deg + n_nondeg == 1 << len(census.classes)
    # cross-check the vectorized scan against the per-set search
    rng = np.random.default_rng(1)
    agree = True
    for mask in rng.integers(1, 1 << len(census.classes), size=200):
        s = mask_to_set(int(mask), list(census.classes))
        rep = classify_set(s)  # raises if a non-degenerate set lacks a witness
        agree &= rep.is_degenerate == is_degenerate_mask(int(mask), census)
    verdict(2, n_fail == 0 and total_ok and agree,
            f"{n_nondeg} non-degenerate sets, {n_fail} without a unique witness")


def test_criterion_03_inviscid_conservation_and_order():
    """nu = 0 run at N = 16, T = 10, dt = 1e-3 conserves energy and
    enstrophy to 1e-8 relative; dt refinement shows order >= 3.8."""
    lat = Lattice(16)
    cfg = SolverConfig(lat, DampingMask(ModeSet.empty(), nu=0.0),
                       dt=1e-3, t_final=10.0, diag_stride=1000)
    w0 = random_vorticity(lat, np.random.default_rng(2), max_active=3,
                          amplitude=0.3)
    ledger = run(w0, cfg)
    e = ledger.column("energy")
    i = ledger.column("enstrophy")
    drift_e = float(np.max(np.abs(e - e[0])) / e[0])
    drift_i = float(np.max(np.abs(i - i[0])) / i[0])

    lat8 = Lattice(8)
    w8 = random_vorticity(lat8, np.random.default_rng(3), max_active=2,
                          amplitude=0.5)

    def final(dt):
        c = SolverConfig(lat8, DampingMask(ModeSet.empty(), nu=0.0),
                         dt=dt, t_final=1.0)
        return final_state_and_ledger(w8, c)[0].coeffs

    ref = final(1e-3)
    errs = [float(np.max(np.abs(final(dt) - ref))) for dt in (4e-2, 2e-2, 1e-2)]
    orders = [float(np.log2(errs[j] / errs[j + 1])) for j in range(2)]
    ok = drift_e <= 1e-8 and drift_i <= 1e-8 and min(orders) >= 3.8
    verdict(3, ok,
            f"drift energy {drift_e:.2e}, enstrophy {drift_i:.2e} (<= 1e-8); "
            f"observed orders {orders[0]:.2f}, {orders[1]:.2f} (>= 3.8)")


def test_criterion_04_budget_identities_across_mask_families():
    """Energy and enstrophy budget residuals <= 1e-6 relative over T = 10
    at N = 32, eps = 0, for 20 random initial conditions and four undamped
    sets (empty, circle, line, cofinite)."""
    lat = Lattice(32)
    rng = np.random.default_rng(4)
    w0 = np.stack([
        random_vorticity(lat, rng, max_active=5, amplitude=0.2).coeffs
        for _ in range(20)
    ])
    worst = 0.0
    for k_set in (ModeSet.empty(), CIRCLE1, LINE1, COFINITE1):
        cfg = SolverConfig(lat, DampingMask(k_set, nu=0.5), dt=5e-3,
                           t_final=10.0, diag_stride=200)
        for ledger in run_batch(w0, cfg):
            e0 = ledger.column("energy")[0]
            i0 = 0.5 * ledger.column("enstrophy")[0]
            worst = max(
                worst,
                float(np.max(np.abs(ledger.column("energy_residual"))) / e0),
                float(np.max(np.abs(ledger.column("enstrophy_residual"))) / i0),
            )
    verdict(4, worst <= 1e-6,
            f"worst relative budget residual {worst:.2e} over 4 x 20 runs (<= 1e-6)")


def test_criterion_05_poincare_with_exceptions_exact():
    """||grad v||^2 <= -(Yv, v) + kappa_max^2 ||v||^2 coefficientwise on
    1000 random fields per undamped set."""
    lat = Lattice(8)
    rng = np.random.default_rng(5)
    ok = True
    worst_margin = np.inf
    for k_set in (CIRCLE1, LINE1,
                  ModeSet.finite([(3, 4), (-3, -4), (4, 3), (-4, -3)])):
        mask = DampingMask(k_set, nu=1.0)
        kmax_sq = kappa_max(k_set) ** 2
        for _ in range(1000):
            v = random_vorticity(lat, rng, max_active=4)
            grad_sq = float(np.sum(lat.ksq * np.abs(v.coeffs) ** 2))
            y_pair = float(np.sum(
                damped_laplacian(v, mask).coeffs * np.conj(v.coeffs)
            ).real)
            margin = -y_pair + kmax_sq * enstrophy(v) - grad_sq
            worst_margin = min(worst_margin, margin / max(grad_sq, 1.0))
            ok &= margin >= -1e-9 * grad_sq
    verdict(5, ok,
            f"3000 fields, worst relative margin {worst_margin:+.2e} (>= 0)")


def test_criterion_06_cofinite_linf_growth_bound():
    """Cofinite undamped set: max|w(t)| <= max|w(0)| + nu c ||w(0)||_2 t at
    every sample over T = 20, slack 1e-6, c the closed-form constant."""
    outcome = run_preset("cofinite-linf-bound")
    res = outcome.report["assertions"]["linf_growth_bound"]
    ok = res["passed"] is True and outcome.report["resolution_ok"]
    verdict(6, ok,
            f"c = {res['constant']:.5f}, min margin {res['min_margin']:.2e} "
            f"(slack 1e-6), resolution_ok = {outcome.report['resolution_ok']}")


def test_criterion_07_small_data_exponential_decay():
    """Undamped set {(1,0), (-1,0)}, nu = 1, small data: fitted decay rate
    of the damped-part norm over t in [2, 10] is >= 0.9."""
    lat = Lattice(8)
    k_set = ModeSet.finite([(1, 0), (-1, 0)])
    cfg = SolverConfig(lat, DampingMask(k_set, nu=1.0), dt=2e-3,
                       t_final=10.0, diag_stride=100)
    w0 = random_vorticity(lat, np.random.default_rng(6), max_active=1,
                          amplitude=0.02)
    report = decay_experiment(w0, cfg, fit_window=(2.0, 10.0))
    rate = report["measured_decay_rate"]
    ok = (report["precondition_met"] and report["rate_ok"]
          and rate is not None and rate >= 0.9)
    verdict(7, ok,
            f"measured rate {rate:.4f} (>= 0.9), lower bound "
            f"{report['rate_lower_bound']:.4f}, precondition "
            f"{report['precondition_met']}")


def test_criterion_08_finite_k_relaxation():
    """Circle undamped set at N = 32, nu = 0.5: by T = 200 the damped part
    has shrunk by 1e-6 and the dissipation functional of the velocity is
    below 1e-10."""
    outcome = run_preset("finite-K-relaxation")
    res = outcome.report["assertions"]
    ratio = res["damped_l2_rel_final_max"]["final_over_initial"]
    dissip = res["dissipation_final_max"]["final_dissipation_functional"]
    ok = (res["damped_l2_rel_final_max"]["passed"] is True
          and res["dissipation_final_max"]["passed"] is True
          and outcome.report["resolution_ok"])
    verdict(8, ok,
            f"damped-part shrink {ratio:.2e} (<= 1e-6), dissipation "
            f"functional {dissip:.2e} (<= 1e-10)")


def test_criterion_09_pseudo_spectral_equals_triad_sum():
    """The dealiased collocation nonlinearity equals the exact triad sum
    to 1e-12 relative on every lattice N <= 8, 50 random fields each."""
    worst = 0.0
    for n in range(1, 9):
        lat = Lattice(n)
        table = build_triads(lat)
        rng = np.random.default_rng(n)
        for _ in range(50):
            w = random_vorticity(lat, rng)
            a = nonlinear_term(w).coeffs
            b = rhs_arrays(table, w.coeffs)
            scale = max(float(np.max(np.abs(b))), 1e-300)
            worst = max(worst, float(np.max(np.abs(a - b))) / scale)
    verdict(9, worst <= 1e-12,
            f"400 fields over N = 1..8, worst relative gap {worst:.2e} (<= 1e-12)")


def test_criterion_10_bitwise_deterministic_ledgers(tmp_path):
    """Two CLI runs with the same configuration and seed produce
    byte-identical ledgers and reports."""
    import json

    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "lattice_n": 12, "nu": 0.5, "dt": 0.002, "t_final": 1.0,
        "undamped": "circle1", "seed": 42,
        "initial": {"type": "random", "max_active": 3, "amplitude": 0.3},
    }))
    a, b = tmp_path / "a", tmp_path / "b"
    ra = main(["simulate", "--config", str(cfg_path), "--out-dir", str(a)])
    rb = main(["simulate", "--config", str(cfg_path), "--out-dir", str(b)])
    same_ledger = (a / "ledger.csv").read_bytes() == (b / "ledger.csv").read_bytes()
    same_report = (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    ok = ra == EXIT_OK and rb == EXIT_OK and same_ledger and same_report
    verdict(10, ok,
            f"ledger bytes equal = {same_ledger}, report bytes equal = {same_report}")
