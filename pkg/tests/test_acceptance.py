"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one `criterion N: PASS/FAIL` line (run with -s to see
them live; they also appear in captured output). The heavy Monte Carlo
runs are shared across criteria via module-scoped fixtures:

  1. operator laws (adjoint identity, tight frame) at 1e-12, under 1 s
  2. small-instance solver equivalence vs the exhaustive-l0 and generic
     convex oracles, 50 instances, under 30 s
  3. reference-scenario energy ordering and thresholds, 200 trials
  4. gain-ratio sign pattern and 100 % inactive sections
  5. reweighting residual decay profile (monotone, >= 20x drop)
  6. occupancy-mask recovery and false-alarm ordering (two presets)
  7. byte-identical reports for identical (config, seed)
"""

import filecmp
import time

import numpy as np
import pytest

from cwss import (
    adjoint,
    cli,
    dense_matrix,
    draw_pattern,
    forward,
    l0_oracle,
    solve_bpdn,
)
from cwss.harness import preset_config, run_monte_carlo, run_trial
from cwss.solver import SolverOptions

cvxpy = pytest.importorskip("cvxpy")


def announce(num, ok, detail):
    print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="module")
def preset1_report():
    return run_monte_carlo(preset_config("4band-0.40"))


@pytest.fixture(scope="module")
def preset1_deep_histories():
    # force the outer loop to full depth so entries exist for t = 2..8
    cfg = preset_config("4band-0.40", epsilon=1e-12, max_outer=8)
    return [run_trial(cfg, i).evlbs_residual_history for i in range(cfg.trials)]


@pytest.fixture(scope="module")
def preset4_report():
    return run_monte_carlo(preset_config("2band-0.30"))


def test_criterion_1_operator_correctness():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst_adjoint = worst_frame = 0.0
    for seed in range(100):
        pat = draw_pattern(32, 0.4, seed)
        r = rng.normal(size=32) + 1j * rng.normal(size=32)
        y = rng.normal(size=pat.m) + 1j * rng.normal(size=pat.m)
        lhs = np.vdot(y, forward(r, pat))
        rhs = np.vdot(adjoint(y, pat), r)
        worst_adjoint = max(worst_adjoint, abs(lhs - rhs))
        worst_frame = max(
            worst_frame, np.abs(forward(adjoint(y, pat), pat) - y).max()
        )
    elapsed = time.perf_counter() - t0
    ok = worst_adjoint < 1e-12 and worst_frame < 1e-12 and elapsed < 1.0
    assert announce(
        1,
        ok,
        f"adjoint err {worst_adjoint:.2e}, frame err {worst_frame:.2e}, "
        f"{elapsed:.2f}s over 100 draws",
    )


def test_criterion_2_small_instance_oracles():
    # sparsity stays within l1-recovery reach per size (3-sparse at M = 6
    # is beyond basis pursuit, verified against the interior-point oracle);
    # draws whose sparsest fit is non-unique (l0 disagrees with the planted
    # vector) are skipped and replaced, keeping 50 identifiable instances
    rng = np.random.default_rng(77)
    opts = SolverOptions(max_inner_iters=20000, inner_tol=1e-9)
    t0 = time.perf_counter()
    worst_vec = worst_obj = 0.0
    collected = skipped = draw = 0
    while collected < 50:
        n = 12 if draw % 2 == 0 else 16
        s = 1 + draw % (2 if n == 12 else 3)
        pat = draw_pattern(n, 0.5, 1000 + draw)
        draw += 1
        support = rng.choice(n, size=s, replace=False)
        r_true = np.zeros(n, dtype=np.complex128)
        r_true[support] = rng.normal(size=s) + 1j * rng.normal(size=s)
        y = forward(r_true, pat)

        r_l0 = l0_oracle(y, dense_matrix(pat), 3)
        if np.linalg.norm(r_l0 - r_true) > 1e-8:
            skipped += 1
            continue
        collected += 1

        est = solve_bpdn(y, pat, 0.0, opts)
        worst_vec = max(
            worst_vec, np.linalg.norm(est.r_hat - r_l0) / np.linalg.norm(r_l0)
        )

        rv = cvxpy.Variable(n, complex=True)
        prob = cvxpy.Problem(
            cvxpy.Minimize(cvxpy.norm1(rv)), [dense_matrix(pat) @ rv == y]
        )
        prob.solve(solver=cvxpy.CLARABEL)
        worst_obj = max(worst_obj, abs(est.objective - prob.value) / abs(prob.value))
    elapsed = time.perf_counter() - t0
    ok = worst_vec <= 1e-4 and worst_obj <= 1e-5 and elapsed < 30.0
    assert announce(
        2,
        ok,
        f"worst l0 recovery err {worst_vec:.2e} (<=1e-4), worst objective err "
        f"{worst_obj:.2e} (<=1e-5), {elapsed:.1f}s for 50 instances "
        f"({skipped} degenerate draws replaced)",
    )


def test_criterion_3_energy_ordering(preset1_report):
    rep = preset1_report
    inactive = ~rep.active_mask
    e = rep.mean_energies["evlbs"][inactive]
    v = rep.mean_energies["vlbs"][inactive]
    b = rep.mean_energies["bpdn"][inactive]
    ordering = (e < v) & (v < b)
    evlbs_ok = bool(np.all(e <= 0.01))
    bpdn_ok = bool(np.all(b >= 0.05))
    ok = bool(np.all(ordering)) and evlbs_ok and bpdn_ok
    announce(
        3,
        ok,
        f"EVLBS<VLBS<BPDN per inactive section {ordering.tolist()}; "
        f"EVLBS means {np.round(e, 4).tolist()} (<=0.01: {evlbs_ok}); "
        f"BPDN means {np.round(b, 4).tolist()} (>=0.05: {bpdn_ok})",
    )
    assert evlbs_ok, "EVLBS inactive means exceed 0.01"
    assert bpdn_ok, "BPDN inactive means fall below 0.05"
    # Known defect: the widest inactive section sits between the two
    # strongest bands and the plain group program books more energy there
    # than the l1 baseline does (verified optimal via an independent
    # interior-point solve); see the project notes. Asserted as stated.
    assert np.all(ordering), (
        f"EVLBS<VLBS<BPDN violated on inactive sections: VLBS={np.round(v, 4)}, "
        f"BPDN={np.round(b, 4)}"
    )


def test_criterion_4_gain_ratio_pattern(preset1_report):
    rep = preset1_report
    inactive = ~rep.active_mask
    r1 = rep.mean_r1
    r2 = rep.mean_r2
    sign_ok = bool(np.all(r2[inactive] >= r1[inactive]))
    # sections 1, 3, 7, 9 (1-based) must score 100 % within reporting precision
    idx = np.array([0, 2, 6, 8])
    full_ok = bool(np.all(np.abs(r2[idx] - 1.0) <= 5e-4))
    ok = sign_ok and full_ok
    assert announce(
        4,
        ok,
        f"R2>=R1 on inactive: {sign_ok}; R2 at sections (1,3,7,9) = "
        f"{np.round(r2[idx], 5).tolist()} (100% within precision: {full_ok})",
    )


def test_criterion_5_convergence_profile(preset1_deep_histories):
    histories = preset1_deep_histories
    good = 0
    for h in histories:
        h = np.asarray(h)
        assert len(h) == 7  # entries for t = 2..8
        monotone = bool(np.all(np.diff(h[2:]) <= 0))
        drop = h[0] >= 20.0 * h[6]
        good += monotone and drop
    frac = good / len(histories)
    ok = frac >= 0.9
    assert announce(
        5,
        ok,
        f"monotone-after-t=3 and >=20x (t=2 vs t=8) in {frac:.1%} of "
        f"{len(histories)} trials (need >=90%)",
    )


def test_criterion_6_detection(preset1_report, preset4_report):
    results = []
    for rep, name, expect_active in (
        (preset1_report, "4band-0.40", [2, 4, 6, 8]),
        (preset4_report, "2band-0.30", [4, 8]),
    ):
        assert (np.flatnonzero(rep.active_mask) + 1).tolist() == expect_active
        match = rep.mask_match_rates["evlbs"]
        fa_gap = rep.false_alarm_rates["bpdn"] - rep.false_alarm_rates["evlbs"]
        results.append((name, match, fa_gap))
    ok = all(m >= 0.95 and gap > 0 for _, m, gap in results)
    assert announce(
        6,
        ok,
        "; ".join(
            f"{name}: EVLBS mask match {m:.1%} (>=95%), BPDN-EVLBS false-alarm "
            f"gap {gap:+.3f} (>0)"
            for name, m, gap in results
        ),
    )


def test_criterion_7_deterministic_outputs(tmp_path):
    cfg = tmp_path / "exp.yaml"
    cfg.write_text("trials: 3\nseed: 424242\n")
    for sub in ("a", "b"):
        code = cli.main(
            ["run", str(cfg), "--out", str(tmp_path / sub), "--format", "both",
             "--quiet"]
        )
        assert code == 0
    names = ["report.csv", "report.json", "plot_spectrum.csv"]
    same = {
        name: filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)
        for name in names
    }
    ok = all(same.values())
    assert announce(7, ok, f"byte-identical outputs: {same}")
