"""End-to-end acceptance: one printed PASS/FAIL line per criterion.

Run with `pytest -v -s tests/test_acceptance.py` to see the lines as the
criteria complete.  Tolerances are pinned in the assertions.
"""

import math

import numpy as np
import pytest

from randloc.functionals import (
    check_ilf_axioms,
    check_local_axioms,
    enumerate_index_pairs,
    make_functional,
    valid_node_range,
)
from randloc.orderedset import (
    build_minimal_representation,
    check_minimal_inclusion,
    extend_local_to_global,
    locate_via_representation,
    verify_partial_order,
)
from randloc.pathchar import (
    SyntheticProfileFunctional,
    check_combination_rules,
    check_location_monotonicity,
    compute_g_profile,
    partition_g_profile,
    synthesize_profile,
)
from randloc.paths import INFTY, DiscretePath, Interval, PathMode
from randloc.processes import ProcessSpec, RngSeed, sample_paths
from randloc.statcheck import (
    DensityEstimate,
    DiagnosticSuite,
    check_density_bound,
    check_tv_constraints,
    run_stationarity_diagnostic,
    sample_location_offsets,
)

GRID = (0.0, 0.01, 401)  # domain [0, 4], step 0.01


def report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"ACCEPTANCE {num} [{name}]: {status}{suffix}")


@pytest.fixture(scope="module")
def mixed_paths():
    """200 seeded paths: one third each OU, Brownian, compound Poisson."""
    origin, step, count = GRID
    ou = sample_paths(ProcessSpec("ou", {"theta": 1.0, "sigma": 1.0}),
                      origin, step, count, 67, RngSeed(1001))
    bm = sample_paths(ProcessSpec("brownian", {}),
                      origin, step, count, 67, RngSeed(1002))
    cp = sample_paths(ProcessSpec("compound_poisson",
                                  {"rate": 2.0, "jump_mean": 0.0,
                                   "jump_sd": 1.0}),
                      origin, step, count, 66, RngSeed(1003))
    return ou + bm + cp


def linear_functionals():
    return [
        make_functional("extremum", {"which": "sup"}),
        make_functional("hitting", {"level": 0.0, "which": "first"}),
        make_functional("increment_pattern",
                        {"offsets": [0.1], "boxes": [[0.0, 100.0]]}),
        make_functional("mollified_derivative_hitting",
                        {"h": 0.0, "radius": 0.05}),
    ]


def test_criterion_1_axiom_suite(mixed_paths):
    """Every catalog global functional passes the exact axiom checks on
    200 mixed paths; the naive constrained-hitting extension fails."""
    fj = make_functional("first_jump", {"threshold": 0.0})
    violations = 0
    checked = 0
    for p in mixed_paths:
        funcs = ([fj] if p.mode is PathMode.CADLAG_STEP
                 else linear_functionals())
        for f in funcs:
            rep = check_ilf_axioms(f, p, cap=800)
            checked += 1
            violations += len(rep.violations)
    naive = make_functional("naive_constrained_hitting",
                            {"level": 1.0, "max_offset": 0.5})
    witness = check_ilf_axioms(
        naive, DiscretePath(0.0, 1.0, np.array([0.0, 1.0, 0.0]),
                            PathMode.CONTINUOUS_LINEAR))
    ok = violations == 0 and not witness.passed and len(witness.violations) >= 1
    report(1, "axiom suite", ok,
           f"{checked} functional/path checks, {violations} violations, "
           f"naive witness count {len(witness.violations)}")
    assert violations == 0
    assert not witness.passed and witness.violations


def test_criterion_2_ordered_set_round_trip(mixed_paths):
    """Representation-based lookup equals direct evaluation for every
    catalog functional and enumerated window on 100 paths; the partial
    order verifies with zero violations."""
    cap = 150
    mismatches = 0
    order_violations = 0
    windows = 0
    for p in mixed_paths[:50] + mixed_paths[134:184]:
        if p.mode is PathMode.CADLAG_STEP:
            funcs = [(make_functional("first_jump", {"threshold": 0.0}),
                      "global", None)]
        else:
            funcs = [
                (make_functional("extremum", {}), "global", None),
                (make_functional("hitting", {"level": 0.0}), "global", None),
                (make_functional("increment_pattern",
                                 {"offsets": [0.1], "boxes": [[0.0, 100.0]]}),
                 "global", None),
                (make_functional("mollified_derivative_hitting",
                                 {"h": 0.0, "radius": 0.05}), "global", None),
                (make_functional("constrained_hitting",
                                 {"level": 0.0, "max_offset": 1.0,
                                  "related_length": 1.0}), "local", 1.0),
            ]
        for f, mode, T in funcs:
            rep = build_minimal_representation(f, p, mode, T=T, cap=cap)
            order_violations += len(verify_partial_order(rep).violations)
            prep = f.prepare(p)
            if mode == "local":
                lo, hi = valid_node_range(f, p)
                span = round(T / p.step)
                pairs = [(i, i + span) for i in range(lo, hi - span + 1, 4)]
            else:
                lo, hi = valid_node_range(f, p)
                pairs = enumerate_index_pairs(lo, hi, cap)
            for i, j in pairs:
                windows += 1
                direct = prep.locate(i, j)
                via = locate_via_representation(
                    rep, Interval(p.node_time(i), p.node_time(j)))
                same = (math.isinf(direct) and math.isinf(via)) or (
                    math.isfinite(direct) and math.isfinite(via)
                    and abs(direct - via) <= p.tol)
                mismatches += 0 if same else 1
    ok = mismatches == 0 and order_violations == 0
    report(2, "ordered-set round trip", ok,
           f"{windows} windows, {mismatches} mismatches, "
           f"{order_violations} order violations")
    assert ok


def test_criterion_3_minimal_inclusion(mixed_paths):
    """S_T(f) included in S(f) with order embedding, extremum and
    hitting, T in {0.5, 1.0}, 50 paths."""
    bad = 0
    for p in mixed_paths[67:117]:  # Brownian paths
        for T in (0.5, 1.0):
            for f in (make_functional("extremum", {}),
                      make_functional("hitting", {"level": 0.0})):
                rep = check_minimal_inclusion(f, T, p, cap=200)
                bad += len(rep.violations)
    report(3, "minimal-representation inclusion", bad == 0,
           f"50 paths x 2 T x 2 functionals, {bad} violations")
    assert bad == 0


def test_criterion_4_local_to_global_extension(mixed_paths):
    """The extension of the restricted extremum reproduces the global
    extremum on every length-T window whose location is interior, on 50
    paths.  (On longer intervals the extension is only a pre-intrinsic
    functional: distant incomparable maxima are resolved leftmost.)"""
    f = make_functional("extremum", {})
    T = 1.0
    disagreements = 0
    windows = 0
    for p in mixed_paths[:50]:  # OU paths
        result = extend_local_to_global(f, p, T=T)
        prep = f.prepare(p)
        lo, hi = valid_node_range(f, p)
        span = round(T / p.step)
        for i in range(lo, hi - span + 1):
            a, b = p.node_time(i), p.node_time(i + span)
            direct = prep.locate(i, i + span)
            if not (a + p.tol < direct < b - p.tol):
                continue
            windows += 1
            via = result.global_eval(Interval(a, b))
            if not (math.isfinite(via) and abs(via - direct) <= p.tol):
                disagreements += 1
    report(4, "local-to-global extension", disagreements == 0,
           f"{windows} interior windows, {disagreements} disagreements")
    assert disagreements == 0


def test_criterion_5_path_characterization(mixed_paths):
    """Profiles of the catalog local functionals partition into valid
    pieces and pass combination + monotonicity rules on 100 paths; a
    synthesized profile passes the local axiom check (converse)."""
    locals_ = [
        (make_functional("extremum", {}), 1.0),
        (make_functional("hitting", {"level": 0.0}), 1.0),
        (make_functional("constrained_hitting",
                         {"level": 0.0, "max_offset": 1.0,
                          "related_length": 1.0}), 1.0),
    ]
    bad = 0
    for p in mixed_paths[:50] + mixed_paths[67:117]:
        for f, T in locals_:
            prof = compute_g_profile(f, p, T)
            pieces = partition_g_profile(prof)  # raises if malformed
            for q in pieces:
                if q.kind == "linear":
                    assert q.right - q.left <= T + 1e-9
                    assert q.right - 1e-9 <= q.d <= q.left + T + 1e-9
            bad += len(check_combination_rules(pieces, prof).violations)
            bad += len(check_location_monotonicity(prof).violations)
    # converse: synthesized valid profiles are local functionals
    conv_ok = True
    carrier = DiscretePath(0.0, 0.01, np.zeros(301),
                           PathMode.CONTINUOUS_LINEAR)
    for trial in range(3):
        rng = np.random.default_rng(4200 + trial)
        prof = synthesize_profile(rng, np.arange(0.0, 3.0 + 1e-12, 0.01),
                                  T=1.0, step=0.01)
        func = SyntheticProfileFunctional(prof, anchor_origin=0.0)
        conv_ok &= check_local_axioms(func, carrier, cap=1000,
                                      shifts=[0.05, -0.12]).passed
    ok = bad == 0 and conv_ok
    report(5, "path characterization", ok,
           f"{bad} rule violations, converse {'ok' if conv_ok else 'failed'}")
    assert ok


def test_criterion_6_arcsine_quantitative():
    """Brownian argmax on [0, 1] at n = 1e5 reproduces the arcsine law:
    CDF(1/4) = 1/3 +- 0.01, density(1/2) = 2/pi +- 0.05, and the
    density never beats max(1/t, 1/(1-t)) by more than 3 stderr."""
    step = 1.0 / 512
    grid = (0.0, step, 513)
    func = make_functional("extremum", {})
    offs = sample_location_offsets(func, ProcessSpec("brownian", {}), grid,
                                   a=0.0, T=1.0, n=100_000,
                                   seed=RngSeed(2026))
    cdf_quarter = float(np.mean(offs <= 0.25))
    est = DensityEstimate.from_offsets(offs, T=1.0, bins=20,
                                       atom_snap=step / 2)
    # 20 bins put 0.5 on a bin edge; average the two straddling bins
    mid_density = float((est.density[9] + est.density[10]) / 2.0)
    bound = check_density_bound(est)
    cdf_err = abs(cdf_quarter - 1.0 / 3.0)
    den_err = abs(mid_density - 2.0 / math.pi)
    ok = cdf_err <= 0.01 and den_err <= 0.05 and bound.passed
    report(6, "arcsine law", ok,
           f"CDF(1/4) err {cdf_err:.4f} <= 0.01, "
           f"density(1/2) err {den_err:.4f} <= 0.05, "
           f"bound margin {bound.statistics['worst_margin']:.3f} <= 0")
    assert cdf_err <= 0.01
    assert den_err <= 0.05
    assert bound.passed


def test_criterion_7_tv_constraints():
    """OU (theta=1, sigma=sqrt 2): all five total-variation inequalities
    hold for the extremum and first-hitting laws at n = 1e5, 20 bins;
    a synthetic oscillating density is flagged."""
    spec = ProcessSpec("ou", {"theta": 1.0, "sigma": math.sqrt(2.0)})
    grid = (0.0, 0.01, 301)
    failures = []
    for func in (make_functional("extremum", {}),
                 make_functional("hitting", {"level": 0.0, "which": "first"})):
        offs = sample_location_offsets(func, spec, grid, a=0.5, T=1.0,
                                       n=100_000, seed=RngSeed(77))
        est = DensityEstimate.from_offsets(offs, T=1.0, bins=20,
                                           atom_snap=0.005)
        rep = check_tv_constraints(est)
        failures.extend(rep.violations)
    # negative control: oscillating density has TV of order bins/2
    width = 1.0 / 20
    density = np.where(np.arange(20) % 2 == 0, 0.5, 1.5)
    p = density * width
    control = DensityEstimate(
        T=1.0, n=100_000, atom_left=0.0, atom_right=0.0, atom_inf=0.0,
        midpoints=(np.arange(20) + 0.5) * width, density=density,
        stderr=np.sqrt(p * (1 - p) / 100_000) / width, bin_width=width)
    control_rep = check_tv_constraints(control)
    ok = not failures and not control_rep.passed
    report(7, "TV constraint suite", ok,
           f"{len(failures)} violations across 10 inequalities, "
           f"oscillating control flagged: {not control_rep.passed}")
    assert not failures
    assert not control_rep.passed


def test_criterion_8_diagnostic_verdicts():
    """Verdicts at n = 1e5 with pinned seeds: OU stationary, Brownian
    stationary increments, modulated BM and transient OU neither; the
    OU-transient run reproduces byte-for-byte."""
    suite_401 = DiagnosticSuite(
        functionals=(make_functional("extremum", {}),
                     make_functional("increment_pattern",
                                     {"offsets": [0.1],
                                      "boxes": [[0.05, 100.0]]}),
                     make_functional("hitting", {"level": 1.0})),
        grid=(0.0, 0.01, 401), T=1.0, starts=(0.5, 1.29, 2.5), n=100_000)
    suite_801 = DiagnosticSuite(
        functionals=suite_401.functionals,
        grid=(0.0, 0.01, 801), T=1.0, starts=(2.64, 5.78), n=100_000)
    suite_trans = DiagnosticSuite(
        functionals=suite_401.functionals,
        grid=(0.0, 0.01, 401), T=1.0, starts=(0.5, 2.5), n=100_000)
    seed = RngSeed(901)
    runs = [
        (ProcessSpec("ou", {"theta": 1.0, "sigma": math.sqrt(2.0)}),
         suite_401, "CONSISTENT_WITH_STATIONARY"),
        (ProcessSpec("brownian", {}), suite_401,
         "CONSISTENT_WITH_STATIONARY_INCREMENTS"),
        (ProcessSpec("modulated_bm", {"amplitude": 0.5}), suite_801,
         "NEITHER"),
        (ProcessSpec("ou_transient",
                     {"theta": 1.0, "sigma": 1.0, "x0": 5.0}), suite_trans,
         "NEITHER"),
    ]
    import json
    got = []
    last_bytes = None
    for spec, suite, want in runs:
        verdict = run_stationarity_diagnostic(spec, suite, seed)
        got.append((spec.family, verdict.verdict, want))
        last_bytes = json.dumps(verdict.to_dict(), sort_keys=True).encode()
    rerun = run_stationarity_diagnostic(runs[-1][0], runs[-1][1], seed)
    reproducible = (
        json.dumps(rerun.to_dict(), sort_keys=True).encode() == last_bytes)
    ok = all(v == w for _, v, w in got) and reproducible
    report(8, "diagnostic verdicts", ok,
           "; ".join(f"{f}: {v}" for f, v, _ in got)
           + f"; byte-identical rerun: {reproducible}")
    for fam, v, w in got:
        assert v == w, (fam, v, w)
    assert reproducible
