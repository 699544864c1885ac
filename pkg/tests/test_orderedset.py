"""Ordered-set representations: build, verify, round trip, extension."""

import math

import numpy as np
import pytest

from randloc.functionals import make_functional, enumerate_index_pairs, valid_node_range
from randloc.orderedset import (
    CycleDetected,
    build_minimal_representation,
    check_minimal_inclusion,
    check_representation_equivariance,
    extend_local_to_global,
    locate_via_representation,
    verify_partial_order,
)
from randloc.paths import INFTY, DiscretePath, Interval, PathMode

from conftest import WindowRule

LIN = PathMode.CONTINUOUS_LINEAR


def make(values, origin=0.0, step=0.5, mode=LIN):
    return DiscretePath(origin, step, np.asarray(values, float), mode)


# -- build ------------------------------------------------------------


def test_hitting_points_are_crossings_with_inverse_order():
    p = make([0.0, 1.0, 0.0, 1.0], step=1.0)
    f = make_functional("hitting", {"level": 0.5})
    rep = build_minimal_representation(f, p, "global")
    assert np.allclose(sorted(rep.points), [0.5, 1.5, 2.5])
    # first-hitting: earlier crossings dominate later ones
    i05 = int(np.argmin(np.abs(np.asarray(rep.points) - 0.5)))
    i15 = int(np.argmin(np.abs(np.asarray(rep.points) - 1.5)))
    assert rep.reach[i15, i05] and not rep.reach[i05, i15]


def test_extremum_points_ordered_by_value(ou_paths):
    p = ou_paths[0]
    f = make_functional("extremum", {})
    rep = build_minimal_representation(f, p, "global", cap=500)
    # the global argmax dominates every other representation point
    top = int(np.argmax([p.value_at(t) for t in rep.points]))
    assert all(rep.reach[i, top] for i in range(len(rep.points)))


def test_constant_path_local_rep_keeps_left_endpoints(constant_path):
    f = make_functional("extremum", {})
    rep = build_minimal_representation(f, constant_path, "local", T=1.0)
    starts = [constant_path.node_time(i)
              for i in range(constant_path.n)
              if constant_path.node_time(i) + 1.0 <= constant_path.end + 1e-12]
    assert np.allclose(sorted(rep.points), sorted(starts))
    for a in starts:
        assert locate_via_representation(rep, Interval(a, a + 1.0)) == a


def test_broken_midpoint_rule_detected(ou_paths):
    with pytest.raises(CycleDetected):
        rep = build_minimal_representation(WindowRule(1.0, "mid"),
                                           ou_paths[1], "local", T=1.0)
        rep = verify_partial_order(rep)
        assert not rep.passed  # fallback if build did not already raise


# -- verify -----------------------------------------------------------


def test_partial_order_verified_for_catalog(ou_paths, cp_paths):
    checks = [
        (make_functional("extremum", {}), ou_paths[2], "global", None),
        (make_functional("hitting", {"level": 0.0}), ou_paths[3], "global", None),
        (make_functional("first_jump", {"threshold": 0.0}), cp_paths[0],
         "global", None),
        (make_functional("extremum", {}), ou_paths[2], "local", 1.0),
        (make_functional("constrained_hitting",
                         {"level": 0.0, "max_offset": 1.0,
                          "related_length": 1.0}), ou_paths[4], "local", 1.0),
    ]
    for f, p, mode, T in checks:
        rep = build_minimal_representation(f, p, mode, T=T, cap=400)
        assert verify_partial_order(rep).passed


def test_single_point_rep_passes():
    p = make([0.0, 1.0, 0.0], step=1.0)
    f = make_functional("extremum", {})
    rep = build_minimal_representation(f, p, "global")
    report = verify_partial_order(rep)
    assert report.passed


# -- locate round trip ------------------------------------------------


@pytest.mark.parametrize("name,params", [
    ("extremum", {}),
    ("extremum", {"which": "inf"}),
    ("hitting", {"level": 0.0, "which": "first"}),
    ("hitting", {"level": 0.5, "which": "last"}),
])
def test_round_trip_equals_direct_evaluation(name, params, ou_paths):
    f = make_functional(name, params)
    p = ou_paths[5]
    rep = build_minimal_representation(f, p, "global", cap=400)
    prep = f.prepare(p)
    lo, hi = valid_node_range(f, p)
    for i, j in enumerate_index_pairs(lo, hi, cap=400):
        direct = prep.locate(i, j)
        via = locate_via_representation(
            rep, Interval(p.node_time(i), p.node_time(j)))
        if direct == INFTY:
            assert via == INFTY
        else:
            assert via == pytest.approx(direct, abs=1e-9)


def test_locate_empty_intersection_is_infinite():
    p = make([0.0, 1.0, 0.0, 0.0, 0.0], step=1.0)
    f = make_functional("hitting", {"level": 0.5})
    rep = build_minimal_representation(f, p, "global")
    assert locate_via_representation(rep, Interval(3.0, 4.0)) == INFTY


def test_local_rep_rejects_off_length_window(ou_paths):
    f = make_functional("extremum", {})
    rep = build_minimal_representation(f, ou_paths[6], "local", T=1.0)
    with pytest.raises(ValueError):
        locate_via_representation(rep, Interval(0.0, 2.0))


# -- equivariance -----------------------------------------------------


def test_equivariance_zero_shift(ou_paths):
    f = make_functional("extremum", {})
    rep = check_representation_equivariance(f, ou_paths[7], 0.0, cap=300)
    assert rep.passed


def test_equivariance_extremum_shift_one(ou_paths):
    f = make_functional("extremum", {})
    assert check_representation_equivariance(f, ou_paths[8], 1.0, cap=300).passed


def test_equivariance_hitting_negative_shift(ou_paths):
    f = make_functional("hitting", {"level": 0.0})
    assert check_representation_equivariance(f, ou_paths[9], -2.0, cap=300).passed


# -- minimal inclusion ------------------------------------------------


@pytest.mark.parametrize("T", [0.5, 1.0])
def test_minimal_inclusion_extremum_and_hitting(T, ou_paths):
    for f in (make_functional("extremum", {}),
              make_functional("hitting", {"level": 0.0})):
        rep = check_minimal_inclusion(f, T, ou_paths[0], cap=400)
        assert rep.passed


def test_minimal_inclusion_constant_path(constant_path):
    f = make_functional("extremum", {})
    rep = check_minimal_inclusion(f, 1.0, constant_path, cap=400)
    assert rep.passed


# -- local -> global extension ----------------------------------------


def test_extension_of_restricted_extremum_matches_global(ou_paths):
    f = make_functional("extremum", {})
    p = ou_paths[1]
    result = extend_local_to_global(f, p, T=1.0)
    prep = f.prepare(p)
    tol = p.tol
    for (a, b) in [(0.3, 2.7), (0.0, 4.0), (1.0, 1.8), (2.5, 3.9)]:
        direct = prep.locate(p.node_index(a), p.node_index(b))
        via = result.global_eval(Interval(a, b))
        if a + tol < direct < b - tol:  # interior locations must agree
            assert via == pytest.approx(direct, abs=1e-9)


def test_extension_of_constrained_hitting_exists(ou_paths):
    f = make_functional("constrained_hitting",
                        {"level": 0.0, "max_offset": 1.0, "related_length": 1.0})
    p = ou_paths[2]
    result = extend_local_to_global(f, p)
    assert verify_partial_order(result.rep).passed
    # the extension agrees with the local functional on interior windows
    for i in range(0, p.n - 101, 25):
        a = p.node_time(i)
        direct = f.at(p, a)
        if a + p.tol < direct < a + 1.0 - p.tol:
            via = result.global_eval(Interval(a, a + 1.0))
            assert via == pytest.approx(direct, abs=1e-9)


def test_extension_sets_are_disjoint_and_ordered(ou_paths):
    f = make_functional("extremum", {})
    result = extend_local_to_global(f, ou_paths[3], T=1.0)
    s1, s2 = set(np.round(result.s1, 9)), set(np.round(result.s2, 9))
    assert not (s1 & s2)
    sp = np.asarray(result.s_prime)
    assert np.all(np.diff(sp) > 0)
    assert s1 | s2 == set(np.round(sp, 9))


def test_extension_constant_path_left_endpoint_rule(constant_path):
    f = make_functional("extremum", {})
    result = extend_local_to_global(f, constant_path, T=1.0)
    assert result.global_eval(Interval(0.5, 2.5)) == pytest.approx(0.5)
    assert result.global_eval(Interval(1.0, 3.5)) == pytest.approx(1.0)


def test_rep_json_export_is_deterministic(ou_paths):
    f = make_functional("extremum", {})
    rep1 = build_minimal_representation(f, ou_paths[4], "global", cap=200)
    rep2 = build_minimal_representation(f, ou_paths[4], "global", cap=200)
    d1, d2 = rep1.to_dict(), rep2.to_dict()
    assert d1 == d2
    assert d1["schema"] == 1
    assert all(i != j for i, j in d1["covers"])
