import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from lanekeep.track import (NoLookaheadError, OffTrackError, PoseG, TrackError, TrackParams,
                            build_test_track, lhe_global, lle_straight, lookahead_point,
                            point_at, project, wrap_angle)

from oracles import (brute_force_lookahead, brute_force_project, dense_samples,
                     quadrature_length, track_pieces)

TRACK = build_test_track()
TOTAL = TRACK.total_length


@pytest.fixture(scope="module")
def dense():
    return dense_samples(TRACK, 1_000_000)


def straights(track):
    return [sec for sec in track.sections if sec.kind == "segment"]


def offset_pose(track, s, e_y, e_psi=0.0):
    p = point_at(track, s)
    return PoseG(p.x - e_y * math.sin(p.psi), p.y + e_y * math.cos(p.psi), p.psi + e_psi)


# ------------------------------------------------------------------ build

def test_table_parameters_give_six_pieces():
    assert len(TRACK.sections) == 6
    assert [s.kind for s in TRACK.sections] == ["arc", "segment"] * 3


def test_total_length_matches_quadrature():
    assert TOTAL == pytest.approx(quadrature_length(track_pieces()), abs=1e-6)
    # closed form: pi*R_c + 2L + pi*r_c + 2(R_c - r_c)
    assert TOTAL == pytest.approx(math.pi * 1.04 + 4 + math.pi * 0.65 + 0.78, abs=1e-12)


@pytest.mark.parametrize("lane,R,r", [("inner_lane", 1.04 - 0.185, 0.65 - 0.185),
                                      ("outer_lane", 1.04 + 0.185, 0.65 + 0.185)])
def test_lane_lengths_match_quadrature(lane, R, r):
    track = build_test_track(TrackParams(), lane)
    assert track.total_length == pytest.approx(
        quadrature_length(track_pieces(R=R, r=r, R_c=1.04)), abs=1e-6)


@pytest.mark.parametrize("kwargs,needle", [
    (dict(r_c=1.2), "r_c < R_c"),
    (dict(w=1.4), "w < 2"),
    (dict(L=-1.0), "L"),
])
def test_invalid_params_name_the_violated_inequality(kwargs, needle):
    with pytest.raises(TrackError, match=needle):
        TrackParams(**kwargs)


def test_unknown_lane_rejected():
    with pytest.raises(TrackError):
        build_test_track(TrackParams(), "middle")


# ------------------------------------------------------------------ point_at

def test_start_point_and_curvature():
    p = point_at(TRACK, 0.0)
    assert (p.x, p.y) == pytest.approx((1.5 + 1.04, 0.25 + 1.04))
    # clockwise: heading turns right, so dpsi/ds = -1/R_c
    assert p.kappa == pytest.approx(-1 / 1.04)
    ccw = build_test_track(direction="counterclockwise")
    assert abs(point_at(ccw, 0.0).kappa) == pytest.approx(1 / 1.04)


def test_straight_has_zero_curvature():
    seg = straights(TRACK)[0]
    p = point_at(TRACK, seg.s_start + 0.5)
    assert p.kappa == 0.0 and math.isinf(p.rho)


def test_closure():
    assert point_at(TRACK, TOTAL) == point_at(TRACK, 0.0)


@settings(max_examples=40, deadline=None)
@given(x_c=st.floats(0.5, 3), m=st.floats(0.05, 1), L=st.floats(0.2, 4),
       R_c=st.floats(0.5, 2), ratio=st.floats(0.3, 0.9), lane=st.sampled_from(
           ["centerline", "inner_lane", "outer_lane"]),
       direction=st.sampled_from(["clockwise", "counterclockwise"]))
def test_closure_and_c1_continuity(x_c, m, L, R_c, ratio, lane, direction):
    r_c = ratio * R_c
    w = min(0.37, 1.5 * r_c)
    track = build_test_track(TrackParams(x_c, m, w, L, R_c, r_c), lane, direction)
    secs = track.sections
    for a, b in zip(secs, secs[1:] + secs[:1]):
        xa, ya, ha = a.evaluate(a.length)
        xb, yb, hb = b.evaluate(0.0)
        assert math.hypot(xa - xb, ya - yb) < 1e-9
        assert abs(wrap_angle(ha - hb)) < 1e-9


# ------------------------------------------------------------------ project

def test_on_path_pose_projects_to_itself():
    for s in np.linspace(0, TOTAL, 37, endpoint=False):
        p = point_at(TRACK, s)
        err = project(TRACK, PoseG(p.x, p.y, p.psi))
        assert abs((err.s - s + TOTAL / 2) % TOTAL - TOTAL / 2) < 1e-9
        assert abs(err.e_y) < 1e-12 and abs(err.e_psi) < 1e-12


def test_left_offset_on_straight():
    seg = straights(TRACK)[0]
    err = project(TRACK, offset_pose(TRACK, seg.s_start + 1.0, 0.1))
    assert err.e_y == pytest.approx(0.1, abs=1e-12)
    assert err.e_psi == pytest.approx(0.0, abs=1e-12)


def test_far_pose_is_off_track():
    with pytest.raises(OffTrackError):
        project(TRACK, PoseG(20.0, 20.0, 0.0))


def test_project_matches_dense_search(dense):
    rng = np.random.default_rng(7)
    for _ in range(60):
        s = rng.uniform(0, TOTAL)
        pose = offset_pose(TRACK, s, rng.uniform(-0.3, 0.3), rng.uniform(-0.5, 0.5))
        got = project(TRACK, pose).s
        want = brute_force_project(dense, pose.x, pose.y)
        assert abs((got - want + TOTAL / 2) % TOTAL - TOTAL / 2) < 1e-4


# --------------------------------------------------------------- lookahead

def test_collinear_lookahead():
    seg = straights(TRACK)[0]
    s0 = seg.s_start + 0.2
    p = lookahead_point(TRACK, offset_pose(TRACK, s0, 0.0), 0.5, s0)
    assert p.s == pytest.approx(s0 + 0.5, abs=1e-12)


def test_offset_lookahead_closed_form():
    seg = straights(TRACK)[0]
    s0 = seg.s_start + 0.2
    p = lookahead_point(TRACK, offset_pose(TRACK, s0, 0.25), 0.5, s0)
    assert p.s - s0 == pytest.approx(math.sqrt(0.5 ** 2 - 0.25 ** 2), abs=1e-12)
    assert p.s - s0 == pytest.approx(0.4330, abs=1e-4)


def test_lookahead_matches_dense_oracle(dense):
    rng = np.random.default_rng(11)
    for _ in range(40):
        s = rng.uniform(0, TOTAL)
        ld = rng.uniform(0.2, 0.9)
        pose = offset_pose(TRACK, s, rng.uniform(-0.15, 0.15), rng.uniform(-0.3, 0.3))
        hint = project(TRACK, pose).s
        got = lookahead_point(TRACK, pose, ld, hint).s
        want = brute_force_lookahead(dense, TOTAL, pose.x, pose.y, ld, hint)
        assert abs((got - want + TOTAL / 2) % TOTAL - TOTAL / 2) < 1e-4


def test_no_lookahead_when_circle_misses():
    # a tiny circle around a pose far from the path never touches it
    with pytest.raises(NoLookaheadError):
        lookahead_point(TRACK, PoseG(1.5, 3.0, 0.0), 0.05, 0.0)


@settings(max_examples=200, deadline=None)
@given(s=st.floats(0, TOTAL, exclude_max=True), e_y=st.floats(-0.3, 0.3),
       e_psi=st.floats(-0.6, 0.6), ld=st.floats(0.2, 0.9))
def test_lookahead_distance_is_exact(s, e_y, e_psi, ld):
    assume(abs(e_y) < 0.8 * ld)
    pose = offset_pose(TRACK, s, e_y, e_psi)
    p = lookahead_point(TRACK, pose, ld, project(TRACK, pose).s)
    assert abs(math.hypot(p.x - pose.x, p.y - pose.y) - ld) < 1e-9


# --------------------------------------------------------------- LHE / LLE

def test_lhe_zero_on_centerline():
    seg = straights(TRACK)[0]
    s0 = seg.s_start + 0.2
    assert lhe_global(TRACK, offset_pose(TRACK, s0, 0.0), 0.5, s0) == pytest.approx(0, abs=1e-15)


def test_lhe_quarter_offset():
    # vehicle 0.25 m right of the path sees the lookahead point to its left
    seg = straights(TRACK)[0]
    s0 = seg.s_start + 0.2
    alpha = lhe_global(TRACK, offset_pose(TRACK, s0, -0.25), 0.5, s0)
    assert alpha == pytest.approx(math.asin(0.5), abs=1e-12)
    assert alpha == pytest.approx(0.5236, abs=1e-4)
    mirrored = lhe_global(TRACK, offset_pose(TRACK, s0, 0.25), 0.5, s0)
    assert mirrored == pytest.approx(-alpha, abs=1e-12)


def test_lle_examples():
    assert lle_straight(0.0, 0.0, 0.5) == 0.0
    assert lle_straight(0.25, 0.0, 0.5) == pytest.approx(0.25)
    assert math.asin(lle_straight(0.25, 0.0, 0.5) / 0.5) == pytest.approx(0.5236, abs=1e-4)
    assert lle_straight(0.0, 0.1, 0.5) == pytest.approx(0.5 * math.sin(0.1), abs=1e-15)
    assert lle_straight(0.0, 0.1, 0.5) == pytest.approx(0.04992, abs=1e-5)
    with pytest.raises(ValueError):
        lle_straight(0.6, 0.0, 0.5)


@settings(max_examples=200, deadline=None)
@given(frac=st.floats(0, 1), e_y=st.floats(-0.25, 0.25), e_psi=st.floats(-0.7, 0.7),
       which=st.integers(0, 2))
def test_mirrored_pose_negates_lhe(frac, e_y, e_psi, which):
    # the lookahead circle stays on the straight, whose axis is the mirror
    seg = straights(TRACK)[which]
    ld = 0.3
    s0 = seg.s_start + ld + frac * (seg.length - 2 * ld)
    a = lhe_global(TRACK, offset_pose(TRACK, s0, e_y, e_psi), ld, s0)
    b = lhe_global(TRACK, offset_pose(TRACK, s0, -e_y, -e_psi), ld, s0)
    assert abs(a + b) < 1e-12
