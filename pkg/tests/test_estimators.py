"""Estimator entry points: deterministic examples at p in {0, 1}, exact
small-horizon oracles, refusal paths and thread-count invariance."""

from fractions import Fraction

import numpy as np
import pytest

import oracles
from conftest import ASYM3, THREE_D, TWO_D_OP
from gosp.estimators import (
    CensoredMean,
    ConeOutsideShape,
    Estimate,
    EstimatorError,
    GeometryInvalid,
    InsufficientDeaths,
    InsufficientSurvivals,
    NoCrossingFound,
    SubcriticalRefused,
    bg_event_probability,
    box_infection_probe,
    critical_point,
    crossing_probability,
    death_bound_fit,
    density_spectrum,
    dual_survival_curve,
    edge_speeds,
    good_block_probability,
    path_crossing_transfer,
    primal_dual_meet,
    restricted_cone_survival,
    shape_and_time_constants,
    subcritical_decay,
    survival_curve,
    torus_stats,
)
from gosp.geometry import BlockGeometry


# ---------------------------------------------------------------------------
# Estimate

def test_estimate_bernoulli_endpoints():
    e0 = Estimate.from_bernoulli(0, 20)
    assert e0.mean == 0.0 and e0.ci95[0] == 0.0 and e0.ci95[1] > 0.0
    e1 = Estimate.from_bernoulli(20, 20)
    assert e1.mean == 1.0 and e1.ci95[1] == 1.0 and e1.ci95[0] < 1.0
    e = Estimate.from_bernoulli(8, 10)
    assert e.ci95[0] < 0.8 < e.ci95[1]
    assert 0.0 < e.ci95[0] < e.ci95[1] < 1.0


def test_estimate_from_samples():
    e = Estimate.from_samples([1.0, 2.0, 3.0])
    assert e.mean == 2.0
    assert e.stderr == pytest.approx(1.0 / np.sqrt(3))
    with pytest.raises(EstimatorError):
        Estimate.from_samples([])
    with pytest.raises(EstimatorError):
        Estimate.from_bernoulli(0, 0)


# ---------------------------------------------------------------------------
# survival

def test_survival_trivial():
    s1 = survival_curve(TWO_D_OP, 1.0, 10, 50, seed=1)
    assert s1.estimate.mean == 1.0 and s1.estimate.stderr == 0.0
    s0 = survival_curve(TWO_D_OP, 0.0, 10, 50, seed=1)
    assert s0.estimate.mean == 0.0
    assert (s0.taus == 1).all()
    assert dual_survival_curve(TWO_D_OP, 0.0, 10, 50, seed=1).estimate.mean == 0.0
    assert dual_survival_curve(TWO_D_OP, 1.0, 10, 50, seed=1).estimate.mean == 1.0


def test_survival_one_step_closed_form():
    # P(tau > 1) = 1 - (1-p)^2 for the two-point neighbourhood
    p = 0.8
    sc = survival_curve(TWO_D_OP, p, 1, 40000, seed=2)
    exact = 1 - (1 - p) ** 2
    assert abs(sc.estimate.mean - exact) <= 4 * max(sc.estimate.stderr, 1e-9)


@pytest.mark.parametrize("p", [Fraction(4, 5), Fraction(3, 10)])
def test_survival_matches_exact_enumeration(p):
    exact = float(oracles.exact_survival(TWO_D_OP, p, 3))
    sc = survival_curve(TWO_D_OP, float(p), 3, 20000, seed=11)
    assert abs(sc.estimate.mean - exact) <= 4 * max(sc.estimate.stderr, 1e-9)


def test_survival_function_consistency():
    sc = survival_curve(TWO_D_OP, 0.6, 20, 2000, seed=3)
    assert sc.survival_function(0) == 1.0
    vals = [sc.survival_function(t) for t in range(0, 22)]
    assert vals == sorted(vals, reverse=True)
    assert sc.survival_function(21) == sc.estimate.mean


# ---------------------------------------------------------------------------
# critical point proxy

def test_critical_point_bracket():
    cp = critical_point(TWO_D_OP, 12, 12, 200, 0.1, seed=5)
    assert cp.p_hi - cp.p_lo <= 0.1
    assert cp.p_lo < cp.p_hat < cp.p_hi
    assert 0.4 < cp.p_hat < 0.9
    assert len(cp.stability) == 3
    # endpoints of the sweep bracket the 1/2 level
    freq = dict((p, e.mean) for p, e in cp.sweep)
    assert freq[0.0] < 0.5 <= freq[1.0]
    with pytest.raises(EstimatorError):
        critical_point(TWO_D_OP, 12, 12, 100, -1.0, seed=5)


# ---------------------------------------------------------------------------
# shape and edge speeds

def test_shape_p1_deterministic():
    sh = shape_and_time_constants(ASYM3, 1.0, 20, 5, seed=3)
    # sumset support is [-t, 2t] but 2t-1 is unreachable, so the solid
    # agreement run ends at 2t-2 and the rescaled interval is [-1, 1.9]
    assert sh.u_hat == (-1.0, 1.9)
    assert sh.mu_hat[(-1.0,)].mean == 1.0
    assert 0.5 <= sh.mu_hat[(1.0,)].mean <= 0.65
    assert sh.reps == 5


def test_shape_refuses_subcritical():
    with pytest.raises(SubcriticalRefused):
        shape_and_time_constants(TWO_D_OP, 0.3, 20, 5, seed=3)


def test_shape_requires_d2():
    from gosp.dynamics import DimensionNot2

    with pytest.raises(DimensionNot2):
        shape_and_time_constants(THREE_D, 0.9, 20, 5, seed=3)


def test_edge_speeds_p1_exact():
    e = edge_speeds(ASYM3, 1.0, 20, 4, seed=1)
    assert e.alpha.mean == 2.0 and e.alpha.stderr == 0.0
    assert e.beta.mean == -1.0
    assert e.alpha_upper == 2.0 and e.beta_lower == -1.0
    e = edge_speeds(TWO_D_OP, 1.0, 20, 4, seed=1)
    assert e.alpha.mean == 1.0 and e.beta.mean == 0.0


def test_edge_speeds_refuses_dead_replicas():
    with pytest.raises(InsufficientSurvivals):
        edge_speeds(TWO_D_OP, 0.0, 20, 4, seed=1)


# ---------------------------------------------------------------------------
# extinction-time tails

def test_death_bound_fit_negative_slope():
    df = death_bound_fit(TWO_D_OP, 0.8, 60, 20000, (5, 25), seed=6)
    assert df.slope < 0
    assert df.r2 > 0.9
    assert df.n_deaths >= 50


def test_death_bound_fit_refusals():
    with pytest.raises(InsufficientDeaths):
        death_bound_fit(TWO_D_OP, 1.0, 60, 500, (5, 25), seed=6)
    with pytest.raises(InsufficientDeaths):
        # at p = 0 every replica dies at step 1, outside the window
        death_bound_fit(TWO_D_OP, 0.0, 60, 500, (5, 25), seed=6)
    with pytest.raises(EstimatorError):
        death_bound_fit(TWO_D_OP, 0.5, 60, 500, (30, 70), seed=6)


def test_subcritical_decay_positive_rate():
    dc = subcritical_decay(
        TWO_D_OP, 0.5, 20, 20000, seed=7, windows=((5, 10), (10, 15))
    )
    assert dc.c_hat > 0
    for (_, c_w, n_w) in dc.window_fits:
        assert c_w > 0 and n_w >= 50
    assert dc.survival_function(0) == 1.0
    assert dc.survival_function(15) < dc.survival_function(5)


def test_subcritical_decay_refuses_without_survivors():
    with pytest.raises(InsufficientSurvivals):
        subcritical_decay(TWO_D_OP, 0.0, 20, 1000, seed=7,
                          windows=((5, 10),))


# ---------------------------------------------------------------------------
# torus

def test_torus_stats_p0():
    ts = torus_stats(TWO_D_OP, 0.0, [6, 8], 40, 50, seed=8)
    assert ts.regime == "sub"
    for s in ts.per_size:
        assert s.mean_tau.mean == 1.0 and s.censored == 0
        assert s.ratio_log == pytest.approx(1 / np.log(s.n))
    assert ts.slope_vs_log == pytest.approx(0.0, abs=1e-12)


def test_torus_stats_censored_refusal():
    with pytest.raises(CensoredMean):
        torus_stats(TWO_D_OP, 0.8, [8], 30, 200, seed=8)


def test_torus_stats_rejects_unknown_regime():
    with pytest.raises(EstimatorError):
        torus_stats(TWO_D_OP, 0.5, [8], 30, 50, seed=8, regime="mixed")


# ---------------------------------------------------------------------------
# density

def test_density_trivial():
    d1 = density_spectrum(TWO_D_OP, 1.0, 4, 20, 5, seed=9, a_values=(0.5,))
    assert (d1.samples == 1.0).all()
    assert d1.freq_le[0.5] == 0.0
    d0 = density_spectrum(TWO_D_OP, 0.0, 4, 20, 5, seed=9, a_values=(0.5,))
    assert (d0.samples == 0.0).all()
    assert d0.freq_le[0.5] == 1.0
    with pytest.raises(EstimatorError):
        density_spectrum(TWO_D_OP, 0.5, 4, 5, 5, seed=9)


# ---------------------------------------------------------------------------
# crossing and block events

def test_crossing_trivial():
    c1 = crossing_probability(TWO_D_OP, 1.0, 20, 0.2, 0, 10, seed=10)
    assert c1.estimate.mean == 1.0
    assert c1.w == 4
    c0 = crossing_probability(TWO_D_OP, 0.0, 20, 0.2, 0, 10, seed=10)
    assert c0.estimate.mean == 0.0


def test_bg_event_trivial():
    g = BlockGeometry((2,), 3, (0,))
    assert bg_event_probability(TWO_D_OP, 1.0, g, 1, 6, seed=2).estimate.mean == 1.0
    assert bg_event_probability(TWO_D_OP, 0.0, g, 1, 6, seed=2).estimate.mean == 0.0


def test_bg_event_geometry_validation():
    with pytest.raises(GeometryInvalid):
        bg_event_probability(TWO_D_OP, 0.5, BlockGeometry((2,), 3, (0,)), 2,
                             4, seed=2)
    with pytest.raises(GeometryInvalid):
        bg_event_probability(TWO_D_OP, 0.5, BlockGeometry((2,), 1, (0,)), 1,
                             4, seed=2)
    with pytest.raises(GeometryInvalid):
        bg_event_probability(THREE_D, 0.5, BlockGeometry((2,), 3, (0,)), 1,
                             4, seed=2)


def test_good_block_p1_with_matching_tilt():
    gb = good_block_probability(
        TWO_D_OP, 1.0, 16, 8, 2, seed=3, v=(Fraction(1, 2),)
    )
    assert gb.estimate.mean == 1.0
    assert gb.event1.mean == 1.0
    assert gb.event2.mean == 1.0
    assert gb.event3.mean == 1.0


def test_good_block_p0():
    gb = good_block_probability(
        TWO_D_OP, 0.0, 16, 8, 2, seed=3, v=(Fraction(1, 2),)
    )
    # everything dies instantly: the dichotomy and coupling hold trivially
    # but the displaced probe blocks are never reached
    assert gb.event1.mean == 1.0
    assert gb.event3.mean == 0.0
    assert gb.estimate.mean == 0.0


def test_good_block_geometry_validation():
    with pytest.raises(GeometryInvalid):
        good_block_probability(TWO_D_OP, 0.5, 16, 1, 2, seed=3)
    with pytest.raises(GeometryInvalid):
        good_block_probability(TWO_D_OP, 0.5, 10, 4, 2, seed=3)
    with pytest.raises(GeometryInvalid):
        good_block_probability(TWO_D_OP, 0.5, 16, 4, 2, seed=3, v=(0, 0))


# ---------------------------------------------------------------------------
# primal-dual meeting

def test_meet_trivial():
    m = primal_dual_meet(TWO_D_OP, 1.0, 10, 8, (Fraction(1, 2),), seed=4)
    assert m.z == (10,)
    assert m.both_alive == 8
    assert m.failure.mean == 0.0
    m0 = primal_dual_meet(TWO_D_OP, 0.0, 10, 8, (Fraction(1, 2),), seed=4)
    assert m0.both_alive == 0
    assert m0.failure.mean == 0.0


def test_meet_rejects_bad_vhat():
    with pytest.raises(EstimatorError):
        primal_dual_meet(TWO_D_OP, 0.5, 10, 8, (0, 0), seed=4)


# ---------------------------------------------------------------------------
# restricted cones

def test_cone_survival_trivial():
    c1 = restricted_cone_survival(
        TWO_D_OP, 1.0, ("1/4", "3/4"), 20, 10, seed=1, t0=5, shape=(0.0, 1.0)
    )
    assert c1.estimate.mean == 1.0
    assert c1.bounds == (0.25, 0.75)
    c0 = restricted_cone_survival(
        TWO_D_OP, 0.0, ("1/4", "3/4"), 20, 10, seed=1, t0=5, shape=(0.0, 1.0)
    )
    assert c0.estimate.mean == 0.0


def test_cone_outside_shape_refused():
    with pytest.raises(ConeOutsideShape):
        restricted_cone_survival(
            TWO_D_OP, 1.0, ("-1/2", "1/2"), 20, 10, seed=1, t0=5,
            shape=(0.0, 1.0),
        )


# ---------------------------------------------------------------------------
# path crossing and transfer

def test_box_infection_probe_examples():
    assert box_infection_probe(TWO_D_OP) == (1, (1,), 1)
    assert box_infection_probe(ASYM3) == (1, (0,), 1)


def test_transfer_p1_identical_boxes():
    r = path_crossing_transfer(
        TWO_D_OP, 1.0, 0.0, 20, 5, seed=2,
        alpha="1/2", beta="1/2", shift=0, half_width=3,
    )
    assert r.crossing.mean == 1.0
    assert r.transfer.mean == 1.0
    # both boxes coincide, so the leftmost witnesses share every vertex
    assert r.path_meets == r.crossed == 5


def test_transfer_refusals():
    with pytest.raises(EstimatorError):
        path_crossing_transfer(TWO_D_OP, 0.8, 0.3, 20, 5, seed=2,
                               alpha="1/2", beta="1/2")
    with pytest.raises(EstimatorError):
        path_crossing_transfer(TWO_D_OP, 0.8, 0.1, 20, 5, seed=2)
    with pytest.raises(NoCrossingFound):
        path_crossing_transfer(TWO_D_OP, 0.0, 0.0, 20, 5, seed=2,
                               alpha="1/2", beta="1/2")


# ---------------------------------------------------------------------------
# aggregation is independent of the thread count

def test_thread_count_invariance():
    a = survival_curve(TWO_D_OP, 0.6, 30, 5000, seed=12, threads=1)
    b = survival_curve(TWO_D_OP, 0.6, 30, 5000, seed=12, threads=3)
    assert (a.taus == b.taus).all()
    assert a.estimate == b.estimate
    ea = edge_speeds(TWO_D_OP, 0.8, 30, 20, seed=13, threads=1)
    eb = edge_speeds(TWO_D_OP, 0.8, 30, 20, seed=13, threads=2)
    assert ea.alpha == eb.alpha and ea.beta == eb.beta
    da = density_spectrum(TWO_D_OP, 0.7, 4, 20, 12, seed=14, threads=1)
    db = density_spectrum(TWO_D_OP, 0.7, 4, 20, 12, seed=14, threads=2)
    assert (da.samples == db.samples).all()
