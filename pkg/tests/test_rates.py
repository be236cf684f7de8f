import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from renyires import Channel, InfeasibleTarget, Pmf, expected_renyi_div, mutual_info
from renyires import rates
from renyires.prob_core import kl_array, simplex_lattice

from conftest import PROPERTY, instance, random_instance

LOG_136 = 0.307485
KL_02_05 = 0.192745


# --- one-shot --------------------------------------------------------------


def test_gamma_one_shot_examples(bsc02):
    w, u = bsc02
    assert rates.gamma_one_shot(u, w, u, 0.0, 1.0) == pytest.approx(LOG_136, abs=1e-6)
    assert rates.gamma_one_shot(u, w, u, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert rates.gamma_one_shot(Pmf.point(2, 0), Channel.identity(2), u, 0.0, 1.0) == pytest.approx(math.log(2))


def test_direct_plus_examples(bsc02):
    w, u = bsc02
    assert rates.one_shot_direct_plus(u, w, u, math.log(2), 1.0) == pytest.approx(1.68)
    assert rates.one_shot_direct_plus(u, w, u, 0.0, 1.0) == pytest.approx(2.36)
    assert rates.one_shot_direct_plus(u, w, u, 60.0, 1.0) == pytest.approx(1.0)


def test_converse_plus_examples(bsc02):
    w, u = bsc02
    assert rates.one_shot_converse_plus(u, w, u, 0.0, 1.0) == pytest.approx(1.36)
    assert rates.one_shot_converse_plus(u, w, u, math.log(2), 1.0) == pytest.approx(1.0)


def test_direct_minus_examples(bsc02):
    w, u = bsc02
    assert rates.one_shot_direct_minus(u, w, u, 50.0, 0.5) == pytest.approx(2**-0.5)
    # R = 0: threshold 1 picks the pairs with W(y|x) > P_Y(y) = 1/2
    s = 0.5
    high = 2 * 0.5 * 0.8 ** (1 - s) * 0.5**s
    low = 2 * 0.5 * 0.2 * 0.5 ** (-s) * 0.5**s
    assert rates.one_shot_direct_minus(u, w, u, 0.0, s) == pytest.approx(2**-s * (high + low))


def test_one_shot_bounds_bundle(bsc02):
    w, u = bsc02
    b = rates.one_shot_bounds(u, w, u, 0.1, 0.5)
    assert b.direct_plus >= b.converse_plus
    assert b.converse_minus >= b.direct_minus


def test_one_shot_random_orderings():
    rng = np.random.default_rng(11)
    for _ in range(50):
        px, w, q = random_instance(rng, nx=rng.integers(2, 4), ny=rng.integers(2, 4))
        r = float(rng.uniform(0, 1.5))
        for s in (0.25, 0.5, 0.75):
            b = rates.one_shot_bounds(px, w, q, r, s)
            assert b.converse_minus >= b.direct_minus - 1e-12
            assert b.direct_plus - b.converse_plus <= b.converse_plus + 1e-12
            assert b.converse_plus <= b.direct_plus + 1e-12


def test_gamma_one_shot_shape_in_rate(bsc02):
    w, _ = bsc02
    px = Pmf.bernoulli(0.3)
    q = Pmf.bernoulli(0.45)
    grid = np.linspace(0, 1, 101)
    vals = np.array([rates.gamma_one_shot(px, w, q, r, 0.5) for r in grid])
    assert np.all(np.diff(vals) <= 1e-12)
    assert np.all(np.diff(vals, 2) >= -1e-12)


# --- tau -------------------------------------------------------------------


def test_tau_at_zero_with_matched_output(bsc02):
    w, u = bsc02
    assert rates.tau(u, w, u, 0.3, 0.5, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_tau_four_term_sum(bsc02):
    w, u = bsc02
    r, s, t = 0.1, 0.5, 0.3
    total = sum(0.5 * w.rows[x, y] ** (1 - t) * 0.5 ** (t - s) * 0.5**s for x in range(2) for y in range(2))
    assert rates.tau(u, w, u, r, s, t) == pytest.approx(-t * r - math.log(total), abs=1e-14)


@PROPERTY
@given(instance(), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.05, 0.95), st.floats(0.0, 1.0))
def test_tau_concave_midpoint(inst, t1, t2, s, r):
    px, w, q = inst
    mid = rates.tau(px, w, q, r, s, 0.5 * (t1 + t2))
    assert mid >= 0.5 * (rates.tau(px, w, q, r, s, t1) + rates.tau(px, w, q, r, s, t2)) - 1e-10


# --- single-letter minus ---------------------------------------------------


def test_gamma_minus_vanishes_above_min_mi(bsc02):
    w, u = bsc02
    r = mutual_info(u, w)
    for s in (0.25, 0.5, 0.75):
        assert rates.gamma_minus_single_letter(w, u, r + 1e-9, s, 100).value <= 1e-6


def test_gamma_minus_positive_at_zero_rate(bsc02):
    w, u = bsc02
    res = rates.gamma_minus_single_letter(w, u, 0.0, 0.5, 100)
    assert res.value > 0
    assert 0.0 <= res.metadata["argmax_t"] <= 0.5


def test_gamma_minus_limits_finite(bsc02):
    w, u = bsc02
    vals = [rates.gamma_minus_single_letter(w, u, 0.05, s, 50).value for s in (1e-3, 0.01, 0.5, 0.99, 0.999)]
    assert all(math.isfinite(v) for v in vals)
    assert abs(vals[0] - vals[1]) < 1e-2
    assert abs(vals[3] - vals[4]) < 1e-2


# --- multi-letter ----------------------------------------------------------


def test_multiletter_n1_matches_single_letter(bsc02):
    w, u = bsc02
    assert rates.gamma_multiletter(w, u, 0.1, 0.5, 1, 40) == rates.gamma_plus_single_letter(w, u, 0.1, 0.5, 40).value
    assert rates.gamma_multiletter(w, u, 0.1, -0.5, 1, 40) == rates.gamma_minus_single_letter(w, u, 0.1, 0.5, 40).value


@pytest.mark.parametrize("s", [0.5, 1.0, -0.5])
def test_multiletter_n2_not_above_n1(bsc02, s):
    w, u = bsc02
    one = rates.gamma_multiletter(w, u, 0.1, s, 1, 20)
    two = rates.gamma_multiletter(w, u, 0.1, s, 2, 12)
    assert two <= one + 1e-6


def test_multiletter_cap(bsc02):
    from renyires import SizeCapExceeded

    w, u = bsc02
    with pytest.raises(SizeCapExceeded):
        rates.gamma_multiletter(w, u, 0.1, 0.5, 5, 4)


# --- eta -------------------------------------------------------------------


def test_eta_at_channel_and_matched_output(bsc02):
    w, u = bsc02
    assert rates.eta(w, u, u, w, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_eta_variational_identity_against_grid():
    # per-row grid maximization of -(1+s)/s KL(v||w_x) + KL(v||q) is an
    # independent route to the expected Rényi divergence
    rng = np.random.default_rng(4)
    grid = simplex_lattice(2, 2000)
    for _ in range(5):
        px, w, q = random_instance(rng)
        for s in (0.25, 0.5, 1.0):
            c = (1 + s) / s
            per_row = [np.max(-c * kl_array(grid, w.rows[x]) + kl_array(grid, q.probs)) for x in range(2)]
            grid_val = float(px.probs @ per_row)
            exact = expected_renyi_div(px, w, q, s)
            assert grid_val <= exact + 1e-12
            assert exact - grid_val <= 1e-4


def test_max_eta_beats_channel_itself():
    rng = np.random.default_rng(8)
    for _ in range(10):
        px, w, q = random_instance(rng, 3, 3)
        val, chan = rates.max_eta(w, q, px, 0.5, restarts=10)
        assert val >= rates.eta(w, q, px, w, 0.5) - 1e-12
        assert val == pytest.approx(rates.eta(w, q, px, chan, 0.5), abs=1e-9)


def test_max_eta_against_joint_grid():
    # brute force over both rows of a binary test channel
    w = Channel.from_matrix([[0.9, 0.1], [0.3, 0.7]])
    q = Pmf.from_probs([0.5, 0.5])
    px = Pmf.from_probs([0.4, 0.6])
    s = 0.5
    g = np.linspace(0, 1, 401)
    a, b = np.meshgrid(g, g, indexing="ij")
    v = np.stack([np.stack([a, 1 - a], -1), np.stack([b, 1 - b], -1)], axis=-2)
    pen = px.probs[0] * kl_array(v[..., 0, :], w.rows[0]) + px.probs[1] * kl_array(v[..., 1, :], w.rows[1])
    out = kl_array(np.einsum("x,...xy->...y", px.probs, v), q.probs)
    best = float(np.max(-(1 / s + 1) * pen + out))
    val, _ = rates.max_eta(w, q, px, s, restarts=20)
    assert val >= best - 1e-9
    assert val - best < 1e-3


# --- plus-case asymptotics -------------------------------------------------


def test_plus_vanishes_above_log_136(bsc02):
    w, u = bsc02
    assert rates.asymptotic_resolvability_plus(w, u, LOG_136 + 1e-4, 1.0).value <= 1e-4


def test_plus_positive_at_zero_rate(bsc02):
    w, u = bsc02
    res = rates.asymptotic_resolvability_plus(w, u, 0.0, 1.0)
    assert res.value > 0.1
    assert res.achiever_py_given_x is not None


def test_plus_identity_channel_at_log2():
    u = Pmf.uniform(2)
    assert rates.asymptotic_resolvability_plus(Channel.identity(2), u, math.log(2), 1.0).value <= 1e-9


def test_plus_curve_matches_single_calls(bsc02):
    w, u = bsc02
    curve = rates.resolvability_plus_curve(w, u, [0.0, 0.1, 0.2], 0.5, 50, restarts=10)
    for r, c in zip([0.0, 0.1, 0.2], curve):
        assert c.value == pytest.approx(rates.asymptotic_resolvability_plus(w, u, r, 0.5, 50, restarts=10).value)


@pytest.mark.parametrize("s", [0.5, 1.0])
def test_plus_threshold(bsc02, s):
    w, u = bsc02
    r_min = rates.min_rate(w, u, s)
    hi = rates.asymptotic_resolvability_plus(w, u, r_min + 0.01, s).value
    lo = rates.asymptotic_resolvability_plus(w, u, max(r_min - 0.05, 0.0), s).value
    assert hi == 0.0 or hi < 1e-9
    assert lo > 1e-3


# --- minus bounds ----------------------------------------------------------


def test_lb_below_ub_on_grid(bsc02):
    w, u = bsc02
    grid = np.linspace(0, 0.4, 20)
    lb, ub = rates.minus_bounds_grid(w, u, grid, [0.1, 0.3, 0.5, 0.7, 0.9], 30)
    assert np.all(lb <= ub + 1e-12)


def test_minus_bounds_vanish_above_min_mi(bsc02):
    w, u = bsc02
    r = mutual_info(u, w) + 1e-9
    terms = rates.minus_bound_terms(w, u, 20)
    for s in (0.25, 0.5):
        assert rates.gamma_lb_minus(w, u, r, s, terms=terms).value <= 1e-9
        assert rates.gamma_ub_minus(w, u, r, s, terms=terms).value <= 1e-9


def test_ub_projection_inactive_at_channel(bsc02):
    w, u = bsc02
    terms = rates.minus_bound_terms(w, u, 10)
    ptx = terms.joints.sum(axis=2)
    at_channel = np.all(np.abs(terms.joints - ptx[:, :, None] * w.rows[None]) < 1e-15, axis=(1, 2))
    assert at_channel.any()
    assert np.allclose(terms.ub_second(0.5)[at_channel], terms.out_q[at_channel], atol=1e-12)


# --- minimum rate ----------------------------------------------------------


def test_min_rate_examples(bsc02):
    w, u = bsc02
    assert rates.min_rate(w, u, 1.0) == pytest.approx(LOG_136, abs=1e-4)
    assert rates.min_rate(w, u, 0.0) == pytest.approx(KL_02_05, abs=1e-4)
    assert rates.min_rate(w, u, -1.0) == 0.0
    assert rates.min_rate(Channel.from_matrix([[0.7, 0.3], [0.1, 0.9]]), Pmf.from_probs([0.4, 0.6]), -1.0) == 0.0


def test_min_rate_infeasible():
    with pytest.raises(InfeasibleTarget):
        rates.min_rate(Channel.bsc(0.2), Pmf.bernoulli(0.9), 0.5)


def test_min_rate_monotone_and_continuous():
    w = Channel.from_matrix([[0.9, 0.1, 0.0], [0.2, 0.5, 0.3], [0.1, 0.1, 0.8]])
    q = Pmf.from_probs(np.array([0.3, 0.3, 0.4]) @ w.rows)
    ss = np.linspace(-1, 1, 41)
    vals = [rates.min_rate(w, q, s, 30) for s in ss]
    assert np.all(np.diff(vals) >= -1e-9)
    for p in (0.05, 0.2, 0.4):
        wb = Channel.bsc(p)
        u = Pmf.uniform(2)
        assert abs(rates.min_rate(wb, u, 1e-3) - rates.min_rate(wb, u, 0.0)) <= 5e-3


def test_bsc_closed_form_matches_search():
    u = Pmf.uniform(2)
    for p in (0.05, 0.2, 0.35):
        for s in (-0.5, 0.0, 0.25, 0.75, 1.0):
            assert rates.min_rate(Channel.bsc(p), u, s) == pytest.approx(rates.bsc_min_rate(p, s), abs=1e-10)
