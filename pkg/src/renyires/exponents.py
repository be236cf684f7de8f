"""Decay exponents of the Rényi resolvability for random codes."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _search
from .errors import InfeasibleTarget
from .prob_core import (
    Channel,
    Pmf,
    S_ZERO_TOL,
    _check_input,
    _check_output,
    cond_kl_array,
    feasible_points_array,
)

#: default number of log-spaced points for the eps sweep
EPS_POINTS = 200
EPS_MIN = 1e-4


class RateBelowThreshold(UserWarning):
    """The rate does not exceed the threshold under which the exponent formula holds."""


@dataclass(frozen=True)
class ExponentResult:
    """An exponent value with the maximizing t (and eps for the typical-set bound)."""

    value: float
    argmax_t: float
    argmax_eps: float | None = None
    flags: tuple = field(default_factory=tuple)

    def __float__(self) -> float:
        return float(self.value)


def _log_row_sums(rows: np.ndarray, q: np.ndarray, t: np.ndarray) -> np.ndarray:
    """log sum_y W(y|x)^{1+t} Q(y)^{-t}, shape (T, X); rows with W ~ Q off-support give inf."""
    t = np.atleast_1d(np.asarray(t, float))[:, None, None]
    active = rows[None] > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        logw = np.log(np.where(rows > 0, rows, 1.0))[None]
        logq = np.log(q)[None, None, :]
        terms = np.where(active, np.exp((1 + t) * logw - t * logq), 0.0)
        return np.log(terms.sum(axis=-1))


def _scaled_joint_div(px: np.ndarray, rows: np.ndarray, q: np.ndarray, t: np.ndarray) -> np.ndarray:
    """t * D_{1+t}(P_XY || P_X x Q) for an array of t (0 at t = 0)."""
    used = px > 0
    ls = _log_row_sums(rows[used], q, t)
    with np.errstate(over="ignore"):
        return np.log(np.exp(ls) @ px[used])


def _scaled_expected_div(px: np.ndarray, rows: np.ndarray, q: np.ndarray, t: np.ndarray) -> np.ndarray:
    """t * sum_x px(x) D_{1+t}(W(.|x) || Q) for an array of t."""
    used = px > 0
    return _log_row_sums(rows[used], q, t) @ px[used]


def _t_range(s: float) -> tuple[float, float]:
    if not (-1.0 < s <= 1.0):
        raise ValueError(f"s must lie in (-1, 1], got {s}")
    return (s, 1.0) if s > S_ZERO_TOL else (0.0, 1.0)


def iid_threshold(px: Pmf, w: Channel, q: Pmf, s: float) -> float:
    """Rate above which the i.i.d. exponent formula applies."""
    if s > S_ZERO_TOL:
        return float(_scaled_joint_div(px.probs, w.rows, q.probs, np.array([s]))[0] / s)
    return float(cond_kl_array(px.probs, w.rows, q.probs))


def e_iid(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> ExponentResult:
    """Exact exponent of the i.i.d. random-code ensemble.

    Maximizes t * (rate - D_{1+t}(P_XY || P_X x Q)) over t in [s, 1] (s > 0) or
    [0, 1] (s <= 0) by a 1e-3 grid with golden-section polishing. A
    :class:`RateBelowThreshold` warning is issued when the rate does not exceed
    the threshold of the formula.
    """
    _check_input(px, w)
    _check_output(q, w)
    lo, hi = _t_range(s)
    thr = iid_threshold(px, w, q, s)
    flags = ()
    if rate <= thr:
        warnings.warn(f"rate {rate:.6g} does not exceed threshold {thr:.6g}", RateBelowThreshold, stacklevel=2)
        flags = ("below_threshold",)

    def f(t):
        t = np.atleast_1d(t)
        return t * rate - _scaled_joint_div(px.probs, w.rows, q.probs, t)

    t_star, val = _search.maximize_interval(f, lo, hi)
    return ExponentResult(float(val), float(t_star), None, flags)


def e_iid_clipped(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> ExponentResult:
    """i.i.d. exponent clipped at zero (the s <= 0 branch is non-negative already)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RateBelowThreshold)
        res = e_iid(px, w, q, rate, s)
    if res.value < 0:
        return ExponentResult(0.0, res.argmax_t, None, res.flags + ("clipped",))
    return res


def _theta_arrays(px: np.ndarray, rows: np.ndarray, q: np.ndarray, rate: float, s: float, eps: float):
    lo = max(s, 0.0)

    def f(t):
        t = np.atleast_1d(t)
        return t * rate - (1.0 + eps) * _scaled_expected_div(px, rows, q, t)

    return _search.maximize_interval(f, lo, 1.0)


def theta(s: float, eps: float, px: Pmf, w: Channel, q: Pmf, rate: float) -> float:
    """max over t in [s, 1] of t * (rate - (1 + eps) * expected D_{1+t})."""
    _check_input(px, w)
    _check_output(q, w)
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    return float(_theta_arrays(px.probs, w.rows, q.probs, rate, s, eps)[1])


def e_ts(px: Pmf, w: Channel, q: Pmf, rate: float, s: float, eps_points: int = EPS_POINTS) -> ExponentResult:
    """Typical-set exponent: sup over eps of min{eps^2 P_min / 3, theta}.

    A zero atom in ``px`` makes the first term vanish; the bound is then 0 and
    the result carries the ``degenerate_typical_set`` flag. Negative values
    (rates below the minimum rate) are clipped at 0.
    """
    _check_input(px, w)
    _check_output(q, w)
    if not (-1.0 < s <= 1.0):
        raise ValueError(f"s must lie in (-1, 1], got {s}")
    p_min = float(px.probs.min())
    if p_min <= 0:
        return ExponentResult(0.0, 0.0, None, ("degenerate_typical_set",))
    s_eff = s if s > S_ZERO_TOL else 0.0
    eps_grid = np.geomspace(EPS_MIN, 1.0, eps_points)

    def envelope(eps: float):
        t_star, th = _theta_arrays(px.probs, w.rows, q.probs, rate, s_eff, eps)
        return min(eps * eps * p_min / 3.0, th), t_star

    vals = np.array([envelope(e)[0] for e in eps_grid])
    k = int(np.argmax(vals))
    # the envelope is a min of an increasing and a decreasing function of eps
    a = eps_grid[max(k - 1, 0)]
    b = eps_grid[min(k + 1, len(eps_grid) - 1)]
    e_star, v_star = _search.golden_max(lambda e: envelope(e)[0], a, b, tol=1e-12)
    if v_star < vals[k]:
        e_star, v_star = float(eps_grid[k]), float(vals[k])
    t_star = envelope(e_star)[1]
    if v_star <= 0:
        return ExponentResult(0.0, float(t_star), float(e_star), ("clipped",))
    return ExponentResult(float(v_star), float(t_star), float(e_star))


@dataclass(frozen=True)
class ExponentBound:
    """Lower bound on the best exponent with both branches at the best input."""

    value: float
    iid_branch: float
    ts_branch: float
    achiever_px: Pmf
    iid_best: float
    ts_best: float

    def __float__(self) -> float:
        return float(self.value)


def exponent_lower_bound(w: Channel, q: Pmf, rate: float, s: float, grid_res: int = 20) -> ExponentBound:
    """max over feasible inputs of max{clipped i.i.d. exponent, typical-set exponent}.

    ``iid_best`` and ``ts_best`` are the separate maxima of each branch over
    the same candidate inputs.
    """
    _check_output(q, w)
    pts, feasible, _ = feasible_points_array(w.rows, q.probs, grid_res)
    if not feasible:
        raise InfeasibleTarget("target not reachable through the channel")
    best = None
    iid_best = ts_best = 0.0
    for row in pts:
        px = Pmf(w.input_alphabet, row)
        a = e_iid_clipped(px, w, q, rate, s).value
        b = e_ts(px, w, q, rate, s).value
        iid_best = max(iid_best, a)
        ts_best = max(ts_best, b)
        v = max(a, b)
        if best is None or v > best[0]:
            best = (v, a, b, px)
    return ExponentBound(best[0], best[1], best[2], best[3], iid_best, ts_best)
