"""Resolvability rates: one-shot bounds, min-max rate expressions and minimum rates.

Notation in the code: ``px`` is the input pmf, ``w`` the channel, ``q`` the
target output pmf, ``rate`` the code rate in nats and ``s`` the order offset
(order 1+s for the plus case, 1-s for the minus case).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _search
from .errors import InfeasibleTarget
from .prob_core import (
    Channel,
    Pmf,
    S_ZERO_TOL,
    _check_input,
    _check_output,
    cond_renyi_div,
    entropy_array,
    feasible_points_array,
    kl_array,
    product_channel,
    product_pmf,
    push_forward,
    refine_lattice,
    renyi_array,
    renyi_div,
    simplex_lattice,
)


@dataclass(frozen=True)
class OneShotBounds:
    """Bounds on e^{sD} (plus case) and e^{-sD} (minus case) for a random code."""

    direct_plus: float
    converse_plus: float
    direct_minus: float
    converse_minus: float


@dataclass(frozen=True, eq=False)
class AsymptoticRate:
    """Value of a min-max rate expression with the grid achievers."""

    value: float
    achiever_px: Pmf
    achiever_py_given_x: Channel | None = None
    metadata: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)


def _check_plus_s(s: float) -> None:
    if not (0.0 < s <= 1.0):
        raise ValueError(f"s must lie in (0, 1], got {s}")


def _check_minus_s(s: float) -> None:
    if not (0.0 < s < 1.0):
        raise ValueError(f"s must lie in (0, 1), got {s}")


# ---------------------------------------------------------------------------
# one-shot bounds
# ---------------------------------------------------------------------------


def gamma_one_shot(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> float:
    """max{D_{1+s}(P_XY || P_X x Q) - rate, D_{1+s}(P_Y || Q)}."""
    _check_plus_s(s)
    joint_term = cond_renyi_div(px, w, q, s)
    return max(joint_term - rate, renyi_div(push_forward(px, w), q, s))


def one_shot_direct_plus(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> float:
    """Upper bound on the ensemble e^{sD} of an i.i.d. random code."""
    _check_plus_s(s)
    joint_term = cond_renyi_div(px, w, q, s)
    out_term = renyi_div(push_forward(px, w), q, s)
    return float(np.exp(s * joint_term - s * rate) + np.exp(s * out_term))


def one_shot_converse_plus(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> float:
    """Lower bound e^{s * gamma_one_shot} on the ensemble e^{sD}."""
    return float(np.exp(s * gamma_one_shot(px, w, q, rate, s)))


def _minus_split(px: Pmf, w: Channel, q: Pmf, rate: float, s: float, threshold: float):
    """The two indicator-split sums shared by the minus-case bounds."""
    _check_input(px, w)
    _check_output(q, w)
    p = px.probs[:, None]
    rows = w.rows
    py = px.probs @ rows
    active = (p > 0) & (rows > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(active, rows / py[None, :], 0.0)
        big = active & (ratio >= threshold)
        small = active & ~big
        qs = q.probs[None, :] ** s
        high = np.where(big, p * rows ** (1 - s) * qs, 0.0).sum()
        low = np.where(small, p * rows * py[None, :] ** (-s) * qs, 0.0).sum()
    return float(high), float(low)


def one_shot_direct_minus(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> float:
    """Lower bound on the ensemble e^{-sD_{1-s}} (threshold e^R, factor 2^-s)."""
    if not (0.0 <= s < 1.0):
        raise ValueError(f"s must lie in [0, 1), got {s}")
    high, low = _minus_split(px, w, q, rate, s, np.exp(rate))
    return float(2.0 ** (-s) * (np.exp(s * rate) * high + low))


def one_shot_converse_minus(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> float:
    """Upper-bound expression on e^{-sD_{1-s}} (threshold e^R / 2)."""
    if not (0.0 <= s < 1.0):
        raise ValueError(f"s must lie in [0, 1), got {s}")
    high, low = _minus_split(px, w, q, rate, s, np.exp(rate) / 2.0)
    return float(np.exp(s * rate) * high + low)


def one_shot_bounds(px: Pmf, w: Channel, q: Pmf, rate: float, s: float) -> OneShotBounds:
    """All four one-shot bounds at a common input; needs s in (0, 1)."""
    return OneShotBounds(
        direct_plus=one_shot_direct_plus(px, w, q, rate, s),
        converse_plus=one_shot_converse_plus(px, w, q, rate, s),
        direct_minus=one_shot_direct_minus(px, w, q, rate, s),
        converse_minus=one_shot_converse_minus(px, w, q, rate, s),
    )


# ---------------------------------------------------------------------------
# minus-case exponent tau and the single-letter min-max
# ---------------------------------------------------------------------------


def tau_array(px: np.ndarray, rows: np.ndarray, q: np.ndarray, rate: float, s: float, t) -> np.ndarray:
    """Vectorized tau over a batch of inputs ``px[..., x]`` and orders ``t[...]``."""
    px = np.asarray(px, float)
    t = np.asarray(t, float)
    py = px @ rows
    active = (px[..., :, None] > 0) & (rows > 0)
    tt = t[..., None, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_terms = (
            np.log(np.where(active, px[..., :, None], 1.0))
            + (1 - tt) * np.log(np.where(active, rows, 1.0))
            + (tt - s) * np.log(np.where(py > 0, py, 1.0))[..., None, :]
            + s * np.log(q)[None, :]
        )
        terms = np.where(active, np.exp(log_terms), 0.0)
        return -t * rate - np.log(terms.sum(axis=(-2, -1)))


def tau(px: Pmf, w: Channel, q: Pmf, rate: float, s: float, t: float) -> float:
    """-t R - log sum_{x,y} P(x) W(y|x)^{1-t} P_Y(y)^{t-s} Q(y)^s."""
    _check_input(px, w)
    _check_output(q, w)
    return float(tau_array(px.probs, w.rows, q.probs, rate, s, t))


def _minus_objective(rows: np.ndarray, q: np.ndarray, rate: float, s: float):
    """px batch -> (max over t in [0, s] of tau / s, argmax t)."""

    def f(pts: np.ndarray):
        lo = np.zeros(len(pts))
        hi = np.full(len(pts), s)
        t_best, v_best = _search.ternary_max(lambda t: tau_array(pts, rows, q, rate, s, t), lo, hi, tol=1e-9)
        return v_best / s, t_best

    return f


def gamma_minus_single_letter(w: Channel, q: Pmf, rate: float, s: float, grid_res: int = 100) -> AsymptoticRate:
    """min over inputs of max over t in [0, s] of tau / s (order 1-s)."""
    _check_minus_s(s)
    _check_output(q, w)
    return _gamma_minus_arrays(w, q, rate, s, grid_res)


def _gamma_minus_arrays(w: Channel, q: Pmf, rate: float, s: float, grid_res: int, extra=None, refine=True):
    obj = _minus_objective(w.rows, q.probs, rate, s)
    _, feasible, verts = feasible_points_array(w.rows, q.probs, grid_res)
    cand = verts if feasible else None
    if extra is not None:
        cand = extra if cand is None else np.vstack([cand, extra])
    best = _search.minimize_on_simplex(lambda p: obj(p)[0], w.shape[0], grid_res, refine=refine, extra=cand)
    _, t_arg = obj(best.point[None, :])
    return AsymptoticRate(
        value=best.value,
        achiever_px=Pmf(w.input_alphabet, best.point),
        metadata={"argmax_t": float(t_arg[0]), "grid_res": grid_res},
    )


def _plus_objective(rows: np.ndarray, q: np.ndarray, rate: float, s: float):
    def f(pts: np.ndarray) -> np.ndarray:
        joint = pts[:, :, None] * rows[None]
        prod = pts[:, :, None] * q[None, None, :]
        n = len(pts)
        jt = renyi_array(joint.reshape(n, -1), prod.reshape(n, -1), s)
        out = renyi_array(pts @ rows, q, s)
        return np.maximum(jt - rate, out)

    return f


def gamma_plus_single_letter(w: Channel, q: Pmf, rate: float, s: float, grid_res: int = 100, extra=None, refine=True) -> AsymptoticRate:
    """min over inputs of gamma_one_shot (the one-letter plus-case expression)."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [0, 1], got {s}")
    _check_output(q, w)
    obj = _plus_objective(w.rows, q.probs, rate, s)
    _, feasible, verts = feasible_points_array(w.rows, q.probs, grid_res)
    cand = verts if feasible else None
    if extra is not None:
        cand = extra if cand is None else np.vstack([cand, extra])
    best = _search.minimize_on_simplex(obj, w.shape[0], grid_res, refine=refine, extra=cand)
    return AsymptoticRate(best.value, Pmf(w.input_alphabet, best.point), metadata={"grid_res": grid_res})


#: largest super-letter input alphabet accepted by :func:`gamma_multiletter`
MULTILETTER_CAP = 16


def gamma_multiletter(w: Channel, q: Pmf, rate: float, s: float, n: int, grid_res: int = 20) -> float:
    """Per-letter multi-letter expression over the n-fold super-letter channel.

    ``s > 0`` evaluates the order-(1+s) expression, ``s < 0`` the order-(1-|s|)
    one. The single-letter optimizer's n-fold product is added to the grid so
    the result never exceeds the one-letter value.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    wn = product_channel(w, n, cap=MULTILETTER_CAP)
    qn = product_pmf(q, n)
    base_res = max(grid_res, 2)
    if s >= 0:
        if n == 1:
            return gamma_plus_single_letter(w, q, rate, s, base_res).value
        single = gamma_plus_single_letter(w, q, rate, s, base_res)
        seed = _power_vector(single.achiever_px.probs, n)[None, :]
        res = gamma_plus_single_letter(wn, qn, n * rate, s, grid_res, extra=seed, refine=False)
    else:
        a = -s
        if n == 1:
            return gamma_minus_single_letter(w, q, rate, a, base_res).value
        single = gamma_minus_single_letter(w, q, rate, a, base_res)
        seed = _power_vector(single.achiever_px.probs, n)[None, :]
        res = _gamma_minus_arrays(wn, qn, n * rate, a, grid_res, extra=seed, refine=False)
    return res.value / n


def _power_vector(p: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.multiply.outer(out, p).ravel()
    return out


# ---------------------------------------------------------------------------
# single-letter asymptotics, plus case
# ---------------------------------------------------------------------------


def eta(w: Channel, q: Pmf, ptx: Pmf, pty_given_x: Channel, s: float) -> float:
    """(-1/s - 1) D(V || W | ptx) + D(V o ptx || q) for the test channel V."""
    _check_plus_s(s)
    _check_input(ptx, w)
    _check_output(q, w)
    if pty_given_x.shape != w.shape:
        raise ValueError("test channel must have the same shape as the channel")
    v = pty_given_x.rows
    pen = np.where(ptx.probs > 0, ptx.probs * kl_array(v, w.rows), 0.0).sum()
    return float(-(1.0 / s + 1.0) * pen + kl_array(ptx.probs @ v, q.probs))


def max_eta(w: Channel, q: Pmf, ptx: Pmf, s: float, restarts: int = 50, seed: int = 0):
    """Maximize :func:`eta` over test channels by alternating ascent.

    Returns ``(value, maximizing Channel)``.
    """
    _check_plus_s(s)
    _check_input(ptx, w)
    _check_output(q, w)
    best, _, tilted = _search.mixture_ascent(ptx.probs, w.rows, q.probs, (1.0 + s) / s, restarts=restarts, seed=seed)
    return float(best), Channel(w.input_alphabet, w.output_alphabet, tilted)


def _eta_max_batch(w: Channel, q: Pmf, pts: np.ndarray, s: float, restarts: int, seed: int = 0):
    best, _, tilted = _search.mixture_ascent(pts, w.rows, q.probs, (1.0 + s) / s, restarts=restarts, seed=seed)
    return best, tilted


def _expected_renyi_batch(pts: np.ndarray, rows: np.ndarray, q: np.ndarray, s: float) -> np.ndarray:
    per_row = renyi_array(rows, q, s)
    return np.where(pts > 0, pts * per_row[None, :], 0.0).sum(axis=1)


def _plus_terms(w: Channel, q: Pmf, pts: np.ndarray, s: float, restarts: int):
    """Rate-free terms (expected divergence, max eta, maximizing channel) per input.

    At s = 0 the penalty on leaving the channel is infinite, so the test
    channel is the channel itself and eta reduces to D(P_Y || Q).
    """
    a = _expected_renyi_batch(pts, w.rows, q.probs, s)
    if s <= S_ZERO_TOL:
        b = kl_array(pts @ w.rows, q.probs)
        return a, b, np.broadcast_to(w.rows, (len(pts),) + w.shape)
    b, tilted = _eta_max_batch(w, q, pts, s, restarts)
    return a, b, tilted


def asymptotic_resolvability_plus(
    w: Channel, q: Pmf, rate: float, s: float, grid_res: int = 100, restarts: int = 50
) -> AsymptoticRate:
    """min over inputs of max{expected D_{1+s} - rate, max over test channels of eta}."""
    return resolvability_plus_curve(w, q, [rate], s, grid_res, restarts)[0]


def resolvability_plus_curve(
    w: Channel, q: Pmf, rates: Sequence[float], s: float, grid_res: int = 100, restarts: int = 50
) -> list[AsymptoticRate]:
    """:func:`asymptotic_resolvability_plus` at many rates sharing the rate-free terms."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [0, 1], got {s}")
    _check_output(q, w)
    nx = w.shape[0]
    pts = simplex_lattice(nx, grid_res)
    a, b, tilted = _plus_terms(w, q, pts, s, restarts)
    out = []
    for rate in rates:
        vals = np.maximum(a - rate, b)
        i = _search.argmin_first(vals)
        point, value, chan = pts[i], float(vals[i]), tilted[i]
        if nx > 1:
            fine = refine_lattice(point, grid_res)
            fa, fb, ft = _plus_terms(w, q, fine, s, restarts)
            fv = np.maximum(fa - rate, fb)
            j = _search.argmin_first(fv)
            if fv[j] < value:
                point, value, chan = fine[j], float(fv[j]), ft[j]
        out.append(
            AsymptoticRate(
                value=value,
                achiever_px=Pmf(w.input_alphabet, point),
                achiever_py_given_x=Channel(w.input_alphabet, w.output_alphabet, chan),
                metadata={"rate": float(rate), "s": s, "grid_res": grid_res, "restarts": restarts},
            )
        )
    return out


# ---------------------------------------------------------------------------
# single-letter bounds, minus case
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MinusBoundTerms:
    """Order-independent divergence terms on a common set of joint candidates.

    ``joints[k]`` is a candidate test joint P~_{XY}; ``pen`` is
    D(P~_{Y|X} || W | P~_X), ``cond_q`` is D(P~_{Y|X} || Q | P~_X), ``out_q`` is
    D(P~_Y || Q) and ``proj`` is the smallest penalty among test channels with
    the same output marginal.
    """

    joints: np.ndarray
    pen: np.ndarray
    cond_q: np.ndarray
    out_q: np.ndarray
    proj: np.ndarray

    def first_term(self, s: float) -> np.ndarray:
        return (1.0 / s - 1.0) * self.pen + self.cond_q

    def lb_second(self, s: float) -> np.ndarray:
        return (1.0 / s - 1.0) * self.pen + self.out_q

    def ub_second(self, s: float) -> np.ndarray:
        return (1.0 / s) * self.pen + self.out_q - self.proj


def minus_bound_terms(w: Channel, q: Pmf, grid_res: int = 40) -> MinusBoundTerms:
    """Evaluate the rate- and order-free terms of the minus-case bounds.

    Candidates are the lattice on the joint simplex plus every input-lattice
    point (and feasible vertex) paired with the channel itself.
    """
    _check_output(q, w)
    nx, ny = w.shape
    joint_pts = simplex_lattice(nx * ny, grid_res).reshape(-1, nx, ny)
    in_pts = simplex_lattice(nx, grid_res)
    _, feasible, verts = feasible_points_array(w.rows, q.probs, grid_res)
    if feasible:
        in_pts = np.vstack([in_pts, verts])
    joints = np.concatenate([joint_pts, in_pts[:, :, None] * w.rows[None]], axis=0)

    ptx = joints.sum(axis=2)
    pty = joints.sum(axis=1)
    ref_w = ptx[:, :, None] * w.rows[None]
    ref_q = ptx[:, :, None] * q.probs[None, None, :]
    flat = joints.reshape(len(joints), -1)
    pen = kl_array(flat, ref_w.reshape(len(joints), -1))
    cond_q = kl_array(flat, ref_q.reshape(len(joints), -1))
    out_q = kl_array(pty, q.probs)

    finite = np.isfinite(pen) & np.isfinite(cond_q)
    proj = pen.copy()
    if np.any(finite):
        cond = _search.iterative_projection(ptx[finite], w.rows, pty[finite], tol=1e-11, max_iter=3000)
        pj = ptx[finite][:, :, None] * cond
        m = kl_array(pj.reshape(len(pj), -1), ref_w[finite].reshape(len(pj), -1))
        # the candidate's own channel is feasible for the inner min
        proj[finite] = np.minimum(m, pen[finite])
    keep = finite
    return MinusBoundTerms(joints[keep], pen[keep], cond_q[keep], out_q[keep], proj[keep])


def _minimize_terms(terms: MinusBoundTerms, first: np.ndarray, second: np.ndarray, rate: float, w: Channel, label: str):
    vals = np.maximum(first - rate, second)
    i = _search.argmin_first(vals)
    j = terms.joints[i]
    ptx = j.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(ptx[:, None] > 0, j / ptx[:, None], w.rows)
    return AsymptoticRate(
        value=float(vals[i]),
        achiever_px=Pmf(w.input_alphabet, ptx),
        achiever_py_given_x=Channel(w.input_alphabet, w.output_alphabet, cond),
        metadata={"bound": label, "rate": float(rate)},
    )


def gamma_lb_minus(w: Channel, q: Pmf, rate: float, s: float, grid_res: int = 40, terms: MinusBoundTerms | None = None) -> AsymptoticRate:
    """Lower single-letter bound for order 1-s, s in (0, 1)."""
    _check_minus_s(s)
    terms = terms or minus_bound_terms(w, q, grid_res)
    return _minimize_terms(terms, terms.first_term(s), terms.lb_second(s), rate, w, "lower")


def gamma_ub_minus(w: Channel, q: Pmf, rate: float, s: float, grid_res: int = 40, terms: MinusBoundTerms | None = None) -> AsymptoticRate:
    """Upper single-letter bound for order 1-s, s in (0, 1)."""
    _check_minus_s(s)
    terms = terms or minus_bound_terms(w, q, grid_res)
    return _minimize_terms(terms, terms.first_term(s), terms.ub_second(s), rate, w, "upper")


def minus_bounds_grid(w: Channel, q: Pmf, rates: Sequence[float], s_values: Sequence[float], grid_res: int = 40):
    """(lower, upper) arrays of shape (len(rates), len(s_values))."""
    terms = minus_bound_terms(w, q, grid_res)
    lb = np.empty((len(rates), len(s_values)))
    ub = np.empty_like(lb)
    for j, s in enumerate(s_values):
        _check_minus_s(s)
        f = terms.first_term(s)
        sl, su = terms.lb_second(s), terms.ub_second(s)
        for i, r in enumerate(rates):
            lb[i, j] = np.min(np.maximum(f - r, sl))
            ub[i, j] = np.min(np.maximum(f - r, su))
    return lb, ub


# ---------------------------------------------------------------------------
# minimum rates
# ---------------------------------------------------------------------------


def min_rate_achiever(w: Channel, q: Pmf, s: float, grid_res: int = 100) -> AsymptoticRate:
    """Minimum resolvability rate and the feasible input attaining it."""
    _check_output(q, w)
    if not (-1.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [-1, 1], got {s}")
    pts, feasible, _ = feasible_points_array(w.rows, q.probs, grid_res)
    if not feasible:
        raise InfeasibleTarget("no input distribution reproduces the target through the channel")
    if abs(s + 1.0) < S_ZERO_TOL:
        return AsymptoticRate(0.0, Pmf(w.input_alphabet, pts[0]), metadata={"s": s})
    if s > S_ZERO_TOL:
        vals = _expected_renyi_batch(pts, w.rows, q.probs, s)
    else:
        py = pts @ w.rows
        hy = entropy_array(py)
        hyx = (pts * entropy_array(w.rows)[None, :]).sum(axis=1)
        vals = hy - hyx
    i = _search.argmin_first(vals)
    return AsymptoticRate(float(vals[i]), Pmf(w.input_alphabet, pts[i]), metadata={"s": s, "grid_res": grid_res})


def min_rate(w: Channel, q: Pmf, s: float, grid_res: int = 100) -> float:
    """Smallest rate at which the normalized (or unnormalized) divergence vanishes.

    The objective is linear in the input over the feasible polytope, so the
    exact vertices are always among the candidates alongside the grid hits.
    """
    return min_rate_achiever(w, q, s, grid_res).value


def bsc_min_rate(p: float, s: float) -> float:
    """Closed form of the minimum rate for BSC(p) with a uniform target."""
    if abs(s + 1.0) < S_ZERO_TOL:
        return 0.0
    if s > S_ZERO_TOL:
        return float(np.log(p ** (1 + s) * 2**s + (1 - p) ** (1 + s) * 2**s) / s)
    return float(np.log(2.0) - entropy_array(np.array([p, 1 - p])))
