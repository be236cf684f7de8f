"""Deterministic numerical search helpers shared by the solvers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .prob_core import kl_array, refine_lattice, simplex_lattice

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class SimplexMin:
    """Best point of a simplex search and its value."""

    point: np.ndarray
    value: float
    index: int


def argmin_first(values: np.ndarray) -> int:
    """Index of the smallest value, earliest one on ties (NaN treated as +inf)."""
    v = np.where(np.isnan(values), np.inf, values)
    return int(np.argmin(v))


def minimize_on_simplex(
    objective: Callable[[np.ndarray], np.ndarray],
    dim: int,
    resolution: int,
    refine: bool = True,
    extra: np.ndarray | None = None,
) -> SimplexMin:
    """Exhaustive lattice search followed by one 10x refinement pass.

    ``objective`` maps an (N, dim) array of pmfs to N values. ``extra`` points
    are appended to the coarse candidates (e.g. exact polytope vertices).
    """
    pts = simplex_lattice(dim, resolution)
    if extra is not None and len(extra):
        pts = np.vstack([pts, extra])
    vals = objective(pts)
    i = argmin_first(vals)
    best = SimplexMin(pts[i].copy(), float(vals[i]), i)
    if refine and dim > 1:
        fine = refine_lattice(best.point, resolution)
        fvals = objective(fine)
        j = argmin_first(fvals)
        if fvals[j] < best.value:
            best = SimplexMin(fine[j].copy(), float(fvals[j]), -1)
    return best


def ternary_max(f: Callable[[np.ndarray], np.ndarray], lo, hi, tol: float = 1e-9, max_iter: int = 200):
    """Vectorized ternary search for the max of concave functions on [lo, hi].

    ``f`` takes an array of abscissae (one per problem) and returns values of
    the same shape. Returns (argmax, max).
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1, f2 = f(m1), f(m2)
        left = f1 < f2
        lo = np.where(left, m1, lo)
        hi = np.where(left, hi, m2)
    t = 0.5 * (lo + hi)
    # endpoints are cheap to include and guard against flat plateaus
    cands = np.stack([lo, t, hi])
    vals = np.stack([f(c) for c in cands])
    k = np.argmax(vals, axis=0)
    idx = np.arange(vals.shape[1]) if vals.ndim > 1 else None
    if idx is None:
        return float(cands[k]), float(vals[k])
    return cands[k, idx], vals[k, idx]


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Golden-section search for a scalar unimodal maximum. Returns (argmax, max)."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    best = [(f(a), a), (fc, c), (fd, d), (f(b), b)]
    val, arg = max(best, key=lambda p: p[0])
    return arg, val


def maximize_interval(f_vec: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, step: float = 1e-3):
    """Grid (spacing ``step``) plus golden refinement around the best grid point.

    No concavity is assumed; the refinement only polishes within one grid cell
    on each side of the incumbent. Returns (argmax, max).
    """
    if hi - lo <= 0:
        return lo, float(f_vec(np.array([lo]))[0])
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n)
    vals = f_vec(grid)
    i = int(np.argmax(np.where(np.isnan(vals), -np.inf, vals)))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n - 1)]
    arg, val = golden_max(lambda t: float(f_vec(np.array([t]))[0]), a, b)
    if val >= vals[i]:
        return arg, val
    return float(grid[i]), float(vals[i])


# ---------------------------------------------------------------------------
# tilted-channel ascent
# ---------------------------------------------------------------------------


def _tilt(rows: np.ndarray, g: np.ndarray, c: float) -> np.ndarray:
    """rows[..., x, y] * exp(g[..., y] / c), renormalized per row."""
    logw = np.where(rows > 0, np.log(np.where(rows > 0, rows, 1.0)) + g[..., None, :] / c, -np.inf)
    logw = logw - logw.max(axis=-1, keepdims=True)
    w = np.exp(logw)
    return w / w.sum(axis=-1, keepdims=True)


def _potential(mix: np.ndarray, q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mix > 0, np.log(mix) - np.log(q), 0.0)


def penalized_mixture_objective(weights, rows, tilted, q, c) -> np.ndarray:
    """-c * sum_x a_x KL(tilted_x || rows_x) + KL(sum_x a_x tilted_x || q)."""
    weights = np.asarray(weights, float)
    per_row = kl_array(tilted, rows)
    pen = np.where(weights > 0, weights * per_row, 0.0).sum(axis=-1)
    mix = np.einsum("...x,...xy->...y", weights, tilted)
    return -c * pen + kl_array(mix, q)


def mixture_ascent(
    weights: np.ndarray,
    rows: np.ndarray,
    q: np.ndarray,
    c: float,
    restarts: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
    max_iter: int = 500,
):
    """Maximize ``penalized_mixture_objective`` over the tilted rows.

    Alternates between the optimal potential g = log(mix / q) for fixed rows
    and the optimal rows (rows tilted by exp(g / c)) for fixed g. Each sweep
    cannot decrease the objective. The first start is the untilted channel,
    the rest are random potentials. All problems in the leading batch axes
    are solved together.

    Parameters
    ----------
    weights : (..., X) array of mixing weights.
    rows : (..., X, Y) array, or (X, Y) shared by every problem.
    q : (Y,) or (..., Y) reference pmf.
    c : penalty coefficient, positive.

    Returns
    -------
    best : (...) array of best objective values over restarts
    spread : (...) array of max - min over restart values (convergence diagnostic)
    tilted : (..., X, Y) best tilted rows
    """
    weights = np.asarray(weights, float)
    batch = weights.shape[:-1]
    nx = weights.shape[-1]
    rows = np.broadcast_to(np.asarray(rows, float), batch + rows.shape[-2:])
    ny = rows.shape[-1]
    q = np.broadcast_to(np.asarray(q, float), batch + (ny,))
    rng = np.random.default_rng(seed)
    r = max(1, int(restarts))

    # stack restarts as a new leading axis
    W = np.broadcast_to(weights, (r,) + batch + (nx,))
    P = np.broadcast_to(rows, (r,) + batch + (nx, ny))
    Q = np.broadcast_to(q, (r,) + batch + (ny,))
    g = np.zeros((r,) + batch + (ny,))
    if r > 1:
        g[1:] = rng.normal(scale=3.0, size=g[1:].shape)
    V = _tilt(P, g, c)
    val = penalized_mixture_objective(W, P, V, Q, c)
    for _ in range(max_iter):
        mix = np.einsum("...x,...xy->...y", W, V)
        g = _potential(mix, Q)
        V = _tilt(P, g, c)
        new = penalized_mixture_objective(W, P, V, Q, c)
        done = np.all(np.abs(new - val) <= tol)
        val = new
        if done:
            break
    vals = np.where(np.isnan(val), -np.inf, val)
    k = np.argmax(vals, axis=0)
    best = np.take_along_axis(vals, k[None], axis=0)[0]
    spread = vals.max(axis=0) - vals.min(axis=0)
    kk = k[None, ..., None, None]
    tilted = np.take_along_axis(V, np.broadcast_to(kk, (1,) + V.shape[1:]), axis=0)[0]
    return best, spread, tilted


def iterative_projection(px: np.ndarray, rows: np.ndarray, target_y: np.ndarray, tol: float = 1e-12, max_iter: int = 5000):
    """I-projection of the joint px * rows onto {joint : marginals (px, target_y)}.

    Iterative proportional fitting over a batch. Returns the conditional
    channel of the projected joint (rows where px = 0 copy ``rows``).
    """
    px = np.asarray(px, float)
    rows = np.broadcast_to(np.asarray(rows, float), px.shape + (target_y.shape[-1],))
    J = px[..., :, None] * rows
    for _ in range(max_iter):
        col = J.sum(axis=-2)
        with np.errstate(divide="ignore", invalid="ignore"):
            J = J * np.where(col > 0, target_y / col, 0.0)[..., None, :]
        row = J.sum(axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            J = J * np.where(row > 0, px / row, 0.0)[..., :, None]
        err = np.abs(J.sum(axis=-2) - target_y).max()
        if err <= tol:
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(px[..., :, None] > 0, J / px[..., :, None], rows)
    return cond
