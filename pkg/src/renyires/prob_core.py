"""Finite-alphabet probability primitives.

Everything here works in nats. Objects are immutable; the numeric kernels
(the ``*_array`` helpers) operate on plain numpy arrays along the last axis
and are what the grid searches in the other modules call directly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Sequence

import numpy as np

from .errors import AlphabetMismatch, ModelValidationError, SizeCapExceeded, SupportViolation

#: |s| below this is treated as exactly zero (KL branch).
S_ZERO_TOL = 1e-9
#: normalization tolerance for pmfs and channel rows
NORM_TOL = 1e-12
#: default cap on |A|^n for product extensions
DEFAULT_SIZE_CAP = 4096
#: returned by :func:`kl_div` when the support condition fails
KL_INFINITY = math.inf
#: tolerance used to decide that a grid point pushes forward onto the target
FEASIBILITY_TOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


@dataclass(frozen=True)
class RenyiOrder:
    """The order 1+s of a Rényi divergence, s in [-1, 1]."""

    s: float

    def __post_init__(self):
        if not (-1.0 - 1e-15 <= self.s <= 1.0 + 1e-15):
            raise ValueError(f"Renyi parameter s={self.s} outside [-1, 1]")

    @property
    def alpha(self) -> float:
        return 1.0 + self.s

    @property
    def is_kl(self) -> bool:
        return abs(self.s) < S_ZERO_TOL

    @property
    def is_order_zero(self) -> bool:
        return abs(self.s + 1.0) < S_ZERO_TOL


def _as_s(order) -> float:
    if isinstance(order, RenyiOrder):
        return order.s
    return RenyiOrder(float(order)).s


@dataclass(frozen=True, eq=False)
class Pmf:
    """A probability mass function on an ordered, labelled alphabet."""

    alphabet: tuple
    probs: np.ndarray

    def __post_init__(self):
        alphabet = tuple(self.alphabet)
        probs = _frozen(self.probs)
        if probs.ndim != 1 or len(probs) != len(alphabet):
            raise ModelValidationError("probs length must equal alphabet length")
        if len(set(alphabet)) != len(alphabet):
            raise ModelValidationError("alphabet labels must be unique")
        if len(alphabet) == 0:
            raise ModelValidationError("empty alphabet")
        if np.any(~np.isfinite(probs)) or np.any(probs < 0):
            raise ModelValidationError("probabilities must be finite and non-negative")
        if abs(probs.sum() - 1.0) > NORM_TOL:
            raise ModelValidationError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_probs(cls, probs: Sequence[float], alphabet: Sequence[Hashable] | None = None) -> "Pmf":
        probs = np.asarray(probs, dtype=float)
        return cls(alphabet if alphabet is not None else _labels(len(probs)), probs)

    @classmethod
    def bernoulli(cls, p: float) -> "Pmf":
        """Bern(p) on ("0", "1"), so probs = (1-p, p)."""
        return cls(("0", "1"), np.array([1.0 - p, p]))

    @classmethod
    def uniform(cls, k: int | Sequence[Hashable]) -> "Pmf":
        alphabet = _labels(k) if isinstance(k, int) else tuple(k)
        return cls(alphabet, np.full(len(alphabet), 1.0 / len(alphabet)))

    @classmethod
    def point(cls, k: int | Sequence[Hashable], index: int) -> "Pmf":
        alphabet = _labels(k) if isinstance(k, int) else tuple(k)
        probs = np.zeros(len(alphabet))
        probs[index] = 1.0
        return cls(alphabet, probs)

    def __len__(self) -> int:
        return len(self.alphabet)

    def __getitem__(self, label) -> float:
        return float(self.probs[self.alphabet.index(label)])

    @property
    def support(self) -> np.ndarray:
        return self.probs > 0

    def entropy(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-(p * np.log(p)).sum())

    def allclose(self, other: "Pmf", atol: float = 1e-12) -> bool:
        return self.alphabet == other.alphabet and bool(np.allclose(self.probs, other.probs, atol=atol, rtol=0))

    def __repr__(self) -> str:
        body = ", ".join(f"{a}: {p:.6g}" for a, p in zip(self.alphabet, self.probs))
        return f"Pmf({{{body}}})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix ``rows[x, y] = W(y|x)``."""

    input_alphabet: tuple
    output_alphabet: tuple
    rows: np.ndarray

    def __post_init__(self):
        ia, oa = tuple(self.input_alphabet), tuple(self.output_alphabet)
        rows = _frozen(self.rows)
        if rows.ndim != 2 or rows.shape != (len(ia), len(oa)):
            raise ModelValidationError(
                f"rows shape {rows.shape} does not match alphabets ({len(ia)}, {len(oa)})"
            )
        if len(set(ia)) != len(ia) or len(set(oa)) != len(oa):
            raise ModelValidationError("alphabet labels must be unique")
        if np.any(~np.isfinite(rows)) or np.any(rows < 0):
            raise ModelValidationError("channel entries must be finite and non-negative")
        bad = np.abs(rows.sum(axis=1) - 1.0) > NORM_TOL
        if np.any(bad):
            raise ModelValidationError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "input_alphabet", ia)
        object.__setattr__(self, "output_alphabet", oa)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_matrix(cls, rows, input_alphabet=None, output_alphabet=None) -> "Channel":
        rows = np.asarray(rows, dtype=float)
        return cls(
            input_alphabet if input_alphabet is not None else _labels(rows.shape[0]),
            output_alphabet if output_alphabet is not None else _labels(rows.shape[1]),
            rows,
        )

    @classmethod
    def bsc(cls, p: float) -> "Channel":
        """Binary symmetric channel Y = X xor V with V ~ Bern(p)."""
        return cls(("0", "1"), ("0", "1"), np.array([[1 - p, p], [p, 1 - p]]))

    @classmethod
    def identity(cls, k: int | Sequence[Hashable]) -> "Channel":
        alphabet = _labels(k) if isinstance(k, int) else tuple(k)
        return cls(alphabet, alphabet, np.eye(len(alphabet)))

    @classmethod
    def constant(cls, k_in: int, out: Pmf) -> "Channel":
        return cls(_labels(k_in), out.alphabet, np.tile(out.probs, (k_in, 1)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape

    def row(self, x) -> Pmf:
        i = x if isinstance(x, (int, np.integer)) else self.input_alphabet.index(x)
        return Pmf(self.output_alphabet, self.rows[i])

    def __repr__(self) -> str:
        return f"Channel({list(self.input_alphabet)} -> {list(self.output_alphabet)}, rows={self.rows.tolist()})"


@dataclass(frozen=True, eq=False)
class Joint:
    """Joint pmf on X x Y stored as a matrix ``probs[x, y]``."""

    x_alphabet: tuple
    y_alphabet: tuple
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.shape != (len(self.x_alphabet), len(self.y_alphabet)):
            raise ModelValidationError("joint matrix shape does not match alphabets")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > NORM_TOL:
            raise ModelValidationError("joint probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "x_alphabet", tuple(self.x_alphabet))
        object.__setattr__(self, "y_alphabet", tuple(self.y_alphabet))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_channel(cls, px: Pmf, w: Channel) -> "Joint":
        _check_input(px, w)
        return cls(px.alphabet, w.output_alphabet, px.probs[:, None] * w.rows)

    def marginal_x(self) -> Pmf:
        return Pmf(self.x_alphabet, self.probs.sum(axis=1))

    def marginal_y(self) -> Pmf:
        return Pmf(self.y_alphabet, self.probs.sum(axis=0))

    def flat(self) -> Pmf:
        labels = tuple(itertools.product(self.x_alphabet, self.y_alphabet))
        return Pmf(labels, self.probs.ravel())


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------


def kl_array(p, q) -> np.ndarray:
    """KL divergence along the last axis; +inf where supp(p) is not in supp(q)."""
    p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * (np.log(p) - np.log(q)), 0.0)
    return terms.sum(axis=-1)


def renyi_array(p, q, s: float) -> np.ndarray:
    """Rényi divergence of order 1+s along the last axis.

    Support violations (for s >= 0) and vanishing sums (for s < 0) give +inf.
    """
    if abs(s) < S_ZERO_TOL:
        return kl_array(p, q)
    p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
    if abs(s + 1.0) < S_ZERO_TOL:
        mass = np.where(p > 0, q, 0.0).sum(axis=-1)
        with np.errstate(divide="ignore"):
            return -np.log(mass)
    with np.errstate(divide="ignore", invalid="ignore"):
        if s > 0:
            terms = np.where(p > 0, p ** (1 + s) * q ** (-s), 0.0)
        else:
            terms = np.where((p > 0) & (q > 0), p ** (1 + s) * q ** (-s), 0.0)
        return np.log(terms.sum(axis=-1)) / s


def renyi_sum_array(p, q, s: float) -> np.ndarray:
    """sum_x p^{1+s} q^{-s} along the last axis (the quantity exponentiated by s*D)."""
    p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        if s > 0:
            terms = np.where(p > 0, p ** (1 + s) * q ** (-s), 0.0)
        else:
            terms = np.where((p > 0) & (q > 0), p ** (1 + s) * q ** (-s), 0.0)
    return terms.sum(axis=-1)


def entropy_array(p) -> np.ndarray:
    p = np.asarray(p, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.where(p > 0, p * np.log(p), 0.0).sum(axis=-1)


def mutual_info_array(px, rows) -> np.ndarray:
    """I(X;Y) for input(s) ``px[..., x]`` and channel(s) ``rows[..., x, y]``."""
    px = np.asarray(px, float)
    rows = np.asarray(rows, float)
    py = np.einsum("...x,...xy->...y", px, rows)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rows > 0, np.log(rows) - np.log(py)[..., None, :], 0.0)
    return np.einsum("...x,...xy->...", px, rows * ratio)


def cond_kl_array(px, v, w) -> np.ndarray:
    """D(V || W | P_X) = sum_x px(x) KL(v_x || w_x); broadcasting over leading axes."""
    per_row = kl_array(v, w)
    px = np.asarray(px, float)
    with np.errstate(invalid="ignore"):
        return np.where(px > 0, px * per_row, 0.0).sum(axis=-1)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def _check_same(p: Pmf, q: Pmf) -> None:
    if p.alphabet != q.alphabet:
        raise AlphabetMismatch(f"alphabets differ: {p.alphabet} vs {q.alphabet}")


def _check_input(px: Pmf, w: Channel) -> None:
    if px.alphabet != w.input_alphabet:
        raise AlphabetMismatch(f"input pmf alphabet {px.alphabet} != channel input {w.input_alphabet}")


def _check_output(q: Pmf, w: Channel) -> None:
    if q.alphabet != w.output_alphabet:
        raise AlphabetMismatch(f"target alphabet {q.alphabet} != channel output {w.output_alphabet}")


def _require_support(p: np.ndarray, q: np.ndarray, what: str) -> None:
    if np.any((p > 0) & (q <= 0)):
        raise SupportViolation(f"{what}: p puts mass where q vanishes")


def renyi_div(p: Pmf, q: Pmf, order) -> float:
    """D_{1+s}(p || q) in nats.

    >>> round(renyi_div(Pmf.bernoulli(0.5), Pmf.bernoulli(0.25), 1.0), 6)
    0.287682
    """
    s = _as_s(order)
    _check_same(p, q)
    if s > S_ZERO_TOL:
        _require_support(p.probs, q.probs, "renyi_div")
    return float(renyi_array(p.probs, q.probs, s))


def kl_div(p: Pmf, q: Pmf) -> float:
    """Relative entropy; returns :data:`KL_INFINITY` on a support violation."""
    _check_same(p, q)
    return float(kl_array(p.probs, q.probs))


def cond_renyi_div(px: Pmf, w: Channel, q: Pmf, order) -> float:
    """D_{1+s}(P_X W || P_X x Q), the conventional conditional Rényi divergence."""
    s = _as_s(order)
    _check_input(px, w)
    _check_output(q, w)
    used = w.rows[px.probs > 0]
    if s > S_ZERO_TOL:
        _require_support(used, np.broadcast_to(q.probs, used.shape), "cond_renyi_div")
    if abs(s) < S_ZERO_TOL:
        return float(cond_kl_array(px.probs, w.rows, q.probs))
    joint = px.probs[:, None] * w.rows
    prod = px.probs[:, None] * q.probs[None, :]
    return float(renyi_array(joint.ravel(), prod.ravel(), s))


def expected_renyi_div(px: Pmf, w: Channel, q: Pmf, order) -> float:
    """sum_x px(x) D_{1+s}(w(.|x) || q); for s ~ 0 this is the conditional KL."""
    s = _as_s(order)
    _check_input(px, w)
    _check_output(q, w)
    used = w.rows[px.probs > 0]
    if s > S_ZERO_TOL:
        _require_support(used, np.broadcast_to(q.probs, used.shape), "expected_renyi_div")
    per_row = renyi_array(w.rows, q.probs, s)
    return float(np.where(px.probs > 0, px.probs * per_row, 0.0).sum())


def push_forward(px: Pmf, w: Channel) -> Pmf:
    _check_input(px, w)
    py = px.probs @ w.rows
    return Pmf(w.output_alphabet, py / py.sum())


def mutual_info(px: Pmf, w: Channel) -> float:
    _check_input(px, w)
    return float(mutual_info_array(px.probs, w.rows))


def tv_distance(p: Pmf, q: Pmf) -> float:
    """Half the l1 distance."""
    _check_same(p, q)
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def _check_cap(size: int, n: int, cap: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if size**n > cap:
        raise SizeCapExceeded(f"|A|^n = {size}^{n} = {size**n} exceeds cap {cap}")


def product_array(p: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1)
    for _ in range(n):
        out = np.multiply.outer(out, p).ravel()
    return out


def product_rows(rows: np.ndarray, n: int) -> np.ndarray:
    out = np.ones((1, 1))
    for _ in range(n):
        out = np.kron(out, rows)
    return out


def _tuple_labels(alphabet: tuple, n: int) -> tuple:
    return tuple(itertools.product(alphabet, repeat=n))


def product_pmf(p: Pmf, n: int, cap: int = DEFAULT_SIZE_CAP) -> Pmf:
    """i.i.d. extension over lexicographically ordered tuples; n=1 returns p."""
    _check_cap(len(p), n, cap)
    if n == 1:
        return p
    return Pmf(_tuple_labels(p.alphabet, n), product_array(p.probs, n))


def product_channel(w: Channel, n: int, cap: int = DEFAULT_SIZE_CAP) -> Channel:
    _check_cap(max(w.shape), n, cap)
    if n == 1:
        return w
    return Channel(
        _tuple_labels(w.input_alphabet, n),
        _tuple_labels(w.output_alphabet, n),
        product_rows(w.rows, n),
    )


def simplex_lattice(dim: int, resolution: int) -> np.ndarray:
    """All points of the simplex with coordinates k/resolution, lexicographic order.

    Returns an array of shape (C(resolution+dim-1, dim-1), dim).
    """
    if dim < 1 or resolution < 1:
        raise ValueError("dim and resolution must be positive")

    def counts(d: int, r: int) -> np.ndarray:
        if d == 1:
            return np.array([[r]], dtype=np.int64)
        blocks = []
        for k in range(r + 1):
            rest = counts(d - 1, r - k)
            blocks.append(np.hstack([np.full((len(rest), 1), k, dtype=np.int64), rest]))
        return np.vstack(blocks)

    return counts(dim, resolution) / resolution


def simplex_grid(dim: int, resolution: int, alphabet: Sequence[Hashable] | None = None) -> Iterator[Pmf]:
    """Stream the lattice points of :func:`simplex_lattice` as :class:`Pmf` objects."""
    labels = tuple(alphabet) if alphabet is not None else _labels(dim)
    for row in simplex_lattice(dim, resolution):
        yield Pmf(labels, row)


def refine_lattice(center: np.ndarray, resolution: int, factor: int = 10, radius: float = 2.0) -> np.ndarray:
    """Lattice at ``factor * resolution`` inside the box |p - center|_inf <= radius/resolution."""
    center = np.asarray(center, float)
    fine = resolution * factor
    half = radius / resolution
    ranges = []
    for c in center[:-1]:
        lo = max(0, math.ceil((c - half) * fine - 1e-9))
        hi = min(fine, math.floor((c + half) * fine + 1e-9))
        ranges.append(np.arange(lo, hi + 1))
    if not ranges:
        return center[None, :].copy()
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, len(ranges))
    last = fine - mesh.sum(axis=1)
    keep = (last >= 0) & (np.abs(last / fine - center[-1]) <= half + 1e-12)
    pts = np.hstack([mesh[keep], last[keep, None]]) / fine
    return pts


# ---------------------------------------------------------------------------
# feasibility of P(W, Q) = {P_X : W o P_X = Q}
# ---------------------------------------------------------------------------


def polytope_vertices(rows: np.ndarray, q: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Basic feasible solutions of {p >= 0 : p @ rows = q} by support enumeration.

    ``sum p = 1`` is implied because the rows of ``rows`` sum to 1.
    """
    nx = rows.shape[0]
    a = rows.T
    found: list[np.ndarray] = []
    for k in range(1, min(nx, a.shape[0]) + 1):
        for support in itertools.combinations(range(nx), k):
            sub = a[:, support]
            if np.linalg.matrix_rank(sub, tol=1e-12) < k:
                continue
            sol, *_ = np.linalg.lstsq(sub, q, rcond=None)
            if np.any(sol < -tol) or np.abs(sub @ sol - q).max() > tol:
                continue
            p = np.zeros(nx)
            p[list(support)] = np.clip(sol, 0.0, None)
            p /= p.sum()
            if not any(np.allclose(p, v, atol=1e-12) for v in found):
                found.append(p)
    if not found:
        return np.zeros((0, nx))
    out = np.array(found)
    return out[np.lexsort(out.T[::-1])]


def _lp_point(rows: np.ndarray, q: np.ndarray, cost: np.ndarray | None = None) -> np.ndarray | None:
    from scipy.optimize import linprog

    nx = rows.shape[0]
    c = np.zeros(nx) if cost is None else cost
    res = linprog(c, A_eq=np.vstack([rows.T, np.ones(nx)]), b_eq=np.append(q, 1.0), bounds=[(0, None)] * nx)
    if not res.success:
        return None
    p = np.clip(res.x, 0, None)
    return p / p.sum()


#: above this input size the exact feasibility check falls back to a linear program
MAX_VERTEX_ENUM_INPUTS = 8


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """Grid points (plus polytope vertices) of P(W, Q)."""

    points: tuple[Pmf, ...]
    feasible: bool
    vertices: tuple[Pmf, ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def array(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 0))
        return np.array([p.probs for p in self.points])

    @property
    def is_empty(self) -> bool:
        return not self.feasible


def feasible_points_array(rows: np.ndarray, q: np.ndarray, resolution: int, tol: float = FEASIBILITY_TOL):
    """Array form of :func:`input_feasible_set`: (points, feasible, vertices)."""
    nx = rows.shape[0]
    if nx <= MAX_VERTEX_ENUM_INPUTS:
        verts = polytope_vertices(rows, q)
    else:
        pt = _lp_point(rows, q)
        verts = np.zeros((0, nx)) if pt is None else pt[None, :]
    feasible = len(verts) > 0
    if not feasible:
        return np.zeros((0, nx)), False, verts
    lattice = simplex_lattice(nx, resolution)
    tv = 0.5 * np.abs(lattice @ rows - q).sum(axis=1)
    hits = lattice[tv <= tol]
    pts = np.vstack([hits, verts]) if len(hits) else verts.copy()
    # dedupe on a 1e-12 lattice, keep lexicographic order
    keys = np.round(pts * 1e12).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    pts = pts[np.sort(first)]
    pts = pts[np.lexsort(pts.T[::-1])]
    return pts, True, verts


def input_feasible_set(w: Channel, q: Pmf, resolution: int = 100) -> FeasibleSet:
    """Inputs P_X with W o P_X = q.

    Grid hits (tv <= 1e-9) are merged with the exact vertices of the feasible
    polytope, so the set is non-empty whenever the target is reachable even if
    the lattice misses the affine feasible set.
    """
    _check_output(q, w)
    pts, feasible, verts = feasible_points_array(w.rows, q.probs, resolution)
    mk = lambda arr: tuple(Pmf(w.input_alphabet, r) for r in arr)  # noqa: E731
    return FeasibleSet(points=mk(pts), feasible=feasible, vertices=mk(verts))
