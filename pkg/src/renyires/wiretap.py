"""Admissible (R0, R1) regions of a wiretap channel under Rényi effective secrecy.

R0 is the non-secret rate and R1 the secret rate. Regions are unions of
simple polytopes ("pieces"), each produced by one input distribution (and,
for stochastic encoders, one auxiliary channel P_{W|X}).

Two equivalent-looking descriptions of a stochastic-encoder piece are
supported through :attr:`RateRegion.form`:

``"r0_floor"``
    R0 >= r0_min and R0 + R1 <= sum_cap
``"r1_cap"``
    R1 <= r1_max = sum_cap - r0_min and R0 + R1 <= sum_cap
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _search
from .errors import ModelValidationError, SizeCapExceeded
from .prob_core import (
    S_ZERO_TOL,
    Channel,
    Pmf,
    _check_output,
    cond_kl_array,
    feasible_points_array,
    mutual_info_array,
    renyi_array,
    simplex_lattice,
)

FORMS = ("r0_floor", "r1_cap")
#: default number of ascent restarts inside region sweeps
SWEEP_RESTARTS = 8
#: largest number of (P_X, P_{W|X}) pairs evaluated by a region sweep
PAIR_BUDGET = 60000


@dataclass(frozen=True, eq=False)
class WiretapChannel:
    """Main channel P_{Y|X} and eavesdropper channel P_{Z|X} on a shared input."""

    main: Channel
    eaves: Channel

    def __post_init__(self):
        if self.main.input_alphabet != self.eaves.input_alphabet:
            raise ModelValidationError("main and eavesdropper channels need the same input alphabet")

    @classmethod
    def binary(cls, main_flip: float = 0.1, eaves_flip: float = 0.3) -> "WiretapChannel":
        """Two binary symmetric channels (the default is a degraded pair)."""
        return cls(Channel.bsc(main_flip), Channel.bsc(eaves_flip))

    @property
    def input_alphabet(self) -> tuple:
        return self.main.input_alphabet


# ---------------------------------------------------------------------------
# leakage rates
# ---------------------------------------------------------------------------


def r_tilde(px: Pmf, eaves: Channel, qz: Pmf, s: float) -> float:
    """Randomness rate needed by a deterministic encoder with input ``px``.

    Expected D_{1+s}(P_{Z|X} || Q_Z) for s in (0, 1], the conditional KL
    D(P_{Z|X} || Q_Z | P_X) for s in (-1, 0] and 0 at s = -1.
    """
    _check_output(qz, eaves)
    if not (-1.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [-1, 1], got {s}")
    if abs(s + 1.0) < S_ZERO_TOL:
        return 0.0
    if s > S_ZERO_TOL:
        per_row = renyi_array(eaves.rows, qz.probs, s)
        return float(np.where(px.probs > 0, px.probs * per_row, 0.0).sum())
    return float(cond_kl_array(px.probs, eaves.rows, qz.probs))


def _reverse_channel(px: np.ndarray, pw_given_x: np.ndarray):
    """(P_W, P_{X|W}) from P_X and P_{W|X}, batched over leading axes."""
    joint = px[..., :, None] * pw_given_x  # (..., X, W)
    pw = joint.sum(axis=-2)
    with np.errstate(divide="ignore", invalid="ignore"):
        px_given_w = np.where(pw[..., None, :] > 0, joint / pw[..., None, :], 1.0 / px.shape[-1])
    return pw, np.swapaxes(px_given_w, -1, -2)  # (..., W), (..., W, X)


def _r_tilde_prime_batch(pw, px_given_w, eaves_rows, qz, s, restarts, seed=0):
    """Leakage rate and restart spread for batches of (P_W, P_{X|W})."""
    if abs(s + 1.0) < S_ZERO_TOL:
        z = np.zeros(pw.shape[:-1])
        return z, z
    if s <= S_ZERO_TOL:
        pz_given_w = px_given_w @ eaves_rows
        return mutual_info_array(pw, pz_given_w), np.zeros(pw.shape[:-1])
    c = (1.0 + s) / s
    best, spread, _ = _search.mixture_ascent(px_given_w, eaves_rows, qz, c, restarts=restarts, seed=seed)
    value = np.where(pw > 0, pw * best, 0.0).sum(axis=-1)
    disp = np.where(pw > 0, pw * spread, 0.0).sum(axis=-1)
    return value, disp


def r_tilde_prime_detail(
    pw: Pmf, px_given_w: Channel, eaves: Channel, qz: Pmf, s: float, restarts: int = 50, seed: int = 0
) -> tuple[float, float]:
    """Leakage rate with a stochastic encoder and the restart dispersion.

    For s in (0, 1] the inner maximization over test channels P~_{Z|WX}
    decouples over w and is solved by alternating ascent from ``restarts``
    starts; the value is the best found (a lower bound on the maximum) and
    the dispersion is the P_W-weighted spread of the restart optima.
    """
    _check_output(qz, eaves)
    if px_given_w.output_alphabet != eaves.input_alphabet:
        raise ModelValidationError("P_{X|W} output alphabet must be the channel input alphabet")
    if pw.alphabet != px_given_w.input_alphabet:
        raise ModelValidationError("P_W alphabet must match P_{X|W} input alphabet")
    if not (-1.0 <= s <= 1.0):
        raise ValueError(f"s must lie in [-1, 1], got {s}")
    v, d = _r_tilde_prime_batch(pw.probs, px_given_w.rows, eaves.rows, qz.probs, s, restarts, seed)
    return float(v), float(d)


def r_tilde_prime(pw: Pmf, px_given_w: Channel, eaves: Channel, qz: Pmf, s: float, restarts: int = 50, seed: int = 0) -> float:
    """Leakage rate with a stochastic encoder; see :func:`r_tilde_prime_detail`."""
    return r_tilde_prime_detail(pw, px_given_w, eaves, qz, s, restarts, seed)[0]


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionPiece:
    """One polytope of a region union."""

    sum_cap: float
    r0_min: float
    achiever: dict = field(default_factory=dict)

    @property
    def r1_max(self) -> float:
        return self.sum_cap - self.r0_min

    @property
    def empty(self) -> bool:
        """True when the r0_floor description of this piece has no point."""
        return self.r0_min > self.sum_cap


@dataclass(frozen=True, eq=False)
class RateRegion:
    """Union of pieces with vectorized membership and boundary extraction."""

    pieces: tuple
    s: float
    qz: Pmf | None
    form: str = "r0_floor"
    inner_approx: bool = True
    feasible: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}")
        object.__setattr__(self, "pieces", tuple(self.pieces))

    def with_form(self, form: str) -> "RateRegion":
        return RateRegion(self.pieces, self.s, self.qz, form, self.inner_approx, self.feasible, dict(self.metadata))

    @property
    def is_empty(self) -> bool:
        if not self.pieces:
            return True
        if self.form == "r0_floor":
            return all(p.empty for p in self.pieces)
        return all(p.sum_cap < 0 for p in self.pieces)

    def _arrays(self):
        cap = np.array([p.sum_cap for p in self.pieces])
        r0 = np.array([p.r0_min for p in self.pieces])
        return cap, r0

    def contains(self, r0, r1, tol: float = 0.0):
        """Membership of (R0, R1) points; scalars give a bool, arrays a bool array."""
        r0a = np.asarray(r0, float)
        r1a = np.asarray(r1, float)
        if not self.pieces:
            out = np.zeros(np.broadcast(r0a, r1a).shape, bool)
            return bool(out) if out.ndim == 0 else out
        cap, floor = self._arrays()
        R0 = r0a[..., None]
        R1 = r1a[..., None]
        ok = (R0 >= -tol) & (R1 >= -tol) & (R0 + R1 <= cap + tol)
        if self.form == "r0_floor":
            ok &= R0 >= floor - tol
        else:
            ok &= R1 <= cap - floor + tol
        out = ok.any(axis=-1)
        return bool(out) if out.ndim == 0 else out

    def max_r1(self) -> float:
        """Largest secret rate in the region (0 when empty)."""
        if self.is_empty:
            return 0.0
        cap, floor = self._arrays()
        return float(max(0.0, np.max(np.where(floor <= cap, cap - np.maximum(floor, 0.0), -np.inf))))

    def boundary(self, r0_values: Sequence[float]) -> list[tuple[float, float]]:
        """Upper boundary (R0, max R1) at each requested R0 where the region is non-empty."""
        cap, floor = self._arrays() if self.pieces else (np.zeros(0), np.zeros(0))
        out = []
        for r0 in r0_values:
            if self.form == "r0_floor":
                mask = (floor <= r0) & (cap >= r0)
                vals = cap[mask] - r0
            else:
                mask = cap >= r0
                vals = np.minimum(cap[mask] - r0, cap[mask] - floor[mask])
                vals = vals[vals >= 0]
            if len(vals):
                out.append((float(r0), float(vals.max())))
        return out

    def vertices(self) -> list[tuple[float, float]]:
        """Corner points of the non-empty pieces in the chosen description."""
        pts = []
        for p in self.pieces:
            if self.form == "r0_floor":
                if p.empty:
                    continue
                lo = max(p.r0_min, 0.0)
                pts += [(lo, p.sum_cap - lo), (p.sum_cap, 0.0)]
            else:
                if p.sum_cap < 0:
                    continue
                r1 = min(max(p.r1_max, 0.0), p.sum_cap)
                pts += [(0.0, r1), (p.sum_cap - r1, r1), (p.sum_cap, 0.0)]
        return pts

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "qz": None if self.qz is None else {"alphabet": list(self.qz.alphabet), "probs": self.qz.probs.tolist()},
            "pieces": [
                {"sum_cap": p.sum_cap, "r0_min": p.r0_min, "r1_max": p.r1_max, "empty": p.empty, "achiever": p.achiever}
                for p in self.pieces
            ],
            "form": self.form,
            "inner_approx": self.inner_approx,
            "feasible": self.feasible,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RateRegion":
        qz = None if d.get("qz") is None else Pmf(tuple(d["qz"]["alphabet"]), np.array(d["qz"]["probs"], float))
        pieces = tuple(RegionPiece(p["sum_cap"], p["r0_min"], p.get("achiever", {})) for p in d["pieces"])
        return cls(pieces, d["s"], qz, d["form"], d["inner_approx"], d.get("feasible", True), d.get("metadata", {}))

    @classmethod
    def from_json(cls, text: str) -> "RateRegion":
        return cls.from_dict(json.loads(text))


def det_encoder_region(wc: WiretapChannel, qz: Pmf, s: float, grid_res: int = 100) -> RateRegion:
    """Region of a deterministic encoder: one piece per feasible input on the grid."""
    _check_output(qz, wc.eaves)
    pts, feasible, _ = feasible_points_array(wc.eaves.rows, qz.probs, grid_res)
    if not feasible:
        return RateRegion((), s, qz, feasible=False, metadata={"reason": "target not reachable"})
    caps = mutual_info_array(pts, wc.main.rows)
    pieces = []
    for p, cap in zip(pts, caps):
        px = Pmf(wc.input_alphabet, p)
        pieces.append(RegionPiece(float(cap), r_tilde(px, wc.eaves, qz, s), {"px": p.tolist()}))
    empty = sum(pc.empty for pc in pieces)
    return RateRegion(tuple(pieces), s, qz, "r0_floor", True, True, {"grid_res": grid_res, "empty_pieces": empty})


def _row_grid(w_card: int, nx: int, res: int) -> np.ndarray:
    """All P_{W|X} with lattice rows, shape (L^nx, nx, w_card)."""
    lat = simplex_lattice(w_card, res)
    idx = np.indices((len(lat),) * nx).reshape(nx, -1).T
    return lat[idx]


def _pareto(caps: np.ndarray, floors: np.ndarray) -> np.ndarray:
    """Indices of pieces not dominated (larger cap and smaller floor) by another."""
    order = np.lexsort((floors, -caps))
    keep = []
    best_floor = np.inf
    for i in order:
        if floors[i] < best_floor - 1e-15:
            keep.append(i)
            best_floor = floors[i]
    return np.sort(np.array(keep, dtype=np.int64))


def _aux_sweep(wc: WiretapChannel, qz: Pmf | None, s: float, px_pts: np.ndarray, w_card: int, w_grid_res: int, restarts: int, seed: int):
    nx = len(wc.input_alphabet)
    res = w_grid_res
    while True:
        n_rows = math.comb(res + w_card - 1, w_card - 1)
        if n_rows**nx * len(px_pts) <= PAIR_BUDGET or res <= 1:
            break
        res -= 1
    if n_rows**nx * len(px_pts) > PAIR_BUDGET:
        raise SizeCapExceeded("auxiliary-channel grid too large; lower grid_res or w_card")
    chans = _row_grid(w_card, nx, res)
    caps_all, leak_all, disp_all, meta = [], [], [], []
    for i, px in enumerate(px_pts):
        pw, px_given_w = _reverse_channel(px[None, :], chans)
        py_given_w = px_given_w @ wc.main.rows
        caps = mutual_info_array(pw, py_given_w)
        if qz is None:
            leak = mutual_info_array(pw, px_given_w @ wc.eaves.rows)
            disp = np.zeros_like(leak)
        else:
            leak, disp = _r_tilde_prime_batch(pw, px_given_w, wc.eaves.rows, qz.probs, s, restarts, seed)
        caps_all.append(caps)
        leak_all.append(leak)
        disp_all.append(disp)
        meta.append(np.column_stack([np.full(len(chans), i), np.arange(len(chans))]))
    return chans, np.concatenate(caps_all), np.concatenate(leak_all), np.concatenate(disp_all), np.concatenate(meta), res


def stochastic_encoder_region(
    wc: WiretapChannel,
    qz: Pmf,
    s: float,
    grid_res: int = 100,
    w_card: int | None = None,
    w_grid_res: int = 10,
    restarts: int = SWEEP_RESTARTS,
    seed: int = 0,
    prune: bool = True,
    form: str = "r0_floor",
) -> RateRegion:
    """Region of a stochastic encoder with auxiliary alphabet size ``w_card``.

    Input distributions range over the feasible grid at ``grid_res`` and the
    rows of P_{W|X} over a lattice at ``w_grid_res``; point-mass rows are on
    every lattice, so W = X is always among the candidates. With ``prune``
    only pieces not dominated by another piece are kept (dominated pieces
    are subsets, so the union is unchanged).
    """
    _check_output(qz, wc.eaves)
    nx = len(wc.input_alphabet)
    w_card = nx + 1 if w_card is None else int(w_card)
    if not (1 <= w_card <= nx + 1):
        raise ValueError(f"w_card must lie in [1, {nx + 1}]")
    px_pts, feasible, _ = feasible_points_array(wc.eaves.rows, qz.probs, grid_res)
    if not feasible:
        return RateRegion((), s, qz, form, feasible=False, metadata={"reason": "target not reachable"})
    chans, caps, leak, disp, meta, used_res = _aux_sweep(wc, qz, s, px_pts, w_card, w_grid_res, restarts, seed)
    idx = _pareto(caps, leak) if prune else np.arange(len(caps))
    pieces = tuple(
        RegionPiece(
            float(caps[k]),
            float(leak[k]),
            {"px": px_pts[meta[k, 0]].tolist(), "pw_given_x": chans[meta[k, 1]].tolist(), "restart_spread": float(disp[k])},
        )
        for k in idx
    )
    approx_leak = s > S_ZERO_TOL
    return RateRegion(
        pieces,
        s,
        qz,
        form,
        inner_approx=not approx_leak,
        metadata={
            "grid_res": grid_res,
            "w_card": w_card,
            "w_grid_res": used_res,
            "restarts": restarts if approx_leak else 0,
            "pairs": int(len(caps)),
            "pruned": int(len(caps) - len(idx)),
            "max_restart_spread": float(disp.max()) if len(disp) else 0.0,
        },
    )


def effective_secrecy_capacity(
    wc: WiretapChannel, qz: Pmf, s: float, grid_res: int = 100, w_card: int | None = None, w_grid_res: int = 10, restarts: int = SWEEP_RESTARTS
) -> float:
    """Largest secret rate R1 of the stochastic-encoder region (clipped at 0)."""
    region = stochastic_encoder_region(wc, qz, s, grid_res, w_card, w_grid_res, restarts)
    if not region.feasible:
        return 0.0
    return region.max_r1()


def mi_secrecy_capacity(wc: WiretapChannel, grid_res: int = 100, w_card: int | None = None, w_grid_res: int = 10) -> float:
    """max over P_X and P_{W|X} of I(W;Y) - I(W;Z) on grids (no output constraint)."""
    nx = len(wc.input_alphabet)
    w_card = nx + 1 if w_card is None else int(w_card)
    px_pts = simplex_lattice(nx, grid_res)
    best = 0.0
    lat_rows = math.comb(w_grid_res + w_card - 1, w_card - 1) ** nx
    # keep each vectorized block moderate
    step = max(1, PAIR_BUDGET // max(1, lat_rows))
    chans = _row_grid(w_card, nx, w_grid_res)
    for start in range(0, len(px_pts), step):
        block = px_pts[start : start + step]
        pw, px_given_w = _reverse_channel(block[:, None, :], chans[None])
        gain = mutual_info_array(pw, px_given_w @ wc.main.rows) - mutual_info_array(pw, px_given_w @ wc.eaves.rows)
        best = max(best, float(gain.max()))
    return best
