"""Tabulated curves for the standard binary examples.

Every figure is a list of ``(x, curve, y)`` rows. Rates are in nats unless a
``log_base`` of 2 is requested, in which case rate-valued columns are divided
by ln 2.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import exponents, rates, wiretap
from .prob_core import Channel, Pmf

FIGURES = ("fig2", "fig3a", "fig3b", "fig4", "fig5", "fig6")

#: channel crossover probability of the resolvability presets
BSC_FLIP = 0.2


@dataclass
class FigureData:
    """Rows of a figure plus which axes carry rates (for unit conversion)."""

    name: str
    rows: list
    x_is_rate: bool
    y_is_rate: bool = True

    def curves(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        out: dict[str, list] = {}
        for x, c, y in self.rows:
            out.setdefault(c, []).append((x, y))
        return {c: (np.array([p[0] for p in v]), np.array([p[1] for p in v])) for c, v in out.items()}

    def scaled(self, log_base: float | str = "e") -> "FigureData":
        if log_base in ("e", None, math.e):
            return self
        if float(log_base) != 2.0:
            raise ValueError("log_base must be 'e' or 2")
        k = 1.0 / math.log(2.0)
        rows = [
            (x * k if self.x_is_rate else x, c, y * k if self.y_is_rate else y) for x, c, y in self.rows
        ]
        return FigureData(self.name, rows, self.x_is_rate, self.y_is_rate)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "curve", "y"])
        for x, c, y in self.rows:
            wr.writerow([repr(float(x)), c, repr(float(y))])
        return buf.getvalue()


def read_csv(text: str) -> list[tuple[float, str, float]]:
    rd = csv.reader(io.StringIO(text))
    header = next(rd)
    if header != ["x", "curve", "y"]:
        raise ValueError(f"unexpected header {header}")
    return [(float(x), c, float(y)) for x, c, y in rd]


def _bsc_preset():
    return Channel.bsc(BSC_FLIP), Pmf.uniform(2)


def _rate_grid(r_max: float, step: float) -> np.ndarray:
    n = int(round(r_max / step))
    return np.round(np.arange(n + 1) * step, 12)


def fig2(grid_res: int = 100, rate_step: float = 0.01, r_max: float = 0.5, plus_s=(0.0, 0.5, 1.0), minus_s=(0.5,), minus_grid_res: int = 30):
    """Asymptotic resolvability against rate, plus-case orders and minus-case bounds."""
    w, q = _bsc_preset()
    grid = _rate_grid(r_max, rate_step)
    rows = []
    for s in plus_s:
        vals = rates.resolvability_plus_curve(w, q, grid, s, grid_res, restarts=20)
        label = f"order {1 + s:g}"
        rows += [(r, label, v.value) for r, v in zip(grid, vals)]
    if minus_s:
        lb, ub = rates.minus_bounds_grid(w, q, grid, list(minus_s), minus_grid_res)
        for j, s in enumerate(minus_s):
            rows += [(r, f"order {1 - s:g} lower", v) for r, v in zip(grid, lb[:, j])]
            rows += [(r, f"order {1 - s:g} upper", v) for r, v in zip(grid, ub[:, j])]
    return FigureData("fig2", rows, x_is_rate=True)


def fig3a(p_step: float = 0.01, s_values=(-1.0, 0.0, 0.5, 1.0)):
    """Minimum rate of BSC(p) with uniform target against p (closed form)."""
    ps = np.round(np.arange(0, 0.5 + 1e-12, p_step), 12)
    rows = []
    for s in s_values:
        label = f"s={s:g}"
        rows += [(p, label, rates.bsc_min_rate(p, s)) for p in ps]
    return FigureData("fig3a", rows, x_is_rate=False)


def fig3b(grid_res: int = 100, s_step: float = 0.05):
    """Minimum rate of BSC(0.2) against s: optimizer and closed form."""
    w, q = _bsc_preset()
    ss = np.round(np.arange(-1.0, 1.0 + 1e-12, s_step), 12)
    rows = [(s, "computed", rates.min_rate(w, q, s, grid_res)) for s in ss]
    rows += [(s, "closed form", rates.bsc_min_rate(BSC_FLIP, s)) for s in ss]
    return FigureData("fig3b", rows, x_is_rate=False)


def fig4(rate_step: float = 0.01, r_max: float = 0.7, s_values=(-0.5, 0.0, 0.5, 1.0)):
    """Clipped i.i.d. exponent against rate for uniform input."""
    w, q = _bsc_preset()
    grid = _rate_grid(r_max, rate_step)
    rows = []
    for s in s_values:
        label = f"order {1 + s:g}"
        rows += [(r, label, exponents.e_iid_clipped(q, w, q, r, s).value) for r in grid]
    return FigureData("fig4", rows, x_is_rate=True)


def _region_rows(region: "wiretap.RateRegion", r0_step: float):
    top = max((p.sum_cap for p in region.pieces), default=0.0)
    grid = np.round(np.arange(0, top + r0_step, r0_step), 12)
    rows = [(r0, "boundary", r1) for r0, r1 in region.boundary(grid)]
    rows += [(r0, "vertex", r1) for r0, r1 in region.vertices()]
    return rows


def fig5(grid_res: int = 100, s: float = 1.0, r0_step: float = 0.005):
    """Deterministic-encoder region of the binary wiretap channel."""
    wc = wiretap.WiretapChannel.binary()
    region = wiretap.det_encoder_region(wc, Pmf.uniform(2), s, grid_res)
    return FigureData("fig5", _region_rows(region, r0_step), x_is_rate=True)


def fig6(grid_res: int = 100, s: float = 1.0, r0_step: float = 0.005, w_grid_res: int = 10):
    """Stochastic-encoder region of the binary wiretap channel (R1-capped form)."""
    wc = wiretap.WiretapChannel.binary()
    region = wiretap.stochastic_encoder_region(wc, Pmf.uniform(2), s, grid_res, w_grid_res=w_grid_res, form="r1_cap")
    return FigureData("fig6", _region_rows(region, r0_step), x_is_rate=True)


BUILDERS: dict[str, Callable[..., FigureData]] = {
    "fig2": fig2,
    "fig3a": fig3a,
    "fig3b": fig3b,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
}


def build(name: str, grid_res: int | None = None, rate_step: float | None = None) -> FigureData:
    """Build one figure with optional resolution overrides."""
    if name not in BUILDERS:
        raise ValueError(f"unknown figure {name!r}; choose from {FIGURES}")
    kwargs = {}
    if grid_res is not None and name in ("fig2", "fig3b", "fig5", "fig6"):
        kwargs["grid_res"] = grid_res
    if rate_step is not None and name in ("fig2", "fig4"):
        kwargs["rate_step"] = rate_step
    return BUILDERS[name](**kwargs)


def is_nonincreasing(y: Sequence[float], tol: float = 1e-9) -> bool:
    return bool(np.all(np.diff(np.asarray(y, float)) <= tol))


def is_nondecreasing(y: Sequence[float], tol: float = 1e-9) -> bool:
    return bool(np.all(np.diff(np.asarray(y, float)) >= -tol))
