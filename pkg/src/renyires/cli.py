"""Command-line front end.

Exit codes: 0 success, 1 other error, 2 infeasible target, 3 size cap,
4 model validation error or support violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import codes_sim, exponents, figures, rates, wiretap
from .errors import InfeasibleTarget, ModelValidationError, ResolvabilityError, SizeCapExceeded, SupportViolation
from .models import load_channel, load_model, load_pmf
from .prob_core import Channel, Pmf, renyi_div

log = logging.getLogger("renyires")

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_INFEASIBLE = 2
EXIT_SIZE_CAP = 3
EXIT_VALIDATION = 4

COMMANDS = ("divergence", "min-rate", "resolvability", "exponent", "region", "capacity", "simulate", "figure")
METHODS = ("monte-carlo", "exact-enum", "exact-moment")


@dataclass
class RunConfig:
    """Validated flag set of one invocation."""

    command: str
    model: str | None = None
    target: str | None = None
    eaves: str | None = None
    input: str | None = None
    s_values: list = field(default_factory=lambda: [1.0])
    rate_min: float = 0.0
    rate_max: float = 0.5
    rate_step: float = 0.01
    grid_res: int = 100
    seed: int = 0
    trials: int = 10000
    method: str = "monte-carlo"
    log_base: str = "e"
    out: str | None = None
    n: int = 1
    m_count: int = 2
    figure: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.rate_step > 0:
            raise ValueError("--rate-step must be positive")
        if self.rate_max < self.rate_min:
            raise ValueError("--rate-max must not be below --rate-min")
        if self.grid_res < 2:
            raise ValueError("--grid-res must be at least 2")
        if self.log_base not in ("e", "2"):
            raise ValueError("--log-base must be e or 2")
        if self.method not in METHODS:
            raise ValueError(f"--method must be one of {METHODS}")

    @property
    def rates(self) -> np.ndarray:
        n = int(math.floor((self.rate_max - self.rate_min) / self.rate_step + 1e-9))
        return np.round(self.rate_min + np.arange(n + 1) * self.rate_step, 12)

    @property
    def unit(self) -> float:
        """Divisor converting nats to the requested unit."""
        return math.log(2.0) if self.log_base == "2" else 1.0


def _channel(cfg: RunConfig) -> Channel:
    return load_channel(cfg.model) if cfg.model else Channel.bsc(figures.BSC_FLIP)


def _target(cfg: RunConfig, w: Channel) -> Pmf:
    if cfg.target:
        return load_pmf(cfg.target)
    return Pmf(w.output_alphabet, np.full(w.shape[1], 1.0 / w.shape[1]))


def _input(cfg: RunConfig, w: Channel) -> Pmf:
    if cfg.input:
        return load_pmf(cfg.input)
    return Pmf(w.input_alphabet, np.full(w.shape[0], 1.0 / w.shape[0]))


def _wiretap(cfg: RunConfig) -> wiretap.WiretapChannel:
    if cfg.model or cfg.eaves:
        if not (cfg.model and cfg.eaves):
            raise ModelValidationError("a wiretap model needs both --model and --eaves")
        return wiretap.WiretapChannel(load_channel(cfg.model), load_channel(cfg.eaves))
    return wiretap.WiretapChannel.binary()


def _table(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(v if isinstance(v, str) else repr(float(v)) for v in r))
    return "\n".join(lines) + "\n"


def cmd_divergence(cfg: RunConfig) -> str:
    """D_{1+s}(P||Q) for every requested s; --model holds P and --target Q."""
    if not (cfg.model and cfg.target):
        raise ModelValidationError("divergence needs --model P.json and --target Q.json")
    p = load_model(cfg.model)
    q = load_model(cfg.target)
    if not isinstance(p, Pmf) or not isinstance(q, Pmf):
        raise ModelValidationError("divergence expects two pmf files")
    return _table(["s", "divergence"], [(s, renyi_div(p, q, s) / cfg.unit) for s in cfg.s_values])


def cmd_min_rate(cfg: RunConfig) -> str:
    w = _channel(cfg)
    q = _target(cfg, w)
    return _table(["s", "min_rate"], [(s, rates.min_rate(w, q, s, cfg.grid_res) / cfg.unit) for s in cfg.s_values])


def cmd_resolvability(cfg: RunConfig) -> str:
    """Plus-case value for s >= 0; minus-case lower and upper bounds for s < 0."""
    w = _channel(cfg)
    q = _target(cfg, w)
    grid = cfg.rates
    rows = []
    for s in cfg.s_values:
        if s >= 0:
            vals = rates.resolvability_plus_curve(w, q, grid, s, cfg.grid_res)
            rows += [(r / cfg.unit, f"{s:g}", v.value / cfg.unit, v.value / cfg.unit) for r, v in zip(grid, vals)]
        else:
            lb, ub = rates.minus_bounds_grid(w, q, grid, [-s], min(cfg.grid_res, 40))
            rows += [(r / cfg.unit, f"{s:g}", lo / cfg.unit, hi / cfg.unit) for r, lo, hi in zip(grid, lb[:, 0], ub[:, 0])]
    return _table(["rate", "s", "lower", "upper"], rows)


def cmd_exponent(cfg: RunConfig) -> str:
    """Clipped i.i.d. exponent at the given input over the rate grid (rates in nats)."""
    w = _channel(cfg)
    q = _target(cfg, w)
    px = _input(cfg, w)
    rows = []
    for s in cfg.s_values:
        for r in cfg.rates:
            e = exponents.e_iid_clipped(px, w, q, float(r), s).value
            rows.append((r / cfg.unit, f"{s:g}", e / cfg.unit))
    return _table(["rate", "s", "e_iid"], rows)


def cmd_region(cfg: RunConfig) -> str:
    """JSON dump of the deterministic and stochastic regions per s."""
    wc = _wiretap(cfg)
    qz = load_pmf(cfg.target) if cfg.target else Pmf(wc.eaves.output_alphabet, np.full(wc.eaves.shape[1], 1.0 / wc.eaves.shape[1]))
    out = {}
    for s in cfg.s_values:
        det = wiretap.det_encoder_region(wc, qz, s, cfg.grid_res)
        sto = wiretap.stochastic_encoder_region(wc, qz, s, cfg.grid_res, seed=cfg.seed)
        out[f"{s:g}"] = {"deterministic": det.to_dict(), "stochastic": sto.to_dict()}
    return json.dumps(out, indent=1) + "\n"


def cmd_capacity(cfg: RunConfig) -> str:
    wc = _wiretap(cfg)
    qz = load_pmf(cfg.target) if cfg.target else Pmf(wc.eaves.output_alphabet, np.full(wc.eaves.shape[1], 1.0 / wc.eaves.shape[1]))
    rows = [("mi", wiretap.mi_secrecy_capacity(wc, cfg.grid_res) / cfg.unit)]
    for s in cfg.s_values:
        rows.append((f"{s:g}", wiretap.effective_secrecy_capacity(wc, qz, s, cfg.grid_res) / cfg.unit))
    return _table(["s", "capacity"], rows)


def cmd_simulate(cfg: RunConfig) -> str:
    """Ensemble divergence of i.i.d. random codes, one JSON record per s."""
    w = _channel(cfg)
    q = _target(cfg, w)
    px = _input(cfg, w)
    records = []
    for s in cfg.s_values:
        if cfg.method == "monte-carlo":
            est = codes_sim.ensemble_renyi_div(px, w, q, cfg.n, cfg.m_count, s, cfg.trials, cfg.seed)
        elif cfg.method == "exact-enum":
            v = codes_sim.ensemble_renyi_div_exhaustive(px, w, q, cfg.n, cfg.m_count, s)
            est = codes_sim.EnsembleEstimate(v, 0.0, 1, "exact-enum", None)
        else:
            if abs(s - 1.0) > 1e-12:
                raise ValueError("exact-moment is only available at s = 1")
            v = codes_sim.ensemble_renyi2_exact(px, w, q, cfg.n, cfg.m_count)
            est = codes_sim.EnsembleEstimate(v, 0.0, 1, "exact-moment", None)
        records.append(est.record(cfg.n, cfg.m_count, s))
    return codes_sim.records_to_json(records) + "\n"


def cmd_figure(cfg: RunConfig) -> str:
    if cfg.figure is None:
        raise ValueError("figure needs a figure id")
    fig = figures.build(cfg.figure, grid_res=cfg.grid_res if cfg.grid_res != 100 else None)
    return fig.scaled(2 if cfg.log_base == "2" else "e").to_csv()


HANDLERS = {
    "divergence": cmd_divergence,
    "min-rate": cmd_min_rate,
    "resolvability": cmd_resolvability,
    "exponent": cmd_exponent,
    "region": cmd_region,
    "capacity": cmd_capacity,
    "simulate": cmd_simulate,
    "figure": cmd_figure,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="channel JSON (or pmf P for divergence)")
    p.add_argument("--target", help="target pmf JSON (Q)")
    p.add_argument("--eaves", help="eavesdropper channel JSON (wiretap commands)")
    p.add_argument("--input", help="input pmf JSON (P_X)")
    p.add_argument("--s", type=float, nargs="+", default=[1.0], help="order parameters s (order is 1+s)")
    p.add_argument("--rate-min", type=float, default=0.0)
    p.add_argument("--rate-max", type=float, default=0.5)
    p.add_argument("--rate-step", type=float, default=0.01)
    p.add_argument("--grid-res", type=int, default=100)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=METHODS, default="monte-carlo")
    p.add_argument("--log-base", choices=("e", "2"), default="e")
    p.add_argument("--n", type=int, default=1, help="blocklength")
    p.add_argument("--M", dest="m_count", type=int, default=2, help="codebook size")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renyires", description="Rényi resolvability toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "figure":
            p.add_argument("figure", choices=figures.FIGURES)
        _add_common(p)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        model=ns.model,
        target=ns.target,
        eaves=ns.eaves,
        input=ns.input,
        s_values=list(ns.s),
        rate_min=ns.rate_min,
        rate_max=ns.rate_max,
        rate_step=ns.rate_step,
        grid_res=ns.grid_res,
        seed=ns.seed,
        trials=ns.trials,
        method=ns.method,
        log_base=ns.log_base,
        out=ns.out,
        n=ns.n,
        m_count=ns.m_count,
        figure=getattr(ns, "figure", None),
    )


def run(cfg: RunConfig) -> str:
    return HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(ns)
        text = run(cfg)
    except InfeasibleTarget as exc:
        print(f"error: infeasible target: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SizeCapExceeded as exc:
        print(f"error: size cap exceeded: {exc}; lower n or M, or use --method monte-carlo", file=sys.stderr)
        return EXIT_SIZE_CAP
    except (ModelValidationError, SupportViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ResolvabilityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped to head); silence the flush at exit
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
