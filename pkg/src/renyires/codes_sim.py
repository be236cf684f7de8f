"""Random codebooks and exact or sampled Rényi divergences of their outputs.

Random numbers come from numpy's Philox counter-based generator. Each Monte
Carlo trial owns a fixed-size block of the counter space, so a chunked or
parallel evaluation reproduces the serial stream exactly.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import NotAType, SizeCapExceeded, SupportViolation, TypicalSetEmpty
from .prob_core import (
    DEFAULT_SIZE_CAP,
    S_ZERO_TOL,
    Channel,
    Pmf,
    _check_input,
    _check_output,
    kl_array,
    product_array,
    product_rows,
    renyi_array,
    renyi_sum_array,
)

#: cap on the number of codebooks enumerated by the exhaustive oracle
EXHAUSTIVE_CAP = 65536
#: uniforms per Philox counter step
_WORDS_PER_COUNTER = 4
#: elements per Monte Carlo chunk (trials * M * |Y|^n)
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True, eq=False)
class Codebook:
    """M codewords of length n, stored as symbol indices into ``alphabet``."""

    n: int
    indices: np.ndarray
    alphabet: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64)
        if idx.ndim != 2 or idx.shape[0] < 1 or idx.shape[1] != self.n or self.n < 1:
            raise ValueError(f"codebook must be an (M >= 1, n={self.n}) index array, got shape {idx.shape}")
        if idx.min() < 0 or idx.max() >= len(self.alphabet):
            raise ValueError("codeword symbols out of alphabet range")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "alphabet", tuple(self.alphabet))

    @classmethod
    def from_codewords(cls, codewords: Sequence[Sequence], alphabet: Sequence) -> "Codebook":
        alphabet = tuple(alphabet)
        idx = np.array([[alphabet.index(a) for a in cw] for cw in codewords], dtype=np.int64)
        return cls(idx.shape[1], idx, alphabet)

    @property
    def m_count(self) -> int:
        return self.indices.shape[0]

    @property
    def codewords(self) -> tuple[tuple, ...]:
        return tuple(tuple(self.alphabet[i] for i in row) for row in self.indices)

    def __len__(self) -> int:
        return self.m_count

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.codewords)


@dataclass(frozen=True)
class EnsembleEstimate:
    """Ensemble Rényi divergence estimate (nats)."""

    value: float
    std_error: float
    trials: int
    method: str
    seed: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def record(self, n: int, m_count: int, s: float) -> dict:
        """JSON-ready record with the run parameters."""
        return {
            "method": self.method,
            "n": n,
            "M": m_count,
            "s": s,
            "value": self.value,
            "std_error": self.std_error,
            "seed": self.seed,
            "trials": self.trials,
        }


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _uniform_blocks(seed: int, start: int, count: int, length: int) -> np.ndarray:
    """Uniforms for trials ``start .. start+count-1``, ``length`` per trial.

    Trial t reads the Philox stream from counter t * ceil(length / 4).
    """
    per = -(-length // _WORDS_PER_COUNTER)
    bg = np.random.Philox(key=int(seed))
    if start:
        bg.advance(start * per)
    u = np.random.Generator(bg).random(count * per * _WORDS_PER_COUNTER)
    return u.reshape(count, per * _WORDS_PER_COUNTER)[:, :length]


def _inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def _check_sizes(n: int, m_count: int) -> None:
    if n < 1:
        raise ValueError("blocklength n must be >= 1")
    if m_count < 1:
        raise ValueError("codebook size M must be >= 1")


def sample_iid_codebook(px: Pmf, n: int, m_count: int, seed: int) -> Codebook:
    """M codewords with i.i.d. symbols from ``px``."""
    _check_sizes(n, m_count)
    u = _uniform_blocks(seed, 0, 1, m_count * n)[0]
    idx = _inverse_cdf(px.probs, u).reshape(m_count, n)
    return Codebook(n, idx, px.alphabet)


def type_counts(type_pmf: Pmf, n: int) -> np.ndarray:
    """Symbol counts n * type_pmf, or :class:`NotAType` if they are not integers."""
    raw = type_pmf.probs * n
    counts = np.rint(raw).astype(np.int64)
    if np.any(np.abs(raw - counts) > 1e-9) or counts.sum() != n:
        raise NotAType(f"{type_pmf!r} is not an n={n} type")
    return counts


def sample_constant_composition_codebook(type_pmf: Pmf, n: int, m_count: int, seed: int) -> Codebook:
    """Codewords drawn uniformly from the type class of ``type_pmf``."""
    _check_sizes(n, m_count)
    counts = type_counts(type_pmf, n)
    base = np.repeat(np.arange(len(counts)), counts)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    idx = rng.permuted(np.tile(base, (m_count, 1)), axis=1)
    return Codebook(n, idx, type_pmf.alphabet)


def type_class_size(counts: Sequence[int]) -> int:
    """Multinomial coefficient n! / prod(k_x!)."""
    out = math.factorial(int(sum(counts)))
    for k in counts:
        out //= math.factorial(int(k))
    return out


def _compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def typical_types(q: Pmf, n: int, eps: float) -> list[tuple[int, ...]]:
    """Count vectors k with |k/n - q(x)| <= eps * q(x) for every symbol."""
    out = []
    for counts in _compositions(n, len(q)):
        freq = np.asarray(counts) / n
        if np.all(np.abs(freq - q.probs) <= eps * q.probs + 1e-12):
            out.append(counts)
    return out


def typical_set_mass(q: Pmf, n: int, eps: float) -> float:
    """Probability that an i.i.d. q^n sequence is eps-typical."""
    total = 0.0
    for counts in typical_types(q, n, eps):
        total += type_class_size(counts) * float(np.prod(q.probs ** np.asarray(counts)))
    return total


def sample_typical_set_codebook(q: Pmf, n: int, m_count: int, eps: float, seed: int, max_rounds: int = 10000) -> Codebook:
    """Codewords from q^n conditioned on the eps-typical set, by rejection.

    The acceptance rate of the rejection sampler is kept in
    ``metadata["acceptance_rate"]``.
    """
    _check_sizes(n, m_count)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if not typical_types(q, n, eps):
        raise TypicalSetEmpty(f"no length-{n} sequence is {eps}-typical for {q!r}")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    batch = max(64, 4 * m_count)
    kept: list[np.ndarray] = []
    drawn = accepted = 0
    for _ in range(max_rounds):
        idx = _inverse_cdf(q.probs, rng.random((batch, n)))
        freq = np.stack([(idx == x).sum(axis=1) for x in range(len(q))], axis=1) / n
        ok = np.all(np.abs(freq - q.probs) <= eps * q.probs + 1e-12, axis=1)
        drawn += batch
        accepted += int(ok.sum())
        kept.append(idx[ok])
        if accepted >= m_count:
            break
    pool = np.concatenate(kept)[:m_count]
    if len(pool) < m_count:
        raise TypicalSetEmpty("rejection sampler did not collect enough typical codewords")
    return Codebook(n, pool, q.alphabet, {"acceptance_rate": accepted / drawn, "eps": eps})


# ---------------------------------------------------------------------------
# induced output and per-code divergence
# ---------------------------------------------------------------------------


def _output_rows(idx: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Product channel rows for codewords ``idx[..., n]`` -> (..., |Y|^n)."""
    out = rows[idx[..., 0]]
    for i in range(1, idx.shape[-1]):
        nxt = rows[idx[..., i]]
        out = (out[..., :, None] * nxt[..., None, :]).reshape(out.shape[:-1] + (-1,))
    return out


def _check_output_cap(ny: int, n: int, cap: int = DEFAULT_SIZE_CAP) -> None:
    if ny**n > cap:
        raise SizeCapExceeded(f"|Y|^n = {ny}^{n} exceeds cap {cap}")


def induced_output_pmf(cb: Codebook, w: Channel) -> Pmf:
    """Output pmf on Y^n when a uniformly chosen codeword is sent."""
    if cb.alphabet != w.input_alphabet:
        raise ValueError("codebook alphabet differs from channel input alphabet")
    _check_output_cap(w.shape[1], cb.n)
    probs = _output_rows(cb.indices, w.rows).mean(axis=0)
    labels = w.output_alphabet if cb.n == 1 else tuple(itertools.product(w.output_alphabet, repeat=cb.n))
    return Pmf(labels, probs / probs.sum())


def code_renyi_div(cb: Codebook, w: Channel, q: Pmf, s: float) -> float:
    """D_{1+s}(induced output || q^n) for one codebook realization."""
    _check_output(q, w)
    out = induced_output_pmf(cb, w).probs
    qn = product_array(q.probs, cb.n)
    if s > S_ZERO_TOL and np.any((out > 0) & (qn <= 0)):
        raise SupportViolation("induced output puts mass where the target vanishes")
    return float(renyi_array(out, qn, s))


# ---------------------------------------------------------------------------
# ensemble divergences
# ---------------------------------------------------------------------------


def _statistic(induced: np.ndarray, qn: np.ndarray, s: float) -> np.ndarray:
    """Per-codebook summand of the ensemble identity (KL itself at s = 0)."""
    if abs(s) < S_ZERO_TOL:
        return kl_array(induced, qn)
    return renyi_sum_array(induced, qn, s)


def _finish(mean: float, s: float) -> float:
    if abs(s) < S_ZERO_TOL:
        return float(mean)
    return float(np.log(mean) / s)


def ensemble_renyi_div(
    px: Pmf, w: Channel, q: Pmf, n: int, m_count: int, s: float, trials: int, seed: int
) -> EnsembleEstimate:
    """Monte Carlo estimate of the ensemble divergence of an i.i.d. random code.

    Averages sum_y P(y|U)^{1+s} Q(y)^{-s} over sampled codebooks U and applies
    (1/s) log once to the mean; the standard error follows from the delta
    method. At s = 0 the per-codebook KL divergence is averaged directly.
    """
    _check_input(px, w)
    _check_output(q, w)
    _check_sizes(n, m_count)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_output_cap(w.shape[1], n)
    qn = product_array(q.probs, n)
    if s > S_ZERO_TOL and np.any((w.rows[px.probs > 0] > 0) & (q.probs[None, :] <= 0)):
        raise SupportViolation("channel rows put mass where the target vanishes")
    per_trial = m_count * n
    chunk = max(1, _CHUNK_ELEMENTS // max(1, m_count * len(qn)))
    stats = np.empty(trials)
    for start in range(0, trials, chunk):
        count = min(chunk, trials - start)
        u = _uniform_blocks(seed, start, count, per_trial)
        idx = _inverse_cdf(px.probs, u).reshape(count, m_count, n)
        induced = _output_rows(idx, w.rows).mean(axis=1)
        stats[start : start + count] = _statistic(induced, qn, s)
    mean = float(np.mean(stats))
    sd = float(np.std(stats, ddof=1)) if trials > 1 else 0.0
    se_mean = sd / math.sqrt(trials)
    if abs(s) < S_ZERO_TOL:
        se = se_mean
    else:
        se = se_mean / (abs(s) * mean)
    return EnsembleEstimate(_finish(mean, s), se, trials, "monte-carlo", seed)


def ensemble_renyi2_exact(px: Pmf, w: Channel, q: Pmf, n: int, m_count: int) -> float:
    """Exact order-2 ensemble divergence from the second-moment expansion.

    For i.i.d. codewords E[P(y)^2] = E[P(y|X)^2] / M + (1 - 1/M) (E P(y|X))^2,
    which gives log((1/M) e^{D2(joint)} + (1 - 1/M) e^{D2(output)}) with both
    divergences taken on the n-fold product.
    """
    _check_input(px, w)
    _check_output(q, w)
    _check_sizes(n, m_count)
    pxn = product_array(px.probs, n)
    rows = product_rows(w.rows, n)
    qn = product_array(q.probs, n)
    joint = float(pxn @ renyi_sum_array(rows, qn, 1.0))
    out = float(renyi_sum_array(pxn @ rows, qn, 1.0))
    return float(np.log(joint / m_count + (1.0 - 1.0 / m_count) * out))


def ensemble_renyi_div_exhaustive(px: Pmf, w: Channel, q: Pmf, n: int, m_count: int, s: float) -> float:
    """Exact ensemble divergence by enumerating every codebook with its probability."""
    _check_input(px, w)
    _check_output(q, w)
    _check_sizes(n, m_count)
    nx = w.shape[0]
    if nx ** (n * m_count) > EXHAUSTIVE_CAP:
        raise SizeCapExceeded(f"|X|^(nM) = {nx}^{n * m_count} exceeds {EXHAUSTIVE_CAP}")
    pxn = product_array(px.probs, n)
    rows = product_rows(w.rows, n)
    qn = product_array(q.probs, n)
    words = len(pxn)
    combos = np.indices((words,) * m_count).reshape(m_count, -1).T
    weights = np.prod(pxn[combos], axis=1)
    live = weights > 0
    combos, weights = combos[live], weights[live]
    induced = rows[combos].mean(axis=1)
    if s > S_ZERO_TOL and np.any((induced > 0) & (qn[None, :] <= 0)):
        raise SupportViolation("some codebook output puts mass where the target vanishes")
    mean = float(np.dot(weights, _statistic(induced, qn, s)))
    return _finish(mean, s)


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares fit of -(1/n) log D_n against 1/n.

    ``intercept`` is the extrapolated exponent at n -> infinity.
    """

    slope: float
    intercept: float
    residuals: tuple
    n_list: tuple
    m_counts: tuple
    divergences: tuple
    methods: tuple

    def __iter__(self):
        return iter((self.slope, self.intercept))


def _ensemble_value(px, w, q, n, m, s, trials, seed):
    if abs(s - 1.0) < 1e-12:
        return ensemble_renyi2_exact(px, w, q, n, m), "exact-moment"
    if w.shape[0] ** (n * m) <= EXHAUSTIVE_CAP:
        return ensemble_renyi_div_exhaustive(px, w, q, n, m, s), "exact-enum"
    return ensemble_renyi_div(px, w, q, n, m, s, trials, seed).value, "monte-carlo"


def exponent_fit(
    px: Pmf, w: Channel, q: Pmf, m_rate: float, s: float, n_list: Sequence[int], trials: int = 10000, seed: int = 0
) -> ExponentFit:
    """Fit the decay exponent of the ensemble divergence with M = round(e^{n m_rate}).

    Order 2 uses the exact moment formula, small instances the exhaustive
    oracle, and everything else Monte Carlo.
    """
    ns, ms, ds, methods = [], [], [], []
    for n in n_list:
        m = max(1, int(round(math.exp(n * m_rate))))
        d, how = _ensemble_value(px, w, q, n, m, s, trials, seed + n)
        ns.append(n)
        ms.append(m)
        ds.append(d)
        methods.append(how)
    x = 1.0 / np.asarray(ns, float)
    y = -np.log(np.asarray(ds, float)) / np.asarray(ns, float)
    if len(ns) == 1:
        slope, intercept = 0.0, float(y[0])
    else:
        slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return ExponentFit(float(slope), float(intercept), tuple(resid.tolist()), tuple(ns), tuple(ms), tuple(ds), tuple(methods))


def fit_line(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """(slope, intercept) of the least-squares line."""
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(intercept)


def records_to_json(records: Sequence[dict]) -> str:
    return json.dumps(list(records), indent=2)


def codebook_to_dict(cb: Codebook) -> dict:
    return {"n": cb.n, "alphabet": list(cb.alphabet), "codewords": [list(c) for c in cb.codewords]}
