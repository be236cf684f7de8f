"""JSON model files for pmfs and channels.

Pmf::

    {"alphabet": ["0", "1"], "probs": ["0.5", 0.5]}

Channel::

    {"input_alphabet": [...], "output_alphabet": [...], "rows": [[...], ...]}

Probabilities may be floats or decimal strings.
"""
from __future__ import annotations

import json
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .errors import ModelValidationError
from .prob_core import Channel, Pmf


def _number(v) -> float:
    if isinstance(v, bool):
        raise ModelValidationError(f"not a probability: {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(Decimal(v.strip()))
        except InvalidOperation as exc:
            raise ModelValidationError(f"not a decimal number: {v!r}") from exc
    raise ModelValidationError(f"not a probability: {v!r}")


def _labels(seq, what: str) -> tuple:
    if not isinstance(seq, list) or not seq:
        raise ModelValidationError(f"{what} must be a non-empty list")
    return tuple(str(a) for a in seq)


def pmf_from_dict(d: dict) -> Pmf:
    try:
        alphabet = _labels(d["alphabet"], "alphabet")
        probs = np.array([_number(v) for v in d["probs"]])
    except (KeyError, TypeError) as exc:
        raise ModelValidationError(f"malformed pmf model: {exc}") from exc
    return Pmf(alphabet, probs)


def channel_from_dict(d: dict) -> Channel:
    try:
        ia = _labels(d["input_alphabet"], "input_alphabet")
        oa = _labels(d["output_alphabet"], "output_alphabet")
        rows = np.array([[_number(v) for v in row] for row in d["rows"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelValidationError(f"malformed channel model: {exc}") from exc
    return Channel(ia, oa, rows)


def pmf_to_dict(p: Pmf) -> dict:
    return {"alphabet": [str(a) for a in p.alphabet], "probs": p.probs.tolist()}


def channel_to_dict(w: Channel) -> dict:
    return {
        "input_alphabet": [str(a) for a in w.input_alphabet],
        "output_alphabet": [str(a) for a in w.output_alphabet],
        "rows": w.rows.tolist(),
    }


def _read(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{path}: invalid JSON ({exc})") from exc


def load_pmf(path) -> Pmf:
    return pmf_from_dict(_read(path))


def load_channel(path) -> Channel:
    return channel_from_dict(_read(path))


def load_model(path):
    """Load a file holding either a channel or a pmf, decided by its keys."""
    d = _read(path)
    if "rows" in d:
        return channel_from_dict(d)
    return pmf_from_dict(d)
