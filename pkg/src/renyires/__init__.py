"""Rényi channel resolvability on finite alphabets.

Divergences, one-shot bounds, min-max rate expressions, minimum rates,
random-coding exponents, wiretap rate regions and a small-blocklength
random-code simulator. All logarithms are natural.
"""
from .errors import (
    AlphabetMismatch,
    DegenerateInput,
    InfeasibleTarget,
    ModelValidationError,
    NotAType,
    ResolvabilityError,
    SizeCapExceeded,
    SupportViolation,
    TypicalSetEmpty,
)
from .prob_core import (
    KL_INFINITY,
    Channel,
    FeasibleSet,
    Joint,
    Pmf,
    RenyiOrder,
    cond_renyi_div,
    expected_renyi_div,
    input_feasible_set,
    kl_div,
    mutual_info,
    product_channel,
    product_pmf,
    push_forward,
    renyi_div,
    simplex_grid,
    tv_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AlphabetMismatch",
    "Channel",
    "DegenerateInput",
    "FeasibleSet",
    "InfeasibleTarget",
    "Joint",
    "KL_INFINITY",
    "ModelValidationError",
    "NotAType",
    "Pmf",
    "RenyiOrder",
    "ResolvabilityError",
    "SizeCapExceeded",
    "SupportViolation",
    "TypicalSetEmpty",
    "cond_renyi_div",
    "expected_renyi_div",
    "input_feasible_set",
    "kl_div",
    "mutual_info",
    "product_channel",
    "product_pmf",
    "push_forward",
    "renyi_div",
    "simplex_grid",
    "tv_distance",
]
