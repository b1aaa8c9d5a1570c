"""Pipeline configuration: defaults, key/value config files, flag precedence.

A config file is flat UTF-8 text, one ``key = value`` per line, ``#`` comments
and blank lines allowed. Values are quoted strings, booleans (``true``/``false``),
integers or floats. Precedence is command-line flags, then the file, then the
built-in defaults; invalid values are rejected before any computation starts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FormatError
from .events import SvmConfig
from .propagation import HARD_PRIOR_MODES, VARIANTS, PropagationConfig

REDUCTION_METHODS = ("none", "frequent", "pca")

DEFAULTS = {
    "variant": "soft",
    "k": 500,
    "k_r": 500,
    "hard_prior_mode": "literal",
    "reduction": "none",
    "reduction_size": 2000,
    "svm_lambda": 1e-4,
    "svm_epochs": 100,
    "svm_seed": 0,
    "normalize_inputs": False,
    "kappa": 5,
    "stoplist": None,
    "min_df": 1,
    "seed": 0,
    "threads": 1,
}

_INT_KEYS = {"k", "k_r", "reduction_size", "svm_epochs", "svm_seed",
             "kappa", "min_df", "seed", "threads"}
_FLOAT_KEYS = {"svm_lambda"}
_BOOL_KEYS = {"normalize_inputs"}
_STR_KEYS = {"variant", "hard_prior_mode", "reduction", "stoplist"}


def _parse_scalar(text: str):
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    lowered = text.lower()
    if lowered == "true":
        return True
    if lowered == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _coerce(key: str, value):
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError(f"config key {key!r} expects an integer, got {value!r}")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"config key {key!r} expects a number, got {value!r}")
        return float(value)
    if key in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ValueError(f"config key {key!r} expects true or false, got {value!r}")
        return value
    if key in _STR_KEYS:
        if value is not None and not isinstance(value, str):
            raise ValueError(f"config key {key!r} expects a string, got {value!r}")
        return value
    raise ValueError(f"unknown config key {key!r}")


def parse_config_file(path) -> dict:
    """Parse a key/value config file into typed values, rejecting unknown keys."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(path, line_no, "expected 'key = value'")
            key, _, rest = line.partition("=")
            key = key.strip()
            try:
                values[key] = _coerce(key, _parse_scalar(rest.strip()))
            except ValueError as exc:
                raise FormatError(path, line_no, str(exc)) from None
    return values


@dataclass(frozen=True)
class PipelineConfig:
    """Validated settings for a whole pipeline run."""

    propagation: PropagationConfig
    svm: SvmConfig
    reduction: str = "none"
    reduction_size: int = 2000
    kappa: int = 5
    stoplist: str | None = None
    min_df: int = 1
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.reduction not in REDUCTION_METHODS:
            raise ValueError(f"reduction must be one of {REDUCTION_METHODS}, got {self.reduction!r}")
        if self.reduction_size < 1:
            raise ValueError("reduction_size must be at least 1")
        if self.kappa < 1:
            raise ValueError("kappa must be at least 1")
        if self.min_df < 1:
            raise ValueError("min_df must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


def resolve_config(config_file=None, overrides: dict | None = None) -> PipelineConfig:
    """Merge defaults, an optional config file and flag overrides into one config."""
    values = dict(DEFAULTS)
    if config_file is not None:
        values.update(parse_config_file(config_file))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        values[key] = _coerce(key, value)
    if values["variant"] not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {values['variant']!r}")
    if values["hard_prior_mode"] not in HARD_PRIOR_MODES:
        raise ValueError(
            f"hard_prior_mode must be one of {HARD_PRIOR_MODES}, got {values['hard_prior_mode']!r}"
        )
    propagation = PropagationConfig(
        variant=values["variant"],
        k=values["k"],
        k_r=values["k_r"],
        hard_prior_mode=values["hard_prior_mode"],
    )
    svm = SvmConfig(
        regularization=values["svm_lambda"],
        epochs=values["svm_epochs"],
        seed=values["svm_seed"],
        normalize_inputs=values["normalize_inputs"],
    )
    return PipelineConfig(
        propagation=propagation,
        svm=svm,
        reduction=values["reduction"],
        reduction_size=values["reduction_size"],
        kappa=values["kappa"],
        stoplist=values["stoplist"],
        min_df=values["min_df"],
        seed=values["seed"],
        threads=values["threads"],
    )
