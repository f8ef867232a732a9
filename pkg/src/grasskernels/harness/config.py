"""Experiment configuration: file parsing, CLI overrides and defaults.

Config files are plain text, one `key=value` per line, `#` comments and
blank lines ignored.  Command-line flags override file values.  Every
run embeds its fully resolved configuration in the report, so a report
never depends on implicit state.
"""

from dataclasses import dataclass, fields
from typing import Tuple

from ..exceptions import InputError

_LIST_SEPARATOR = None  # str.split default: any whitespace


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings for one harness run."""

    task: str
    dataset: str = ""
    out: str = ""
    name: str = ""
    seed: int = 0
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9)
    threads: int = 1
    kernels: Tuple[str, ...] = ()
    d: int = 8
    p: int = 2
    classes: int = 2
    per_class: int = 20
    noise_angle: float = 0.1
    train_fraction: float = 0.5
    svm_c: float = 10.0
    clusters: int = 0
    restarts: int = 5
    bits: Tuple[int, ...] = (60,)
    anchors: int = 30
    lam: float = 0.001
    top_m: int = 10
    tune: bool = False
    beta_grid: Tuple[float, ...] = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)
    alpha_grid: Tuple[int, ...] = (1, 2, 3)
    cv_folds: int = 3

    def __post_init__(self):
        if self.task not in TASKS:
            raise InputError(f"unknown task {self.task!r}; "
                             f"expected one of {sorted(TASKS)}")
        if self.threads < 1:
            raise InputError("threads must be at least 1")
        if not self.seeds:
            raise InputError("seeds must not be empty")
        if not 0.0 < self.train_fraction < 1.0:
            raise InputError("train_fraction must lie in (0, 1)")

    def resolved_items(self):
        """Ordered (key, rendered value) pairs for report embedding.

        The thread count is execution scheduling, not experiment
        identity, and is left out so reports stay byte-identical across
        worker pools.
        """
        items = []
        for spec in fields(self):
            if spec.name == "threads":
                continue
            items.append((spec.name, _render(getattr(self, spec.name))))
        return items


TASKS = ("gram", "pd-check", "counterexample", "svm", "cluster",
         "sparse-code", "hash", "bench", "generate")


def _render(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(_render(v) for v in value)
    return str(value)


def _parse_bool(key, value):
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise InputError(f"{key} must be true or false, got {value!r}")


def _parse_typed(key, value, kind):
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except ValueError as exc:
        raise InputError(f"{key} must be a {kind.__name__}: {exc}") from exc
    return value


_FIELD_TYPES = {
    "task": str, "dataset": str, "out": str, "name": str,
    "seed": int, "threads": int, "d": int, "p": int, "classes": int,
    "per_class": int, "clusters": int, "restarts": int, "anchors": int,
    "top_m": int, "cv_folds": int,
    "noise_angle": float, "train_fraction": float, "svm_c": float,
    "lam": float,
    "tune": bool,
    "seeds": (int,), "kernels": (str,), "bits": (int,),
    "beta_grid": (float,), "alpha_grid": (int,),
}


def coerce_value(key, value):
    """Coerce one raw string (or already-typed value) to its field type."""
    if key not in _FIELD_TYPES:
        raise InputError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    if not isinstance(value, str):
        return value
    if isinstance(kind, tuple):
        element = kind[0]
        parts = value.split(_LIST_SEPARATOR)
        if element is str:
            return tuple(parts)
        return tuple(_parse_typed(key, part, element) for part in parts)
    if kind is bool:
        return _parse_bool(key, value)
    if kind is str:
        return value
    return _parse_typed(key, value, kind)


def load_config_file(path):
    """Read a config file into a raw {key: string} mapping."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise InputError(
                f"{path}:{lineno}: expected key=value, got {raw!r}")
        key = key.strip()
        if key in values:
            raise InputError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def build_config(task, file_values=None, overrides=None):
    """Merge file values and overrides into an ExperimentConfig.

    `file_values` are raw strings from load_config_file; `overrides`
    (typically CLI flags) may be raw strings or typed values and win on
    conflict.  A task given in the file is ignored in favor of the
    explicit `task` argument.
    """
    merged = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key == "task":
                continue
            if value is None:
                continue
            merged[key] = coerce_value(key, value)
    return ExperimentConfig(task=task, **merged)
