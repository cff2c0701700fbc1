"""Experiment configuration: a small JSON file with a closed key set.

Example::

    {
      "usages": "data/usages.tsv",
      "instances": "data/instances.tsv",
      "store": "data/embeddings.wice",
      "output_dir": "out/adapter-ogwic",
      "task": "ogwic",
      "method": "adapter",
      "train_split": "splits/train.txt",
      "eval_split": ["it-3", "it-4"],
      "seed": 42,
      "neural": {"epochs": 10},
      "gbdt": {"n_rounds": 500}
    }

Unknown keys anywhere are rejected so that typos cannot silently fall back
to defaults. Split values are either a path to a text file with one
instance id per line or an inline list of ids; omitted splits mean "all
instances".
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .errors import DataError
from .gbdt_ensemble import GbdtConfig
from .neural_models import TrainConfig

TASKS = ("ogwic", "diswic")
METHODS = ("baseline", "xlmr", "adapter", "ensemble")

_TOP_KEYS = {
    "usages",
    "instances",
    "store",
    "output_dir",
    "task",
    "method",
    "train_split",
    "eval_split",
    "seed",
    "ridge_lambda",
    "neural",
    "gbdt",
}
# seed is owned by the top-level config; colsample by the ensemble variants
_NEURAL_KEYS = {f.name for f in dataclasses.fields(TrainConfig)} - {"seed"}
_GBDT_KEYS = {f.name for f in dataclasses.fields(GbdtConfig)} - {"seed", "colsample"}


@dataclass(frozen=True)
class ExperimentConfig:
    usages: Optional[str] = None
    instances: Optional[str] = None
    store: Optional[str] = None
    output_dir: Optional[str] = None
    task: Optional[str] = None
    method: Optional[str] = None
    train_split: Union[str, list, None] = None
    eval_split: Union[str, list, None] = None
    seed: int = 42
    ridge_lambda: float = 1e-6
    neural: dict = dataclasses.field(default_factory=dict)
    gbdt: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.task is not None and self.task not in TASKS:
            raise DataError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.method is not None and self.method not in METHODS:
            raise DataError(f"method must be one of {METHODS}, got {self.method!r}")
        unknown = set(self.neural) - _NEURAL_KEYS
        if unknown:
            raise DataError(f"unknown neural config keys: {sorted(unknown)}")
        unknown = set(self.gbdt) - _GBDT_KEYS
        if unknown:
            raise DataError(f"unknown gbdt config keys: {sorted(unknown)}")

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise DataError(f"config is missing required keys: {missing}")

    def train_config(self, seed: Optional[int] = None) -> TrainConfig:
        kwargs = dict(self.neural)
        if "hidden" in kwargs:
            kwargs["hidden"] = tuple(kwargs["hidden"])
        return TrainConfig(seed=self.seed if seed is None else seed, **kwargs)

    def gbdt_config(self, colsample: float, seed: Optional[int] = None) -> GbdtConfig:
        return GbdtConfig(seed=self.seed if seed is None else seed,
                          colsample=colsample, **self.gbdt)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataError(f"config {path} must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise DataError(f"unknown config keys in {path}: {sorted(unknown)}")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise DataError(f"bad config {path}: {exc}") from exc


def resolve_split(split: Union[str, list, None], base: Path) -> Optional[list[str]]:
    """Materialize a split definition to a list of instance ids (None = all)."""
    if split is None:
        return None
    if isinstance(split, list):
        ids = [str(v) for v in split]
    else:
        split_path = Path(split)
        if not split_path.is_absolute():
            split_path = base / split_path
        try:
            text = split_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read split file {split_path}: {exc}") from exc
        ids = [line.strip() for line in text.splitlines() if line.strip()]
    if not ids:
        raise DataError("split resolved to zero instance ids")
    seen = set()
    for i in ids:
        if i in seen:
            raise DataError(f"duplicate instance id in split: {i}")
        seen.add(i)
    return ids
