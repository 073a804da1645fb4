"""Experiment configuration files.

A config is a YAML mapping::

    name: junk_suppression
    seed: 0
    repetitions: 10
    strategy: soda                      # used by `soda run`
    strategies: [soda, uniform, target] # used by `soda compare`
    output_dir: results/junk
    train:
      n_train: 20
      n_test: 30
      n_a: 60
      epochs: 50
      image_size: 32
      filters: 8
      batch_size: 4
      optimizer: sgd                    # or rmsprop
      learning_rate: 0.1
      l2_weight: 1.0e-4
    soda: {eta: 6.0, rho: 0.99, beta: 0.5}
    generators:
      - {kind: noise_injection, sigmas: [0.01, 0.02, 0.03, 0.04, 0.05], mode: multiplicative}
      - {kind: rotation, steps: [1, 2, 3, 4, 5, 6, 7, 8]}
      - {kind: junk, low: 0.0, high: 1.0}

Every key is optional; unknown keys are rejected with the line they sit on.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import yaml

from soda.augment import DEFAULT_PARAMS, GeneratorSpec, default_registry

STRATEGIES = ("soda", "uniform", "target")
OPTIMIZERS = ("sgd", "rmsprop")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass
class SodaParams:
    eta: float = 6.0
    rho: float = 0.99
    beta: float = 0.5


@dataclass
class TrainConfig:
    n_train: int = 20
    n_test: int = 30
    n_a: int = 60
    epochs: int = 50
    image_size: int = 32
    filters: int = 8
    batch_size: int = 4
    optimizer: str = "sgd"
    learning_rate: float = 0.1
    l2_weight: float = 1e-4
    strategy: str = "soda"
    soda: SodaParams = field(default_factory=SodaParams)
    seed: int = 0


@dataclass
class ExperimentConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    generators: list[GeneratorSpec] = field(default_factory=default_registry)
    repetitions: int = 1
    strategies: list[str] = field(default_factory=lambda: list(STRATEGIES))
    output_dir: str = "results"
    name: str = "experiment"

    def validate(self) -> "ExperimentConfig":
        t = self.train
        k = len(self.generators)
        if k < 2:
            raise ConfigError(f"need at least 2 generators, got {k}")
        if len({g.id for g in self.generators}) != k:
            raise ConfigError("generator ids must be unique")
        if t.n_a < k:
            raise ConfigError(f"n_a={t.n_a} is smaller than the number of generators ({k})")
        for name in ("n_train", "n_test", "epochs", "image_size", "filters", "batch_size"):
            if getattr(t, name) < 1:
                raise ConfigError(f"train.{name} must be at least 1")
        if not t.learning_rate > 0:
            raise ConfigError("train.learning_rate must be positive")
        if t.l2_weight < 0:
            raise ConfigError("train.l2_weight must be non-negative")
        if t.optimizer not in OPTIMIZERS:
            raise ConfigError(f"train.optimizer must be one of {OPTIMIZERS}")
        for s in [t.strategy, *self.strategies]:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown strategy {s!r}, expected one of {STRATEGIES}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError("strategies must not repeat")
        if not t.soda.eta > 0:
            raise ConfigError("soda.eta must be positive")
        if not 0 <= t.soda.beta <= 1:
            raise ConfigError("soda.beta must lie in [0, 1]")
        if not 0 <= t.soda.rho < 1:
            raise ConfigError("soda.rho must lie in [0, 1)")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        return self

    def to_dict(self) -> dict:
        t = dataclasses.asdict(self.train)
        soda = t.pop("soda")
        seed = t.pop("seed")
        strategy = t.pop("strategy")
        return {
            "name": self.name,
            "seed": seed,
            "repetitions": self.repetitions,
            "strategy": strategy,
            "strategies": list(self.strategies),
            "output_dir": self.output_dir,
            "train": t,
            "soda": soda,
            "generators": [{"kind": g.kind, **g.params} for g in self.generators],
        }

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


_TOP = {"name", "seed", "repetitions", "strategy", "strategies", "output_dir", "train", "soda", "generators"}
_TRAIN = {f.name for f in dataclasses.fields(TrainConfig)} - {"soda", "seed", "strategy"}
_SODA = {f.name for f in dataclasses.fields(SodaParams)}

_TYPES = {
    "name": str, "output_dir": str, "strategy": str, "optimizer": str,
    "seed": int, "repetitions": int, "n_train": int, "n_test": int, "n_a": int,
    "epochs": int, "image_size": int, "filters": int, "batch_size": int,
    "learning_rate": float, "l2_weight": float, "eta": float, "rho": float, "beta": float,
}


def _line(node) -> int:
    return node.start_mark.line + 1


def _check_keys(node, allowed: set, where: str) -> dict:
    """Map key -> value node for a YAML mapping, rejecting unknown keys."""
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{where} must be a mapping", _line(node))
    out = {}
    for key_node, value_node in node.value:
        key = key_node.value
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}; allowed: {sorted(allowed)}", _line(key_node))
        if key in out:
            raise ConfigError(f"duplicate key {key!r} in {where}", _line(key_node))
        out[key] = value_node
    return out


def _scalar(node, key: str):
    value = yaml.safe_load(yaml.serialize(node))
    want = _TYPES[key]
    if want is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, want) or isinstance(value, bool):
        raise ConfigError(f"{key} must be of type {want.__name__}, got {value!r}", _line(node))
    return value


def loads(text: str) -> ExperimentConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None)
    if root is None:
        return ExperimentConfig().validate()
    top = _check_keys(root, _TOP, "config")

    cfg = ExperimentConfig()
    train_kw, soda_kw = {}, {}
    for key, node in top.items():
        if key == "train":
            for k2, n2 in _check_keys(node, _TRAIN, "train").items():
                train_kw[k2] = _scalar(n2, k2)
        elif key == "soda":
            for k2, n2 in _check_keys(node, _SODA, "soda").items():
                soda_kw[k2] = _scalar(n2, k2)
        elif key == "generators":
            cfg.generators = _parse_generators(node)
        elif key == "strategies":
            value = yaml.safe_load(yaml.serialize(node))
            if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
                raise ConfigError("strategies must be a list of names", _line(node))
            bad = [s for s in value if s not in STRATEGIES]
            if bad:
                raise ConfigError(f"unknown strategy {bad[0]!r}, expected one of {STRATEGIES}", _line(node))
            cfg.strategies = value
        elif key == "strategy":
            value = _scalar(node, key)
            if value not in STRATEGIES:
                raise ConfigError(f"unknown strategy {value!r}, expected one of {STRATEGIES}", _line(node))
            train_kw["strategy"] = value
        elif key == "seed":
            train_kw["seed"] = _scalar(node, key)
        else:
            setattr(cfg, key, _scalar(node, key))
    cfg.train = TrainConfig(**train_kw, soda=SodaParams(**soda_kw))
    return cfg.validate()


def _parse_generators(node) -> list[GeneratorSpec]:
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError("generators must be a list", _line(node))
    specs = []
    for i, item in enumerate(node.value, start=1):
        fields = _check_keys(item, {"kind"} | {p for d in DEFAULT_PARAMS.values() for p in d}, "generator")
        if "kind" not in fields:
            raise ConfigError("generator needs a 'kind'", _line(item))
        kind = fields.pop("kind").value
        if kind not in DEFAULT_PARAMS:
            raise ConfigError(f"unknown generator kind {kind!r}", _line(item))
        for k, n in fields.items():
            if k not in DEFAULT_PARAMS[kind]:
                raise ConfigError(f"parameter {k!r} does not apply to {kind}", _line(n))
        params = {k: yaml.safe_load(yaml.serialize(n)) for k, n in fields.items()}
        try:
            specs.append(GeneratorSpec(i, kind, params))
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), _line(item)) from exc
    return specs


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
