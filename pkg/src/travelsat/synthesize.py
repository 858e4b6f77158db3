"""Synthetic survey generator.

Samples each predictor independently from a configurable marginal
distribution, then labels every record with a registered deterministic rule
plus optional Gaussian noise. The shipped default marginals mirror the
reference survey's published summary statistics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources as importlib_resources

from numpy.random import Generator, default_rng
import numpy as np

from .dataset import Dataset, RespondentRecord
from .errors import DatasetError, SchemaError
from .rules import SCORE_MAX, SCORE_MIN, get_rule
from .schema import CATEGORICAL, NUMERIC, VariableSchema, default_schema


@dataclass(frozen=True)
class NumericMarginal:
    kind: str  # "normal" | "lognormal" | "uniform"
    mean: float = 0.0
    std: float = 1.0
    sigma: float = 0.5
    low: float = 0.0
    high: float = 1.0
    clip_min: float | None = None
    clip_max: float | None = None

    def sample(self, rng: Generator, n: int) -> np.ndarray:
        if self.kind == "normal":
            draws = rng.normal(self.mean, self.std, size=n)
        elif self.kind == "lognormal":
            # parameterized by the target arithmetic mean
            mu = np.log(self.mean) - self.sigma ** 2 / 2.0
            draws = rng.lognormal(mu, self.sigma, size=n)
        elif self.kind == "uniform":
            draws = rng.uniform(self.low, self.high, size=n)
        else:
            raise SchemaError(f"unknown numeric marginal kind {self.kind!r}")
        if self.clip_min is not None:
            draws = np.maximum(draws, self.clip_min)
        if self.clip_max is not None:
            draws = np.minimum(draws, self.clip_max)
        return draws

    def specified_mean(self) -> float:
        if self.kind == "uniform":
            return (self.low + self.high) / 2.0
        return self.mean


@dataclass(frozen=True)
class CategoricalMarginal:
    # (code, probability) pairs; probabilities normalized at construction
    probs: tuple[tuple[int, float], ...]

    def __post_init__(self):
        total = sum(p for _, p in self.probs)
        if total <= 0:
            raise SchemaError("categorical marginal needs positive probabilities")
        object.__setattr__(
            self, "probs", tuple((c, p / total) for c, p in self.probs)
        )

    def sample(self, rng: Generator, n: int) -> np.ndarray:
        codes = np.array([c for c, _ in self.probs])
        weights = np.array([p for _, p in self.probs])
        return rng.choice(codes, size=n, p=weights)

    def share(self, code: int) -> float:
        for c, p in self.probs:
            if c == code:
                return p
        raise SchemaError(f"no category code {code} in marginal")


Marginal = NumericMarginal | CategoricalMarginal


def _marginal_from_dict(name: str, d: dict) -> Marginal:
    kind = d.get("kind")
    if kind == "categorical":
        probs = tuple((int(code), float(p)) for code, p in d["probs"].items())
        return CategoricalMarginal(probs=probs)
    if kind in ("normal", "lognormal", "uniform"):
        return NumericMarginal(
            kind=kind,
            mean=float(d.get("mean", 0.0)),
            std=float(d.get("std", 1.0)),
            sigma=float(d.get("sigma", 0.5)),
            low=float(d.get("low", 0.0)),
            high=float(d.get("high", 1.0)),
            clip_min=d.get("clip_min"),
            clip_max=d.get("clip_max"),
        )
    raise SchemaError(f"{name}: unknown marginal kind {kind!r}")


def marginals_from_dict(d: dict) -> dict[str, Marginal]:
    return {name: _marginal_from_dict(name, spec) for name, spec in d.items()}


def load_marginals(path) -> dict[str, Marginal]:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read marginals: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return marginals_from_dict(payload)


_DEFAULT_MARGINALS = None


def default_marginals() -> dict[str, Marginal]:
    """Marginals shipped with the package, mirroring the reference survey."""
    global _DEFAULT_MARGINALS
    if _DEFAULT_MARGINALS is None:
        text = importlib_resources.files("travelsat").joinpath(
            "resources/default_marginals.json").read_text("utf-8")
        _DEFAULT_MARGINALS = marginals_from_dict(json.loads(text))
    return dict(_DEFAULT_MARGINALS)


def _check_marginals(schema: VariableSchema, marginals: dict[str, Marginal]) -> None:
    for var in schema.predictors:
        if var.name not in marginals:
            raise SchemaError(f"no marginal for variable {var.name!r}")
        marginal = marginals[var.name]
        if var.kind == CATEGORICAL and not isinstance(marginal, CategoricalMarginal):
            raise SchemaError(f"{var.name}: categorical variable needs a categorical marginal")
        if var.kind == NUMERIC and not isinstance(marginal, NumericMarginal):
            raise SchemaError(f"{var.name}: numeric variable needs a numeric marginal")
        if isinstance(marginal, CategoricalMarginal):
            bad = [c for c, _ in marginal.probs if c not in var.codes]
            if bad:
                raise SchemaError(f"{var.name}: marginal codes {bad} not in schema")


def synthesize(
    n: int,
    seed: int,
    label_rule: str = "linear",
    noise: float = 0.0,
    marginals: dict[str, Marginal] | None = None,
    schema: VariableSchema | None = None,
    id_prefix: str = "s",
) -> Dataset:
    """Generate n labeled records. Same arguments give byte-identical output."""
    if n <= 0:
        raise DatasetError("n must be positive")
    if noise < 0:
        raise DatasetError("noise must be non-negative")
    schema = schema or default_schema()
    marginals = marginals if marginals is not None else default_marginals()
    _check_marginals(schema, marginals)
    rule = get_rule(label_rule)

    rng = default_rng(seed)
    # column by column in schema order so the draw sequence is reproducible
    columns = {}
    for var in schema.predictors:
        draws = marginals[var.name].sample(rng, n)
        if var.kind == NUMERIC:
            # survey-grade precision; also survives prompt round-trips exactly
            draws = np.array([float(format(x, ".6g")) for x in draws])
        columns[var.name] = draws
    noise_draws = rng.normal(0.0, noise, size=n) if noise > 0 else np.zeros(n)

    width = len(str(n))
    records = []
    for i in range(n):
        values = {name: float(columns[name][i]) for name in schema.names}
        score = rule(values) + float(noise_draws[i])
        score = min(SCORE_MAX, max(SCORE_MIN, score))
        records.append(RespondentRecord(
            record_id=f"{id_prefix}{i + 1:0{width}d}",
            values=values,
            satisfaction=float(score),
        ))
    return Dataset(schema=schema, records=tuple(records))
