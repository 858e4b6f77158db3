"""Survey variable schema.

The default schema describes a household travel survey with 17 predictor
variables grouped into four dimensions (socioeconomics, built environment,
travel characteristics, reference points) plus a continuous travel
satisfaction label on a 1-7 scale.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import SchemaError

DIMENSIONS = (
    "socioeconomics",
    "built_environment",
    "travel_characteristics",
    "reference_points",
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Variable:
    """One survey variable: a numeric quantity or a coded category."""

    name: str
    dimension: str
    kind: str
    unit: str = ""
    # (code, label) pairs in code order; empty for numeric variables
    categories: tuple[tuple[int, str], ...] = ()
    minimum: float | None = None
    maximum: float | None = None
    exclusive_minimum: bool = False

    def __post_init__(self):
        if self.dimension not in DIMENSIONS + ("label",):
            raise SchemaError(f"unknown dimension {self.dimension!r} for {self.name}")
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown kind {self.kind!r} for {self.name}")
        if self.kind == CATEGORICAL and len(self.categories) < 2:
            raise SchemaError(f"categorical {self.name} needs at least 2 categories")
        if self.kind == NUMERIC and self.categories:
            raise SchemaError(f"numeric {self.name} must not define categories")

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(code for code, _ in self.categories)

    def label_for(self, code: int) -> str:
        for c, label in self.categories:
            if c == code:
                return label
        raise SchemaError(f"{self.name}: no category with code {code}")

    def code_for(self, label: str) -> int:
        for code, lab in self.categories:
            if lab == label:
                return code
        raise SchemaError(f"{self.name}: no category labelled {label!r}")


@dataclass(frozen=True)
class VariableSchema:
    """Ordered predictor variables plus the label variable."""

    predictors: tuple[Variable, ...]
    label: Variable = field(
        default=Variable(
            name="travel_satisfaction",
            dimension="label",
            kind=NUMERIC,
            minimum=1.0,
            maximum=7.0,
        )
    )

    def __post_init__(self):
        names = [v.name for v in self.predictors] + [self.label.name]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate variable names: {dupes}")
        if not self.predictors:
            raise SchemaError("schema needs at least one predictor")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.predictors)

    def variable(self, name: str) -> Variable:
        for v in self.predictors:
            if v.name == name:
                return v
        if name == self.label.name:
            return self.label
        raise SchemaError(f"no variable named {name!r}")

    def by_dimension(self, dimension: str) -> tuple[Variable, ...]:
        return tuple(v for v in self.predictors if v.dimension == dimension)

    def fingerprint(self) -> str:
        """Stable hash of the schema contents, for provenance records."""
        payload = json.dumps(_schema_to_dict(self), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _schema_to_dict(schema: VariableSchema) -> dict:
    def var(v: Variable) -> dict:
        d = {"name": v.name, "dimension": v.dimension, "kind": v.kind}
        if v.unit:
            d["unit"] = v.unit
        if v.categories:
            d["categories"] = [[c, lab] for c, lab in v.categories]
        if v.minimum is not None:
            d["minimum"] = v.minimum
        if v.maximum is not None:
            d["maximum"] = v.maximum
        if v.exclusive_minimum:
            d["exclusive_minimum"] = True
        return d

    return {
        "predictors": [var(v) for v in schema.predictors],
        "label": var(schema.label),
    }


def _variable_from_dict(d: dict) -> Variable:
    try:
        return Variable(
            name=d["name"],
            dimension=d["dimension"],
            kind=d["kind"],
            unit=d.get("unit", ""),
            categories=tuple((int(c), str(lab)) for c, lab in d.get("categories", [])),
            minimum=d.get("minimum"),
            maximum=d.get("maximum"),
            exclusive_minimum=bool(d.get("exclusive_minimum", False)),
        )
    except KeyError as exc:
        raise SchemaError(f"schema entry missing key {exc}") from exc


def schema_from_dict(d: dict) -> VariableSchema:
    if "predictors" not in d:
        raise SchemaError("schema file needs a 'predictors' list")
    predictors = tuple(_variable_from_dict(v) for v in d["predictors"])
    if "label" in d:
        return VariableSchema(predictors=predictors, label=_variable_from_dict(d["label"]))
    return VariableSchema(predictors=predictors)


def load_schema(path) -> VariableSchema:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read schema: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return schema_from_dict(payload)


def save_schema(schema: VariableSchema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_schema_to_dict(schema), fh, indent=2)
        fh.write("\n")


_MODE_CATEGORIES = (
    (1, "walk"),
    (2, "bike"),
    (3, "subway"),
    (4, "taxi"),
    (5, "bus"),
    (6, "private car"),
    (7, "shuttle bus"),
    (8, "car-sharing"),
    (9, "others"),
)

_DEFAULT = None


def default_schema() -> VariableSchema:
    """Schema of the reference household travel survey (17 predictors)."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = VariableSchema(
            predictors=(
                Variable("gender", "socioeconomics", CATEGORICAL,
                         categories=((0, "male"), (1, "female"))),
                Variable("age", "socioeconomics", NUMERIC, unit="years",
                         minimum=0.0, exclusive_minimum=True),
                Variable("income", "socioeconomics", NUMERIC, unit="yuan per month",
                         minimum=0.0),
                Variable("education_level", "socioeconomics", CATEGORICAL,
                         categories=((1, "primary school"), (2, "middle school"),
                                     (3, "high school"), (4, "junior college"),
                                     (5, "bachelor"), (6, "master or above"))),
                Variable("car_access", "socioeconomics", CATEGORICAL,
                         categories=((0, "no car"), (1, "one car"), (2, "two cars"),
                                     (3, "three cars"), (4, "four cars"))),
                Variable("public_transit_station", "built_environment", NUMERIC,
                         unit="minutes on foot", minimum=0.0),
                Variable("parking_lot", "built_environment", NUMERIC,
                         unit="minutes on foot", minimum=0.0),
                Variable("hospital", "built_environment", NUMERIC,
                         unit="minutes on foot", minimum=0.0),
                Variable("shopping_mall", "built_environment", NUMERIC,
                         unit="minutes on foot", minimum=0.0),
                Variable("restaurant", "built_environment", NUMERIC,
                         unit="minutes on foot", minimum=0.0),
                Variable("commuting_time", "travel_characteristics", NUMERIC,
                         unit="minutes", minimum=0.0),
                Variable("commuting_mode", "travel_characteristics", CATEGORICAL,
                         categories=_MODE_CATEGORIES),
                Variable("trips_per_weekday", "travel_characteristics", NUMERIC,
                         unit="trips", minimum=0.0),
                Variable("past_commuting_time", "reference_points", NUMERIC,
                         unit="minutes", minimum=0.0),
                Variable("past_commuting_mode", "reference_points", CATEGORICAL,
                         categories=_MODE_CATEGORIES),
                Variable("peer_commuting_time", "reference_points", NUMERIC,
                         unit="minutes", minimum=0.0),
                Variable("peer_commuting_mode", "reference_points", CATEGORICAL,
                         categories=_MODE_CATEGORIES),
            )
        )
    return _DEFAULT


def dimension_title(dimension: str) -> str:
    """Human-readable dimension heading used in prompts and reports."""
    return dimension.replace("_", " ").capitalize()


def load_default_schema_resource() -> VariableSchema:
    """Load the schema JSON shipped with the package (same as default_schema)."""
    text = resources.files("travelsat").joinpath("resources/default_schema.json").read_text("utf-8")
    return schema_from_dict(json.loads(text))
