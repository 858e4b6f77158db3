"""Survey dataset loading, label computation, and splitting."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import DatasetError, RowError, SchemaError
from .schema import CATEGORICAL, NUMERIC, Variable, VariableSchema, default_schema

SATISFACTION_ITEM_COUNT = 9
SATISFACTION_MIN = 1.0
SATISFACTION_MAX = 7.0


def compute_satisfaction(items: Sequence[float]) -> float:
    """Average the nine satisfaction-scale items (each rated 1 to 7)."""
    if len(items) != SATISFACTION_ITEM_COUNT:
        raise DatasetError(
            f"expected {SATISFACTION_ITEM_COUNT} satisfaction items, got {len(items)}"
        )
    for item in items:
        if not SATISFACTION_MIN <= item <= SATISFACTION_MAX:
            raise DatasetError(f"satisfaction item {item} outside [1, 7]")
    return float(sum(items)) / SATISFACTION_ITEM_COUNT


@dataclass(frozen=True)
class RespondentRecord:
    """One survey respondent: predictor values plus the satisfaction label."""

    record_id: str
    values: Mapping[str, float]
    satisfaction: float


@dataclass(frozen=True)
class Dataset:
    schema: VariableSchema
    records: tuple[RespondentRecord, ...]
    # rows dropped at load time because a value was missing
    dropped: int = 0

    def __post_init__(self):
        if not self.records:
            raise DatasetError("dataset has no records")
        ids = [r.record_id for r in self.records]
        if len(set(ids)) != len(ids):
            raise DatasetError("duplicate record ids in dataset")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[RespondentRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> RespondentRecord:
        return self.records[index]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.record_id for r in self.records)

    def labels(self) -> np.ndarray:
        return np.array([r.satisfaction for r in self.records], dtype=float)

    def column(self, name: str) -> np.ndarray:
        self.schema.variable(name)
        return np.array([r.values[name] for r in self.records], dtype=float)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        records = tuple(self.records[i] for i in indices)
        return Dataset(schema=self.schema, records=records)


def parse_value(variable: Variable, raw: str | float) -> float:
    """Parse and validate one cell for `variable`. Raises ValueError on bad input."""
    if isinstance(raw, str):
        raw = raw.strip()
        if raw == "":
            raise ValueError("empty")
        try:
            value = float(raw)
        except ValueError:
            raise ValueError(f"{variable.name}: not a number: {raw!r}") from None
    else:
        value = float(raw)
    if variable.kind == CATEGORICAL:
        code = int(value)
        if code != value or code not in variable.codes:
            raise ValueError(f"{variable.name}: {raw!r} is not one of codes {variable.codes}")
        return float(code)
    if variable.minimum is not None:
        if variable.exclusive_minimum and value <= variable.minimum:
            raise ValueError(f"{variable.name}: {value} must be > {variable.minimum}")
        if not variable.exclusive_minimum and value < variable.minimum:
            raise ValueError(f"{variable.name}: {value} must be >= {variable.minimum}")
    if variable.maximum is not None and value > variable.maximum:
        raise ValueError(f"{variable.name}: {value} must be <= {variable.maximum}")
    return value


def _is_missing(cell: str | None) -> bool:
    return cell is None or cell.strip() == ""


def load_survey(path, schema: VariableSchema | None = None) -> Dataset:
    """Load a survey CSV into a Dataset.

    The file needs a header with one snake_case column per schema variable and
    the label column; an optional record_id column carries stable ids. Rows
    with missing values are dropped (counted in Dataset.dropped); rows with
    unparseable or out-of-range values raise RowError with the row index.
    """
    schema = schema or default_schema()
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"{path}: cannot read survey: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty file")
        columns = set(reader.fieldnames)
        needed = set(schema.names) | {schema.label.name}
        missing = sorted(needed - columns)
        if missing:
            raise SchemaError(f"{path}: missing columns: {', '.join(missing)}")
        has_id = "record_id" in columns

        records = []
        dropped = 0
        for row_index, row in enumerate(reader, start=1):
            cells = {name: row.get(name) for name in needed}
            if any(_is_missing(cell) for cell in cells.values()):
                dropped += 1
                continue
            values = {}
            try:
                for name in schema.names:
                    values[name] = parse_value(schema.variable(name), row[name])
                satisfaction = parse_value(schema.label, row[schema.label.name])
            except ValueError as exc:
                raise RowError(row_index, str(exc)) from exc
            record_id = row["record_id"].strip() if has_id and not _is_missing(row.get("record_id")) else f"r{row_index:04d}"
            records.append(RespondentRecord(record_id=record_id, values=values,
                                            satisfaction=satisfaction))
    if not records:
        raise DatasetError(f"{path}: no complete rows")
    return Dataset(schema=schema, records=tuple(records), dropped=dropped)


def save_survey(dataset: Dataset, path) -> None:
    """Write a Dataset back to CSV in the layout load_survey reads."""
    schema = dataset.schema
    fieldnames = ["record_id", *schema.names, schema.label.name]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for record in dataset:
            row = [record.record_id]
            for name in schema.names:
                value = record.values[name]
                if schema.variable(name).kind == CATEGORICAL:
                    row.append(str(int(value)))
                else:
                    row.append(repr(float(value)))
            row.append(repr(float(record.satisfaction)))
            writer.writerow(row)


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Random disjoint train/test split; size of train = round(fraction * n)."""
    n = len(dataset)
    n_train = int(round(train_fraction * n))
    if n_train <= 0 or n_train >= n:
        raise DatasetError(
            f"train_fraction {train_fraction} leaves an empty side for n={n}"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    train_idx = sorted(int(i) for i in order[:n_train])
    test_idx = sorted(int(i) for i in order[n_train:])
    return dataset.subset(train_idx), dataset.subset(test_idx)
