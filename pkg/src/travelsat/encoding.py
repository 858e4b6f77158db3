"""Feature encoding: z-scored numerics plus one-hot categoricals.

The encoding is fitted once on the full dataset and then applied to any
subset, so train and query records share one feature space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset, RespondentRecord
from .errors import EncodingError
from .schema import CATEGORICAL, NUMERIC, VariableSchema


@dataclass(frozen=True)
class ColumnGroup:
    """Columns produced by one schema variable."""

    variable: str
    kind: str
    start: int
    width: int
    mean: float = 0.0
    std: float = 1.0
    # numeric column with zero variance in the fitted data; encodes to 0
    constant: bool = False
    codes: tuple[int, ...] = ()


@dataclass(frozen=True)
class EncodingSpec:
    schema: VariableSchema
    groups: tuple[ColumnGroup, ...]
    width: int

    def group(self, variable: str) -> ColumnGroup:
        for g in self.groups:
            if g.variable == variable:
                return g
        raise EncodingError(f"no encoded variable named {variable!r}")

    @property
    def constant_variables(self) -> tuple[str, ...]:
        return tuple(g.variable for g in self.groups if g.constant)

    def column_names(self) -> list[str]:
        """One name per encoded column, e.g. 'income', 'commuting_mode=subway'."""
        names = []
        for g in self.groups:
            if g.kind == NUMERIC:
                names.append(g.variable)
            else:
                var = self.schema.variable(g.variable)
                names.extend(f"{g.variable}={var.label_for(c)}" for c in g.codes)
        return names

    def column_variables(self) -> list[str]:
        """Parent schema variable of each encoded column."""
        parents = []
        for g in self.groups:
            parents.extend([g.variable] * g.width)
        return parents


def fit_encoding(dataset: Dataset, schema: VariableSchema | None = None) -> EncodingSpec:
    """Fit per-variable encoding parameters on the full dataset.

    Numerics get (mean, sample std); a zero-variance numeric is flagged
    constant and later encodes to 0. Categoricals get one indicator column
    per schema code.
    """
    schema = schema or dataset.schema
    groups = []
    start = 0
    for var in schema.predictors:
        if var.kind == NUMERIC:
            column = dataset.column(var.name)
            mean = float(np.mean(column))
            std = float(np.std(column, ddof=1)) if len(column) > 1 else 0.0
            constant = std == 0.0
            groups.append(ColumnGroup(variable=var.name, kind=NUMERIC, start=start,
                                      width=1, mean=mean,
                                      std=std if not constant else 1.0,
                                      constant=constant))
            start += 1
        else:
            codes = var.codes
            groups.append(ColumnGroup(variable=var.name, kind=CATEGORICAL,
                                      start=start, width=len(codes), codes=codes))
            start += len(codes)
    return EncodingSpec(schema=schema, groups=tuple(groups), width=start)


def encode(record: RespondentRecord, spec: EncodingSpec) -> np.ndarray:
    """Encode one record into the fitted feature space."""
    out = np.zeros(spec.width)
    for g in spec.groups:
        value = record.values[g.variable]
        if g.kind == NUMERIC:
            out[g.start] = 0.0 if g.constant else (value - g.mean) / g.std
        else:
            code = int(value)
            try:
                offset = g.codes.index(code)
            except ValueError:
                raise EncodingError(
                    f"{g.variable}: code {code} not in fitted codes {g.codes}"
                ) from None
            out[g.start + offset] = 1.0
    return out


def encode_matrix(records: Dataset | Sequence[RespondentRecord], spec: EncodingSpec) -> np.ndarray:
    return np.vstack([encode(r, spec) for r in records])


def design_matrix(
    records: Dataset | Sequence[RespondentRecord],
    spec: EncodingSpec,
    drop_first: bool = True,
) -> tuple[np.ndarray, list[str], list[str]]:
    """Regression design: encoded columns, optionally dropping each
    categorical's first (reference) indicator so an intercept fits cleanly.

    Returns (matrix, column names, parent variable per column), without an
    intercept column.
    """
    full = encode_matrix(records, spec)
    names = spec.column_names()
    parents = spec.column_variables()
    if not drop_first:
        return full, names, parents
    keep = []
    for g in spec.groups:
        cols = range(g.start, g.start + g.width)
        if g.kind == CATEGORICAL:
            cols = list(cols)[1:]
        keep.extend(cols)
    return full[:, keep], [names[i] for i in keep], [parents[i] for i in keep]
