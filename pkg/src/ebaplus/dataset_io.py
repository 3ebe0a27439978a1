"""Loading and preprocessing of project datasets.

A dataset is a CSV file with a header row plus a JSON sidecar schema::

    {"effort": "Effort", "id": "Project", "numeric": ["Size"], "categorical": ["Lang"]}

Attribute order follows the CSV header, and row order defines project order
everywhere downstream (tie-breaking depends on it).
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

MISSING_TOKENS = frozenset({"", "NA", "?"})


class DatasetError(ValueError):
    """Base class for dataset loading and validation failures."""


class SchemaError(DatasetError):
    pass


class ParseError(DatasetError):
    pass


class ValidationError(DatasetError):
    pass


class EmptyDatasetError(DatasetError):
    pass


class AttributeKindError(DatasetError):
    pass


class AttributeKind(enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Schema:
    effort_column: str
    attributes: tuple[tuple[str, AttributeKind], ...]
    id_column: str | None = None

    def __post_init__(self):
        names = [name for name, _ in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate attribute names in schema: {names}")
        if self.effort_column in names:
            raise SchemaError(
                f"effort column {self.effort_column!r} is listed as an attribute"
            )
        if self.id_column is not None and self.id_column in names:
            raise SchemaError(f"id column {self.id_column!r} is listed as an attribute")

    @classmethod
    def from_dict(cls, raw: Mapping) -> "Schema":
        if "effort" not in raw:
            raise SchemaError("schema is missing the 'effort' key")
        numeric = list(raw.get("numeric") or [])
        categorical = list(raw.get("categorical") or [])
        attrs = [(n, AttributeKind.NUMERIC) for n in numeric]
        attrs += [(n, AttributeKind.CATEGORICAL) for n in categorical]
        return cls(
            effort_column=raw["effort"],
            attributes=tuple(attrs),
            id_column=raw.get("id"),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "Schema":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise SchemaError(f"schema {path} must be a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "effort": self.effort_column,
            "id": self.id_column,
            "numeric": [n for n, k in self.attributes if k is AttributeKind.NUMERIC],
            "categorical": [
                n for n, k in self.attributes if k is AttributeKind.CATEGORICAL
            ],
        }

    @property
    def kinds(self) -> dict[str, AttributeKind]:
        return dict(self.attributes)


@dataclass(frozen=True)
class Dataset:
    """Projects x typed attributes plus a positive effort vector.

    Numeric columns are float arrays (NaN marks a missing cell), categorical
    columns are object arrays of string labels (``None`` marks a missing
    cell). ``effort`` uses NaN for missing values.
    """

    project_ids: tuple[str, ...]
    columns: Mapping[str, np.ndarray]
    kinds: Mapping[str, AttributeKind]
    effort: np.ndarray
    effort_name: str = "Effort"
    source_hash: str | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.project_ids)
        if set(self.columns) != set(self.kinds):
            raise SchemaError("columns and kinds must name the same attributes")
        for name, col in self.columns.items():
            if len(col) != n:
                raise ValidationError(
                    f"column {name!r} has {len(col)} values, expected {n}"
                )
        if len(self.effort) != n:
            raise ValidationError(f"effort has {len(self.effort)} values, expected {n}")
        eff = np.asarray(self.effort, dtype=float)
        present = ~np.isnan(eff)
        if np.any(eff[present] <= 0):
            bad = [self.project_ids[i] for i in np.flatnonzero(present & (eff <= 0))]
            raise ValidationError(f"effort must be strictly positive; offending projects: {bad}")

    @property
    def n(self) -> int:
        return len(self.project_ids)

    @property
    def attribute_names(self) -> list[str]:
        return list(self.columns)

    def missing_mask(self) -> np.ndarray:
        """Boolean (n, m + 1) mask of missing cells, effort last."""
        cols = [_missing(self.columns[a], self.kinds[a]) for a in self.columns]
        cols.append(np.isnan(np.asarray(self.effort, dtype=float)))
        return np.column_stack(cols) if cols else np.zeros((self.n, 0), bool)

    @property
    def n_missing(self) -> int:
        return int(self.missing_mask().sum())

    def subset(self, index: Sequence[int] | np.ndarray) -> "Dataset":
        """Rows at ``index`` in that order; repeated indices are allowed."""
        idx = np.asarray(index, dtype=np.intp)
        return Dataset(
            project_ids=tuple(self.project_ids[i] for i in idx),
            columns={k: v[idx] for k, v in self.columns.items()},
            kinds=dict(self.kinds),
            effort=np.asarray(self.effort)[idx],
            effort_name=self.effort_name,
        )

    def select(self, attrs: Sequence[str]) -> "Dataset":
        """Keep only ``attrs``, in dataset column order."""
        missing = [a for a in attrs if a not in self.columns]
        if missing:
            raise SchemaError(f"unknown attributes: {missing}")
        keep = [a for a in self.columns if a in set(attrs)]
        return Dataset(
            project_ids=self.project_ids,
            columns={a: self.columns[a] for a in keep},
            kinds={a: self.kinds[a] for a in keep},
            effort=self.effort,
            effort_name=self.effort_name,
        )

    def drop_ids(self, ids: Sequence[str]) -> "Dataset":
        drop = set(ids)
        return self.subset([i for i, p in enumerate(self.project_ids) if p not in drop])

    def row(self, i: int) -> dict:
        return {a: self.columns[a][i] for a in self.columns}


def _missing(col: np.ndarray, kind: AttributeKind) -> np.ndarray:
    if kind is AttributeKind.NUMERIC:
        return np.isnan(col.astype(float))
    return np.array([v is None for v in col], dtype=bool)


def _parse_numeric(token: str, row: int, column: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(
            f"non-numeric value {token!r} in numeric column {column!r} at row {row}"
        ) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {token!r} in column {column!r} at row {row}")
    return value


def load_dataset(csv_path: str | Path, schema: Schema) -> Dataset:
    """Read ``csv_path`` and type its columns per ``schema``.

    Missing cells ("", "NA", "?") are kept as flagged missing values; call
    :func:`drop_missing` to remove incomplete projects.
    """
    raw = Path(csv_path).read_bytes()
    text = raw.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError(f"{csv_path} is empty (no header row)") from None
    rows = [r for r in reader if r and any(c.strip() for c in r)]

    needed = [schema.effort_column] + [a for a, _ in schema.attributes]
    if schema.id_column is not None:
        needed.append(schema.id_column)
    absent = [c for c in needed if c not in header]
    if absent:
        raise SchemaError(f"columns missing from {csv_path}: {absent}")
    pos = {name: header.index(name) for name in needed}

    for lineno, r in enumerate(rows, start=2):
        if len(r) != len(header):
            raise ParseError(
                f"row {lineno} has {len(r)} fields, header has {len(header)}"
            )

    kinds = schema.kinds
    # attribute order follows the CSV header
    ordered = sorted(kinds, key=lambda a: pos[a])
    columns: dict[str, np.ndarray] = {}
    for name in ordered:
        j = pos[name]
        if kinds[name] is AttributeKind.NUMERIC:
            vals = [
                np.nan if r[j].strip() in MISSING_TOKENS else _parse_numeric(r[j].strip(), ln, name)
                for ln, r in enumerate(rows, start=2)
            ]
            columns[name] = np.array(vals, dtype=float)
        else:
            vals = [None if r[j].strip() in MISSING_TOKENS else r[j].strip() for r in rows]
            columns[name] = np.array(vals, dtype=object)

    je = pos[schema.effort_column]
    effort = np.array(
        [
            np.nan if r[je].strip() in MISSING_TOKENS
            else _parse_numeric(r[je].strip(), ln, schema.effort_column)
            for ln, r in enumerate(rows, start=2)
        ],
        dtype=float,
    )

    if schema.id_column is not None:
        ids = tuple(r[pos[schema.id_column]].strip() for r in rows)
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate project ids in column {schema.id_column!r}")
    else:
        ids = tuple(f"P{i}" for i in range(1, len(rows) + 1))

    return Dataset(
        project_ids=ids,
        columns=columns,
        kinds={a: kinds[a] for a in ordered},
        effort=effort,
        effort_name=schema.effort_column,
        source_hash=hashlib.sha256(raw).hexdigest(),
    )


def drop_missing(d: Dataset) -> tuple[Dataset, list[str]]:
    """Listwise deletion of projects with any missing cell."""
    incomplete = d.missing_mask().any(axis=1)
    removed = [p for p, bad in zip(d.project_ids, incomplete) if bad]
    if not removed:
        return d, []
    if incomplete.all():
        raise EmptyDatasetError("every project has a missing value")
    out = d.subset(np.flatnonzero(~incomplete))
    return out, removed


def column_range(d: Dataset, attr: str) -> tuple[float, float]:
    if attr not in d.kinds:
        raise SchemaError(f"unknown attribute {attr!r}")
    if d.kinds[attr] is not AttributeKind.NUMERIC:
        raise AttributeKindError(f"attribute {attr!r} is categorical; it has no range")
    col = np.asarray(d.columns[attr], dtype=float)
    return float(np.nanmin(col)), float(np.nanmax(col))


def write_dataset(d: Dataset, path: str | Path, id_column: str = "id") -> None:
    """Serialize ``d`` as CSV (id column, attributes, effort)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([id_column, *d.columns, d.effort_name])
        for i, pid in enumerate(d.project_ids):
            cells = []
            for a, col in d.columns.items():
                v = col[i]
                if d.kinds[a] is AttributeKind.NUMERIC:
                    cells.append("NA" if np.isnan(v) else repr(float(v)))
                else:
                    cells.append("NA" if v is None else v)
            e = d.effort[i]
            w.writerow([pid, *cells, "NA" if np.isnan(e) else repr(float(e))])


def dataset_schema(d: Dataset, id_column: str = "id") -> Schema:
    """Schema matching the layout written by :func:`write_dataset`."""
    return Schema(
        effort_column=d.effort_name,
        attributes=tuple((a, d.kinds[a]) for a in d.columns),
        id_column=id_column,
    )
