"""Loading, validation, and normalization of DMU input/output data.

File formats:

* ``dataset.csv`` -- header ``dmu,x:<name>,...,y:<name>,...``; one row per
  DMU; UTF-8, comma separated, ``.`` decimal point.  Input/output columns
  are identified by the ``x:`` / ``y:`` header prefix, not by position.
* ``groups.csv``  -- header ``dmu,group``; group ids are positive integers
  covering 1..H with no gaps.
* ``matrix.csv``  -- first row and first column are DMU names; cell (d, j)
  is evaluator d's score of target j.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COLUMN_SUM_TOL = 1e-12
SCORE_UPPER_TOL = 1e-9


class DataError(ValueError):
    """Base class for data ingestion problems."""


class ParseError(DataError):
    """A cell or row could not be parsed (malformed, NaN, or negative)."""


class ValidationError(DataError):
    """Structurally valid file with inconsistent content."""


@dataclass(eq=False)
class Dataset:
    """Named DMUs with raw and column-normalized input/output matrices."""

    names: list[str]
    input_names: list[str]
    output_names: list[str]
    raw_inputs: np.ndarray    # n x m, nonnegative
    raw_outputs: np.ndarray   # n x s, nonnegative
    norm_inputs: np.ndarray = field(init=False)
    norm_outputs: np.ndarray = field(init=False)

    def __post_init__(self):
        self.raw_inputs = np.asarray(self.raw_inputs, dtype=float)
        self.raw_outputs = np.asarray(self.raw_outputs, dtype=float)
        _validate_dataset(self)
        self.norm_inputs, self.norm_outputs = normalize(self.raw_inputs, self.raw_outputs)
        if not (self.norm_inputs.max(axis=1) > 0).all():
            bad = self.names[int(np.argmin(self.norm_inputs.max(axis=1)))]
            raise ValidationError(f"DMU {bad!r} has no strictly positive input")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def m(self) -> int:
        return self.raw_inputs.shape[1]

    @property
    def s(self) -> int:
        return self.raw_outputs.shape[1]

    def features(self) -> np.ndarray:
        """Per-DMU feature vectors: normalized inputs then outputs."""
        return np.hstack([self.norm_inputs, self.norm_outputs])


@dataclass(eq=False)
class GroupAssignment:
    """Partition of DMU indices into ally groups labelled 1..H."""

    groups: np.ndarray  # index -> group id
    H: int

    def __post_init__(self):
        self.groups = np.asarray(self.groups, dtype=int)
        used = set(self.groups.tolist())
        if self.H < 1 or used != set(range(1, self.H + 1)):
            raise ValidationError(
                f"group ids must cover 1..{self.H} exactly, got {sorted(used)}"
            )

    @classmethod
    def single_group(cls, n: int) -> "GroupAssignment":
        return cls(groups=np.ones(n, dtype=int), H=1)

    def allies(self, d: int) -> np.ndarray:
        """Boolean mask over DMUs in the same group as d (including d)."""
        return self.groups == self.groups[d]


@dataclass(eq=False)
class CrossEfficiencyMatrix:
    """Square peer-appraisal matrix; rows are evaluators, columns targets."""

    names: list[str]
    values: np.ndarray  # n x n, entries in [0, 1]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.names)
        if self.values.shape != (n, n):
            raise ValidationError(
                f"matrix shape {self.values.shape} does not match {n} names"
            )
        if not np.isfinite(self.values).all():
            raise ParseError("matrix contains non-finite entries")
        if self.values.min() < 0 or self.values.max() > 1 + SCORE_UPPER_TOL:
            raise ValidationError("matrix entries must lie in [0, 1]")

    @property
    def n(self) -> int:
        return len(self.names)

    def diagonal(self) -> np.ndarray:
        return np.diag(self.values).copy()


def normalize(raw_inputs, raw_outputs):
    """Divide every feature column by its sum across DMUs.

    Column sums must be strictly positive; each normalized column sums to 1.
    """
    raw_inputs = np.asarray(raw_inputs, dtype=float)
    raw_outputs = np.asarray(raw_outputs, dtype=float)
    for label, mat in (("input", raw_inputs), ("output", raw_outputs)):
        sums = mat.sum(axis=0)
        if (sums <= 0).any():
            raise ValidationError(f"{label} column {int(np.argmin(sums))} has zero sum")
    return raw_inputs / raw_inputs.sum(axis=0), raw_outputs / raw_outputs.sum(axis=0)


def _validate_dataset(ds: Dataset) -> None:
    n = len(ds.names)
    if n < 1:
        raise ValidationError("dataset needs at least one DMU")
    if len(set(ds.names)) != n:
        dupes = sorted({x for x in ds.names if ds.names.count(x) > 1})
        raise ValidationError(f"duplicate DMU names: {dupes}")
    if ds.raw_inputs.ndim != 2 or ds.raw_outputs.ndim != 2:
        raise ValidationError("input/output data must be 2-dimensional")
    if ds.raw_inputs.shape[0] != n or ds.raw_outputs.shape[0] != n:
        raise ValidationError("row count does not match number of DMU names")
    if ds.raw_inputs.shape[1] < 1 or ds.raw_outputs.shape[1] < 1:
        raise ValidationError("need at least one input and one output column")
    if len(ds.input_names) != ds.raw_inputs.shape[1]:
        raise ValidationError("input name count does not match input columns")
    if len(ds.output_names) != ds.raw_outputs.shape[1]:
        raise ValidationError("output name count does not match output columns")
    for label, mat in (("input", ds.raw_inputs), ("output", ds.raw_outputs)):
        if not np.isfinite(mat).all():
            raise ParseError(f"non-finite {label} value")
        if (mat < 0).any():
            raise ParseError(f"negative {label} value")


def _parse_cell(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"malformed number {text!r} at {where}") from None
    if math.isnan(value) or math.isinf(value):
        raise ParseError(f"non-finite value {text!r} at {where}")
    if value < 0:
        raise ParseError(f"negative value {text!r} at {where}")
    return value


def _open_source(source):
    """Accept a path or an open text stream; return (stream, should_close)."""
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    return source, False


def load_dataset(source) -> Dataset:
    """Read a ``dataset.csv`` stream and return a normalized Dataset."""
    stream, close = _open_source(source)
    try:
        rows = list(csv.reader(stream))
    finally:
        if close:
            stream.close()
    if not rows:
        raise ParseError("empty dataset file")
    header = [h.strip() for h in rows[0]]
    if header.count("dmu") != 1:
        raise ParseError("header must contain exactly one 'dmu' column")
    id_col = header.index("dmu")
    in_cols = [(i, h[2:]) for i, h in enumerate(header) if h.startswith("x:")]
    out_cols = [(i, h[2:]) for i, h in enumerate(header) if h.startswith("y:")]
    known = {id_col} | {i for i, _ in in_cols} | {i for i, _ in out_cols}
    unknown = [header[i] for i in range(len(header)) if i not in known]
    if unknown:
        raise ParseError(f"unrecognized columns {unknown}; use 'x:'/'y:' prefixes")
    if not in_cols or not out_cols:
        raise ParseError("need at least one 'x:' and one 'y:' column")

    names, xs, ys = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        names.append(row[id_col].strip())
        xs.append([_parse_cell(row[i], f"line {lineno}, column {header[i]!r}") for i, _ in in_cols])
        ys.append([_parse_cell(row[i], f"line {lineno}, column {header[i]!r}") for i, _ in out_cols])
    return Dataset(
        names=names,
        input_names=[name for _, name in in_cols],
        output_names=[name for _, name in out_cols],
        raw_inputs=np.array(xs, dtype=float),
        raw_outputs=np.array(ys, dtype=float),
    )


def write_dataset(ds: Dataset, dest) -> None:
    """Write a Dataset as ``dataset.csv``; raw values round-trip bit-exactly."""
    stream, close = _dest_stream(dest)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["dmu"] + [f"x:{c}" for c in ds.input_names] + [f"y:{c}" for c in ds.output_names])
        for i, name in enumerate(ds.names):
            writer.writerow(
                [name]
                + [repr(v) for v in ds.raw_inputs[i].tolist()]
                + [repr(v) for v in ds.raw_outputs[i].tolist()]
            )
    finally:
        if close:
            stream.close()


def load_groups(source, names: list[str]) -> GroupAssignment:
    """Read a ``groups.csv`` stream for the given DMU names."""
    stream, close = _open_source(source)
    try:
        rows = list(csv.reader(stream))
    finally:
        if close:
            stream.close()
    if not rows or [h.strip() for h in rows[0]] != ["dmu", "group"]:
        raise ParseError("groups file must have header 'dmu,group'")
    seen: dict[str, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ParseError(f"line {lineno}: expected 2 fields")
        name = row[0].strip()
        try:
            gid = int(row[1])
        except ValueError:
            raise ParseError(f"line {lineno}: group id {row[1]!r} is not an integer") from None
        if gid < 1:
            raise ValidationError(f"line {lineno}: group ids must be positive")
        if name in seen:
            raise ValidationError(f"duplicate group row for DMU {name!r}")
        seen[name] = gid
    missing = [nm for nm in names if nm not in seen]
    extra = [nm for nm in seen if nm not in names]
    if missing or extra:
        raise ValidationError(f"groups do not cover the dataset (missing {missing}, extra {extra})")
    labels = np.array([seen[nm] for nm in names], dtype=int)
    return GroupAssignment(groups=labels, H=int(labels.max()))


def write_groups(assignment: GroupAssignment, names: list[str], dest) -> None:
    stream, close = _dest_stream(dest)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["dmu", "group"])
        for name, gid in zip(names, assignment.groups.tolist()):
            writer.writerow([name, gid])
    finally:
        if close:
            stream.close()


def load_matrix(source) -> CrossEfficiencyMatrix:
    """Read a ``matrix.csv`` stream into a CrossEfficiencyMatrix."""
    stream, close = _open_source(source)
    try:
        rows = list(csv.reader(stream))
    finally:
        if close:
            stream.close()
    rows = [row for row in rows if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError("empty matrix file")
    header = [h.strip() for h in rows[0]]
    names = header[1:]
    n = len(names)
    if n == 0 or len(rows) - 1 != n:
        raise ValidationError(f"matrix is not square: {len(rows) - 1} rows, {n} columns")
    values = np.empty((n, n), dtype=float)
    for d, row in enumerate(rows[1:]):
        if len(row) != n + 1:
            raise ValidationError(f"matrix is not square: row {d + 1} has {len(row) - 1} cells")
        if row[0].strip() != names[d]:
            raise ValidationError(
                f"row name {row[0].strip()!r} does not match column name {names[d]!r}"
            )
        for j in range(n):
            v = _parse_cell(row[j + 1], f"matrix cell ({names[d]}, {names[j]})")
            if v > 1 + SCORE_UPPER_TOL:
                raise ValidationError(f"score {v} out of range at ({names[d]}, {names[j]})")
            values[d, j] = v
    return CrossEfficiencyMatrix(names=names, values=values)


def write_matrix(matrix: CrossEfficiencyMatrix, dest, decimals: int | None = None) -> None:
    """Write ``matrix.csv``; full float precision unless ``decimals`` is given."""
    stream, close = _dest_stream(dest)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["dmu"] + matrix.names)
        for d, name in enumerate(matrix.names):
            row = matrix.values[d].tolist()
            if decimals is None:
                cells = [repr(v) for v in row]
            else:
                cells = [f"{v:.{decimals}f}" for v in row]
            writer.writerow([name] + cells)
    finally:
        if close:
            stream.close()


def _dest_stream(dest):
    if isinstance(dest, (str, Path)):
        return open(dest, "w", encoding="utf-8", newline=""), True
    return dest, False
