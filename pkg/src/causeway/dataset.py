"""Column-named numeric data with tiers and a provenance trail, plus ingestion."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ValidationError

DEFAULT_KEY_PATTERNS = (r"(^|[^a-z])(id|key|uuid|serial|index|idx)([^a-z]|$)",)


@dataclass
class Provenance:
    source: str | None = None
    columns: dict[str, str] = field(default_factory=dict)  # name -> "kept" | "dropped: <reason>"
    steps: list[str] = field(default_factory=list)
    membership: dict[str, list[str]] | None = None  # medoid -> cluster members

    def copy(self) -> "Provenance":
        members = None if self.membership is None else {k: list(v) for k, v in self.membership.items()}
        return Provenance(self.source, dict(self.columns), list(self.steps), members)

    def to_dict(self) -> dict:
        return {"source": self.source, "columns": self.columns, "steps": self.steps,
                "membership": self.membership}


@dataclass
class Dataset:
    """An ``n x d`` float matrix with column names and optional tier ranks."""

    columns: tuple[str, ...]
    values: np.ndarray
    tiers: dict[str, int] | None = None
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        self.columns = tuple(str(c) for c in self.columns)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValidationError("dataset values must be a 2-D matrix")
        if self.values.shape[1] != len(self.columns):
            raise ValidationError(
                f"{len(self.columns)} column names for {self.values.shape[1]} columns")
        dupes = sorted({c for c in self.columns if self.columns.count(c) > 1})
        if dupes:
            raise ValidationError(f"duplicated column names: {dupes}")
        if self.tiers is not None:
            unknown = sorted(set(self.tiers) - set(self.columns))
            if unknown:
                raise ValidationError(f"tiers given for unknown columns: {unknown}")
            self.tiers = {k: int(v) for k, v in self.tiers.items()}

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def index(self, name: str) -> int:
        return self.columns.index(name)

    def select(self, indices) -> "Dataset":
        indices = list(indices)
        cols = [self.columns[i] for i in indices]
        tiers = None if self.tiers is None else {c: self.tiers[c] for c in cols if c in self.tiers}
        return Dataset(cols, self.values[:, indices], tiers, self.provenance.copy())

    def knowledge(self):
        """Tier map as :class:`~causeway.pc.PriorKnowledge` over column indices."""
        from .pc import PriorKnowledge

        return PriorKnowledge.from_names(self.tiers or {}, self.columns)

    def standardized(self) -> "Dataset":
        mean = self.values.mean(axis=0)
        sd = self.values.std(axis=0, ddof=1)
        if np.any(sd == 0):
            raise ValidationError("cannot standardize a constant column")
        out = Dataset(self.columns, (self.values - mean) / sd, self.tiers, self.provenance.copy())
        out.provenance.steps.append("standardized to mean 0, variance 1")
        return out

    def to_csv(self, path=None, delimiter: str = ",") -> str:
        """Write a header plus rows using shortest round-trip float repr."""
        buf = io.StringIO()
        buf.write(delimiter.join(self.columns) + "\n")
        for row in self.values:
            buf.write(delimiter.join(repr(float(v)) for v in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _parse_float(s: str):
    try:
        v = float(s)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def read_table(path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input file")
    delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip() for h in next(reader)]
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", row=lineno)
        rows.append([c.strip() for c in row])
    return header, rows


def ingest(path, *, key_patterns=DEFAULT_KEY_PATTERNS, standardize: bool = True,
           tiers: dict[str, int] | None = None) -> Dataset:
    """Load a delimited file, drop key-like and constant columns, standardize.

    A column is treated as a unique key when every value is distinct and it
    is either non-numeric, integer-valued, or its name matches one of
    ``key_patterns`` (case-insensitive). All-distinct real-valued
    measurements are kept. Every column ends up in the provenance record.

    Raises
    ------
    ParseError
        On a non-numeric cell in a column that is not a key.
    ValidationError
        If nothing is left after filtering.
    """
    header, rows = read_table(path)
    if len(set(header)) != len(header):
        raise ParseError("duplicated column names in header")
    patterns = [re.compile(p, re.IGNORECASE) for p in key_patterns]
    prov = Provenance(source=str(path))
    kept_names, kept_cols = [], []
    n = len(rows)
    for k, name in enumerate(header):
        raw = [r[k] for r in rows]
        parsed = [_parse_float(s) for s in raw]
        distinct = n > 1 and len(set(raw)) == n
        numeric = all(v is not None for v in parsed)
        if not numeric:
            if distinct and all(v is None for v in parsed):
                prov.columns[name] = "dropped: unique key"
                continue
            bad = next(i for i, v in enumerate(parsed) if v is None)
            raise ParseError(f"cannot parse {raw[bad]!r} as a number", row=bad + 2, column=name)
        col = np.array(parsed, dtype=float)
        if distinct and len(set(parsed)) == n and (
                np.all(col == np.round(col)) or any(p.search(name) for p in patterns)):
            prov.columns[name] = "dropped: unique key"
            continue
        if n == 0 or np.all(col == col[0]):
            prov.columns[name] = "dropped: zero variance"
            continue
        prov.columns[name] = "kept"
        kept_names.append(name)
        kept_cols.append(col)
    if not kept_names:
        raise ValidationError("no columns left after dropping keys and constant columns")
    if n < 2:
        raise ValidationError("need at least two data rows")
    prov.steps.append(f"read {n} rows x {len(header)} columns")
    dropped = [c for c, s in prov.columns.items() if s != "kept"]
    if dropped:
        prov.steps.append(f"dropped {len(dropped)} columns")
    if tiers is not None:
        tiers = {c: t for c, t in tiers.items() if c in kept_names}
    ds = Dataset(kept_names, np.column_stack(kept_cols), tiers, prov)
    return ds.standardized() if standardize else ds


def read_tiers(path) -> dict[str, int]:
    """Two-column TSV ``column-name<TAB>tier-rank``; ``#`` starts a comment."""
    tiers = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected two tab-separated fields", row=lineno)
        try:
            rank = int(parts[1])
        except ValueError:
            raise ParseError(f"tier rank {parts[1]!r} is not an integer", row=lineno) from None
        if rank < 0:
            raise ParseError("tier rank must be non-negative", row=lineno)
        tiers[parts[0].strip()] = rank
    return tiers


def write_tiers(tiers: dict[str, int], path) -> None:
    Path(path).write_text("".join(f"{k}\t{v}\n" for k, v in tiers.items()))
