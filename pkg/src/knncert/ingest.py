"""File formats: schema JSON, dataset CSV, uncertain tables, formula files.

CSV conventions: the header carries the attribute names plus a required
``label`` column and optional ``weight``, ``rank`` and ``uncertain``
columns. Scalar cells are integers, fractions like ``1/2`` or decimals
(parsed exactly), anything else is a symbol. Uncertain tables additionally
allow or-set cells ``<a|b|c>`` and interval cells ``[lo,hi]``.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from typing import Optional, Sequence

from .dataset import LabeledDataset, Ordering, TestPoint, TupleRec
from .errors import InputError
from .fdschema import FdSchema
from .hardgen import Sat3R
from .models import CoddCell, OrSetCell

RESERVED = ("label", "weight", "rank", "uncertain")


def load_schema(path: str) -> FdSchema:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read schema {path}: {exc}") from None
    try:
        return FdSchema.of(raw["attributes"], [(fd["lhs"], fd["rhs"]) for fd in raw["fds"]])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed schema {path}: {exc}") from None


def parse_scalar(text: str):
    text = text.strip()
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        return text
    return int(value) if value.denominator == 1 else value


def parse_number(text: str) -> Fraction:
    value = parse_scalar(text)
    if isinstance(value, str):
        raise InputError(f"expected a number, got {text!r}")
    return Fraction(value)


def format_value(value) -> str:
    if isinstance(value, Fraction) and value.denominator != 1:
        return f"{value.numerator}/{value.denominator}"
    return str(value)


def parse_point(text: str, expected: int) -> TestPoint:
    parts = [p for p in text.split(",") if p.strip() != ""]
    if len(parts) != expected:
        raise InputError(f"test point needs {expected} coordinates, got {len(parts)}")
    return TestPoint(tuple(parse_number(p) for p in parts))


def _read_rows(path: str) -> tuple[list[str], list[dict]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise InputError(f"{path}: empty file")
            header = [h.strip() for h in reader.fieldnames]
            rows = list(reader)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if "label" not in header:
        raise InputError(f"{path}: missing required column 'label'")
    return header, rows


def _attributes(header: Sequence[str], schema: Optional[FdSchema]) -> tuple[str, ...]:
    plain = [h for h in header if h not in RESERVED]
    if schema is None:
        return tuple(plain)
    missing = set(schema.attributes) - set(plain)
    extra = set(plain) - set(schema.attributes)
    if missing or extra:
        raise InputError(
            f"columns do not match schema attributes (missing {sorted(missing)}, extra {sorted(extra)})"
        )
    return schema.attributes


def load_dataset(
    path: str,
    schema: Optional[FdSchema],
    features: Sequence[str],
) -> tuple[LabeledDataset, Optional[tuple[int, ...]], Optional[frozenset[int]]]:
    """Load a CSV into a dataset; returns (dataset, ranks, uncertain ids).

    ``ranks`` and ``uncertain`` are None when the respective column is
    absent; an all-zero uncertain column is an explicit empty marking, which
    is not the same thing. With ``schema`` None the attributes are taken
    from the header and the FD set is empty.
    """
    header, raw_rows = _read_rows(path)
    attrs = _attributes(header, schema)
    schema = schema or FdSchema.of(attrs, [])

    tuples = []
    ranks: list[int] = []
    uncertain = set()
    for i, row in enumerate(raw_rows):
        if any(row.get(a) is None for a in attrs) or row.get("label") is None:
            raise InputError(f"row {i}: missing cells")
        values = tuple(parse_scalar(row[a]) for a in attrs)
        label = row["label"].strip()
        if label == "":
            raise InputError(f"row {i}: empty label")
        weight = Fraction(1)
        if "weight" in header and (row.get("weight") or "").strip() != "":
            weight = parse_number(row["weight"])
            if weight <= 0:
                raise InputError(f"row {i}: weight must be positive")
        tuples.append(TupleRec(i, values, label, weight))
        if "rank" in header:
            try:
                ranks.append(int(row.get("rank") or ""))
            except ValueError:
                raise InputError(f"row {i}: rank must be an integer") from None
        if "uncertain" in header and (row.get("uncertain") or "").strip() in ("1", "true", "yes"):
            uncertain.add(i)

    dataset = LabeledDataset(
        schema,
        tuple(tuples),
        tuple(sorted({t.label for t in tuples})),
        tuple(features),
    )
    rank_order: Optional[tuple[int, ...]] = None
    if "rank" in header:
        if len(set(ranks)) != len(ranks):
            raise InputError("rank column must hold distinct integers")
        rank_order = tuple(tid for _, tid in sorted(zip(ranks, range(len(ranks)))))
    marked = frozenset(uncertain) if "uncertain" in header else None
    return dataset, rank_order, marked


def ordering_from_ranks(rank_order: Optional[tuple[int, ...]]) -> Ordering:
    if rank_order is None:
        raise InputError("explicit-order mode needs a 'rank' column")
    return Ordering(rank_order, source="explicit")


def parse_cell(text: str):
    """Scalar, or-set ``<a|b|c>``, or interval ``[lo,hi]``."""
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        parts = text[1:-1].split("|")
        return OrSetCell(tuple(parse_scalar(p) for p in parts))
    if text.startswith("[") and text.endswith("]"):
        parts = text[1:-1].split(",")
        if len(parts) != 2:
            raise InputError(f"interval cell needs two endpoints: {text!r}")
        return CoddCell(parse_number(parts[0]), parse_number(parts[1]))
    return parse_scalar(text)


def load_uncertain_table(path: str) -> tuple[tuple[str, ...], list[tuple]]:
    """Load rows whose cells may be or-sets or intervals: (attributes, rows)."""
    header, raw_rows = _read_rows(path)
    attrs = tuple(h for h in header if h not in RESERVED)
    rows = []
    for i, row in enumerate(raw_rows):
        if any(row.get(a) is None for a in attrs) or row.get("label") is None:
            raise InputError(f"row {i}: missing cells")
        cells = tuple(parse_cell(row[a]) for a in attrs)
        label = row["label"].strip()
        if label == "":
            raise InputError(f"row {i}: empty label")
        rows.append((cells, label))
    return attrs, rows


def write_dataset_csv(path: str, dataset: LabeledDataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.schema.attributes) + ["label"])
        for t in dataset.tuples:
            writer.writerow([format_value(v) for v in t.values] + [t.label])


def load_formula(path: str) -> Sat3R:
    """One clause per line of signed integers; ``c``/``p`` lines are skipped,
    a trailing 0 per line is ignored; variable count is the largest index."""
    clauses = []
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read formula {path}: {exc}") from None
    for line in lines:
        line = line.strip()
        if not line or line.startswith(("c", "p", "#")):
            continue
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError:
            raise InputError(f"bad formula line: {line!r}") from None
        if lits and lits[-1] == 0:
            lits = lits[:-1]
        clauses.append(tuple(lits))
    num_vars = max((abs(l) for clause in clauses for l in clause), default=0)
    return Sat3R(num_vars, tuple(clauses))


def write_formula(path: str, phi: Sat3R) -> None:
    with open(path, "w") as fh:
        for clause in phi.clauses:
            fh.write(" ".join(str(l) for l in clause) + " 0\n")
