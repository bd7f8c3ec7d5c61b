"""Labeled training points over an FD schema.

Everything distance-related uses the exact surrogate sum(|dx|^p) in rational
arithmetic: it is order-equivalent to the p-norm (the 1/p root is never
taken), so orderings and tie-breaks are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Optional, Sequence

from .errors import InputError
from .fdschema import FdSchema

# Domain values: exact numbers for feature attributes, anything hashable
# (symbols, composite pairs) elsewhere.
Value = object


@dataclass(frozen=True)
class TupleRec:
    """One training point: values, a label, and a positive weight."""

    id: int
    values: tuple
    label: str
    weight: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise InputError(f"tuple {self.id}: weight must be positive")


@dataclass(frozen=True)
class TestPoint:
    coords: tuple


@dataclass(frozen=True)
class LabeledDataset:
    """An ordered list of labeled tuples plus the feature attributes used
    for distance. Tuple ids are dense row indices 0..n-1."""

    schema: FdSchema
    tuples: tuple[TupleRec, ...]
    labels: tuple[str, ...]
    features: tuple[str, ...]

    def __post_init__(self) -> None:
        for i, t in enumerate(self.tuples):
            if t.id != i:
                raise InputError("tuple ids must be dense row indices 0..n-1")
            if len(t.values) != self.schema.arity:
                raise InputError(f"tuple {i}: arity mismatch")
        observed = {t.label for t in self.tuples}
        if not observed <= set(self.labels):
            raise InputError(f"labels outside alphabet: {sorted(observed - set(self.labels))}")
        for f in self.features:
            self.schema.index(f)

    @property
    def size(self) -> int:
        return len(self.tuples)

    @cached_property
    def feature_indices(self) -> tuple[int, ...]:
        return tuple(self.schema.index(f) for f in self.features)

    def ids(self) -> range:
        return range(len(self.tuples))


def make_dataset(
    schema: FdSchema,
    rows: Sequence[tuple],
    features: Iterable[str],
    labels: Optional[Iterable[str]] = None,
) -> LabeledDataset:
    """Build a dataset from (values, label) or (values, label, weight) rows."""
    tuples = []
    for i, row in enumerate(rows):
        values, label = row[0], str(row[1])
        weight = Fraction(row[2]) if len(row) > 2 else Fraction(1)
        tuples.append(TupleRec(i, tuple(values), label, weight))
    alphabet = tuple(sorted(set(labels) if labels is not None else {t.label for t in tuples}))
    return LabeledDataset(schema, tuple(tuples), alphabet, tuple(features))


@dataclass(frozen=True)
class Ordering:
    """A strict order of all tuple ids, nearest first."""

    ranked: tuple[int, ...]
    source: str = "explicit"

    def __post_init__(self) -> None:
        if sorted(self.ranked) != list(range(len(self.ranked))):
            raise InputError("ordering must be a permutation of 0..n-1")

    @cached_property
    def rank_of(self) -> tuple[int, ...]:
        """1-based rank per tuple id (rank 1 is nearest)."""
        pos = [0] * len(self.ranked)
        for rank, tid in enumerate(self.ranked, start=1):
            pos[tid] = rank
        return tuple(pos)


@dataclass(frozen=True)
class PredictOutcome:
    """Result of a k-NN vote: a winning label, a tie, or an empty input."""

    kind: str  # "label" | "tie" | "empty"
    label: Optional[str] = None

    @staticmethod
    def of_label(label: str) -> "PredictOutcome":
        return PredictOutcome("label", label)

    TIE = None  # type: PredictOutcome
    EMPTY = None  # type: PredictOutcome

    def is_label(self, label: Optional[str] = None) -> bool:
        if self.kind != "label":
            return False
        return label is None or self.label == label


PredictOutcome.TIE = PredictOutcome("tie")
PredictOutcome.EMPTY = PredictOutcome("empty")


def _non_numeric(v) -> bool:
    return not isinstance(v, (int, Fraction))


def surrogate_distance(x: TestPoint, t: TupleRec, p: int, feature_indices: Sequence[int]):
    """Exact monotone surrogate of the p-norm distance: sum(|dx|^p)."""
    if not isinstance(p, int) or p < 1:
        raise InputError("p must be an integer >= 1")
    total = Fraction(0)
    for coord, idx in zip(x.coords, feature_indices):
        v = t.values[idx]
        if _non_numeric(v) or _non_numeric(coord):
            raise InputError(f"non-numeric feature value in tuple {t.id}")
        total += abs(coord - v) ** p
    return total


def distance(x: TestPoint, t: TupleRec, p: int, feature_indices: Sequence[int]):
    """Alias kept for callers that read better with the plain name."""
    return surrogate_distance(x, t, p, feature_indices)


def order_by_distance(dataset: LabeledDataset, x: TestPoint, p: int) -> Ordering:
    """Rank all tuples by surrogate distance ascending, ties by ascending id."""
    if len(x.coords) != len(dataset.features):
        raise InputError("test point arity must match the feature list")
    idx = dataset.feature_indices
    keyed = sorted(
        dataset.ids(),
        key=lambda i: (surrogate_distance(x, dataset.tuples[i], p, idx), i),
    )
    return Ordering(tuple(keyed), source=f"p-norm({p})")


@lru_cache(maxsize=None)
def _fd_index_pairs(schema: FdSchema) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    return tuple(
        (
            tuple(schema.index(a) for a in schema.sort_attrs(fd.lhs)),
            tuple(schema.index(a) for a in schema.sort_attrs(fd.rhs)),
        )
        for fd in schema.fds
    )


def conflicts(t: TupleRec, u: TupleRec, schema: FdSchema) -> bool:
    """True iff some FD has t, u agreeing on its lhs but not on its rhs."""
    tv, uv = t.values, u.values
    for lhs_idx, rhs_idx in _fd_index_pairs(schema):
        if all(tv[i] == uv[i] for i in lhs_idx) and any(tv[i] != uv[i] for i in rhs_idx):
            return True
    return False


def knn_predict(
    ids: Iterable[int],
    ordering: Ordering,
    labels: Sequence[str],
    weights: Optional[Sequence[Fraction]],
    k: int,
) -> PredictOutcome:
    """Vote over the min(k, |ids|) nearest members of ``ids``.

    The winner must be strictly heaviest; a shared maximum is a tie. With
    ``weights`` None every tuple counts 1.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    idset = set(ids)
    if not idset:
        return PredictOutcome.EMPTY
    take = min(k, len(idset))
    totals: dict[str, Fraction] = {}
    seen = 0
    for tid in ordering.ranked:
        if tid in idset:
            w = 1 if weights is None else weights[tid]
            totals[labels[tid]] = totals.get(labels[tid], 0) + w
            seen += 1
            if seen == take:
                break
    best = max(totals.values())
    winners = [lab for lab, tot in totals.items() if tot == best]
    if len(winners) > 1:
        return PredictOutcome.TIE
    return PredictOutcome.of_label(winners[0])


def predict(dataset: LabeledDataset, ids: Iterable[int], ordering: Ordering, k: int,
            weighted: bool = False) -> PredictOutcome:
    labels = [t.label for t in dataset.tuples]
    weights = [t.weight for t in dataset.tuples] if weighted else None
    return knn_predict(ids, ordering, labels, weights, k)


def greedy_repair(dataset: LabeledDataset, ordering: Ordering) -> tuple[int, ...]:
    """Scan nearest-first, keeping each tuple that conflicts with nothing kept.

    One dict per FD maps seen lhs values to their rhs values, so the scan is
    linear in expectation. The result is a repair: consistent and maximal.
    """
    schema = dataset.schema
    fd_slots = [
        (
            tuple(schema.index(a) for a in schema.sort_attrs(fd.lhs)),
            tuple(schema.index(a) for a in schema.sort_attrs(fd.rhs)),
            {},
        )
        for fd in schema.fds
    ]
    kept: list[int] = []
    for tid in ordering.ranked:
        values = dataset.tuples[tid].values
        ok = True
        for lhs_idx, rhs_idx, index in fd_slots:
            key = tuple(values[i] for i in lhs_idx)
            rhs = tuple(values[i] for i in rhs_idx)
            if index.get(key, rhs) != rhs:
                ok = False
                break
        if ok:
            kept.append(tid)
            for lhs_idx, rhs_idx, index in fd_slots:
                index[tuple(values[i] for i in lhs_idx)] = tuple(values[i] for i in rhs_idx)
    return tuple(sorted(kept))
