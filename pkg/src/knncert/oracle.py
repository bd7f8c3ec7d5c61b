"""Brute-force ground truth.

FD consistency is a pairwise property, so the maximal consistent subsets of
an instance are exactly the maximal independent sets of its conflict graph.
This module enumerates them outright (Bron-Kerbosch with pivoting on the
complement graph, over bitmasks) and evaluates robustness, counts, minimum
weights, and ?-set worlds directly. Every other module's tests check
against these results; caps are hard errors, never silent truncation.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .certresult import CertResult
from .dataset import LabeledDataset, Ordering, PredictOutcome, conflicts, predict
from .errors import CapExceededError, InputError

DEFAULT_CAP = 20


def _cap() -> int:
    return int(os.environ.get("KNNCERT_ORACLE_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class RepairSet:
    """All repairs of an instance, canonically ordered."""

    repairs: tuple[tuple[int, ...], ...]


def _conflict_masks(dataset: LabeledDataset, ids: Sequence[int]) -> dict[int, int]:
    masks = {tid: 0 for tid in ids}
    for a, b in itertools.combinations(ids, 2):
        if conflicts(dataset.tuples[a], dataset.tuples[b], dataset.schema):
            masks[a] |= 1 << b
            masks[b] |= 1 << a
    return masks


def enumerate_repairs(
    dataset: LabeledDataset,
    ids: Optional[Sequence[int]] = None,
    cap: Optional[int] = None,
) -> RepairSet:
    """Every maximal consistent subset of ``ids`` (default: the whole instance)."""
    ids = list(dataset.ids()) if ids is None else sorted(ids)
    cap = _cap() if cap is None else cap
    if len(ids) > cap:
        raise CapExceededError(f"enumeration over {len(ids)} tuples exceeds cap {cap}")
    if not ids:
        return RepairSet(((),))

    conflict = _conflict_masks(dataset, ids)
    # Maximal cliques of the compatibility graph = maximal independent sets
    # of the conflict graph.
    universe = 0
    for tid in ids:
        universe |= 1 << tid
    compat = {tid: universe & ~conflict[tid] & ~(1 << tid) for tid in ids}

    found: list[int] = []

    def bron_kerbosch(r: int, p: int, x: int) -> None:
        if p == 0 and x == 0:
            found.append(r)
            return
        pivot_pool = p | x
        pivot = max(_bits(pivot_pool), key=lambda v: _popcount(compat[v] & p))
        for v in _bits(p & ~compat[pivot]):
            bron_kerbosch(r | (1 << v), p & compat[v], x & compat[v])
            p &= ~(1 << v)
            x |= 1 << v

    bron_kerbosch(0, universe, 0)
    repairs = sorted(tuple(_bits(mask)) for mask in found)
    return RepairSet(tuple(repairs))


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def brute_certify(
    dataset: LabeledDataset,
    ordering: Ordering,
    k: int,
    weighted: bool = False,
    cap: Optional[int] = None,
) -> CertResult:
    """Evaluate the classifier on every repair and compare outcomes."""
    repairs = enumerate_repairs(dataset, cap=cap).repairs
    outcomes = [predict(dataset, r, ordering, k, weighted=weighted) for r in repairs]
    possible = tuple(sorted({o.label for o in outcomes if o.kind == "label"}))
    first = outcomes[0]
    if first.kind == "label" and all(o == first for o in outcomes):
        return CertResult(True, first.label, possible, ())
    witnesses = [(repairs[0], first)]
    for r, o in zip(repairs[1:], outcomes[1:]):
        if o != first:
            witnesses.append((r, o))
            break
    return CertResult(False, None, possible, tuple(witnesses))


def brute_count(
    dataset: LabeledDataset,
    ordering: Ordering,
    k: int,
    label: str,
    cap: Optional[int] = None,
) -> int:
    """Number of repairs whose prediction is exactly ``label``."""
    repairs = enumerate_repairs(dataset, cap=cap).repairs
    want = PredictOutcome.of_label(label)
    return sum(1 for r in repairs if predict(dataset, r, ordering, k) == want)


def brute_min_repair(
    dataset: LabeledDataset,
    weights: Optional[Sequence[Fraction]] = None,
    cap: Optional[int] = None,
) -> tuple[tuple[int, ...], Fraction]:
    """Minimum-total-weight repair, ties broken by the canonical repair order."""
    if weights is None:
        weights = [t.weight for t in dataset.tuples]
    best = None
    for r in enumerate_repairs(dataset, cap=cap).repairs:
        total = sum((weights[t] for t in r), Fraction(0))
        key = (total, r)
        if best is None or key < best:
            best = key
    return best[1], best[0]


def enumerate_qset_worlds(
    dataset: LabeledDataset,
    uncertain: Iterable[int],
    budget: int,
    cap: int = 200_000,
) -> list[tuple[int, ...]]:
    """All worlds formed by deleting at most ``budget`` uncertain tuples."""
    uncertain = sorted(set(uncertain))
    if budget < 0 or budget > len(uncertain):
        raise InputError("budget must lie in 0..|uncertain|")
    total = sum(_choose(len(uncertain), j) for j in range(budget + 1))
    if total > cap:
        raise CapExceededError(f"{total} worlds exceed cap {cap}")
    all_ids = set(dataset.ids())
    worlds = []
    for j in range(budget + 1):
        for removed in itertools.combinations(uncertain, j):
            worlds.append(tuple(sorted(all_ids - set(removed))))
    return worlds


def _choose(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out
