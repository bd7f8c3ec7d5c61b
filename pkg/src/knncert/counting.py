"""Exact per-label repair counting for lhs-chain schemas.

The counting table generalizes the certification DP: a cell is keyed by the
prefix size i and a vector of per-label count differences (each other label
minus the queried label, inside the prefix), and holds the exact number of
repairs realizing that cell. Consensus attributes add tables cell-wise,
common lhs attributes convolve them. Tables are sparse dicts: populated
cells never outnumber the repairs of the subinstance.

A repair predicts the queried label when every difference is at most -1.
To count each repair exactly once, the threshold is pinned to the rank of
the k-th nearest kept tuple: for threshold tau the instance is restricted
to tuples compatible with the tau-th ranked tuple, which forces it into
every repair, and cells with prefix size exactly k are read off. Repairs
with fewer than k tuples are picked up separately at the widest threshold,
where the neighborhood is the whole repair. Counts are Python ints, so
arbitrary precision comes for free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .dataset import LabeledDataset, Ordering, conflicts
from .decompose import ConsensusNode, Leaf, Node, build_tree
from .errors import InputError, NotChainError
from .fdschema import Fd, decide_lhs_chain

Cell = tuple[int, tuple[int, ...]]


@dataclass(frozen=True)
class CountTable:
    """Sparse map from (prefix size, difference vector) to repair counts."""

    entries: dict
    label: str
    other_labels: tuple[str, ...]
    tau: int
    k: int

    def total(self) -> int:
        return sum(self.entries.values())


class _Ctx:
    __slots__ = ("label", "others", "tau", "k", "rank_of", "labels")

    def __init__(self, label, others, tau, k, rank_of, labels):
        self.label = label
        self.others = others
        self.tau = tau
        self.k = k
        self.rank_of = rank_of
        self.labels = labels


def _leaf_cells(ids, ctx: _Ctx) -> dict:
    counts: dict[str, int] = {}
    size = 0
    for tid in ids:
        if ctx.rank_of[tid] <= ctx.tau:
            size += 1
            if size > ctx.k:
                return {}
            lab = ctx.labels[tid]
            counts[lab] = counts.get(lab, 0) + 1
    mine = counts.get(ctx.label, 0)
    vec = tuple(counts.get(other, 0) - mine for other in ctx.others)
    return {(size, vec): 1}


def _add(tables: Sequence[dict]) -> dict:
    out: dict = {}
    for table in tables:
        for cell, count in table.items():
            out[cell] = out.get(cell, 0) + count
    return out


def _convolve(a: dict, b: dict, k: int) -> dict:
    out: dict = {}
    for (ia, ca), va in a.items():
        for (ib, cb), vb in b.items():
            i = ia + ib
            if i > k:
                continue
            cell = (i, tuple(x + y for x, y in zip(ca, cb)))
            out[cell] = out.get(cell, 0) + va * vb
    return out


def _eval(node: Node, ctx: _Ctx) -> dict:
    if isinstance(node, Leaf):
        return _leaf_cells(node.ids, ctx)
    tables = [_eval(child, ctx) for child in node.children]
    if isinstance(node, ConsensusNode):
        return _add(tables)
    acc = tables[0]
    for table in tables[1:]:
        acc = _convolve(acc, table, ctx.k)
    return acc


def _make_ctx(dataset: LabeledDataset, label: str, tau: int, k: int, ordering: Ordering) -> _Ctx:
    others = tuple(sorted(set(dataset.labels) - {label}))
    return _Ctx(label, others, tau, k, ordering.rank_of, [t.label for t in dataset.tuples])


def count_table(
    dataset: LabeledDataset,
    ids: Sequence[int],
    label: str,
    tau: int,
    k: int,
    ordering: Ordering,
    fds: Optional[Sequence[Fd]] = None,
) -> CountTable:
    if k < 1:
        raise InputError("k must be >= 1")
    fds = list(dataset.schema.fds) if fds is None else list(fds)
    tree = build_tree(dataset.tuples, sorted(ids), fds, dataset.schema)
    ctx = _make_ctx(dataset, label, tau, k, ordering)
    return CountTable(_eval(tree, ctx), label, ctx.others, tau, k)


def _predicting(entries: dict, sizes) -> int:
    total = 0
    for (i, vec), count in entries.items():
        if i in sizes and all(c <= -1 for c in vec):
            total += count
    return total


def count_label(dataset: LabeledDataset, ordering: Ordering, k: int, label: str) -> int:
    """Number of repairs whose prediction is exactly ``label``."""
    if label not in dataset.labels:
        raise InputError(f"unknown label {label!r}")
    if k < 1:
        raise InputError("k must be >= 1")
    if not decide_lhs_chain(dataset.schema).is_chain_equivalent:
        raise NotChainError("counting requires an lhs-chain-equivalent schema")
    n = dataset.size
    if n == 0:
        return 0
    schema = dataset.schema
    fds = list(schema.fds)
    total = 0

    # Repairs with at least k tuples, pinned to the rank of their k-th
    # nearest member. Restricting to tuples compatible with that member
    # forces it into every repair, so no repair is counted twice.
    for tau in range(1, n + 1):
        anchor = dataset.tuples[ordering.ranked[tau - 1]]
        ids = [u for u in dataset.ids() if not conflicts(dataset.tuples[u], anchor, schema)]
        tree = build_tree(dataset.tuples, ids, fds, schema)
        cells = _eval(tree, _make_ctx(dataset, label, tau, k, ordering))
        total += _predicting(cells, {k})

    # Repairs with fewer than k tuples: neighborhood is the whole repair.
    if k > 1:
        tree = build_tree(dataset.tuples, list(dataset.ids()), fds, schema)
        cells = _eval(tree, _make_ctx(dataset, label, n, k, ordering))
        total += _predicting(cells, set(range(1, k)))
    return total


def count_repairs(
    dataset: LabeledDataset,
    ids: Optional[Sequence[int]] = None,
    fds: Optional[Sequence[Fd]] = None,
) -> int:
    """Total number of repairs (lhs-chain schemas only)."""
    fds = list(dataset.schema.fds) if fds is None else list(fds)
    ids = list(dataset.ids()) if ids is None else sorted(ids)
    tree = build_tree(dataset.tuples, ids, fds, dataset.schema)
    return _count(tree)


def _count(node: Node) -> int:
    if isinstance(node, Leaf):
        return 1
    if isinstance(node, ConsensusNode):
        return sum(_count(child) for child in node.children)
    out = 1
    for child in node.children:
        out *= _count(child)
    return out
