"""Certification for lhs-chain schemas.

For a target label and a distance threshold, the recursion computes, per
prefix size i, the maximum over all repairs with exactly i tuples inside the
threshold of (weight of target label) - (weight of the incumbent label)
within that prefix. Partitioning follows the decomposition tree: a consensus
attribute takes a max across values, a common lhs attribute combines per
value tables by max-plus convolution. A non-negative entry at i = k for some
threshold (or at i < k at the widest threshold, covering repairs smaller
than k) falsifies robustness, and a witness repair is reconstructed by
walking the recursion back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .certresult import CertResult
from .dataset import LabeledDataset, Ordering, greedy_repair, predict
from .decompose import ConsensusNode, Leaf, Node, build_tree
from .errors import InputError, NotChainError
from .fdschema import Fd, decide_lhs_chain

# A table is a list of length k+1; None stands for minus infinity, meaning
# no repair attains that prefix size.
Row = list


@dataclass(frozen=True)
class MaxDiffTable:
    """Best label-weight difference per prefix size, for one (label, tau)."""

    entries: tuple
    label: str
    ref_label: str
    tau: int

    @property
    def k(self) -> int:
        return len(self.entries) - 1


class _Ctx:
    __slots__ = ("label", "ref_label", "tau", "k", "rank_of", "labels", "weights")

    def __init__(self, label, ref_label, tau, k, rank_of, labels, weights):
        self.label = label
        self.ref_label = ref_label
        self.tau = tau
        self.k = k
        self.rank_of = rank_of
        self.labels = labels
        self.weights = weights


def _leaf_row(ids, ctx: _Ctx) -> Row:
    row: Row = [None] * (ctx.k + 1)
    size = 0
    diff = 0
    for tid in ids:
        if ctx.rank_of[tid] <= ctx.tau:
            size += 1
            if size > ctx.k:
                return row
            lab = ctx.labels[tid]
            if lab == ctx.label:
                diff += 1 if ctx.weights is None else ctx.weights[tid]
            elif lab == ctx.ref_label:
                diff -= 1 if ctx.weights is None else ctx.weights[tid]
    row[size] = diff
    return row


def _max_rows(rows: Sequence[Row], k: int) -> Row:
    out: Row = [None] * (k + 1)
    for row in rows:
        for i, v in enumerate(row):
            if v is not None and (out[i] is None or v > out[i]):
                out[i] = v
    return out


def _convolve(a: Row, b: Row, k: int) -> Row:
    out: Row = [None] * (k + 1)
    for i, va in enumerate(a):
        if va is None:
            continue
        for j in range(k - i + 1):
            vb = b[j]
            if vb is None:
                continue
            s = va + vb
            if out[i + j] is None or s > out[i + j]:
                out[i + j] = s
    return out


def _eval(node: Node, ctx: _Ctx) -> Row:
    if isinstance(node, Leaf):
        return _leaf_row(node.ids, ctx)
    rows = [_eval(child, ctx) for child in node.children]
    if isinstance(node, ConsensusNode):
        return _max_rows(rows, ctx.k)
    acc = rows[0]
    for row in rows[1:]:
        acc = _convolve(acc, row, ctx.k)
    return acc


def _trace(node: Node, i: int, ctx: _Ctx) -> list[int]:
    """Reconstruct a repair attaining the node's table value at index i."""
    if isinstance(node, Leaf):
        return list(node.ids)
    rows = [_eval(child, ctx) for child in node.children]
    if isinstance(node, ConsensusNode):
        best = None
        pick = None
        for child, row in zip(node.children, rows):
            if row[i] is not None and (best is None or row[i] > best):
                best = row[i]
                pick = child
        return _trace(pick, i, ctx)
    prefixes = [rows[0]]
    for row in rows[1:]:
        prefixes.append(_convolve(prefixes[-1], row, ctx.k))
    chosen: list[int] = []
    target = i
    for c in range(len(rows) - 1, 0, -1):
        value = prefixes[c][target]
        for u in range(target + 1):
            left, right = prefixes[c - 1][u], rows[c][target - u]
            if left is not None and right is not None and left + right == value:
                chosen.extend(_trace(node.children[c], target - u, ctx))
                target = u
                break
    chosen.extend(_trace(node.children[0], target, ctx))
    return chosen


def max_label_diff(
    dataset: LabeledDataset,
    ids: Sequence[int],
    label: str,
    ref_label: str,
    tau: int,
    k: int,
    ordering: Ordering,
    fds: Optional[Sequence[Fd]] = None,
    weighted: bool = False,
) -> MaxDiffTable:
    """Table of best (label minus ref_label) prefix differences over all
    repairs of ``ids``, indexed by the exact number of tuples at rank <= tau."""
    if k < 1:
        raise InputError("k must be >= 1")
    fds = list(dataset.schema.fds) if fds is None else list(fds)
    tree = build_tree(dataset.tuples, sorted(ids), fds, dataset.schema)
    ctx = _make_ctx(dataset, label, ref_label, tau, k, ordering, weighted)
    return MaxDiffTable(tuple(_eval(tree, ctx)), label, ref_label, tau)


def combine_rows(tables: Sequence[MaxDiffTable], k: Optional[int] = None) -> MaxDiffTable:
    """Max-plus convolution of per-partition tables at a shared total index."""
    if not tables:
        raise InputError("nothing to combine")
    first = tables[0]
    k = first.k if k is None else k
    for t in tables:
        if (t.label, t.ref_label, t.tau, t.k) != (first.label, first.ref_label, first.tau, k):
            raise InputError("tables disagree on (label, ref_label, tau, k)")
    acc = list(first.entries)
    for t in tables[1:]:
        acc = _convolve(acc, list(t.entries), k)
    return MaxDiffTable(tuple(acc), first.label, first.ref_label, first.tau)


def _make_ctx(dataset, label, ref_label, tau, k, ordering, weighted) -> _Ctx:
    labels = [t.label for t in dataset.tuples]
    weights = [t.weight for t in dataset.tuples] if weighted else None
    return _Ctx(label, ref_label, tau, k, ordering.rank_of, labels, weights)


def certify(
    dataset: LabeledDataset,
    ordering: Ordering,
    k: int,
    weighted: bool = False,
) -> CertResult:
    """Decide certifiable robustness for an lhs-chain schema.

    The incumbent label comes from the greedy repair (a tie there already
    falsifies). For every other label and every threshold, robustness
    survives only if the best difference stays negative; the i < k entries
    at the widest threshold cover repairs with fewer than k tuples, whose
    neighborhood is the whole repair. Witnesses are re-verified with the
    classifier before being returned.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    if not decide_lhs_chain(dataset.schema).is_chain_equivalent:
        raise NotChainError("certify requires an lhs-chain-equivalent schema")
    greedy = greedy_repair(dataset, ordering)
    incumbent = predict(dataset, greedy, ordering, k, weighted=weighted)
    if incumbent.kind != "label":
        return CertResult(False, None, (), ((greedy, incumbent),))
    ell1 = incumbent.label

    n = dataset.size
    tree = build_tree(dataset.tuples, list(dataset.ids()), list(dataset.schema.fds), dataset.schema)
    for ell in sorted(set(dataset.labels) - {ell1}):
        for tau in range(1, n + 1):
            ctx = _make_ctx(dataset, ell, ell1, tau, k, ordering, weighted)
            row = _eval(tree, ctx)
            hits = [k] if tau < n else [k] + list(range(1, k))
            for i in hits:
                if row[i] is not None and row[i] >= 0:
                    repair = tuple(sorted(_trace(tree, i, ctx)))
                    outcome = predict(dataset, repair, ordering, k, weighted=weighted)
                    if outcome.is_label(ell1):
                        raise AssertionError("witness failed re-verification")
                    possible = {ell1}
                    if outcome.kind == "label":
                        possible.add(outcome.label)
                    return CertResult(
                        False,
                        None,
                        tuple(sorted(possible)),
                        ((greedy, incumbent), (repair, outcome)),
                    )
    return CertResult(True, ell1, (ell1,), ())
