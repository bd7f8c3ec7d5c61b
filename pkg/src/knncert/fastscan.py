"""Linear-time certification when the FDs amount to a single primary key.

Tuples sharing a key form a block and a repair picks exactly one tuple per
block. For an incumbent label and a challenger label, a pruning pass first
deletes every tuple that can never help the challenger: incumbent-labeled
tuples that are not last in their block, and anything behind a
challenger-labeled tuple. In the pruned instance each block carries at most
one tuple labeled with either of the two labels, and such a tuple sits last
in its block. A single scan then maintains how many blocks have been
touched, how many are fully behind the frontier, and the two label
counters; the exit test certifies that a repair exists whose k-neighborhood
ties or beats the incumbent, and the witness is materialized per block.

The scan core works on integer code arrays so million-tuple instances stay
well inside interactive time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import certify_dp
from .certresult import CertResult
from .dataset import LabeledDataset, Ordering, greedy_repair, predict
from .errors import InputError, NotPrimaryKeyError
from .fdschema import closure, minimize


@dataclass(frozen=True)
class KeyedDataset:
    """A dataset whose conflicts are exactly "same key, different tuple"."""

    dataset: LabeledDataset
    key: tuple[str, ...]
    blocks: dict

    @property
    def block_of(self) -> dict:
        return self._block_of

    def __post_init__(self) -> None:
        block_of = {}
        for code, ids in enumerate(self.blocks.values()):
            for tid in ids:
                block_of[tid] = code
        object.__setattr__(self, "_block_of", block_of)


@dataclass(frozen=True)
class ScanTrigger:
    """State of the scan at the iteration where the exit test fired."""

    index: int  # 1-based position in the pruned order
    target_count: int  # challenger-labeled tuples seen
    forced_ref_count: int  # singleton blocks forcing an incumbent tuple
    blocks_closed: int
    blocks_seen: int


def as_keyed(dataset: LabeledDataset) -> KeyedDataset:
    """Check the key criterion and group tuples into blocks.

    The schema qualifies when its canonical cover has a single shared lhs
    whose closure spans every attribute. Blocks must be conflict cliques:
    same-key tuples with identical values would coexist in repairs, which
    the block model cannot express, so such datasets are refused (the DP
    path handles them).
    """
    schema = dataset.schema
    mini = minimize(schema)
    if mini.fds:
        lhss = {fd.lhs for fd in mini.fds}
        if len(lhss) != 1:
            raise NotPrimaryKeyError("FDs do not share a single lhs")
        key = next(iter(lhss))
        if closure(key, mini) != frozenset(schema.attributes):
            raise NotPrimaryKeyError("shared lhs is not a key of the relation")
    else:
        key = frozenset(schema.attributes)
    key_attrs = tuple(schema.sort_attrs(key))
    key_idx = tuple(schema.index(a) for a in key_attrs)

    blocks: dict = {}
    for t in dataset.tuples:
        blocks.setdefault(tuple(t.values[i] for i in key_idx), []).append(t.id)
    for key_value, ids in blocks.items():
        if len({dataset.tuples[t].values for t in ids}) != len(ids):
            raise NotPrimaryKeyError(f"block {key_value!r} holds identical rows")
        blocks[key_value] = tuple(ids)
    return KeyedDataset(dataset, key_attrs, blocks)


def _codes(keyed: KeyedDataset, ordering: Ordering):
    """Key and label codes at rank positions, plus the ranked id array."""
    ds = keyed.dataset
    ranked = np.asarray(ordering.ranked, dtype=np.int64)
    block_of = keyed.block_of
    keys = np.fromiter((block_of[t] for t in ordering.ranked), np.int64, ds.size)
    lab_code = {lab: i for i, lab in enumerate(ds.labels)}
    labels = np.fromiter((lab_code[ds.tuples[t].label] for t in ordering.ranked), np.int64, ds.size)
    return keys, labels, ranked


def _block_stats(keys: np.ndarray):
    # Positions are scanned in order, so duplicate-index assignment keeps the
    # last write: forward gives last occurrences, reversed gives first ones.
    n = keys.shape[0]
    nkeys = int(keys.max()) + 1 if n else 0
    pos = np.arange(n, dtype=np.int64)
    first = np.full(nkeys, n, dtype=np.int64)
    first[keys[::-1]] = pos[::-1]
    last = np.full(nkeys, -1, dtype=np.int64)
    last[keys] = pos
    count = np.bincount(keys, minlength=nkeys)
    return first, last, count


def _prune_mask(keys: np.ndarray, labels: np.ndarray, ell2: int, ell1: int) -> np.ndarray:
    n = keys.shape[0]
    _, last, _ = _block_stats(keys)
    pos = np.arange(n, dtype=np.int64)
    nkeys = last.shape[0]
    first_target = np.full(nkeys, n, dtype=np.int64)
    target = labels == ell2
    first_target[keys[target][::-1]] = pos[target][::-1]
    doomed_ref = (labels == ell1) & (pos < last[keys])
    behind_target = pos > first_target[keys]
    return ~(doomed_ref | behind_target)


def _scan_arrays(keys: np.ndarray, labels: np.ndarray, ell2: int, ell1: int, k: int) -> Optional[ScanTrigger]:
    n = keys.shape[0]
    if n == 0:
        return None
    first, last, count = _block_stats(keys)
    pos = np.arange(n, dtype=np.int64)
    blocks_seen = np.cumsum(first[keys] == pos)
    blocks_closed = np.cumsum(last[keys] == pos)
    target_seen = np.cumsum(labels == ell2)
    forced_ref = np.cumsum((count[keys] == 1) & (labels == ell1))
    assert blocks_closed[-1] == blocks_seen[-1] and (blocks_closed <= blocks_seen).all()
    fired = (blocks_closed <= k) & (k <= blocks_seen) & (target_seen >= forced_ref)
    if not fired.any():
        return None
    i = int(np.argmax(fired))
    return ScanTrigger(
        index=i + 1,
        target_count=int(target_seen[i]),
        forced_ref_count=int(forced_ref[i]),
        blocks_closed=int(blocks_closed[i]),
        blocks_seen=int(blocks_seen[i]),
    )


def prune(keyed: KeyedDataset, ell2: str, ell1: str, ordering: Ordering) -> tuple[int, ...]:
    """Ids surviving the (ell2, ell1) pruning rules, in rank order."""
    ds = keyed.dataset
    for lab in (ell2, ell1):
        if lab not in ds.labels:
            raise InputError(f"unknown label {lab!r}")
    keys, labels, ranked = _codes(keyed, ordering)
    mask = _prune_mask(keys, labels, ds.labels.index(ell2), ds.labels.index(ell1))
    return tuple(int(t) for t in ranked[mask])


def fastscan(
    keyed: KeyedDataset,
    ell1: str,
    ell2: str,
    k: int,
    ordering: Ordering,
    kept: Optional[Sequence[int]] = None,
) -> Optional[ScanTrigger]:
    """Scan a pruned instance for a repair where ell2 ties or beats ell1.

    ``kept`` is the prune() output; by default the instance is assumed
    already pruned and scanned whole.
    """
    ds = keyed.dataset
    keys, labels, ranked = _codes(keyed, ordering)
    if kept is not None:
        pos_of = {int(t): i for i, t in enumerate(ranked)}
        sel = np.asarray(sorted(pos_of[t] for t in kept), dtype=np.int64)
        keys, labels = keys[sel], labels[sel]
    return _scan_arrays(keys, labels, ds.labels.index(ell2), ds.labels.index(ell1), k)


def _build_witness(
    keyed: KeyedDataset,
    kept: Sequence[int],
    trigger: ScanTrigger,
    ell1: str,
    k: int,
) -> tuple[int, ...]:
    """Materialize the repair promised by a scan trigger.

    Blocks fully inside the prefix contribute their last tuple (or any other
    when the last is incumbent-labeled and the block allows a dodge); enough
    straddling blocks contribute a prefix tuple to reach exactly k, the rest
    stay outside; untouched blocks pick arbitrarily.
    """
    ds = keyed.dataset
    block_of = keyed.block_of
    members: dict[int, list[int]] = {}
    for pos, tid in enumerate(kept):
        members.setdefault(block_of[tid], []).append(pos)
    kept = list(kept)
    boundary = trigger.index  # prefix = kept positions < boundary

    picks: list[int] = []
    straddling: list[list[int]] = []
    for block_positions in members.values():
        first_pos, last_pos = block_positions[0], block_positions[-1]
        if last_pos < boundary:
            last_id = kept[last_pos]
            if ds.tuples[last_id].label == ell1 and len(block_positions) > 1:
                picks.append(kept[block_positions[0]])
            else:
                picks.append(last_id)
        elif first_pos < boundary:
            straddling.append(block_positions)
        else:
            picks.append(kept[block_positions[-1]])
    need = k - trigger.blocks_closed
    straddling.sort(key=lambda positions: positions[0])
    for j, block_positions in enumerate(straddling):
        picks.append(kept[block_positions[0] if j < need else block_positions[-1]])

    # Untouched original blocks cannot exist: pruning never erases a block.
    assert len(picks) == len(keyed.blocks)
    return tuple(sorted(picks))


def certify_pk(
    source: Union[LabeledDataset, KeyedDataset],
    ordering: Ordering,
    k: int,
) -> CertResult:
    """Certify robustness through the prune-and-scan path.

    Votes are unweighted here; weighted certification goes through the DP.
    k larger than the number of blocks is clamped: every repair holds one
    tuple per block, so the neighborhood is then the whole repair. Each
    witness is re-verified with the classifier; if that ever failed the
    result would fall back to the general DP.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    keyed = source if isinstance(source, KeyedDataset) else as_keyed(source)
    ds = keyed.dataset

    greedy = greedy_repair(ds, ordering)
    incumbent = predict(ds, greedy, ordering, k)
    if incumbent.kind != "label":
        return CertResult(False, None, (), ((greedy, incumbent),))
    ell1 = incumbent.label

    k_eff = min(k, len(keyed.blocks))
    for ell2 in sorted(set(ds.labels) - {ell1}):
        kept = prune(keyed, ell2, ell1, ordering)
        trigger = fastscan(keyed, ell1, ell2, k_eff, ordering, kept)
        if trigger is None:
            continue
        witness = _build_witness(keyed, kept, trigger, ell1, k_eff)
        outcome = predict(ds, witness, ordering, k)
        if outcome.is_label(ell1):
            return certify_dp.certify(ds, ordering, k)
        possible = {ell1}
        if outcome.kind == "label":
            possible.add(outcome.label)
        return CertResult(
            False,
            None,
            tuple(sorted(possible)),
            ((greedy, incumbent), (witness, outcome)),
        )
    return CertResult(True, ell1, (ell1,), ())


@dataclass(frozen=True)
class ArrayVerdict:
    robust: bool
    incumbent: Optional[int]
    challenger: Optional[int] = None
    trigger: Optional[ScanTrigger] = None


def certify_pk_arrays(keys: np.ndarray, labels: np.ndarray, k: int) -> ArrayVerdict:
    """Array-level certification: key and label codes already in rank order.

    This is the path for bulk synthetic workloads; it performs the greedy
    prediction, then one prune and scan per challenger label.
    """
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    n = keys.shape[0]
    if n == 0:
        return ArrayVerdict(False, None)
    first, _, _ = _block_stats(keys)
    pos = np.arange(n, dtype=np.int64)
    greedy_positions = np.flatnonzero(first[keys] == pos)
    num_blocks = greedy_positions.shape[0]
    top = labels[greedy_positions[: min(k, num_blocks)]]
    counts = np.bincount(top)
    best = counts.max()
    if (counts == best).sum() > 1:
        return ArrayVerdict(False, None)
    ell1 = int(np.argmax(counts))

    k_eff = min(k, num_blocks)
    for ell2 in range(int(labels.max()) + 1):
        if ell2 == ell1 or not (labels == ell2).any():
            continue
        mask = _prune_mask(keys, labels, ell2, ell1)
        trigger = _scan_arrays(keys[mask], labels[mask], ell2, ell1, k_eff)
        if trigger is not None:
            return ArrayVerdict(False, ell1, ell2, trigger)
    return ArrayVerdict(True, ell1)
