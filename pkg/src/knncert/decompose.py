"""Recursive decomposition of an instance under an lhs-chain FD set.

Repairs of an instance factor along attribute values: when an FD with an
empty lhs is present, a repair must commit to a single value of that
attribute; when some attribute occurs in every lhs, tuples with different
values of it never conflict, so repairs are unions of per-value repairs.
The resulting partition tree depends only on the tuple set and the FDs, so
it is built once and shared by the certification DP, the counting DP, and
the minimum-weight repair recursion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .dataset import TupleRec
from .errors import NotChainError
from .fdschema import Fd, FdSchema, _subtract


@dataclass(frozen=True)
class Leaf:
    """No FDs remain: the only repair of this subinstance is itself."""

    ids: tuple[int, ...]


@dataclass(frozen=True)
class ConsensusNode:
    """A repair picks exactly one child (one value of ``attr``)."""

    attr: str
    children: tuple["Node", ...]


@dataclass(frozen=True)
class CommonNode:
    """A repair is a disjoint union of one repair per child."""

    attr: str
    children: tuple["Node", ...]


Node = Union[Leaf, ConsensusNode, CommonNode]


def build_tree(
    tuples: Sequence[TupleRec],
    ids: Sequence[int],
    fds: Sequence[Fd],
    schema: FdSchema,
) -> Node:
    """Build the partition tree for ``ids`` under ``fds``.

    Raises NotChainError when the simplification gets stuck, i.e. the FDs
    are not equivalent to an lhs chain on this path.
    """
    fds = [fd for fd in fds if not fd.is_trivial()]
    if not fds or not ids:
        return Leaf(tuple(ids))

    consensus = {a for fd in fds if not fd.lhs for a in fd.rhs}
    if consensus:
        attr = min(consensus, key=schema.index)
        return ConsensusNode(attr, _split(tuples, ids, fds, schema, attr))

    common = set(fds[0].lhs)
    for fd in fds[1:]:
        common &= fd.lhs
    if common:
        attr = min(common, key=schema.index)
        return CommonNode(attr, _split(tuples, ids, fds, schema, attr))

    raise NotChainError("FD set is not equivalent to an lhs chain")


def _split(tuples, ids, fds, schema, attr) -> tuple[Node, ...]:
    idx = schema.index(attr)
    parts: dict[object, list[int]] = {}
    for tid in ids:
        parts.setdefault(tuples[tid].values[idx], []).append(tid)
    reduced = _subtract(fds, attr)
    return tuple(build_tree(tuples, part, reduced, schema) for part in parts.values())
