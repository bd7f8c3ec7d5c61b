"""Functional-dependency schemas.

Attribute closures, canonical covers, and the simplification recursion that
decides whether an FD set is equivalent to one whose left-hand sides form a
chain under inclusion. That chain test is the dispatch point for every
polynomial algorithm in this package: the recursion removes trivial FDs,
then repeatedly eliminates either a consensus attribute (an FD with empty
lhs) or an attribute common to every lhs, and succeeds iff the FD set
empties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import InputError


@dataclass(frozen=True)
class Fd:
    """A functional dependency ``lhs -> rhs`` over attribute names."""

    lhs: frozenset[str]
    rhs: frozenset[str]

    @staticmethod
    def of(lhs: Iterable[str], rhs: Iterable[str]) -> "Fd":
        return Fd(frozenset(lhs), frozenset(rhs))

    def is_trivial(self) -> bool:
        return self.rhs <= self.lhs

    def describe(self, schema: "FdSchema") -> str:
        lhs = ",".join(schema.sort_attrs(self.lhs)) or "()"
        rhs = ",".join(schema.sort_attrs(self.rhs))
        return f"{lhs}->{rhs}"


@dataclass(frozen=True)
class FdSchema:
    """A relation schema: an ordered attribute list plus a set of FDs."""

    attributes: tuple[str, ...]
    fds: tuple[Fd, ...]

    def __post_init__(self) -> None:
        if len(self.attributes) < 1:
            raise InputError("schema needs at least one attribute")
        if len(set(self.attributes)) != len(self.attributes):
            raise InputError("attribute names must be unique")
        known = set(self.attributes)
        for fd in self.fds:
            if not fd.rhs:
                raise InputError("FD with empty rhs")
            bad = (fd.lhs | fd.rhs) - known
            if bad:
                raise InputError(f"FD references unknown attributes: {sorted(bad)}")

    @staticmethod
    def of(attributes: Iterable[str], fds: Iterable[tuple[Iterable[str], Iterable[str]]]) -> "FdSchema":
        return FdSchema(tuple(attributes), tuple(Fd.of(l, r) for l, r in fds))

    @property
    def arity(self) -> int:
        return len(self.attributes)

    def index(self, name: str) -> int:
        try:
            return self.attributes.index(name)
        except ValueError:
            raise InputError(f"unknown attribute: {name!r}") from None

    def sort_attrs(self, attrs: Iterable[str]) -> list[str]:
        return sorted(attrs, key=self.index)


@dataclass(frozen=True)
class ChainDecision:
    """Outcome of the lhs-chain test, with the simplification trace."""

    is_chain_equivalent: bool
    trace: tuple[str, ...]


def _fire(attrs: set[str], fds: Iterable[Fd]) -> set[str]:
    result = set(attrs)
    changed = True
    while changed:
        changed = False
        for fd in fds:
            if fd.lhs <= result and not fd.rhs <= result:
                result |= fd.rhs
                changed = True
    return result


def closure(attrs: Iterable[str], schema: FdSchema) -> frozenset[str]:
    """Closure of an attribute set under the schema's FDs (fixpoint)."""
    attrs = set(attrs)
    unknown = attrs - set(schema.attributes)
    if unknown:
        raise InputError(f"unknown attributes in closure query: {sorted(unknown)}")
    return frozenset(_fire(attrs, schema.fds))


def _subtract(fds: Iterable[Fd], attr: str) -> list[Fd]:
    out = []
    for fd in fds:
        rhs = fd.rhs - {attr}
        if rhs:
            out.append(Fd(fd.lhs - {attr}, rhs))
    return out


def subtract_attribute(schema: FdSchema, attr: str) -> FdSchema:
    """Remove ``attr`` from every FD, dropping FDs whose rhs empties.

    The attribute list itself is unchanged; consensus FDs (empty lhs) that
    appear as a result are kept, since the recursive algorithms rely on them.
    """
    schema.index(attr)
    return FdSchema(schema.attributes, tuple(_subtract(schema.fds, attr)))


def decide_lhs_chain(schema: FdSchema) -> ChainDecision:
    """Run the simplification recursion and report whether it empties the FDs.

    Steps, repeated until the FD set is empty or no step applies:
    drop trivial FDs (rhs contained in lhs); if a consensus FD exists,
    eliminate its smallest-index rhs attribute; otherwise, if some attribute
    occurs in every lhs, eliminate the smallest-index such attribute.
    Attribute choices are broken by schema index so traces are reproducible.
    """
    fds = list(schema.fds)
    trace: list[str] = []
    while True:
        nontrivial = [fd for fd in fds if not fd.is_trivial()]
        if len(nontrivial) != len(fds):
            trace.append("removed-trivial")
        fds = nontrivial
        if not fds:
            return ChainDecision(True, tuple(trace))
        consensus = {a for fd in fds if not fd.lhs for a in fd.rhs}
        if consensus:
            attr = min(consensus, key=schema.index)
            trace.append(f"consensus({attr})")
            fds = _subtract(fds, attr)
            continue
        common = set(fds[0].lhs)
        for fd in fds[1:]:
            common &= fd.lhs
        if common:
            attr = min(common, key=schema.index)
            trace.append(f"common-lhs({attr})")
            fds = _subtract(fds, attr)
            continue
        trace.append("stuck")
        return ChainDecision(False, tuple(trace))


def _fd_key(schema: FdSchema, fd: Fd) -> tuple:
    return (
        tuple(sorted(schema.index(a) for a in fd.lhs)),
        tuple(sorted(schema.index(a) for a in fd.rhs)),
    )


def minimize(schema: FdSchema) -> FdSchema:
    """Canonical cover: singleton rhs, no extraneous lhs attributes, no
    redundant FDs. Equivalent to the input (same closure on every set)."""
    split: list[Fd] = []
    for fd in schema.fds:
        for attr in schema.sort_attrs(fd.rhs):
            if attr not in fd.lhs:
                split.append(Fd.of(fd.lhs, [attr]))
    work = sorted(dict.fromkeys(split), key=lambda fd: _fd_key(schema, fd))

    # Extraneous lhs attributes, tested against the current cover.
    for i in range(len(work)):
        target = next(iter(work[i].rhs))
        lhs = set(work[i].lhs)
        for attr in schema.sort_attrs(work[i].lhs):
            if attr in lhs and target in _fire(lhs - {attr}, work):
                lhs.discard(attr)
                work[i] = Fd.of(lhs, [target])

    # Redundant FDs, removed one at a time in canonical order.
    kept = sorted(dict.fromkeys(work), key=lambda fd: _fd_key(schema, fd))
    for fd in list(kept):
        others = [g for g in kept if g is not fd]
        if next(iter(fd.rhs)) in _fire(set(fd.lhs), others):
            kept.remove(fd)

    return FdSchema(schema.attributes, tuple(sorted(kept, key=lambda fd: _fd_key(schema, fd))))


def find_incomparable_pair(schema: FdSchema) -> Optional[tuple[Fd, Fd]]:
    """First pair of FDs whose left-hand sides are mutually non-contained.

    Expects a minimized schema; returns None when the lhs sets are totally
    ordered by inclusion (the schema has an lhs chain syntactically).
    """
    fds = schema.fds
    for i in range(len(fds)):
        for j in range(i + 1, len(fds)):
            a, b = fds[i], fds[j]
            if not a.lhs <= b.lhs and not b.lhs <= a.lhs:
                return (a, b)
    return None


def with_label_attribute(schema: FdSchema, name: str = "label") -> FdSchema:
    """Append a label attribute determined by all original attributes.

    This is the schema transformation that folds uncertain labels into the
    relation itself; it preserves lhs-chain equivalence in both directions.
    """
    if name in schema.attributes:
        raise InputError(f"attribute {name!r} already present")
    new_fd = Fd.of(schema.attributes, [name])
    return FdSchema(schema.attributes + (name,), schema.fds + (new_fd,))
