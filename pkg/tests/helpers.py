"""Shared fixtures and random-instance generators for the test suite."""

from __future__ import annotations

import itertools
from fractions import Fraction

import knncert as kc
from knncert import hardgen, oracle

ATTR_POOL = ("A", "B", "C", "D", "E", "F")


def example_inconsistent():
    """The six-tuple instance with FD A->B, distances over (A, B) at p=1.

    Ordering comes out as ids (0, 2, 1, 4, 5, 3); four repairs; at k=3 every
    repair predicts label 0.
    """
    schema = kc.FdSchema.of(("A", "B", "C"), [(["A"], ["B"])])
    rows = [
        ((1, 0, "a"), "0"),
        ((1, 2, "b"), "0"),
        ((2, 0, "a"), "2"),
        ((2, 5, "c"), "1"),
        ((3, 1, "a"), "0"),
        ((4, 2, "d"), "2"),
    ]
    ds = kc.make_dataset(schema, rows, features=("A", "B"))
    x = kc.TestPoint((0, 0))
    return ds, x, kc.order_by_distance(ds, x, 1)


FIG3_BLOCKS = [
    "orange", "blue", "orange", "purple", "purple", "yellow", "blue", "blue",
    "lightblue", "purple", "lightblue", "lightblue", "yellow", "lightblue",
    "purple", "yellow",
]
FIG3_LABELS = ["1", "1", "1", "3", "1", "1", "3", "1", "2", "1", "3", "3", "1", "1", "3", "3"]


def keyed_sixteen():
    """The sixteen-tuple primary-key instance with blocks by color and an
    explicit rank order equal to the row order."""
    schema = kc.FdSchema.of(("K", "V"), [(["K"], ["V"])])
    rows = [((FIG3_BLOCKS[i], i + 1), FIG3_LABELS[i]) for i in range(16)]
    ds = kc.make_dataset(schema, rows, features=())
    return ds, kc.Ordering(tuple(range(16)), source="explicit")


def random_chain_schema(rng, d, allow_consensus=True):
    """FDs whose lhs sets are prefixes of one permutation: a syntactic chain."""
    attrs = ATTR_POOL[:d]
    perm = list(attrs)
    rng.shuffle(perm)
    low = 0 if allow_consensus else 1
    fds = []
    for size in sorted(rng.randint(low, d - 1) for _ in range(rng.randint(1, 3))):
        lhs = perm[:size]
        rest = [a for a in attrs if a not in lhs]
        rhs = rng.sample(rest, rng.randint(1, min(2, len(rest))))
        fds.append((lhs, rhs))
    if not fds:
        fds = [([], [attrs[0]])]
    schema = kc.FdSchema.of(attrs, fds)
    assert kc.decide_lhs_chain(schema).is_chain_equivalent
    return schema


def random_any_schema(rng, d):
    """Arbitrary FD sets, chain or not, for schema-level property tests."""
    attrs = ATTR_POOL[:d]
    fds = []
    for _ in range(rng.randint(0, 4)):
        lhs = rng.sample(attrs, rng.randint(0, d - 1))
        rest = [a for a in attrs if a not in lhs] or list(attrs)
        rhs = rng.sample(rest, rng.randint(1, min(2, len(rest))))
        fds.append((lhs, rhs))
    return kc.FdSchema.of(attrs, fds)


def _random_ordering(rng, ds):
    if rng.random() < 0.5:
        ranked = list(ds.ids())
        rng.shuffle(ranked)
        return kc.Ordering(tuple(ranked), source="explicit")
    p = rng.choice((1, 2))
    x = kc.TestPoint(tuple(rng.randint(0, 3) for _ in ds.features))
    return kc.order_by_distance(ds, x, p)


def random_chain_instance(rng, n_max=12, d_max=4, max_labels=3, weighted=False):
    """A random chain-schema instance with plenty of conflicts, plus an
    ordering (explicit or distance-based, mixed)."""
    d = rng.randint(1, d_max)
    schema = random_chain_schema(rng, d)
    n = rng.randint(1, n_max)
    domain = max(2, n // 2)
    alphabet = [str(i) for i in range(rng.randint(1, max_labels))]
    rows = []
    for _ in range(n):
        values = tuple(rng.randint(0, domain) for _ in range(d))
        label = rng.choice(alphabet)
        if weighted:
            rows.append((values, label, Fraction(rng.randint(1, 8), rng.choice((1, 2)))))
        else:
            rows.append((values, label))
    features = tuple(rng.sample(schema.attributes, rng.randint(1, d)))
    ds = kc.make_dataset(schema, rows, features=features, labels=alphabet)
    return ds, _random_ordering(rng, ds)


def random_keyed_instance(rng, n_max=12, max_labels=3, extra_attr=False):
    """A primary-key instance with distinct rows inside every block."""
    attrs = ("K", "V", "W") if extra_attr else ("K", "V")
    schema = kc.FdSchema.of(attrs, [(["K"], list(attrs[1:]))])
    n = rng.randint(1, n_max)
    num_blocks = rng.randint(1, max(1, n // 2 + 1))
    alphabet = [str(i) for i in range(rng.randint(1, max_labels))]
    counters = {}
    rows = []
    for _ in range(n):
        block = rng.randrange(num_blocks)
        counters[block] = counters.get(block, 0) + 1
        values = (block, counters[block]) + ((rng.randint(0, 3),) if extra_attr else ())
        rows.append((values, rng.choice(alphabet)))
    ds = kc.make_dataset(schema, rows, features=("K", "V"), labels=alphabet)
    return ds, _random_ordering(rng, ds)


def brute_max_diff(ds, ordering, label, ref_label, tau, k):
    """Independent oracle for the certification table: classify every repair
    by its prefix size and take per-size maxima of the label difference."""
    rows = [None] * (k + 1)
    for repair in oracle.enumerate_repairs(ds).repairs:
        prefix = [t for t in repair if ordering.rank_of[t] <= tau]
        if len(prefix) > k:
            continue
        diff = sum(1 for t in prefix if ds.tuples[t].label == label) - sum(
            1 for t in prefix if ds.tuples[t].label == ref_label
        )
        i = len(prefix)
        if rows[i] is None or diff > rows[i]:
            rows[i] = diff
    return rows


def satisfiable(phi) -> bool:
    for bits in itertools.product((False, True), repeat=phi.num_vars):
        if all(any((lit > 0) == bits[abs(lit) - 1] for lit in clause) for clause in phi.clauses):
            return True
    return False


def all_formulas(num_vars):
    """Exhaustive occurrence-disciplined formulas, canonical up to clause and
    literal order."""
    tokens = []
    for j in range(1, num_vars + 1):
        tokens += [j, j, -j]
    total = len(tokens)
    seen = set()
    out = []
    for m in range(1, total + 1):
        for assign in itertools.product(range(m), repeat=total):
            sizes = [0] * m
            ok = True
            for c in assign:
                sizes[c] += 1
                if sizes[c] > 3:
                    ok = False
                    break
            if not ok or 0 in sizes:
                continue
            clauses = [[] for _ in range(m)]
            for tok, c in zip(tokens, assign):
                clauses[c].append(tok)
            canon = tuple(sorted(tuple(sorted(cl)) for cl in clauses))
            if canon not in seen:
                seen.add(canon)
                out.append(hardgen.Sat3R(num_vars, canon))
    return out
