import random

import pytest

import knncert as kc
from knncert import NotChainError, certify_dp, counting, oracle

import helpers


class TestCountTable:
    def test_consistent_base_case_single_cell(self):
        schema = kc.FdSchema.of(("A",), [])
        ds = kc.make_dataset(schema, [((1,), "0"), ((2,), "1")], features=("A",))
        ordering = kc.order_by_distance(ds, kc.TestPoint((0,)), 1)
        table = counting.count_table(ds, ds.ids(), "0", tau=1, k=2, ordering=ordering)
        # One repair (everything), one tuple inside tau=1, labels differ by -1.
        assert table.entries == {(1, (-1,)): 1}

    def test_independent_pairs_multiply(self):
        schema = kc.FdSchema.of(("A", "B"), [(["A"], ["B"])])
        rows = [((1, 1), "0"), ((1, 2), "0"), ((2, 1), "0"), ((2, 2), "0")]
        ds = kc.make_dataset(schema, rows, features=("B",))
        ordering = kc.Ordering((0, 1, 2, 3))
        table = counting.count_table(ds, ds.ids(), "0", tau=4, k=3, ordering=ordering)
        assert table.total() == 4

    def test_cells_match_repair_classification(self, example1):
        ds, _, ordering = example1
        k, tau = 3, 4
        table = counting.count_table(ds, ds.ids(), "0", tau, k, ordering)
        want: dict = {}
        for repair in oracle.enumerate_repairs(ds).repairs:
            prefix = [t for t in repair if ordering.rank_of[t] <= tau]
            if len(prefix) > k:
                continue
            mine = sum(1 for t in prefix if ds.tuples[t].label == "0")
            vec = tuple(
                sum(1 for t in prefix if ds.tuples[t].label == other) - mine
                for other in table.other_labels
            )
            cell = (len(prefix), vec)
            want[cell] = want.get(cell, 0) + 1
        assert table.entries == want


class TestCountLabel:
    def test_example_counts(self, example1):
        ds, _, ordering = example1
        assert counting.count_label(ds, ordering, 3, "0") == 4
        assert counting.count_label(ds, ordering, 3, "1") == 0
        assert counting.count_label(ds, ordering, 3, "2") == 0

    def test_uniform_label_counts_all_repairs(self):
        rng = random.Random(79)
        for _ in range(15):
            ds, ordering = helpers.random_chain_instance(rng, n_max=9, max_labels=1)
            total = counting.count_repairs(ds)
            assert counting.count_label(ds, ordering, 2, ds.labels[0]) == total

    def test_matches_oracle_on_randoms(self):
        rng = random.Random(83)
        for _ in range(60):
            ds, ordering = helpers.random_chain_instance(rng, n_max=10)
            k = rng.choice((1, 2, 3, 4))
            for label in ds.labels:
                got = counting.count_label(ds, ordering, k, label)
                want = oracle.brute_count(ds, ordering, k, label)
                assert got == want, (ds, k, label)

    def test_counts_plus_ties_cover_total(self):
        rng = random.Random(89)
        for _ in range(40):
            ds, ordering = helpers.random_chain_instance(rng, n_max=9)
            k = rng.choice((1, 2, 3))
            repairs = oracle.enumerate_repairs(ds).repairs
            ties = sum(
                1
                for r in repairs
                if kc.predict(ds, r, ordering, k).kind != "label"
            )
            counted = sum(counting.count_label(ds, ordering, k, lab) for lab in ds.labels)
            assert counted + ties == len(repairs)

    def test_agrees_with_certification(self):
        rng = random.Random(97)
        for _ in range(40):
            ds, ordering = helpers.random_chain_instance(rng, n_max=9)
            if ds.size == 0:
                continue
            k = rng.choice((1, 2, 3))
            res = certify_dp.certify(ds, ordering, k)
            total = counting.count_repairs(ds)
            counts = {lab: counting.count_label(ds, ordering, k, lab) for lab in ds.labels}
            if res.robust:
                assert counts[res.certain_label] == total
                assert all(c == 0 for lab, c in counts.items() if lab != res.certain_label)
            else:
                assert all(c < total for c in counts.values())

    def test_rejects_non_chain(self):
        schema = kc.FdSchema.of(("A", "B", "C"), [(["A"], ["C"]), (["B"], ["C"])])
        ds = kc.make_dataset(schema, [((1, 1, 1), "0")], features=("A",))
        with pytest.raises(NotChainError):
            counting.count_label(ds, kc.Ordering((0,)), 1, "0")


class TestBigCounts:
    def test_ten_blocks_of_two(self):
        schema = kc.FdSchema.of(("K", "V"), [(["K"], ["V"])])
        rows = [((i // 2, i % 2), "0") for i in range(20)]
        ds = kc.make_dataset(schema, rows, features=("V",))
        ordering = kc.Ordering(tuple(range(20)))
        assert counting.count_repairs(ds) == 2**10
        assert counting.count_label(ds, ordering, 3, "0") == 2**10

    def test_exact_arbitrary_precision(self):
        schema = kc.FdSchema.of(("K", "V"), [(["K"], ["V"])])
        rows = [((i // 2, i % 2), "0") for i in range(50)]
        ds = kc.make_dataset(schema, rows, features=("V",))
        assert counting.count_repairs(ds) == 2**25
