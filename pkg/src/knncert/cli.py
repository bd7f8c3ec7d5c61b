"""Command-line surface.

Exit codes: 0 robust (or plain success), 1 not robust, 2 input error,
3 schema outside the tractable class, 4 enumeration cap exceeded. Results
are JSON on stdout with sorted keys, so identical inputs produce identical
bytes. ``certify`` dispatches by schema shape: a primary-key equivalent
goes to the linear scan, any other lhs-chain equivalent to the DP, and
anything else is refused with a pointer at the ``oracle`` subcommands,
whose exponential enumeration is opt-in and capped.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Optional

from . import certify_dp, counting, fastscan, hardgen, ingest, minrepair, models, oracle
from .certresult import CertResult
from .dataset import LabeledDataset, Ordering, order_by_distance, predict
from .errors import CapExceededError, InputError, NotChainError, NotPrimaryKeyError
from .fdschema import decide_lhs_chain

EXIT_OK = 0
EXIT_NOT_ROBUST = 1
EXIT_INPUT = 2
EXIT_NOT_CHAIN = 3
EXIT_CAP = 4


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def _outcome_json(outcome) -> dict:
    if outcome.kind == "label":
        return {"kind": "label", "label": outcome.label}
    return {"kind": outcome.kind}


def _result_json(result: CertResult, dataset: LabeledDataset, ordering: Ordering, k: int,
                 weighted: bool = False) -> dict:
    witnesses = []
    for ids, outcome in result.witnesses:
        check = predict(dataset, ids, ordering, k, weighted=weighted)
        if check != outcome:
            raise AssertionError("witness failed re-verification at emission")
        witnesses.append({"repair_ids": sorted(ids), "predicted": _outcome_json(outcome)})
    return {
        "robust": result.robust,
        "certain_label": result.certain_label,
        "possible_labels": list(result.possible_labels),
        "witnesses": witnesses,
    }


def _load_instance(args, need_schema: bool = True):
    schema = ingest.load_schema(args.schema) if args.schema else None
    if need_schema and schema is None:
        raise InputError("--schema is required for this command")
    features = [f for f in (args.features or "").split(",") if f]
    dataset, ranks, uncertain = ingest.load_dataset(args.data, schema, features)
    if args.use_rank:
        ordering = ingest.ordering_from_ranks(ranks)
    else:
        point = ingest.parse_point(args.point or "", len(features))
        ordering = order_by_distance(dataset, point, args.p)
    return dataset, ordering, uncertain


def _cmd_check_schema(args) -> int:
    schema = ingest.load_schema(args.schema)
    decision = decide_lhs_chain(schema)
    _emit({"lhs_chain": decision.is_chain_equivalent, "trace": list(decision.trace)})
    return EXIT_OK


def _cmd_certify(args) -> int:
    dataset, ordering, _ = _load_instance(args)
    method: Optional[str] = None
    result: Optional[CertResult] = None
    if not args.weighted and not args.force_dp:
        try:
            result = fastscan.certify_pk(dataset, ordering, args.k)
            method = "fastscan"
        except NotPrimaryKeyError:
            result = None
    if result is None:
        if not decide_lhs_chain(dataset.schema).is_chain_equivalent:
            raise NotChainError(
                "schema has no lhs-chain equivalent; certification is intractable "
                "in general. Use the 'oracle certify' subcommand (capped enumeration)."
            )
        result = certify_dp.certify(dataset, ordering, args.k, weighted=args.weighted)
        method = "dp"
    payload = _result_json(result, dataset, ordering, args.k, weighted=args.weighted)
    payload["method"] = method
    _emit(payload)
    return EXIT_OK if result.robust else EXIT_NOT_ROBUST


def _cmd_count(args) -> int:
    dataset, ordering, _ = _load_instance(args)
    if not decide_lhs_chain(dataset.schema).is_chain_equivalent:
        raise NotChainError("counting requires an lhs-chain-equivalent schema")
    count = counting.count_label(dataset, ordering, args.k, args.label)
    total = counting.count_repairs(dataset)
    _emit({"label": args.label, "count": str(count), "total_repairs": str(total)})
    return EXIT_OK


def _cmd_min_repair(args) -> int:
    schema = ingest.load_schema(args.schema)
    dataset, _, _ = ingest.load_dataset(args.data, schema, [])
    if not decide_lhs_chain(dataset.schema).is_chain_equivalent:
        raise NotChainError("min-repair requires an lhs-chain-equivalent schema")
    repair, weight = minrepair.min_rep(dataset)
    _emit({"repair_ids": sorted(repair), "weight": ingest.format_value(weight)})
    return EXIT_OK


def _cmd_forbidden(args) -> int:
    schema = ingest.load_schema(args.schema)
    dataset, _, _ = ingest.load_dataset(args.data, schema, [])
    if not decide_lhs_chain(dataset.schema).is_chain_equivalent:
        raise NotChainError("forbidden-repair requires an lhs-chain-equivalent schema")
    try:
        forbidden = [int(t) for t in args.ids.split(",") if t.strip() != ""]
    except ValueError:
        raise InputError(f"--ids must be comma-separated integers, got {args.ids!r}") from None
    repair = minrepair.forbidden_repair(dataset, forbidden)
    _emit(
        {
            "exists": repair is not None,
            "repair_ids": sorted(repair) if repair is not None else None,
        }
    )
    return EXIT_OK


def _cmd_poison(args) -> int:
    dataset, ordering, uncertain = _load_instance(args, need_schema=False)
    if uncertain is None:
        uncertain = frozenset(dataset.ids())
    q = models.QSetInstance(dataset, frozenset(uncertain), args.budget)
    result = models.qset_certify(q, ordering, args.k)
    payload = _result_json(result, dataset, ordering, args.k)
    payload["budget"] = args.budget
    payload["uncertain_count"] = len(uncertain)
    _emit(payload)
    return EXIT_OK if result.robust else EXIT_NOT_ROBUST


def _cmd_codd(args) -> int:
    attrs, rows = ingest.load_uncertain_table(args.data)
    features = [f for f in (args.features or "").split(",") if f]
    point = ingest.parse_point(args.point or "", len(features))
    for cells, _ in rows:
        if any(isinstance(c, models.OrSetCell) for c in cells):
            raise InputError("or-set cells are not allowed in codd-certify input")
    keyed, roles = models.codd_extremal_instance(attrs, rows, point, args.p, features)
    ordering = order_by_distance(keyed.dataset, point, args.p)
    result = fastscan.certify_pk(keyed, ordering, args.k)
    payload = _result_json(result, keyed.dataset, ordering, args.k)
    for witness in payload["witnesses"]:
        witness["completions"] = [
            {"row": roles[t][0], "completion": roles[t][1]} for t in witness.pop("repair_ids")
        ]
    _emit(payload)
    return EXIT_OK if result.robust else EXIT_NOT_ROBUST


def _cmd_orset(args) -> int:
    attrs, rows = ingest.load_uncertain_table(args.data)
    features = [f for f in (args.features or "").split(",") if f]
    point = ingest.parse_point(args.point or "", len(features))
    for cells, _ in rows:
        if any(isinstance(c, models.CoddCell) for c in cells):
            raise InputError("interval cells are not allowed in orset-certify input")
    keyed = models.orset_expand(attrs, rows, features, cap=args.cap)
    ordering = order_by_distance(keyed.dataset, point, args.p)
    result = fastscan.certify_pk(keyed, ordering, args.k)
    payload = _result_json(result, keyed.dataset, ordering, args.k)
    payload["expanded_tuples"] = keyed.dataset.size
    _emit(payload)
    return EXIT_OK if result.robust else EXIT_NOT_ROBUST


def _cmd_gen_hard(args) -> int:
    phi = ingest.load_formula(args.formula)
    target = ingest.load_schema(args.schema)
    inst = hardgen.generate(phi, target, k=args.k, p=args.p)
    ingest.write_dataset_csv(args.out, inst.dataset)
    point_doc = {
        "point": [ingest.format_value(c) for c in inst.test_point.coords],
        "features": list(inst.dataset.features),
        "k": args.k,
        "p": args.p,
    }
    with open(args.point_out, "w") as fh:
        json.dump(point_doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _emit(
        {
            "tuples": inst.dataset.size,
            "alpha": inst.alpha,
            "scale": inst.scale,
            "clauses": len(phi.clauses),
            "vars": phi.num_vars,
            "out": args.out,
            "point_out": args.point_out,
        }
    )
    return EXIT_OK


def _cmd_gen_formula(args) -> int:
    rng = random.Random(args.seed)
    phi = hardgen.random_formula(rng, args.vars)
    ingest.write_formula(args.out, phi)
    _emit({"vars": phi.num_vars, "clauses": len(phi.clauses), "out": args.out})
    return EXIT_OK


def _cmd_oracle(args) -> int:
    dataset, ordering, _ = _load_instance(args)
    if args.oracle_cmd == "certify":
        result = oracle.brute_certify(dataset, ordering, args.k, cap=args.cap)
        payload = _result_json(result, dataset, ordering, args.k)
        payload["repairs"] = len(oracle.enumerate_repairs(dataset, cap=args.cap).repairs)
        _emit(payload)
        return EXIT_OK if result.robust else EXIT_NOT_ROBUST
    if args.oracle_cmd == "count":
        count = oracle.brute_count(dataset, ordering, args.k, args.label, cap=args.cap)
        total = len(oracle.enumerate_repairs(dataset, cap=args.cap).repairs)
        _emit({"label": args.label, "count": str(count), "total_repairs": str(total)})
        return EXIT_OK
    repair, weight = oracle.brute_min_repair(dataset, cap=args.cap)
    _emit({"repair_ids": sorted(repair), "weight": ingest.format_value(weight)})
    return EXIT_OK


def _add_instance_flags(sub, point: bool = True) -> None:
    sub.add_argument("--schema", default=None, help="schema JSON file")
    sub.add_argument("--data", required=True, help="dataset CSV file")
    if point:
        sub.add_argument("--features", default="", help="comma-separated feature attributes")
        sub.add_argument("--point", default=None, help="comma-separated test point coordinates")
        group = sub.add_mutually_exclusive_group()
        group.add_argument("--p", type=int, default=2, help="p-norm exponent (default 2)")
        group.add_argument(
            "--use-rank", action="store_true", help="take the ordering from the 'rank' column"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knncert")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("check-schema", help="report the lhs-chain decision")
    sub.add_argument("--schema", required=True)
    sub.set_defaults(handler=_cmd_check_schema)

    sub = commands.add_parser("certify", help="certify k-NN robustness under subset repairs")
    _add_instance_flags(sub)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--weighted", action="store_true", help="weighted majority vote")
    sub.add_argument("--force-dp", action="store_true", help="skip the primary-key fast path")
    sub.set_defaults(handler=_cmd_certify)

    sub = commands.add_parser("count", help="count repairs predicting a label")
    _add_instance_flags(sub)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--label", required=True)
    sub.set_defaults(handler=_cmd_count)

    sub = commands.add_parser("min-repair", help="minimum total-weight repair")
    sub.add_argument("--schema", required=True)
    sub.add_argument("--data", required=True)
    sub.set_defaults(handler=_cmd_min_repair)

    sub = commands.add_parser("forbidden", help="repair avoiding the given tuple ids")
    sub.add_argument("--schema", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--ids", required=True, help="comma-separated tuple ids to avoid")
    sub.set_defaults(handler=_cmd_forbidden)

    sub = commands.add_parser("poison-certify", help="certify against budgeted deletions")
    _add_instance_flags(sub)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--budget", type=int, required=True)
    sub.set_defaults(handler=_cmd_poison)

    sub = commands.add_parser("codd-certify", help="certify a table with interval cells")
    sub.add_argument("--data", required=True)
    sub.add_argument("--features", default="")
    sub.add_argument("--point", default=None)
    sub.add_argument("--p", type=int, default=2)
    sub.add_argument("--k", type=int, required=True)
    sub.set_defaults(handler=_cmd_codd)

    sub = commands.add_parser("orset-certify", help="certify a table with or-set cells")
    sub.add_argument("--data", required=True)
    sub.add_argument("--features", default="")
    sub.add_argument("--point", default=None)
    sub.add_argument("--p", type=int, default=2)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--cap", type=int, default=100_000, help="expansion size cap")
    sub.set_defaults(handler=_cmd_orset)

    sub = commands.add_parser("gen-hard", help="generate a hard instance from a formula")
    sub.add_argument("--formula", required=True)
    sub.add_argument("--schema", required=True, help="target (non-chain) schema JSON")
    sub.add_argument("--k", type=int, default=1)
    sub.add_argument("--p", type=int, default=2)
    sub.add_argument("--out", required=True, help="output dataset CSV")
    sub.add_argument("--point-out", required=True, help="output test point JSON")
    sub.set_defaults(handler=_cmd_gen_hard)

    sub = commands.add_parser("gen-formula", help="random occurrence-disciplined formula")
    sub.add_argument("--vars", type=int, required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.set_defaults(handler=_cmd_gen_formula)

    sub = commands.add_parser("oracle", help="capped brute-force ground truth")
    oracle_cmds = sub.add_subparsers(dest="oracle_cmd", required=True)
    for name in ("certify", "count", "min-repair"):
        osub = oracle_cmds.add_parser(name)
        _add_instance_flags(osub)
        osub.add_argument("--cap", type=int, default=None, help="tuple-count cap")
        if name in ("certify", "count"):
            osub.add_argument("--k", type=int, required=True)
        if name == "count":
            osub.add_argument("--label", required=True)
        osub.set_defaults(handler=_cmd_oracle)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        _emit({"error": str(exc)})
        return EXIT_INPUT
    except NotChainError as exc:
        _emit({"error": str(exc)})
        return EXIT_NOT_CHAIN
    except NotPrimaryKeyError as exc:
        _emit({"error": str(exc)})
        return EXIT_INPUT
    except CapExceededError as exc:
        _emit({"error": str(exc)})
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
