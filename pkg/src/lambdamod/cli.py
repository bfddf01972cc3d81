"""Command-line front end.

Every command writes one JSON record (or CSV) to stdout.  Diagnostics go to
stderr.  Exit codes: 0 success or true, 1 false, 2 usage error, 3 budget
exceeded, 4 verification failure.

Module specs look like ``2^2^1 x 2^1^1; 3,0; 1,1``: the group as factors
``p^e^n`` (n copies of Z_{p^e}) joined by ``x``, then the rows of the
matrix of t.  Omitting the rows means t = 1.  The zero module is ``p^1^0``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from . import polys
from .algebra import GroupShape, StructuredMatrix
from .conjugacy import are_conjugate_oracle, within_budget
from .decomposition import LambdaModule, lambda_isomorphic, log_p
from .errors import BudgetExceeded, PreconditionError, ShapeError
from .quandle import (
    BRUTEFORCE_LIMIT,
    QuandleTable,
    count_connected,
    count_quandles,
    enumerate_quandles,
    extend,
    extend_padded,
    quandle_isomorphism,
    quandles_isomorphic,
)
from .tables import MAX_N, count_modules, enumerate_modules, image_order, verify_table

SCHEMA_VERSION = "1.0"
CSV_COLUMNS = ("p", "n", "shape", "family", "params", "matrix", "image_order")
QUANDLE_CSV_COLUMNS = ("p", "n", "order", "module", "image", "family", "params", "connected")

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@lru_cache(maxsize=1)
def output_schema() -> dict:
    text = resources.files("lambdamod").joinpath("output_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_record(record: dict) -> None:
    jsonschema.validate(record, output_schema())


# -- module specs ---------------------------------------------------------------


def parse_module(spec: str) -> LambdaModule:
    parts = [s.strip() for s in spec.split(";")]
    head, rows = parts[0], [r for r in parts[1:] if r]
    p = None
    exps: list[int] = []
    for term in head.split("x"):
        bits = term.strip().split("^")
        if len(bits) not in (2, 3) or not all(b.strip().lstrip("-").isdigit() for b in bits):
            raise UsageError(f"bad factor {term.strip()!r}, expected p^e^n")
        q, e = int(bits[0]), int(bits[1])
        mult = int(bits[2]) if len(bits) == 3 else 1
        if p is not None and q != p:
            raise UsageError("all factors must use the same prime")
        p = q
        if e < 1 or mult < 0:
            raise UsageError(f"bad factor {term.strip()!r}")
        exps += [e] * mult
    try:
        polys.check_prime(p)
    except ValueError:
        raise UsageError("p must be prime") from None
    shape = GroupShape.from_exponents(p, exps)
    if shape.rank == 0:
        if rows:
            raise UsageError("the zero module takes no matrix")
        return LambdaModule.zero(p)
    if not rows:
        return LambdaModule(shape, StructuredMatrix.identity(shape))
    try:
        matrix = [[int(x) for x in r.split(",")] for r in rows]
    except ValueError:
        raise UsageError("matrix entries must be integers") from None
    if len(matrix) != shape.rank or any(len(r) != shape.rank for r in matrix):
        raise UsageError(f"matrix must be {shape.rank}x{shape.rank}")
    if exps != sorted(exps, reverse=True):
        raise UsageError("list the factors with exponents in decreasing order")
    try:
        return LambdaModule.from_rows(shape, matrix)
    except (ShapeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def module_spec(module: LambdaModule) -> str:
    if module.shape.rank == 0:
        return module.shape.spec()
    rows = "; ".join(",".join(str(x) for x in r) for r in module.action.entries)
    return f"{module.shape.spec()}; {rows}"


def module_record(module: LambdaModule) -> dict:
    return {
        "shape": module.shape.describe(),
        "spec": module_spec(module),
        "matrix": [list(r) for r in module.action.entries],
    }


def _matrix(m: StructuredMatrix) -> list[list[int]]:
    return [list(r) for r in m.entries]


# -- commands -------------------------------------------------------------------


def _check_pn(p: int, n: int) -> None:
    try:
        polys.check_prime(p)
    except ValueError:
        raise UsageError("p must be prime") from None
    if not 0 <= n <= MAX_N:
        raise UsageError(f"n must be between 0 and {MAX_N}")


def cmd_classify(args) -> tuple[int, dict]:
    _check_pn(args.p, args.n)
    report = enumerate_modules(args.p, args.n)
    rows = [
        {
            "shape": row.shape.describe(),
            "family": row.family,
            "params": dict(row.parameters),
            "matrix": _matrix(row.module.action),
            "image_order": row.image_order,
        }
        for row in report.rows
    ]
    payload = {
        "p": args.p,
        "n": args.n,
        "rows": rows,
        "totals": {
            "per_shape": dict(report.per_shape),
            "per_stratum": {str(args.p**k): v for k, v in sorted(report.per_stratum.items())},
        },
        "grand_total": report.grand_total,
        "expected_total": count_modules(args.p, args.n),
    }
    return EXIT_OK, payload


def cmd_quandles(args) -> tuple[int, dict]:
    _check_pn(args.p, args.n)
    entries = enumerate_quandles(args.p, args.n, connected_only=args.connected)
    out = []
    for e in entries:
        image = module_record(e.image)
        image.update(family=e.family, params=dict(e.parameters), image_order=e.image.order)
        item = {
            "order": e.module.order,
            "module": module_record(e.module),
            "image": image,
            "connected": e.connected,
        }
        if args.table:
            item["table"] = e.table.op.tolist()
            e.table.drop_table()
        out.append(item)
    expected = count_connected(args.p, args.n) if args.connected else count_quandles(args.p, args.n)
    payload = {
        "p": args.p,
        "n": args.n,
        "connected_only": bool(args.connected),
        "count": len(out),
        "expected_count": expected,
        "quandles": out,
    }
    return EXIT_OK, payload


def cmd_verify(args) -> tuple[int, dict]:
    _check_pn(args.p, args.n)
    report = verify_table(args.p, args.n)
    payload = {
        "p": args.p,
        "n": args.n,
        "ok": report.ok,
        "partial": report.partial,
        "checks": {
            name: {"status": c.status, "failures": list(c.failures), "notes": list(c.notes)}
            for name, c in report.checks.items()
        },
    }
    return (EXIT_OK if report.ok else EXIT_VERIFY), payload


def cmd_extend(args) -> tuple[int, dict]:
    source = parse_module(args.module)
    if args.target_exponent is None:
        res = extend(source)
    else:
        res = extend_padded(source, args.target_exponent)
    m = res.extended
    images = res.embed_all()
    inclusion = [
        {"from": [int(v) for v in x], "to": [int(v) for v in y]}
        for x, y in zip(source.elements if source.order > 1 else np.zeros((1, 0), dtype=np.int64), images)
    ]
    i = log_p(source.p, source.order)
    j = log_p(source.p, image_order(source))
    final = 2 * i - j if args.target_exponent is None else args.target_exponent
    index = m.order // source.order
    image_ok, carries_t = res.image_matches(), res.intertwines()
    ok = image_ok and carries_t and index == source.p ** (final - i)
    payload = {
        "input": module_record(source),
        "target_exponent": args.target_exponent,
        "extended": module_record(m),
        "inclusion": inclusion,
        "steps": [
            {
                "case": s.case,
                "coordinate": s.coordinate,
                "exponents_before": list(s.exponents_before),
                "exponents_after": list(s.exponents_after),
                "index": s.index,
                "rank_preserved": s.rank_preserved,
            }
            for s in res.steps
        ],
        "verification": {
            "image_equals_input": bool(image_ok),
            "intertwines": bool(carries_t),
            "index": index,
            "expected_index": source.p ** (final - i),
        },
    }
    return (EXIT_OK if ok else EXIT_VERIFY), payload


def _module_witness(a: LambdaModule, b: LambdaModule):
    if a.shape.rank == 0 or not within_budget(a.shape):
        return None
    p = are_conjugate_oracle(a.action, b.action)
    return None if p is None else _matrix(p.conjugator)


def cmd_isomorphic(args) -> tuple[int, dict]:
    a, b = parse_module(args.a), parse_module(args.b)
    if args.quandles:
        result = quandles_isomorphic(a, b)
        witness = None
        if result and a.order <= BRUTEFORCE_LIMIT:
            witness = quandle_isomorphism(QuandleTable(origin=a), QuandleTable(origin=b))
        method = "image-modules"
        payload_witness = None if witness is None else {"bijection": [int(v) for v in witness]}
    else:
        result = lambda_isomorphic(a, b)
        witness = _module_witness(a, b) if result else None
        method = "conjugacy"
        payload_witness = None if witness is None else {"conjugator": witness}
    payload = {
        "mode": "quandles" if args.quandles else "modules",
        "a": module_record(a),
        "b": module_record(b),
        "isomorphic": bool(result),
        "witness": payload_witness,
        "method": method,
    }
    return (EXIT_OK if result else EXIT_FALSE), payload


# -- output ---------------------------------------------------------------------


def _params_text(params: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in params.items())


def _compact(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def render_csv(command: str, payload: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION} command={command}\n")
    w = csv.writer(buf, lineterminator="\n")
    if command == "classify":
        w.writerow(CSV_COLUMNS)
        for r in payload["rows"]:
            w.writerow(
                [payload["p"], payload["n"], r["shape"], r["family"], _params_text(r["params"]),
                 _compact(r["matrix"]), r["image_order"]]
            )
    else:
        w.writerow(QUANDLE_CSV_COLUMNS)
        for q in payload["quandles"]:
            w.writerow(
                [payload["p"], payload["n"], q["order"], q["module"]["spec"], q["image"]["spec"],
                 q["image"]["family"], _params_text(q["image"]["params"]), str(q["connected"]).lower()]
            )
    return buf.getvalue()


def render_json(command: str, payload: dict) -> str:
    record = {"schema_version": SCHEMA_VERSION, "command": command, "payload": payload}
    validate_record(record)
    return json.dumps(record, separators=(",", ":")) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lambdamod", description=__doc__.split("\n\n")[0])
    parser.add_argument("--seed", type=int, default=None, help="seed for optional shuffling in property tests")
    sub = parser.add_subparsers(dest="command", required=True)

    def pn(sp):
        sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--n", type=int, required=True)

    sp = sub.add_parser("classify", help="canonical modules of order p^n")
    pn(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("quandles", help="Alexander quandles of order p^n")
    pn(sp)
    sp.add_argument("--connected", action="store_true")
    sp.add_argument("--table", action="store_true", help="include operation tables")
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("verify", help="check the table against brute force")
    pn(sp)

    sp = sub.add_parser("extend", help="module M with (1-t)M equal to the given module")
    sp.add_argument("module")
    sp.add_argument("--target-exponent", type=int, default=None)

    sp = sub.add_parser("isomorphic", help="isomorphism test")
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--modules", action="store_true")
    mode.add_argument("--quandles", action="store_true")
    sp.add_argument("a")
    sp.add_argument("b")
    return parser


COMMANDS = {
    "classify": cmd_classify,
    "quandles": cmd_quandles,
    "verify": cmd_verify,
    "extend": cmd_extend,
    "isomorphic": cmd_isomorphic,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None:
        random.seed(args.seed)
    try:
        status, payload = COMMANDS[args.command](args)
    except (UsageError, PreconditionError) as exc:
        print(f"lambdamod: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"lambdamod: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    if getattr(args, "format", "json") == "csv":
        sys.stdout.write(render_csv(args.command, payload))
    else:
        sys.stdout.write(render_json(args.command, payload))
    return status


if __name__ == "__main__":
    sys.exit(main())
