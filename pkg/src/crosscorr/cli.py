"""Command-line client for the measure/experiment service.

By default every subcommand talks to the service in process (no socket);
--server URL targets a running instance instead.  Results go to stdout as
JSON (or CSV with --format csv); diagnostics and summaries go to stderr.
Runs with the same argv and --seed print byte-identical stdout, so the
elapsed_ms field of records is zeroed on stdout; records written with
--out keep measured timings.

Exit status: 0 on success, 1 on usage/validation errors, 2 when an exact
enumeration refuses to start because it exceeds --budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import httpx

from .experiments import RECORD_FIELDS, format_record
from .measures import DEFAULT_BUDGET
from . import seqcore


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are 1
        raise _UsageError(f"{self.prog}: error: {message}")


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ",".join(_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ",".join(
            f"{json.dumps(str(k))}:{_json_value(x)}" for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {v!r}")


def _records_csv(records: list[dict], zero_elapsed: bool) -> str:
    cols = []
    for f in RECORD_FIELDS:
        if f == "witness":
            cols += ["witness_members", "witness_d", "witness_m"]
        else:
            cols.append(f)
    lines = [",".join(cols)]
    for rec in records:
        row = []
        for f in RECORD_FIELDS:
            v = rec[f]
            if f == "witness":
                row.append(";".join(str(x) for x in v["members"]))
                row.append(";".join(str(x) for x in v["d"]))
                row.append(str(v["m"]))
            elif f == "elapsed_ms" and zero_elapsed:
                row.append(_json_value(0.0))
            elif isinstance(v, bool):
                row.append("true" if v else "false")
            elif isinstance(v, float):
                row.append(format(v, ".17g"))
            else:
                row.append(str(v))
        lines.append(",".join(row))
    return "\n".join(lines)


def _object_csv(obj: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["field", "value"])
    for key, val in obj.items():
        if isinstance(val, (dict, list)):
            writer.writerow([key, _json_value(val)])
        elif isinstance(val, bool):
            writer.writerow([key, "true" if val else "false"])
        elif isinstance(val, float):
            writer.writerow([key, format(val, ".17g")])
        else:
            writer.writerow([key, val])
    return buf.getvalue().rstrip("\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="crosscorr",
                     description="correlation measures of binary sequences")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, threads=False):
        p.add_argument("--seed", type=int, default=0)
        if threads:
            p.add_argument("--threads", type=int, default=0,
                           help="worker threads; 0 = auto")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None)
        p.add_argument("--server", default=None,
                       help="base URL of a running service; default in-process")

    p = sub.add_parser("measure", help="measure sequences from a file")
    p.add_argument("--input", required=True)
    p.add_argument("--measure", choices=("c", "phi", "phitilde"),
                   default="phi")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--trials", type=int, default=100_000,
                   help="estimator samples used with --approx")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--approx", action="store_true")
    common(p, threads=True)

    p = sub.add_parser("sample", help="sample a family or generator")
    p.add_argument("--length", type=int, required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--size", type=int, help="family cardinality")
    grp.add_argument("--seeds", type=int, help="generator seed count")
    common(p)

    p = sub.add_parser("mc", help="Monte Carlo trials against the band")
    p.add_argument("--length", type=int, required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--size", type=int)
    grp.add_argument("--seeds", type=int)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--approx", action="store_true")
    common(p, threads=True)

    p = sub.add_parser("bounds", help="typical-value band endpoints")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cardinality", type=int, default=1)
    p.add_argument("--which", choices=("family", "generator", "single"),
                   default="family")
    common(p)

    p = sub.add_parser("tails", help="tail probabilities and bounds")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t", type=float, default=None)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--exact", action="store_true",
                     help="exact P(S(n) >= t)")
    grp.add_argument("--closed", type=float, metavar="C",
                     help="closed-form Gaussian tail at C")
    grp.add_argument("--integral", type=float, metavar="C",
                     help="integral-form Gaussian tail at C")
    grp.add_argument("--hoeffding", type=float, metavar="A",
                     help="exponential bound at deviation A")
    grp.add_argument("--point", type=float, metavar="C",
                     help="point-mass lower bound at offset C")
    common(p)

    p = sub.add_parser("rk", help="largest deviation passing the threshold")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seeds", type=int, required=True)
    common(p)

    p = sub.add_parser("oracle", help="exact small-case pmf of the measure")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=None,
                   help="also sample this many trials and report distance")
    common(p)

    p = sub.add_parser("collide", help="collision-free probability vs trials")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    common(p)

    return parser


def _payload(args) -> tuple[str, dict, str]:
    """(endpoint path, request body, output kind)."""
    cmd = args.command
    if cmd == "measure":
        seqs = [s.text() for s in seqcore.read_sequences(args.input)]
        if not seqs:
            raise _UsageError(f"{args.input}: no sequences")
        return "/measure", {
            "sequences": seqs, "measure": args.measure, "k": args.k,
            "k_min": args.k_min, "k_max": args.k_max, "trials": args.trials,
            "seed": args.seed, "threads": args.threads,
            "budget": args.budget, "approx": args.approx}, "records"
    if cmd == "sample":
        return "/sample", {"length": args.length, "size": args.size,
                           "seeds": args.seeds, "seed": args.seed}, "sample"
    if cmd == "mc":
        return "/mc", {
            "length": args.length, "size": args.size, "seeds": args.seeds,
            "k": args.k, "k_min": args.k_min, "k_max": args.k_max,
            "trials": args.trials, "seed": args.seed,
            "threads": args.threads, "budget": args.budget,
            "approx": args.approx}, "records"
    if cmd == "bounds":
        return "/bounds", {"length": args.length, "k": args.k,
                           "cardinality": args.cardinality,
                           "which": args.which}, "object"
    if cmd == "tails":
        if args.exact:
            body = {"mode": "exact", "n": args.n, "t": args.t}
        elif args.closed is not None:
            body = {"mode": "closed", "c": args.closed, "n": args.n}
        elif args.integral is not None:
            body = {"mode": "integral", "c": args.integral, "n": args.n}
        elif args.hoeffding is not None:
            body = {"mode": "hoeffding", "a": args.hoeffding, "n": args.n}
        else:
            body = {"mode": "point", "c": args.point, "n": args.n}
        return "/tails", body, "object"
    if cmd == "rk":
        return "/rk", {"length": args.length, "k": args.k,
                       "seeds": args.seeds}, "object"
    if cmd == "oracle":
        return "/oracle", {"length": args.length, "size": args.size,
                           "k": args.k, "trials": args.trials,
                           "seed": args.seed}, "object"
    if cmd == "collide":
        return "/collide", {"length": args.length, "seeds": args.seeds,
                            "trials": args.trials, "seed": args.seed}, "object"
    raise _UsageError(f"unknown command {cmd!r}")


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app
    return TestClient(app)


def _emit_records(args, data: dict) -> None:
    records = data["records"]
    if args.format == "json":
        for rec in records:
            print(format_record(rec, elapsed_ms=0.0))
    else:
        print(_records_csv(records, zero_elapsed=True))
    if args.out:
        with open(args.out, "a", encoding="utf-8") as fh:
            for rec in records:
                fh.write(format_record(rec))
                fh.write("\n")
    summary = data.get("summary")
    if summary is not None:
        print(_json_value(summary), file=sys.stderr)


def _emit_object(args, data: dict, kind: str) -> None:
    if args.format == "json":
        print(_json_value(data))
    else:
        print(_object_csv(data))
    if args.out:
        if kind == "sample":
            with open(args.out, "w", encoding="utf-8") as fh:
                for line in data["sequences"]:
                    fh.write(line)
                    fh.write("\n")
        else:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(_json_value(data))
                fh.write("\n")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        path, body, kind = _payload(args)
    except (_UsageError, ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 1

    try:
        with _client(args.server) as client:
            resp = client.post(path, json=body)
    except httpx.HTTPError as exc:
        print(f"request failed: {exc}", file=sys.stderr)
        return 1

    if resp.status_code == 409:
        detail = resp.json().get("detail", "refused: over budget")
        print(detail, file=sys.stderr)
        return 2
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail")
        except ValueError:
            detail = resp.text
        print(f"error ({resp.status_code}): {json.dumps(detail)}",
              file=sys.stderr)
        return 1

    data = resp.json()
    if kind == "records":
        _emit_records(args, data)
    else:
        _emit_object(args, data, kind)
    return 0


if __name__ == "__main__":
    sys.exit(main())
