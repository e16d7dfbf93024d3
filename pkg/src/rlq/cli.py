"""Command-line front end: ``rlq <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from rlq.curves import INF
from rlq.distributions import parse_distribution
from rlq.errors import InvalidInputError, NumericalFailure
from rlq.lambda_core import ALL_KINDS, QuantileKind, StepLambda, lambda_quantile
from rlq.robust_engine import (
    AggregationSet,
    FiniteSet,
    MomentSet,
    WassersteinBall,
    extremal_curve,
    parse_set,
    robust_lambda_quantile,
)

KIND_CHOICES = [k.value for k in ALL_KINDS] + ["all"]


def _num(v):
    """JSON-safe number: infinities become strings."""
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _fmt(v):
    return repr(float(v))


def _kinds(text):
    return list(ALL_KINDS) if text == "all" else [QuantileKind.parse(text)]


def _default_seed():
    raw = os.environ.get("RLQ_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"RLQ_SEED must be an integer, got {raw!r}") from exc


def parse_grid(text):
    """``lo:hi:step`` into an array of points including both ends."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise InvalidInputError(f"grid must look like lo:hi:step, got {text!r}") from exc
    if not (math.isfinite(lo) and math.isfinite(hi) and step > 0 and hi > lo):
        raise InvalidInputError(f"grid needs finite lo < hi and step > 0, got {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if n > 10_000_000:
        raise InvalidInputError("grid has too many points")
    return lo + step * np.arange(n)


def parse_vector(text):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise InvalidInputError(f"expected comma-separated numbers, got {text!r}") from exc


def parse_matrix(text):
    """Rows separated by ';', entries by ','."""
    rows = [parse_vector(r) for r in text.split(";")]
    if len({r.size for r in rows}) != 1:
        raise InvalidInputError(f"matrix rows differ in length: {text!r}")
    return np.vstack(rows)


class _Output:
    def __init__(self, path):
        self.path = path
        self.buf = io.StringIO()

    def __enter__(self):
        return self.buf

    def __exit__(self, *exc):
        if exc[0] is not None:
            return False
        text = self.buf.getvalue()
        if self.path:
            with open(self.path, "w", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return False


def _write_rows(out, header, rows, fmt):
    if fmt == "json":
        for r in rows:
            out.write(json.dumps({k: _num(v) for k, v in zip(header, r)}) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])


# ---------------------------------------------------------------- commands


def cmd_quantile(args):
    dist = parse_distribution(args.dist)
    lam = StepLambda.parse(args.lam)
    vals = {k.value: _num(lambda_quantile(dist, lam, k)) for k in _kinds(args.kind)}
    if args.kind != "all":
        print(json.dumps({"kind": args.kind, "value": vals[args.kind]}))
    else:
        print(json.dumps(vals))
    return 0


def cmd_envelope(args):
    uset = parse_set(args.set)
    curve = extremal_curve(uset, args.side)
    xs = parse_grid(args.grid)
    rows = [(float(x), float(curve(float(x)))) for x in xs]
    with _Output(args.out) as out:
        _write_rows(out, ["x", "value"], rows, args.format)
    return 0


def cmd_robust(args):
    uset = parse_set(args.set)
    lam = StepLambda.parse(args.lam)
    results = [robust_lambda_quantile(uset, lam, k, args.dir).to_dict() for k in _kinds(args.kind)]
    print(json.dumps(results[0] if args.kind != "all" else results))
    return 0


def _portfolio_problem(args):
    from rlq import portfolio

    lam = StepLambda.parse(args.lam)
    kind = QuantileKind.parse(args.kind)
    if args.model == "aggregation":
        if not args.marginal:
            raise InvalidInputError("--marginal is required for the aggregation model")
        return portfolio.AggregationPortfolio(parse_distribution(args.marginal), args.assets, lam, kind, args.t)
    if args.mu is None or args.cov is None:
        raise InvalidInputError("--mu and --cov are required for this model")
    mu, cov = parse_vector(args.mu), parse_matrix(args.cov)
    if args.model == "moment":
        return portfolio.MomentPortfolio(mu, cov, lam, kind)
    return portfolio.WassersteinPortfolio(mu, cov, lam, kind, dof=args.dof, a=args.a, p=args.p, eps=args.eps)


def cmd_portfolio(args):
    from rlq import portfolio

    problem = _portfolio_problem(args)
    n = problem.n
    res = portfolio.optimize_weights(problem, grid=args.points)
    if n == 2:
        header = ["w1", "value", "exactness"]
        rows = [(w1, float(r.value), r.exactness.value) for w1, r in res.profile]
    else:
        header = [f"w{i + 1}" for i in range(n)] + ["value", "exactness"]
        rows = [tuple(float(v) for v in w) + (float(r.value), r.exactness.value) for w, r in res.profile]
    summary = json.dumps({"weights": [float(v) for v in res.weights], "value": _num(float(res.value)),
                          "exactness": res.result.exactness.value})
    with _Output(args.out) as out:
        _write_rows(out, header, rows, args.format)
    print(summary, file=sys.stdout if args.out else sys.stderr)
    return 0


def _members(uset, samples, seed):
    from rlq import oracles

    if isinstance(uset, MomentSet):
        return oracles.mc_feasible_moment(uset, samples, seed)
    if isinstance(uset, WassersteinBall):
        return oracles.mc_feasible_wasserstein(uset, samples, seed)
    if isinstance(uset, AggregationSet):
        return oracles.random_aggregation_members(uset.marginals, samples, seed)
    if isinstance(uset, FiniteSet):
        return list(uset.members)
    raise InvalidInputError(f"no sampler for {type(uset).__name__}")


def verify_report(uset, lam, kinds, direction, samples, seed, tol):
    members = _members(uset, samples, seed)
    violations, max_gap = 0, -INF
    for kind in kinds:
        bound = robust_lambda_quantile(uset, lam, kind, direction).value
        for m in members:
            v = lambda_quantile(m, lam, kind)
            gap = v - bound if direction == "sup" else bound - v
            if math.isnan(gap):
                gap = 0.0
            max_gap = max(max_gap, gap)
            if gap > tol:
                violations += 1
    return {"violations": violations, "max_gap": _num(float(max_gap)), "samples": len(members),
            "kinds": [k.value for k in kinds], "direction": direction, "seed": seed}


def cmd_verify(args):
    uset = parse_set(args.set)
    lam = StepLambda.parse(args.lam)
    seed = _default_seed() if args.seed is None else args.seed
    report = verify_report(uset, lam, _kinds(args.kind), args.dir, args.samples, seed, args.tol)
    print(json.dumps(report))
    return 0


# ---------------------------------------------------------------- reproduction


def load_reference():
    text = resources.files("rlq").joinpath("data/reference_tables.json").read_text()
    return json.loads(text)


def table_cells(number, reference=None):
    """One record per cell of a reference table: computed vs published."""
    ref = reference or load_reference()
    entry = ref["tables"][str(number)]
    tol = ref["tolerance"]
    lam = StepLambda.parse(entry["lambda"])
    cells = []
    for row in entry["rows"]:
        for j, kind in enumerate(ALL_KINDS):
            if row["source"] == "member":
                value, tag = lambda_quantile(parse_distribution(row["dist"]), lam, kind), "exact"
            else:
                r = robust_lambda_quantile(parse_set(row["set"]), lam, kind, row["source"])
                value, tag = r.value, r.exactness.value
            published = row["published"][j]
            derived = row.get("derived", [None] * 4)[j]
            normative = row["normative"][j]
            diff = abs(value - published)
            if not normative:
                status = "flagged"
            elif diff <= tol:
                status = "ok"
            else:
                status = "mismatch"
            cells.append({
                "table": int(number), "row": row["label"], "kind": kind.value, "computed": value,
                "published": published, "abs_diff": diff, "normative": normative,
                "derived": derived, "exactness": tag, "status": status,
            })
    return cells


def figure_series(number, points=201, reference=None):
    """Worst-case profiles over w1 for every mean/covariance pair of a figure,
    plus the constant-level comparison curve."""
    from rlq import portfolio

    ref = reference or load_reference()
    entry = ref["figures"][str(number)]
    lams = [("lambda", StepLambda.parse(entry["lambda"])),
            ("level", StepLambda.constant(ref["comparison_level"]))]
    rows = []
    for i, mu in enumerate(entry["means"]):
        for j, cov in enumerate(ref["covariances"]):
            for tag, lam in lams:
                if entry["model"] == "moment":
                    prob = portfolio.MomentPortfolio(mu, cov, lam)
                else:
                    prob = portfolio.WassersteinPortfolio(mu, cov, lam, dof=entry["dof"], a=entry["a"],
                                                          p=entry["p"], eps=entry["eps"])
                name = f"mu{i + 1}_cov{j + 1}_{tag}"
                for w1, r in portfolio.profile_two_assets(prob, points):
                    rows.append((name, w1, float(r.value), r.exactness.value))
    return rows


def cmd_reproduce(args):
    if (args.table is None) == (args.figure is None):
        raise InvalidInputError("give exactly one of --table or --figure")
    if args.table is not None:
        cells = table_cells(args.table)
        header = ["table", "row", "kind", "computed", "published", "abs_diff", "normative", "derived",
                  "exactness", "status"]
        rows = [tuple(c[h] if not isinstance(c[h], bool) else str(c[h]).lower() for h in header) for c in cells]
        rows = [tuple("" if v is None else v for v in r) for r in rows]
        with _Output(args.out) as out:
            _write_rows(out, header, rows, args.format)
        flagged = sum(c["status"] == "flagged" for c in cells)
        mismatched = sum(c["status"] == "mismatch" for c in cells)
        report = {"table": args.table, "cells": len(cells), "flagged": flagged, "mismatch": mismatched}
        print(json.dumps(report), file=sys.stdout if args.out else sys.stderr)
        return 0
    rows = figure_series(args.figure, args.points)
    with _Output(args.out) as out:
        _write_rows(out, ["series", "w1", "value", "exactness"], rows, args.format)
    return 0


# ---------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(prog="rlq", description="Robust Lambda-quantiles")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, kind=True, lam=True):
        if lam:
            p.add_argument("--lambda", dest="lam", required=True, help="step:l0,b1,l1,...")
        if kind:
            p.add_argument("--kind", default="qminus", choices=KIND_CHOICES)
        p.add_argument("--out", default=None)
        p.add_argument("--format", default="csv", choices=["csv", "json"])
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("quantile", help="Lambda-quantile of one distribution")
    p.add_argument("--dist", required=True)
    common(p)
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("envelope", help="tabulate a lower/upper cdf bound")
    p.add_argument("--set", required=True)
    p.add_argument("--side", default="lower", choices=["lower", "upper"])
    p.add_argument("--grid", required=True, help="lo:hi:step")
    common(p, kind=False, lam=False)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("robust", help="worst/best Lambda-quantile over a set")
    p.add_argument("--set", required=True)
    p.add_argument("--dir", default="sup", choices=["sup", "inf"])
    common(p)
    p.set_defaults(func=cmd_robust)

    p = sub.add_parser("portfolio", help="worst-case profile and optimal weights")
    p.add_argument("--model", required=True, choices=["moment", "wasserstein", "aggregation"])
    p.add_argument("--mu")
    p.add_argument("--cov", help="rows separated by ';'")
    p.add_argument("--marginal")
    p.add_argument("--assets", type=int, default=2)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--dof", type=float, default=3.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--points", type=int, default=None, help="grid size (n=2) or lattice resolution")
    common(p)
    p.set_defaults(func=cmd_portfolio, kind="qtildeminus")

    p = sub.add_parser("verify", help="check a robust value against sampled members")
    p.add_argument("--set", required=True)
    p.add_argument("--dir", default="sup", choices=["sup", "inf"])
    p.add_argument("--samples", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", help="reference tables and figure profiles")
    p.add_argument("--table", type=int, choices=[1, 2, 3, 4])
    p.add_argument("--figure", type=int, choices=[1, 2, 3, 4])
    p.add_argument("--points", type=int, default=201)
    common(p, kind=False, lam=False)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"rlq: error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"rlq: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
