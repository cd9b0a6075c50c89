"""Scenario ingestion, backend orchestration, comparison reports, CSV output.

Scenario files are strict JSON: unknown keys are rejected so typos fail loudly.
Floats are printed with 17 significant digits, which round-trips 64-bit binary
floats exactly.  Output files are written atomically (temp file + rename).

Exit codes: 0 success/pass, 1 comparison fail, 2 input error, 3 resource error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

from .curve_geometry import AdmissibleLoop, build_loop, enclosed_area
from .diagram_engine import wilson_series
from .errors import (
    McDomainError,
    ResourceBudgetError,
    ScenarioError,
    Ym2Error,
)
from .exact_reference import exact_simple_loop
from .gauge_covariance import parse_gauge
from .lie_core import make_representation
from .mc_oracle import mc_wilson

__all__ = ["Scenario", "run_compute", "run_compare", "run_mc", "main"]

_TOP_KEYS = {"group", "rep", "pieces", "gauges", "max_order", "lattice_schedule", "mc"}
_MC_KEYS = {"lambda", "samples", "seed"}


@dataclass(frozen=True)
class Scenario:
    group: str
    rep: str
    pieces: tuple  # tuple of vertex tuples
    gauges: tuple  # gauge strings; "exact" is a pseudo-gauge
    max_order: int
    lattice_schedule: tuple
    mc_lambdas: tuple = ()
    mc_samples: int = 0
    mc_seed: int = 0
    has_mc: bool = False

    def loop(self) -> AdmissibleLoop:
        return build_loop([list(v) for v in self.pieces])

    def representation(self):
        return make_representation(self.group, self.rep)

    def to_dict(self) -> dict:
        out = {
            "group": self.group,
            "rep": self.rep,
            "pieces": [{"vertices": [list(v) for v in piece]} for piece in self.pieces],
            "gauges": list(self.gauges),
            "max_order": self.max_order,
            "lattice_schedule": list(self.lattice_schedule),
        }
        if self.has_mc:
            out["mc"] = {
                "lambda": list(self.mc_lambdas),
                "samples": self.mc_samples,
                "seed": self.mc_seed,
            }
        return out


def _require(cond, message, field):
    if not cond:
        raise ScenarioError(message, field=field)


def parse_scenario(data) -> Scenario:
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"invalid JSON: {e}", field="<root>") from None
    _require(isinstance(data, dict), "scenario must be a JSON object", "<root>")
    unknown = set(data) - _TOP_KEYS
    _require(not unknown, f"unknown keys {sorted(unknown)}", field=",".join(sorted(unknown)))
    for key in ("group", "rep", "pieces", "gauges", "max_order", "lattice_schedule"):
        _require(key in data, "missing required key", field=key)
    _require(isinstance(data["group"], str), "group must be a string", "group")
    _require(isinstance(data["rep"], (str, int)), "rep must be a string", "rep")
    pieces = []
    _require(isinstance(data["pieces"], list) and data["pieces"], "pieces must be a nonempty list", "pieces")
    for i, piece in enumerate(data["pieces"]):
        fld = f"pieces[{i}]"
        _require(isinstance(piece, dict), "piece must be an object", fld)
        unknown = set(piece) - {"vertices"}
        _require(not unknown, f"unknown keys {sorted(unknown)}", fld)
        _require("vertices" in piece, "missing vertices", fld)
        verts = piece["vertices"]
        _require(
            isinstance(verts, list) and len(verts) >= 2,
            "vertices must list at least two [x, y] pairs",
            fld,
        )
        for v in verts:
            _require(
                isinstance(v, list) and len(v) == 2
                and all(isinstance(c, (int, float)) for c in v),
                "vertex must be [x, y]",
                fld,
            )
        pieces.append(tuple((float(x), float(y)) for x, y in verts))
    gauges = data["gauges"]
    _require(isinstance(gauges, list), "gauges must be a list", "gauges")
    for i, g in enumerate(gauges):
        fld = f"gauges[{i}]"
        _require(isinstance(g, str), "gauge must be a string", fld)
        if g != "exact":
            try:
                parse_gauge(g)
            except Ym2Error as e:
                raise ScenarioError(str(e), field=fld) from None
    _require(
        isinstance(data["max_order"], int) and data["max_order"] >= 0,
        "max_order must be a nonnegative integer",
        "max_order",
    )
    sched = data["lattice_schedule"]
    _require(
        isinstance(sched, list) and all(isinstance(n, int) and n > 0 for n in sched),
        "lattice_schedule must list positive integers",
        "lattice_schedule",
    )
    mc_kwargs = dict(mc_lambdas=(), mc_samples=0, mc_seed=0, has_mc=False)
    if "mc" in data:
        mc = data["mc"]
        _require(isinstance(mc, dict), "mc must be an object", "mc")
        unknown = set(mc) - _MC_KEYS
        _require(not unknown, f"unknown keys {sorted(unknown)}", "mc")
        for key in _MC_KEYS:
            _require(key in mc, "missing required key", f"mc.{key}")
        lams = mc["lambda"]
        if isinstance(lams, (int, float)):
            lams = [lams]
        _require(
            isinstance(lams, list) and all(isinstance(x, (int, float)) for x in lams),
            "lambda must be a number or list of numbers",
            "mc.lambda",
        )
        _require(isinstance(mc["samples"], int), "samples must be an integer", "mc.samples")
        _require(isinstance(mc["seed"], int), "seed must be an integer", "mc.seed")
        mc_kwargs = dict(
            mc_lambdas=tuple(float(x) for x in lams),
            mc_samples=mc["samples"],
            mc_seed=mc["seed"],
            has_mc=True,
        )
    return Scenario(
        group=data["group"],
        rep=str(data["rep"]),
        pieces=tuple(pieces),
        gauges=tuple(gauges),
        max_order=data["max_order"],
        lattice_schedule=tuple(sched),
        **mc_kwargs,
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read())


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ym2-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _gauge_results(scenario: Scenario, budget=None):
    """Extrapolated series (or exact values) per requested gauge string."""
    loop = scenario.loop()
    rep = scenario.representation()
    results = {}
    for g in scenario.gauges:
        if g == "exact":
            try:
                area = enclosed_area(loop)
            except Ym2Error as e:
                raise ScenarioError(
                    f"'exact' requires a simple loop (the heat-kernel closed form "
                    f"covers non-self-intersecting loops only): {e}",
                    field="gauges",
                ) from None
            ev = exact_simple_loop(rep, area)
            results[g] = ("exact", ev.coefficients(scenario.max_order))
        else:
            res = wilson_series(
                loop, rep, g, scenario.max_order, scenario.lattice_schedule,
                budget=budget,
            )
            results[g] = ("lattice", res)
    return loop, results


def run_compute(scenario: Scenario, out_path, budget=None) -> str:
    """One CSV row per (gauge, order, N) plus extrapolated rows; returns the CSV."""
    loop, results = _gauge_results(scenario, budget=budget)
    rows = []
    for g in scenario.gauges:
        kind, payload = results[g]
        base_flags = []
        if g.split(":")[0] == "ax" and loop.crosses_axis:
            base_flags.append("crosses_axis")
        if kind == "exact":
            for k, c in enumerate(payload):
                rows.append((g, k, math.inf, float(c), 0.0, base_flags))
        else:
            for n in payload.schedule:
                for k, c in enumerate(payload.per_n[n]):
                    rows.append((g, k, float(n), float(c), None, base_flags))
            for k, c in enumerate(payload.coefficients):
                rows.append(
                    (
                        g,
                        k,
                        math.inf,
                        float(c),
                        float(payload.error_estimate[k]),
                        base_flags + list(payload.flags),
                    )
                )
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["gauge", "order", "N", "coefficient", "error_estimate", "flags"])
    for g, k, n, c, err, flags in rows:
        writer.writerow(
            [
                g,
                k,
                "inf" if math.isinf(n) else int(n),
                _fmt(c),
                "" if err is None else _fmt(err),
                ";".join(flags),
            ]
        )
    text = buf.getvalue()
    if out_path is not None:
        _atomic_write(out_path, text)
    return text


def run_compare(scenario: Scenario, budget=None):
    """Per-order max pairwise gauge difference against combined error estimates.

    Returns (report_text, all_pass).
    """
    if len(scenario.gauges) < 2:
        raise ScenarioError("compare needs at least two gauges", field="gauges")
    _, results = _gauge_results(scenario, budget=budget)
    coeff = {}
    err = {}
    for g, (kind, payload) in results.items():
        if kind == "exact":
            coeff[g] = payload
            err[g] = [0.0] * len(payload)
        else:
            coeff[g] = payload.coefficients
            err[g] = payload.error_estimate
    lines = []
    all_pass = True
    gauges = list(scenario.gauges)
    for k in range(scenario.max_order + 1):
        worst = 0.0
        worst_pair = (gauges[0], gauges[0])
        ok = True
        for i in range(len(gauges)):
            for j in range(i + 1, len(gauges)):
                a, b = gauges[i], gauges[j]
                diff = abs(coeff[a][k] - coeff[b][k])
                tol = err[a][k] + err[b][k] + 1e-12
                if diff > worst:
                    worst, worst_pair = diff, (a, b)
                if diff > tol:
                    ok = False
        all_pass &= ok
        lines.append(
            f"order {k}: max |diff| = {_fmt(worst)} "
            f"({worst_pair[0]} vs {worst_pair[1]}) "
            f"{'PASS' if ok else 'FAIL'}"
        )
    lines.append("RESULT: " + ("PASS" if all_pass else "FAIL"))
    return "\n".join(lines) + "\n", all_pass


def run_mc(scenario: Scenario, out_path, budget=None) -> str:
    """Monte Carlo rows per coupling with the axial series value and z-score."""
    if not scenario.has_mc:
        raise ScenarioError("scenario has no mc section", field="mc")
    if scenario.mc_samples <= 0:
        raise ScenarioError("no samples requested", field="mc.samples")
    for lam in scenario.mc_lambdas:
        if lam <= 0:
            raise ScenarioError("MC requires lambda > 0", field="mc.lambda")
    loop = scenario.loop()
    rep = scenario.representation()
    n_lattice = scenario.lattice_schedule[-1]
    series = wilson_series(
        loop, rep, "ax", scenario.max_order, scenario.lattice_schedule, budget=budget
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["lambda", "mean", "stderr", "n_samples", "N", "seed", "series_value", "z"]
    )
    for lam in scenario.mc_lambdas:
        est = mc_wilson(
            loop, rep, lam, n_lattice, scenario.mc_samples, scenario.mc_seed
        )
        sv = series.value(lam)
        z = (est.mean - sv) / est.stderr if est.stderr > 0 else 0.0
        writer.writerow(
            [
                _fmt(lam),
                _fmt(est.mean),
                _fmt(est.stderr),
                est.n_samples,
                est.lattice_n,
                est.seed,
                _fmt(sv),
                _fmt(z),
            ]
        )
    text = buf.getvalue()
    if out_path is not None:
        _atomic_write(out_path, text)
    return text


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ym2",
        description="Wilson loop expectations for 2D Yang-Mills on the plane",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker hint (runs are deterministic regardless; "
        "YM2_THREADS is the fallback)",
    )
    parser.add_argument(
        "--budget",
        type=float,
        default=None,
        help="cap on the estimated pairing/sweep work before aborting",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_out in (("compute", True), ("compare", False), ("mc", True)):
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True)
        if needs_out:
            p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads is None:
        env = os.environ.get("YM2_THREADS")
        if env is not None:
            try:
                args.threads = int(env)
            except ValueError:
                print(f"error: YM2_THREADS={env!r} is not an integer", file=sys.stderr)
                return 2
    try:
        scenario = load_scenario(args.scenario)
        if args.command == "compute":
            run_compute(scenario, args.out, budget=args.budget)
            return 0
        if args.command == "compare":
            report, ok = run_compare(scenario, budget=args.budget)
            sys.stdout.write(report)
            return 0 if ok else 1
        if args.command == "mc":
            run_mc(scenario, args.out, budget=args.budget)
            return 0
    except ResourceBudgetError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return 3
    except (ScenarioError, McDomainError, Ym2Error, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
