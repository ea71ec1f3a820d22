"""Batch command-line front end.

One invocation runs one experiment described either by a JSON config file
or by inline flags; results go to stdout or to --out as CSV or JSON.
Outputs are deterministic: no clocks, no RNG, floats rendered with repr.
Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import NumericalError, ValidationError
from .realset import GapSet, fat_cantor, homogeneity_margin, lebesgue_measure, make_gapset
from .potential import green_value, pw_sum, solve_green
from .jacobi import WeightSpec, coefficients_from_measure, make_measure
from .sumrule import (
    n_step_sum_rule,
    szego_product,
    theorem_upper_bound,
    SumRuleReport,
)

COMMANDS = ("capacity", "green", "cantor", "coeffs", "sumrule", "theorem", "homogeneity")

# numeric gates pinned across the package, echoed into JSON metadata
TOLERANCES = {
    "period_residual": 1e-10,
    "quadrature_mass": 1e-10,
    "eigenvalue_abs": 1e-12,
    "eigenvalue_stability": 1e-8,
}


def _fmt(v) -> str:
    # np.float64 subclasses float but reprs differently; coerce first
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def parse_set_spec(spec: str) -> GapSet:
    if spec.startswith("fat_cantor:"):
        return fat_cantor(int(spec.split(":", 1)[1]))
    try:
        obj = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"set spec is neither fat_cantor:n nor JSON: {exc}") from exc
    return make_gapset(obj["alpha"], obj["beta"], obj.get("gaps", []))


def parse_measure_spec(spec: str, model):
    if spec == "equilibrium":
        return make_measure(model, None, mode="relative")
    if spec == "lebesgue":
        return make_measure(model, WeightSpec("const", {"value": 1.0}), mode="absolute")
    try:
        obj = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"measure spec is not JSON: {exc}") from exc
    factor = WeightSpec.from_dict(obj.get("factor", {"form": "const", "value": 1.0}))
    return make_measure(
        model,
        factor,
        mode=obj.get("mode", "relative"),
        point_masses=[tuple(pm) for pm in obj.get("masses", [])],
    )


def emit_plotdata(series: dict, path: str) -> None:
    """Write gnuplot-style blocks: '# name' then 'index value' lines."""
    names = list(series)
    lengths = {len(series[k]) for k in names}
    if len(lengths) > 1:
        raise ValidationError("all plot series must have equal length")
    chunks = []
    for name in names:
        rows = "\n".join(f"{i} {_fmt(float(v))}" for i, v in enumerate(series[name]))
        chunks.append(f"# {name}\n{rows}\n")
    with open(path, "w") as fh:
        fh.write("\n".join(chunks))


def _table(command: str, columns: list[str], rows: list[list], meta: dict, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"
    payload = {
        "command": command,
        "columns": columns,
        "rows": [[float(v) if isinstance(v, float) else v for v in row] for row in rows],
        "meta": dict(meta, version=__version__),
    }
    return json.dumps(payload, sort_keys=True) + "\n"


def run(config: dict) -> str:
    command = config.get("command")
    if command not in COMMANDS:
        raise ValidationError(f"unknown command {command!r}; choose from {COMMANDS}")
    fmt = config.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ValidationError(f"format must be csv or json, got {fmt!r}")
    quad_order = config.get("quad_order")
    meta = {
        "quad_order": quad_order,
        "set": config.get("set"),
        "measure": config.get("measure"),
        "tolerances": TOLERANCES,
    }

    if command == "cantor":
        n = int(config.get("n", 6))
        rows = []
        levels, pws = [], []
        for level in range(1, n + 1):
            s = fat_cantor(level)
            model = solve_green(s, quad_order)
            rows.append([level, len(s.gaps), lebesgue_measure(s), model.capacity, pw_sum(model)])
            levels.append(level)
            pws.append(rows[-1][4])
        if config.get("plot"):
            emit_plotdata({"pw_sum": pws}, config["plot"])
        return _table(command, ["level", "gap_count", "measure", "capacity", "pw_sum"], rows, meta, fmt)

    s = parse_set_spec(config["set"])

    if command == "homogeneity":
        t_samples = int(config.get("n", 8))
        deltas = config.get("deltas") or [0.8 * s.diameter * 2.0 ** (-k) for k in range(8)]
        deltas = [float(d) for d in deltas]
        rows = [[d, homogeneity_margin(s, t_samples, [d])] for d in deltas]
        rows.append(["overall", homogeneity_margin(s, t_samples, deltas)])
        return _table(command, ["delta", "margin"], rows, meta, fmt)

    model = solve_green(s, quad_order)

    if command == "capacity":
        rows = [
            ["capacity", model.capacity],
            ["robin", model.robin],
            ["pw_sum", pw_sum(model)],
        ]
        return _table(command, ["quantity", "value"], rows, meta, fmt)

    if command == "green":
        if config.get("points"):
            pts = [float(p) for p in str(config["points"]).split(",")]
        elif config.get("gap_index") is not None:
            j = int(config["gap_index"])
            if not 0 <= j < len(s.gaps):
                raise ValidationError(f"gap index {j} out of range")
            lo, hi = s.gaps[j]
            k = int(config.get("n", 51))
            pts = [lo + (hi - lo) * (i + 1) / (k + 1) for i in range(k)]
        else:
            raise ValidationError("green needs --points or --gap-index")
        rows = [[x, green_value(model, x)] for x in pts]
        if config.get("plot"):
            emit_plotdata({"green": [r[1] for r in rows]}, config["plot"])
        return _table(command, ["x", "green"], rows, meta, fmt)

    mu = parse_measure_spec(config.get("measure", "equilibrium"), model)

    if command == "coeffs":
        n = int(config.get("n", 20))
        J = coefficients_from_measure(mu, n)
        rows = [[i + 1, float(J.a[i]), float(J.b[i])] for i in range(n)]
        return _table(command, ["n", "a_n", "b_n"], rows, meta, fmt)

    if command == "sumrule":
        n = int(config.get("n", 1))
        length = int(config.get("length", max(4 * n, 120) + 2 * 60))
        J = coefficients_from_measure(mu, length, quad_order=max(2 * length, mu.quad.order))
        report = n_step_sum_rule(J, mu, model, n)
        columns = SumRuleReport.CSV_COLUMNS.split(",")
        if fmt == "csv":
            return SumRuleReport.CSV_COLUMNS + "\n" + report.csv_row() + "\n"
        return _table(command, columns, [[getattr(report, c) for c in columns]], meta, fmt)

    if command == "theorem":
        n_max = int(config.get("n", 50))
        length = int(config.get("length", n_max + 2 * 90 + 8))
        J = coefficients_from_measure(mu, length, quad_order=max(2 * length, mu.quad.order))
        report = theorem_upper_bound(J, mu, model, n_max)
        u = szego_product(J, model.capacity, n_max)
        if config.get("plot"):
            emit_plotdata({"szego_product": list(map(float, u))}, config["plot"])
        rows = [[
            report.n_max, report.window_max, report.window_min, report.entropy,
            report.bound_C, report.bound_Cprime, int(report.satisfied),
        ]]
        return _table(
            command,
            ["n_max", "window_max", "window_min", "entropy", "bound_C", "bound_Cprime", "satisfied"],
            rows, meta, fmt,
        )

    raise AssertionError("unreachable")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaplab", description=__doc__)
    p.add_argument("--config", help="JSON config file (one object per run)")
    p.add_argument("--command", choices=COMMANDS)
    p.add_argument("--set", dest="set_spec", help='inline GapSet JSON or "fat_cantor:n"')
    p.add_argument("--measure", help='measure spec JSON, "equilibrium" or "lebesgue"')
    p.add_argument("--n", type=int, help="command-specific size parameter")
    p.add_argument("--length", type=int, help="coefficient sequence length override")
    p.add_argument("--quad-order", type=int, dest="quad_order")
    p.add_argument("--points", help="comma-separated evaluation points (green)")
    p.add_argument("--gap-index", type=int, dest="gap_index")
    p.add_argument("--deltas", help="comma-separated delta grid (homogeneity)")
    p.add_argument("--plot", help="also write plot-ready data blocks to this path")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config: dict = {}
    try:
        if args.config:
            with open(args.config) as fh:
                config = json.load(fh)
        for key, val in (
            ("command", args.command), ("set", args.set_spec), ("measure", args.measure),
            ("n", args.n), ("length", args.length), ("quad_order", args.quad_order),
            ("points", args.points), ("gap_index", args.gap_index), ("plot", args.plot),
            ("format", args.format),
        ):
            if val is not None:
                config[key] = val
        if args.deltas:
            config["deltas"] = [float(d) for d in args.deltas.split(",")]
        config.setdefault("format", "csv")
        text = run(config)
    except (ValidationError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"gaplab: validation error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"gaplab: numerical failure: {exc}", file=sys.stderr)
        return 2
    out = args.out or config.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
