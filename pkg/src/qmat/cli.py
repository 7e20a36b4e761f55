"""Command-line front end.

Every subcommand builds its state, checks the norm and the ledger, and only
then prints a report.  JSON output is deterministic for a fixed seed.
Exit status: 0 on success, 2 for bad input or configuration, 3 when the
simulation breaks one of its own invariants.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import arith, reference
from .arith import Selector
from .errors import DimensionError, InconsistencyError, QMatError
from .matrix import (
    ClassicalMatrix,
    RegisterLayout,
    constant_row_circuit,
    init_uniform,
    layout_for,
    load_pointwise,
    pointwise_circuit,
    read_matrix,
)
from .oracle import constant_shift, linear_shift, oracle_from_array, step_shift
from .qcoin import (
    QCoinConfig,
    amplitude_preparation,
    estimate_many,
    grover_operator,
    matrix_entry_preparation,
    qcoin_estimate,
)

EXIT_CONFIG = 2
EXIT_INCONSISTENT = 3

DEMO_OPS = (
    "reverse", "swap-pivot", "swap", "cyclic-left", "cyclic-right", "sum-diff",
    "reduce-rows", "reduce-cols", "scale", "multiply", "square", "scalar-product",
)
RESOURCE_TARGETS = ("load-constant", "load-pointwise", "reverse", "cyclic-shift",
                    "swap-pivot", "grover")
MATCH_TOL = 1e-10


class ConfigError(QMatError, ValueError):
    """Missing or contradictory command-line options."""


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "csv", "table"), default="json")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="load a matrix and read it back")
    p.add_argument("--input", required=True)
    _common(p)

    p = sub.add_parser("demo", help="run one arithmetic operation on a matrix")
    p.add_argument("op", choices=DEMO_OPS)
    p.add_argument("--input", required=True)
    p.add_argument("--input2", help="second array for multiply and scalar-product")
    p.add_argument("--row", type=int)
    p.add_argument("--col", type=int)
    p.add_argument("--pos", type=int, default=0, help="column swapped with the pivot")
    p.add_argument("--pos2", type=int, help="second column for swap")
    p.add_argument("--alpha", type=float, default=1.0)
    _common(p)

    for name, helptext in (("shift", "constant or step shift of an array"),
                           ("linshift", "staircase approximation of a linear shift")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--input", help="one-row array (defaults to zeros of length 2^nJ)")
        p.add_argument("--nJ", type=int, default=2)
        p.add_argument("--shift", type=float, required=True)
        if name == "shift":
            p.add_argument("--step", action="store_true", help="use the step construction")
        else:
            p.add_argument("--levels", type=int, default=2)
        _common(p)

    p = sub.add_parser("estimate", help="amplitude read-out with Grover zoom-in")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--input")
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--col", type=int, default=0)
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--failure-prob", type=float, default=0.05)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("resources", help="gate counts of one construction")
    p.add_argument("target", choices=RESOURCE_TARGETS)
    p.add_argument("--input")
    p.add_argument("--nI", type=int, default=1)
    p.add_argument("--nJ", type=int, default=1)
    p.add_argument("--row", type=int, default=0)
    p.add_argument("--pos", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=0.3)
    _common(p)
    return parser


# -- helpers -------------------------------------------------------------------

def _check(state) -> None:
    state.check_norm(1e-10)
    factor = state.ledger.factor
    if not (math.isfinite(factor) and factor != 0.0 and math.isfinite(state.ledger.data_norm)):
        raise InconsistencyError(f"ledger factor {factor!r} is not usable")


def _row_array(path: str) -> np.ndarray:
    m = ClassicalMatrix.load(path)
    if m.rows != 1:
        raise DimensionError(f"{path}: expected a single row, got {m.rows}")
    return m.values[0]


def _selector(args) -> Selector:
    return Selector(row=args.row, col=args.col)


def _compare(got: np.ndarray, want: np.ndarray) -> float:
    err = float(np.max(np.abs(np.asarray(got) - np.asarray(want))))
    if not err < MATCH_TOL:
        raise InconsistencyError(f"quantum result differs from the classical reference by {err:.3e}")
    return err


# -- subcommands ---------------------------------------------------------------

def cmd_load(args) -> dict:
    m = ClassicalMatrix.load(args.input)
    layout = layout_for(m)
    state = load_pointwise(init_uniform(layout), layout, m)
    _check(state)
    back = read_matrix(state, layout).values
    err = _compare(back, m.normalized)
    return {
        "shape": [m.rows, m.cols],
        "inf_norm": m.inf_norm,
        "normalized": m.normalized.tolist(),
        "read_back": back.tolist(),
        "max_error": err,
        "ledger": state.ledger.as_dict(),
        "gate_stats": state.stats.as_dict(),
    }


def _demo_products(args) -> dict:
    f = _row_array(args.input)
    if args.op == "square":
        g = f
    elif args.input2 is None:
        raise ConfigError(f"demo {args.op} needs --input2")
    else:
        g = _row_array(args.input2)
    of = oracle_from_array(f, "f", normalize=True)
    og = of if args.op == "square" else oracle_from_array(g, "g", normalize=True)
    if og.n_cols != of.n_cols:
        raise DimensionError("the two arrays must have the same length")
    layout = RegisterLayout.standard(0, of.n_qubits, mul=True)
    if args.op == "scalar-product":
        state = arith.scalar_product(of, og, layout)
        want = np.zeros(of.n_cols)
        want[0] = reference.scalar_product(of.values, og.values)
        after = read_matrix(state, layout).values[0]
        _check(state)
        err = abs(after[0] - want[0])
        if not err < MATCH_TOL:
            raise InconsistencyError(f"scalar product off by {err:.3e}")
        classical = float(state.ledger.to_classical(after[0]))
        extra = {"scalar_product": classical, "classical_dot": float(np.dot(f, g))}
    else:
        state = arith.multiply_arrays(of, og, layout)
        after = read_matrix(state, layout).values[0]
        want = reference.multiply(of.values, og.values)[0]
        _check(state)
        err = _compare(after, want)
        extra = {"product": state.ledger.to_classical(after).tolist()}
    return {
        "op": args.op,
        "before": [of.values.tolist(), og.values.tolist()],
        "after": [after.tolist()],
        "reference": [np.asarray(want).tolist()],
        "max_error": float(err),
        "ledger": state.ledger.as_dict(),
        "gate_stats": state.stats.as_dict(),
        **extra,
    }


def cmd_demo(args) -> dict:
    if args.op in ("multiply", "square", "scalar-product"):
        return _demo_products(args)
    m = ClassicalMatrix.load(args.input)
    mul = args.op == "scale"
    layout = layout_for(m, mul=mul)
    state = load_pointwise(init_uniform(layout), layout, m)
    before = read_matrix(state, layout).values
    state.stats.reset()
    op = args.op
    if op == "reverse":
        sel = _selector(args)
        arith.reverse(state, layout, sel)
        want = reference.reverse(before, sel)
    elif op == "swap-pivot":
        arith.swap_with_pivot(state, layout, args.pos, args.row)
        want = reference.swap_columns(before, args.pos, layout.J - 1, args.row)
    elif op == "swap":
        if args.pos2 is None:
            raise ConfigError("demo swap needs --pos and --pos2")
        arith.swap_elements(state, layout, args.pos, args.pos2, args.row)
        want = reference.swap_columns(before, args.pos, args.pos2, args.row)
    elif op in ("cyclic-left", "cyclic-right"):
        direction = op.split("-")[1]
        sel = _selector(args)
        arith.cyclic_shift(state, layout, direction, sel)
        want = reference.cyclic_shift(before, direction, sel)
    elif op == "sum-diff":
        arith.pairwise_sum_diff(state, layout)
        want = reference.pairwise_sum_diff(before)
    elif op == "reduce-rows":
        arith.reduce_rows(state, layout)
        want = reference.reduce_rows(before)
    elif op == "reduce-cols":
        arith.reduce_cols(state, layout)
        want = reference.reduce_cols(before)
    else:
        sel = _selector(args)
        arith.scale_by_constant(state, layout, args.alpha, sel)
        want = reference.scale(before, args.alpha, sel)
    _check(state)
    after = read_matrix(state, layout).values
    err = _compare(after, want)
    return {
        "op": op,
        "before": before.tolist(),
        "after": after.tolist(),
        "reference": np.asarray(want).tolist(),
        "classical_after": state.ledger.to_classical(after).tolist(),
        "max_error": err,
        "ledger": state.ledger.as_dict(),
        "gate_stats": state.stats.as_dict(),
    }


def _shift_input(args) -> np.ndarray:
    if args.input:
        return _row_array(args.input)
    if args.nJ < 0:
        raise ConfigError("--nJ must be non-negative")
    return np.zeros(1 << args.nJ)


def cmd_shift(args) -> dict:
    oracle = oracle_from_array(_shift_input(args), "f", normalize=True)
    if getattr(args, "levels", None) is not None:
        res = linear_shift(oracle, args.shift, args.levels)
    elif args.step:
        res = step_shift(oracle, args.shift)
    else:
        res = constant_shift(oracle, args.shift)
    _check(res.state)
    for name in res.sectors:
        _compare(res.sector(name), res.target(name))
    out = res.to_dict()
    out["gate_stats"] = res.state.stats.as_dict()
    return out


def cmd_estimate(args) -> dict:
    if (args.amplitude is None) == (args.input is None):
        raise ConfigError("estimate needs exactly one of --amplitude or --input")
    if args.repeats < 1 or args.workers < 1:
        raise ConfigError("--repeats and --workers must be >= 1")
    if args.amplitude is not None:
        prep = amplitude_preparation(args.amplitude)
        truth = abs(args.amplitude)
    else:
        m = ClassicalMatrix.load(args.input)
        prep = matrix_entry_preparation(m, args.row, args.col)
        truth = abs(float(m.values[args.row, args.col]))
    config = QCoinConfig(args.shots, args.stages, args.failure_prob, args.seed)
    if args.repeats == 1:
        traces = [qcoin_estimate(prep, config)]
    else:
        traces = estimate_many(prep, config, args.repeats, args.workers)
    runs = []
    for n, tr in enumerate(traces):
        d = tr.to_dict()
        d["seed"] = args.seed + n
        runs.append(d)
    out = {"true_value": truth, "runs": runs}
    if args.repeats == 1:
        out = {"true_value": truth, **runs[0]}
    return out


def cmd_resources(args) -> dict:
    target = args.target
    if target == "grover":
        q = grover_operator(amplitude_preparation(args.amplitude))
        return {"target": target, "gate_stats": q.stats().as_dict()}
    if target == "load-pointwise":
        if not args.input:
            raise ConfigError("resources load-pointwise needs --input")
        m = ClassicalMatrix.load(args.input)
        layout = layout_for(m)
        circ = pointwise_circuit(layout, m)
    else:
        layout = RegisterLayout.standard(args.nI, args.nJ)
        init_uniform(layout)  # capacity check
        if target == "load-constant":
            circ = constant_row_circuit(layout, args.row, 0.5)
        elif target == "reverse":
            circ = arith.reverse_circuit(layout, Selector(row=args.row))
        elif target == "cyclic-shift":
            circ = arith.cyclic_shift_circuit(layout, "right", Selector(row=args.row))
        else:
            circ = arith.swap_with_pivot_circuit(layout, args.pos, args.row)
    return {
        "target": target,
        "nI": layout.n_rows,
        "nJ": layout.n_cols,
        "gate_stats": circ.stats().as_dict(),
    }


COMMANDS = {
    "load": cmd_load,
    "demo": cmd_demo,
    "shift": cmd_shift,
    "linshift": cmd_shift,
    "estimate": cmd_estimate,
    "resources": cmd_resources,
}


# -- rendering -----------------------------------------------------------------

def _csv(report: dict, command: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command == "estimate":
        runs = report.get("runs", [report])
        w.writerow(["seed", "stage", "half_width"])
        for run in runs:
            for row in run["stages"]:
                w.writerow([run.get("seed", ""), row["stage"], repr(_half(row))])
    elif command in ("load", "demo"):
        key = "read_back" if command == "load" else "after"
        for row in report[key]:
            w.writerow([repr(v) for v in row])
    elif command in ("shift", "linshift"):
        w.writerow(["sector", "j", "value", "target"])
        for name, sec in report["sectors"].items():
            for j, (v, t) in enumerate(zip(sec["values"], sec["target"])):
                w.writerow([name, j, repr(v), repr(t)])
    else:
        w.writerow(["field", "value"])
        for key, value in report["gate_stats"].items():
            if key != "by_label":
                w.writerow([key, value])
    return buf.getvalue()


def _half(row: dict) -> float:
    return 0.5 * (row["upper"] - row["lower"])


def _table(report: dict, prefix: str = "") -> str:
    lines = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.append(_table(value, name + "."))
        elif isinstance(value, list) and value and isinstance(value[0], list):
            lines.append(f"{name}:")
            lines += ["  " + "  ".join(f"{v: .6f}" for v in row) for row in value]
        else:
            lines.append(f"{name:<32} {value}")
    return "\n".join(x for x in lines if x)


def render(report: dict, command: str, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return _csv(report, command)
    return _table(report) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
        text = render(report, args.command, args.format)
    except InconsistencyError as exc:
        print(f"qmat: inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (QMatError, ValueError, IndexError, OSError, KeyError) as exc:
        print(f"qmat: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
