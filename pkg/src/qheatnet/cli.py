"""Command-line front end.

Verbs: ``validate`` a config, ``verify`` the fluctuation relations on one
instance, ``heat`` for distribution sweeps over time as CSV, ``example``
to compare the two-qubit pipeline against its closed forms.  Exit code 0
means all checks passed, 1 means a physics check failed, 2 means the
input was unusable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import bayesnet, config, qubit, randspec, system, thermo

__all__ = ["main"]

#: default numeric tolerance for fluctuation-relation checks
FT_TOL = 1e-9
#: tolerance for the analytic-oracle comparison in ``example``
ORACLE_TOL = 1e-10
#: stand-in evolution time for a requested t == 0 (grid times must be
#: positive; distributions are continuous in t, so the error is O(t))
TINY_TIME = 1e-12


class CliError(Exception):
    """Unusable command-line input (exit code 2)."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_tol(pairs, base: system.Tolerances) -> system.Tolerances:
    kwargs = {}
    known = {f.name for f in dataclasses.fields(system.Tolerances)}
    for item in pairs or []:
        name, sep, value = item.partition("=")
        if not sep or name not in known:
            raise CliError(f"bad --tol entry {item!r} (expect NAME=VALUE, "
                           f"names: {', '.join(sorted(known))})")
        try:
            kwargs[name] = float(value)
        except ValueError:
            raise CliError(f"bad --tol value in {item!r}")
    return base.updated(**kwargs) if kwargs else base


def _parse_sweep(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"bad --sweep {text!r} (expect START:STOP:STEPS)")
    try:
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"bad --sweep {text!r}")
    if steps < 1 or stop < start:
        raise CliError(f"bad --sweep {text!r}")
    return np.linspace(start, stop, steps)


def _parse_dims(text: str) -> tuple[int, int]:
    try:
        da, db = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise CliError(f"bad --dims {text!r} (expect AxB, e.g. 2x3)")
    return da, db


def _load_spec(args) -> tuple[system.BipartiteSpec, tuple[float, ...]]:
    if getattr(args, "cfg", None):
        try:
            loaded = config.load_config(args.cfg)
        except config.ConfigError as exc:
            raise CliError(str(exc))
        spec, times = loaded.spec, loaded.grid.times
    elif getattr(args, "dims", None):
        da, db = _parse_dims(args.dims)
        spec = randspec.random_spec(
            args.seed, da, db, correlated=not args.product)
        times = (1.0,)
    else:
        raise CliError("give either --config or --dims with --seed")
    tol = _parse_tol(args.tol, spec.tol)
    if tol != spec.tol:
        spec = dataclasses.replace(spec, tol=tol)
    return spec, times


def _grid_time(t: float) -> float:
    return t if t > 0 else TINY_TIME


def _write_out(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_report(args, command: str, records: list[dict]) -> int:
    report = {
        "command": command,
        "passed": all(r["passed"] for r in records),
        "records": records,
    }
    _write_out(args, json.dumps(report, indent=2) + "\n")
    return 0 if report["passed"] else 1


def _record(name: str, value: float, expected: float, tolerance: float) -> dict:
    return {
        "name": name,
        "value": float(value),
        "expected": float(expected),
        "tolerance": float(tolerance),
        "passed": bool(abs(value - expected) <= tolerance),
    }


def cmd_validate(args) -> int:
    try:
        loaded = config.load_config(args.cfg)
    except config.ConfigError as exc:
        raise CliError(str(exc))
    spec = dataclasses.replace(
        loaded.spec, tol=_parse_tol(args.tol, loaded.spec.tol))
    report = system.validate(spec)
    records = [
        {"name": c.name, "value": float(c.residual), "expected": 0.0,
         "tolerance": float(c.tolerance), "passed": bool(c.passed)}
        for c in report.checks
    ]
    return _emit_report(args, "validate", records)


def _verify_records(spec: system.BipartiteSpec, t: float) -> list[dict]:
    grid = bayesnet.TimeGrid((_grid_time(t),))
    basis = bayesnet.build_bases(spec, grid)
    ledgers = thermo.compute_ledgers(basis)

    records = []
    for name in thermo.FORWARD_QUANTITIES:
        records.append(_record(
            f"integral_ft[{name}]",
            thermo.integral_ft(ledgers, name, "forward"), 1.0, FT_TOL))
    for name in thermo.REVERSE_QUANTITIES:
        records.append(_record(
            f"integral_ft[{name}]",
            thermo.integral_ft(ledgers, name, "reverse"), 1.0, FT_TOL))

    combined = thermo.combined_integral_ft(ledgers)
    records.append(_record("combined_ft", combined.value, 1.0, FT_TOL))
    if combined.all_energy_conserving:
        records.append(_record(
            "combined_ft_delta_beta", combined.value_delta_beta, 1.0, FT_TOL))
    records.append(_record(
        "detailed_ft_pointwise", ledgers.detailed_residual, 0.0, FT_TOL))

    joint = thermo.joint_distribution(ledgers)
    records.append(_record(
        "joint_detailed_ft", joint.max_residual, 0.0, FT_TOL))
    psi = thermo.psi_factor(ledgers)
    records.append(_record(
        "modified_heat_ft", psi.max_residual, 0.0, FT_TOL))
    balance = thermo.mean_heat_balance(ledgers)
    records.append(_record("mean_heat_balance", balance.residual, 0.0, FT_TOL))

    table = bayesnet.path_probability_table(basis)
    choi = bayesnet.choi_path_probability(basis)
    records.append(_record(
        "choi_consistency", float(np.abs(table - choi).max()), 0.0, 1e-12))
    return records


def cmd_verify(args) -> int:
    spec, times = _load_spec(args)
    t = args.time if args.time is not None else times[0]
    return _emit_report(args, "verify", _verify_records(spec, t))


_HEAT_HEADER = "t,Q,P_f,P_r,ratio,exp_QdBeta,Psi"


def _heat_rows(spec: system.BipartiteSpec, t: float) -> list[str]:
    grid = bayesnet.TimeGrid((_grid_time(t),))
    basis = bayesnet.build_bases(spec, grid)
    ledgers = thermo.compute_ledgers(basis)
    p_f = thermo.heat_distribution(ledgers, "forward")
    p_r = thermo.heat_distribution(ledgers, "reverse")
    psi = thermo.psi_factor(ledgers)

    rows = []
    for q, pf in sorted(zip(p_f.scalar_points(), p_f.probs), reverse=True):
        pr_mirror = p_r.prob_at(-q)
        ratio = pf / pr_mirror if pr_mirror > ledgers.floor else float("nan")
        hit = np.flatnonzero(np.abs(psi.q_values - q) <= ledgers.binning)
        psi_q = float(psi.psi[hit[0]]) if hit.size else float("nan")
        rows.append(",".join(_fmt(x) for x in (
            t, q, pf, pr_mirror, ratio,
            np.exp(q * ledgers.delta_beta), psi_q)))
    return rows


def cmd_heat(args) -> int:
    spec, times = _load_spec(args)
    if args.sweep:
        sweep = _parse_sweep(args.sweep)
    elif args.time is not None:
        sweep = np.array([args.time])
    else:
        sweep = np.asarray(times)
    lines = [_HEAT_HEADER]
    for t in sweep:
        lines.extend(_heat_rows(spec, float(t)))
    _write_out(args, "\n".join(lines) + "\n")
    return 0


def cmd_example(args) -> int:
    params = qubit.ExampleParams(
        occupation_a=args.occupation_a,
        occupation_b=args.occupation_b,
        tau=args.tau,
        correlated=not args.product,
    )
    spec = qubit.build_example_spec(params, tol=_parse_tol(args.tol, system.Tolerances()))
    sweep = _parse_sweep(args.sweep) if args.sweep else np.linspace(0.0, 2.0 * args.tau, 101)

    lines = ["t,Q,P_f,P_f_analytic,P_r,P_r_analytic"]
    worst = 0.0
    for t in sweep:
        t = float(t)
        basis = bayesnet.build_bases(spec, bayesnet.TimeGrid((_grid_time(t),)))
        ledgers = thermo.compute_ledgers(basis)
        p_f = thermo.heat_distribution(ledgers, "forward")
        p_r = thermo.heat_distribution(ledgers, "reverse")
        ana_f = qubit.analytic_heat_distribution(params, t, "forward")
        ana_r = qubit.analytic_heat_distribution(params, t, "reverse")
        for q in (1.0, 0.0, -1.0):
            nf, af = p_f.prob_at(q), ana_f.prob_at(q)
            nr, ar = p_r.prob_at(q), ana_r.prob_at(q)
            worst = max(worst, abs(nf - af), abs(nr - ar))
            lines.append(",".join(_fmt(x) for x in (t, q, nf, af, nr, ar)))
    _write_out(args, "\n".join(lines) + "\n")

    if args.report:
        record = _record("analytic_oracle_deviation", worst, 0.0, ORACLE_TOL)
        report = {"command": "example", "passed": record["passed"],
                  "records": [record]}
        with open(args.report, "w") as fh:
            fh.write(json.dumps(report, indent=2) + "\n")
    return 0 if worst <= ORACLE_TOL else 1


def _add_common(p: argparse.ArgumentParser, spec_source: bool = True) -> None:
    p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="override one validation tolerance (repeatable)")
    p.add_argument("--out", help="write output to this file instead of stdout")
    if spec_source:
        p.add_argument("--config", dest="cfg", help="JSON problem configuration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qheatnet",
        description="Heat-exchange statistics of correlated bipartite "
                    "thermal systems via conditional trajectories.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run structural checks on a config")
    _add_common(p)

    p = sub.add_parser("verify", help="check the fluctuation relations")
    _add_common(p)
    p.add_argument("--dims", help="random instance dimensions, e.g. 2x3")
    p.add_argument("--seed", type=int, default=0, help="random instance seed")
    p.add_argument("--product", action="store_true",
                   help="random instance without initial correlations")
    p.add_argument("--time", type=float, help="evolution time")

    p = sub.add_parser("heat", help="heat distributions over time as CSV")
    _add_common(p)
    p.add_argument("--dims", help="random instance dimensions, e.g. 2x3")
    p.add_argument("--seed", type=int, default=0, help="random instance seed")
    p.add_argument("--product", action="store_true",
                   help="random instance without initial correlations")
    p.add_argument("--time", type=float, help="single evolution time")
    p.add_argument("--sweep", metavar="START:STOP:STEPS", help="time sweep")

    p = sub.add_parser("example",
                       help="two-qubit example against its closed forms")
    _add_common(p, spec_source=False)
    p.add_argument("--occupation-a", type=float, default=0.2)
    p.add_argument("--occupation-b", type=float, default=0.3)
    p.add_argument("--tau", type=float, default=1.0, help="full swap time")
    p.add_argument("--product", action="store_true",
                   help="drop the initial correlation term")
    p.add_argument("--sweep", metavar="START:STOP:STEPS",
                   help="time sweep (default 0:2*tau:101)")
    p.add_argument("--report", help="also write a JSON pass/fail report here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "validate": cmd_validate,
        "verify": cmd_verify,
        "heat": cmd_heat,
        "example": cmd_example,
    }[args.command]
    try:
        return handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (system.SpecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
