"""Command-line interface: simulate, compare, sweep, bound, mdc-curve, fsmc."""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .channel import BerModel, packet_success, power_to_db
from .codec import SchemeSpec, expected_scheme_distortion
from .errors import ConfigurationError, EstimationError, NumericalError, SearchSpaceError
from .harness import (
    load_scenario_file,
    run_scenario,
    scenario_variant,
    compare_controllers,
    sweep,
    verify_bound,
    write_summary,
    write_trace_csv,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--horizon", type=int, default=None, help="override the horizon")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")


def _load(args):
    sc = load_scenario_file(args.scenario)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "horizon", None) is not None:
        overrides["horizon"] = args.horizon
    return scenario_variant(sc, **overrides) if overrides else sc


def _write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _write_manifest(out_dir, command, sc=None, **extra):
    """Machine-readable record of the run: what ran, on what, with what result."""
    doc = {"command": command}
    if sc is not None:
        doc["config_hash"] = sc.config_hash()
        doc["seed"] = sc.seed
    doc.update(extra)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def cmd_simulate(args):
    sc = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    if args.replications > 1:
        all_metrics = []
        for rep in range(args.replications):
            records, metrics = run_scenario(sc, replication=rep)
            write_trace_csv(args.out / f"trace_rep{rep}.csv", records)
            all_metrics.append(metrics)
        mean = {
            key: float(np.mean([m.as_dict().get(key, np.nan) for m in all_metrics]))
            for key in ("V_bar", "phi", "D_emp", "E_total")
        }
        write_summary(args.out / "summary.json", sc, all_metrics[0],
                      extra={"replications": args.replications, "mean_metrics": mean})
    else:
        records, metrics = run_scenario(sc)
        write_trace_csv(args.out / "trace.csv", records)
        write_summary(args.out / "summary.json", sc, metrics)
    print(f"wrote {args.out}/summary.json")
    return 0


def cmd_compare(args):
    sc = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    variants = []
    for spec in args.menus:
        menu = tuple(s.strip() for s in spec.split(",") if s.strip())
        variants.append((spec, {"scheme_menu": menu}))
    if args.with_simple:
        variants.insert(0, ("simple_logic", {"controller_type": "simple"}))
    rows = compare_controllers(sc, variants)
    _write_rows(args.out / "comparison.csv", rows)
    _write_manifest(args.out, "compare", sc, rows=rows)
    for row in rows:
        print(json.dumps(row))
    return 0


def cmd_sweep(args):
    sc = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    grid = [float(v) for v in args.grid.split(",")]
    rows = sweep(sc, args.param, grid)
    _write_rows(args.out / "sweep.csv", rows)
    _write_manifest(args.out, "sweep", sc, parameter=args.param, rows=rows)
    print(f"wrote {args.out}/sweep.csv ({len(rows)} rows)")
    return 0


def cmd_bound(args):
    sc = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    report = verify_bound(sc, replications=args.replications, k_max=args.horizon)
    with open(args.out / "bound.json", "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    _write_manifest(args.out, "bound", sc,
                    metrics={k: report[k] for k in ("c", "varpi", "rho", "nu_max", "pass")})
    print(f"bound check: {'PASS' if report.get('pass') else 'FAIL'} "
          f"(rho={report['rho']:.4f}, c={report['c']:.4g})")
    return 0 if report.get("pass") else EXIT_NUMERICAL


def cmd_mdc_curve(args):
    args.out.mkdir(parents=True, exist_ok=True)
    ber = BerModel(kind="exponential", n0=args.n0)
    gains_db = np.linspace(args.db_min, args.db_max, args.points)
    schemes = [
        ("sdc", SchemeSpec(kind="sdc", total_rate=args.rate)),
        ("mdc2", SchemeSpec(kind="mdc", total_rate=args.rate, descriptions=2,
                            shared_bits=args.shared_bits)),
        ("mdc3", SchemeSpec(kind="mdc", total_rate=args.rate, descriptions=3,
                            shared_bits=args.shared_bits)),
    ]
    rows = []
    for db in gains_db:
        g2 = 10.0 ** (db / 10.0)
        row = {"gain_db": repr(float(db))}
        for label, sc in schemes:
            lam = packet_success(args.power, g2, sc.packet_bits(), ber)
            row[label] = repr(expected_scheme_distortion(sc, lam, args.source_var))
        rows.append(row)
    _write_rows(args.out / "mdc_curve.csv", rows)
    _write_manifest(args.out, "mdc-curve", None,
                    parameters={"rate": args.rate, "power": args.power,
                                "shared_bits": args.shared_bits, "n0": args.n0})
    print(f"wrote {args.out}/mdc_curve.csv")
    return 0


def cmd_fsmc(args):
    sc = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    from .channel import ar_step, build_fsmc_from_trace, stationary_link_state
    from .rng import RandomStreams

    spec = sc.sensor_gw[0]
    rng = RandomStreams(sc.seed).stream("fsmc_cli")
    link = stationary_link_state(spec.ar, rng)
    trace = np.empty(sc.fsmc_training_steps)
    for k in range(sc.fsmc_training_steps):
        link = ar_step(link, spec.ar, rng)
        trace[k] = link.power_gain
    model = build_fsmc_from_trace(trace, args.states)
    doc = {
        "states": int(model.n_states),
        "gains_db": [power_to_db(g) for g in model.state_gains],
        "thresholds": [None if not np.isfinite(t) else float(t) for t in model.thresholds],
        "transitions": [[float(p) for p in row] for row in model.P],
    }
    with open(args.out / "fsmc.json", "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    _write_manifest(args.out, "fsmc", sc, states=int(model.n_states))
    print(f"wrote {args.out}/fsmc.json ({model.n_states} states)")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="fadingkf",
                                description="Kalman estimation over lossy wireless links")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario closed loop")
    s.add_argument("scenario", type=Path)
    _add_common(s)
    s.add_argument("--replications", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="compare scheme menus / controllers")
    c.add_argument("scenario", type=Path)
    _add_common(c)
    c.add_argument("--menus", nargs="+", default=["sdc", "sdc,zec", "sdc,zec,mdc"])
    c.add_argument("--with-simple", action="store_true", help="include the logic baseline")
    c.set_defaults(func=cmd_compare)

    w = sub.add_parser("sweep", help="sweep a scalar parameter")
    w.add_argument("scenario", type=Path)
    _add_common(w)
    w.add_argument("--param", default="energy_weight")
    w.add_argument("--grid", required=True, help="comma-separated values")
    w.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bound", help="Monte-Carlo covariance bound check")
    b.add_argument("scenario", type=Path)
    _add_common(b)
    b.add_argument("--replications", type=int, default=500)
    b.set_defaults(func=cmd_bound)

    m = sub.add_parser("mdc-curve", help="expected distortion vs channel gain")
    m.add_argument("--rate", type=float, default=9.0)
    m.add_argument("--power", type=float, default=5e-5)
    m.add_argument("--shared-bits", type=float, default=1.0)
    m.add_argument("--source-var", type=float, default=1.0)
    m.add_argument("--n0", type=float, default=2.5e-16)
    m.add_argument("--db-min", type=float, default=-130.0)
    m.add_argument("--db-max", type=float, default=-90.0)
    m.add_argument("--points", type=int, default=161)
    m.add_argument("--out", type=Path, default=Path("out"))
    m.set_defaults(func=cmd_mdc_curve)

    f = sub.add_parser("fsmc", help="build the Markov channel belief model")
    f.add_argument("scenario", type=Path)
    _add_common(f)
    f.add_argument("--states", type=int, default=12)
    f.set_defaults(func=cmd_fsmc)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, EstimationError, SearchSpaceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
