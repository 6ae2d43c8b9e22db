"""Command line interface.

    vfalos run --config scenario.json --out results/
    vfalos compare --laws tlos,vfilos,vfalos --out results/
    vfalos sweep --sweep-key guidance.lookahead_delta --sweep-values 4,6,8
    vfalos verify-stability --set stability.beta=0.1

Exit codes: 0 success, 1 configuration error, 2 simulation divergence,
3 stability check failed. The output directory defaults to ``$VFALOS_OUT``
or ``./vfalos_out``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import build_scenario, load_config, set_value
from .guidance import LAWS
from .metrics import MetricParams, compute_metrics
from .sim import SimulationDiverged, run_scenario
from .stability import InsufficientData, nominal_from_config, run_nominal, verify_stability
from .vessel import ConfigError

log = logging.getLogger("vfalos")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_UNSTABLE = 0, 1, 2, 3
OUT_ENV = "VFALOS_OUT"


def metric_params(scenario) -> MetricParams:
    s = scenario.sim
    return MetricParams(
        convergence_eps=s.convergence_eps,
        convergence_dwell=s.convergence_dwell,
        overshoot_window=s.overshoot_window,
        overshoot_after=s.overshoot_after,
        steady_window=s.steady_window,
    )


def simulate(cfg: dict):
    """Run one scenario dict; returns ``(log, metrics)``. Picklable for worker pools."""
    sc = build_scenario(cfg)
    sim_log = run_scenario(sc)
    return sim_log, compute_metrics(sim_log, metric_params(sc), sc.path)


def run_many(cfgs: list, jobs: int) -> list:
    """Simulate each config; results come back in input order whatever ``jobs`` is."""
    if jobs <= 1 or len(cfgs) <= 1:
        return [simulate(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(simulate, cfgs))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(dest: Path, rows: list[dict]) -> None:
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(rows[0].keys())
        for row in rows:
            w.writerow(_fmt(v) for v in row.values())


def summary_table(rows: list[dict], cols: list[str]) -> str:
    cells = [[c for c in cols]]
    for row in rows:
        cells.append(
            [f"{row[c]:.4g}" if isinstance(row[c], float) else str(row[c]) for c in cols]
        )
    widths = [max(len(r[i]) for r in cells) for i in range(len(cols))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


SUMMARY_COLS = [
    "rms_cross_track",
    "max_abs_cross_track",
    "overshoot_after_turns",
    "convergence_time",
    "iae",
    "steady_state_abs_ye",
]

PLOT_SCRIPT = """\
set datafile separator ','
set key autotitle columnhead
set multiplot layout 2,1
set title 'Track (east vs north)'
set size ratio -1
plot {tracks}
set size noratio
set title 'Cross-track error'
set xlabel 't [s]'
set ylabel 'y_e [m]'
plot {errors}
unset multiplot
"""


def emit_plot_script(out: Path, logs: list[tuple[str, str]]) -> Path:
    """gnuplot script plotting each (label, csv path relative to ``out``)."""
    tracks = ", ".join(f"'{p}' using 'east':'north' with lines title '{lbl}'" for lbl, p in logs)
    errors = ", ".join(f"'{p}' using 't':'y_e' with lines title '{lbl}'" for lbl, p in logs)
    dest = out / "plot.gp"
    dest.write_text(PLOT_SCRIPT.format(tracks=tracks, errors=errors))
    return dest


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "vfalos_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.set)
    sim_log, m = simulate(cfg)
    out = _out_dir(args)
    sim_log.to_csv(out / "log.csv")
    row = {"law": cfg["guidance"]["law"], **m.as_row()}
    write_rows(out / "metrics.csv", [row])
    if args.emit_plot_script:
        emit_plot_script(out, [(row["law"], "log.csv")])
    print(summary_table([row], ["law"] + SUMMARY_COLS))
    return EXIT_OK


def _parse_list(text: str) -> list:
    text = text.strip()
    if text.startswith("["):
        return list(json.loads(text))
    items = [s.strip() for s in text.split(",") if s.strip()]
    return [json.loads(s) if _is_json(s) else s for s in items]


def _is_json(s: str) -> bool:
    try:
        json.loads(s)
        return True
    except json.JSONDecodeError:
        return False


def cmd_compare(args) -> int:
    laws = _parse_list(args.laws) if args.laws else ["tlos", "vfilos", "vfalos"]
    if not laws:
        raise ConfigError("--laws is empty")
    bad = [law for law in laws if law not in LAWS]
    if bad:
        raise ConfigError(f"unknown law(s) {', '.join(map(str, bad))}; expected from {', '.join(LAWS)}")
    base = load_config(args.config, args.set)
    cfgs = [set_value(base, "guidance.law", law) for law in laws]
    results = run_many(cfgs, args.jobs)
    out = _out_dir(args)
    rows = []
    logs = []
    for law, (sim_log, m) in zip(laws, results):
        (out / law).mkdir(exist_ok=True)
        sim_log.to_csv(out / law / "log.csv")
        logs.append((law, f"{law}/log.csv"))
        rows.append({"law": law, **m.as_row()})

    def key(row):
        conv = row["convergence_time"]
        return (
            row["rms_cross_track"],
            row["overshoot_after_turns"],
            math.inf if math.isnan(conv) else conv,
        )

    ranked = sorted(rows, key=key)
    for i, row in enumerate(ranked, 1):
        row["rank"] = i
    write_rows(out / "comparison.csv", ranked)
    if args.emit_plot_script:
        emit_plot_script(out, logs)
    print(summary_table(ranked, ["rank", "law"] + SUMMARY_COLS))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.sweep_key:
        raise ConfigError("--sweep-key is required")
    values = _parse_list(args.sweep_values or "")
    if not values:
        raise ConfigError("--sweep-values must list at least one value")
    base = load_config(args.config, args.set)
    cfgs = [set_value(base, args.sweep_key, v) for v in values]
    results = run_many(cfgs, args.jobs)
    out = _out_dir(args)
    rows = [
        {"key": args.sweep_key, "value": json.dumps(v), **m.as_row()}
        for v, (_, m) in zip(values, results)
    ]
    write_rows(out / "sweep.csv", rows)
    print(summary_table(rows, ["value"] + SUMMARY_COLS))
    return EXIT_OK


def cmd_verify_stability(args) -> int:
    cfg = load_config(args.config, args.set)
    p, run = nominal_from_config(cfg)
    nom_log = run_nominal(p, run["y_e0"], run["duration"], run["dt"], run["beta_hat0"])
    report = verify_stability(nom_log, p, run["min_decrease_fraction"], run["min_r_squared"])
    out = _out_dir(args)
    nom_log.to_csv(out / "stability_log.csv")
    (out / "stability_report.txt").write_text(report.summary() + "\n")
    print(report.summary())
    if not report.passed:
        print("stability check FAILED", file=sys.stderr)
        return EXIT_UNSTABLE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file (defaults to the packaged scenario)")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./vfalos_out)")
    common.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", help="override a config value"
    )
    common.add_argument("--jobs", type=int, default=1, help="worker processes for compare/sweep")
    common.add_argument("--emit-plot-script", action="store_true", help="also write plot.gp")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="vfalos", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate one scenario").set_defaults(func=cmd_run)
    p = sub.add_parser("compare", parents=[common], help="same scenario under several laws")
    p.add_argument("--laws", help="comma-separated law names (default tlos,vfilos,vfalos)")
    p.set_defaults(func=cmd_compare)
    p = sub.add_parser("sweep", parents=[common], help="vary one config key")
    p.add_argument("--sweep-key")
    p.add_argument("--sweep-values", help="comma-separated or JSON list")
    p.set_defaults(func=cmd_sweep)
    sub.add_parser(
        "verify-stability", parents=[common], help="Lyapunov check on the nominal system"
    ).set_defaults(func=cmd_verify_stability)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s"
    )
    try:
        return args.func(args)
    except (ConfigError, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationDiverged as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
