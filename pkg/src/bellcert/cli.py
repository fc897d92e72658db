"""Command-line front end.

Subcommands: analyze, pvalue, simulate, qrng, spacetime, nosignal, fixtures.
Exit codes: 0 success, 2 parse error, 3 validation/domain error,
4 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, fixtures, qrng, spacetime
from .errors import BellcertError, DataFormatError
from .eventio import read_events, write_events
from .events import wins, s_event_based_from_counts
from .lhv import (
    ALWAYS_ANTICORRELATE,
    MEMORY_POLICIES,
    DeterministicStrategy,
    OutcomeModel,
    SettingSource,
    simulate_run,
)
from .nosignaling import build_tables, nosignal_ttest, setting_independence_ztest
from .pvalues import pvalue_game, pvalue_martingale
from .report import RunManifest, analyze, analyze_dataset, render_json, render_text


def _cmd_analyze(args) -> int:
    if args.manifest:
        manifest = RunManifest.from_file(args.manifest)
        if args.tau is not None:
            manifest = RunManifest(**{**manifest.__dict__, "tau": args.tau})
        report = analyze(manifest)
        precision = args.precision or manifest.precision
        fmt = args.format or manifest.format
    else:
        if not args.events:
            raise DataFormatError("analyze needs --manifest or --events")
        dataset = read_events(args.events, tau=args.tau or 0.0)
        report = analyze_dataset(dataset, tau=args.tau or 0.0)
        precision = args.precision or 3
        fmt = args.format or "text"
    text = render_json(report) if fmt == "json" else render_text(report, precision)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_pvalue(args) -> int:
    tau = args.tau
    if args.events:
        dataset = read_events(args.events)
        w, n = wins(dataset)
        s = s_event_based_from_counts(w, n)
    elif args.wins is not None:
        if args.n is None:
            raise DataFormatError("--wins needs --n")
        w, n = args.wins, args.n
        s = s_event_based_from_counts(w, n)
    elif args.s is not None:
        if args.n is None:
            raise DataFormatError("--s needs --n")
        s, n, w = args.s, args.n, None
    else:
        raise DataFormatError("pvalue needs --events, --wins or --s")
    out = {"n": n, "tau": tau, "s": s}
    if w is not None:
        out["wins"] = w
    if args.method in ("martingale", "both"):
        pm = pvalue_martingale(s, n, tau)
        out["p_martingale"] = pm.p_bound
        out["log_p_martingale"] = pm.log_p
    if args.method in ("game", "both"):
        if w is None:
            raise DataFormatError("the game bound needs a win count "
                                  "(--wins or --events)")
        pg = pvalue_game(w, n, tau)
        out["p_game"] = pg.p_bound
        out["log_p_game"] = pg.log_p
    if args.format == "json":
        sys.stdout.write(json.dumps(out, sort_keys=True, indent=2) + "\n")
    else:
        for key, value in out.items():
            sys.stdout.write(f"{key:18s} {value:g}\n" if isinstance(value, float)
                             else f"{key:18s} {value}\n")
    return 0


def _cmd_simulate(args) -> int:
    if args.model == "deterministic":
        model = OutcomeModel.deterministic(DeterministicStrategy(args.strategy))
    elif args.model == "memory":
        model = OutcomeModel.memory(args.policy)
    elif args.model == "optimal-biased":
        model = OutcomeModel.optimal_biased()
    else:
        model = OutcomeModel.quantum(args.visibility)
    source = SettingSource(tau_a=args.tau_a, tau_b=args.tau_b)
    dataset = simulate_run(model, source, args.n_events, args.seed,
                           psi_plus_fraction=args.psi_plus_fraction)
    write_events(dataset, args.out or sys.stdout, fmt=args.event_format)
    return 0


def _cmd_qrng(args) -> int:
    path = Path(args.input)
    if args.encoding == "ascii":
        stream = qrng.BitStream.from_ascii(path.read_text(), label=path.name)
    else:
        stream = qrng.BitStream.from_packed(path.read_bytes(), label=path.name)
    stats = args.stats.split(",")
    out: dict = {"bits": len(stream)}
    for stat in stats:
        if stat == "bias":
            b, sigma = qrng.bias(stream)
            out["bias"] = {"value": b, "sigma": sigma}
        elif stat == "scc":
            profile = qrng.scc_profile(stream, args.max_lag)
            out["scc"] = {str(i + 1): v for i, v in enumerate(profile)}
            out["scc_sigma"] = qrng.scc_sigma(len(stream))
        elif stat == "serial":
            out["serial_test_p"] = qrng.serial_test(stream, args.block_length)
        elif stat == "window":
            values, sigma = qrng.windowed_evolution(stream, args.window_statistic,
                                                    args.window)
            out["windows"] = {"values": list(values), "sigma": sigma}
        else:
            raise DataFormatError(f"unknown statistic {stat!r}")
    sys.stdout.write(json.dumps(out, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_spacetime(args) -> int:
    if args.config:
        chains, scenarios = spacetime.load_config(args.config)
        totals = [(c.label, *spacetime.chain_total(c)) for c in chains]
        margins = [spacetime.separation_margin(s) for s in scenarios]
    else:
        totals, margins = spacetime.check_config()
    ok = all(m.spacelike for m in margins)
    for label, total, unc in totals:
        sys.stdout.write(f"chain {label:24s} {total:.1f} +- {unc:.1f} ns\n")
    for m in margins:
        verdict = "ok" if m.spacelike else "VIOLATED"
        sys.stdout.write(
            f"margin {m.label:22s} {m.margin_ns:.1f} ns "
            f"(light floor {m.light_floor_ns:.1f}, "
            f"measurement {m.measurement_total_ns:.1f})  {verdict}\n")
    if len(margins) == 2:
        sym = spacetime.symmetric_margin(*margins)
        sys.stdout.write(f"symmetric margin {sym:.1f} ns\n")
    sys.stdout.write("spacelike separation: " + ("PASS\n" if ok else "FAIL\n"))
    return 0 if ok else 4


def _cmd_nosignal(args) -> int:
    dataset = read_events(args.events)
    tables = build_tables(dataset)
    z = setting_independence_ztest(tables.settings)
    ty = nosignal_ttest(tables.y_by_a)
    tx = nosignal_ttest(tables.x_by_b)
    rows = [
        ("settings a vs b", tables.settings, f"z = {z.z:+.3f}", z.pvalue),
        ("y vs remote a", tables.y_by_a, f"t = {ty.t:+.3f}", ty.pvalue),
        ("x vs remote b", tables.x_by_b, f"t = {tx.t:+.3f}", tx.pvalue),
    ]
    for name, tb, stat, p in rows:
        sys.stdout.write(f"{name:18s} [[{tb.n00}, {tb.n01}], [{tb.n10}, {tb.n11}]]  "
                         f"{stat}, P = {p:.3f}\n")
    return 0


def _cmd_fixtures(args) -> int:
    runs = args.runs.split(",") if args.runs else fixtures.RUN_IDS
    written = fixtures.write_fixture_tree(args.out_dir, runs)
    for path in written:
        sys.stdout.write(f"{path}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellcert",
        description="Certification toolkit for event-ready CHSH Bell tests")
    parser.add_argument("--version", action="version", version=f"bellcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full certification report for a run")
    p.add_argument("--manifest")
    p.add_argument("--events")
    p.add_argument("--tau", type=float)
    p.add_argument("--format", choices=("text", "json"))
    p.add_argument("--precision", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("pvalue", help="LHV-exclusion P-value bounds")
    p.add_argument("--events")
    p.add_argument("--s", type=float)
    p.add_argument("--wins", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--method", choices=("martingale", "game", "both"), default="both")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_pvalue)

    p = sub.add_parser("simulate", help="simulate an event-ready run")
    p.add_argument("--model", choices=("quantum", "deterministic", "memory",
                                       "optimal-biased"), default="quantum")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--strategy", type=int, default=ALWAYS_ANTICORRELATE.index)
    p.add_argument("--policy", choices=tuple(MEMORY_POLICIES), default="loss_reactive")
    p.add_argument("--tau-a", type=float, default=0.0)
    p.add_argument("--tau-b", type=float, default=0.0)
    p.add_argument("--n-events", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--psi-plus-fraction", type=float, default=0.5)
    p.add_argument("--event-format", choices=("delimited", "jsonl"), default="delimited")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("qrng", help="audit a setting bit stream")
    p.add_argument("--input", required=True)
    p.add_argument("--encoding", choices=("packed", "ascii"), default="packed")
    p.add_argument("--stats", default="bias,scc")
    p.add_argument("--max-lag", type=int, default=qrng.MAX_LAG)
    p.add_argument("--window", type=int, default=10**6)
    p.add_argument("--window-statistic", choices=("bias", "scc1"), default="bias")
    p.add_argument("--block-length", type=int, default=4)
    p.set_defaults(func=_cmd_qrng)

    p = sub.add_parser("spacetime", help="spacelike-separation timing check")
    p.add_argument("action", choices=("check",))
    p.add_argument("--config", help="JSON chain/scenario file (default: published values)")
    p.set_defaults(func=_cmd_spacetime)

    p = sub.add_parser("nosignal", help="setting-independence and no-signaling tests")
    p.add_argument("--events", required=True)
    p.set_defaults(func=_cmd_nosignal)

    p = sub.add_parser("fixtures", help="emit the published-run event files")
    p.add_argument("--out-dir", default="fixtures")
    p.add_argument("--runs", help="comma-separated run ids (default: all)")
    p.set_defaults(func=_cmd_fixtures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BellcertError as exc:
        sys.stderr.write(f"bellcert: error: {exc}\n")
        return exc.exit_code
    except FileNotFoundError as exc:
        sys.stderr.write(f"bellcert: error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"bellcert: error: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
