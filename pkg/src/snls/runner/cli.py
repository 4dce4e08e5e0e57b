"""Command line: ``snls evolve | diagnose | scatter | inequalities | oracle``.

Exit status: 0 on success, 1 when a check fails, 2 on bad input or an aborted run.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .. import inequalities as ineq
from .config import ConfigError, describe, load_config
from .oracles import ORACLES
from .run import _finite, diagnose, load_series, read_manifest, run, scatter, write_report

log = logging.getLogger("snls")

INEQUALITY_CHOICES = ineq.SUITES + ("threshold", "bootstrap", "all")


def _emit(obj: dict, path: str | None) -> None:
    if path:
        write_report(obj, path)
    print(json.dumps(_finite(obj), indent=2, sort_keys=True))


def cmd_evolve(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    if args.output:
        cfg = cfg.with_output(args.output)
    if args.check:
        _emit(describe(cfg), None)
        return 0
    try:
        series = run(cfg)
    except Exception as exc:  # the manifest already records the abort
        print(f"run aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(f"{len(series.records)} records written to {cfg['output']['directory']}")
    return 0


def cmd_diagnose(args) -> int:
    series = load_series(args.directory)
    thr = read_manifest(args.directory)["config"]["validity"]["boundary_mass_threshold"]
    rep = diagnose(series, thr)
    _emit(rep, args.json or str(Path(args.directory) / "diagnose.json"))
    return 0


def cmd_scatter(args) -> int:
    series = load_series(args.directory)
    man = read_manifest(args.directory)
    t_max = args.t_max if args.t_max is not None else man["validity"]["window_end"]
    try:
        rep = scatter(series, t_max)
    except ValueError as exc:
        print(f"scatter: {exc}", file=sys.stderr)
        return 2
    _emit(rep, args.json or str(Path(args.directory) / "scatter.json"))
    return 0


def cmd_inequalities(args) -> int:
    suites = ineq.SUITES + ("threshold", "bootstrap") if args.suite == "all" else (args.suite,)
    fields = args.corpus.split(",") if args.corpus else None
    report: dict = {}
    ok = True
    for name in suites:
        if name == "threshold":
            probes = {f"{b:g}": ineq.mt_threshold_probe(b).to_dict() for b in args.b}
            ok &= all(p["dominates"] for p in probes.values())
            report["threshold"] = probes
            continue
        if name == "bootstrap":
            report["bootstrap"] = ORACLES["bootstrap-sweep"]()
            continue
        verdicts = ineq.run_suite(name, bs=args.b, fields=fields)
        cmp = {c.key: c for c in ineq.compare_to_baseline(verdicts, ineq.load_baseline())}
        rows = []
        for v in verdicts:
            c = cmp[ineq.verdict_key(v)]
            rows.append(dict(v.to_dict(), key=c.key, frozen=c.frozen, relative_change=c.relative_change, regression_ok=c.ok))
            ok &= v.holds and c.ok
        report[name] = rows
    report["all_hold"] = bool(ok)
    _emit(report, args.json)
    return 0 if ok else 1


def cmd_oracle(args) -> int:
    result = ORACLES[args.name]()
    if args.write:
        with open(args.write, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=1, sort_keys=True)
            fh.write("\n")
    _emit(result, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snls", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evolve", help="run a configured simulation")
    e.add_argument("config")
    e.add_argument("-o", "--output", help="override output.directory")
    e.add_argument("--check", action="store_true", help="validate and echo the config with derived alpha, do not run")
    e.set_defaults(func=cmd_evolve)

    d = sub.add_parser("diagnose", help="identity residuals, decay fits and norm monitors of a run directory")
    d.add_argument("directory")
    d.add_argument("--json", help="report path (default <directory>/diagnose.json)")
    d.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("scatter", help="scattering report over the stored checkpoints")
    s.add_argument("directory")
    s.add_argument("--t-max", type=float, help="last time used (default: end of the validity window)")
    s.add_argument("--json", help="report path (default <directory>/scatter.json)")
    s.set_defaults(func=cmd_scatter)

    i = sub.add_parser("inequalities", help="inequality suites over the documented corpus")
    i.add_argument("suite", choices=INEQUALITY_CHOICES)
    i.add_argument("--b", type=float, nargs="+", default=[0.25, 0.5, 0.75], help="weight exponents")
    i.add_argument("--corpus", help="comma-separated subset of corpus field names")
    i.add_argument("--json", help="also write the report here")
    i.set_defaults(func=cmd_inequalities)

    o = sub.add_parser("oracle", help="print reference values and frozen-constant candidates")
    o.add_argument("name", choices=sorted(ORACLES))
    o.add_argument("--write", help="write the result as JSON to this path")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
