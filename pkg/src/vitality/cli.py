"""Command line interface: one subcommand per pipeline stage plus synth,
run, and serve.

Configuration merges three layers, later layers winning: built-in defaults,
then a JSON config file (--config), then command line flags.  The config
file is a single JSON object whose keys mirror the flags: input_dir,
catalog, panels (year -> path), boundaries, addresses, labels, out, seed,
knn_k, n_trees, init_das, target_year.

Exit codes: 0 success, 1 stage failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .errors import ConfigError, StageError, VitalityError
from .pipeline import STAGE_ORDER, RunConfig, run
from .synth import SynthConfig, generate, write_city

_PANEL_NAME = re.compile(r"panel_(\d{4})\.csv$")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vitality",
        description="Urban vitality analytics: synthesize, compute, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a deterministic city fixture")
    synth.add_argument("--seed", type=int, default=42)
    synth.add_argument("--out", default="city")
    synth.add_argument("--n-das", type=int, default=87)
    synth.add_argument("--missingness", type=float, default=0.05)
    synth.set_defaults(handler=_cmd_synth)

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="JSON config file; flags override it")
    shared.add_argument("--input-dir",
                        help="directory holding the synth file layout")
    shared.add_argument("--out", help="snapshot output directory")
    shared.add_argument("--seed", type=int)
    shared.add_argument("--catalog", help="indicator catalog JSON")
    shared.add_argument("--panel", action="append", metavar="[YEAR=]PATH",
                        help="panel CSV; bare paths need a panel_<year> name "
                             "or an already-configured year to replace")
    shared.add_argument("--boundaries", help="DA boundary GeoJSON")
    shared.add_argument("--addresses", help="business address fixture JSON")
    shared.add_argument("--labels", help="sector labels CSV with medoid flags")
    shared.add_argument("--knn-k", type=int)
    shared.add_argument("--n-trees", type=int)
    shared.add_argument("--init-das", metavar="A,B,C",
                        help="three DA ids seeding the cluster centroids")
    shared.add_argument("--target-year", type=int)

    runner = sub.add_parser("run", parents=[shared],
                            help="run every stage into a snapshot directory")
    runner.add_argument("--stage", action="append", choices=STAGE_ORDER,
                        help="run only this stage (repeatable)")
    runner.set_defaults(handler=_cmd_run)

    for stage in STAGE_ORDER:
        cmd = sub.add_parser(stage, parents=[shared],
                             help=f"run the {stage} stage on its own")
        cmd.set_defaults(handler=_cmd_run, stage=[stage])

    serve = sub.add_parser("serve", help="serve a computed snapshot over HTTP")
    serve.add_argument("--snapshot", default="snapshot",
                       help="snapshot directory produced by the run command")
    serve.add_argument("--bind", default="127.0.0.1:8000", metavar="HOST:PORT")
    serve.add_argument("--cors-origin",
                       help="origin allowed to read the API cross-site")
    serve.add_argument("--static", metavar="DIR",
                       help="directory of web assets to serve under /")
    serve.set_defaults(handler=_cmd_serve)
    return parser


def _load_config_file(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


def _parse_panels(entries, current: dict) -> dict:
    """Apply --panel flags on top of already-configured panels."""
    panels = dict(current)
    for entry in entries:
        if "=" in entry:
            year_text, _, path = entry.partition("=")
            try:
                year = int(year_text)
            except ValueError:
                raise ConfigError(f"--panel {entry!r}: year must be an integer")
            panels[year] = Path(path)
            continue
        match = _PANEL_NAME.search(Path(entry).name)
        if match:
            panels[int(match.group(1))] = Path(entry)
        elif panels:
            panels[max(panels)] = Path(entry)
        else:
            raise ConfigError(
                f"--panel {entry!r}: cannot infer the panel year; "
                f"use YEAR=PATH"
            )
    return panels


def resolve_config(args) -> RunConfig:
    """Merge defaults, config file, and flags into a RunConfig."""
    doc = _load_config_file(args.config) if args.config else {}
    for key in doc:
        if key not in {"input_dir", "catalog", "panels", "boundaries",
                       "addresses", "labels", "out", "seed", "knn_k",
                       "n_trees", "init_das", "target_year"}:
            raise ConfigError(f"unknown config key {key!r}")

    fields: dict = {}
    input_dir = args.input_dir or doc.get("input_dir")
    if input_dir:
        discovered = RunConfig.from_input_dir(input_dir)
        fields = {
            "panels": dict(discovered.panels),
            "boundaries": discovered.boundaries,
            "addresses": discovered.addresses,
            "catalog": discovered.catalog,
            "labels": discovered.labels,
        }

    if "panels" in doc:
        if not isinstance(doc["panels"], dict):
            raise ConfigError("config key 'panels' must map years to paths")
        merged = dict(fields.get("panels", {}))
        for year_text, path in doc["panels"].items():
            try:
                merged[int(year_text)] = Path(path)
            except ValueError:
                raise ConfigError(f"panel year {year_text!r} must be an integer")
        fields["panels"] = merged
    for key in ("catalog", "boundaries", "addresses", "labels", "out"):
        if doc.get(key) is not None:
            fields[key] = Path(doc[key])
    for key in ("seed", "knn_k", "n_trees", "target_year"):
        if doc.get(key) is not None:
            fields[key] = doc[key]
    if doc.get("init_das") is not None:
        fields["init_das"] = tuple(str(d) for d in doc["init_das"])

    if args.panel:
        fields["panels"] = _parse_panels(args.panel, fields.get("panels", {}))
    for flag, key in (("catalog", "catalog"), ("boundaries", "boundaries"),
                      ("addresses", "addresses"), ("labels", "labels"),
                      ("out", "out")):
        value = getattr(args, flag)
        if value is not None:
            fields[key] = Path(value)
    for flag in ("seed", "knn_k", "n_trees", "target_year"):
        value = getattr(args, flag)
        if value is not None:
            fields[flag] = value
    if args.init_das is not None:
        fields["init_das"] = tuple(
            part.strip() for part in args.init_das.split(",") if part.strip()
        )

    for required, flag in (("panels", "--panel"), ("boundaries", "--boundaries"),
                           ("addresses", "--addresses")):
        if not fields.get(required):
            raise ConfigError(
                f"{required} not configured; set {flag}, --input-dir, "
                f"or a config file"
            )
    fields.setdefault("out", Path("snapshot"))
    return RunConfig(**fields)


def _cmd_synth(args) -> int:
    config = SynthConfig(seed=args.seed, n_das=args.n_das,
                         missingness=args.missingness)
    paths = write_city(generate(config), args.out)
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


def _cmd_run(args) -> int:
    config = resolve_config(args)
    stages = getattr(args, "stage", None)
    out = run(config, stages=stages)
    label = "all stages" if not stages else ", ".join(stages)
    print(f"snapshot {out} updated ({label})")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.snapshot, args.bind, cors_origin=args.cors_origin,
          static_dir=args.static)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except VitalityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
