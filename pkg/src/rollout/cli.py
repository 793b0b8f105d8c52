"""Command line entry point: ``rollout run | impact | sweep``.

Config files are flat ``key = value`` lines (``#`` comments allowed) using
the field names of :class:`rollout.runner.RunConfig`.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

from .runner import RunConfig, immediate_impact, run, sweep

_SECTION = "rollout"


def read_config(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    parser.read_string(f"[{_SECTION}]\n{text}")
    return dict(parser[_SECTION])


def build_config(args) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    for key in ("seed", "out", "method"):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    if getattr(args, "trace_solves", False):
        values["trace_solves"] = True
    return RunConfig.from_mapping(values)


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rollout", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one rollout and write its report")
    p_run.add_argument("--config")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--method", choices=("ilp", "cand", "irf"))
    p_run.add_argument("--out", help="output directory (default: ./out)")
    p_run.add_argument("--trace-solves", action="store_true", help="write the per-arrival log")

    p_imp = sub.add_parser("impact", help="exposure impact of switching models at once")
    p_imp.add_argument("--config")
    p_imp.add_argument("--seed", type=int)

    p_sw = sub.add_parser("sweep", help="repeat a run over several eta values and seeds")
    p_sw.add_argument("--config")
    p_sw.add_argument("--eta", type=_int_list, default=[1, 2, 5, 10])
    p_sw.add_argument("--seeds", type=_int_list, default=[0])
    p_sw.add_argument("--method", choices=("ilp", "cand", "irf"))
    p_sw.add_argument("--out", help="write sweep.json here instead of stdout")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        config = build_config(args)
        if args.command == "run":
            report = run(config)
            out = report.write(config.out or "out")
            m = report.metrics
            print(f"wrote {out}/report.json  upsilon={m['upsilon']} pi={m['pi']} z={m['z']}")
        elif args.command == "impact":
            print(json.dumps(immediate_impact(config), indent=2))
        else:
            result = sweep(config, args.eta, args.seeds)
            text = json.dumps(result, indent=2) + "\n"
            if config.out:
                Path(config.out).mkdir(parents=True, exist_ok=True)
                (Path(config.out) / "sweep.json").write_text(text, encoding="utf-8")
            else:
                sys.stdout.write(text)
    except (ValueError, OSError) as err:
        print(f"rollout: error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
