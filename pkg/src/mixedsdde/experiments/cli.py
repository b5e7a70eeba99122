"""``mixedsdde <study> --config FILE [--seed S] [--replicas M] [--out DIR]``.

Exit codes: 0 when every verdict passes, 1 on a verdict failure, 2 on bad input.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import STUDIES, ConfigError, load_config
from .studies import recompute, run_study

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixedsdde", description=__doc__.splitlines()[0])
    ap.add_argument("study", choices=STUDIES + ("verdict",),
                    help="study to run, or 'verdict' to recompute verdicts from an output directory")
    ap.add_argument("--config", help="TOML study configuration")
    ap.add_argument("--seed", type=int, help="master seed (overrides the config)")
    ap.add_argument("--replicas", type=int, help="number of Monte Carlo replicas")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--jobs", type=int, help="worker processes")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.study == "verdict":
        if not args.out:
            print("error: verdict needs --out DIR", file=sys.stderr)
            return EXIT_INPUT
        try:
            result = recompute(args.out)
        except (OSError, KeyError, ConfigError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print("\n".join(result.verdict_lines()))
        return EXIT_PASS if result.passed else EXIT_FAIL

    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_INPUT
    try:
        config = load_config(args.config)
        if config.study != args.study:
            raise ConfigError(f"config describes study {config.study!r}, not {args.study!r}")
        config = config.with_overrides(seed=args.seed, replicas=args.replicas, out=args.out, jobs=args.jobs)
        result = run_study(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: invalid problem: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = result.write(config.out)
    print("\n".join(result.verdict_lines()))
    print(f"results written to {out}")
    return EXIT_PASS if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
