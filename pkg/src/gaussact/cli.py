"""Command-line runner for the experiment suites.

    gaussact run <suite> --config cfg.json [--out DIR] [--parallel] [--seed N]

Exit codes: 0 all checks pass, 1 a check failed, 2 bad config, 3 resource cap hit.
The report ``<suite>.json`` is byte-stable for a fixed config and seed; wall
time goes to a separate ``timing.json``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .dynamics import TruncationBudgetError
from .fock import ResourceLimitError
from .suites import SUITES, ConfigError, resolve_params

log = logging.getLogger("gaussact")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3
TOP_KEYS = {"suite", "seed", "out", "params", "suites"}


def load_config(path: str | Path, suite: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not text.strip():
        raise ConfigError("config file is empty")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict) or not cfg:
        raise ConfigError("config must be a non-empty JSON object")
    unknown = set(cfg) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    if cfg.get("suite") != suite:
        raise ConfigError(f"config suite {cfg.get('suite')!r} does not match requested suite {suite!r}")
    if "seed" in cfg and (not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool)):
        raise ConfigError("seed must be an integer")
    if suite == "all":
        if "params" in cfg:
            raise ConfigError("suite 'all' takes per-suite parameters under 'suites'")
        sub = cfg.get("suites", {})
        if not isinstance(sub, dict):
            raise ConfigError("'suites' must be an object")
        for name in sub:
            if name not in SUITES:
                raise ConfigError(f"unknown suite {name!r} under 'suites'")
    elif "suites" in cfg:
        raise ConfigError("'suites' is only valid for suite 'all'")
    if not isinstance(cfg.get("params", {}), dict):
        raise ConfigError("'params' must be an object")
    return cfg


def run_suite(name: str, given: dict, seed: int, out_dir: Path, parallel: bool) -> tuple[dict, bool]:
    params = resolve_params(name, given)
    fn = SUITES[name][0]
    result = fn(params, seed, parallel)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = {}
    for tname, rep in result.tables.items():
        fname = f"{name}__{tname}.csv"
        rep.write_csv(out_dir / fname)
        tables[tname] = fname
    report = {
        "suite": name,
        "config": {"seed": seed, "params": params},
        "checks": [c.to_json() for c in result.checks],
        "tables": tables,
        "passed": result.passed,
    }
    (out_dir / f"{name}.json").write_text(json.dumps(report, indent=2) + "\n")
    for c in result.checks:
        if not c.passed:
            log.warning("%s: %s residual %.3e > %.1e", name, c.name, c.residual, c.tolerance)
    return report, result.passed


def run(suite: str, config: str, out: str | None = None, parallel: bool = False, seed: int | None = None) -> int:
    try:
        if suite != "all" and suite not in SUITES:
            raise ConfigError(f"unknown suite {suite!r}; choose from {sorted(SUITES) + ['all']}")
        cfg = load_config(config, suite)
        seed = cfg.get("seed", 0) if seed is None else seed
        out_dir = Path(out or cfg.get("out") or "reports")
        timing = {}
        ok = True
        names = list(SUITES) if suite == "all" else [suite]
        for name in names:
            given = cfg.get("suites", {}).get(name, {}) if suite == "all" else cfg.get("params", {})
            t0 = time.perf_counter()
            target = out_dir / name if suite == "all" else out_dir
            _, passed = run_suite(name, given, seed, target, parallel)
            timing[name] = time.perf_counter() - t0
            ok = ok and passed
            print(f"{name}: {'PASS' if passed else 'FAIL'} ({timing[name]:.2f}s)")
        (out_dir / "timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationBudgetError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        # parameters that pass type checks but violate a library precondition
        print(f"config error: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussact", description="Run truncated Fock-space experiment suites.")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a named suite")
    r.add_argument("suite", help=f"one of: {', '.join(list(SUITES) + ['all'])}")
    r.add_argument("--config", required=True, help="JSON config path")
    r.add_argument("--out", default=None, help="output directory (default: config 'out' or ./reports)")
    r.add_argument("--parallel", action="store_true", help="evaluate grid points concurrently")
    r.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return run(args.suite, args.config, args.out, args.parallel, args.seed)


if __name__ == "__main__":
    sys.exit(main())
