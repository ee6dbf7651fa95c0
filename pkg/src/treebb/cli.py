"""Benchmark command line.

Usage:
    treebb-bench --experiment griewank-centered --runs 50 --seed 7 --out results/
    treebb-bench --experiment my-config.txt

``--experiment`` takes a preset name (griewank-centered, griewank-shifted,
fleet-synthetic) or a path to a config file of flat ``key = value`` lines
with ``#`` comments.  Command-line flags override config-file keys.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bench import preset, run_experiment

_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path, "r", encoding="utf-8") as fobj:
        for lineno, raw in enumerate(fobj, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = _coerce(value)
    return out


def _coerce(value: str):
    low = value.lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treebb-bench",
        description="run multi-seed optimization benchmark campaigns",
    )
    parser.add_argument("--experiment", required=True,
                        help="preset name or path to a key=value config file")
    parser.add_argument("--runs", type=int, default=None,
                        help="runs per arm (default: preset value)")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--strategy", default=None,
                        choices=("generic", "parallel", "hyperplane"),
                        help="restrict the experiment to one strategy arm")
    parser.add_argument("--no-svg", action="store_true", help="skip the SVG plot")
    return parser


_SPEC_KEYS = ("experiment", "runs", "seed", "out", "strategy", "svg", "demand",
              "debug_trace", "post_eval_replications")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings: dict = {}
    name = args.experiment
    if os.path.isfile(name):
        settings = parse_config_file(name)
        if "experiment" not in settings:
            print(f"error: config file {name} must set 'experiment'", file=sys.stderr)
            return 2
        name = settings["experiment"]
    if args.runs is not None:
        settings["runs"] = args.runs
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.out is not None:
        settings["out"] = args.out
    if args.strategy is not None:
        settings["strategy"] = args.strategy
    if args.no_svg:
        settings["svg"] = False

    overrides = {k: v for k, v in settings.items() if k not in _SPEC_KEYS}
    try:
        spec = preset(
            name,
            runs=settings.get("runs"),
            seed=settings.get("seed", 2024),
            out_dir=settings.get("out", "bench-out"),
            svg=settings.get("svg", True),
            demand=settings.get("demand", "high"),
            **overrides,
        )
        extra = {}
        if settings.get("debug_trace"):
            extra["debug_trace"] = True
        if settings.get("post_eval_replications"):
            extra["post_eval_replications"] = int(settings["post_eval_replications"])
        if extra:
            from dataclasses import replace as _replace
            spec = _replace(spec, **extra)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if settings.get("strategy"):
        wanted = settings["strategy"]
        arms = tuple(a for a in spec.arms if a.strategy == wanted)
        if not arms:
            print(f"error: experiment {name!r} has no {wanted!r} arm", file=sys.stderr)
            return 2
        spec = type(spec)(**{**spec.__dict__, "arms": arms})

    report = run_experiment(spec)
    print(f"experiment {spec.name}: {len(spec.arms)} arm(s) x {spec.runs_per_arm} run(s)")
    for arm_name, (means, _) in report.curves.items():
        print(f"  {arm_name}: final mean incumbent {means[-1]:.6f}")
    for arm_name, (exact, indiff) in report.hit_rates.items():
        print(f"  {arm_name}: {exact}/{spec.runs_per_arm} exact hits, "
              f"{indiff}/{spec.runs_per_arm} indifferent")
    print(f"wrote {len(report.files)} files under {spec.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
