"""Command-line front end.

Subcommands:

* ``run <config.json>``: execute an experiment and write traces plus a
  summary; selected config values can be overridden with flags.
* ``flops --size MxN --rank R --spec ...``: print the analytic cost table
  for a list of method specs.
* ``spectrum <problem>``: export the leading normalized singular values of
  a problem's target matrix.

Method specs use the compact form ``svd``, ``tangent``, ``hmt(p,k)``,
``tropp(k,l)``, ``gn(l)``, optionally followed by ``:gauss``, ``:rad`` or
``:rad(density)``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import replace

from .flopmodel import dominant_coefficient, flops_per_iteration, two_significant
from .harness import (
    export_spectrum,
    load_config,
    parse_problem,
    run_experiment,
)
from .methods import MethodSpec
from .sketching import SketchSpec

__all__ = ["main", "parse_method_string", "print_flop_table"]

_METHOD_RE = re.compile(r"^(svd|tangent|hmt|tropp|gn)(?:\(([^)]*)\))?$")
_SKETCH_RE = re.compile(r"^(gauss|gaussian|rad|rademacher)(?:\(([^)]*)\))?$")


def parse_method_string(text: str, rank: int) -> MethodSpec:
    """Parse ``hmt(0,70):rad(0.2)``-style specs into a :class:`MethodSpec`."""
    head, _, sketch_part = text.strip().partition(":")
    match = _METHOD_RE.match(head.strip())
    if match is None:
        raise ValueError(f"cannot parse method spec {text!r}")
    name, args_text = match.group(1), match.group(2)
    args = [int(a) for a in args_text.split(",")] if args_text else []

    k = l = None
    p = 0
    if name == "hmt":
        if len(args) != 2:
            raise ValueError(f"hmt takes (p, k), got {text!r}")
        p, k = args
    elif name == "tropp":
        if len(args) != 2:
            raise ValueError(f"tropp takes (k, l), got {text!r}")
        k, l = args
    elif name == "gn":
        if len(args) != 1:
            raise ValueError(f"gn takes (l), got {text!r}")
        (l,) = args
    elif args:
        raise ValueError(f"{name} takes no parameters, got {text!r}")

    sketch = None
    if sketch_part:
        smatch = _SKETCH_RE.match(sketch_part.strip())
        if smatch is None:
            raise ValueError(f"cannot parse sketch spec {sketch_part!r}")
        base, density_text = smatch.group(1), smatch.group(2)
        if base in ("gauss", "gaussian"):
            if density_text is not None:
                raise ValueError("gaussian sketch takes no density")
            sketch = SketchSpec(kind="gaussian")
        elif density_text is None:
            sketch = SketchSpec(kind="rademacher")
        else:
            sketch = SketchSpec(kind="sparse", density=float(density_text))
    elif name in ("hmt", "tropp", "gn"):
        sketch = SketchSpec(kind="gaussian")

    return MethodSpec(method=name, r=rank, k=k, l=l, p=p, sketch=sketch)


def _sketch_label(spec: MethodSpec) -> str:
    if spec.sketch is None:
        return "n/a"
    if spec.sketch.kind == "sparse":
        return f"sparse({spec.sketch.density:g})"
    return spec.sketch.kind


def _method_label(spec: MethodSpec) -> str:
    if spec.method == "hmt":
        return f"hmt({spec.p},{spec.k})"
    if spec.method == "tropp":
        return f"tropp({spec.k},{spec.l})"
    if spec.method == "gn":
        return f"gn({spec.l})"
    return spec.method


def print_flop_table(m: int, n: int, specs, file=None) -> None:
    """Print per-iteration costs and dominant coefficients for each spec."""
    file = file or sys.stdout
    header = f"{'method':<16} {'sketch':<14} {'flops/iter':>12} {'coeff/mn':>10}"
    print(header, file=file)
    print("-" * len(header), file=file)
    for spec in specs:
        per_iter = two_significant(flops_per_iteration(spec, m, n))
        if spec.method == "svd":
            coeff = "n/a"
        else:
            coeff = f"{dominant_coefficient(spec):g}"
        print(
            f"{_method_label(spec):<16} {_sketch_label(spec):<14} {per_iter:>12} {coeff:>10}",
            file=file,
        )


def _parse_size(text: str) -> tuple[int, int]:
    match = re.match(r"^(\d+)x(\d+)$", text.strip())
    if match is None:
        raise ValueError(f"size must look like 256x256, got {text!r}")
    return int(match.group(1)), int(match.group(2))


def _load_problem_arg(text: str):
    text = text.strip()
    if text.startswith("{"):
        raw = json.loads(text)
    else:
        with open(text, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    if "problem" in raw and "type" not in raw:
        raw = raw["problem"]
    return parse_problem(raw)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.output_dir is not None:
        config = replace(config, output_dir=args.output_dir)
    if args.trials is not None:
        config = replace(config, trials=args.trials)
    if args.master_seed is not None:
        config = replace(config, master_seed=args.master_seed)
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    if args.iterations is not None:
        config = replace(config, method=replace(config.method, s=args.iterations))
    summary = run_experiment(config)
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def _cmd_flops(args) -> int:
    m, n = _parse_size(args.size)
    specs = [parse_method_string(text, args.rank) for text in args.spec]
    print_flop_table(m, n, specs)
    return 0


def _cmd_spectrum(args) -> int:
    problem = _load_problem_arg(args.problem)
    export_spectrum(problem, args.count, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrap",
        description="Low-rank nonnegative matrix approximation via alternating projections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a JSON config")
    run_p.add_argument("config", help="path to the JSON experiment config")
    run_p.add_argument("--output-dir", help="override the configured output directory")
    run_p.add_argument("--trials", type=int, help="override the trial count")
    run_p.add_argument("--master-seed", type=int, help="override the master seed")
    run_p.add_argument("--iterations", type=int, help="override the iteration count")
    run_p.add_argument("--workers", type=int, help="concurrent trial workers")
    run_p.set_defaults(func=_cmd_run)

    flops_p = sub.add_parser("flops", help="print the analytic flop table")
    flops_p.add_argument("--size", required=True, help="target size, e.g. 256x256")
    flops_p.add_argument("--rank", required=True, type=int, help="target rank")
    flops_p.add_argument(
        "--spec",
        action="append",
        default=[],
        help="method spec, e.g. 'hmt(0,70):rad(0.2)'; repeatable",
    )
    flops_p.set_defaults(func=_cmd_flops)

    spec_p = sub.add_parser("spectrum", help="export normalized singular values")
    spec_p.add_argument("problem", help="problem JSON (inline or a file path)")
    spec_p.add_argument("--count", required=True, type=int, help="number of values to export")
    spec_p.add_argument("--output", required=True, help="destination CSV path")
    spec_p.set_defaults(func=_cmd_spectrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
