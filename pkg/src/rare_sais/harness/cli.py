"""``rare-sais`` command line.

Exit codes: 0 success, 1 bad spec file, 2 at least one run failed.
"""
import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from ..baselines import crude_mc
from ..errors import MissingSweepAxis, ParseError, RareSaisError, ValidationError
from ..limitstate import _REGISTRY, benchmark_names, get_limit_state
from .export import RunsWriter, aggregate, export_plot_data, write_aggregate_csv, write_aggregate_json
from .runner import run_experiment
from .spec import parse_spec

EXIT_OK, EXIT_SPEC, EXIT_RUNTIME = 0, 1, 2


def preset_names():
    folder = resources.files("rare_sais.harness") / "presets"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".spec"))


def resolve_spec_path(name):
    """A path on disk, or the name of a bundled preset (with or without ``.spec``)."""
    path = Path(name)
    if path.exists():
        return path
    stem = name[:-5] if name.endswith(".spec") else name
    candidate = resources.files("rare_sais.harness") / "presets" / f"{stem}.spec"
    if candidate.is_file():
        return Path(str(candidate))
    return path


def _reference_lookup(spec):
    def lookup(d_x):
        return spec.benchmark.limit_state(d_x).reference_pf
    return lookup


def cmd_run(args):
    path = resolve_spec_path(args.spec)
    try:
        spec = parse_spec(path)
    except (ParseError, ValidationError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if args.repetitions is not None:
        reps = args.repetitions
    elif args.quick:
        reps = spec.quick_repetitions
    else:
        reps = spec.repetitions
    out = Path(args.out or spec.output_dir or Path("results") / path.stem)
    out.mkdir(parents=True, exist_ok=True)
    with RunsWriter(out / "runs.csv") as writer:
        rows = run_experiment(spec, reps, args.workers, on_row=writer)
    ref = _reference_lookup(spec)
    aggs = aggregate(rows, ref)
    write_aggregate_csv(aggs, out / "aggregate.csv")
    if args.format == "json":
        write_aggregate_json(aggs, out / "aggregate.json")
    if len(spec.sweep.get("d_x", [])) >= 2:
        try:
            export_plot_data(aggs, out, ref)
        except MissingSweepAxis:
            pass
    failed = sum(r.failed for r in rows)
    print(f"{len(rows)} runs written to {out} ({failed} failed)")
    for a in aggs:
        print(f"  {a.method:<16} N={a.N:<3} K={a.K:<7} d_x={a.d_x:<3} R={a.R:<4} "
              f"mean_pf={a.mean_pf:.4e} rrmse={a.rrmse:.4f} cov%={a.cov_percent:.2f}")
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_oracle(args):
    try:
        ls = get_limit_state(args.benchmark, dim=args.dim)
    except (KeyError, RareSaisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    res = crude_mc(ls, args.samples, np.random.default_rng(args.seed))
    print(f"benchmark={ls.name} d_x={ls.dim} samples={res.samples} failures={res.failures}")
    print(f"p_f={res.estimate:.6e} std_error={res.std_error:.3e}")
    if ls.reference_pf is not None and res.std_error > 0:
        z = (res.estimate - ls.reference_pf) / res.std_error
        print(f"reference={ls.reference_pf:.6e} z={z:+.2f}")
    return EXIT_OK


def cmd_list(args):
    for name in benchmark_names():
        _, params, fixed_dim, _ = _REGISTRY[name]
        ls = get_limit_state(name)
        dim = fixed_dim if fixed_dim is not None else f"any (default {ls.dim})"
        print(f"{name}  d_x={dim}  params={params}  reference_pf={ls.reference_pf:.4e}")
    print("presets: " + ", ".join(preset_names()))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="rare-sais", description="Rare-event estimation benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment spec file or bundled preset")
    run.add_argument("spec", help="path to a .spec file or a preset name (e.g. table2)")
    run.add_argument("--out", help="output directory (default results/<spec name>)")
    run.add_argument("--workers", type=int, default=None, help="worker processes (default: cores)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    reps = run.add_mutually_exclusive_group()
    reps.add_argument("--quick", action="store_true", help="use the file's quick repetition count")
    reps.add_argument("--repetitions", type=int, help="override the repetition count")
    run.set_defaults(func=cmd_run)

    oracle = sub.add_parser("oracle", help="crude Monte Carlo estimate of a benchmark")
    oracle.add_argument("benchmark", choices=benchmark_names())
    oracle.add_argument("--samples", type=int, required=True)
    oracle.add_argument("--seed", type=int, required=True)
    oracle.add_argument("--dim", type=int, default=None, help="dimension (s4 only)")
    oracle.set_defaults(func=cmd_oracle)

    lst = sub.add_parser("list-benchmarks", help="list benchmarks and presets")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    reps = getattr(args, "repetitions", None)
    if getattr(args, "samples", 1) < 1 or (reps is not None and reps < 1):
        print("error: counts must be positive", file=sys.stderr)
        return EXIT_SPEC
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return EXIT_SPEC
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
