"""Command-line front end.

Every command that writes files also writes ``<stem>.manifest.json`` next to
them.  The manifest records the exact argument vector, the canonical model
spec and every numeric setting, so ``bigjump replay <manifest>`` regenerates
the same bytes.  Nothing time- or host-dependent is written.

Exit codes: 0 success, 2 usage or parse error, 3 empty support window,
4 Monte Carlo acceptance below the floor, 5 the corollary demo contradicted
its expected outcome.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import DEFAULT_PROBE, Behaviour, ProbeConfig, TailClass, classify
from .conditional import DEFAULT_QUAD, pdf_zd_grid
from .diagnostics import (DEFAULT_EPS, DEFAULT_LADDER, DEFAULT_THRESHOLDS, DEFAULT_X_PROBES,
                          LadderVerdict, convergence_ladder, pointwise_vanishing,
                          tail_domination_ratio)
from .errors import AcceptanceTooLow, EmptySupport
from .models import model_schema, parse_model
from .montecarlo import (ACCEPTANCE_FLOOR, BATCH_PAIRS, DEFAULT_MAX_ATTEMPTS, GENERATOR_ID,
                         PILOT_PAIRS, THREADS_ENV, conditional_sample_zd)

EXIT_OK, EXIT_USAGE, EXIT_EMPTY, EXIT_ACCEPTANCE, EXIT_CONTRADICTION = 0, 2, 3, 4, 5
DOMINATION_GRID = (10.0, 50.0, 100.0, 200.0, 400.0)


class UsageError(Exception):
    pass


def defaults_table():
    """Every numeric default used by the commands, by area."""
    probe = DEFAULT_PROBE
    return {
        "quadrature": {"n_panels": DEFAULT_QUAD.n_panels, "order": DEFAULT_QUAD.order,
                       "rtol": DEFAULT_QUAD.rtol,
                       "endpoint_levels": DEFAULT_QUAD.endpoint_levels,
                       "midpoint_levels": DEFAULT_QUAD.midpoint_levels},
        "density": {"grid_n": 128, "refinement": 5.0},
        "classifier": {"t_start": probe.t_start, "t_factor": probe.t_factor,
                       "n_probes": probe.n_probes, "zero_tol": probe.zero_tol,
                       "d_ladder": list(probe.d_ladder), "x_probes": list(probe.x_probes),
                       "growth_ratio": probe.growth_ratio,
                       "bounded_variation": probe.bounded_variation,
                       "hazard_rtol": probe.hazard_rtol, "tail_s": list(probe.tail_s),
                       "tail_window": list(probe.tail_window)},
        "ladder": {"d_ladder": list(DEFAULT_LADDER), "eps": DEFAULT_EPS,
                   "x_probes": list(DEFAULT_X_PROBES),
                   "final_mass": DEFAULT_THRESHOLDS.final_mass,
                   "stationary_variation": DEFAULT_THRESHOLDS.stationary_variation,
                   "vanish_ratio": DEFAULT_THRESHOLDS.vanish_ratio,
                   "certificate_ladder_max_d": 1e5},
        "simulate": {"delta": "0.01*d", "n": 10_000, "seed": 0,
                     "max_attempts": DEFAULT_MAX_ATTEMPTS, "floor": ACCEPTANCE_FLOOR,
                     "pilot_pairs": PILOT_PAIRS, "batch_pairs": BATCH_PAIRS,
                     "generator": GENERATOR_ID, "threads_env": THREADS_ENV},
        "corollary_demo": {"domination_x": list(DOMINATION_GRID)},
    }


def _model_arg(text):
    try:
        return parse_model(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


class Outputs:
    """Collects written files so the manifest can list them; writes serially."""

    def __init__(self):
        self.paths = []

    def write(self, path, text):
        path = Path(path)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.paths.append(str(path))

    def manifest(self, path, argv, command, model_spec, config):
        manifest = {"command": command, "argv": list(argv), "model_spec": model_spec,
                    "numeric_config": config, "output_paths": list(self.paths),
                    "tool_version": __version__}
        Path(path).write_text(_dumps(manifest), encoding="utf-8")
        return manifest


def _stem(path):
    p = Path(path)
    return p.with_suffix("") if p.suffix else p


def _emit(args, text, suffix, config, ctx):
    """Print to stdout, or write ``--out`` plus its manifest."""
    if args.out is None:
        sys.stdout.write(text)
        return
    out = Outputs()
    path = Path(args.out)
    if not path.suffix:
        path = path.with_suffix(suffix)
    out.write(path, text)
    out.manifest(str(_stem(path)) + ".manifest.json", ctx["argv"], args.command,
                 ctx.get("model_spec", ""), config)


def cmd_list_models(args, ctx):
    rows = model_schema()
    if args.format == "json":
        sys.stdout.write(_dumps(rows))
        return EXIT_OK
    width = max(len(r["name"]) for r in rows)
    lines = [f"{'family':<{width}}  {'params':<16}  {'support':<10}  density"]
    for r in rows:
        params = ",".join(f"{k}={r['defaults'][k]:g}" if k in r["defaults"] else k
                          for k in r["params"]) or "-"
        lines.append(f"{r['name']:<{width}}  {params:<16}  {r['support']:<10}  {r['density']}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_density(args, ctx):
    model = args.model
    table = pdf_zd_grid(model, args.d, n_points=args.grid_n, refinement=args.refinement)
    text = table.to_csv() if args.format == "csv" else _dumps(table.to_json())
    config = {"d": args.d, "grid_n": args.grid_n, "refinement": args.refinement,
              "format": args.format, "quadrature": defaults_table()["quadrature"]}
    _emit(args, text, "." + args.format, config, ctx)
    return EXIT_OK


def _probe_from(args):
    return ProbeConfig(t_start=args.t_start, t_factor=args.t_factor, n_probes=args.n_probes,
                       zero_tol=args.zero_tol)


def _analyze(model, probe, certify):
    cert = pointwise_vanishing(model) if certify else None
    return classify(model, probe, pointwise_certificate=cert)


def cmd_analyze(args, ctx):
    probe = _probe_from(args)
    report = _analyze(args.model, probe, args.certify_pointwise)
    config = {"t_start": probe.t_start, "t_factor": probe.t_factor,
              "n_probes": probe.n_probes, "zero_tol": probe.zero_tol,
              "certify_pointwise": bool(args.certify_pointwise)}
    _emit(args, report.to_json() + "\n", ".json", config, ctx)
    return EXIT_OK


def cmd_ladder(args, ctx):
    ladder = convergence_ladder(args.model, args.d_ladder, args.eps, args.x_probes)
    config = {"d_ladder": list(args.d_ladder), "eps": args.eps,
              "x_probes": list(args.x_probes)}
    if args.out is None:
        sys.stdout.write(ladder.to_csv() if args.format == "csv" else _dumps(ladder.summary()))
        return EXIT_OK
    stem = _stem(args.out)
    out = Outputs()
    out.write(f"{stem}.csv", ladder.to_csv())
    out.write(f"{stem}.summary.json", _dumps(ladder.summary()))
    out.manifest(f"{stem}.manifest.json", ctx["argv"], args.command, args.model.spec, config)
    return EXIT_OK


def cmd_simulate(args, ctx):
    run = conditional_sample_zd(args.model, args.d, delta=args.delta, n_target=args.n,
                                seed=args.seed, max_attempts=args.max_attempts,
                                floor=args.floor)
    config = {"d": args.d, "delta": run.delta, "n": args.n, "seed": args.seed,
              "max_attempts": args.max_attempts, "floor": args.floor,
              "generator": GENERATOR_ID}
    if args.out is None:
        sys.stdout.write(_dumps(run.sidecar()))
        return EXIT_OK
    stem = _stem(args.out)
    out = Outputs()
    out.write(f"{stem}.csv", run.to_csv())
    out.write(f"{stem}.json", _dumps(run.sidecar()))
    out.manifest(f"{stem}.manifest.json", ctx["argv"], args.command, args.model.spec, config)
    return EXIT_OK


def corollary_bundle():
    """Reports, ladders and the tail ratio for the e^{-t±√t} pair.

    Returns ``(files, summary, contradictions)`` where ``files`` maps file
    names to their text.
    """
    y_model = parse_model("expsqrt:-")
    x_model = parse_model("expsqrt:+")
    files, contradictions = {}, []
    results = {}
    for label, model in (("Y", y_model), ("X", x_model)):
        report = classify(model)
        ladder = convergence_ladder(model)
        files[f"{label}_report.json"] = report.to_json() + "\n"
        files[f"{label}_ladder.csv"] = ladder.to_csv()
        results[label] = (report, ladder)
    ratios = tail_domination_ratio(y_model, x_model, DOMINATION_GRID)
    rows = ["x,ratio"] + [f"{x!r},{r!r}" for x, r in zip(DOMINATION_GRID, ratios)]
    files["domination.csv"] = "\n".join(rows) + "\n"

    decreasing = bool(np.all(np.diff(ratios) < 0))
    shrink = ratios[-1] / ratios[0]
    y_report, y_ladder = results["Y"]
    x_report, x_ladder = results["X"]
    if not (decreasing and shrink < 0.1):
        contradictions.append(f"P(Y>x)/P(X>x) not decreasing to 0: {ratios}")
    if y_report.behaviour is not Behaviour.TYPE_I:
        contradictions.append(f"Y behaviour {y_report.behaviour.value}, expected TypeI")
    if y_report.tail_class is not TailClass.LIGHT:
        contradictions.append(f"Y tail {y_report.tail_class.value}, expected Light")
    if x_report.behaviour is not Behaviour.TYPE_II:
        contradictions.append(f"X behaviour {x_report.behaviour.value}, expected TypeII")
    if y_ladder.verdict is not LadderVerdict.TENDS_TO_TYPE_I:
        contradictions.append(f"Y ladder {y_ladder.verdict.value}, expected TendsToTypeI")
    if x_ladder.verdict is not LadderVerdict.TENDS_TO_TYPE_II:
        contradictions.append(f"X ladder {x_ladder.verdict.value}, expected TendsToTypeII")

    summary = {
        "domination_trend": "decreasing" if decreasing else "not_decreasing",
        "domination_x": list(DOMINATION_GRID),
        "domination_ratio": ratios,
        "domination_final_over_initial": shrink,
        "Y": {"model": y_model.spec, "behaviour": y_report.behaviour.value,
              "tail": y_report.tail_class.value, "ladder": y_ladder.verdict.value},
        "X": {"model": x_model.spec, "behaviour": x_report.behaviour.value,
              "tail": x_report.tail_class.value, "ladder": x_ladder.verdict.value},
        "light_tailed_type_i_dominated_by_type_ii": not contradictions,
        "contradictions": contradictions,
    }
    files["summary.json"] = _dumps(summary)
    return files, summary, contradictions


def cmd_corollary_demo(args, ctx):
    files, summary, contradictions = corollary_bundle()
    if args.out_dir is None:
        sys.stdout.write(files["summary.json"])
    else:
        out = Outputs()
        root = Path(args.out_dir)
        for name in sorted(files):
            out.write(root / name, files[name])
        out.manifest(root / "manifest.json", ctx["argv"], args.command,
                     "expsqrt:-;expsqrt:+", {"domination_x": list(DOMINATION_GRID),
                                              "ladder": list(DEFAULT_LADDER)})
    if contradictions:
        for c in contradictions:
            print(f"contradiction: {c}", file=sys.stderr)
        return EXIT_CONTRADICTION
    return EXIT_OK


def cmd_replay(args, ctx):
    try:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        argv = manifest["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read manifest {args.manifest}: {exc}") from None
    if manifest.get("tool_version") != __version__:
        print(f"warning: manifest written by version {manifest.get('tool_version')}, "
              f"running {__version__}", file=sys.stderr)
    return main(argv)


def _add_probe_flags(p):
    p.add_argument("--t-start", type=float, default=DEFAULT_PROBE.t_start)
    p.add_argument("--t-factor", type=float, default=DEFAULT_PROBE.t_factor)
    p.add_argument("--n-probes", type=int, default=DEFAULT_PROBE.n_probes)
    p.add_argument("--zero-tol", type=float, default=DEFAULT_PROBE.zero_tol)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bigjump",
        description="Conditional law of X1/d given X1+X2=d: tables, classification, "
                    "convergence ladders and Monte Carlo checks.")
    parser.add_argument("--version", action="version", version=f"bigjump {__version__}")
    parser.add_argument("--show-defaults", action="store_true",
                        help="print every numeric default as JSON and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("list-models", help="built-in families and their parameters")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_list_models)

    p = sub.add_parser("density", help="tabulate f_{Z_d} on a symmetric grid")
    p.add_argument("--model", type=_model_arg, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--grid-n", type=int, default=128)
    p.add_argument("--refinement", type=float, default=5.0,
                   help="grading power towards the window edges and 1/2")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("analyze", help="classify a model as Type I / Type II")
    p.add_argument("--model", type=_model_arg, required=True)
    _add_probe_flags(p)
    p.add_argument("--certify-pointwise", action="store_true",
                   help="run the pointwise-vanishing check and feed it to the classifier")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("ladder", help="window masses along a ladder of d")
    p.add_argument("--model", type=_model_arg, required=True)
    p.add_argument("--d-ladder", type=_float_list, default=list(DEFAULT_LADDER))
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--x-probes", type=_float_list, default=list(DEFAULT_X_PROBES))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="file stem; writes <stem>.csv and <stem>.summary.json")
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("simulate", help="seeded rejection sampling of Z_d")
    p.add_argument("--model", type=_model_arg, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--delta", type=float, default=None, help="window width (default 0.01*d)")
    p.add_argument("--n", type=lambda s: int(float(s)), default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-attempts", type=lambda s: int(float(s)), default=DEFAULT_MAX_ATTEMPTS)
    p.add_argument("--floor", type=float, default=ACCEPTANCE_FLOOR)
    p.add_argument("--out", help="file stem; writes <stem>.csv and <stem>.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("corollary-demo",
                       help="light-tailed Type I law dominated by a Type II law")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_corollary_demo)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.show_defaults:
        sys.stdout.write(_dumps(defaults_table()))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    ctx = {"argv": argv, "model_spec": getattr(getattr(args, "model", None), "spec", "")}
    try:
        return args.func(args, ctx)
    except EmptySupport as exc:
        print(f"bigjump: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except AcceptanceTooLow as exc:
        pilot = "n/a" if exc.pilot_rate is None else f"{exc.pilot_rate:.3e}"
        print(f"bigjump: {exc}\npredicted rate {exc.rate:.3e}, pilot rate {pilot}",
              file=sys.stderr)
        return EXIT_ACCEPTANCE
    except (UsageError, ValueError) as exc:
        print(f"bigjump: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
