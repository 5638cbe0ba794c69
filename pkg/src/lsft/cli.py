"""Command-line entry point: ``lsft <command> [options]``.

Failures print a single line to stderr of the form
``lsft: error[<code>]: <message>`` and exit nonzero. Codes are
``usage``, ``unknown-method``, ``conflicting-options``, ``missing-file``,
``bad-file``, ``invalid-input``, ``io`` and ``runtime``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._version import __version__
from .classic import ZcaOptions
from .ftz import FtzError, read_ftz, write_ftz
from .harness import (
    LAYER_PRESETS,
    SHAPE_PRESETS,
    LayerSchedule,
    ablation,
    aggregate_traces,
    alpha_sweep,
    compare_methods,
    eta_histogram,
    speedups,
    timing_bench,
)
from .linesearch import LineSearchError
from .methods import ALPHA_PRESETS, ITERATIVE, METHODS, apply, default_config, preset_alpha
from .reports import RunManifest, write_report_csv
from .rng import derive_seed
from .synthetic import gen_features, gen_pair

EXIT_RUNTIME = 1
EXIT_USAGE = 2


class CliError(Exception):
    def __init__(self, code: str, message: str, status: int = EXIT_RUNTIME):
        super().__init__(message)
        self.code = code
        self.status = status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _methods(text: str, iterative_only: bool = False) -> list[str]:
    names = _csv_list(text)
    if not names:
        raise CliError("usage", "no methods given", EXIT_USAGE)
    pool = ITERATIVE if iterative_only else METHODS
    for m in names:
        if m not in pool:
            kind = "iterative method" if iterative_only and m in METHODS else "method"
            raise CliError("unknown-method", f"unknown {kind} {m!r}; choose from {', '.join(pool)}")
    return names


def _add_weight_options(p):
    p.add_argument("--alpha", type=float, help="style weight multiplier (lambda is derived from it)")
    p.add_argument("--lambda", dest="lam", type=float, help="explicit style weight; excludes --alpha")
    p.add_argument("--alpha-preset", choices=sorted(ALPHA_PRESETS), help="per-model alpha for each method")
    p.add_argument("--eta", type=float, default=0.01, help="fixed learning rate (default 0.01)")


def _config_for(args, method: str, **extra):
    given = [flag for flag, v in (("--alpha", args.alpha), ("--lambda", args.lam), ("--alpha-preset", args.alpha_preset)) if v is not None]
    if len(given) > 1:
        raise CliError("conflicting-options", f"{' and '.join(given)} are mutually exclusive")
    if method not in ITERATIVE:
        return None
    kw = dict(extra)
    if args.lam is not None:
        kw["lam"] = args.lam
    elif args.alpha is not None:
        kw["alpha"] = args.alpha
    elif args.alpha_preset is not None:
        kw["alpha"] = preset_alpha(args.alpha_preset, method)
    if method != "ls-ft":
        kw["eta"] = args.eta
    try:
        return default_config(method, **kw)
    except ValueError as exc:
        raise CliError("invalid-input", str(exc)) from exc


def _read(path: str):
    if not Path(path).is_file():
        raise CliError("missing-file", f"no such feature file: {path}")
    try:
        return read_ftz(path)
    except FtzError as exc:
        raise CliError("bad-file", str(exc)) from exc


def _outdir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError("io", f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def _config_dict(args, keys, method: str = "") -> dict:
    out = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if method == "ls-ft":
        out.pop("eta", None)  # the line search picks its own step
    return out


def cmd_gen(args) -> None:
    F = gen_features(args.seed, args.channels, args.samples, args.dist)
    write_ftz(F, args.out, args.dtype)
    print(f"wrote {args.out} ({args.channels}x{args.samples}, {args.dist}, seed {args.seed})")


def cmd_transform(args) -> None:
    (method,) = _methods(args.method)
    extra = {}
    if args.iters is not None:
        extra["iterations"] = args.iters
    cfg = _config_for(args, method, **extra)
    if args.interp_of is not None:
        _methods(args.interp_of)
    Fc, Fs = _read(args.content), _read(args.style)
    base = _read(args.interp_base) if args.interp_base else None
    try:
        Ft, trace = apply(
            method, Fc, Fs, cfg,
            zca_options=ZcaOptions(eig_solver=args.eig_solver),
            beta=args.beta, interp_of=args.interp_of or "zca", interp_base=base,
        )
    except LineSearchError as exc:
        raise CliError("runtime", str(exc)) from exc
    except ValueError as exc:
        raise CliError("invalid-input", str(exc)) from exc
    write_ftz(Ft, args.out, args.dtype)
    if args.trace:
        if trace is None:
            raise CliError("usage", f"--trace needs an iterative method; {method} has no trace", EXIT_USAGE)
        manifest = RunManifest(
            "transform", method, _config_dict(args, ("alpha", "lam", "alpha_preset", "eta", "iters"), method),
            inputs=[args.content, args.style],
        )
        manifest.config["resolved"] = cfg
        write_report_csv([trace], args.trace, manifest)
    msg = f"wrote {args.out}"
    if trace is not None and trace.records:
        its = "iteration" if len(trace) == 1 else "iterations"
        msg += f" (loss {trace.initial_loss.total:.6g} -> {trace.final_loss:.6g} in {len(trace)} {its})"
    print(msg)


def cmd_converge(args) -> None:
    methods = _methods(args.methods, iterative_only=True)
    cfgs = {m: _config_for(args, m) for m in methods}
    schedule = LayerSchedule.preset(args.layers, args.seed)
    out = _outdir(args.out)
    for spec in schedule.layers:
        seeds = [derive_seed(spec.seed, i) for i in range(args.pairs)]
        pairs = (gen_pair(s, spec.channels, spec.n_content, spec.n_style) for s in seeds)
        results = compare_methods(pairs, methods, cfgs, args.iters, layer=spec.label, seeds=seeds, n_jobs=args.threads)
        summary = []
        for m in methods:
            manifest = RunManifest(
                "converge", m, _config_dict(args, ("alpha", "lam", "alpha_preset", "eta", "iters", "pairs", "layers"), m),
                seeds=seeds, inputs=[f"gen_pair(C={spec.channels}, n_content={spec.n_content}, n_style={spec.n_style})"],
            )
            manifest.config["resolved"] = cfgs[m]
            traces = results[m]
            failed = [t for t in traces if t.error]
            ok = [t for t in traces if not t.error]
            write_report_csv(traces, out / f"trace_{m}_{spec.label}.csv", manifest)
            if ok:
                curve = aggregate_traces(ok)
                write_report_csv(curve, out / f"convergence_{m}_{spec.label}.csv", manifest)
                summary.append(f"{m}@1={curve.mean[0]:.6g} {m}@{args.iters}={curve.mean[-1]:.6g}")
            if failed:
                summary.append(f"{m} failures={len(failed)}")
            if m == "ls-ft" and ok:
                write_report_csv(eta_histogram(ok), out / f"eta_histogram_{spec.label}.csv", manifest)
        print(f"{spec.label} ({spec.channels}x{spec.n_content}): " + " ".join(summary))


def cmd_balance(args) -> None:
    methods = _methods(args.methods, iterative_only=True)
    if args.lam is not None:
        raise CliError("conflicting-options", "balance sweeps alpha; --lambda cannot be used")
    seeds = [derive_seed(args.seed, i) for i in range(args.pairs)]
    pairs = [gen_pair(s, args.channels, args.samples, args.samples) for s in seeds]
    out = Path(args.out)
    for m in methods:
        cfg = default_config(m) if m == "ls-ft" else default_config(m, eta=args.eta)
        points = alpha_sweep(pairs, m, args.alphas, cfg)
        target = out if len(methods) == 1 else out.with_name(f"{out.stem}_{m}{out.suffix}")
        manifest = RunManifest(
            "balance", m, {"alphas": args.alphas, "eta": args.eta, "resolved": cfg}, seeds=seeds,
            inputs=[f"gen_pair(C={args.channels}, n_content={args.samples}, n_style={args.samples})"],
        )
        write_report_csv(points, target, manifest)
        for p in points:
            print(f"{m} alpha={p.alpha:g} content={p.mean_content_loss:.6g} style={p.mean_style_loss:.6g}")


def _shape(text: str):
    if text in SHAPE_PRESETS:
        return text
    try:
        C, n = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise CliError("usage", f"bad shape {text!r}; use a preset ({', '.join(SHAPE_PRESETS)}) or CxN", EXIT_USAGE) from None
    return (C, n)


def cmd_bench(args) -> None:
    methods = _methods(args.methods)
    shapes = [_shape(s) for s in _csv_list(args.shapes)]
    cfgs = {m: _config_for(args, m) for m in methods if m in ITERATIVE}
    try:
        rows = timing_bench(shapes, methods, args.repeats, warmup=args.warmup, seed=args.seed, cfgs=cfgs)
    except ValueError as exc:
        raise CliError("invalid-input", str(exc)) from exc
    manifest = RunManifest(
        "bench", methods, {"repeats": args.repeats, "warmup": args.warmup, "shapes": args.shapes},
        seeds=[args.seed], inputs=[f"gen_pair(shape={s})" for s in args.shapes.split(",")],
    )
    write_report_csv(rows, args.out, manifest)
    for r in rows:
        print(f"{r.shape} {r.method} median={r.median_seconds:.4f}s")
    for shape, ratio in speedups(rows).items():
        print(f"{shape} speedup ls-ft vs m-iterft: {ratio:.2f}x")


def cmd_ablate(args) -> None:
    seeds = [derive_seed(args.seed, i) for i in range(args.pairs)]
    pairs = [gen_pair(s, args.channels, args.samples, args.samples) for s in seeds]
    rows = ablation(pairs, iters=args.iters, alpha=args.alpha)
    manifest = RunManifest(
        "ablate", [r.method for r in rows], {"alpha": args.alpha, "iters": args.iters}, seeds=seeds,
        inputs=[f"gen_pair(C={args.channels}, n_content={args.samples}, n_style={args.samples})"],
    )
    write_report_csv(rows, args.out, manifest)
    for r in rows:
        print(
            f"{r.method} recenter={'on' if r.recenter else 'off'} loss={r.mean_final_loss:.6g} "
            f"+-{r.std_final_loss:.3g} failures={r.failures} mean_offset={r.mean_offset:.3g}"
        )


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lsft", description="Line-search feature transforms and their benchmark harness.")
    p.add_argument("--version", action="version", version=f"lsft {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a seeded synthetic feature matrix")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--channels", type=int, required=True)
    g.add_argument("--samples", type=int, required=True)
    g.add_argument("--dist", default="unit-gaussian", help="unit-gaussian | scaled-gaussian:MU,SIGMA | low-rank:R")
    g.add_argument("--dtype", choices=("f4", "f8"), default="f8")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("transform", help="transform one content feature towards a style feature")
    t.add_argument("--method", required=True, help=" | ".join(METHODS))
    t.add_argument("--content", required=True)
    t.add_argument("--style", required=True)
    _add_weight_options(t)
    t.add_argument("--iters", type=int, help="iterations (default 1 for ls-ft, 15 otherwise)")
    t.add_argument("--beta", type=float, default=1.0, help="interp weight of the wrapped output")
    t.add_argument("--interp-of", help="method wrapped by interp (default zca)")
    t.add_argument("--interp-base", help="feature file blended against (default the content)")
    t.add_argument("--eig-solver", choices=("auto", "jacobi", "lapack"), default="auto")
    t.add_argument("--dtype", choices=("f4", "f8"), default="f8")
    t.add_argument("--out", required=True)
    t.add_argument("--trace", help="CSV file for the per-iteration trace")
    t.set_defaults(func=cmd_transform)

    c = sub.add_parser("converge", help="loss curves over seeded synthetic pairs")
    c.add_argument("--pairs", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--layers", choices=sorted(LAYER_PRESETS), default="vgg")
    c.add_argument("--methods", default="m-iterft,ls-ft")
    c.add_argument("--iters", type=int, default=15)
    _add_weight_options(c)
    c.add_argument("--threads", type=int, help="worker threads (default: $LSFT_THREADS or 1)")
    c.add_argument("--out", required=True, help="output directory")
    c.set_defaults(func=cmd_converge)

    b = sub.add_parser("balance", help="content/style losses across alpha")
    b.add_argument("--alphas", type=_float_list, default=[0.2, 1.0, 10.0, 200.0])
    b.add_argument("--methods", default="ls-ft")
    b.add_argument("--pairs", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--channels", type=int, default=32)
    b.add_argument("--samples", type=int, default=512)
    b.add_argument("--eta", type=float, default=0.01)
    b.add_argument("--lambda", dest="lam", type=float, help=argparse.SUPPRESS)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_balance)

    r = sub.add_parser("bench", help="median wall time per shape and method")
    r.add_argument("--shapes", default="fhd", help=f"comma list of presets ({', '.join(SHAPE_PRESETS)}) or CxN")
    r.add_argument("--methods", default="ls-ft,m-iterft")
    r.add_argument("--repeats", type=int, default=5)
    r.add_argument("--warmup", type=int, default=2)
    r.add_argument("--seed", type=int, default=0)
    _add_weight_options(r)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_bench)

    a = sub.add_parser("ablate", help="raw vs centered descent, re-centering on and off")
    a.add_argument("--pairs", type=int, default=20)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--channels", type=int, default=32)
    a.add_argument("--samples", type=int, default=512)
    a.add_argument("--iters", type=int, default=15)
    a.add_argument("--alpha", type=float, default=1.0)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_ablate)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except CliError as exc:
        print(f"lsft: error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.status
    except FtzError as exc:
        print(f"lsft: error[bad-file]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"lsft: error[io]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, ArithmeticError) as exc:
        print(f"lsft: error[invalid-input]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
