"""Command-line interface: ``apca gen | fit | transform | sweep | evaluate | oracle``.

Exit codes: 0 success, 1 usage, 2 data/IO, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io as fileio
from .core import FitConfig, encode, fit, objective_value
from .errors import (ComplexSpectrum, DataFormatError, DegenerateEncoder, DimensionMismatch,
                     InfeasibleStratification, NoConvergence, SingleClass, SingularGram)
from .evaluation import (CV_SCHEMES, DEFAULT_C_GRID, DEFAULT_MU_GRID, EvalConfig,
                         confound_invariance_experiment, disentanglement_experiment, grid_search)
from .oracle import OracleConfig, solve_minimax
from .synth import PRESETS, SynthSpec, generate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str, cast=float):
    """``"0:20:0.1"`` (inclusive range) or ``"0,0.5,1"``."""
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = [round(start + i * step, 10) for i in range(n)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}; use start:stop:step or a comma list")
    if not values:
        raise UsageError(f"empty grid {text!r}")
    if cast is int:
        if any(v != int(v) for v in values):
            raise UsageError(f"grid {text!r} must contain integers")
        return tuple(int(v) for v in values)
    return tuple(values)


def _add_grid_flags(p):
    p.add_argument("--c-grid", help="classifier C grid (default 1e-2..1e6, decades)")
    p.add_argument("--k-grid", help="component counts (default 1..p)")
    p.add_argument("--mu-grid", help="adversarial strengths (default 0:20:0.1)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--cv-scheme", choices=CV_SCHEMES, default="stratified-k-fold")
    p.add_argument("--loss", choices=("logistic", "squared"), default="logistic")
    p.add_argument("--no-standardize", action="store_true", help="skip per-block z-scoring")
    p.add_argument("--recon-factors", type=int, help="factor count for the error/correlation curves")
    p.add_argument("--seed", type=int, default=0)


def _eval_config(args) -> EvalConfig:
    try:
        return EvalConfig(
            c_grid=parse_grid(args.c_grid) if args.c_grid else DEFAULT_C_GRID,
            k_grid=parse_grid(args.k_grid, int) if args.k_grid else None,
            mu_grid=parse_grid(args.mu_grid) if args.mu_grid else DEFAULT_MU_GRID,
            cv_folds=args.folds,
            cv_scheme=args.cv_scheme,
            seed=args.seed,
            loss=args.loss,
            standardize_blocks=not args.no_standardize,
            recon_factors=args.recon_factors,
            swap_blocks=getattr(args, "swap_blocks", False),
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _fmt_row(cells, widths):
    return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()


def _print_table(header, rows, out):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    print(_fmt_row(header, widths), file=out)
    print(_fmt_row(["-" * w for w in widths], widths), file=out)
    for row in rows:
        print(_fmt_row(row, widths), file=out)


# --------------------------------------------------------------------------
# commands


def cmd_gen(args, out):
    overrides = {k: v for k, v in {
        "n_samples": args.n, "d_primary": args.d_primary, "d_concomitant": args.d_concomitant,
        "signal_strength": args.signal_strength, "confound_strength": args.confound_strength,
        "redundancy_strength": args.redundancy_strength,
        "label_confound_correlation": args.label_confound_correlation,
        "noise_sigma": args.noise_sigma, "shared_dim": args.shared_dim,
    }.items() if v is not None}
    try:
        spec = PRESETS[args.preset](seed=args.seed, **overrides)
    except ValueError as exc:
        raise UsageError(f"invalid generator flags: {exc}")
    dataset = generate(args.preset, spec)
    sidecar = {"format": "apca-dataset", "version": 1, "design": args.preset, "spec": asdict(spec)}
    fileio.write_dataset(dataset, args.output, sidecar=sidecar)
    print(f"wrote {dataset.n_samples} samples x ({dataset.d_primary} primary + "
          f"{dataset.d_concomitant} concomitant) to {args.output}", file=out)


def _fit_config(args) -> FitConfig:
    try:
        return FitConfig(ridge=args.ridge, ordering=args.ordering)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_fit(args, out):
    dataset = fileio.read_dataset(args.dataset)
    config = _fit_config(args)
    try:
        model = fit(dataset, args.factors, args.mu, config)
    except ValueError as exc:
        if isinstance(exc, (DimensionMismatch,)):
            raise
        raise UsageError(str(exc))
    provenance = {"dataset_sha256": fileio.dataset_digest(dataset),
                  "fit_config": asdict(config), "mu": args.mu, "n_factors": args.factors}
    fileio.save_model(model, args.output, provenance)
    total, primary, adversary = objective_value(model, dataset)
    print(f"objective     {total!r}", file=out)
    print(f"primary_term  {primary!r}", file=out)
    print(f"adversary_term {adversary!r}", file=out)
    print("eigenvalues   " + " ".join(repr(float(v)) for v in model.eigenvalues), file=out)


def cmd_transform(args, out):
    model = fileio.load_model(args.model)
    dataset = fileio.read_dataset(args.dataset)
    S = encode(model, dataset)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"factor_{i}" for i in range(S.shape[0])])
    for j in range(S.shape[1]):
        writer.writerow([repr(float(v)) for v in S[:, j]])
    Path(args.output).write_text(buf.getvalue())
    print(f"wrote {S.shape[0]} factors x {S.shape[1]} samples to {args.output}", file=out)


def cmd_sweep(args, out):
    dataset = fileio.read_dataset(args.dataset)
    config = _eval_config(args)
    comparison = None
    if args.experiment == "confound":
        if dataset.labels is None or dataset.confound_labels is None:
            raise DataFormatError("confound sweep needs label:target and label:confound columns")
        result = confound_invariance_experiment(dataset, config)
    else:
        if dataset.labels is None:
            raise DataFormatError("multimodal sweep needs a label:target column")
        result, comparison = disentanglement_experiment(dataset, config)
    extra = {"dataset_sha256": fileio.dataset_digest(dataset), "loss": config.loss,
             "standardize_blocks": config.standardize_blocks, "swap_blocks": config.swap_blocks}
    fileio.save_result(result, args.output, comparison, extra)
    if args.emit_curves:
        Path(args.emit_curves).write_text(fileio.curves_to_csv(result))
    header = ["mu", "k", "C", "auc_target", "auc_confound", "primary_err", "concomitant_err", "max|corr|"]
    rows = [[f"{r.mu:g}", r.best_k, f"{r.best_c:g}", f"{r.auc_target:.3f}",
             "-" if r.auc_confound is None else f"{r.auc_confound:.3f}",
             f"{r.primary_recon_error:.4f}", f"{r.concomitant_recon_error:.4f}",
             f"{r.max_abs_correlation:.3f}"] for r in result.records]
    _print_table(header, rows, out)
    if comparison:
        print(file=out)
        _print_table(["preprocessing", "# of features", "AUC (target)"],
                     [[c.preprocessing, c.n_features, f"{c.auc:.3f}"] for c in comparison], out)


def cmd_evaluate(args, out):
    dataset = fileio.read_dataset(args.dataset)
    config = _eval_config(args)
    if dataset.labels is None:
        raise DataFormatError("evaluation needs a label:target column")
    targets = ["target"] + (["confound"] if dataset.confound_labels is not None else [])
    results = {t: grid_search(dataset, t, args.preprocessing, config, args.with_concomitant)
               for t in targets}
    main = results["target"]
    header = ["preprocessing", "# of features"]
    row = [args.preprocessing, main.n_features]
    if args.preprocessing != "none":
        header.append("k")
        row.append(main.best_k)
    if args.preprocessing == "apca":
        header.append("mu")
        row.append(f"{main.best_mu:g}")
    header += ["C"] + [f"AUC ({t})" for t in targets]
    row += [f"{main.best_c:g}"] + [f"{results[t].best_auc:.3f}" for t in targets]
    _print_table(header, [row], out)
    if args.output:
        doc = {t: {k: v for k, v in asdict(r).items() if k != "table"} for t, r in results.items()}
        Path(args.output).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def cmd_oracle(args, out):
    dataset = fileio.read_dataset(args.dataset)
    config = OracleConfig(seed=args.seed, max_outer_iters=args.max_iters)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NoConvergence)
        sol = solve_minimax(dataset, args.factors, args.mu, config)
    analytic, _, _ = objective_value(fit(dataset, args.factors, args.mu), dataset)
    oracle = sol.objective_trace[-1]
    print(f"oracle_objective   {oracle!r}", file=out)
    print(f"analytic_objective {analytic!r}", file=out)
    print(f"relative_gap       {(analytic - oracle) / (1.0 + abs(oracle))!r}", file=out)
    print(f"iterations         {len(sol.objective_trace) - 1}", file=out)
    print(f"converged          {sol.converged}", file=out)
    if caught:
        print(f"warning: {caught[0].message}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apca", description="Adversarial linear factor models (adversarial PCA).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a seeded synthetic cohort")
    p.add_argument("--preset", choices=sorted(PRESETS), default="confounded")
    p.add_argument("--n", type=int)
    p.add_argument("--d-primary", type=int)
    p.add_argument("--d-concomitant", type=int)
    p.add_argument("--signal-strength", type=float)
    p.add_argument("--confound-strength", type=float)
    p.add_argument("--redundancy-strength", type=float)
    p.add_argument("--label-confound-correlation", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--shared-dim", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit an adversarial factor model")
    p.add_argument("dataset")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--factors", type=int, required=True)
    p.add_argument("--ridge", type=float)
    p.add_argument("--ordering", choices=("real", "magnitude"), default="real")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transform", help="encode a dataset with a saved model")
    p.add_argument("model")
    p.add_argument("dataset")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("sweep", help="run an adversarial-strength sweep")
    p.add_argument("dataset")
    p.add_argument("--experiment", choices=("confound", "multimodal"), required=True)
    p.add_argument("--swap-blocks", action="store_true", help="treat concomitant block as primary")
    p.add_argument("--emit-curves", metavar="CSV", help="also write tidy mu,series,value curves")
    p.add_argument("-o", "--output", required=True)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evaluate", help="grid-searched cross-validated AUC report")
    p.add_argument("dataset")
    p.add_argument("--preprocessing", choices=("none", "pca", "apca"), required=True)
    p.add_argument("--with-concomitant", action="store_true",
                   help="append raw concomitant features to the classifier input")
    p.add_argument("--swap-blocks", action="store_true")
    p.add_argument("-o", "--output", help="optional JSON report")
    _add_grid_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="cross-check the analytic fit with the iterative solver")
    p.add_argument("dataset")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--factors", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=20000)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args, out)
    except UsageError as exc:
        print(f"apca: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SingularGram, ComplexSpectrum, DegenerateEncoder) as exc:
        print(f"apca: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataFormatError, DimensionMismatch, SingleClass, InfeasibleStratification,
            OSError) as exc:
        print(f"apca: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
