"""Command line entry point: generate | fit | transform | evaluate | bound.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error, 4 numeric
failure. Every JSON document carries ``tool_version``, ``resolved_config`` and
``seed``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bound import bound_sweep, gap_for_assignment
from .dataset import (
    SplitSpec,
    format_matrix,
    generate_blobs,
    generate_two_moons,
    load_csv,
    make_split,
    mask_labels,
    normalize_to_unit_ball,
    save_csv,
    standardize,
    write_text_atomic,
)
from .errors import ConfigError, NumericError, SSRLError, ValidationError
from .evaluate import EvalConfig, Hyperparams, compare_scenarios, loo_select
from .kernels import KernelSpec
from .labeling import LabelingConfig, assign_probabilistic_labels, row_entropy
from .objective import objective_frobenius
from .serialize import Preprocessing, dumps, load_projection, save_projection
from .solver import FitConfig, KernelProjection, fit_kernel, fit_linear, transform

DEFAULT_GRID = {"labeling_k": [1, 3, 5, 9], "p": list(range(2, 25))}
EXIT_IO = 3


def _positive_int(value):
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"{value} is not a positive integer")
    return number


def _positive_float(value):
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"{value} is not positive")
    return number


def _fraction(value):
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is not in [0, 1]")
    return number


def _common(parser):
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--config", type=Path, help="JSON file of option values; flags override it")
    parser.add_argument("-o", "--output", type=Path, help="output file (default: standard output)")
    parser.add_argument("--quiet", action="store_true", help="suppress summaries on standard output")


def _model_options(parser, need_kernel=True):
    if need_kernel:
        parser.add_argument("--kernel", choices=["linear", "rbf", "precomputed"], default="rbf")
        parser.add_argument("--sigma", type=_positive_float, default=0.15, help="rbf kernel bandwidth")
        parser.add_argument("--ridge", type=float, default=None, help="kernel ridge (default 1e-8 tr(K)/n)")
    parser.add_argument("--k", type=_positive_int, default=3, help="labeled neighbours per unlabeled sample")
    parser.add_argument("--label-sigma", type=_positive_float, default=None,
                        help="bandwidth of the labeling similarity (default: --sigma)")
    parser.add_argument("--p", type=_positive_int, default=2, help="target dimension")
    parser.add_argument("--rbf-convention", choices=["2sigma2", "sigma2"], default="2sigma2",
                        help="rbf denominator: 2 sigma^2 or sigma^2")
    parser.add_argument("--standardize", action="store_true", help="z-score features before scaling")
    parser.add_argument("--no-normalize", dest="normalize", action="store_false",
                        help="skip scaling the data into the unit ball")
    parser.add_argument("--label-column", type=int, default=-1, help="class column index (default: last)")


def build_parser():
    parser = argparse.ArgumentParser(prog="ssrlpl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    gen = sub.add_parser("generate", help="write a synthetic dataset CSV")
    gen.add_argument("generator", choices=["two-moons", "blobs"])
    gen.add_argument("--n", type=int, default=200)
    gen.add_argument("--noise", type=float, default=0.1, help="noise standard deviation")
    gen.add_argument("--classes", type=int, default=3, help="blob count")
    gen.add_argument("--dim", type=int, default=2, help="blob dimension")
    _common(gen)
    subparsers["generate"] = gen

    fit = sub.add_parser("fit", help="fit a projection")
    fit.add_argument("data", type=Path)
    _model_options(fit)
    fit.add_argument("--gram", type=Path, help="precomputed kernel CSV (rows follow the data file)")
    fit.add_argument("--mask", type=_fraction, default=None, help="hide this fraction of the file's labels")
    fit.add_argument("--labeled-per-class", type=_positive_int, default=None,
                     help="keep exactly this many labels per class")
    fit.add_argument("--auto", action="store_true", help="pick k and p by leave-one-out")
    fit.add_argument("--labels-out", type=Path, help="write the label matrix as CSV")
    fit.add_argument("--embedding-out", type=Path, help="write the training embedding as CSV (file row order)")
    fit.add_argument("--report", type=Path, help="also write the fit report JSON here")
    _common(fit)
    subparsers["fit"] = fit

    tr = sub.add_parser("transform", help="embed data with a fitted projection")
    tr.add_argument("projection", type=Path)
    tr.add_argument("data", type=Path, help="data CSV, or cross-kernel CSV for precomputed kernels")
    tr.add_argument("--layout", choices=["samples", "dims"], default="samples",
                    help="rows are samples (default) or embedding dimensions")
    _common(tr)
    subparsers["transform"] = tr

    ev = sub.add_parser("evaluate", help="compare labeled-only, SSRL-PL and all-labels projections")
    ev.add_argument("data", type=Path)
    _model_options(ev)
    ev.add_argument("--scenario", choices=["all", "labeled_only", "ssrl_pl", "all_labels", "pca"], default="all")
    ev.add_argument("--repeats", type=_positive_int, default=10)
    ev.add_argument("--train-fraction", type=float, default=0.5)
    ev.add_argument("--labeled-fraction", type=float, default=0.1)
    ev.add_argument("--labeled-per-class", type=_positive_int, default=None)
    ev.add_argument("--knn-k", type=_positive_int, default=1, help="neighbours of the evaluation classifier")
    ev.add_argument("--auto", action="store_true", help="pick k and p by leave-one-out on every split")
    _common(ev)
    subparsers["evaluate"] = ev

    bd = sub.add_parser("bound", help="check the deviation bound on masked labels")
    bd.add_argument("data", type=Path, nargs="?", help="fully labeled CSV (omit with --sweep for synthetic instances)")
    _model_options(bd, need_kernel=False)
    bd.add_argument("--sigma", type=_positive_float, default=0.15, help="labeling bandwidth")
    bd.add_argument("--mask", type=_fraction, default=0.9, help="fraction of labels to hide")
    bd.add_argument("--soft", action="store_true", help="use probabilistic rather than WTA labels")
    bd.add_argument("--sweep", type=_positive_int, default=None, help="run this many randomized instances")
    _common(bd)
    subparsers["bound"] = bd
    return parser, subparsers


def parse_args(argv=None):
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            payload = json.loads(args.config.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(payload, dict):
            raise ConfigError("config file must hold a JSON object")
        sub = subparsers[args.command]
        known = {a.dest for a in sub._actions}
        defaults = {}
        for key, value in payload.items():
            dest = key.lstrip("-").replace("-", "_")
            if dest not in known or dest in ("config", "help"):
                raise ConfigError(f"unknown config key {key!r}")
            defaults[dest] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def resolved_config(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        out[key] = str(value) if isinstance(value, Path) else value
    return out


def provenance(args) -> dict:
    return {"tool_version": __version__, "resolved_config": resolved_config(args), "seed": args.seed}


def emit(args, payload, path=None) -> None:
    text = payload if isinstance(payload, str) else dumps(payload)
    path = path if path is not None else args.output
    if path is not None:
        write_text_atomic(path, text)
    elif not args.quiet:
        sys.stdout.write(text)


def summary(args, text) -> None:
    if not args.quiet:
        print(text, file=sys.stderr if args.output is None else sys.stdout)


def _hyperparams(args) -> Hyperparams:
    return Hyperparams(
        kernel=getattr(args, "kernel", "linear"),
        kernel_sigma=args.sigma,
        labeling_k=args.k,
        labeling_sigma=args.label_sigma,
        p=args.p,
        ridge=getattr(args, "ridge", None),
        convention=args.rbf_convention,
    )


def _preprocess(X, args):
    mean = std = None
    if args.standardize:
        X, mean, std = standardize(X)
    scale = 1.0
    if args.normalize:
        X, scale = normalize_to_unit_ball(X)
    return X, Preprocessing(scale=scale, mean=mean, std=std)


def cmd_generate(args) -> None:
    if args.n < 2:
        raise ValidationError("--n must be at least 2")
    if args.generator == "two-moons":
        X, classes = generate_two_moons(args.n, args.noise, args.seed)
    else:
        X, classes = generate_blobs(args.n, args.classes, args.noise, args.dim, args.seed)
    if args.output is None:
        sys.stdout.write(format_matrix(X.T, [str(c) for c in classes]))
        return
    save_csv(args.output, X, classes)
    summary(args, f"wrote {args.output}: n={X.shape[1]} d={X.shape[0]} C={int(classes.max())}")


def _load_fit_data(args):
    X, labels = load_csv(args.data, args.label_column)
    if args.mask is not None or args.labeled_per_class is not None:
        if labels.u:
            raise ValidationError("--mask/--labeled-per-class need a fully labeled file")
        fraction = None if args.mask is None else max(1.0 - args.mask, 1e-12)
        file_order = labels.order
        X, labels = mask_labels(X, labels.labels, fraction, args.labeled_per_class, args.seed)
        labels = type(labels)(labels.labels, labels.n, labels.n_classes, labels.hidden, file_order[labels.order])
    return X, labels


def cmd_fit(args) -> None:
    params = _hyperparams(args)
    X_raw, labels = _load_fit_data(args)
    X, prep = _preprocess(X_raw, args)
    if args.auto:
        grid = dict(DEFAULT_GRID)
        limit = X.shape[0] if params.kernel == "linear" else labels.n
        grid["p"] = [p for p in grid["p"] if p <= limit] or [min(params.p, limit)]
        params = loo_select(X, labels, EvalConfig(params=params, grid=grid))

    Y = assign_probabilistic_labels(X, labels, params.labeling)
    config = params.fit_config
    with warnings.catch_warnings():
        if args.quiet:
            warnings.simplefilter("ignore", RuntimeWarning)
        if params.kernel == "linear":
            proj = fit_linear(X, Y, config)
            Z = transform(proj, X)
            objective = objective_frobenius(proj.V, X, Y)
        else:
            K = None
            if params.kernel == "precomputed":
                if args.gram is None:
                    raise ValidationError("--kernel precomputed needs --gram")
                K, _ = load_csv(args.gram, None, require_labels=False)
                K = K.T[np.ix_(labels.order, labels.order)]
            proj = fit_kernel(None if K is not None else X, Y, params.kernel_spec, config, K=K)
            Z = proj.embedding
            objective = proj.objective
            if K is not None:
                # saved coefficients follow the file's row order, like the cross-kernel given to transform
                proj = dataclasses.replace(proj, beta=proj.beta[np.argsort(labels.order)])

    prov = provenance(args)
    prov["resolved_config"]["chosen_params"] = params.to_dict()
    if args.output is not None:
        save_projection(args.output, proj, prep, prov)
    if args.labels_out is not None:
        write_text_atomic(args.labels_out, format_matrix(Y[np.argsort(labels.order)]))
    if args.embedding_out is not None:
        write_text_atomic(args.embedding_out, format_matrix(Z[:, np.argsort(labels.order)].T))

    entropy = row_entropy(Y[labels.l:]) if labels.u else np.zeros(1)
    report = {
        **prov,
        "kind": "linear" if params.kernel == "linear" else "kernel",
        "n": labels.n,
        "l": labels.l,
        "u": labels.u,
        "n_classes": labels.n_classes,
        "objective": objective,
        "eigenvalues": proj.eigenvalues.tolist(),
        "label_entropy_min": float(entropy.min()),
        "label_entropy_max": float(entropy.max()),
    }
    if isinstance(proj, KernelProjection):
        report["ridge"] = proj.ridge
    if args.report is not None:
        write_text_atomic(args.report, dumps(report))
    if not args.quiet:
        sys.stdout.write(dumps(report))


def cmd_transform(args) -> None:
    proj, prep = load_projection(args.projection)
    if isinstance(proj, KernelProjection) and proj.spec.family == "precomputed":
        data, _ = load_csv(args.data, None, require_labels=False)
        data = data.T  # file rows are training samples
    else:
        data, _ = load_csv(args.data, None, require_labels=False)
        d = proj.d if not isinstance(proj, KernelProjection) else proj.train_data.shape[0]
        if data.shape[0] == d + 1:
            data = data[:-1]  # trailing class column
        data = prep.apply(data)
    Z = transform(proj, data)
    rows = Z.T if args.layout == "samples" else Z
    emit(args, format_matrix(rows))


def _scenarios(args):
    if args.scenario == "all":
        return ("labeled_only", "ssrl_pl", "all_labels")
    return (args.scenario,)


def cmd_evaluate(args) -> None:
    params = _hyperparams(args)
    split = SplitSpec(args.train_fraction, args.labeled_fraction, args.seed, True, args.labeled_per_class)
    X, labels = load_csv(args.data, args.label_column)
    if labels.u:
        raise ValidationError("evaluate needs a fully labeled file")
    classes = labels.labels[np.argsort(labels.order)]
    X = X[:, np.argsort(labels.order)]

    grid = {}
    if args.auto:
        grid = dict(DEFAULT_GRID)
        grid["p"] = [p for p in grid["p"] if params.kernel != "linear" or p <= X.shape[0]]

    def preprocess(Xt, Xs):
        mean = std = None
        if args.standardize:
            Xt, mean, std = standardize(Xt)
            Xs = (Xs - mean[:, None]) / std[:, None]
        if args.normalize:
            Xt, scale = normalize_to_unit_ball(Xt)
            Xs = Xs * scale
        return Xt, Xs

    config = EvalConfig(params=params, grid=grid, knn_k=args.knn_k, seed=args.seed)
    reports = compare_scenarios(X, classes, split, config, args.repeats, _scenarios(args), preprocess)
    payload = {**provenance(args), "reports": [r.to_dict() for r in reports]}
    emit(args, payload)
    if args.output is not None:
        for r in reports:
            summary(args, f"{r.scenario}: {r.accuracy_mean:.4f} +/- {r.accuracy_sd:.4f}")


def _bound_instance(args, X, classes, seed):
    labeling = LabelingConfig(args.k, args.label_sigma or args.sigma, args.rbf_convention)
    Xm, labels = mask_labels(X, classes, labeled_fraction=1.0 - args.mask, seed=seed)
    if labels.l < args.k:
        raise ConfigError(f"--k {args.k} exceeds the {labels.l} labels left after masking")
    config = FitConfig(p=min(args.p, X.shape[0]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return gap_for_assignment(Xm, labels, labeling, config, wta=not args.soft)


def cmd_bound(args) -> None:
    X = classes = None
    if args.data is not None:
        X, labels = load_csv(args.data, args.label_column)
        if labels.u:
            raise ValidationError("bound needs a fully labeled file")
        classes = labels.labels[np.argsort(labels.order)]
        X = X[:, np.argsort(labels.order)]
        if args.standardize:
            X = standardize(X)[0]
        X, _ = normalize_to_unit_ball(X)
    elif args.sweep is None:
        raise ValidationError("bound needs a dataset unless --sweep is given")

    if args.sweep is None:
        report = _bound_instance(args, X, classes, args.seed)
        payload = {**provenance(args), "report": report.to_dict()}
    else:
        if X is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                reports = bound_sweep(args.sweep, args.seed)
        else:
            reports = [_bound_instance(args, X, classes, args.seed + i) for i in range(args.sweep)]
        ratios = [r.ratio for r in reports]
        payload = {
            **provenance(args),
            "instances": len(reports),
            "max_ratio": max(ratios),
            "all_hold": all(r.holds() for r in reports) if not args.soft else None,
            "max_gap": max(r.gap_value for r in reports),
            "reports": [r.to_dict() for r in reports],
        }
        if math.isinf(payload["max_ratio"]):
            payload["max_ratio"] = "inf"
    emit(args, payload)


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "transform": cmd_transform,
    "evaluate": cmd_evaluate,
    "bound": cmd_bound,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except SSRLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NumericError.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
