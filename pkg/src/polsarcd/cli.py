"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure.  Every failure prints one machine-parsable line to stderr of the
form ``polsarcd: error code=<n> kind=<ExceptionName> detail="..."``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import FORMAT_VERSIONS, __version__, detector, experiments, formats, hypotests, presets
from .detector import CovRaster
from .errors import (
    DomainError,
    FormatError,
    GeometryMismatch,
    NoConvergence,
    NotPositiveDefinite,
    PolsarError,
)
from .estimation import estimate
from .model import WishartParams, as_sample, sample

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


def _emit_error(code: int, exc: BaseException) -> int:
    detail = str(exc).replace('"', "'").replace("\n", " ")
    print(
        f'polsarcd: error code={code} kind={type(exc).__name__} detail="{detail}"',
        file=sys.stderr,
    )
    return code


def _matrix_to_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _parse_looks_flag(text: str):
    """Parse --looks: 'estimate', 'fixed', 'fixed:<L>', or a bare number."""
    if text == "estimate":
        return ("estimate", None)
    if text == "fixed":
        return ("fixed", None)
    if text.startswith("fixed:"):
        return ("fixed", float(text.split(":", 1)[1]))
    return ("fixed", float(text))


def _load_theta(args) -> WishartParams:
    if args.preset:
        return presets.preset_params(args.preset, looks=args.looks)
    if args.sigma:
        with open(args.sigma, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        entries = doc["matrices"][0] if "matrices" in doc else doc
        arr = np.asarray(entries, dtype=float)
        sigma = arr[..., 0] + 1j * arr[..., 1]
        return WishartParams(sigma, args.looks)
    raise UsageError("either --preset or --sigma is required")


def _json_out(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sample(args) -> int:
    theta = _load_theta(args)
    if args.rows or args.cols:
        if not (args.rows and args.cols):
            raise UsageError("--rows and --cols must be given together")
        n = args.rows * args.cols
    else:
        n = args.count
    if n is None:
        raise UsageError("one of --count or --rows/--cols is required")
    draws = sample(theta, n, args.seed)
    if args.rows:
        raster = CovRaster(draws.reshape(args.rows, args.cols, theta.p, theta.p), theta.looks)
        formats.write_raster(raster, args.output)
    else:
        formats.write_sample(draws, args.output, looks=theta.looks)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    obs, hint = formats.load_observations(args.input)
    arr = as_sample(obs)
    if args.fixed_looks is not None:
        est = estimate(arr, init_looks=args.fixed_looks, fix_looks=True)
    else:
        init = args.looks_init if args.looks_init is not None else (hint or 4.0)
        est = estimate(arr, init_looks=init)
    _json_out(
        {
            "p": est.params.p,
            "looks": est.looks,
            "sigma": _matrix_to_json(est.sigma),
            "sample_size": est.sample_size,
            "mean_logdet": est.mean_logdet,
            "looks_mode": "fixed" if args.fixed_looks is not None else "estimated",
        },
        args.output,
    )
    return EXIT_OK


def _cmd_test(args) -> int:
    obs_a, hint_a = formats.load_observations(args.sample_a)
    obs_b, hint_b = formats.load_observations(args.sample_b)
    a = as_sample(obs_a)
    b = as_sample(obs_b)
    mode, value = _parse_looks_flag(args.looks)
    if mode == "fixed" and value is None:
        value = hint_a if hint_a is not None else hint_b
        if value is None:
            raise UsageError("--looks fixed requires a value or a sample file with a looks hint")
    looks = None if mode == "estimate" else value
    res = hypotests.two_sample_test(
        a, b, args.method, looks=looks, beta=args.beta, variance=args.entropy_variance
    )
    doc = {
        "method": res.method,
        "statistic": res.statistic,
        "df": res.df,
        "p_value": res.p_value,
        "looks_mode": res.looks_mode,
        "beta": res.beta,
        "n1": len(a),
        "n2": len(b),
    }
    if args.alpha is not None:
        doc["alpha"] = args.alpha
        doc["reject"] = res.reject(args.alpha)
    _json_out(doc, args.output)
    return EXIT_OK


def _overridden_size_config(args) -> experiments.SizeExperimentConfig:
    if args.config:
        cfg = experiments.SizeExperimentConfig.from_json(args.config)
    elif args.preset == "table-size":
        cfg = presets.size_preset()
    else:
        raise UsageError("either --config or --preset table-size is required")
    updates = {}
    if args.replications is not None:
        updates["replications"] = args.replications
    if args.seed is not None:
        updates["seed"] = args.seed
    if updates:
        from dataclasses import replace

        cfg = replace(cfg, **updates)
    return cfg


def _cmd_mc_size(args) -> int:
    cfg = _overridden_size_config(args)
    report = experiments.run_size_experiment(cfg, threads=args.threads or 1)
    report.to_csv(args.output)
    print(json.dumps(report.meta))
    return EXIT_OK


def _cmd_mc_power(args) -> int:
    if args.config:
        cfg = experiments.PowerExperimentConfig.from_json(args.config)
    elif args.preset == "table-power":
        cfg = presets.power_preset()
    else:
        raise UsageError("either --config or --preset table-power is required")
    if args.replications is not None or args.seed is not None:
        from dataclasses import replace

        updates = {}
        if args.replications is not None:
            updates["replications"] = args.replications
        if args.seed is not None:
            updates["seed"] = args.seed
        cfg = replace(cfg, **updates)
    report = experiments.run_power_experiment(cfg, threads=args.threads or 1)
    report.to_csv(args.output)
    print(json.dumps(report.meta))
    return EXIT_OK


def _cmd_same_target(args) -> int:
    regions = []
    for path in args.regions:
        obs, _ = formats.load_observations(path)
        regions.append(obs)
    mode, value = _parse_looks_flag(args.looks)
    report = experiments.run_same_target_experiment(
        regions,
        sample_sizes=args.sizes,
        levels=args.levels,
        replications=args.replications,
        seed=args.seed,
        methods=args.methods.split(","),
        beta=args.beta,
        looks=None if mode == "estimate" else value,
        pairing=args.pairing,
        threads=args.threads or 1,
    )
    report.to_csv(args.output)
    print(json.dumps(report.meta))
    return EXIT_OK


def _cmd_detect(args) -> int:
    before = formats.read_raster(args.before)
    after = formats.read_raster(args.after)
    if args.looks is None or args.looks == "nominal":
        looks = "nominal"
    else:
        mode, value = _parse_looks_flag(args.looks)
        looks = None if mode == "estimate" else value
    pmap = detector.detect(
        before,
        after,
        method=args.method,
        window=args.window,
        looks=looks,
        beta=args.beta,
        variance=args.entropy_variance,
        threads=args.threads or 1,
    )
    formats.write_pvalue_map(pmap, args.output)
    mask = detector.threshold(pmap, args.threshold)
    if args.mask:
        formats.mask_to_pgm(mask, args.mask)
    if args.png:
        formats.render_pvalue_png(pmap, args.png, cut=args.threshold)
    print(
        json.dumps(
            {
                "method": args.method,
                "window": args.window,
                "threshold": args.threshold,
                "changed_pixels": int(mask.values.sum()),
                "failures": pmap.failures,
            }
        )
    )
    return EXIT_OK


def _cmd_metrics(args) -> int:
    mask = formats.read_mask(args.mask)
    reference = formats.read_mask(args.reference)
    metrics = detector.score(mask, reference, paper_literal=args.paper_literal_metrics)
    _json_out(metrics.as_dict(), args.output)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="polsarcd", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"polsarcd {__version__} (formats: "
        + ", ".join(f"{k} {v}" for k, v in FORMAT_VERSIONS.items())
        + ")",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw observations from a Wishart law")
    sp.add_argument("--preset", choices=sorted(presets.SIGMA_PRESETS), help="named covariance")
    sp.add_argument("--sigma", help="JSON file with a covariance matrix as [re, im] pairs")
    sp.add_argument("--looks", type=float, default=4.0, help="number of looks (default 4)")
    sp.add_argument("--count", "-n", type=int, help="number of draws (flat sample output)")
    sp.add_argument("--rows", type=int, help="raster rows (PCMR output)")
    sp.add_argument("--cols", type=int, help="raster cols (PCMR output)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", "-o", required=True, help=".wsample.json or .pcmr path")
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("estimate", help="maximum-likelihood fit of a sample")
    sp.add_argument("input", help="sample file (.wsample.json or .pcmr)")
    sp.add_argument("--looks-init", type=float, help="Newton start (default: file hint or 4)")
    sp.add_argument("--fixed-looks", type=float, help="skip estimation and fix the looks")
    sp.add_argument("--output", "-o", help="write JSON here instead of stdout")
    sp.set_defaults(func=_cmd_estimate)

    sp = sub.add_parser("test", help="two-sample hypothesis test")
    sp.add_argument("sample_a")
    sp.add_argument("sample_b")
    sp.add_argument("--method", choices=hypotests.METHODS, default="shannon")
    sp.add_argument("--beta", type=float, default=0.1, help="Renyi order (default 0.1)")
    sp.add_argument(
        "--looks",
        default="estimate",
        help="'estimate', 'fixed:<L>', or 'fixed' to use the file hint",
    )
    sp.add_argument("--entropy-variance", choices=("auto", "full", "profile"), default="auto")
    sp.add_argument("--alpha", type=float, help="also report the decision at this level")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=_cmd_test)

    for name, fn, preset_name in (
        ("mc-size", _cmd_mc_size, "table-size"),
        ("mc-power", _cmd_mc_power, "table-power"),
    ):
        sp = sub.add_parser(name, help=f"Monte Carlo {name[3:]} experiment")
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--preset", choices=(preset_name,), help="built-in configuration")
        sp.add_argument("--replications", "-T", type=int, help="override replication count")
        sp.add_argument("--seed", type=int, help="override the seed")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")
        sp.add_argument("--output", "-o", required=True, help="CSV report path")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("same-target", help="resampling experiment on observed regions")
    sp.add_argument("regions", nargs="+", help="region sample files")
    sp.add_argument("--sizes", type=int, nargs="+", required=True, help="subsample sizes N")
    sp.add_argument("--levels", type=float, nargs="+", default=[0.01, 0.05, 0.10])
    sp.add_argument("--replications", "-T", type=int, default=5500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--methods", default="lr,kl,shannon,renyi")
    sp.add_argument("--beta", type=float, default=0.1)
    sp.add_argument("--looks", default="estimate")
    sp.add_argument("--pairing", choices=("within", "across"), default="within")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--output", "-o", required=True)
    sp.set_defaults(func=_cmd_same_target)

    sp = sub.add_parser("detect", help="sliding-window change detection on two rasters")
    sp.add_argument("before", help="PCMR raster at the first date")
    sp.add_argument("after", help="PCMR raster at the second date")
    sp.add_argument("--method", choices=hypotests.METHODS, default="shannon")
    sp.add_argument("--window", type=int, default=3)
    sp.add_argument("--threshold", type=float, default=detector.DEFAULT_CUT)
    sp.add_argument("--beta", type=float, default=0.1)
    sp.add_argument(
        "--looks",
        default="nominal",
        help="'nominal' (header value), 'estimate', or 'fixed:<L>'",
    )
    sp.add_argument("--entropy-variance", choices=("auto", "full", "profile"), default="auto")
    sp.add_argument("--threads", type=int, default=1, help="worker threads (0 = auto)")
    sp.add_argument("--output", "-o", required=True, help="PVM output path")
    sp.add_argument("--mask", help="change-mask PGM output path")
    sp.add_argument("--png", help="color rendering output path (requires Pillow)")
    sp.set_defaults(func=_cmd_detect)

    sp = sub.add_parser("metrics", help="score a change mask against a reference mask")
    sp.add_argument("--mask", required=True, help="detector mask PGM")
    sp.add_argument("--reference", required=True, help="reference mask PGM")
    sp.add_argument(
        "--paper-literal-metrics",
        action="store_true",
        help="swap the FP/FN labels to the inverted legend convention",
    )
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=_cmd_metrics)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _emit_error(EXIT_USAGE, exc)
    except (FormatError, GeometryMismatch, OSError, json.JSONDecodeError, KeyError) as exc:
        return _emit_error(EXIT_DATA, exc)
    except (NoConvergence, NotPositiveDefinite, DomainError, PolsarError) as exc:
        return _emit_error(EXIT_NUMERIC, exc)


if __name__ == "__main__":
    sys.exit(main())
