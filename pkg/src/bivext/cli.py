"""
Command-line interface: ``bivext {simulate,transform,fit,summarize,predict}``.

Exit codes: 0 success, 2 invalid usage or input, 3 input/output failure, 4 numeric failure.
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from ._errors import (
    ChainFormatError,
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    EmptyChainError,
    InfeasiblePrefixError,
    InitializationError,
)
from ._io import file_digest, read_json, write_csv, write_json
from ._likelihood import FrechetSample
from ._margins import GevFit, GevParams, gev_fit_mle, to_unit_frechet
from ._mcmc import ChainOutput, ChainState, McmcConfig, TransDimensionalSampler, diagnostics, run_chains
from ._models import ise, parse_model, sample_bivariate, true_chi, true_point_masses
from ._prior import PriorConfig, parse_k_prior
from ._summary import (
    conditional_exceedance,
    posterior_mean_ise,
    posterior_mean_pickands,
    predictive_exceedance,
    summarize,
)


__all__ = [
    "build_parser",
    "EXIT_IO",
    "EXIT_NUMERIC",
    "EXIT_OK",
    "EXIT_USAGE",
    "main",
]


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

PROGRESS_CHUNKS = 10


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None
    return a, b


def _threshold(text: str) -> float | tuple[float, float]:
    if "," in text:
        return _pair(text)
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or a pair, got {text!r}") from None


def read_margins(path: str | Path, /) -> tuple[GevParams, GevParams]:
    """
    Reads a margins file written by `transform`.

    Raises:
        OSError: If the file cannot be read.
        DomainError: If an entry is missing or invalid.
    """

    try:
        data = read_json(path)
        return GevParams.from_dict(data["margin1"]), GevParams.from_dict(data["margin2"])
    except json.JSONDecodeError as e:
        raise DomainError(f"malformed margins file {str(path)!r}: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"invalid margins in {str(path)!r}: {e}") from e


def _read_maxima(path: str | Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DomainError(f"unreadable maxima {str(path)!r}: {e}") from e
    numeric = frame.select_dtypes("number")
    if numeric.shape[1] < 2:
        raise DomainError(f"{str(path)!r} needs two numeric columns of block maxima.")
    maxima = numeric.iloc[:, :2].dropna()
    if len(maxima) < len(numeric):
        logger.warning("dropped %d rows with missing values", len(numeric) - len(maxima))
    return maxima


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.seed < 0:
        raise DomainError(f"seed must be nonnegative, got {args.seed!r}.")
    m = parse_model(args.model)
    sample = sample_bivariate(m, args.n, np.random.default_rng(args.seed))
    write_csv(sample.to_frame(), args.out)
    logger.info("wrote %d pairs from %s to %s", sample.n, m.spec(), args.out)
    return EXIT_OK


def cmd_transform(args: argparse.Namespace) -> int:
    maxima = _read_maxima(args.input)
    columns = [str(c) for c in maxima.columns]
    report: dict[str, Any] = {"columns": columns}
    if args.fixed_margins is not None:
        margins = read_margins(args.fixed_margins)
        logger.info("using fixed margins from %s", args.fixed_margins)
    else:
        fits: list[GevFit] = []
        for column in columns:
            fit = gev_fit_mle(maxima[column].to_numpy(dtype=float))
            logger.info("%s: mu=%.6g sigma=%.6g xi=%.6g", column, fit.params.mu, fit.params.sigma, fit.params.xi)
            fits.append(fit)
        margins = fits[0].params, fits[1].params
        report["fits"] = [fit.to_dict() for fit in fits]
    report["margin1"] = margins[0].to_dict()
    report["margin2"] = margins[1].to_dict()

    y1 = to_unit_frechet(margins[0], maxima[columns[0]].to_numpy(dtype=float))
    y2 = to_unit_frechet(margins[1], maxima[columns[1]].to_numpy(dtype=float))
    sample = FrechetSample(y1, y2)
    write_json(report, args.margins_out or Path(args.out).with_suffix(".margins.json"))
    write_csv(sample.to_frame(), args.out)
    return EXIT_OK


def _progress(total: int) -> Callable[[int, ChainState, bool], None]:
    chunk = max(total // PROGRESS_CHUNKS, 1)

    def on_iteration(i: int, state: ChainState, accepted: bool) -> None:
        if i % chunk == 0:
            logger.debug("iteration %d/%d: k=%d, loglik=%.4f", i, total, state.k, state.loglik)

    return on_iteration


def _chain_path(out: Path, index: int, count: int) -> Path:
    if count == 1:
        return out
    return out.with_name(f"{out.stem}.{index}{out.suffix}")


def cmd_fit(args: argparse.Namespace) -> int:
    data = FrechetSample.read_csv(args.input)
    cfg = McmcConfig(
        iterations=args.iterations,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=args.seed,
        prior=PriorConfig(parse_k_prior(args.k_prior)),
        init_k=args.init_k,
        refresh_probability=args.refresh,
    )
    metadata = {"data_sha256": file_digest(args.input), "data_n": data.n}

    if args.chains == 1:
        sampler = TransDimensionalSampler(cfg, data)
        if logger.isEnabledFor(logging.DEBUG):
            sampler.iteration_completed += _progress(cfg.iterations)
        outputs = [sampler.run()]
    else:
        outputs = run_chains(cfg, data, args.chains, n_jobs=args.jobs)

    out = Path(args.out)
    for index, output in enumerate(outputs):
        output = replace(output, metadata=metadata)
        path = _chain_path(out, index, len(outputs))
        output.save(path)
        d = diagnostics(output)
        logger.info("%s: %d states, acceptance %.4f, median k %g, ESS %.1f",
                    path, d.n_kept, d.acceptance_rate, d.k_median, d.ess_loglik)
    return EXIT_OK


def cmd_summarize(args: argparse.Namespace) -> int:
    chain = ChainOutput.load(args.chain)
    summary = summarize(chain, args.grid)
    report = {**summary.to_dict(), "diagnostics": diagnostics(chain).to_dict()}
    if args.true_model is not None:
        m = parse_model(args.true_model)
        report["truth"] = {
            "model": m.spec(),
            "chi": true_chi(m),
            "point_masses": list(true_point_masses(m)),
            "ise_of_mean": ise(posterior_mean_pickands(chain), m),
            "ise": posterior_mean_ise(chain, m).to_dict(),
        }
    write_csv(summary.to_frame(), args.out)
    write_json(report, args.report or Path(args.out).with_suffix(".json"))
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    chain = ChainOutput.load(args.chain)
    result: dict[str, Any] = {
        "joint": [
            {"y1": y1, "y2": y2, "probability": predictive_exceedance(chain, y1, y2)}
            for y1, y2 in args.y or []
        ],
    }
    if args.condition_on is not None:
        if args.q is None or args.margins is None:
            raise DomainError("--condition-on needs --q and --margins.")
        c = conditional_exceedance(chain, read_margins(args.margins), args.q, condition_on=args.condition_on)
        result["conditional"] = c.to_dict()
    elif not result["joint"]:
        raise DomainError("nothing to predict; pass --y or --condition-on.")

    if args.out is None:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        write_json(result, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bivext",
        description="Bayesian nonparametric inference of bivariate extremal dependence.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("simulate", help="draw unit-Fréchet pairs from a parametric model")
    p.add_argument("--model", required=True, help="sl:A, al:A,T1,T2, hr:L or et:W,NU")
    p.add_argument("--n", type=int, default=100, help="number of pairs")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="output CSV with columns y1,y2")
    p.set_defaults(handler=cmd_simulate)

    p = commands.add_parser("transform", help="fit GEV margins and move block maxima to the unit-Fréchet scale")
    p.add_argument("--input", required=True, help="CSV whose first two numeric columns are block maxima")
    p.add_argument("--out", required=True, help="output CSV with columns y1,y2")
    p.add_argument("--margins-out", help="margins JSON; defaults to OUT with suffix .margins.json")
    p.add_argument("--fixed-margins", help="margins JSON to use instead of fitting")
    p.set_defaults(handler=cmd_transform)

    p = commands.add_parser("fit", help="sample the posterior of the angular measure")
    p.add_argument("--input", required=True, help="unit-Fréchet CSV with columns y1,y2")
    p.add_argument("--out", required=True, help="output chain file (JSON lines)")
    p.add_argument("--k-prior", default="poisson:7", help="poisson:KAPPA or negbin:KAPPA,SIGMA2")
    p.add_argument("--iterations", "-M", type=int, default=500_000, help="total iterations")
    p.add_argument("--burn-in", type=int, default=400_000, help="discarded leading iterations")
    p.add_argument("--thin", type=int, default=4, help="keep every THIN-th iteration after burn-in")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--init-k", type=int, help="starting order; the prior mode by default")
    p.add_argument("--refresh", type=float, default=0.5, help="probability of a same-order redraw")
    p.add_argument("--chains", type=int, default=1, help="independent chains, written to OUT-stem.I.suffix")
    p.add_argument("--jobs", type=int, help="concurrent workers; BIVEXT_THREADS or 1 by default")
    p.set_defaults(handler=cmd_fit)

    p = commands.add_parser("summarize", help="pointwise posterior summaries")
    p.add_argument("--chain", required=True, help="chain file written by fit")
    p.add_argument("--out", required=True, help="output CSV of the Pickands function and angular density")
    p.add_argument("--report", help="output JSON report; defaults to OUT with suffix .json")
    p.add_argument("--grid", type=int, default=101, help="number of grid points on [0, 1]")
    p.add_argument("--true-model", help="parametric truth to compare against, e.g. sl:0.45")
    p.set_defaults(handler=cmd_summarize)

    p = commands.add_parser("predict", help="predictive joint and conditional exceedance probabilities")
    p.add_argument("--chain", required=True, help="chain file written by fit")
    p.add_argument("--y", type=_pair, action="append", metavar="Y1,Y2", help="unit-Fréchet thresholds; repeatable")
    p.add_argument("--condition-on", type=int, choices=(1, 2), help="conditioning variable")
    p.add_argument("--q", type=_threshold, metavar="Q[,Q2]", help="data-scale threshold, shared or per variable")
    p.add_argument("--margins", help="margins JSON written by transform")
    p.add_argument("--out", help="output JSON; standard output by default")
    p.set_defaults(handler=cmd_predict)

    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("bivext").setLevel(level)


def main(argv: Sequence[str] | None = None) -> int:
    """
    Runs the command line and returns the exit code.
    """

    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return args.handler(args)
    except DomainError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except (OSError, ChainFormatError, EmptyChainError) as e:
        logger.error("%s", e)
        return EXIT_IO
    except (ConvergenceError, DegenerateDataError, InitializationError, InfeasiblePrefixError) as e:
        logger.error("%s", e)
        return EXIT_NUMERIC
