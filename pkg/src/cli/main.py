"""
Command-line entry point for the edge-triangle laboratory.

Subcommands:
    phase      - phase-diagram grid with the traced critical curve
    meanfield  - exact mean-field tables (distribution, mgf, rate, laplace)
    sample     - one Glauber chain from a TOML/JSON config, written as a trace
    verify     - verification suites, written as verdict records
    enumerate  - exact small-n law, partition polynomial and its zeros

Exit codes: 0 success, 1 a hard verdict failed, 2 usage or configuration
error (including domain, regime and size errors from the model).
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.cli.config import (
    EnumerateDocument,
    MeanFieldDocument,
    MeanFieldTable,
    OutputFormat,
    PhaseScanDocument,
    SampleDocument,
    Suite,
    VerifyDocument,
    load_config_file,
    validate_document,
)
from src.core.exceptions import (
    ConfigurationError,
    ExportError,
    HarnessError,
    LabException,
    ModelError,
    raise_config_error,
)
from src.core.logging_config import setup_logging
from src.core.settings import get_settings
from src.enumeration.smalln import enumerate_ensemble, polynomial_coefficients, with_zeros, zeros_frame
from src.export.writers import build_metadata, write_json, write_table
from src.harness.verdicts import TheoremVerdict, any_hard_failure, verdict_table
from src.harness.verify import (
    DEFAULT_ER_H_LIST,
    DEFAULT_ORACLE_PARAMS,
    Source,
    verify_clt,
    verify_critical_scaling,
    verify_erdos_renyi,
    verify_free_energy,
    verify_large_deviations,
    verify_mixture,
    verify_rate,
    verify_slln,
    verify_small_n_oracle,
)
from src.meanfield.exact import (
    FluctuationScale,
    Lattice,
    exact_distribution,
    laplace_check,
    scaled_fluctuation_mgf_curve,
)
from src.phase.limits import gaussian_mgf, quartic_mgf
from src.phase.scan import phase_scan
from src.phase.solver import (
    CRITICAL_QUARTIC,
    ModelParams,
    Regime,
    classify_phase,
    critical_curve_h,
    limiting_variance,
    rate_function,
)
from src.sampler.chain import run_chain

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2

MIXTURE_DEFAULT_ALPHA = 4.0
LDP_DEFAULT_EPSILON = 0.1


def _output_format(document) -> str:
    return document.format.value if document.format else get_settings().output_format


def _output_path(document, stem: str) -> Path:
    if document.output:
        return Path(document.output)
    return Path(get_settings().output_dir) / f"{stem}.{_output_format(document)}"


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix}")


# ---------------------------------------------------------------------------
# phase
# ---------------------------------------------------------------------------

def cmd_phase(document: PhaseScanDocument) -> Path:
    alphas = np.linspace(document.alpha_min, document.alpha_max, document.alpha_steps)
    hs = np.linspace(document.h_min, document.h_max, document.h_steps)
    table = phase_scan(alphas, hs, tol=document.tol, curve_points=document.curve_points)
    metadata = build_metadata("phase", document.model_dump(mode="json"))
    path = write_table(table, _output_path(document, "phase"), metadata, _output_format(document))
    logger.info(f"phase scan: {len(table)} rows -> {path}")
    return path


# ---------------------------------------------------------------------------
# meanfield
# ---------------------------------------------------------------------------

def _default_lattice(what: MeanFieldTable) -> Lattice:
    return Lattice.GAMMA if what == MeanFieldTable.DISTRIBUTION else Lattice.EDGE


def meanfield_table(document: MeanFieldDocument) -> pd.DataFrame:
    """The exact table requested by `what`."""
    params = document.params
    lattice = document.lattice or _default_lattice(document.what)
    n = document.n

    if document.what == MeanFieldTable.DISTRIBUTION:
        return exact_distribution(n, params, lattice).to_frame()

    if document.what == MeanFieldTable.MGF:
        portrait = classify_phase(params)
        critical = portrait.regime == Regime.CRITICAL_POINT
        scale = document.scale or (FluctuationScale.CRITICAL if critical else FluctuationScale.CLT)
        t_values = np.linspace(document.t_min, document.t_max, document.t_steps)
        mgf = scaled_fluctuation_mgf_curve(n, params, t_values, scale, document.center, lattice)
        if scale == FluctuationScale.CRITICAL and critical:
            limit = [quartic_mgf(t, CRITICAL_QUARTIC) for t in t_values]
        elif scale == FluctuationScale.CLT and portrait.regime == Regime.UNIQUENESS:
            v = limiting_variance(portrait)
            limit = [gaussian_mgf(t, v) for t in t_values]
        else:
            limit = [np.nan] * len(t_values)
        return pd.DataFrame({"t": t_values, "mgf": mgf, "limit": limit})

    if document.what == MeanFieldTable.RATE:
        dist = exact_distribution(n, params, lattice)
        x = dist.grid.values
        top = float(np.max(dist.log_weights))
        return pd.DataFrame({
            "k": dist.grid.counts,
            "x": x,
            "rate": rate_function(x, params),
            "exact_rate": (top - dist.log_weights) / (2.0 * dist.grid.site_scale),
        })

    check = laplace_check(n, params, document.delta, lattice)
    return pd.DataFrame({
        "n": check.n,
        "lattice": check.lattice.value,
        "delta": check.delta,
        "maximizer": list(range(len(check.window_sums))),
        "log_partition_exact": check.log_partition_exact,
        "log_partition_laplace": check.log_partition_laplace,
        "discrepancy": check.discrepancy,
        "window_sum": check.window_sums,
        "riemann_window_sum": check.riemann_window_sums,
        "limiting_window_sum": check.limiting_window_sums,
    })


def cmd_meanfield(document: MeanFieldDocument) -> Path:
    table = meanfield_table(document)
    resolved = document.model_dump(mode="json")
    resolved["lattice"] = (document.lattice or _default_lattice(document.what)).value
    metadata = build_metadata("meanfield", resolved)
    stem = f"meanfield_{document.what.value}_n{document.n}"
    path = write_table(table, _output_path(document, stem), metadata, _output_format(document))
    logger.info(f"meanfield {document.what.value}: {len(table)} rows -> {path}")
    return path


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------

def cmd_sample(document: SampleDocument) -> Path:
    config = document.chain_config()
    trace = run_chain(config)
    resolved = config.model_dump(mode="json")
    resolved["config_hash"] = config.config_hash()
    metadata = build_metadata("sample", resolved, seed=config.seed)
    stem = f"trace_n{config.n}_seed{config.seed}_stream{config.stream}"
    path = write_table(trace.to_frame(), _output_path(document, stem), metadata, _output_format(document))
    logger.info(f"trace of {len(trace)} samples (flip rate {trace.flip_rate:.4f}) -> {path}")
    return path


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _params(document: VerifyDocument, default: ModelParams) -> ModelParams:
    if document.alpha is None and document.h is None:
        return default
    if document.alpha is None or document.h is None:
        raise_config_error("alpha and h must be given together", field="alpha" if document.alpha is None else "h")
    return ModelParams(alpha=document.alpha, h=document.h)


def _mixture_params(document: VerifyDocument) -> ModelParams:
    alpha = MIXTURE_DEFAULT_ALPHA if document.alpha is None else document.alpha
    h = critical_curve_h(alpha) if document.h is None else document.h
    return ModelParams(alpha=alpha, h=h)


def _suite_runners(document: VerifyDocument) -> Dict[Suite, Callable[[], List[TheoremVerdict]]]:
    d = document
    origin = ModelParams(alpha=0.0, h=0.0)
    return {
        Suite.SLLN: lambda: [verify_slln(_params(d, origin), d.n_list, d.budget)],
        Suite.CLT: lambda: [verify_clt(_params(d, origin), d.n or 128, d.budget)],
        Suite.CRITICAL: lambda: [verify_critical_scaling(d.n_list, d.budget, d.source, d.lattice or Lattice.EDGE)],
        Suite.MIXTURE: lambda: verify_mixture(_mixture_params(d), d.n_list, d.epsilon, d.lattice or Lattice.EDGE,
                                              d.budget, d.sampler_n_list),
        Suite.RATE: lambda: verify_rate(_params(d, origin), d.n_list, d.lattice or Lattice.EDGE,
                                        d.budget, d.sampler_n_list),
        Suite.FREE_ENERGY: lambda: [verify_free_energy(_params(d, ModelParams(alpha=1.0, h=0.0)), d.n_list,
                                                       d.lattice or Lattice.GAMMA)],
        Suite.LDP: lambda: [verify_large_deviations(_params(d, origin), d.n_list,
                                                    d.epsilon or LDP_DEFAULT_EPSILON, d.lattice or Lattice.EDGE)],
        Suite.ERDOS_RENYI: lambda: verify_erdos_renyi(d.h_list or DEFAULT_ER_H_LIST, d.n or 100, d.budget,
                                                      (d.sampler_n_list or [64])[0]),
        Suite.ORACLE: lambda: [verify_small_n_oracle(
            DEFAULT_ORACLE_PARAMS if d.alpha is None and d.h is None else [_params(d, origin)],
            d.oracle_n, d.budget)],
    }


def run_suite(document: VerifyDocument) -> List[TheoremVerdict]:
    """Verdicts of the requested suite; `all` runs every suite on its defaults."""
    if document.suite is None:
        raise_config_error("no suite selected", field="suite")

    if document.suite != Suite.ALL:
        suites = [document.suite]
        runners = _suite_runners(document)
    else:
        defaults = VerifyDocument(budget=document.budget, source=document.source)
        runners = _suite_runners(defaults)
        suites = [s for s in Suite if s != Suite.ALL]
        if document.budget is None:
            suites = [s for s in suites if s not in (Suite.SLLN, Suite.CLT)]
            logger.warning("no sampler budget: skipping slln and clt, sampler evidence omitted")
        if document.source == Source.SAMPLER and document.budget is None:
            suites.remove(Suite.CRITICAL)

    verdicts: List[TheoremVerdict] = []
    for suite in suites:
        logger.info(f"running suite {suite.value}")
        try:
            verdicts.extend(runners[suite]())
        except LabException as e:
            e.details.setdefault("suite", suite.value)
            logger.error(f"suite {suite.value} failed: {e}")
            raise
    return verdicts


def _verdict_frame(verdicts: Sequence[TheoremVerdict]) -> pd.DataFrame:
    return pd.DataFrame([{
        "claim_id": v.claim_id,
        "theorem": v.theorem,
        "status": v.status,
        "passed": v.passed,
        "evidence_only": v.evidence_only,
        "predicted": json.dumps(v.predicted, sort_keys=True, default=str),
        "estimated": json.dumps(v.estimated, sort_keys=True, default=str),
        "uncertainty": json.dumps(v.uncertainty, sort_keys=True, default=str),
        "tolerance_policy": v.tolerance_policy,
    } for v in verdicts])


def cmd_verify(document: VerifyDocument) -> int:
    verdicts = run_suite(document)
    resolved = document.model_dump(mode="json")
    seed = document.budget.seed if document.budget is not None else None
    metadata = build_metadata("verify", resolved, seed=seed)
    path = _output_path(document, f"verdicts_{document.suite.value}")
    if _output_format(document) == OutputFormat.JSON.value:
        write_json(verdicts, path, metadata)
    else:
        write_table(_verdict_frame(verdicts), path, metadata, OutputFormat.CSV.value)

    print(verdict_table(verdicts))
    failed = any_hard_failure(verdicts)
    logger.info(f"{len(verdicts)} verdict(s) -> {path}; hard failure: {failed}")
    return EXIT_VERIFICATION_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------

def cmd_enumerate(document: EnumerateDocument) -> List[Path]:
    result = enumerate_ensemble(document.n, document.params)
    poly = polynomial_coefficients(document.n, document.alpha)
    table = result.to_frame()
    table["log_coefficient"] = poly.log_coefficients
    metadata = build_metadata("enumerate", document.model_dump(mode="json"))
    fmt = _output_format(document)
    path = _output_path(document, f"enumerate_n{document.n}")
    paths = [write_table(table, path, metadata, fmt)]
    if document.zeros:
        paths.append(write_table(zeros_frame(with_zeros(poly)), _sibling(path, "zeros"), metadata, fmt))
    logger.info(f"n={document.n}: ln Z = {result.log_partition:.12f}, E[E] = {result.expected_edge_count:.6f}")
    return paths


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _document(args: argparse.Namespace, flags: Dict[str, Any], model):
    """Config file (if any) overlaid with the flags that were given."""
    data = load_config_file(args.config) if getattr(args, "config", None) else {}
    data.update({k: v for k, v in flags.items() if v is not None})
    return validate_document(model, data)


def _common_flags(args: argparse.Namespace) -> Dict[str, Any]:
    return {"output": args.output, "format": args.format}


def _handle_phase(args: argparse.Namespace) -> int:
    flags = _common_flags(args)
    if args.alpha_range:
        flags.update(alpha_min=args.alpha_range[0], alpha_max=args.alpha_range[1])
    if args.h_range:
        flags.update(h_min=args.h_range[0], h_max=args.h_range[1])
    if args.grid:
        flags.update(alpha_steps=args.grid[0], h_steps=args.grid[1])
    flags.update(tol=args.tol, curve_points=args.curve_points)
    cmd_phase(_document(args, flags, PhaseScanDocument))
    return EXIT_OK


def _handle_meanfield(args: argparse.Namespace) -> int:
    flags = _common_flags(args)
    flags.update(n=args.n, alpha=args.alpha, h=args.h, what=args.what, lattice=args.lattice,
                 t_steps=args.t_steps, scale=args.scale, center=args.center, delta=args.delta)
    if args.t_range:
        flags.update(t_min=args.t_range[0], t_max=args.t_range[1])
    cmd_meanfield(_document(args, flags, MeanFieldDocument))
    return EXIT_OK


def _handle_sample(args: argparse.Namespace) -> int:
    cmd_sample(_document(args, _common_flags(args), SampleDocument))
    return EXIT_OK


def _handle_verify(args: argparse.Namespace) -> int:
    flags = _common_flags(args)
    flags["suite"] = args.suite
    return cmd_verify(_document(args, flags, VerifyDocument))


def _handle_enumerate(args: argparse.Namespace) -> int:
    flags = _common_flags(args)
    flags.update(n=args.n, alpha=args.alpha, h=args.h, zeros=True if args.zeros else None)
    cmd_enumerate(_document(args, flags, EnumerateDocument))
    return EXIT_OK


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", help="Output file (default: <output_dir>/<name>.<format>)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], help="csv or json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edge-triangle-lab",
        description="Numerical laboratory for the edge-triangle exponential random graph model",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  edge-triangle-lab phase --alpha-range 0 5 --h-range -2 0 --grid 26 21
  edge-triangle-lab meanfield --n 500 --alpha 3.375 --h -0.806853 --what mgf
  edge-triangle-lab sample configs/chain.toml
  edge-triangle-lab verify --suite critical
  edge-triangle-lab enumerate --n 5 --alpha 2 --h -0.5 --zeros
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    phase = subparsers.add_parser("phase", help="Phase-diagram grid and critical curve")
    phase.add_argument("--config", help="TOML/JSON document with the scan settings")
    phase.add_argument("--alpha-range", nargs=2, type=float, metavar=("MIN", "MAX"))
    phase.add_argument("--h-range", nargs=2, type=float, metavar=("MIN", "MAX"))
    phase.add_argument("--grid", nargs=2, type=int, metavar=("ALPHA_STEPS", "H_STEPS"))
    phase.add_argument("--tol", type=float, help="Root tolerance (default from settings)")
    phase.add_argument("--curve-points", type=int, help="Points on the traced critical curve")
    _add_output_flags(phase)
    phase.set_defaults(handler=_handle_phase)

    meanfield = subparsers.add_parser("meanfield", help="Exact mean-field tables")
    meanfield.add_argument("--config", help="TOML/JSON document")
    meanfield.add_argument("--n", type=int)
    meanfield.add_argument("--alpha", type=float)
    meanfield.add_argument("--h", type=float)
    meanfield.add_argument("--what", choices=[w.value for w in MeanFieldTable])
    meanfield.add_argument("--lattice", choices=[l.value for l in Lattice])
    meanfield.add_argument("--t-range", nargs=2, type=float, metavar=("MIN", "MAX"))
    meanfield.add_argument("--t-steps", type=int)
    meanfield.add_argument("--scale", choices=[s.value for s in FluctuationScale])
    meanfield.add_argument("--center", choices=["exact_mean", "maximizer"])
    meanfield.add_argument("--delta", type=float, help="Laplace window exponent")
    _add_output_flags(meanfield)
    meanfield.set_defaults(handler=_handle_meanfield)

    sample = subparsers.add_parser("sample", help="Run one Glauber chain from a config file")
    sample.add_argument("config", help="TOML/JSON chain document (seed is mandatory)")
    _add_output_flags(sample)
    sample.set_defaults(handler=_handle_sample)

    verify = subparsers.add_parser("verify", help="Run verification suites")
    verify.add_argument("--suite", choices=[s.value for s in Suite])
    verify.add_argument("--config", help="TOML/JSON document (params, n_list, budget, ...)")
    _add_output_flags(verify)
    verify.set_defaults(handler=_handle_verify)

    enumerate_cmd = subparsers.add_parser("enumerate", help="Exact small-n enumeration")
    enumerate_cmd.add_argument("--config", help="TOML/JSON document")
    enumerate_cmd.add_argument("--n", type=int)
    enumerate_cmd.add_argument("--alpha", type=float)
    enumerate_cmd.add_argument("--h", type=float)
    enumerate_cmd.add_argument("--zeros", action="store_true", help="Also write the partition polynomial zeros")
    _add_output_flags(enumerate_cmd)
    enumerate_cmd.set_defaults(handler=_handle_enumerate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes."""
    if not logging.getLogger().hasHandlers():
        setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        return args.handler(args)
    except ConfigurationError as e:
        logger.error(f"configuration error: {e}")
    except ModelError as e:
        logger.error(f"{type(e).__name__}: {e}")
    except HarnessError as e:
        logger.error(f"harness error: {e}")
    except ExportError as e:
        logger.error(f"output error: {e}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
