#!/usr/bin/env python3
"""
Command-line interface for toeplitz-rigidity.
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .commands import CommandResult, parse_complex
from .commands import check as check_mod
from .commands import fixedpoint as fixedpoint_mod
from .commands import genus as genus_mod
from .commands import loops as loops_mod
from .commands import qexpand as qexpand_mod
from .commands import selftest as selftest_mod
from .commands import theta_eval as theta_mod
from .commands import transgression as transgression_mod
from .config import RunConfig, build_run_config, initialize_config
from .exceptions import ToeplitzError
from .logging_config import configure_logging
from .output_formatter import format_output, infer_format, print_summary, save_output

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 2


def _csv_list(text: Optional[str]) -> Optional[List[str]]:
    if not text:
        return None
    return [item.strip() for item in text.split(",") if item.strip()]


def _module_levels(items: Optional[List[str]]) -> Dict[str, str]:
    levels = {}
    for item in items or []:
        name, sep, level = item.partition("=")
        if not sep or not name or not level:
            raise ValueError(f"--log-module expects NAME=LEVEL, got '{item}'")
        levels[name.strip()] = level.strip()
    return levels


def add_common_options(parser: argparse.ArgumentParser, samples: bool = False, odd: bool = False) -> None:
    """Flags shared by every subcommand; ``None`` means "use the profile value"."""
    parser.add_argument("--q-trunc", type=int, help="Doubled q-exponent cutoff (coefficients of q^0 .. q^{(n-1)/2})")
    parser.add_argument("--degree-cap", type=int, help="Highest odd degree of the transgression table")
    parser.add_argument("--tolerance", type=float, help="Residual bound for PASS")
    parser.add_argument("--precision", type=int, help="0 for double precision, otherwise mpmath decimal digits")
    parser.add_argument("--threads", type=int, help="Worker threads for sample sweeps")
    parser.add_argument("--format", choices=["json", "csv", "text", "yaml"], help="Report format")
    parser.add_argument("--output", help="Write the report to this file instead of stdout")
    parser.add_argument("--quiet", action="store_true", help="Do not print the summary table")
    parser.add_argument("--dry-run", action="store_true", help="Validate inputs without computing")
    if samples:
        parser.add_argument("--t-samples", type=int, help="Number of circle-parameter samples")
        parser.add_argument("--tau-samples", type=int, help="Number of upper-half-plane samples")
    if odd:
        parser.add_argument("--odd-start", type=int, choices=[0, 1],
                            help="First n of the odd character sum (1 drops the c1 pairing)")


def setup_theta_commands(subparsers) -> None:
    """Setup theta-function commands."""
    theta_parser = subparsers.add_parser("theta-eval", help="Evaluate a Jacobi theta function")
    theta_parser.add_argument("--kind", default="theta", help="theta, theta1, theta2 or theta3")
    theta_parser.add_argument("--v", default="0.1", help="Elliptic variable (complex, e.g. 0.1+0.2i)")
    theta_parser.add_argument("--tau", default="i", help="Point of the upper half plane")
    theta_parser.add_argument("--suite", action="store_true", help="Also run the S-law and shift-law suites")
    add_common_options(theta_parser)


def setup_bundle_commands(subparsers) -> None:
    """Setup Witten bundle and transgression commands."""
    qexpand_parser = subparsers.add_parser("qexpand", help="Expand a Witten bundle as a q-series of K-classes")
    qexpand_parser.add_argument("bundle", choices=list(qexpand_mod.THETA_BUNDLES) + list(qexpand_mod.Q_BUNDLES),
                                help="Bundle to expand")
    qexpand_parser.add_argument("--dim-m", type=int, default=4, help="Rank of TM")
    qexpand_parser.add_argument("--dim-v", type=int, default=4, help="Rank of V")
    qexpand_parser.add_argument("--rank-e", type=int, default=8, help="Rank N of E (Q bundles)")
    qexpand_parser.add_argument("--virtual", action="store_true", help="Use reduced bundles W - C^{rank W}")
    add_common_options(qexpand_parser)

    trans_parser = subparsers.add_parser("transgression", help="Transgression coefficients of Q_j(E)")
    trans_parser.add_argument("--j", type=int, choices=[1, 2, 3], required=True, help="Family index")
    trans_parser.add_argument("--rank-e", type=int, help="Rank N of E")
    trans_parser.add_argument("--tau", help="Also compare with Lambert sums at this point")
    add_common_options(trans_parser)


def setup_loop_commands(subparsers) -> None:
    """Setup quadrature commands on sampled loops."""
    winding_parser = subparsers.add_parser("winding", help="Winding number of a loop in U(N)")
    winding_parser.add_argument("path", nargs="?", help="CSV file of S1 samples")
    winding_parser.add_argument("--builtin-winding", type=int, help="Use diag(e^{ik phi}, 1, ...) with this k")
    winding_parser.add_argument("--size", type=int, default=2, help="Matrix size of the built-in loop")
    winding_parser.add_argument("--resolution", type=int, default=256, help="Grid size of the built-in loop")
    add_common_options(winding_parser)

    degree_parser = subparsers.add_parser("degree3", help="c3 pairing of a map S3 -> U(N)")
    degree_parser.add_argument("path", nargs="?", help="CSV file of S3 samples (Hopf coordinates)")
    degree_parser.add_argument("--resolution", type=int, default=24, help="Grid size per angle of the built-in map")
    degree_parser.add_argument("--block", type=int, default=0, help="Identity block added to the built-in map")
    degree_parser.add_argument("--refine", action="store_true", help="Repeat at twice the resolution")
    add_common_options(degree_parser)


def setup_genus_commands(subparsers) -> None:
    """Setup genus commands."""
    genus_parser = subparsers.add_parser("genus", help="Genera of a model manifold")
    genus_parser.add_argument("dataset", help="Model dataset (path or shipped name)")
    genus_parser.add_argument("--which", help="Comma-separated genus families (default L,W,Wp)")
    genus_parser.add_argument("--rank-e", type=int, help="Rank N of E")
    genus_parser.add_argument("--no-modular", action="store_true", help="Skip the modularity check")
    genus_parser.add_argument("--index-check", action="store_true",
                              help="Compare with minus the index on the trivial action")
    add_common_options(genus_parser, samples=True)


def setup_fixedpoint_commands(subparsers) -> None:
    """Setup fixed-point commands."""
    fp_parser = subparsers.add_parser("fixedpoint", help="Anomaly and F-functions of an equivariant dataset")
    fp_parser.add_argument("dataset", help="Equivariant dataset (path or shipped name)")
    fp_parser.add_argument("--kinds", help="Comma-separated F families (default L,W,Wp)")
    fp_parser.add_argument("--t", help="Circle parameter t (h = e^{2 pi i t})")
    fp_parser.add_argument("--no-index", action="store_true", help="Skip the index comparison")
    add_common_options(fp_parser, odd=True)

    scan_parser = subparsers.add_parser("rigidity-scan", help="Variation of F across t samples")
    scan_parser.add_argument("dataset", help="Equivariant dataset (path or shipped name)")
    scan_parser.add_argument("--kinds", help="Comma-separated F families (default W,Wp)")
    scan_parser.add_argument("--tau", help="Also compare summed values at this point")
    add_common_options(scan_parser, samples=True, odd=True)

    sig_parser = subparsers.add_parser("signature", help="Constancy of the signature function")
    sig_parser.add_argument("dataset", help="Equivariant dataset (path or shipped name)")
    sig_parser.add_argument("--count", type=int, default=50, help="Number of z samples")
    add_common_options(sig_parser, odd=True)


def setup_check_commands(subparsers) -> None:
    """Setup transformation-law checks and the self-test."""
    mod_parser = subparsers.add_parser("check-modular", help="Modular-form law of a built-in function")
    mod_parser.add_argument("--fn", choices=check_mod.MODULAR_FUNCTIONS, default="transgression",
                            help="Function to check")
    mod_parser.add_argument("--j", type=int, default=2, help="Family index of the transgression coefficient")
    mod_parser.add_argument("--degree", type=int, default=7, help="Degree of the transgression coefficient")
    mod_parser.add_argument("--dataset", help="Model dataset for genus checks")
    mod_parser.add_argument("--which", default="W", help="Genus family for genus checks")
    mod_parser.add_argument("--weight", type=int, help="Override the weight")
    mod_parser.add_argument("--group", help="gamma-0-2, gamma-upper-0-2, gamma-theta or sl2z")
    mod_parser.add_argument("--rank-e", type=int, help="Rank N of E")
    add_common_options(mod_parser, samples=True)

    jac_parser = subparsers.add_parser("check-jacobi", help="Jacobi-form law of an F-function")
    jac_parser.add_argument("--fn", required=True, help="fL, fW, fWp, fdR1, fdR2 or fdR3")
    jac_parser.add_argument("--dataset", required=True, help="Equivariant dataset (path or shipped name)")
    jac_parser.add_argument("--index", help="Override the index m (e.g. 0, 1/2, 1)")
    jac_parser.add_argument("--weight", type=int, help="Override the weight")
    jac_parser.add_argument("--group", help="gamma-0-2, gamma-upper-0-2, gamma-theta or sl2z")
    jac_parser.add_argument("--law-tolerance", type=float, default=check_mod.JACOBI_TOLERANCE,
                            help="Residual bound for PASS")
    jac_parser.add_argument("--partner-laws", action="store_true", help="Also check the S- and T-laws")
    add_common_options(jac_parser, samples=True, odd=True)

    self_parser = subparsers.add_parser("selftest", help="Run the self-test suite")
    self_parser.add_argument("--only", help=f"Comma-separated checks ({', '.join(selftest_mod.CHECKS)})")
    add_common_options(self_parser, samples=True)


# --- Command Handler Functions ---

def handle_theta_eval(config: RunConfig, args) -> CommandResult:
    return theta_mod.run_theta_eval(config, args.kind, parse_complex(args.v), parse_complex(args.tau),
                                    args.suite, args.dry_run)


def handle_qexpand(config: RunConfig, args) -> CommandResult:
    return qexpand_mod.run_qexpand(config, args.bundle, args.dim_m, args.dim_v, args.rank_e, args.virtual,
                                   args.dry_run)


def handle_transgression(config: RunConfig, args) -> CommandResult:
    tau = parse_complex(args.tau) if args.tau else None
    return transgression_mod.run_transgression(config, args.j, args.rank_e, tau, args.dry_run)


def handle_winding(config: RunConfig, args) -> CommandResult:
    return loops_mod.run_winding(config, args.path, args.builtin_winding, args.size, args.resolution, args.dry_run)


def handle_degree3(config: RunConfig, args) -> CommandResult:
    return loops_mod.run_degree3(config, args.path, args.resolution, args.block, args.refine, args.dry_run)


def handle_genus(config: RunConfig, args) -> CommandResult:
    return genus_mod.run_genus(config, args.dataset, _csv_list(args.which), args.rank_e, not args.no_modular,
                               args.index_check, args.dry_run)


def handle_fixedpoint(config: RunConfig, args) -> CommandResult:
    t = parse_complex(args.t) if args.t else None
    return fixedpoint_mod.run_fixedpoint(config, args.dataset, _csv_list(args.kinds), t, not args.no_index,
                                         args.dry_run)


def handle_rigidity_scan(config: RunConfig, args) -> CommandResult:
    tau = parse_complex(args.tau) if args.tau else None
    return fixedpoint_mod.run_rigidity_scan(config, args.dataset, _csv_list(args.kinds), tau, args.dry_run)


def handle_signature(config: RunConfig, args) -> CommandResult:
    return fixedpoint_mod.run_signature(config, args.dataset, args.count, args.dry_run)


def handle_check_modular(config: RunConfig, args) -> CommandResult:
    return check_mod.run_check_modular(config, args.fn, args.j, args.degree, args.dataset, args.which,
                                       args.weight, args.group, args.rank_e, args.dry_run)


def handle_check_jacobi(config: RunConfig, args) -> CommandResult:
    return check_mod.run_check_jacobi(config, args.fn, args.dataset, args.index, args.weight, args.group,
                                      args.law_tolerance, args.partner_laws, args.dry_run)


def handle_selftest(config: RunConfig, args) -> CommandResult:
    return selftest_mod.run_selftest(config, _csv_list(args.only), args.dry_run)


HANDLERS: Dict[str, Callable[[RunConfig, Any], CommandResult]] = {
    "theta-eval": handle_theta_eval,
    "qexpand": handle_qexpand,
    "transgression": handle_transgression,
    "winding": handle_winding,
    "degree3": handle_degree3,
    "genus": handle_genus,
    "fixedpoint": handle_fixedpoint,
    "rigidity-scan": handle_rigidity_scan,
    "signature": handle_signature,
    "check-modular": handle_check_modular,
    "check-jacobi": handle_check_jacobi,
    "selftest": handle_selftest,
}

OVERRIDE_FLAGS = ("q_trunc", "degree_cap", "tolerance", "precision", "threads", "t_samples", "tau_samples",
                  "odd_start")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toeplitz-cli",
                                     description="Theta-function, transgression and equivariant index checks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    # Global arguments for configuration
    parser.add_argument("--profile", help="Configuration profile to use (default, quick, strict)")
    parser.add_argument("--config", help="Configuration file (YAML or JSON)")
    parser.add_argument("--log-file", help="Also write a rotating debug log to this file")
    parser.add_argument("--log-module", action="append", metavar="NAME=LEVEL",
                        help="Per-module log level, e.g. theta=DEBUG (repeatable)")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    setup_theta_commands(subparsers)
    setup_bundle_commands(subparsers)
    setup_loop_commands(subparsers)
    setup_genus_commands(subparsers)
    setup_fixedpoint_commands(subparsers)
    setup_check_commands(subparsers)
    return parser


def run_config_from_args(args) -> RunConfig:
    """Active profile plus explicit flags, validated."""
    overrides = {key: getattr(args, key, None) for key in OVERRIDE_FLAGS}
    output_format = args.format or (infer_format(args.output) if args.output else None)
    overrides["output_format"] = output_format
    overrides["inputs"] = [v for v in (getattr(args, "dataset", None), getattr(args, "path", None)) if v]
    return build_run_config(args.command, overrides, args.profile)


def emit(result: CommandResult, config: RunConfig, args) -> None:
    """Write the report to stdout or ``--output`` and the summary table to stderr."""
    tabular = config.output_format == "csv"
    payload = result.payload(tabular)
    if args.output:
        if not save_output(payload, args.output, config.output_format):
            raise OSError(f"could not write {args.output}")
    else:
        format_output(payload, config.output_format, sys.stdout)
    if not args.quiet:
        print_summary(f"{result.command}: {result.verdict}", result.summary)


def run(config: RunConfig, args) -> int:
    """Dispatch one subcommand and emit its report; returns the exit code."""
    result = HANDLERS[args.command](config, args)
    emit(result, config, args)
    logger.info(f"{result.command} finished with verdict {result.verdict}")
    return result.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point for toeplitz-cli."""
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        # If no command is provided, print help and exit
        parser.print_help(sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)

    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)

    manager = initialize_config(args.config)
    if args.profile and not manager.set_active_profile(args.profile):
        print(f"Error: unknown profile '{args.profile}' (available: {', '.join(manager.get_all_profiles())})",
              file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)

    try:
        config = run_config_from_args(args)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        print(f"Error: invalid configuration: {problems}", file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)

    try:
        module_levels = _module_levels(args.log_module)
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)
    configure_logging(console_level=config.log_level, log_file=args.log_file, module_levels=module_levels)

    try:
        code = run(config, args)
    except (ToeplitzError, OSError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)
    sys.exit(code)


if __name__ == "__main__":
    main()
