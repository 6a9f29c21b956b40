"""
Origon: origami-extrusion 3D gadget toolkit command-line interface.
Parses arguments, runs one construction or analysis and reports the result.
"""

import argparse
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

from . import __version__, config, export, utils
from .conventional_gadget import build_conventional, conventional_geometry, pyramid_checks
from .crease_pattern import CreasePattern, CreasePatternError
from .critical_angles import check_zeta_theorems, critical_angles
from .division import (
    DivisionError,
    DivisionSpec,
    build_division,
    division_identities,
)
from .division import report_dict as division_report
from .geom_core import GeometryError, Tolerance
from .improved_gadget import (
    SELECTORS,
    ByEpsilon,
    ByPhiL,
    ByPsiL,
    InadmissibleChoiceError,
    MVVariant,
    admissible_phi_interval,
    angle_identities,
    build_improved,
    resolve,
)
from .improved_gadget import report_dict as improved_report
from .interference import (
    downward_compatibility,
    edge_pairings,
    interference_report,
    prism_csv,
    prism_table,
)
from .spec_params import (
    CONVENTIONAL,
    IMPROVED,
    CheckReport,
    GadgetParams,
    InvalidParametersError,
    Side,
    validate,
)
from .validator import FoldabilityError, FoldabilityReport, constructible_by_phi, kawasaki_check

logger = logging.getLogger(__name__)

DOMAIN_ERRORS = (
    InvalidParametersError,
    InadmissibleChoiceError,
    DivisionError,
    GeometryError,
    CreasePatternError,
    FoldabilityError,
    export.FoldFormatError,
)


class CommandResult:
    """What a subcommand hands back to run(): a report payload, a CP and overall success."""

    def __init__(
        self,
        payload: Any,
        ok: bool = True,
        cp: Optional[CreasePattern] = None,
        text: Optional[str] = None,
    ):
        self.payload = payload
        self.ok = ok
        self.cp = cp
        self.text = text


def setup_logging(level=logging.INFO):
    """Configures root logger."""
    root_logger = logging.getLogger()
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    global logger
    logger = logging.getLogger(__name__)
    logger.debug("Root logger configured.")


# --- Argument Parsing ---


def _add_param_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("gadget parameters (degrees)")
    group.add_argument("--alpha", type=float, required=True, help="Top angle α.")
    group.add_argument("--beta-l", type=float, required=True, help="Left side angle β_L.")
    group.add_argument("--beta-r", type=float, required=True, help="Right side angle β_R.")
    group.add_argument("--delta-l", type=float, default=0.0, help="Left tilt δ_L (default: 0).")
    group.add_argument("--delta-r", type=float, default=0.0, help="Right tilt δ_R (default: 0).")
    group.add_argument("--ab", type=float, default=1.0, help="Length ‖AB‖ (default: 1).")


def _add_choice_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("choice of D (degrees)")
    choice = group.add_mutually_exclusive_group()
    choice.add_argument("--select", choices=sorted(SELECTORS), help="Named choice of D.")
    choice.add_argument("--phi-l", type=float, help="φ_L = ∠B_LAD.")
    choice.add_argument("--psi-l", type=float, help="ψ_L = γ_L − φ_L.")
    choice.add_argument("--epsilon", type=float, help="ε on the side given by --epsilon-side.")
    group.add_argument(
        "--epsilon-side", choices=["L", "R"], default="L", help="Side for --epsilon (default: L)."
    )


def _add_output_args(parser: argparse.ArgumentParser, with_cp: bool = True) -> None:
    parser.add_argument("--json", action="store_true", help="Print the report as JSON.")
    if with_cp:
        parser.add_argument("-o", "--out", help="Write the crease pattern as FOLD to this path.")
        parser.add_argument("--svg", help="Write the crease pattern as SVG to this path.")
        parser.add_argument(
            "--debug-lines",
            action="store_true",
            help="Keep construction lines as F (flat) edges.",
        )


def setup_arg_parser():
    parser = argparse.ArgumentParser(
        prog="origon", description="Origon: origami-extrusion 3D gadget toolkit"
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase output verbosity (-v for DEBUG, default is INFO)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="Check the feasibility conditions of a gadget.")
    _add_param_args(p)
    p.add_argument("--mode", choices=[CONVENTIONAL, IMPROVED], default=IMPROVED)
    p.add_argument("--phi-l", type=float, help="Also test constructibility of this φ_L.")
    _add_output_args(p, with_cp=False)

    p = sub.add_parser("conventional", help="Build the pyramid-supported gadget.")
    _add_param_args(p)
    _add_output_args(p)

    p = sub.add_parser("improved", help="Build the flat-back gadget.")
    _add_param_args(p)
    _add_choice_args(p)
    p.add_argument(
        "--variant",
        choices=[v.value for v in MVVariant],
        default=MVVariant.FIRST.value,
        help="Assignment variant for δ_σ>0 non-critical sides (default: first).",
    )
    _add_output_args(p)

    p = sub.add_parser("critical-angles", help="Critical angles ζ_L, ζ_R and their theorems.")
    _add_param_args(p)
    _add_output_args(p, with_cp=False)

    p = sub.add_parser("interference", help="Interference coefficients of a flat-back gadget.")
    _add_param_args(p)
    _add_choice_args(p)
    _add_output_args(p, with_cp=False)

    p = sub.add_parser("optimize-prism", help="Minimal interference for regular prisms.")
    p.add_argument("--n", type=int, action="append", help="Polygon size (repeatable).")
    p.add_argument("--csv", help="Write the table as CSV to this path.")
    p.add_argument(
        "--digits",
        type=int,
        default=config.REPORT_SIGNIFICANT_FIGURES,
        help="Significant figures in printed output.",
    )
    _add_output_args(p, with_cp=False)

    p = sub.add_parser("divide", help="Divide a flat-back gadget into d stacked gadgets.")
    _add_param_args(p)
    _add_choice_args(p)
    p.add_argument("--d", type=int, required=True, help="Number of levels.")
    p.add_argument("--ratios", help="Comma-separated p_1,...,p_d (default: equal).")
    p.add_argument(
        "--phi-level",
        action="append",
        metavar="N=DEG",
        help="Override φ_L on level N ≥ 2 (repeatable).",
    )
    p.add_argument(
        "--invert", type=int, action="append", metavar="N", help="Invert starred creases on level N."
    )
    _add_output_args(p)

    p = sub.add_parser("check-cp", help="Flat-foldability and planarity of a FOLD file.")
    p.add_argument("path", help="FOLD file to check.")
    _add_output_args(p, with_cp=False)

    p = sub.add_parser("export", help="Re-emit a FOLD file, optionally as SVG.")
    p.add_argument("path", help="FOLD file to read.")
    _add_output_args(p)
    return parser


def set_logging_level(verbosity_level):
    if verbosity_level >= 1:
        level = logging.DEBUG
    else:
        level = logging.INFO
    current_level_name = logging.getLevelName(logging.getLogger().getEffectiveLevel())
    new_level_name = logging.getLevelName(level)
    if current_level_name != new_level_name:
        logging.getLogger().setLevel(level)
        logger.log(level, f"Effective logging level set to: {new_level_name}")


# --- Helpers ---


def params_from_args(args: argparse.Namespace) -> GadgetParams:
    return GadgetParams.from_degrees(
        args.alpha, args.beta_l, args.beta_r, args.delta_l, args.delta_r, args.ab
    )


def phi_from_args(args: argparse.Namespace, params: GadgetParams, tol: Tolerance) -> float:
    """Resolves the choice-of-D flags; defaults to the balanced gadget."""
    if args.phi_l is not None:
        choice = ByPhiL(math.radians(args.phi_l))
    elif args.psi_l is not None:
        choice = ByPsiL(math.radians(args.psi_l))
    elif args.epsilon is not None:
        choice = ByEpsilon(Side(args.epsilon_side), math.radians(args.epsilon))
    else:
        choice = SELECTORS[args.select or "balanced"]()
    return resolve(choice, params, tol)


def _foldability_payload(report: FoldabilityReport) -> Dict[str, Any]:
    return {
        "ok": report.ok,
        "checked_vertices": len(report.entries),
        "failures": [
            {"vertex": e.label or e.vertex, "sum_deg": math.degrees(e.alternating_sum)}
            for e in report.failures()
        ],
    }


def _check_payload(report: CheckReport) -> Dict[str, Any]:
    return {
        "ok": report.ok,
        "failures": [c.name for c in report.failures()],
        "checks": {c.name: c.passed for c in report.checks},
    }


def format_text(payload: Any, indent: int = 0) -> str:
    """Plain-text rendering of a nested report."""
    pad = "  " * indent
    if isinstance(payload, dict):
        lines = []
        for key, value in payload.items():
            if isinstance(value, (dict, list)) and value:
                lines.append(f"{pad}{key}:")
                lines.append(format_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(value)}")
        return "\n".join(lines)
    if isinstance(payload, list):
        return "\n".join(
            format_text(item, indent) if isinstance(item, (dict, list)) else f"{pad}- {_scalar(item)}"
            for item in payload
        )
    return f"{pad}{_scalar(payload)}"


def _scalar(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


# --- Subcommands ---


def cmd_check(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    params = params_from_args(args)
    report = validate(params, args.mode, tol)
    payload: Dict[str, Any] = {
        "mode": args.mode,
        "params": params.to_degrees_dict(),
        "gamma_deg": math.degrees(params.gamma),
        "conditions": {
            c.name: {"passed": c.passed, "margin_deg": math.degrees(c.margin), "detail": c.detail}
            for c in report.checks
        },
    }
    ok = report.ok
    for check in report.failures():
        print(f"Condition {check.name} violated: {check.detail}", file=sys.stderr)
    if ok and args.mode == IMPROVED:
        interval = admissible_phi_interval(params, tol)
        payload["admissible_phi_l_deg"] = [math.degrees(interval.lo), math.degrees(interval.hi)]
        if args.phi_l is not None:
            verdicts = constructible_by_phi(params, math.radians(args.phi_l), tol)
            payload["constructible"] = {
                s.value: {"constructible": v.constructible, "margin_deg": math.degrees(v.margin)}
                for s, v in verdicts.items()
            }
            ok = all(v.constructible for v in verdicts.values())
    return CommandResult(payload, ok)


def cmd_conventional(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    params = params_from_args(args)
    cp = build_conventional(params, tol, args.debug_lines)
    checks = pyramid_checks(conventional_geometry(params, tol), tol)
    folds = kawasaki_check(cp, tol)
    payload = {
        "params": params.to_degrees_dict(),
        "assignments": dict(cp.assignment_counts()),
        "pyramid": _check_payload(checks),
        "flat_foldability": _foldability_payload(folds),
    }
    return CommandResult(payload, checks.ok and folds.ok, cp)


def cmd_improved(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    params = params_from_args(args)
    phi_l = phi_from_args(args, params, tol)
    geom, cp = build_improved(params, phi_l, MVVariant(args.variant), tol, args.debug_lines)
    identities = angle_identities(geom, tol)
    folds = kawasaki_check(cp, tol)
    payload = {
        "params": params.to_degrees_dict(),
        "gadget": improved_report(geom, tol),
        "columns": cp.metadata.get("columns"),
        "assignments": dict(cp.assignment_counts()),
        "identities": _check_payload(identities),
        "flat_foldability": _foldability_payload(folds),
    }
    return CommandResult(payload, identities.ok and folds.ok, cp)


def cmd_critical_angles(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    params = params_from_args(args)
    zl, zr = critical_angles(params, tol)
    report = check_zeta_theorems(params, tol)
    payload = {
        "params": params.to_degrees_dict(),
        "zeta_l_deg": math.degrees(zl),
        "zeta_r_deg": math.degrees(zr),
        "two_zeta_l_deg": math.degrees(2.0 * zl),
        "two_zeta_r_deg": math.degrees(2.0 * zr),
        "theorems": _check_payload(report),
    }
    return CommandResult(payload, report.ok)


def cmd_interference(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    params = params_from_args(args)
    phi_l = phi_from_args(args, params, tol)
    report = interference_report(params, phi_l, tol)
    neighbour = interference_report(params.mirrored(), params.gamma - phi_l, tol)
    payload: Dict[str, Any] = {
        "params": params.to_degrees_dict(),
        "coefficients": report.to_dict(),
        "edge_pairings": {
            f"in_{p.inner.value}+out_{p.outer.value}": p.kappa for p in edge_pairings(report)
        },
        "mirrored_neighbour_pairings": {
            f"in_{p.inner.value}+out_{p.outer.value}": p.kappa
            for p in edge_pairings(report, neighbour)
        },
    }
    ok = True
    if not params.has_delta:
        compat = downward_compatibility(params, phi_l, tol)
        payload["downward_compatibility"] = _check_payload(compat)
        ok = compat.ok
    return CommandResult(payload, ok)


def cmd_optimize_prism(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    ns = args.n or [3, 4, 5, 6, 8, 12]
    rows = prism_table(ns)
    if args.csv and not utils.write_text_file(args.csv, prism_csv(rows)):
        return CommandResult({"error": f"could not write {args.csv}"}, ok=False)
    if args.json:
        payload = [
            dict(
                row.row(),
                inv_kappa_min=row.inv_kappa_min,
                inv_kappa_0=row.inv_kappa_0,
                inv_kappa_conv=row.inv_kappa_conv,
                ratio_min_0=row.ratio_min_0,
                ratio_min_conv=row.ratio_min_conv,
            )
            for row in rows
        ]
        return CommandResult(payload)
    return CommandResult(None, text=prism_csv(rows, args.digits).rstrip("\n"))


def cmd_divide(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    params = params_from_args(args)
    phi_l = phi_from_args(args, params, tol)
    try:
        overrides = {
            n: math.radians(v) for n, v in utils.parse_level_assignments(args.phi_level).items()
        }
        inverted = frozenset(args.invert or [])
        if args.ratios:
            ratios = utils.parse_float_list(args.ratios)
            if len(ratios) != args.d:
                raise DivisionError(f"--ratios has {len(ratios)} entries but --d is {args.d}")
            spec = DivisionSpec.from_ratios(ratios, phi_overrides=overrides, inverted=inverted)
        else:
            spec = DivisionSpec.equal(args.d, phi_overrides=overrides, inverted=inverted)
    except DivisionError:
        raise
    except ValueError as e:
        raise DivisionError(str(e)) from e
    geom, cp = build_division(params, phi_l, spec, tol, args.debug_lines)
    identities = division_identities(geom, tol)
    folds = kawasaki_check(cp, tol)
    payload = {
        "params": params.to_degrees_dict(),
        "division": division_report(geom),
        "assignments": dict(cp.assignment_counts()),
        "identities": _check_payload(identities),
        "flat_foldability": _foldability_payload(folds),
    }
    return CommandResult(payload, identities.ok and folds.ok, cp)


def _read_cp(path: str) -> Optional[CreasePattern]:
    cp = export.read_fold(path)
    if cp is None:
        print(f"Error: could not read '{path}'. Check logs.", file=sys.stderr)
    return cp


def cmd_check_cp(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    cp = _read_cp(args.path)
    if cp is None:
        return CommandResult({"error": f"could not read {args.path}"}, ok=False)
    folds = kawasaki_check(cp, tol)
    crossings = cp.check_planar(tol)
    payload = {
        "path": args.path,
        "vertices": cp.num_vertices,
        "edges": len(cp.edges),
        "assignments": dict(cp.assignment_counts()),
        "planar": not crossings,
        "flat_foldability": _foldability_payload(folds),
    }
    return CommandResult(payload, folds.ok and not crossings)


def cmd_export(args: argparse.Namespace, tol: Tolerance) -> CommandResult:
    cp = _read_cp(args.path)
    if cp is None:
        return CommandResult({"error": f"could not read {args.path}"}, ok=False)
    payload = {"path": args.path, "vertices": cp.num_vertices, "edges": len(cp.edges)}
    return CommandResult(payload, True, cp)


COMMANDS: Dict[str, Callable[[argparse.Namespace, Tolerance], CommandResult]] = {
    "check": cmd_check,
    "conventional": cmd_conventional,
    "improved": cmd_improved,
    "critical-angles": cmd_critical_angles,
    "interference": cmd_interference,
    "optimize-prism": cmd_optimize_prism,
    "divide": cmd_divide,
    "check-cp": cmd_check_cp,
    "export": cmd_export,
}


# --- Output ---


def handle_output(result: CommandResult, args: argparse.Namespace) -> bool:
    """Prints the report and writes the requested files. False if a write failed."""
    if result.text is not None:
        print(result.text)
    elif result.payload is not None:
        if args.json:
            print(json.dumps(export.jsonable(result.payload), indent=config.FOLD_INDENT))
        else:
            print(format_text(result.payload))

    success = True
    written: List[Tuple[str, str]] = []
    if result.cp is not None:
        if getattr(args, "out", None):
            if export.write_fold(result.cp, args.out):
                written.append(("FOLD", args.out))
            else:
                success = False
        if getattr(args, "svg", None):
            if export.write_svg(result.cp, args.svg):
                written.append(("SVG", args.svg))
            else:
                success = False
    for kind, path in written:
        print(f"{kind} successfully saved to: {path}", file=sys.stderr)
    if not success:
        logger.error("Failed to write one or more output files.")
        print("Error: Failed to write output. Check logs.", file=sys.stderr)
    return success


def main(argv: Optional[List[str]] = None) -> int:
    """Runs one CLI invocation and returns its exit code."""
    exit_code = 0
    try:
        parser = setup_arg_parser()
        args = parser.parse_args(argv)
        set_logging_level(args.verbose)

        logger.info("--- Origon CLI Initializing ---")
        logger.debug(f"Origon Version: {__version__}")
        tol = Tolerance()
        logger.info(f"Tolerances: angle_eps={tol.angle_eps}, length_eps={tol.length_eps}")
        logger.info(f"Running command: {args.command}")
        print("-" * 30, file=sys.stderr)

        result = COMMANDS[args.command](args, tol)
        output_success = handle_output(result, args)

        print("-" * 30, file=sys.stderr)
        if result.ok and output_success:
            logger.info("--- Origon CLI Finished Successfully ---")
        else:
            logger.error("--- Origon CLI Finished with Validation Failures ---")
            exit_code = 1

    except SystemExit as e:
        # argparse: usage errors exit with 2, --help/--version with 0.
        exit_code = e.code if isinstance(e.code, int) else 2
    except DOMAIN_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        exit_code = 1
    except Exception as e:
        logger.critical(f"An unexpected critical error occurred: {e}", exc_info=True)
        print(
            "\nAn unexpected error occurred. Please check the logs for details.",
            file=sys.stderr,
        )
        exit_code = 2
    return exit_code


def run():
    """Console-script entry point."""
    setup_logging()
    sys.exit(main())


if __name__ == "__main__":
    run()
