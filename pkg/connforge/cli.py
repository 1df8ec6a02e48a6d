"""
Command line front end.

Reports are written to standard output as JSON; logs and the human summary go to standard error.
Exit codes: 0 on success, 1 when validation or verification fails, 2 on malformed input or usage errors.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from rich.markup import escape

from connforge import logger, console
from .calculus.tensor import max_abs
from .catalog import export_entry, get_entry, list_entries
from .connections.coefficients import (ConnectionCoeffs, bismut, canonical_line, first_canonical, levi_civita,
                                       nabla_g_defect, nabla_J_defect, nabla_plus_minus, torsion_condition_defect)
from .connections.solvers import chern_connection, skew_torsion
from .exceptions import ConnforgeError
from .geometry.frame import PointFrame
from .geometry.structure import GeometryStructure, load_structure
from .utils import Settings, dumps_json
from .verify.suite import Verifier, VerifyReport

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

KINDS = ("levi-civita", "first-canonical", "chern", "plus", "minus", "bismut", "line:<t>")


def resolve_target(target: str) -> GeometryStructure:
    """A catalog entry by name, otherwise a structure file by path."""
    if target in list_entries():
        return get_entry(target).structure
    return load_structure(Path(target))


def parse_point(text: str, dimension: int) -> tuple[float, ...]:
    """
    Parses ``"x1,..,xn"``.

    Raises
    ------
    ValueError
        If a coordinate is not a number or the count differs from the dimension.
    """
    try:
        point = tuple(float(value) for value in text.split(","))
    except ValueError:
        raise ValueError(f"Invalid point {text!r}: expected comma-separated numbers")

    if len(point) != dimension:
        raise ValueError(f"Point {text!r} has {len(point)} coordinates, expected {dimension}")

    return point


def compute_connection(frame: PointFrame, kind: str) -> ConnectionCoeffs:
    """
    Builds the connection named by ``kind`` at a frame.

    Raises
    ------
    UnavailableConnectionError
        If the kind needs a Chern or skew-torsion connection that the structure does not admit.
    ValueError
        If the kind is unknown.
    """
    if kind == "levi-civita":
        return levi_civita(frame)
    if kind == "first-canonical":
        return first_canonical(frame)
    if kind == "chern":
        return chern_connection(frame)
    if kind in ("plus", "minus"):
        return nabla_plus_minus(frame, skew_torsion(frame), 1 if kind == "plus" else -1)
    if kind == "bismut":
        return bismut(first_canonical(frame), chern_connection(frame))
    if kind.startswith("line:"):
        try:
            t = float(kind[len("line:"):])
        except ValueError:
            raise ValueError(f"Invalid line parameter in {kind!r}")
        return canonical_line(first_canonical(frame), chern_connection(frame), t)

    raise ValueError(f"Unknown connection kind {kind!r}; expected one of {', '.join(KINDS)}")


def _settings(args: argparse.Namespace) -> Settings:
    return Settings.from_env(tolerance=getattr(args, "tol", None), points=getattr(args, "points", None),
                             seed=getattr(args, "seed", None), workers=getattr(args, "workers", None))


def _emit(text: str, output: Optional[str] = None):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")
        logger.info(f"Report written to {output}.")


def _summarize(report: VerifyReport):
    verdict = "[green]passed[/green]" if report.passed else "[red]failed[/red]"
    console.print(f"{escape(report.structure)}: {verdict} ({len(report.records)} records, {report.points} points)")
    for record in report.failed():
        console.print(f"  {record.id} {escape(record.description)}: max defect {record.max_defect:.3e}, "
                      f"{record.violations} violation(s)")


def cmd_list(args: argparse.Namespace) -> int:
    entries = []
    for name in list_entries():
        entry = get_entry(name)
        structure = entry.structure
        entries.append({"name": name, "geometry": structure.geometry, "alpha": structure.alpha,
                        "epsilon": structure.epsilon, "dimension": structure.dimension, **entry.flags(),
                        "description": entry.documentation})
    _emit(dumps_json(entries))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    settings = _settings(args)
    structure = resolve_target(args.target)
    report = structure.validate(count=settings.points, seed=settings.seed, tol=settings.tolerance)
    _emit(dumps_json(report))

    if not report.passed:
        failed = ", ".join(f"{c.condition} ({c.value:.3e})" for c in report.checks if not c.passed)
        console.print(f"{escape(structure.name)}: [red]failed[/red] {failed}")
        return EXIT_FAILED

    console.print(f"{escape(structure.name)}: [green]passed[/green] at {report.points} points")
    return EXIT_OK


def cmd_connection(args: argparse.Namespace) -> int:
    structure = resolve_target(args.target)
    point = parse_point(args.at, structure.dimension) if args.at else tuple(
        0.5 * (lo + hi) for lo, hi in structure.chart.domain)
    frame = structure.frame_at(point)
    connection = compute_connection(frame, args.kind)

    defects = {"nabla_g": nabla_g_defect(connection, frame), "nabla_J": nabla_J_defect(connection, frame),
               "torsion_condition": torsion_condition_defect(connection, frame)}
    _emit(dumps_json({"structure": structure.name, "kind": args.kind, "provenance": connection.provenance,
                      "point": list(connection.point), "gamma": connection.gamma, "defects": defects,
                      "max_abs": max_abs(connection.gamma)}))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    settings = _settings(args)
    verifier = Verifier.from_settings(settings)
    logger.setLevel(args.log_level)

    if args.all:
        summary = verifier.verify_all(log_level=args.log_level)
        _emit(dumps_json(summary), args.json)
        for report in summary.reports:
            _summarize(report)
        return EXIT_OK if summary.passed else EXIT_FAILED

    if args.target is None:
        raise ValueError("verify needs a catalog name, a structure file or --all")

    report = verifier.verify(resolve_target(args.target))
    _emit(dumps_json(report), args.json)
    _summarize(report)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_export(args: argparse.Namespace) -> int:
    text = export_entry(args.name, args.output)
    if args.output is None:
        _emit(text)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="connforge",
                                     description="Adapted connections on (J^2 = ±1)-metric manifolds.")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Level of the log on standard error")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("list", help="List the catalog entries").set_defaults(handler=cmd_list)

    validate = commands.add_parser("validate", help="Check the defining conditions of a structure")
    validate.add_argument("target", help="Catalog name or structure file")
    validate.add_argument("--points", type=int, default=50)
    validate.add_argument("--seed", type=int, default=None)
    validate.add_argument("--tol", type=float, default=None, help="Defaults to $CONNFORGE_TOL or 1e-9")
    validate.set_defaults(handler=cmd_validate)

    connection = commands.add_parser("connection", help="Print connection coefficients at a point")
    connection.add_argument("target", help="Catalog name or structure file")
    connection.add_argument("--kind", default="levi-civita", help=f"One of {', '.join(KINDS)}")
    connection.add_argument("--at", default=None, help="Comma-separated coordinates; defaults to the domain center")
    connection.set_defaults(handler=cmd_connection)

    verify = commands.add_parser("verify", help="Run the invariant suite")
    verify.add_argument("target", nargs="?", default=None, help="Catalog name or structure file")
    verify.add_argument("--all", action="store_true", help="Verify every catalog entry")
    verify.add_argument("--points", type=int, default=20)
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--tol", type=float, default=None, help="Defaults to $CONNFORGE_TOL or 1e-9")
    verify.add_argument("--workers", type=int, default=1, help="Threads per structure; 0 uses all but two cores")
    verify.add_argument("--json", default=None, help="Write the report to this file instead of standard output")
    verify.set_defaults(handler=cmd_verify)

    export = commands.add_parser("export", help="Write a catalog entry as a structure file")
    export.add_argument("name", help="Catalog name")
    export.add_argument("--output", default=None, help="Destination file; standard output when omitted")
    export.set_defaults(handler=cmd_export)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    args.log_level = getattr(logging, args.log_level)
    logger.setLevel(args.log_level)

    try:
        return args.handler(args)
    except (ConnforgeError, OSError, ValueError) as e:
        console.print(f"[red]error:[/red] {escape(str(e))}", highlight=False)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
