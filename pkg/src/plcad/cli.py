"""plcad command line.

    plcad circle.cad
    plcad --vars x,y --poly "x^2 + y^2 - 1" --output json --verify
    plcad examples/circle_line.cad --ec 1 --output svg > plot.svg

Exit codes: 0 success, 1 FAIL (input not well-oriented), 2 user error,
3 internal error or a failed --verify.
"""

import logging
import sys
import click

from .config import configure_logging, load_options, should_color
from .emit import emit
from .errors import PLCADError, UserError
from .lifting import Failure, build_cad
from .parse import Located, RawJob, read_job, resolve_job
from .verify import run_all

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_USER, EXIT_INTERNAL = 0, 1, 2, 3


def _error(message: str, color: bool) -> None:
    prefix = click.style("error:", fg="red", bold=True) if color else "error:"
    click.echo(f"{prefix} {message}", err=True)


def _apply_flags(raw: RawJob, **flags) -> RawJob:
    """Command-line flags override the matching keys of the input file."""
    if flags["vars_"] is not None:
        raw.vars = Located(flags["vars_"])
    if flags["polys"]:
        raw.polys = [Located(p) for p in flags["polys"]]
    for key in ("operator", "ec", "output", "seed", "max_cells", "verify"):
        value = flags[key]
        if value is not None:
            setattr(raw, key, Located(str(value)))
    return raw


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("source", type=click.File("r", encoding="utf-8"), required=False)
@click.option("--vars", "vars_", metavar="X,Y,..", help="Variable order, lowest first.")
@click.option("--poly", "polys", multiple=True, help="Input polynomial (repeatable).")
@click.option("--operator", type=click.Choice(["collins", "mccallum"]), help="Projection operator.")
@click.option("--ec", type=int, help="1-based index of an equational constraint.")
@click.option("--output", type=click.Choice(["text", "json", "svg"]), help="Output format.")
@click.option("--verify", type=int, is_flag=False, flag_value=-1, default=None,
              help="Run verification; optional samples per cell.")
@click.option("--seed", type=int, help="Seed for verification sampling.")
@click.option("--max-cells", type=int, help="Abort when the decomposition exceeds this many cells.")
@click.option("--workers", type=int, help="Processes used for lifting.")
@click.option("--show-projection", is_flag=True, help="Print projection sets before the cells.")
@click.option("--induced", type=int, metavar="LEVEL", help="Emit the induced CAD of R^LEVEL.")
@click.option("--no-color", is_flag=True, help="Plain error messages.")
@click.option("-v", "--verbose", count=True, help="More logging (repeatable).")
@click.pass_context
def main(ctx, source, vars_, polys, operator, ec, output, verify, seed, max_cells, workers,
         show_projection, induced, no_color, verbose):
    """Cylindrical algebraic decomposition of the polynomials in SOURCE (or given by flags)."""
    configure_logging(verbose)
    color = not no_color and should_color(sys.stderr)
    try:
        code = _run(source, vars_, polys, operator, ec, output, verify, seed, max_cells, workers,
                    show_projection, induced, color)
    except UserError as exc:
        _error(str(exc), color)
        code = exc.exit_code
    except PLCADError as exc:
        log.debug("internal error", exc_info=True)
        _error(str(exc), color)
        code = exc.exit_code
    except ValueError as exc:
        # bad PLCAD_* environment values
        _error(str(exc), color)
        code = EXIT_USER
    except Exception as exc:
        log.exception("unexpected failure")
        _error(f"internal error: {exc}", color)
        code = EXIT_INTERNAL
    ctx.exit(code)


def _run(source, vars_, polys, operator, ec, output, verify, seed, max_cells, workers,
         show_projection, induced, color) -> int:
    raw = read_job(source.read()) if source is not None else RawJob()
    raw = _apply_flags(raw, vars_=vars_, polys=polys, operator=operator, ec=ec, output=output,
                       seed=seed, max_cells=max_cells,
                       verify=None if verify is None or verify < 0 else verify)
    job = resolve_job(raw)
    wants_verify = verify is not None or job.verify is not None
    opts = load_options(workers=workers, max_cells=job.max_cells, seed=job.seed,
                        verify_samples=job.verify)
    result = build_cad(job.polynomials, job.order, job.operator, opts)
    if isinstance(result, Failure):
        click.echo(emit(result, job.output), nl=False)
        return EXIT_FAIL
    cad = result
    polys = list(job.polynomials)
    if induced is not None:
        if not 1 <= induced <= job.order.n:
            raise UserError(f"--induced must lie in 1..{job.order.n}")
        cad = cad.induced(induced)
        polys = list(cad.polys)
    reports = run_all(cad, polys, opts) if wants_verify else []
    click.echo(emit(cad, job.output, reports, show_projection), nl=False)
    if reports and job.output != "json":
        for report in reports:
            click.echo(str(report), err=True)
    if not all(r.passed for r in reports):
        _error("verification failed", color)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    main()
