"""Command-line surface for batch verification and report generation.

Exit codes: 0 = ran, verdict in output; 2 = invalid input; 3 = precision
exhaustion; 4 = enumeration cap exceeded.  Every subcommand is
deterministic given its flags and seed.  When --out is set on a
report-style subcommand (contract, bounded, measure-table) a figure is
rendered next to the delimited output.
"""

from __future__ import annotations

import csv
import io
import os
import pathlib
import random
import sys
from functools import wraps

import click

from . import report
from .classifier import boundedness_verdict, classify, cross_check
from .gibbs import (
    DEFAULT_ENUMERATION_CAP,
    BoundaryFieldAssignment,
    EnumerationCapError,
    build_volume,
    check_compatibility,
    partition_and_measures,
)
from .padic import (
    DomainError,
    PadicError,
    PadicNumber,
    PrecisionExhaustedError,
    parse_rational,
)
from .recursion import (
    FieldVector,
    ModelParams,
    contraction_trace,
    discriminant_analysis,
    lift_root_to_field,
    norm_case_analysis,
    sample_domain_field,
    solve_ti_k2,
)

EXIT_INVALID_INPUT = 2
EXIT_PRECISION = 3
EXIT_CAP = 4


def thread_cap() -> int:
    """PADIC_POTTS_THREADS caps internal parallelism; evaluation runs a
    single worker, which trivially honors any positive cap."""
    raw = os.environ.get("PADIC_POTTS_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise PadicError(f"PADIC_POTTS_THREADS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise PadicError("PADIC_POTTS_THREADS must be >= 1")
    return cap


def _handle_errors(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EnumerationCapError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CAP)
        except PrecisionExhaustedError as exc:
            click.echo(f"error: precision exhausted: {exc}", err=True)
            sys.exit(EXIT_PRECISION)
        except (DomainError, PadicError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID_INPUT)

    return wrapper


def _build_params(p: int, q: int, k: int, j: str, precision: int) -> ModelParams:
    num, den = parse_rational(j)
    coupling = PadicNumber.from_rational(num, den, p, precision)
    return ModelParams(p, q, k, coupling)


def _emit(payload: dict, fmt: str, out: str | None, title: str, csv_rows=None) -> None:
    if fmt == "json":
        text = report.to_json(payload)
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        if csv_rows is None:
            flat = _flatten(payload)
            writer.writerow([k for k, _ in flat])
            writer.writerow([v for _, v in flat])
        else:
            for row in csv_rows:
                writer.writerow(row)
        text = buf.getvalue()
    else:
        text = report.dict_to_table(payload, title)
    if out:
        pathlib.Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _flatten(payload: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows: list[tuple[str, object]] = []
    for key in sorted(payload):
        val = payload[key]
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            rows.extend(_flatten(val, name + "."))
        elif isinstance(val, list):
            rows.append((name, ";".join(str(x) for x in val)))
        else:
            rows.append((name, val))
    return rows


def _figure_path(out: str) -> str:
    return str(pathlib.Path(out).with_suffix(".png"))


def _common(fn):
    for opt in reversed(
        [
            click.option("--p", "p", type=int, required=True, help="prime"),
            click.option("--q", "q", type=int, required=True, help="spin count"),
            click.option("--k", "k", type=int, default=2, show_default=True, help="tree order"),
            click.option("--J", "j", required=True, help="coupling, rational string a or a/b"),
            click.option("--precision", type=int, default=32, show_default=True),
            click.option("--n", "n", type=int, default=2, show_default=True, help="volume radius"),
            click.option("--cap", type=int, default=DEFAULT_ENUMERATION_CAP, show_default=True),
            click.option("--seed", type=int, default=0, show_default=True),
            click.option(
                "--format",
                "fmt",
                type=click.Choice(["table", "json", "csv"]),
                default="table",
                show_default=True,
            ),
            click.option("--out", type=click.Path(dir_okay=False), default=None),
        ]
    ):
        fn = opt(fn)
    return fn


def _root_field(params: ModelParams, root: int, prec: int) -> FieldVector:
    if root == 0:
        return FieldVector.zero(params.p, params.q, prec)
    if params.k != 2:
        raise PadicError("solved-root fields require k = 2")
    sol = solve_ti_k2(params)
    if len(sol.admissible) < root:
        raise PadicError(
            f"requested root {root} but only {len(sol.admissible)} admissible roots exist"
        )
    return lift_root_to_field(sol.admissible[root - 1].z, params)


@click.group()
def main() -> None:
    """Exact p-adic Potts toolkit: classify phase transitions, solve the
    boundary-field recursion, verify finite-volume measures."""
    thread_cap()


@main.command("classify")
@_common
@_handle_errors
def cmd_classify(p, q, k, j, precision, n, cap, seed, fmt, out):
    """Phase-transition verdict for (p, q, k, J) with witnesses."""
    params = _build_params(p, q, k, j, precision)
    verdict = classify(params, seed)
    payload = report.verdict_to_dict(verdict)
    _emit(payload, fmt, out, "classification verdict")


@main.command("cross-check")
@_common
@_handle_errors
def cmd_cross_check(p, q, k, j, precision, n, cap, seed, fmt, out):
    """Compare the closed-form conditions against the computed verdict."""
    params = _build_params(p, q, k, j, precision)
    rep = cross_check(params, seed=seed)
    payload = report.cross_check_to_dict(params, rep)
    _emit(payload, fmt, out, "cross check")


@main.command("roots")
@_common
@_handle_errors
def cmd_roots(p, q, k, j, precision, n, cap, seed, fmt, out):
    """Translation-invariant roots with digit expansions, residual norms
    and the root-existence condition checklist."""
    params = _build_params(p, q, k, j, precision)
    if params.k != 2:
        raise PadicError("root reports require k = 2")
    norm_rep = norm_case_analysis(params)
    disc = None
    sol = None
    if norm_rep.case == 3:
        disc = discriminant_analysis(params)
        sol = solve_ti_k2(params)
    payload = report.roots_report_to_dict(params, norm_rep, disc, sol)
    if norm_rep.case != 3:
        payload["summary"] = f"no solution, case {norm_rep.case}" + (
            f": {norm_rep.clash}" if norm_rep.clash else ""
        )
    elif sol is not None and not sol.admissible:
        payload["summary"] = f"no admissible root: {sol.failure or 'inadmissible roots'}"
    else:
        payload["summary"] = f"{len(payload['roots'])} admissible roots"
    _emit(payload, fmt, out, "translation-invariant roots")


@main.command("verify-compat")
@_common
@click.option("--root", type=int, default=0, show_default=True,
              help="0 = zero field, i = i-th solved root lift")
@_handle_errors
def cmd_verify_compat(p, q, k, j, precision, n, cap, seed, fmt, out, root):
    """Brute-force the marginalization identity at radius n."""
    params = _build_params(p, q, k, j, precision)
    h = _root_field(params, root, precision)
    rep = check_compatibility(params, n, BoundaryFieldAssignment.constant(h), cap)
    payload = report.compat_report_to_dict(params, rep, root)
    if rep.determined:
        payload["summary"] = f"incompatible, deviation norm {rep.max_deviation}"
    else:
        payload["summary"] = (
            f"compatible, max deviation 0 at precision {params.p}^-{rep.deviation_floor}"
        )
    _emit(payload, fmt, out, "compatibility check")


@main.command("measure-table")
@_common
@click.option("--root", type=int, default=0, show_default=True,
              help="0 = zero field, i = i-th solved root lift")
@_handle_errors
def cmd_measure_table(p, q, k, j, precision, n, cap, seed, fmt, out, root):
    """Exact measure table at radius n (CSV rows: id, weight digits, norm)."""
    params = _build_params(p, q, k, j, precision)
    h = _root_field(params, root, precision)
    volume = build_volume(params.k, n)
    table = partition_and_measures(
        volume, BoundaryFieldAssignment.constant(h).transformed(), params, cap
    )
    payload = report.measure_table_to_dict(params, table, n, root)
    rows = None
    if fmt == "csv":
        rows = [["config_id", "weight_digits", "measure_norm"]]
        rows.extend(list(r) for r in report.measure_table_rows(table))
    _emit(payload, fmt, out, "measure table", csv_rows=rows)
    if out:
        report.render_measure_depth_figure(table, _figure_path(out))


@main.command("bounded")
@_common
@click.option("--root", type=int, default=0, show_default=True,
              help="0 = zero field, i = i-th solved root lift")
@_handle_errors
def cmd_bounded(p, q, k, j, precision, n, cap, seed, fmt, out, root):
    """Boundedness dichotomy witness for the measure family."""
    params = _build_params(p, q, k, j, precision)
    h = _root_field(params, root, precision)
    rep = boundedness_verdict(params, h)
    payload = report.bounded_report_to_dict(params, rep, root)
    if rep.outcome == "Unbounded":
        payload["summary"] = f"unbounded, max |mu| >= {rep.measure_norms[0]}"
    else:
        payload["summary"] = "bounded, all measure norms 1"
    _emit(payload, fmt, out, "boundedness verdict")
    if out:
        report.render_norm_sequence_figure(
            rep.path_norms, _figure_path(out), "worst-case marginal path norms"
        )


@main.command("contract")
@_common
@click.option("--iters", type=int, default=10, show_default=True)
@_handle_errors
def cmd_contract(p, q, k, j, precision, n, cap, seed, fmt, out, iters):
    """Contraction trace of the recursion from a seeded random field."""
    params = _build_params(p, q, k, j, precision)
    rng = random.Random(seed)
    h0 = sample_domain_field(params, rng)
    norms = contraction_trace(params, h0, iters)
    payload = report.contraction_report_to_dict(params, norms, seed)
    payload["hypothesis"] = "q prime to p" if params.q % params.p else "q in pN (no decay assertion)"
    _emit(payload, fmt, out, "contraction trace")
    if out:
        report.render_norm_sequence_figure(
            norms, _figure_path(out), "recursion contraction trace"
        )


if __name__ == "__main__":
    main()
