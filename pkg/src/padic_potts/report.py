"""Serialization of reports (JSON / CSV / human tables) and figure
rendering.

Figures accompany the delimited outputs of the report-style subcommands:
norm traces are drawn on a valuation axis (exact integers), never through
floating approximations of p-adic values.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .classifier import BoundednessReport, CrossCheckReport, Verdict
from .gibbs import CompatibilityReport, MeasureTable
from .padic import PadicNorm, int_valuation
from .recursion import ModelParams, TISolveResult, DiscriminantReport, NormReport


def norm_str(n: PadicNorm) -> str:
    return str(n)


def params_to_dict(params: ModelParams) -> dict:
    return {
        "p": params.p,
        "q": params.q,
        "k": params.k,
        "J": params.J.to_json_dict(),
        "J_norm": norm_str(params.J.norm()),
    }


def verdict_to_dict(v: Verdict) -> dict:
    w = v.witnesses
    out = {
        "params": params_to_dict(v.params),
        "outcome": v.outcome.value,
        "basis": list(v.basis),
        "seed": v.seed,
        "witnesses": {
            "roots": [r.to_json_dict() for r in w.roots],
            "residual_norms": [norm_str(n) for n in w.residual_norms],
            "contraction": [norm_str(n) for n in w.contraction],
            "boundedness": w.boundedness,
        },
    }
    if w.discriminant is not None:
        out["witnesses"]["discriminant"] = discriminant_to_dict(w.discriminant)
    if w.norm_report is not None:
        out["witnesses"]["norm_report"] = norm_report_to_dict(w.norm_report)
    return out


def discriminant_to_dict(d: DiscriminantReport) -> dict:
    return {
        "discriminant": d.discriminant.to_json_dict(),
        "valuation": d.valuation,
        "leading_digits": list(d.leading_digits),
        "even_valuation": d.even_valuation,
        "unit_condition": d.unit_condition,
        "sqrt_exists": d.sqrt_exists,
        "failed_condition": d.failed_condition,
        "rule_prediction": d.rule_prediction,
        "rule_agrees": d.rule_agrees,
        "notes": list(d.notes),
    }


def norm_report_to_dict(r: NormReport) -> dict:
    return {
        "a_norm_class": r.a_norm_class,
        "b_norm_class": r.b_norm_class,
        "case": r.case,
        "solvable_class": r.solvable_class,
        "clash": r.clash,
        "samples": [list(s) for s in r.samples],
    }


def roots_report_to_dict(
    params: ModelParams,
    norm_report: NormReport,
    disc: DiscriminantReport | None,
    sol: TISolveResult | None,
) -> dict:
    out = {
        "params": params_to_dict(params),
        "norm_case": norm_report_to_dict(norm_report),
        "discriminant": discriminant_to_dict(disc) if disc else None,
        "roots": [],
        "inadmissible_roots": [],
        "failure": None,
    }
    if sol is not None:
        out["failure"] = sol.failure
        for entry in sol.admissible:
            out["roots"].append(
                {
                    "z": entry.z.to_json_dict(),
                    "residual_norm": norm_str(entry.residual_bound),
                    "admissible": True,
                }
            )
        for entry in sol.inadmissible:
            out["inadmissible_roots"].append(
                {
                    "z": entry.z.to_json_dict(),
                    "residual_norm": norm_str(entry.residual_bound),
                    "admissible": False,
                }
            )
    return out


def compat_report_to_dict(params: ModelParams, rep: CompatibilityReport, root: int) -> dict:
    return {
        "params": params_to_dict(params),
        "n": rep.n,
        "root": root,
        "configurations": rep.configurations,
        "compatible": not rep.determined,
        "deviation_floor": rep.deviation_floor,
        "max_deviation": norm_str(rep.max_deviation),
        "determined": rep.determined,
    }


def bounded_report_to_dict(params: ModelParams, rep: BoundednessReport, root: int) -> dict:
    return {
        "params": params_to_dict(params),
        "root": root,
        "outcome": rep.outcome,
        "measure_norms": list(rep.measure_norms),
        "path_norms": list(rep.path_norms),
        "basis": rep.basis,
    }


def contraction_report_to_dict(params: ModelParams, norms: Sequence[PadicNorm], seed: int) -> dict:
    return {
        "params": params_to_dict(params),
        "seed": seed,
        "iterations": len(norms) - 1,
        "norms": [norm_str(n) for n in norms],
    }


def cross_check_to_dict(params: ModelParams, rep: CrossCheckReport) -> dict:
    return {
        "params": params_to_dict(params),
        "condition_table_outcome": rep.condition_table_outcome.value
        if rep.condition_table_outcome
        else None,
        "computed_outcome": rep.computed_outcome.value,
        "agreement": rep.agreement,
        "findings": list(rep.findings),
        "compatibility_probe": rep.compatibility_probe,
    }


def measure_table_rows(table: MeasureTable, digit_count: int = 8):
    """(config-id, weight digit string, measure norm) rows."""
    norm = str(table.measure_norm())
    for idx in range(len(table)):
        yield idx, table.weight(idx).digit_str(digit_count), norm


def measure_table_to_csv(table: MeasureTable, stream, digit_count: int = 8) -> None:
    writer = csv.writer(stream)
    writer.writerow(["config_id", "weight_digits", "measure_norm"])
    for row in measure_table_rows(table, digit_count):
        writer.writerow(row)


def measure_table_to_dict(params: ModelParams, table: MeasureTable, n: int, root: int) -> dict:
    return {
        "params": params_to_dict(params),
        "n": n,
        "root": root,
        "configurations": len(table),
        "partition": table.partition.to_json_dict(),
        "measure_norm": str(table.measure_norm()),
    }


def to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def dict_to_table(payload: dict, title: str) -> str:
    """Flat, deterministic human rendering of a report dictionary."""
    buf = io.StringIO()
    buf.write(f"{title}\n")
    buf.write("-" * len(title) + "\n")

    def emit(prefix: str, value) -> None:
        if isinstance(value, dict):
            for key in sorted(value):
                emit(f"{prefix}{key}.", value[key])
        elif isinstance(value, list):
            buf.write(f"{prefix[:-1]}: {json.dumps(value)}\n")
        else:
            buf.write(f"{prefix[:-1]}: {value}\n")

    emit("", payload)
    return buf.getvalue()


# ---- figures ---------------------------------------------------------------


def _norm_to_valuation(text_or_norm) -> int | None:
    """Exponent v with |x| = p^-v; None for the zero norm."""
    if isinstance(text_or_norm, PadicNorm):
        return text_or_norm.e
    text = str(text_or_norm)
    if text == "0":
        return None
    if text == "1":
        return 0
    base, _, exp = text.partition("^")
    return -int(exp)


def render_norm_sequence_figure(
    norms: Sequence, path: str, title: str, ylabel: str = "log_p of the norm"
) -> None:
    """Norm-exponent-vs-step plot of a norm sequence (decay slopes down,
    growth slopes up); zero norms are omitted."""
    vals = [_norm_to_valuation(n) for n in norms]
    xs = [i for i, v in enumerate(vals) if v is not None]
    ys = [-v for v in vals if v is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, marker="o")
    ax.set_xlabel("step")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_measure_depth_figure(table: MeasureTable, path: str) -> None:
    """Histogram of v_p(weight - 1): how deep each configuration's weight
    sits inside the unit ball."""
    p = table.p
    mod = p**table.work_prec
    depths: dict[int, int] = {}
    for u in table.weight_units:
        d = u - 1
        v = table.work_prec if d % mod == 0 else int_valuation(d % mod, p)
        depths[v] = depths.get(v, 0) + 1
    xs = sorted(depths)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(xs, [depths[x] for x in xs])
    ax.set_xlabel("valuation of (weight - 1)")
    ax.set_ylabel("configurations")
    ax.set_title(f"weight deviation depth, {len(table)} configurations")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
