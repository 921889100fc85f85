"""Report emission: per-iteration CSV, JSON summaries and convergence figures.

CSV content is a pure function of the solve result (no timestamps), so a
fixed seed and config reproduce identical bytes. Wall-clock time appears
only in the JSON summary and is informational.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .solver import SolveReport

__all__ = [
    "ITERATION_COLUMNS",
    "format_float",
    "write_iterations_csv",
    "write_compare_csv",
    "write_sweep_csv",
    "summarize",
    "write_summary_json",
    "write_error_json",
    "render_convergence_figures",
    "render_compare_figures",
]

ITERATION_COLUMNS = ["iter", "fval", "gradf", "feasi", "t_k", "backtracks"]


def format_float(x: float) -> str:
    """17 significant digits: round-trips any double exactly."""
    return f"{x:.17g}"


def _iteration_record(row) -> list[str]:
    return [
        str(row.k),
        format_float(row.fval),
        format_float(row.gradf),
        format_float(row.feasi),
        format_float(row.t),
        str(row.backtracks),
    ]


def write_iterations_csv(path, report: SolveReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ITERATION_COLUMNS)
        for row in report.rows:
            writer.writerow(_iteration_record(row))


def write_compare_csv(path, reports: dict[str, SolveReport]) -> None:
    """Merged per-iteration trajectories of several runs, keyed by a label column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + ITERATION_COLUMNS)
        for label, report in reports.items():
            for row in report.rows:
                writer.writerow([label] + _iteration_record(row))


def write_sweep_csv(path, rows: list[dict]) -> None:
    """One summary row per sweep instance (e.g. per rho value)."""
    if not rows:
        raise ValueError("empty sweep")
    columns = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    format_float(row[c]) if isinstance(row[c], float) else str(row[c])
                    for c in columns
                ]
            )


def summarize(report: SolveReport, config_echo: dict) -> dict:
    """JSON-ready run summary (fval / gradf / feasi / iter / time columns)."""
    final = report.final
    summary = {
        "fval": final.fval,
        "gradf": final.gradf,
        "feasi": final.feasi,
        "iter": report.iterations,
        "time": report.runtime,
        "termination": report.termination.value,
        "converged": report.termination.converged,
        "degraded": report.degraded,
        "fun_evals": report.fun_evals,
        "grad_evals": report.grad_evals,
        "total_backtracks": report.total_backtracks,
        "config": config_echo,
    }
    summary.update(report.extras)
    return summary


def write_summary_json(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_error_json(path, message: str, config_echo: dict | None = None) -> None:
    payload = {"error": message}
    if config_echo is not None:
        payload["config"] = config_echo
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _semilogy_panel(ax, reports: dict[str, SolveReport], column: str, ylabel: str):
    for label, report in reports.items():
        values = report.column(column)
        mask = values > 0  # exact zeros (e.g. at a canonical start) have no log
        ax.semilogy(report.column("k")[mask], values[mask], label=label)
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    if len(reports) > 1:
        ax.legend()


def render_convergence_figures(out_dir, stem: str, report: SolveReport) -> list[Path]:
    return render_compare_figures(out_dir, stem, {"run": report})


def render_compare_figures(
    out_dir, stem: str, reports: dict[str, SolveReport]
) -> list[Path]:
    """Gradient-norm and feasibility histories as PNG files next to the CSVs."""
    out_dir = Path(out_dir)
    written = []
    for column, ylabel, suffix in [
        ("gradf", "gradient norm", "gradf"),
        ("feasi", "feasibility violation", "feasi"),
        ("fval", "function value", "fval"),
    ]:
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        if column == "fval":
            for label, report in reports.items():
                ax.plot(report.column("k"), report.column("fval"), label=label)
            ax.set_xlabel("iteration")
            ax.set_ylabel(ylabel)
            ax.grid(True, alpha=0.3)
            if len(reports) > 1:
                ax.legend()
        else:
            _semilogy_panel(ax, reports, column, ylabel)
        fig.tight_layout()
        path = out_dir / f"{stem}_{suffix}.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)
    return written
