"""Report files: delimited outputs plus rendered figures.

Every CSV carries a header row and formats numbers with 10 significant
digits.  Files are written atomically (temp file, then rename) so a
crashed run never leaves a truncated report.  Each report path that has
a natural graphic (transient availability, reliability curve, sweep
profit surface) also renders a PNG next to the CSV.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .economics import ProfitBreakdown
from .measures import StationaryResult
from .optimize import SweepResult

FLOAT_FMT = "%.10g"


def _fmt(x) -> str:
    if isinstance(x, float) or isinstance(x, np.floating):
        return FLOAT_FMT % x
    return str(x)


def atomic_write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, fieldnames: list[str], rows: list[dict]):
    lines = [",".join(fieldnames)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(f, "")) for f in fieldnames))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def atomic_savefig(fig, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp.png")
    os.close(fd)
    try:
        fig.savefig(tmp, format="png")
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)


@dataclass
class MeasureReport:
    """Flat key-value stationary report (the CSV/text surface)."""

    values: dict[str, float]

    KEY_ORDER = ("A", "Y_nv", "Y_v", "Y_w", "Y_i", "working_fraction",
                 "L_rep", "L_mi", "L_nr", "L_rejoined", "L_rb", "L_restart",
                 "L_NS", "mean_replacement", "phi", "phi_w")

    def ordered(self) -> list[tuple[str, float]]:
        keys = [k for k in self.KEY_ORDER if k in self.values]
        keys += sorted(k for k in self.values if k not in self.KEY_ORDER)
        return [(k, self.values[k]) for k in keys]

    def to_text(self) -> str:
        return "\n".join(f"{k} = {FLOAT_FMT % v}" for k, v in self.ordered()) + "\n"

    def write(self, csv_path: Path, text_path: Path | None = None):
        rows = [{"measure": k, "value": v} for k, v in self.ordered()]
        write_csv(csv_path, ["measure", "value"], rows)
        if text_path is not None:
            atomic_write_text(Path(text_path), self.to_text())


def build_measure_report(st: StationaryResult, availability: float,
                         proportions, rates: dict, replacement_mean: float,
                         profit: ProfitBreakdown) -> MeasureReport:
    nv, v, w, i = proportions
    vals = {
        "A": availability, "Y_nv": nv, "Y_v": v, "Y_w": w, "Y_i": i,
        "working_fraction": w / nv if nv > 0 else float("nan"),
        "L_rep": rates["rep"], "L_mi": rates["mi"], "L_nr": rates["nr"],
        "L_rejoined": rates["rejoined"], "L_rb": rates["rb"],
        "L_restart": rates["rb"] - rates["rejoined"],
        "L_NS": rates["NS"], "mean_replacement": replacement_mean,
        "phi": profit.phi, "phi_w": profit.phi_w,
    }
    for k in sorted(st.macro):
        vals[f"pi_U{k}"] = st.macro[k]
    return MeasureReport(vals)


def write_transient_csv(path: Path, avail_series, psi_k: dict,
                        rates_cum: dict):
    h = len(avail_series) - 1
    fields = (["step", "A"] + [f"Psi_U{k}" for k in sorted(psi_k)]
              + [f"L_{name}_cum" for name in ("rep", "mi", "nr", "rejoined", "rb", "NS")])
    rows = []
    for nu in range(h + 1):
        row = {"step": nu, "A": avail_series[nu]}
        for k in sorted(psi_k):
            row[f"Psi_U{k}"] = psi_k[k][nu]
        for name in ("rep", "mi", "nr", "rejoined", "rb", "NS"):
            row[f"L_{name}_cum"] = rates_cum[name][nu]
        rows.append(row)
    write_csv(path, fields, rows)


def write_reliability_csv(path: Path, reliability):
    rows = [{"step": nu, "R": reliability[nu]} for nu in range(len(reliability))]
    write_csv(path, ["step", "R"], rows)


def write_profit_csv(path: Path, profit: ProfitBreakdown):
    d = profit.as_dict()
    write_csv(path, ["component", "value"],
              [{"component": k, "value": v} for k, v in d.items()])


def write_sweep_csv(path: Path, result: SweepResult):
    fields = list(result.param_names) + ["R", "phi", "A", "L_rep", "L_mi",
                                         "L_NS", "L_rb", "error"]
    write_csv(path, fields, result.rows)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def plot_transient(path: Path, avail_series, stationary_availability: float | None = None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(avail_series)), avail_series, lw=1.2)
    if stationary_availability is not None:
        ax.axhline(stationary_availability, ls="--", lw=0.8, color="gray")
    ax.set_xlabel("time step")
    ax.set_ylabel("availability")
    ax.set_title("Transient availability")
    fig.tight_layout()
    atomic_savefig(fig, path)


def plot_reliability(path: Path, reliability, label: str = ""):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.arange(len(reliability)), reliability, lw=1.2, label=label or None)
    ax.set_xlabel("time step")
    ax.set_ylabel("P(not yet replaced)")
    ax.set_title("Fleet replacement-time reliability")
    if label:
        ax.legend()
    fig.tight_layout()
    atomic_savefig(fig, path)


def plot_sweep(path: Path, result: SweepResult):
    rows = [r for r in result.rows if np.isfinite(r["phi"])]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    if result.spec.family == "geometric":
        for R in sorted({r["R"] for r in rows}):
            pts = sorted((r["p"], r["phi"]) for r in rows if r["R"] == R)
            ax.plot([p for p, _ in pts], [f for _, f in pts],
                    marker="o", ms=2.5, lw=1.0, label=f"R={R}")
        ax.set_xlabel("vacation parameter p")
        ax.legend()
    else:
        bestR = result.best["R"]
        sub = [r for r in rows if r["R"] == bestR]
        p1 = np.array(sorted({r["p1"] for r in sub}))
        p2 = np.array(sorted({r["p2"] for r in sub}))
        grid = np.full((p2.size, p1.size), np.nan)
        i1 = {v: i for i, v in enumerate(p1)}
        i2 = {v: i for i, v in enumerate(p2)}
        for r in sub:
            grid[i2[r["p2"]], i1[r["p1"]]] = r["phi"]
        pc = ax.pcolormesh(p1, p2, grid, shading="nearest")
        fig.colorbar(pc, ax=ax, label="net profit per step")
        ax.plot([result.best["p1"]], [result.best["p2"]], "r*", ms=10)
        ax.set_xlabel("stage parameter p1")
        ax.set_ylabel("stage parameter p2")
        ax.set_title(f"R={bestR}")
    ax.set_title(ax.get_title() or "Stationary net profit")
    fig.tight_layout()
    atomic_savefig(fig, path)
