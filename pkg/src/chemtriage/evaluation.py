"""Accuracy statistics, kernel density estimates, and the model comparison report."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

if TYPE_CHECKING:
    from .victims import VictimRecord

BANDWIDTH_FLOOR = 1e-3
DEFAULT_GRID_POINTS = 512
MAX_GRID_POINTS = 1 << 20


def accuracy(n_correct: int, n_total: int) -> float:
    """Prediction accuracy as a percentage: 100 * n_correct / n_total."""
    if n_total <= 0:
        raise ValueError("n_total must be positive")
    if not 0 <= n_correct <= n_total:
        raise ValueError("n_correct must lie in [0, n_total]")
    return 100.0 * n_correct / n_total


@dataclass(frozen=True)
class KdeCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))

    def mode(self) -> float:
        return float(self.grid[int(np.argmax(self.density))])

    def to_json_dict(self) -> dict:
        return {
            "grid": [float(x) for x in self.grid],
            "density": [float(d) for d in self.density],
            "bandwidth": self.bandwidth,
        }


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Rule-of-thumb bandwidth 0.9 * min(sigma, IQR/1.34) * m^(-1/5), floored at 1e-3."""
    m = len(samples)
    sigma = float(np.std(samples, ddof=1)) if m > 1 else 0.0
    q75, q25 = np.percentile(samples, [75, 25])
    iqr = float(q75 - q25)
    scale = min(sigma, iqr / 1.34) if iqr > 0 else sigma
    return max(BANDWIDTH_FLOOR, 0.9 * scale * m ** (-0.2))


def estimate_kde(
    samples: Sequence[float] | np.ndarray,
    grid: tuple[float, float, int] | np.ndarray | None = None,
    bandwidth: float | None = None,
) -> KdeCurve:
    """Gaussian-kernel KDE with Silverman bandwidth.

    `grid` may be (lo, hi, n_points), an explicit array, or None for an
    automatic grid spanning the samples plus four bandwidths each side.
    """
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    h = bandwidth if bandwidth is not None else silverman_bandwidth(x)
    if grid is None:
        lo, hi = float(x.min()) - 4 * h, float(x.max()) + 4 * h
        # at least ~4 grid points per bandwidth so the trapezoid integral resolves
        # every kernel, capped to keep pathological spreads bounded
        n = int(min(MAX_GRID_POINTS, max(DEFAULT_GRID_POINTS, math.ceil(4 * (hi - lo) / h))))
        g = np.linspace(lo, hi, n)
    elif isinstance(grid, tuple):
        g = np.linspace(grid[0], grid[1], grid[2])
    else:
        g = np.asarray(grid, dtype=float)

    # chunk over samples to bound the (grid x samples) temporary
    dens = np.zeros_like(g)
    norm = 1.0 / (x.size * h * math.sqrt(2 * math.pi))
    block_size = max(1, 4_000_000 // max(len(g), 1))
    for start in range(0, x.size, block_size):
        block = x[start : start + block_size]
        z = (g[:, None] - block[None, :]) / h
        dens += np.exp(-0.5 * z * z).sum(axis=1)
    return KdeCurve(grid=g, density=dens * norm, bandwidth=h)


@dataclass(frozen=True)
class AccuracyReport:
    """Per-model, per-rate evaluation summary (fractions in [0, 1])."""

    model_id: str
    rate_label: str
    overall_accuracy: float
    per_chemical: dict[str, float]
    max_accuracy: float
    min_accuracy: float
    kde: KdeCurve
    n_victims: int

    def check_consistency(self, tol: float = 1e-9) -> None:
        if not self.min_accuracy - tol <= self.overall_accuracy <= self.max_accuracy + tol:
            raise AssertionError("overall accuracy outside per-chemical min/max")

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_id,
            "rate": self.rate_label,
            "overall": self.overall_accuracy,
            "min": self.min_accuracy,
            "max": self.max_accuracy,
            "per_chemical": self.per_chemical,
            "kde": self.kde.to_json_dict(),
        }


def report_from_json_dict(obj: dict, n_victims: int = 0) -> AccuracyReport:
    kde = KdeCurve(
        grid=np.array(obj["kde"]["grid"], dtype=float),
        density=np.array(obj["kde"]["density"], dtype=float),
        bandwidth=float(obj["kde"]["bandwidth"]),
    )
    return AccuracyReport(
        model_id=obj["model"],
        rate_label=obj["rate"],
        overall_accuracy=float(obj["overall"]),
        per_chemical={k: float(v) for k, v in obj["per_chemical"].items()},
        max_accuracy=float(obj["max"]),
        min_accuracy=float(obj["min"]),
        kde=kde,
        n_victims=n_victims,
    )


def evaluate_model(
    model: Callable[["VictimRecord"], bool] | Sequence[bool],
    victims: Sequence["VictimRecord"],
    model_id: str,
    rate_label: str,
) -> AccuracyReport:
    """Score a model over victims: per-chemical hit rates, overall rate, and their KDE.

    `model` is either a per-victim hit test or a precomputed hit sequence
    aligned with `victims` (batched predictors use the latter).
    """
    if not victims:
        raise ValueError("no victims to evaluate")
    hits = [bool(model(v)) for v in victims] if callable(model) else [bool(h) for h in model]
    if len(hits) != len(victims):
        raise ValueError("hit sequence length does not match victims")

    per_hits: dict[str, int] = {}
    per_total: dict[str, int] = {}
    for v, h in zip(victims, hits):
        per_total[v.true_chemical] = per_total.get(v.true_chemical, 0) + 1
        per_hits[v.true_chemical] = per_hits.get(v.true_chemical, 0) + int(h)
    per_chemical = {name: per_hits[name] / per_total[name] for name in per_total}
    values = list(per_chemical.values())
    return AccuracyReport(
        model_id=model_id,
        rate_label=rate_label,
        overall_accuracy=sum(hits) / len(hits),
        per_chemical=per_chemical,
        max_accuracy=max(values),
        min_accuracy=min(values),
        kde=estimate_kde(values),
        n_victims=len(victims),
    )


def comparison_report(reports: Sequence[AccuracyReport], out_dir: Path | None = None) -> dict:
    """Cross-model summary: accuracy grid (bar-chart-ready) plus KDE curves.

    Returns the machine-readable summary; when `out_dir` is given, also writes
    summary.json, accuracy_grid.csv and one kde_<model>_<rate>.csv per report.
    """
    if not reports:
        raise ValueError("no reports")
    grid = [
        {
            "model": r.model_id,
            "rate": r.rate_label,
            "accuracy_percent": 100.0 * r.overall_accuracy,
            "min": r.min_accuracy,
            "max": r.max_accuracy,
        }
        for r in reports
    ]

    # lookup dominated iff tree/ann strictly beat it at every rate where both exist
    by_model_rate = {(r.model_id, r.rate_label): r.overall_accuracy for r in reports}
    lookup_rates = [rate for (m, rate) in by_model_rate if m == "lookup"]
    others = sorted({m for (m, _) in by_model_rate if m != "lookup"})
    dominated = bool(lookup_rates) and bool(others)
    for rate in lookup_rates:
        for m in others:
            if (m, rate) in by_model_rate:
                if by_model_rate[(m, rate)] <= by_model_rate[("lookup", rate)]:
                    dominated = False
            else:
                dominated = False
    summary = {
        "models": sorted({r.model_id for r in reports}),
        "rates": sorted({r.rate_label for r in reports}),
        "grid": grid,
        "lookup_dominated": dominated,
    }

    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "summary.json").write_bytes(
            json.dumps(summary, indent=2, sort_keys=True).encode() + b"\n"
        )
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "rate", "accuracy_percent"])
        for row in grid:
            w.writerow([row["model"], row["rate"], repr(row["accuracy_percent"])])
        (out_dir / "accuracy_grid.csv").write_bytes(buf.getvalue().encode())
        for r in reports:
            buf = io.StringIO(newline="")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["grid", "density"])
            for gx, dx in zip(r.kde.grid, r.kde.density):
                w.writerow([repr(float(gx)), repr(float(dx))])
            label = r.rate_label.replace("%", "pct")
            (out_dir / f"kde_{r.model_id}_{label}.csv").write_bytes(buf.getvalue().encode())
    return summary


def render_plots(reports: Sequence[AccuracyReport], out_dir: Path) -> list[Path]:
    """Optional SVG renderings: accuracy bars per model/rate plus per-model KDE overlays.

    Requires matplotlib (the `plots` extra); the CSV/JSON emission above stays
    the canonical machine-readable output.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    models = sorted({r.model_id for r in reports})
    rates = []
    for r in reports:
        if r.rate_label not in rates:
            rates.append(r.rate_label)
    by_key = {(r.model_id, r.rate_label): r for r in reports}

    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(len(models), 1)
    for mi, model in enumerate(models):
        xs = [ri + mi * width for ri in range(len(rates))]
        ys = [
            100.0 * by_key[(model, rate)].overall_accuracy if (model, rate) in by_key else 0.0
            for rate in rates
        ]
        ax.bar(xs, ys, width=width, label=model)
    ax.set_xticks([ri + 0.4 - width / 2 for ri in range(len(rates))])
    ax.set_xticklabels(rates)
    ax.set_xlabel("perturbation rate")
    ax.set_ylabel("prediction accuracy (%)")
    ax.legend()
    path = out_dir / "accuracy_grid.svg"
    fig.savefig(path, format="svg")
    plt.close(fig)
    written.append(path)

    for model in models:
        fig, ax = plt.subplots(figsize=(7, 4))
        for rate in rates:
            r = by_key.get((model, rate))
            if r is None:
                continue
            ax.plot(r.kde.grid, r.kde.density, label=rate)
        ax.set_xlabel("per-chemical accuracy")
        ax.set_ylabel("density")
        ax.set_title(model)
        ax.legend()
        path = out_dir / f"kde_{model}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        written.append(path)
    return written
