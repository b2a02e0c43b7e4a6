"""End-to-end experiment pipeline: data, victim sets, model training, evaluation, reports."""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import database, evaluation, network, tree, victims
from .lookup import lookup_hits
from .database import ChemicalDatabase
from .evaluation import AccuracyReport
from .network import AnnTrainConfig
from .tree import TreeTrainConfig
from .victims import PerturbationSpec

DEFAULT_RATES = (0.05, 0.10, 0.15)
FIXED_COUNT = victims.FIXED_COUNT
BERNOULLI = victims.BERNOULLI


class StageError(RuntimeError):
    """A pipeline stage failed; partial artifacts up to that stage are retained."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def stage_seed(root_seed: int, label: str) -> int:
    """Deterministic per-stage seed derived from the root seed and a stage label."""
    tag = zlib.crc32(label.encode("utf-8"))
    return int(np.random.SeedSequence([root_seed, tag]).generate_state(1)[0])


def rate_label(rate: float) -> str:
    return f"{rate * 100:g}%"


def rate_slug(rate: float) -> str:
    return f"{rate * 100:g}pct"


@dataclass(frozen=True)
class ExperimentConfig:
    output_dir: Path
    db_path: Path | None = None  # None -> synthetic database
    n_chemicals: int = database.DEFAULT_N_CHEMICALS
    n_symptoms: int = database.DEFAULT_N_SYMPTOMS
    density: float = database.DEFAULT_DENSITY
    rates: tuple[float, ...] = DEFAULT_RATES
    replicas: int = 100
    mode: str = FIXED_COUNT
    seed: int = 42
    hidden_dim: int = 20
    max_splits: int = tree.DEFAULT_MAX_SPLITS
    ann_learning_rate: float = 0.5
    ann_max_epochs: int = 2000

    def __post_init__(self):
        if not self.rates or any(not 0.0 < r < 1.0 for r in self.rates):
            raise ValueError("rates must be probabilities in (0, 1)")
        if self.replicas < 1:
            raise ValueError("replicas must be positive")
        if self.mode not in (FIXED_COUNT, BERNOULLI):
            raise ValueError(f"unknown perturbation mode {self.mode!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class ExperimentResult:
    exit_code: int
    artifacts: dict[str, Path] = field(default_factory=dict)
    reports: list[AccuracyReport] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    ann_converged: bool = True


def _write_json(path: Path, obj: dict) -> None:
    path.write_bytes(json.dumps(obj, indent=2, sort_keys=True).encode() + b"\n")


def perturbation_spec(cfg: ExperimentConfig, rate: float, seed: int) -> PerturbationSpec:
    if cfg.mode == BERNOULLI:
        return PerturbationSpec.bernoulli(rate, cfg.replicas, seed)
    return PerturbationSpec.fixed_count(
        round(rate * cfg.n_symptoms), cfg.replicas, seed
    )


def prepare_database(cfg: ExperimentConfig, out: Path) -> ChemicalDatabase:
    """Load-and-dedup the configured CSV, or generate the synthetic default."""
    if cfg.db_path is not None:
        with open(cfg.db_path, "rb") as f:
            db = database.load_database(f)
        if not db.dedup_applied:
            db, report = database.deduplicate(db)
            _write_json(out / "dedup_report.json", report.to_json_dict())
    else:
        db = database.generate_synthetic_database(
            cfg.n_chemicals, cfg.n_symptoms, cfg.density, stage_seed(cfg.seed, "synthetic-db")
        )
    with open(out / "db.csv", "wb") as f:
        database.save_database(db, f)
    return db


def run_full_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """load/generate -> dedup -> simulate per rate -> train tree/ANN -> evaluate -> report.

    Every intermediate artifact is persisted under cfg.output_dir and the whole
    run is reproducible from cfg.seed. Failures abort with the stage name; the
    artifacts written so far stay on disk.
    """
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    result = ExperimentResult(exit_code=0)

    def record(name: str, path: Path) -> Path:
        result.artifacts[name] = path
        return path

    stage = "database"
    try:
        db = prepare_database(cfg, out)
        record("db", out / "db.csv")
        n_symptoms = db.n_symptoms

        stage = "simulate"
        victim_sets: dict[float, list[victims.VictimRecord]] = {}
        for rate in cfg.rates:
            spec = perturbation_spec(cfg, rate, stage_seed(cfg.seed, f"simulate-{rate_label(rate)}"))
            vs = victims.simulate_victims(db, spec)
            victim_sets[rate] = vs
            path = out / f"victims_{rate_slug(rate)}.jsonl"
            with open(path, "wb") as f:
                victims.save_victims(vs, f)
            record(f"victims-{rate_slug(rate)}", path)

        stage = "perturbation-density"
        curves = []
        for rate in cfg.rates:
            kde = victims.perturbation_density(victim_sets[rate])
            curves.append(
                {
                    "rate": rate_label(rate),
                    "expected_toggles": rate * n_symptoms,
                    "mode": kde.mode(),
                    "kde": kde.to_json_dict(),
                }
            )
        _write_json(out / "perturbation_kde.json", {"curves": curves})
        record("perturbation-kde", out / "perturbation_kde.json")

        stage = "train-tree"
        trained_tree = tree.train_tree(db, TreeTrainConfig(max_splits=cfg.max_splits))
        with open(out / "tree.json", "wb") as f:
            tree.save_tree(trained_tree, f)
        record("tree", out / "tree.json")
        stats = tree.tree_stats(trained_tree)
        _write_json(
            out / "tree_stats.json",
            {
                "depth": stats.depth,
                "leaf_count": stats.leaf_count,
                "split_count": stats.split_count,
                "leaf_depth_histogram": {str(k): v for k, v in stats.leaf_depth_histogram.items()},
                "training_accuracy": trained_tree.training_accuracy,
            },
        )
        record("tree-stats", out / "tree_stats.json")
        (out / "tree.dot").write_bytes(tree.to_dot(trained_tree, db.symptom_names).encode())
        record("tree-dot", out / "tree.dot")

        stage = "train-ann"
        ann_cfg = AnnTrainConfig(
            hidden_dim=cfg.hidden_dim,
            learning_rate=cfg.ann_learning_rate,
            max_epochs=cfg.ann_max_epochs,
            seed=stage_seed(cfg.seed, "ann-train"),
            feature_count=n_symptoms,
        )
        weights, ann_report = network.train_ann(db, ann_cfg)
        result.ann_converged = ann_report.converged
        with open(out / "ann.json", "wb") as f:
            network.save_weights(weights, f)
        record("ann", out / "ann.json")
        _write_json(
            out / "ann_report.json",
            {
                "cross_entropy": list(ann_report.cross_entropy),
                "cross_entropy_total": list(ann_report.cross_entropy_total),
                "error_rate": list(ann_report.error_rate),
                "epochs_run": ann_report.epochs_run,
                "converged": ann_report.converged,
            },
        )
        record("ann-report", out / "ann_report.json")

        stage = "evaluate"
        reports_dir = out / "reports"
        reports_dir.mkdir(exist_ok=True)
        for rate in cfg.rates:
            vs = victim_sets[rate]
            label = rate_label(rate)
            per_model = {
                "lookup": lookup_hits(db, vs),
                "tree": tree.tree_hits(trained_tree, vs),
                "ann": network.ann_hits(weights, vs),
            }
            for model_id, hits in per_model.items():
                report = evaluation.evaluate_model(hits, vs, model_id, label)
                report.check_consistency()
                result.reports.append(report)
                path = reports_dir / f"report_{model_id}_{rate_slug(rate)}.json"
                _write_json(path, report.to_json_dict())
                record(f"report-{model_id}-{rate_slug(rate)}", path)

        stage = "comparison"
        result.summary = evaluation.comparison_report(result.reports, out / "comparison")
        record("comparison", out / "comparison" / "summary.json")

        _write_json(
            out / "run_config.json",
            {
                "db_path": str(cfg.db_path) if cfg.db_path else None,
                "n_chemicals": cfg.n_chemicals,
                "n_symptoms": cfg.n_symptoms,
                "density": cfg.density,
                "rates": list(cfg.rates),
                "replicas": cfg.replicas,
                "mode": cfg.mode,
                "seed": cfg.seed,
                "hidden_dim": cfg.hidden_dim,
                "max_splits": cfg.max_splits,
                "ann_learning_rate": cfg.ann_learning_rate,
                "ann_max_epochs": cfg.ann_max_epochs,
            },
        )
        manifest = {name: str(path.relative_to(out)) for name, path in result.artifacts.items()}
        _write_json(out / "manifest.json", manifest)
    except Exception as e:
        raise StageError(stage, e) from e

    if not result.ann_converged:
        result.exit_code = 3
    return result
