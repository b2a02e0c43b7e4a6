import json
from pathlib import Path

import pytest

from chemtriage.experiment import (
    ExperimentConfig,
    StageError,
    rate_label,
    rate_slug,
    run_full_experiment,
    stage_seed,
)


def small_config(out, **overrides):
    base = dict(
        output_dir=out,
        n_chemicals=20,
        n_symptoms=12,
        rates=(0.1, 0.2),
        replicas=2,
        hidden_dim=6,
        ann_max_epochs=150,
        seed=5,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def tree_of_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_labels():
    assert rate_label(0.05) == "5%"
    assert rate_slug(0.15) == "15pct"
    assert rate_label(0.125) == "12.5%"


def test_stage_seed_stable_and_distinct():
    assert stage_seed(42, "simulate-5%") == stage_seed(42, "simulate-5%")
    assert stage_seed(42, "simulate-5%") != stage_seed(42, "simulate-10%")
    assert stage_seed(42, "simulate-5%") != stage_seed(43, "simulate-5%")


def test_pipeline_produces_all_artifacts(tmp_path):
    result = run_full_experiment(small_config(tmp_path / "run"))
    assert result.exit_code in (0, 3)
    assert len(result.reports) == 6  # 3 models x 2 rates
    names = {r.model_id for r in result.reports}
    assert names == {"lookup", "tree", "ann"}
    for key in ("db", "tree", "ann", "perturbation-kde", "comparison"):
        assert key in result.artifacts
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    for rel in manifest.values():
        assert (tmp_path / "run" / rel).exists()


def test_pipeline_deterministic_bytes(tmp_path):
    run_full_experiment(small_config(tmp_path / "a"))
    run_full_experiment(small_config(tmp_path / "b"))
    a = tree_of_bytes(tmp_path / "a")
    b = tree_of_bytes(tmp_path / "b")
    assert a.keys() == b.keys()
    for name in a:
        assert a[name] == b[name], f"artifact {name} differs between identical runs"


def test_pipeline_seed_changes_artifacts(tmp_path):
    run_full_experiment(small_config(tmp_path / "a"))
    run_full_experiment(small_config(tmp_path / "b", seed=6))
    assert (tmp_path / "a" / "db.csv").read_bytes() != (tmp_path / "b" / "db.csv").read_bytes()


def test_bernoulli_mode_pipeline(tmp_path):
    result = run_full_experiment(small_config(tmp_path / "run", mode="bernoulli"))
    assert result.exit_code in (0, 3)
    victims_file = tmp_path / "run" / "victims_10pct.jsonl"
    rates = {json.loads(line)["rate"] for line in victims_file.read_text().splitlines()}
    assert rates == {0.1}


def test_stage_error_names_failing_stage(tmp_path):
    cfg = small_config(tmp_path / "run", db_path=tmp_path / "missing.csv")
    with pytest.raises(StageError) as exc:
        run_full_experiment(cfg)
    assert exc.value.stage == "database"


def test_partial_artifacts_retained_on_late_failure(tmp_path):
    # one chemical -> 5 patterns -> empty validation split -> train-ann fails
    cfg = small_config(tmp_path / "run", n_chemicals=1)
    with pytest.raises(StageError) as exc:
        run_full_experiment(cfg)
    assert exc.value.stage == "train-ann"
    assert (tmp_path / "run" / "db.csv").exists()
    assert (tmp_path / "run" / "victims_10pct.jsonl").exists()
    assert (tmp_path / "run" / "tree.json").exists()


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(output_dir=tmp_path, rates=(1.5,))
    with pytest.raises(ValueError):
        ExperimentConfig(output_dir=tmp_path, replicas=0)
    with pytest.raises(ValueError):
        ExperimentConfig(output_dir=tmp_path, mode="banana")
