"""Command-line entry point; every pipeline stage is independently runnable.

Exit codes: 0 success, 1 usage error, 2 data error, 3 training non-convergence
(artifacts are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import database, evaluation, network, tree, victims
from .lookup import lookup_hits
from .experiment import (
    DEFAULT_RATES,
    ExperimentConfig,
    StageError,
    perturbation_spec,
    rate_label,
    run_full_experiment,
    stage_seed,
)

USAGE_ERROR, DATA_ERROR, NONCONVERGENCE = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _load_db(path: str) -> database.ChemicalDatabase:
    with open(path, "rb") as f:
        return database.load_database(f)


def _load_victims(path: str) -> list[victims.VictimRecord]:
    with open(path, "rb") as f:
        return victims.load_victims(f)


def _parse_dims(spec: str) -> list[int]:
    """Either 'start:stop:step' (stop inclusive) or a comma list of sizes."""
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"bad dims spec {spec!r}; expected start:stop:step")
        return list(range(parts[0], parts[1] + 1, parts[2]))
    return [int(p) for p in spec.split(",") if p]


def _parse_config_file(path: str) -> dict[str, str]:
    """Minimal key = value config format; '#' starts a comment."""
    values: dict[str, str] = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{i}: expected key = value")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip().strip("\"'")
    return values


def _victims_rate_label(vs: list[victims.VictimRecord]) -> str:
    rates = {v.rate for v in vs}
    if len(rates) == 1:
        return rate_label(rates.pop())
    return "mixed"


def _cmd_gen_db(args) -> int:
    db = database.generate_synthetic_database(
        args.chemicals, args.symptoms, args.density, args.seed
    )
    with open(args.out, "wb") as f:
        database.save_database(db, f)
    print(f"wrote {len(db)} x {db.n_symptoms} database to {args.out}")
    return 0


def _cmd_dedup(args) -> int:
    db = _load_db(args.db)
    deduped, report = database.deduplicate(db)
    with open(args.out, "wb") as f:
        database.save_database(deduped, f)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    print(f"{len(db)} records -> {report.unique_count} unique profiles")
    return 0


def _cmd_simulate(args) -> int:
    db = _load_db(args.db)
    if not db.dedup_applied:
        db, _ = database.deduplicate(db)
    cfg = ExperimentConfig(
        output_dir=Path("."),
        rates=(args.rate,),
        replicas=args.replicas,
        mode=args.mode,
        n_symptoms=db.n_symptoms,
        seed=args.seed,
    )
    spec = perturbation_spec(cfg, args.rate, stage_seed(args.seed, f"simulate-{rate_label(args.rate)}"))
    vs = victims.simulate_victims(db, spec)
    with open(args.out, "wb") as f:
        victims.save_victims(vs, f)
    print(f"wrote {len(vs)} victims ({args.mode}, rate {rate_label(args.rate)}) to {args.out}")
    return 0


def _cmd_train_tree(args) -> int:
    db = _load_db(args.db)
    if not db.dedup_applied:
        db, _ = database.deduplicate(db)
    trained = tree.train_tree(db, tree.TreeTrainConfig(args.max_splits, args.replication))
    with open(args.out, "wb") as f:
        tree.save_tree(trained, f)
    print(
        f"tree: depth={trained.depth} leaves={trained.leaf_count} "
        f"splits={trained.split_count} training_accuracy={trained.training_accuracy:.4f}"
    )
    return 0


def _cmd_dump_tree(args) -> int:
    with open(args.tree, "rb") as f:
        trained = tree.load_tree(f)
    stats = tree.tree_stats(trained)
    obj = {
        "depth": stats.depth,
        "leaf_count": stats.leaf_count,
        "split_count": stats.split_count,
        "leaf_depth_histogram": {str(k): v for k, v in stats.leaf_depth_histogram.items()},
    }
    if args.stats:
        Path(args.stats).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    if args.dot:
        names = tuple(_load_db(args.db).symptom_names) if args.db else None
        Path(args.dot).write_text(tree.to_dot(trained, names))
    print(json.dumps(obj, sort_keys=True))
    return 0


def _cmd_train_ann(args) -> int:
    db = _load_db(args.db)
    if not db.dedup_applied:
        db, _ = database.deduplicate(db)
    cfg = network.AnnTrainConfig(
        hidden_dim=args.hidden,
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
        seed=args.seed,
        feature_count=args.features or db.n_symptoms,
    )
    weights, report = network.train_ann(db, cfg)
    with open(args.out, "wb") as f:
        network.save_weights(weights, f)
    if args.report:
        Path(args.report).write_text(
            json.dumps(
                {
                    "cross_entropy": list(report.cross_entropy),
                    "cross_entropy_total": list(report.cross_entropy_total),
                    "error_rate": list(report.error_rate),
                    "epochs_run": report.epochs_run,
                    "converged": report.converged,
                },
                indent=2,
            )
            + "\n"
        )
    print(
        f"ann: hidden={args.hidden} epochs={report.epochs_run} "
        f"train_error={report.error_rate[0]:.4f} val_error={report.error_rate[1]:.4f} "
        f"converged={report.converged}"
    )
    return 0 if report.converged else NONCONVERGENCE


def _eval_hits(args, model: str, vs: list[victims.VictimRecord]):
    if model == "lookup":
        if not args.db:
            raise ValueError("--db is required for lookup evaluation")
        db = _load_db(args.db)
        if not db.dedup_applied:
            db, _ = database.deduplicate(db)
        return lookup_hits(db, vs)
    if model == "tree":
        if not args.tree:
            raise ValueError("--tree is required for tree evaluation")
        with open(args.tree, "rb") as f:
            trained = tree.load_tree(f)
        return tree.tree_hits(trained, vs)
    if not args.ann:
        raise ValueError("--ann is required for ann evaluation")
    with open(args.ann, "rb") as f:
        weights = network.load_weights(f)
    return network.ann_hits(weights, vs)


def _cmd_eval(args, model: str | None = None) -> int:
    model = model or args.model
    vs = _load_victims(args.victims)
    hits = _eval_hits(args, model, vs)
    label = args.rate_label or _victims_rate_label(vs)
    report = evaluation.evaluate_model(hits, vs, model, label)
    report.check_consistency()
    Path(args.out).write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    print(
        f"{model} @ {label}: overall={100 * report.overall_accuracy:.4f}% "
        f"min={report.min_accuracy:.4f} max={report.max_accuracy:.4f}"
    )
    return 0


def _cmd_sweep(args) -> int:
    db = _load_db(args.db)
    if not db.dedup_applied:
        db, _ = database.deduplicate(db)
    vs = _load_victims(args.victims)
    dims = _parse_dims(args.dims)
    base = network.AnnTrainConfig(
        seed=args.seed,
        learning_rate=args.learning_rate,
        max_epochs=args.max_epochs,
        feature_count=args.features,
    )
    rows = network.hidden_sweep(db, vs, dims, args.features, base)
    Path(args.out).write_text(
        json.dumps({"features": args.features, "rows": rows}, indent=2, sort_keys=True) + "\n"
    )
    for row in rows:
        print(f"hidden={row['hidden_dim']:4d} error={row['error_rate']:.4f}")
    return 0


def _cmd_report(args) -> int:
    reports = []
    for path in args.inputs:
        obj = json.loads(Path(path).read_text())
        reports.append(evaluation.report_from_json_dict(obj))
    summary = evaluation.comparison_report(reports, Path(args.out))
    if args.svg:
        evaluation.render_plots(reports, Path(args.out))
    print(json.dumps({k: summary[k] for k in ("models", "rates", "lookup_dominated")}))
    return 0


def _cmd_run_all(args) -> int:
    overrides = _parse_config_file(args.config) if args.config else {}

    def pick(flag_value, key: str, cast, default):
        if flag_value is not None:
            return flag_value
        if key in overrides:
            return cast(overrides[key])
        return default

    rates = pick(
        tuple(args.rates) if args.rates else None,
        "rates",
        lambda s: tuple(float(r) for r in s.split(",")),
        DEFAULT_RATES,
    )
    cfg = ExperimentConfig(
        output_dir=Path(pick(args.out, "out", str, "experiment_out")),
        db_path=Path(args.db) if args.db else (Path(overrides["db"]) if "db" in overrides else None),
        n_chemicals=pick(args.chemicals, "chemicals", int, database.DEFAULT_N_CHEMICALS),
        n_symptoms=pick(args.symptoms, "symptoms", int, database.DEFAULT_N_SYMPTOMS),
        density=pick(args.density, "density", float, database.DEFAULT_DENSITY),
        rates=rates,
        replicas=pick(args.replicas, "replicas", int, 100),
        mode=pick(args.mode, "mode", str, victims.FIXED_COUNT),
        seed=pick(args.seed, "seed", int, 42),
        hidden_dim=pick(args.hidden, "hidden", int, 20),
    )
    result = run_full_experiment(cfg)
    grid = result.summary.get("grid", [])
    for row in grid:
        print(f"{row['model']:6s} @ {row['rate']:>4s}: {row['accuracy_percent']:.4f}%")
    print(f"artifacts in {cfg.output_dir}")
    return result.exit_code


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    db = _load_db(args.db)
    if not db.dedup_applied:
        db, _ = database.deduplicate(db)
    with open(args.tree, "rb") as f:
        trained = tree.load_tree(f)
    with open(args.ann, "rb") as f:
        weights = network.load_weights(f)
    app = create_app(db, trained, weights, cors_origins=args.cors_origin)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="chemtriage", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-db", help="generate a synthetic chemical database CSV")
    p.add_argument("--chemicals", type=int, default=database.DEFAULT_N_CHEMICALS)
    p.add_argument("--symptoms", type=int, default=database.DEFAULT_N_SYMPTOMS)
    p.add_argument("--density", type=float, default=database.DEFAULT_DENSITY)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_db)

    p = sub.add_parser("dedup", help="collapse duplicate profiles to unique representatives")
    p.add_argument("--db", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_dedup)

    p = sub.add_parser("simulate", help="generate a perturbed victim set (JSONL)")
    p.add_argument("--db", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--mode", choices=[victims.BERNOULLI, victims.FIXED_COUNT],
                   default=victims.FIXED_COUNT)
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("train-tree", help="train the decision tree on ideal profiles")
    p.add_argument("--db", required=True)
    p.add_argument("--max-splits", type=int, default=tree.DEFAULT_MAX_SPLITS)
    p.add_argument("--replication", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_train_tree)

    p = sub.add_parser("dump-tree", help="emit tree depth/balance stats and a DOT rendering")
    p.add_argument("--tree", required=True)
    p.add_argument("--db", help="database CSV for symptom labels in the DOT output")
    p.add_argument("--stats")
    p.add_argument("--dot")
    p.set_defaults(fn=_cmd_dump_tree)

    p = sub.add_parser("train-ann", help="train the feed-forward classifier")
    p.add_argument("--db", required=True)
    p.add_argument("--hidden", type=int, default=20)
    p.add_argument("--features", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--max-epochs", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_train_ann)

    def add_eval(name: str, model: str | None, help_text: str):
        q = sub.add_parser(name, help=help_text)
        if model is None:
            q.add_argument("--model", choices=["lookup", "tree", "ann"], required=True)
        q.add_argument("--victims", required=True)
        q.add_argument("--db")
        q.add_argument("--tree")
        q.add_argument("--ann")
        q.add_argument("--rate-label")
        q.add_argument("--out", required=True)
        q.set_defaults(fn=lambda a, m=model: _cmd_eval(a, m))

    add_eval("eval", None, "evaluate a model on a victim set")
    add_eval("eval-lookup", "lookup", "evaluate subset-match look-up on a victim set")
    add_eval("eval-tree", "tree", "evaluate the decision tree on a victim set")
    add_eval("eval-ann", "ann", "evaluate the neural network on a victim set")

    p = sub.add_parser("sweep-hidden", help="hidden-layer size sweep evaluated on a victim set")
    p.add_argument("--db", required=True)
    p.add_argument("--victims", required=True)
    p.add_argument("--dims", default="10:100:10")
    p.add_argument("--features", type=int, default=79)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--max-epochs", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("report", help="merge accuracy reports into the comparison summary")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true", help="also render SVG charts (needs matplotlib)")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("run-all", help="run the full experiment pipeline")
    p.add_argument("--out")
    p.add_argument("--db")
    p.add_argument("--chemicals", type=int)
    p.add_argument("--symptoms", type=int)
    p.add_argument("--density", type=float)
    p.add_argument("--rates", type=float, nargs="+")
    p.add_argument("--replicas", type=int)
    p.add_argument("--mode", choices=[victims.BERNOULLI, victims.FIXED_COUNT])
    p.add_argument("--seed", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--config", help="key = value file; explicit flags take precedence")
    p.set_defaults(fn=_cmd_run_all)

    p = sub.add_parser("serve", help="run the interactive triage HTTP service")
    p.add_argument("--db", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--ann", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--cors-origin", default="*")
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        if isinstance(e.cause, (database.DatabaseFormatError, ValueError, KeyError, OSError)):
            return DATA_ERROR
        return DATA_ERROR
    except (database.DatabaseFormatError, database.GenerationError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_ERROR
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
