#!/usr/bin/env python3
"""Hidden-neuron sweep on 5%-perturbed victims for 79- and 40-symptom inputs.

Trains one network per hidden size (10..100 by 10) for each feature count and
prints the victim error curve, mirroring the dimensional-reduction study.
"""

import argparse
import json
import sys
from pathlib import Path

from chemtriage.database import generate_synthetic_database
from chemtriage.experiment import perturbation_spec, ExperimentConfig, stage_seed
from chemtriage.network import AnnTrainConfig, hidden_sweep
from chemtriage.victims import simulate_victims


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results/sweep.json"))
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--replicas", type=int, default=100)
    args = parser.parse_args()

    db = generate_synthetic_database(311, 79, 0.5, stage_seed(args.seed, "synthetic-db"))
    cfg = ExperimentConfig(output_dir=Path("."), seed=args.seed, replicas=args.replicas)
    spec = perturbation_spec(cfg, 0.05, stage_seed(args.seed, "simulate-5%"))
    victims = simulate_victims(db, spec)

    results = {}
    for features in (79, 40):
        base = AnnTrainConfig(seed=stage_seed(args.seed, f"sweep-{features}"), feature_count=features)
        rows = hidden_sweep(db, victims, list(range(10, 101, 10)), features, base)
        results[str(features)] = rows
        print(f"\n{features} input symptoms:")
        for row in rows:
            print(f"  hidden={row['hidden_dim']:4d} victim error={100 * row['error_rate']:7.3f}%")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(results, indent=2, sort_keys=True) + "\n")
    print(f"\nwrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
