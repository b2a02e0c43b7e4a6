#!/usr/bin/env python3
"""Spin up a demo triage service on freshly trained models.

Small by default so it starts in seconds; pass --full for the 311x79 setup.
Point the browser console at it with frontend/index.html?api=http://127.0.0.1:8000
(after `npm run build` in frontend/).
"""

import argparse
import sys

import uvicorn

from chemtriage.database import generate_synthetic_database
from chemtriage.network import AnnTrainConfig, train_ann
from chemtriage.service import create_app
from chemtriage.tree import train_tree


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--full", action="store_true", help="311 chemicals x 79 symptoms")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    n, s, hidden = (311, 79, 20) if args.full else (16, 8, 6)
    print(f"training models on a {n}x{s} synthetic database ...")
    db = generate_synthetic_database(n, s, 0.5, args.seed)
    tree = train_tree(db)
    weights, _ = train_ann(
        db, AnnTrainConfig(hidden_dim=hidden, feature_count=s, seed=args.seed)
    )
    app = create_app(db, tree, weights)
    print(f"tree depth {tree.depth}; serving on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
