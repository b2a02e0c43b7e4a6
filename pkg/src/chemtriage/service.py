"""Interactive triage HTTP service: session-scoped observations, live candidates,
classifier predictions, and next-symptom suggestions."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .database import ChemicalDatabase, SymptomProfile, content_hash
from .lookup import lookup
from .network import NetworkWeights, predict_ann
from .tree import TrainedTree, deviance, question_path

PRESENT, ABSENT, UNKNOWN = "present", "absent", "unknown"
ANN_INPUT_NOTE = (
    "the network was trained on complete binary vectors; "
    "unknown and absent symptoms both enter as 0"
)


class ObservationBody(BaseModel):
    state: Literal["present", "absent", "unknown"]


@dataclass
class _Session:
    observations: dict[int, str] = field(default_factory=dict)  # present/absent only
    created_at: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _information_gain_symptom(
    db: ChemicalDatabase, candidate_names: tuple[str, ...], answered: set[int]
) -> int | None:
    """Unanswered symptom with the largest deviance reduction over the candidate set,
    treating each candidate as its own class under a uniform distribution."""
    if len(candidate_names) < 2:
        return None
    profiles = [db.record(n).profile.flags for n in candidate_names]
    m = len(profiles)
    parent = deviance(np.ones(m, dtype=np.int64))
    best_gain = 0.0
    best_j: int | None = None
    for j in range(db.n_symptoms):
        if j in answered:
            continue
        m1 = sum(p[j] for p in profiles)
        m0 = m - m1
        if m0 == 0 or m1 == 0:
            continue
        gain = parent - deviance(np.ones(m0, dtype=np.int64)) - deviance(np.ones(m1, dtype=np.int64))
        if gain > best_gain:
            best_gain = gain
            best_j = j
    return best_j


def compute_view(
    db: ChemicalDatabase,
    tree: TrainedTree,
    weights: NetworkWeights,
    observations: dict[int, str],
    top_k: int = 5,
) -> dict:
    """CandidateView as a pure function of (observations, loaded models)."""
    s = db.n_symptoms
    present_flags = tuple(1 if observations.get(j) == PRESENT else 0 for j in range(s))
    query = SymptomProfile(present_flags)
    candidates = lookup(db, query)

    answers = {
        j: (1 if state == PRESENT else 0)
        for j, state in observations.items()
        if state in (PRESENT, ABSENT)
    }
    step = question_path(tree, answers)

    _, posterior = predict_ann(weights, query)
    order = np.argsort(-posterior, kind="stable")[:top_k]
    ann_topk = [
        {"name": weights.class_names[int(i)], "posterior": float(posterior[int(i)])}
        for i in order
    ]

    next_symptom = step.next_symptom
    if next_symptom is None:
        next_symptom = _information_gain_symptom(db, candidates.names, set(answers))

    return {
        "lookup_candidates": {
            "names": list(candidates.names),
            "count": len(candidates.names),
            "query_popcount": candidates.query_popcount,
        },
        "tree_prediction": step.prediction,
        "ann_topk": ann_topk,
        "next_symptom": next_symptom,
        "note": ANN_INPUT_NOTE,
    }


def create_app(
    db: ChemicalDatabase,
    tree: TrainedTree,
    weights: NetworkWeights,
    cors_origins: str | list[str] = "*",
    session_ttl: float = 3600.0,
) -> FastAPI:
    if not db.dedup_applied:
        raise ValueError("service requires a deduplicated database")
    if tree.n_symptoms != db.n_symptoms:
        raise ValueError("tree input size does not match database")

    app = FastAPI(title="chemtriage", version="0.1.0")
    origins = [cors_origins] if isinstance(cors_origins, str) else list(cors_origins)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    meta = {
        "db_hash": content_hash(db),
        "n_chemicals": len(db),
        "n_symptoms": db.n_symptoms,
        "tree_depth": tree.depth,
        "ann_dims": [weights.input_dim, weights.hidden_dim, weights.output_dim],
    }
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    def purge_expired() -> None:
        cutoff = time.monotonic() - session_ttl
        with registry_lock:
            for sid in [s for s, sess in sessions.items() if sess.created_at < cutoff]:
                del sessions[sid]

    def get_session(sid: str) -> _Session:
        purge_expired()
        with registry_lock:
            sess = sessions.get(sid)
        if sess is None:
            raise HTTPException(status_code=404, detail=f"unknown session {sid!r}")
        return sess

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": len(sessions), "model": meta}

    @app.get("/symptoms")
    def symptoms():
        return {"symptoms": list(db.symptom_names), "model": meta}

    @app.post("/sessions")
    def create_session():
        purge_expired()
        sid = uuid.uuid4().hex
        with registry_lock:
            sessions[sid] = _Session()
        return {"session_id": sid, "model": meta}

    @app.put("/sessions/{sid}/observations/{index}")
    def record_observation(sid: str, index: int, body: ObservationBody):
        if not 0 <= index < db.n_symptoms:
            raise HTTPException(
                status_code=422,
                detail=f"symptom index {index} out of range [0, {db.n_symptoms})",
            )
        sess = get_session(sid)
        with sess.lock:
            if body.state == UNKNOWN:
                sess.observations.pop(index, None)
            else:
                sess.observations[index] = body.state
            observations = dict(sess.observations)
        view = compute_view(db, tree, weights, observations)
        return {
            "session_id": sid,
            **view,
            "observations": {str(i): s for i, s in sorted(observations.items())},
            "model": meta,
        }

    @app.get("/sessions/{sid}/candidates")
    def get_candidates(sid: str):
        sess = get_session(sid)
        with sess.lock:
            observations = dict(sess.observations)
        view = compute_view(db, tree, weights, observations)
        return {
            "session_id": sid,
            **view,
            "observations": {str(i): s for i, s in sorted(observations.items())},
            "model": meta,
        }

    return app
