"""Single-hidden-layer feed-forward classifier trained by full-batch backpropagation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import BinaryIO, Sequence

import numpy as np

from .database import ChemicalDatabase, SymptomProfile
from .victims import VictimRecord


@dataclass
class NetworkWeights:
    """tanh hidden layer, softmax output; matrices are (out_features, in_features)."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        h, d = self.W1.shape
        o, h2 = self.W2.shape
        if h2 != h or self.b1.shape != (h,) or self.b2.shape != (o,):
            raise ValueError("inconsistent weight dimensions")
        if o != len(self.class_names):
            raise ValueError("output dimension does not match class names")
        for arr in (self.W1, self.b1, self.W2, self.b2):
            if not np.all(np.isfinite(arr)):
                raise ValueError("weights must be finite")

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def output_dim(self) -> int:
        return self.W2.shape[0]

    def copy(self) -> "NetworkWeights":
        return NetworkWeights(
            self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy(), self.class_names
        )


@dataclass(frozen=True)
class AnnTrainConfig:
    hidden_dim: int = 20
    replicas: int = 5
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)
    max_epochs: int = 2000
    patience: int = 50
    learning_rate: float = 0.5
    seed: int = 0
    feature_count: int = 79
    loss_floor: float = 1e-5  # stop once training cross-entropy drops this low

    def __post_init__(self):
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")
        if self.hidden_dim < 1 or self.replicas < 1 or self.feature_count < 1:
            raise ValueError("hidden_dim, replicas and feature_count must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class AnnTrainReport:
    cross_entropy: tuple[float, float, float]        # per-pattern (train, val, test)
    cross_entropy_total: tuple[float, float, float]  # summed over patterns
    error_rate: tuple[float, float, float]
    epochs_run: int
    converged: bool


def _forward(w: NetworkWeights, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hidden activations and softmax posteriors for a batch (rows are patterns)."""
    hidden = np.tanh(x @ w.W1.T + w.b1)
    logits = hidden @ w.W2.T + w.b2
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return hidden, e / e.sum(axis=1, keepdims=True)


def _cross_entropy(p: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy between softmax rows p and target rows y."""
    picked = np.clip((p * y).sum(axis=1), 1e-300, None)
    return float(-np.mean(np.log(picked)))


def _loss_and_grads(
    w: NetworkWeights, x: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    hidden, p = _forward(w, x)
    loss = _cross_entropy(p, y)
    dz2 = (p - y) / len(x)
    g_w2 = dz2.T @ hidden
    g_b2 = dz2.sum(axis=0)
    dh = dz2 @ w.W2
    dz1 = dh * (1.0 - hidden * hidden)
    g_w1 = dz1.T @ x
    g_b1 = dz1.sum(axis=0)
    return loss, g_w1, g_b1, g_w2, g_b2


def _init_weights(
    input_dim: int, hidden_dim: int, class_names: tuple[str, ...], rng: np.random.Generator
) -> NetworkWeights:
    # small uniform init scaled by 1/sqrt(fan-in)
    out = len(class_names)
    return NetworkWeights(
        W1=rng.uniform(-1, 1, (hidden_dim, input_dim)) / np.sqrt(input_dim),
        b1=np.zeros(hidden_dim),
        W2=rng.uniform(-1, 1, (out, hidden_dim)) / np.sqrt(hidden_dim),
        b2=np.zeros(out),
        class_names=class_names,
    )


def init_network(
    input_dim: int, hidden_dim: int, class_names: tuple[str, ...], seed: int = 0
) -> NetworkWeights:
    """Freshly initialized, untrained network (useful for gradient checking)."""
    return _init_weights(input_dim, hidden_dim, class_names, np.random.default_rng(seed))


def build_patterns(
    db: ChemicalDatabase, replicas: int, feature_count: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Replicated training patterns: inputs X, one-hot targets Y, class indices."""
    if feature_count > db.n_symptoms:
        raise ValueError("feature_count exceeds the database symptom count")
    base = db.profile_matrix()[:, :feature_count].astype(float)
    x = np.repeat(base, replicas, axis=0)
    labels = np.repeat(np.arange(len(db)), replicas)
    y = np.eye(len(db))[labels]
    return x, y, labels


def train_ann(
    db: ChemicalDatabase, cfg: AnnTrainConfig = AnnTrainConfig()
) -> tuple[NetworkWeights, AnnTrainReport]:
    """Replicate, randomly partition, and train by full-batch gradient descent.

    Early-stops when validation cross-entropy has not improved for
    `cfg.patience` epochs or training loss reaches `cfg.loss_floor`; the
    weights returned are the best-validation snapshot. Running out of
    `max_epochs` is reported as converged=False (weights still returned).
    """
    if not db.dedup_applied:
        raise ValueError("train_ann requires a deduplicated database")
    rng = np.random.default_rng([cfg.seed, 0x616E6E])
    x, y, labels = build_patterns(db, cfg.replicas, cfg.feature_count)
    m = len(x)
    perm = rng.permutation(m)
    n_train = int(m * cfg.split[0])
    n_val = int(m * cfg.split[1])
    idx_train = perm[:n_train]
    idx_val = perm[n_train : n_train + n_val]
    idx_test = perm[n_train + n_val :]
    if len(idx_train) == 0 or len(idx_val) == 0 or len(idx_test) == 0:
        raise ValueError("split produced an empty partition; use more patterns")

    w = _init_weights(cfg.feature_count, cfg.hidden_dim, tuple(r.name for r in db.records), rng)
    best = w.copy()
    best_val = np.inf
    stale = 0
    epochs_run = 0
    converged = False
    for _ in range(cfg.max_epochs):
        loss, g_w1, g_b1, g_w2, g_b2 = _loss_and_grads(w, x[idx_train], y[idx_train])
        w.W1 -= cfg.learning_rate * g_w1
        w.b1 -= cfg.learning_rate * g_b1
        w.W2 -= cfg.learning_rate * g_w2
        w.b2 -= cfg.learning_rate * g_b2
        epochs_run += 1

        _, p_val = _forward(w, x[idx_val])
        val_ce = _cross_entropy(p_val, y[idx_val])
        if val_ce < best_val - 1e-12:
            best_val = val_ce
            best = w.copy()
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                converged = True
                break
        _, p_tr = _forward(w, x[idx_train])
        if _cross_entropy(p_tr, y[idx_train]) <= cfg.loss_floor:
            converged = True
            if val_ce <= best_val:
                best = w.copy()
            break

    def split_metrics(idx: np.ndarray) -> tuple[float, float, float]:
        _, p = _forward(best, x[idx])
        ce = _cross_entropy(p, y[idx])
        err = float(np.mean(p.argmax(axis=1) != labels[idx]))
        return ce, ce * len(idx), err

    tr = split_metrics(idx_train)
    va = split_metrics(idx_val)
    te = split_metrics(idx_test)
    report = AnnTrainReport(
        cross_entropy=(tr[0], va[0], te[0]),
        cross_entropy_total=(tr[1], va[1], te[1]),
        error_rate=(tr[2], va[2], te[2]),
        epochs_run=epochs_run,
        converged=converged,
    )
    return best, report


def predict_ann(weights: NetworkWeights, profile: SymptomProfile) -> tuple[str, np.ndarray]:
    """Forward pass on the profile's leading input_dim bits; argmax plus posterior."""
    if len(profile) < weights.input_dim:
        raise ValueError(
            f"profile provides {len(profile)} bits; network needs {weights.input_dim}"
        )
    x = np.array(profile.flags[: weights.input_dim], dtype=float)[None, :]
    _, p = _forward(weights, x)
    posterior = p[0]
    return weights.class_names[int(posterior.argmax())], posterior


def ann_hits(weights: NetworkWeights, victims: Sequence[VictimRecord]) -> np.ndarray:
    """Batched hit vector: argmax prediction equals the true chemical."""
    x = np.array(
        [v.observed.flags[: weights.input_dim] for v in victims], dtype=float
    )
    _, p = _forward(weights, x)
    predicted = p.argmax(axis=1)
    class_index = {name: i for i, name in enumerate(weights.class_names)}
    truth = np.array([class_index[v.true_chemical] for v in victims])
    return predicted == truth


def hidden_sweep(
    db: ChemicalDatabase,
    victims: Sequence[VictimRecord],
    hidden_dims: Sequence[int],
    feature_count: int,
    base_config: AnnTrainConfig = AnnTrainConfig(),
) -> list[dict]:
    """Train one model per hidden size and score each on the victim set.

    Returns rows {hidden_dim, error_rate, train_error, epochs, converged};
    each model gets its own seed derived from (base seed, hidden_dim).
    """
    if not hidden_dims:
        raise ValueError("hidden_dims must be non-empty")
    rows = []
    for h in hidden_dims:
        cfg = AnnTrainConfig(
            hidden_dim=h,
            replicas=base_config.replicas,
            split=base_config.split,
            max_epochs=base_config.max_epochs,
            patience=base_config.patience,
            learning_rate=base_config.learning_rate,
            seed=int(np.random.SeedSequence([base_config.seed, h]).generate_state(1)[0]),
            feature_count=feature_count,
            loss_floor=base_config.loss_floor,
        )
        weights, report = train_ann(db, cfg)
        hits = ann_hits(weights, victims)
        rows.append(
            {
                "hidden_dim": h,
                "error_rate": float(1.0 - hits.mean()),
                "train_error": report.error_rate[0],
                "epochs": report.epochs_run,
                "converged": report.converged,
            }
        )
    return rows


def gradient_check(
    weights: NetworkWeights,
    pattern: tuple[np.ndarray, np.ndarray],
    step: float = 1e-5,
    max_params: int = 300,
    seed: int = 0,
) -> float:
    """Max relative deviation between analytic and central-difference gradients.

    Probes a deterministic sample of parameters (all of them when the network
    is small); the finite-difference oracle re-runs the forward pass only.
    """
    x, y = pattern
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    _, g_w1, g_b1, g_w2, g_b2 = _loss_and_grads(weights, x, y)
    analytic = [g_w1, g_b1, g_w2, g_b2]
    arrays = [weights.W1, weights.b1, weights.W2, weights.b2]

    def loss_at() -> float:
        _, p = _forward(weights, x)
        return _cross_entropy(p, y)

    total = sum(a.size for a in arrays)
    rng = np.random.default_rng(seed)
    if total <= max_params:
        picks = [(ai, fi) for ai, a in enumerate(arrays) for fi in range(a.size)]
    else:
        flat = rng.choice(total, size=max_params, replace=False)
        offsets = np.cumsum([0] + [a.size for a in arrays])
        picks = []
        for f in sorted(int(v) for v in flat):
            ai = int(np.searchsorted(offsets, f, side="right")) - 1
            picks.append((ai, f - int(offsets[ai])))

    worst = 0.0
    for ai, fi in picks:
        arr = arrays[ai]
        orig = arr.flat[fi]
        arr.flat[fi] = orig + step
        up = loss_at()
        arr.flat[fi] = orig - step
        down = loss_at()
        arr.flat[fi] = orig
        numeric = (up - down) / (2 * step)
        exact = analytic[ai].flat[fi]
        denom = max(abs(numeric) + abs(exact), 1e-8)
        worst = max(worst, abs(numeric - exact) / denom)
    return worst


def save_weights(weights: NetworkWeights, sink: BinaryIO) -> None:
    obj = {
        "input_dim": weights.input_dim,
        "hidden_dim": weights.hidden_dim,
        "output_dim": weights.output_dim,
        "classes": list(weights.class_names),
        "W1": weights.W1.tolist(),
        "b1": weights.b1.tolist(),
        "W2": weights.W2.tolist(),
        "b2": weights.b2.tolist(),
    }
    sink.write(json.dumps(obj, separators=(",", ":")).encode("utf-8") + b"\n")


def load_weights(source: BinaryIO | bytes) -> NetworkWeights:
    data = source if isinstance(source, bytes) else source.read()
    obj = json.loads(data.decode("utf-8"))
    return NetworkWeights(
        W1=np.array(obj["W1"], dtype=float),
        b1=np.array(obj["b1"], dtype=float),
        W2=np.array(obj["W2"], dtype=float),
        b2=np.array(obj["b2"], dtype=float),
        class_names=tuple(obj["classes"]),
    )
