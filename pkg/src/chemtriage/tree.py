"""Multiclass binary decision tree trained by greedy deviance (cross-entropy) reduction."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import BinaryIO, Mapping, Union

import numpy as np

from .database import ChemicalDatabase, SymptomProfile

DEFAULT_MAX_SPLITS = 350


class InseparableProfilesError(ValueError):
    """Distinct labels share an identical profile; no split can separate them."""

    def __init__(self, colliding: list[list[str]]):
        self.colliding = colliding
        groups = "; ".join(", ".join(g) for g in colliding)
        super().__init__(f"identical profiles with distinct labels: {groups}")


@dataclass
class Leaf:
    chemical: str
    class_counts: dict[str, int] = field(default_factory=dict)


@dataclass
class Split:
    symptom: int
    left: "TreeNode"   # samples with bit 0 at `symptom`
    right: "TreeNode"  # samples with bit 1


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeTrainConfig:
    max_splits: int = DEFAULT_MAX_SPLITS
    replication_factor: int = 1

    def __post_init__(self):
        if self.max_splits < 1:
            raise ValueError("max_splits must be positive")
        if self.replication_factor < 1:
            raise ValueError("replication_factor must be positive")


@dataclass
class TrainedTree:
    root: TreeNode
    n_symptoms: int
    depth: int
    leaf_count: int
    split_count: int
    training_accuracy: float


@dataclass(frozen=True)
class TreeStats:
    depth: int
    leaf_count: int
    split_count: int
    leaf_depth_histogram: dict[int, int]


@dataclass(frozen=True)
class QuestionStep:
    """Either the next symptom to ask about, or a final prediction."""

    next_symptom: int | None
    prediction: str | None


def deviance(counts: np.ndarray) -> float:
    """Total deviance n*H(p) = n ln n - sum_c c ln c over positive class counts."""
    c = counts[counts > 0].astype(float)
    n = float(c.sum())
    if n == 0 or len(c) <= 1:
        return 0.0
    return n * math.log(n) - float(np.sum(c * np.log(c)))


def train_tree(db: ChemicalDatabase, cfg: TreeTrainConfig = TreeTrainConfig()) -> TrainedTree:
    """Greedy top-down induction maximizing deviance reduction at each split.

    Nodes are expanded breadth-first until pure or until `max_splits` is spent;
    ties among equal-gain symptoms go to the lowest symptom index; bit 0
    descends left, bit 1 right. Uniform sample replication is normalized away
    before scoring, so the induced structure is invariant under
    `replication_factor`.
    """
    if not db.dedup_applied:
        raise ValueError("train_tree requires a deduplicated database")
    if len(db) == 0:
        raise ValueError("empty database")
    x = db.profile_matrix()
    names = [r.name for r in db.records]

    by_profile: dict[bytes, list[str]] = {}
    for i, rec in enumerate(db.records):
        by_profile.setdefault(x[i].tobytes(), []).append(rec.name)
    colliding = [g for g in by_profile.values() if len(g) > 1]
    if colliding:
        raise InseparableProfilesError(colliding)

    # Every sample carries weight replication_factor; scoring divides the node's
    # counts by their gcd, which cancels any uniform factor exactly and makes
    # the tree structure bit-identical across factors.
    def node_counts(idx: np.ndarray) -> np.ndarray:
        counts = np.full(len(idx), cfg.replication_factor, dtype=np.int64)
        g = int(np.gcd.reduce(counts)) if len(counts) else 1
        return counts // max(g, 1)

    splits_used = 0
    queue: deque[tuple[np.ndarray, int, Split | None, str]] = deque()
    queue.append((np.arange(len(db)), 0, None, ""))
    root: TreeNode | None = None
    leaf_depths: list[int] = []

    def make_leaf(idx: np.ndarray) -> Leaf:
        # majority class; ties go to the lowest database index (idx is sorted)
        best = int(idx[0])
        counts = {names[int(i)]: cfg.replication_factor for i in idx}
        return Leaf(chemical=names[best], class_counts=counts)

    def attach(parent: Split | None, side: str, node: TreeNode) -> None:
        nonlocal root
        if parent is None:
            root = node
        elif side == "left":
            parent.left = node
        else:
            parent.right = node

    while queue:
        idx, depth, parent, side = queue.popleft()
        if len(idx) == 1 or splits_used >= cfg.max_splits:
            attach(parent, side, make_leaf(idx))
            leaf_depths.append(depth)
            continue

        weights = node_counts(idx)
        parent_dev = deviance(weights)
        best_gain = 0.0
        best_j = -1
        for j in range(db.n_symptoms):
            right_mask = x[idx, j] == 1
            n_right = int(right_mask.sum())
            if n_right == 0 or n_right == len(idx):
                continue
            gain = (
                parent_dev
                - deviance(weights[~right_mask])
                - deviance(weights[right_mask])
            )
            if gain > best_gain:
                best_gain = gain
                best_j = j
        if best_j < 0:
            # distinct profiles guarantee a separating bit exists
            raise InseparableProfilesError([[names[int(i)] for i in idx]])

        node = Split(symptom=best_j, left=None, right=None)  # type: ignore[arg-type]
        attach(parent, side, node)
        splits_used += 1
        right_mask = x[idx, best_j] == 1
        queue.append((idx[~right_mask], depth + 1, node, "left"))
        queue.append((idx[right_mask], depth + 1, node, "right"))

    assert root is not None
    tree = TrainedTree(
        root=root,
        n_symptoms=db.n_symptoms,
        depth=max(leaf_depths),
        leaf_count=len(leaf_depths),
        split_count=splits_used,
        training_accuracy=0.0,
    )
    correct = sum(
        predict_tree(tree, rec.profile) == rec.name for rec in db.records
    )
    tree.training_accuracy = correct / len(db)
    return tree


def predict_tree(tree: TrainedTree, profile: SymptomProfile) -> str:
    """Deterministic root-to-leaf descent on the profile's bit values."""
    if len(profile) != tree.n_symptoms:
        raise ValueError(
            f"profile length {len(profile)} != tree input size {tree.n_symptoms}"
        )
    node = tree.root
    while isinstance(node, Split):
        node = node.right if profile.flags[node.symptom] else node.left
    return node.chemical


def tree_hits(tree: TrainedTree, victims) -> list[bool]:
    return [predict_tree(tree, v.observed) == v.true_chemical for v in victims]


def decision_path(tree: TrainedTree, profile: SymptomProfile) -> list[tuple[int, int]]:
    """(symptom, bit) tests encountered descending with the given profile."""
    if len(profile) != tree.n_symptoms:
        raise ValueError("profile length does not match tree input size")
    path = []
    node = tree.root
    while isinstance(node, Split):
        bit = int(profile.flags[node.symptom])
        path.append((node.symptom, bit))
        node = node.right if bit else node.left
    return path


def question_path(tree: TrainedTree, answers: Mapping[int, int]) -> QuestionStep:
    """Descend while answers cover the splits encountered.

    Returns the first unanswered split symptom, or the leaf's prediction when
    the answered path reaches a leaf.
    """
    for idx, bit in answers.items():
        if not 0 <= idx < tree.n_symptoms:
            raise ValueError(f"answer index {idx} out of range")
        if bit not in (0, 1):
            raise ValueError(f"answer for symptom {idx} must be 0 or 1")
    node = tree.root
    while isinstance(node, Split):
        if node.symptom not in answers:
            return QuestionStep(next_symptom=node.symptom, prediction=None)
        node = node.right if answers[node.symptom] else node.left
    return QuestionStep(next_symptom=None, prediction=node.chemical)


def tree_stats(tree: TrainedTree) -> TreeStats:
    histogram: dict[int, int] = {}

    def walk(node: TreeNode, depth: int) -> None:
        if isinstance(node, Leaf):
            histogram[depth] = histogram.get(depth, 0) + 1
        else:
            walk(node.left, depth + 1)
            walk(node.right, depth + 1)

    walk(tree.root, 0)
    leaf_count = sum(histogram.values())
    return TreeStats(
        depth=max(histogram),
        leaf_count=leaf_count,
        split_count=leaf_count - 1,
        leaf_depth_histogram=dict(sorted(histogram.items())),
    )


def structurally_equal(a: TreeNode, b: TreeNode) -> bool:
    if isinstance(a, Leaf) and isinstance(b, Leaf):
        return a.chemical == b.chemical
    if isinstance(a, Split) and isinstance(b, Split):
        return (
            a.symptom == b.symptom
            and structurally_equal(a.left, b.left)
            and structurally_equal(a.right, b.right)
        )
    return False


def _node_to_obj(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.chemical}
    return {
        "split": node.symptom,
        "left": _node_to_obj(node.left),
        "right": _node_to_obj(node.right),
    }


def _node_from_obj(obj: dict) -> TreeNode:
    if "leaf" in obj:
        return Leaf(chemical=obj["leaf"])
    return Split(
        symptom=int(obj["split"]),
        left=_node_from_obj(obj["left"]),
        right=_node_from_obj(obj["right"]),
    )


def save_tree(tree: TrainedTree, sink: BinaryIO) -> None:
    obj = {
        "n_symptoms": tree.n_symptoms,
        "depth": tree.depth,
        "leaf_count": tree.leaf_count,
        "split_count": tree.split_count,
        "training_accuracy": tree.training_accuracy,
        "root": _node_to_obj(tree.root),
    }
    sink.write(json.dumps(obj, separators=(",", ":")).encode("utf-8") + b"\n")


def load_tree(source: BinaryIO | bytes) -> TrainedTree:
    data = source if isinstance(source, bytes) else source.read()
    obj = json.loads(data.decode("utf-8"))
    return TrainedTree(
        root=_node_from_obj(obj["root"]),
        n_symptoms=int(obj["n_symptoms"]),
        depth=int(obj["depth"]),
        leaf_count=int(obj["leaf_count"]),
        split_count=int(obj["split_count"]),
        training_accuracy=float(obj["training_accuracy"]),
    )


def to_dot(tree: TrainedTree, symptom_names: tuple[str, ...] | None = None) -> str:
    """Graphviz rendering of the tree topology; edge 0 = symptom absent, 1 = present."""
    lines = ["digraph tree {", "  node [shape=box];"]
    counter = 0

    def walk(node: TreeNode) -> int:
        nonlocal counter
        my_id = counter
        counter += 1
        if isinstance(node, Leaf):
            lines.append(f'  n{my_id} [label="{node.chemical}", shape=ellipse];')
        else:
            label = (
                symptom_names[node.symptom]
                if symptom_names is not None
                else f"ssx[{node.symptom}]"
            )
            lines.append(f'  n{my_id} [label="{label}?"];')
            left_id = walk(node.left)
            right_id = walk(node.right)
            lines.append(f'  n{my_id} -> n{left_id} [label="0"];')
            lines.append(f'  n{my_id} -> n{right_id} [label="1"];')
        return my_id

    walk(tree.root)
    lines.append("}")
    return "\n".join(lines) + "\n"
