"""Chemical identification benchmark and triage service.

Compares subset-match database look-up against a binary decision tree and a
feed-forward neural network on perturbed simulated-victim symptom data, and
serves the trained models behind an interactive HTTP API.
"""

from .database import (
    ChemicalDatabase,
    ChemicalRecord,
    DedupReport,
    SymptomProfile,
    deduplicate,
    generate_synthetic_database,
    load_database,
    save_database,
)
from .evaluation import AccuracyReport, KdeCurve, accuracy, estimate_kde, evaluate_model
from .lookup import CandidateList, binomial_model, exact_success_probability, lookup, lookup_hit
from .network import AnnTrainConfig, NetworkWeights, gradient_check, predict_ann, train_ann
from .tree import TrainedTree, TreeTrainConfig, predict_tree, question_path, train_tree
from .victims import PerturbationSpec, VictimRecord, perturbation_density, simulate_victims

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "AnnTrainConfig",
    "CandidateList",
    "ChemicalDatabase",
    "ChemicalRecord",
    "DedupReport",
    "KdeCurve",
    "NetworkWeights",
    "PerturbationSpec",
    "SymptomProfile",
    "TrainedTree",
    "TreeTrainConfig",
    "VictimRecord",
    "accuracy",
    "binomial_model",
    "deduplicate",
    "estimate_kde",
    "evaluate_model",
    "exact_success_probability",
    "generate_synthetic_database",
    "gradient_check",
    "load_database",
    "lookup",
    "lookup_hit",
    "perturbation_density",
    "predict_ann",
    "predict_tree",
    "question_path",
    "save_database",
    "simulate_victims",
    "train_ann",
    "train_tree",
]
