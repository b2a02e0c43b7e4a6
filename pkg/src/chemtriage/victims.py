"""Simulated victims: controlled random toggling of symptom bits on ideal profiles."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import BinaryIO, Sequence

import numpy as np

from .database import ChemicalDatabase, SymptomProfile
from .evaluation import KdeCurve, estimate_kde

BERNOULLI = "bernoulli"
FIXED_COUNT = "fixed_count"


@dataclass(frozen=True)
class PerturbationSpec:
    """How to perturb: per-bit Bernoulli(rate) toggling, or exactly `count` toggles."""

    mode: str
    rate: float = 0.0
    count: int = 0
    replicas_per_chemical: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (BERNOULLI, FIXED_COUNT):
            raise ValueError(f"unknown perturbation mode {self.mode!r}")
        if self.mode == BERNOULLI and not 0.0 <= self.rate <= 1.0:
            raise ValueError("bernoulli rate must lie in [0, 1]")
        if self.mode == FIXED_COUNT and self.count < 0:
            raise ValueError("fixed_count toggles must be non-negative")
        if self.replicas_per_chemical < 1:
            raise ValueError("replicas_per_chemical must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def bernoulli(cls, rate: float, replicas_per_chemical: int = 100, seed: int = 0):
        return cls(BERNOULLI, rate=rate, replicas_per_chemical=replicas_per_chemical, seed=seed)

    @classmethod
    def fixed_count(cls, count: int, replicas_per_chemical: int = 100, seed: int = 0):
        return cls(FIXED_COUNT, count=count, replicas_per_chemical=replicas_per_chemical, seed=seed)

    def nominal_rate(self, n_symptoms: int) -> float:
        return self.rate if self.mode == BERNOULLI else self.count / n_symptoms


@dataclass(frozen=True)
class VictimRecord:
    true_chemical: str
    observed: SymptomProfile
    toggled_indices: tuple[int, ...]
    rate: float

    def __post_init__(self):
        n = len(self.observed)
        if len(set(self.toggled_indices)) != len(self.toggled_indices):
            raise ValueError("toggled_indices must be distinct")
        if any(not 0 <= i < n for i in self.toggled_indices):
            raise ValueError("toggled index out of range")


def simulate_victims(db: ChemicalDatabase, spec: PerturbationSpec) -> list[VictimRecord]:
    """One record per (chemical, replica), in chemical-then-replica order.

    Each record draws from its own generator seeded by (spec.seed, chemical
    index, replica index), so content is independent of generation order and
    identical across runs with the same spec.
    """
    if not db.dedup_applied:
        raise ValueError("simulate_victims requires a deduplicated database")
    s = db.n_symptoms
    if spec.mode == FIXED_COUNT and spec.count > s:
        raise ValueError(f"cannot toggle {spec.count} distinct symptoms out of {s}")
    nominal = spec.nominal_rate(s)

    victims: list[VictimRecord] = []
    for ci, rec in enumerate(db.records):
        for ri in range(spec.replicas_per_chemical):
            rng = np.random.default_rng([spec.seed, ci, ri])
            if spec.mode == BERNOULLI:
                toggles = np.flatnonzero(rng.random(s) < spec.rate)
            else:
                toggles = rng.choice(s, size=spec.count, replace=False)
            toggled = tuple(sorted(int(t) for t in toggles))
            victims.append(
                VictimRecord(
                    true_chemical=rec.name,
                    observed=rec.profile.toggled(toggled),
                    toggled_indices=toggled,
                    rate=nominal,
                )
            )
    return victims


def toggle_counts(victims: Sequence[VictimRecord]) -> np.ndarray:
    return np.array([len(v.toggled_indices) for v in victims], dtype=float)


def perturbation_density(victims: Sequence[VictimRecord]) -> KdeCurve:
    """KDE over per-victim toggle counts (the realized perturbation distribution)."""
    if not victims:
        raise ValueError("no victims")
    return estimate_kde(toggle_counts(victims))


def save_victims(victims: Sequence[VictimRecord], sink: BinaryIO) -> None:
    """JSONL, one victim per line."""
    lines = []
    for v in victims:
        lines.append(
            json.dumps(
                {
                    "true_chemical": v.true_chemical,
                    "observed": v.observed.to_bits(),
                    "toggled_indices": list(v.toggled_indices),
                    "rate": v.rate,
                },
                separators=(",", ":"),
            )
        )
    sink.write(("\n".join(lines) + "\n").encode("utf-8"))


def load_victims(source: BinaryIO | bytes) -> list[VictimRecord]:
    data = source if isinstance(source, bytes) else source.read()
    victims = []
    for line in data.decode("utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        victims.append(
            VictimRecord(
                true_chemical=obj["true_chemical"],
                observed=SymptomProfile.from_bits(obj["observed"]),
                toggled_indices=tuple(obj["toggled_indices"]),
                rate=obj["rate"],
            )
        )
    return victims
