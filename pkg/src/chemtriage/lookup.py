"""Subset-match retrieval (WISER-style Substance ID) and its binomial performance model.

A chemical is a candidate for a query iff its profile contains every symptom
marked present in the query; absent query bits impose no constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .database import ChemicalDatabase, SymptomProfile
from .victims import VictimRecord


@dataclass(frozen=True)
class CandidateList:
    names: tuple[str, ...]
    query_popcount: int


def lookup(db: ChemicalDatabase, query: SymptomProfile) -> CandidateList:
    """All chemicals whose profile is a bitwise superset of the query's 1-bits."""
    if len(query) != db.n_symptoms:
        raise ValueError(
            f"query length {len(query)} != database symptom count {db.n_symptoms}"
        )
    q = query.mask
    names = tuple(rec.name for rec in db.records if q & ~rec.profile.mask == 0)
    return CandidateList(names=names, query_popcount=query.popcount)


def lookup_hit(db: ChemicalDatabase, victim: VictimRecord) -> bool:
    """Whether the true chemical appears in the candidate list for the victim's profile.

    Equivalent to `victim.true_chemical in lookup(db, victim.observed).names`:
    membership holds exactly when the true profile is a superset of the
    observed 1-bits, so a single mask test suffices.
    """
    if len(victim.observed) != db.n_symptoms:
        raise ValueError("victim profile length does not match database")
    true_mask = db.record(victim.true_chemical).profile.mask
    return victim.observed.mask & ~true_mask == 0


def lookup_hits(db: ChemicalDatabase, victims: list[VictimRecord]) -> list[bool]:
    return [lookup_hit(db, v) for v in victims]


def binomial_model(n: int) -> float:
    """Expected look-up success rate 1/2^n after exactly n toggles at bit density 1/2.

    Also evaluates the unsimplified form 1 - sum_{i=1..n} C(n,i) p^i (1-p)^(n-i)
    with p = 1/2 and checks it agrees with the closed form.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    p = 0.5
    explicit = 1.0 - sum(
        math.comb(n, i) * p**i * (1.0 - p) ** (n - i) for i in range(1, n + 1)
    )
    closed = 2.0**-n
    if abs(explicit - closed) > 1e-12:
        raise AssertionError(
            f"binomial sum {explicit!r} disagrees with closed form {closed!r} at n={n}"
        )
    return closed


def exact_success_probability(db: ChemicalDatabase, chemical: str, n: int) -> float:
    """Probability that n uniform distinct toggles all land on the chemical's 1-bits.

    Only 0->1 toggles exclude the true chemical from the candidate list, so the
    hit probability under exactly-n perturbation is C(k, n) / C(S, n) with k
    the profile's popcount.
    """
    s = db.n_symptoms
    if not 0 <= n <= s:
        raise ValueError(f"n must lie in [0, {s}]")
    k = db.record(chemical).profile.popcount
    return math.comb(k, n) / math.comb(s, n)
