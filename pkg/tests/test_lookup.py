import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemtriage.database import SymptomProfile, generate_synthetic_database
from chemtriage.lookup import (
    binomial_model,
    exact_success_probability,
    lookup,
    lookup_hit,
    lookup_hits,
)
from chemtriage.victims import PerturbationSpec, VictimRecord, simulate_victims
from conftest import make_db

TOY = make_db([(1, 1, 0, 0), (1, 0, 1, 0), (0, 1, 1, 1), (0, 0, 0, 1)], dedup=True)


def brute_force_candidates(db, query):
    out = []
    for rec in db.records:
        if all(not q or p for q, p in zip(query.flags, rec.profile.flags)):
            out.append(rec.name)
    return out


def test_all_zero_query_returns_everything(small_db):
    result = lookup(small_db, SymptomProfile((0,) * small_db.n_symptoms))
    assert list(result.names) == [r.name for r in small_db.records]
    assert result.query_popcount == 0


def test_exact_profile_query_includes_itself(small_db):
    for rec in small_db.records:
        assert rec.name in lookup(small_db, rec.profile).names


def test_single_bit_query_matches_brute_force():
    for j in range(4):
        flags = tuple(1 if i == j else 0 for i in range(4))
        got = lookup(TOY, SymptomProfile(flags))
        assert list(got.names) == brute_force_candidates(TOY, SymptomProfile(flags))


def test_query_length_mismatch_rejected(small_db):
    with pytest.raises(ValueError):
        lookup(small_db, SymptomProfile((0, 1)))


def test_exhaustive_equivalence_small_instance(small_db):
    # S = 8, 16 chemicals: all 256 possible queries against the brute force oracle
    s = small_db.n_symptoms
    for code in range(2**s):
        query = SymptomProfile(tuple((code >> b) & 1 for b in range(s)))
        assert list(lookup(small_db, query).names) == brute_force_candidates(
            small_db, query
        )


@given(st.integers(0, 2**16 - 1), st.integers(0, 15))
@settings(max_examples=60)
def test_monotone_query_growth_shrinks_candidates(code, extra_bit):
    db = generate_synthetic_database(24, 16, 0.5, seed=41)
    flags = tuple((code >> b) & 1 for b in range(16))
    base = set(lookup(db, SymptomProfile(flags)).names)
    grown = list(flags)
    grown[extra_bit] = 1
    bigger = set(lookup(db, SymptomProfile(tuple(grown))).names)
    assert bigger <= base


def test_all_ones_query_returns_only_all_ones_profiles():
    db = make_db([(1, 1, 1), (1, 0, 1)], dedup=True)
    got = lookup(db, SymptomProfile((1, 1, 1)))
    assert list(got.names) == ["chem_000"]


def test_hit_zero_toggles(small_db):
    vs = simulate_victims(small_db, PerturbationSpec.bernoulli(0.0, 1, seed=1))
    assert all(lookup_hit(small_db, v) for v in vs)


def test_hit_only_removals_always_true(small_db):
    for rec in small_db.records:
        ones = [i for i, f in enumerate(rec.profile.flags) if f]
        if not ones:
            continue
        v = VictimRecord(rec.name, rec.profile.toggled(ones[:1]), tuple(ones[:1]), 0.1)
        assert lookup_hit(small_db, v)
        assert rec.name in lookup(small_db, v.observed).names


def test_hit_any_addition_always_false(small_db):
    for rec in small_db.records:
        zeros = [i for i, f in enumerate(rec.profile.flags) if not f]
        if not zeros:
            continue
        v = VictimRecord(rec.name, rec.profile.toggled(zeros[:1]), tuple(zeros[:1]), 0.1)
        assert not lookup_hit(small_db, v)
        assert rec.name not in lookup(small_db, v.observed).names


def test_hit_unknown_chemical_rejected(small_db):
    rec = small_db.records[0]
    v = VictimRecord("nope", rec.profile, (), 0.0)
    with pytest.raises(KeyError):
        lookup_hit(small_db, v)


def test_hit_agrees_with_membership(small_db):
    vs = simulate_victims(small_db, PerturbationSpec.bernoulli(0.25, 5, seed=3))
    for v in vs:
        member = v.true_chemical in lookup(small_db, v.observed).names
        assert lookup_hit(small_db, v) == member


def test_binomial_model_paper_values():
    assert binomial_model(0) == 1.0
    assert binomial_model(4) == 0.0625
    assert binomial_model(8) == 0.00390625
    assert binomial_model(12) == pytest.approx(0.000244140625, abs=0)


@given(st.integers(0, 40))
def test_binomial_model_closed_form(n):
    assert binomial_model(n) == 2.0**-n


def test_exact_success_all_ones_profile():
    db = make_db([(1, 1, 1)], dedup=True)
    for n in range(4):
        assert exact_success_probability(db, "chem_000", n) == 1.0


def test_exact_success_single_toggle_enumeration():
    # k = 40 ones out of S = 79: enumerate all 79 single-toggle outcomes
    flags = tuple(1 if i < 40 else 0 for i in range(79))
    db = make_db([flags], dedup=True)
    hits = 0
    for i in range(79):
        v = VictimRecord("chem_000", db.records[0].profile.toggled([i]), (i,), 0.0)
        hits += lookup_hit(db, v)
    assert hits == 40
    assert exact_success_probability(db, "chem_000", 1) == pytest.approx(40 / 79)


def test_exact_success_monte_carlo_3_sigma():
    db = generate_synthetic_database(1, 79, 0.5, seed=55)
    name = db.records[0].name
    p = exact_success_probability(db, name, 4)
    trials = 20_000
    vs = simulate_victims(db, PerturbationSpec.fixed_count(4, trials, seed=19))
    rate = np.mean(lookup_hits(db, vs))
    se = math.sqrt(p * (1 - p) / trials)
    assert abs(rate - p) < 3 * se


def test_exact_success_bad_n(small_db):
    with pytest.raises(ValueError):
        exact_success_probability(small_db, small_db.records[0].name, 9)


def test_aggregate_fixed_count_near_binomial_model():
    db = generate_synthetic_database(150, 40, 0.5, seed=61)
    vs = simulate_victims(db, PerturbationSpec.fixed_count(3, 60, seed=23))
    rate = np.mean(lookup_hits(db, vs))
    assert abs(rate - binomial_model(3)) < 0.02
