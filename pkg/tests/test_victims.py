import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemtriage.database import generate_synthetic_database
from chemtriage.victims import (
    PerturbationSpec,
    VictimRecord,
    load_victims,
    perturbation_density,
    save_victims,
    simulate_victims,
    toggle_counts,
)
from conftest import make_db


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec.bernoulli(1.5)
    with pytest.raises(ValueError):
        PerturbationSpec.fixed_count(-1)
    with pytest.raises(ValueError):
        PerturbationSpec("weird")
    assert PerturbationSpec.fixed_count(4, seed=1).nominal_rate(79) == 4 / 79


def test_victim_record_validation():
    from chemtriage.database import SymptomProfile

    with pytest.raises(ValueError):
        VictimRecord("x", SymptomProfile((0, 1)), (0, 0), 0.1)
    with pytest.raises(ValueError):
        VictimRecord("x", SymptomProfile((0, 1)), (5,), 0.1)


def test_requires_deduplicated_db():
    db = make_db([(0, 1), (1, 0)], dedup=False)
    with pytest.raises(ValueError):
        simulate_victims(db, PerturbationSpec.bernoulli(0.1))


def test_record_count_and_order(small_db):
    spec = PerturbationSpec.fixed_count(1, replicas_per_chemical=3, seed=4)
    vs = simulate_victims(small_db, spec)
    assert len(vs) == len(small_db) * 3
    expected = [r.name for r in small_db.records for _ in range(3)]
    assert [v.true_chemical for v in vs] == expected


def test_paper_scale_victim_count():
    db = generate_synthetic_database(311, 79, 0.5, seed=2)
    spec = PerturbationSpec.bernoulli(0.05, replicas_per_chemical=100, seed=1)
    vs = simulate_victims(db, spec)
    assert len(vs) == 31_100
    # binomial mean p*S = 3.95; tolerance ~4.5 standard errors of the mean
    mean_toggles = toggle_counts(vs).mean()
    assert abs(mean_toggles - 3.95) < 0.05


def test_rate_zero_is_identity(small_db):
    vs = simulate_victims(small_db, PerturbationSpec.bernoulli(0.0, 2, seed=9))
    for v in vs:
        assert v.toggled_indices == ()
        assert v.observed == small_db.record(v.true_chemical).profile


def test_fixed_count_exceeding_symptoms_rejected(small_db):
    with pytest.raises(ValueError):
        simulate_victims(small_db, PerturbationSpec.fixed_count(9, 1, seed=0))


@given(st.integers(0, 8), st.integers(0, 2**31 - 1))
@settings(max_examples=25)
def test_fixed_count_toggles_exactly_n(n, seed):
    db = generate_synthetic_database(6, 8, 0.5, seed=13)
    vs = simulate_victims(db, PerturbationSpec.fixed_count(n, 2, seed=seed))
    for v in vs:
        assert len(v.toggled_indices) == n


@given(st.integers(0, 2**31 - 1), st.booleans())
@settings(max_examples=20)
def test_observed_differs_exactly_at_toggles(seed, bernoulli):
    db = generate_synthetic_database(8, 10, 0.5, seed=21)
    spec = (
        PerturbationSpec.bernoulli(0.3, 2, seed=seed)
        if bernoulli
        else PerturbationSpec.fixed_count(3, 2, seed=seed)
    )
    for v in simulate_victims(db, spec):
        true = db.record(v.true_chemical).profile
        diff = {i for i in range(len(true)) if true.flags[i] != v.observed.flags[i]}
        assert diff == set(v.toggled_indices)
        assert (true.mask ^ v.observed.mask).bit_count() == len(v.toggled_indices)


def test_same_seed_same_records(medium_db):
    spec = PerturbationSpec.bernoulli(0.15, 4, seed=123)
    assert simulate_victims(medium_db, spec) == simulate_victims(medium_db, spec)
    other = PerturbationSpec.bernoulli(0.15, 4, seed=124)
    assert simulate_victims(medium_db, spec) != simulate_victims(medium_db, other)


def test_bernoulli_aggregate_rate_within_4_sigma():
    db = generate_synthetic_database(100, 30, 0.5, seed=31)
    p = 0.10
    vs = simulate_victims(db, PerturbationSpec.bernoulli(p, 50, seed=8))
    total_bits = len(vs) * 30
    se = np.sqrt(p * (1 - p) / total_bits)
    realized = toggle_counts(vs).sum() / total_bits
    assert abs(realized - p) < 4 * se


def test_perturbation_density_degenerate_peak(small_db):
    vs = simulate_victims(small_db, PerturbationSpec.fixed_count(4, 5, seed=3))
    kde = perturbation_density(vs)
    assert abs(kde.mode() - 4.0) < 0.01
    assert abs(kde.integral() - 1.0) < 1e-3


def test_perturbation_density_bernoulli_mode():
    db = generate_synthetic_database(311, 79, 0.5, seed=17)
    vs = simulate_victims(db, PerturbationSpec.bernoulli(0.10, 20, seed=5))
    kde = perturbation_density(vs)
    assert 6.0 <= kde.mode() <= 10.0  # binomial(79, 0.10) mode is 7


def test_density_modes_ordered_across_rates():
    db = generate_synthetic_database(64, 79, 0.5, seed=18)
    modes = []
    for rate in (0.05, 0.10, 0.15):
        vs = simulate_victims(db, PerturbationSpec.bernoulli(rate, 30, seed=6))
        modes.append(perturbation_density(vs).mode())
    assert modes[0] < modes[1] < modes[2]


def test_perturbation_density_empty_rejected():
    with pytest.raises(ValueError):
        perturbation_density([])


def test_jsonl_roundtrip(small_db):
    vs = simulate_victims(small_db, PerturbationSpec.bernoulli(0.2, 3, seed=77))
    sink = io.BytesIO()
    save_victims(vs, sink)
    again = load_victims(sink.getvalue())
    assert again == vs
    line = sink.getvalue().decode().splitlines()[0]
    for key in ("true_chemical", "observed", "toggled_indices", "rate"):
        assert key in line
