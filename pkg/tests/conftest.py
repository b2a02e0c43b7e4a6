import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chemtriage.database import (
    ChemicalDatabase,
    ChemicalRecord,
    SymptomProfile,
    generate_synthetic_database,
)

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def make_db(profiles, dedup=False, n_symptoms=None):
    """Database from raw bit tuples; names chem_000, chem_001, ..."""
    s = n_symptoms if n_symptoms is not None else len(profiles[0])
    return ChemicalDatabase(
        symptom_names=tuple(f"ssx_{j:02d}" for j in range(s)),
        records=tuple(
            ChemicalRecord(f"chem_{i:03d}", SymptomProfile(tuple(p)))
            for i, p in enumerate(profiles)
        ),
        dedup_applied=dedup,
    )


@pytest.fixture(scope="session")
def small_db():
    """16 distinct 8-bit profiles, deduplicated."""
    return generate_synthetic_database(16, 8, 0.5, seed=11)


@pytest.fixture(scope="session")
def medium_db():
    """64 distinct 20-bit profiles; big enough for meaningful trees/nets."""
    return generate_synthetic_database(64, 20, 0.5, seed=12)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0)
