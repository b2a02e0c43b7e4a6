"""Chemical x signs/symptoms binary matrix: loading, validation, dedup, synthetic generation."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from typing import BinaryIO, Iterable

import numpy as np

DEFAULT_N_CHEMICALS = 311
DEFAULT_N_SYMPTOMS = 79
DEFAULT_DENSITY = 0.5


class DatabaseFormatError(ValueError):
    """Malformed database content; row/col coordinates are 1-based CSV positions."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {col}" if col is not None else "") + ")"
        super().__init__(message + loc)
        self.row = row
        self.col = col


class GenerationError(RuntimeError):
    """Synthetic generation could not satisfy its distinctness contract."""


@dataclass(frozen=True)
class SymptomProfile:
    """Fixed-width vector of presence/absence flags, one per sign/symptom."""

    flags: tuple[int, ...]

    def __post_init__(self):
        if any(f not in (0, 1) for f in self.flags):
            raise ValueError("profile flags must be 0 or 1")
        # integer mask with bit j set iff symptom j is present; used by subset queries
        mask = 0
        for j, f in enumerate(self.flags):
            if f:
                mask |= 1 << j
        object.__setattr__(self, "_mask", mask)

    def __len__(self) -> int:
        return len(self.flags)

    @property
    def mask(self) -> int:
        return self._mask  # type: ignore[attr-defined]

    @property
    def popcount(self) -> int:
        return self.mask.bit_count()

    def toggled(self, indices: Iterable[int]) -> "SymptomProfile":
        """New profile with the given symptom bits flipped."""
        flags = list(self.flags)
        for i in indices:
            flags[i] ^= 1
        return SymptomProfile(tuple(flags))

    def to_bits(self) -> str:
        return "".join(str(f) for f in self.flags)

    @classmethod
    def from_bits(cls, bits: str) -> "SymptomProfile":
        if any(c not in "01" for c in bits):
            raise ValueError("bit string must contain only '0'/'1'")
        return cls(tuple(int(c) for c in bits))

    def as_array(self) -> np.ndarray:
        return np.array(self.flags, dtype=np.uint8)


@dataclass(frozen=True)
class ChemicalRecord:
    name: str
    profile: SymptomProfile

    def __post_init__(self):
        if not self.name:
            raise ValueError("chemical name must be non-empty")


@dataclass(frozen=True)
class ChemicalDatabase:
    """Immutable symptom-name list plus chemical records; safe to share across threads."""

    symptom_names: tuple[str, ...]
    records: tuple[ChemicalRecord, ...]
    dedup_applied: bool = False

    def __post_init__(self):
        if len(set(self.symptom_names)) != len(self.symptom_names):
            raise ValueError("duplicate symptom names")
        if any(not s for s in self.symptom_names):
            raise ValueError("symptom names must be non-empty")
        s = len(self.symptom_names)
        for rec in self.records:
            if len(rec.profile) != s:
                raise ValueError(
                    f"profile length {len(rec.profile)} for {rec.name!r} != symptom count {s}"
                )
        names = [r.name for r in self.records]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate chemical names: {dupes}")
        if self.dedup_applied:
            masks = [r.profile.mask for r in self.records]
            if len(set(masks)) != len(masks):
                raise ValueError("dedup_applied is set but profiles are not distinct")
        object.__setattr__(self, "_name_index", {n: i for i, n in enumerate(names)})

    @property
    def n_symptoms(self) -> int:
        return len(self.symptom_names)

    def __len__(self) -> int:
        return len(self.records)

    def index_of(self, name: str) -> int:
        try:
            return self._name_index[name]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown chemical: {name!r}") from None

    def record(self, name: str) -> ChemicalRecord:
        return self.records[self.index_of(name)]

    def profile_matrix(self) -> np.ndarray:
        """Records as a (n_chemicals, n_symptoms) uint8 matrix, row order preserved."""
        return np.array([r.profile.flags for r in self.records], dtype=np.uint8)


@dataclass(frozen=True)
class DedupReport:
    """Clusters of chemicals merged because their profiles were identical."""

    clusters: tuple[tuple[str, tuple[str, ...]], ...]  # (representative, merged-away names)
    unique_count: int

    def to_json_dict(self) -> dict:
        return {
            "unique_count": self.unique_count,
            "clusters": [
                {"representative": rep, "merged": list(merged)} for rep, merged in self.clusters
            ],
        }


def load_database(source: BinaryIO | bytes) -> ChemicalDatabase:
    """Parse the CSV layout: header = empty cell + symptom labels, rows = name + 0/1 cells.

    Raises DatabaseFormatError with 1-based row/column coordinates on any
    malformed content. Row and column order are preserved.
    """
    data = source if isinstance(source, bytes) else source.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DatabaseFormatError(f"not valid UTF-8: {e}") from e
    try:
        rows = list(csv.reader(io.StringIO(text, newline="")))
    except csv.Error as e:
        raise DatabaseFormatError(f"malformed CSV: {e}") from e
    if not rows:
        raise DatabaseFormatError("empty file", row=1)

    header = rows[0]
    if len(header) < 2:
        raise DatabaseFormatError("header has no symptom columns", row=1)
    if header[0] != "":
        raise DatabaseFormatError("header must start with an empty field", row=1, col=1)
    symptom_names = header[1:]
    for j, name in enumerate(symptom_names):
        if not name:
            raise DatabaseFormatError("empty symptom label", row=1, col=j + 2)
    seen: dict[str, int] = {}
    for j, name in enumerate(symptom_names):
        if name in seen:
            raise DatabaseFormatError(f"duplicate symptom label {name!r}", row=1, col=j + 2)
        seen[name] = j

    s = len(symptom_names)
    records = []
    names_seen: set[str] = set()
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != s + 1:
            raise DatabaseFormatError(
                f"expected {s + 1} fields, found {len(row)}", row=i
            )
        name = row[0]
        if not name:
            raise DatabaseFormatError("empty chemical name", row=i, col=1)
        if name in names_seen:
            raise DatabaseFormatError(f"duplicate chemical name {name!r}", row=i, col=1)
        names_seen.add(name)
        flags = []
        for j, cell in enumerate(row[1:]):
            if cell not in ("0", "1"):
                raise DatabaseFormatError(
                    f"cell must be '0' or '1', found {cell!r}", row=i, col=j + 2
                )
            flags.append(int(cell))
        records.append(ChemicalRecord(name, SymptomProfile(tuple(flags))))

    return ChemicalDatabase(tuple(symptom_names), tuple(records), dedup_applied=False)


def save_database(db: ChemicalDatabase, sink: BinaryIO) -> None:
    """Write the CSV layout; load_database(save_database(db)) reproduces db exactly."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([""] + list(db.symptom_names))
    for rec in db.records:
        writer.writerow([rec.name] + [str(f) for f in rec.profile.flags])
    sink.write(buf.getvalue().encode("utf-8"))


def database_to_bytes(db: ChemicalDatabase) -> bytes:
    sink = io.BytesIO()
    save_database(db, sink)
    return sink.getvalue()


def content_hash(db: ChemicalDatabase) -> str:
    """Stable hex digest of the database's canonical CSV form."""
    return hashlib.sha256(database_to_bytes(db)).hexdigest()[:16]


def deduplicate(db: ChemicalDatabase) -> tuple[ChemicalDatabase, DedupReport]:
    """Collapse records with identical profiles to the first occurrence in input order.

    Idempotent: on an already-deduplicated database every cluster is a
    singleton and the records come back unchanged.
    """
    by_mask: dict[int, int] = {}
    clusters: list[tuple[str, list[str]]] = []
    kept: list[ChemicalRecord] = []
    for rec in db.records:
        key = rec.profile.mask
        if key in by_mask:
            clusters[by_mask[key]][1].append(rec.name)
        else:
            by_mask[key] = len(clusters)
            clusters.append((rec.name, []))
            kept.append(rec)
    report = DedupReport(
        clusters=tuple((rep, tuple(merged)) for rep, merged in clusters),
        unique_count=len(kept),
    )
    out = ChemicalDatabase(db.symptom_names, tuple(kept), dedup_applied=True)
    return out, report


def generate_synthetic_database(
    n_chemicals: int,
    n_symptoms: int,
    density: float,
    seed: int,
    max_attempts: int | None = None,
) -> ChemicalDatabase:
    """Random deduplicated database with i.i.d. Bernoulli(density) bits per profile.

    Profiles are drawn until n_chemicals pairwise-distinct ones are accumulated;
    reproducible under a fixed seed.
    """
    if n_chemicals < 1 or n_symptoms < 1:
        raise ValueError("n_chemicals and n_symptoms must be positive")
    if not 0.0 < density < 1.0:
        raise ValueError("density must lie strictly between 0 and 1")
    if n_chemicals > 2**n_symptoms:
        raise ValueError(
            f"{n_chemicals} distinct profiles impossible with {n_symptoms} symptoms"
        )
    budget = max_attempts if max_attempts is not None else max(10_000, 200 * n_chemicals)
    rng = np.random.default_rng(seed)
    seen: set[bytes] = set()
    profiles: list[SymptomProfile] = []
    attempts = 0
    while len(profiles) < n_chemicals:
        if attempts >= budget:
            raise GenerationError(
                f"no distinct profile found after {attempts} draws "
                f"({len(profiles)}/{n_chemicals} generated)"
            )
        attempts += 1
        bits = (rng.random(n_symptoms) < density).astype(np.uint8)
        key = bits.tobytes()
        if key in seen:
            continue
        seen.add(key)
        profiles.append(SymptomProfile(tuple(int(b) for b in bits)))

    name_w = max(3, len(str(n_chemicals - 1)))
    ssx_w = max(2, len(str(n_symptoms - 1)))
    return ChemicalDatabase(
        symptom_names=tuple(f"ssx_{j:0{ssx_w}d}" for j in range(n_symptoms)),
        records=tuple(
            ChemicalRecord(f"chem_{i:0{name_w}d}", p) for i, p in enumerate(profiles)
        ),
        dedup_applied=True,
    )
