"""Reproducible synthetic identities, protocols and score sets.

Each subject is a point on the unit hypersphere; samples are the subject mean
plus Gaussian noise, re-normalized. Under cosine scoring this cluster model
has predictable behaviour (zero noise means genuine scores of exactly 1.0;
separation degrades monotonically with noise), which is what makes it usable
as ground truth for acceptance tests.

All randomness flows through numpy's PCG64 generator seeded from the config,
so identical configs produce byte-identical artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BiomevalError
from .embeddings import Embedding
from .protocol import KINDS, ModelSpec, Protocol, SampleRecord
from .scores import ScoreRecord, ScoreSet


@dataclass
class SubProtocolNoise:
    """A probe label, optionally with extra cluster noise for that slice."""

    label: str
    extra_sigma: float = 0.0


@dataclass
class SynthConfig:
    seed: int
    n_subjects: int
    samples_per_subject: int
    enroll_per_subject: int
    dim: int
    noise_sigma: float
    n_unknown_subjects: int = 0
    kind: str | None = None  # derived from n_unknown_subjects when omitted
    sub_protocol_labels: list[SubProtocolNoise] = field(
        default_factory=lambda: [SubProtocolNoise("all")]
    )
    name: str = "synthetic"
    fmr_target: float = 0.001

    def __post_init__(self):
        if self.kind is None:
            self.kind = "open_set" if self.n_unknown_subjects > 0 else "verification_split"

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise BiomevalError(f"unknown protocol kind '{self.kind}'")
        if self.dim < 2:
            raise BiomevalError("dim must be at least 2")
        if self.noise_sigma < 0:
            raise BiomevalError("noise_sigma must be non-negative")
        if self.enroll_per_subject < 1:
            raise BiomevalError("enroll_per_subject must be positive")
        if self.enroll_per_subject >= self.samples_per_subject:
            raise BiomevalError("enroll_per_subject must be below samples_per_subject")
        if self.n_subjects < 2:
            raise BiomevalError("need at least 2 subjects")
        if not self.sub_protocol_labels:
            raise BiomevalError("need at least one sub-protocol label")
        if len({l.label for l in self.sub_protocol_labels}) != len(self.sub_protocol_labels):
            raise BiomevalError("duplicate sub-protocol labels")
        if any(l.extra_sigma < 0 for l in self.sub_protocol_labels):
            raise BiomevalError("extra_sigma must be non-negative")
        if self.kind == "open_set":
            if self.n_unknown_subjects < 1:
                raise BiomevalError("open_set generation needs unknown subjects")
        elif self.n_unknown_subjects:
            raise BiomevalError(f"unknown subjects are only valid for open_set, not {self.kind}")


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise BiomevalError("degenerate zero draw")  # probability zero for dim >= 2
    return vector / norm


def generate(config: SynthConfig) -> tuple[Protocol, list[Embedding]]:
    """Generate a protocol plus one embedding per sample (no landmarks needed).

    Known subjects get enroll + probe samples; in verification_split protocols
    they are split into identity-disjoint dev/eval halves. Unknown subjects
    (open_set only) contribute probes exclusively. Probe labels rotate through
    the configured sub-protocols, each adding its extra noise.
    """
    config.validate()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    labels = config.sub_protocol_labels

    known = [f"S{i:04d}" for i in range(config.n_subjects)]
    unknown = [f"U{i:04d}" for i in range(config.n_unknown_subjects)]
    dev_half = set(known[: config.n_subjects // 2])

    def subject_group(subject: str) -> str:
        if config.kind != "verification_split":
            return "none"
        return "dev" if subject in dev_half else "eval"

    samples: list[SampleRecord] = []
    models: list[ModelSpec] = []
    embeddings: list[Embedding] = []

    def emit_subject(subject: str, enroll_count: int) -> list[str]:
        mean = _unit(rng.standard_normal(config.dim))
        enroll_ids = []
        for k in range(config.samples_per_subject):
            is_enroll = k < enroll_count
            if is_enroll:
                label, sigma = "", config.noise_sigma
            else:
                spec = labels[(k - enroll_count) % len(labels)]
                label, sigma = spec.label, config.noise_sigma + spec.extra_sigma
            noise = rng.standard_normal(config.dim)
            vector = _unit(mean + sigma * noise)
            sample_id = f"{subject}-{k:02d}"
            samples.append(
                SampleRecord(
                    sample_id=sample_id,
                    subject_id=subject,
                    path=f"images/{sample_id}.png",
                    role="enroll" if is_enroll else "probe",
                    group=subject_group(subject),
                    sub_protocol=label,
                )
            )
            embeddings.append(Embedding(sample_id=sample_id, subject_id=subject, vector=vector))
            if is_enroll:
                enroll_ids.append(sample_id)
        return enroll_ids

    for subject in known:
        enroll_ids = emit_subject(subject, config.enroll_per_subject)
        models.append(
            ModelSpec(model_id=f"m-{subject}", subject_id=subject, enroll_sample_ids=enroll_ids)
        )
    for subject in unknown:
        emit_subject(subject, 0)

    protocol = Protocol(
        name=config.name,
        kind=config.kind,
        samples=samples,
        models=models,
        sub_protocols=sorted(l.label for l in labels),
        unknown_subjects=set(unknown),
        fmr_target=config.fmr_target,
    )
    protocol.validate()
    return protocol, embeddings


@dataclass
class LabelShift:
    """Additive score offsets for one sub-protocol slice of a synthetic score set."""

    label: str
    genuine_shift: float = 0.0
    impostor_shift: float = 0.0


@dataclass
class ScoreSynthConfig:
    """Parametric genuine/impostor distributions for direct score generation."""

    seed: int
    n_genuine: int
    n_impostor: int
    genuine_mean: float
    genuine_std: float
    impostor_mean: float
    impostor_std: float
    labels: list[LabelShift] = field(default_factory=lambda: [LabelShift("all")])
    groups: tuple[str, ...] = ("dev", "eval")

    def validate(self) -> None:
        if self.n_genuine < 1 or self.n_impostor < 1:
            raise BiomevalError("need at least one genuine and one impostor score")
        if self.genuine_std < 0 or self.impostor_std < 0:
            raise BiomevalError("standard deviations must be non-negative")
        if not self.groups or any(g not in ("dev", "eval", "none") for g in self.groups):
            raise BiomevalError(f"invalid groups {self.groups}")
        if not self.labels:
            raise BiomevalError("need at least one label")


def generate_scores(config: ScoreSynthConfig) -> ScoreSet:
    """Draw ScoreRecords straight from two seeded normal distributions.

    Counts are per group and per label. This bypasses embeddings entirely and
    exists for metric-level tests and constructed methodology fixtures.
    """
    config.validate()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    records: list[ScoreRecord] = []
    for group in config.groups:
        for shift in config.labels:
            genuine = (
                config.genuine_mean
                + shift.genuine_shift
                + config.genuine_std * rng.standard_normal(config.n_genuine)
            )
            impostor = (
                config.impostor_mean
                + shift.impostor_shift
                + config.impostor_std * rng.standard_normal(config.n_impostor)
            )
            prefix = f"{group}-{shift.label}"
            records += [
                ScoreRecord(
                    model_id=f"{prefix}-mg{i}",
                    probe_sample_id=f"{prefix}-pg{i}",
                    probe_subject_id=f"{prefix}-s{i}",
                    reference_subject_id=f"{prefix}-s{i}",
                    sub_protocol=shift.label,
                    group=group,
                    score=float(s),
                    is_genuine=True,
                )
                for i, s in enumerate(genuine)
            ]
            records += [
                ScoreRecord(
                    model_id=f"{prefix}-mi{i}",
                    probe_sample_id=f"{prefix}-pi{i}",
                    probe_subject_id=f"{prefix}-other{i}",
                    reference_subject_id=f"{prefix}-ref{i}",
                    sub_protocol=shift.label,
                    group=group,
                    score=float(s),
                    is_genuine=False,
                )
                for i, s in enumerate(impostor)
            ]
    return ScoreSet(records)
