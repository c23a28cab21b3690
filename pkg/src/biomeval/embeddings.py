"""Embeddings, the extractor boundary, template enrollment and similarity scoring.

Feature extraction networks stay outside the engine. Three boundaries are
provided: a CSV reader for precomputed vectors, a deterministic built-in
``DownsampleFlattenExtractor`` (block means, useful for self-contained tests),
and ``ExternalProcessExtractor`` speaking a one-line-per-sample protocol with
a child process.

A template is the plain arithmetic mean of its enrollment embeddings; vectors
are deliberately not re-normalized before averaging. Scoring is cosine
similarity (higher is more similar), with negated Euclidean distance available
for experimentation only.
"""

from __future__ import annotations

import csv
import math
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import EmbeddingError, FormatError
from .protocol import ModelSpec, Protocol, comparison_pairs
from .scores import ScoreRecord


def _as_vector(values, context: str) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 2:
        raise EmbeddingError(f"{context}: expected a vector of dimension >= 2, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise EmbeddingError(f"{context}: vector contains NaN or Inf")
    return vec


@dataclass(eq=False)
class Embedding:
    sample_id: str
    subject_id: str
    vector: np.ndarray

    def __post_init__(self):
        self.vector = _as_vector(self.vector, f"embedding '{self.sample_id}'")


@dataclass(eq=False)
class Template:
    model_id: str
    subject_id: str
    vector: np.ndarray
    n_enrolled: int

    def __post_init__(self):
        self.vector = _as_vector(self.vector, f"template '{self.model_id}'")
        if self.n_enrolled < 1:
            raise EmbeddingError(f"template '{self.model_id}': n_enrolled must be positive")


class DownsampleFlattenExtractor:
    """Built-in extractor: mean of each block_size x block_size tile, flattened.

    A 112x112 input with block size 8 yields a 14*14*channels vector. Purely
    deterministic, so pipeline tests need no network.
    """

    def __init__(self, block_size: int = 8):
        if block_size < 1:
            raise EmbeddingError("block_size must be positive")
        self.block_size = block_size

    def vector_from_image(self, image: np.ndarray) -> np.ndarray:
        img = np.asarray(image, dtype=np.float64)
        if img.ndim == 2:
            img = img[:, :, None]
        if img.ndim != 3:
            raise EmbeddingError(f"expected a 2-D or 3-D pixel array, got shape {img.shape}")
        h, w, c = img.shape
        b = self.block_size
        if h % b or w % b:
            raise EmbeddingError(f"image {h}x{w} not divisible by block size {b}")
        blocks = img.reshape(h // b, b, w // b, b, c).mean(axis=(1, 3))
        return blocks.ravel()


class ExternalProcessExtractor:
    """Extractor boundary around a child process.

    The engine writes one ``EXTRACT <png-path>`` line per sample to the child's
    stdin; the child answers with one line of D space-separated reals. A child
    that exits nonzero (or closes its output early) is an extractor failure.
    """

    def __init__(self, argv: list[str], dim: int | None = None):
        self.argv = list(argv)
        self.dim = dim
        self._proc: subprocess.Popen | None = None

    def __enter__(self) -> "ExternalProcessExtractor":
        self._proc = subprocess.Popen(
            self.argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def close(self) -> None:
        if self._proc is None:
            return
        proc, self._proc = self._proc, None
        if proc.stdin:
            proc.stdin.close()
        code = proc.wait()
        if code != 0:
            raise EmbeddingError(f"external extractor exited with code {code}")

    def vector_from_path(self, png_path: str | Path) -> np.ndarray:
        if self._proc is None:
            raise EmbeddingError("external extractor is not running (use it as a context manager)")
        assert self._proc.stdin and self._proc.stdout
        self._proc.stdin.write(f"EXTRACT {png_path}\n")
        self._proc.stdin.flush()
        line = self._proc.stdout.readline()
        if not line:
            code = self._proc.poll()
            raise EmbeddingError(f"external extractor produced no reply (exit code {code})")
        try:
            vec = _as_vector([float(v) for v in line.split()], "external extractor reply")
        except ValueError as exc:
            raise EmbeddingError(f"external extractor reply is not numeric: {line!r}") from exc
        if self.dim is not None and vec.size != self.dim:
            raise EmbeddingError(
                f"external extractor returned dimension {vec.size}, expected {self.dim}"
            )
        return vec

    def vector_from_image(self, image: np.ndarray) -> np.ndarray:
        from .alignment import write_image

        with tempfile.TemporaryDirectory(prefix="biomeval-extract-") as tmp:
            path = Path(tmp) / "sample.png"
            write_image(image, path)
            return self.vector_from_path(path)


def extract(image: np.ndarray, extractor, sample_id: str = "", subject_id: str = "") -> Embedding:
    """Run one aligned image through an extractor boundary."""
    return Embedding(sample_id=sample_id, subject_id=subject_id, vector=extractor.vector_from_image(image))


def enroll(model: ModelSpec, embeddings: Iterable[Embedding]) -> Template:
    """Average the enrollment embeddings of one model into a template.

    The provided embeddings must cover model.enroll_sample_ids exactly.
    Averaging order is fixed by sample_id, so enrollment is invariant to the
    order embeddings are passed in.
    """
    pool = list(embeddings)
    got = {e.sample_id for e in pool}
    want = set(model.enroll_sample_ids)
    if len(got) != len(pool):
        raise EmbeddingError(f"model '{model.model_id}': duplicate enrollment embeddings")
    missing = want - got
    if missing:
        raise EmbeddingError(
            f"model '{model.model_id}': missing enrollment embedding '{sorted(missing)[0]}'"
        )
    extra = got - want
    if extra:
        raise EmbeddingError(
            f"model '{model.model_id}': unexpected enrollment embedding '{sorted(extra)[0]}'"
        )
    pool.sort(key=lambda e: e.sample_id)
    dims = {e.vector.size for e in pool}
    if len(dims) > 1:
        raise EmbeddingError(f"model '{model.model_id}': mixed embedding dimensions {sorted(dims)}")
    vector = np.mean(np.stack([e.vector for e in pool]), axis=0)
    if not np.any(vector):
        raise EmbeddingError(f"model '{model.model_id}': enrollment average is the zero vector")
    return Template(
        model_id=model.model_id,
        subject_id=model.subject_id,
        vector=vector,
        n_enrolled=len(pool),
    )


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1].

    Computed as dot(u, v) / sqrt(dot(u, u) * dot(v, v)); this form returns
    exactly 1.0 for bit-identical inputs.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise EmbeddingError(f"dimension mismatch: {u.shape} vs {v.shape}")
    uu = float(np.dot(u, u))
    vv = float(np.dot(v, v))
    if uu == 0.0 or vv == 0.0:
        raise EmbeddingError("cosine similarity of a zero vector is undefined")
    score = float(np.dot(u, v)) / math.sqrt(uu * vv)
    return min(1.0, max(-1.0, score))


def negated_euclidean(u: np.ndarray, v: np.ndarray) -> float:
    """Experimental alternative similarity; not used by any acceptance path."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise EmbeddingError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return -float(np.linalg.norm(u - v))


def cosine_score(template: Template, probe: Embedding) -> float:
    return cosine_similarity(template.vector, probe.vector)


_SIMILARITIES = {"cosine": cosine_similarity, "neg_euclidean": negated_euclidean}


def score_pairs(
    protocol: Protocol,
    pairs,
    templates: dict[str, Template] | Iterable[Template],
    probe_embeddings: dict[str, Embedding] | Iterable[Embedding],
    similarity: str = "cosine",
) -> list[ScoreRecord]:
    """Score an explicit pair list (the unit of work for parallel scoring)."""
    try:
        measure = _SIMILARITIES[similarity]
    except KeyError:
        raise EmbeddingError(f"unknown similarity '{similarity}'") from None
    if not isinstance(templates, dict):
        templates = {t.model_id: t for t in templates}
    if not isinstance(probe_embeddings, dict):
        probe_embeddings = {e.sample_id: e for e in probe_embeddings}
    samples = protocol.sample_by_id()

    records = []
    for pair in pairs:
        template = templates.get(pair.model_id)
        if template is None:
            raise EmbeddingError(f"no template for model '{pair.model_id}'")
        embedding = probe_embeddings.get(pair.probe_sample_id)
        if embedding is None:
            raise EmbeddingError(f"no embedding for probe sample '{pair.probe_sample_id}'")
        sample = samples[pair.probe_sample_id]
        if embedding.subject_id != sample.subject_id:
            raise EmbeddingError(
                f"embedding '{embedding.sample_id}' subject '{embedding.subject_id}' "
                f"does not match protocol subject '{sample.subject_id}'"
            )
        records.append(
            ScoreRecord(
                model_id=pair.model_id,
                probe_sample_id=pair.probe_sample_id,
                probe_subject_id=sample.subject_id,
                reference_subject_id=template.subject_id,
                sub_protocol=pair.sub_protocol,
                group=sample.group,
                score=measure(template.vector, embedding.vector),
                is_genuine=pair.is_genuine,
            )
        )
    return records


def score_protocol(
    protocol: Protocol,
    templates: dict[str, Template] | Iterable[Template],
    probe_embeddings: dict[str, Embedding] | Iterable[Embedding],
    group: str = "all",
    similarity: str = "cosine",
) -> list[ScoreRecord]:
    """Score every comparison pair of one group, in comparison_pairs order."""
    pairs = comparison_pairs(protocol, group)
    return score_pairs(protocol, pairs, templates, probe_embeddings, similarity)


def enroll_all(protocol: Protocol, embeddings: dict[str, Embedding]) -> dict[str, Template]:
    """Enroll every model of a protocol from an embedding pool keyed by sample_id."""
    out: dict[str, Template] = {}
    for model in sorted(protocol.models, key=lambda m: m.model_id):
        pool = []
        for sid in model.enroll_sample_ids:
            emb = embeddings.get(sid)
            if emb is None:
                raise EmbeddingError(f"no embedding for enroll sample '{sid}'")
            pool.append(emb)
        out[model.model_id] = enroll(model, pool)
    return out


EMBEDDING_HEADER_PREFIX = ["sample_id", "subject_id"]


def save_embedding_file(embeddings: Iterable[Embedding], path: str | Path) -> None:
    """Write the embedding CSV: header sample_id,subject_id,v0..v{D-1}."""
    pool = list(embeddings)
    if not pool:
        raise EmbeddingError("no embeddings to save")
    dim = pool[0].vector.size
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EMBEDDING_HEADER_PREFIX + [f"v{i}" for i in range(dim)])
        for e in pool:
            if e.vector.size != dim:
                raise EmbeddingError(
                    f"embedding '{e.sample_id}' has dimension {e.vector.size}, expected {dim}"
                )
            writer.writerow([e.sample_id, e.subject_id] + [repr(float(v)) for v in e.vector])


def load_embedding_file(path: str | Path) -> dict[str, Embedding]:
    """Read an embedding CSV into a dict keyed by sample_id (the file-reader boundary)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != EMBEDDING_HEADER_PREFIX:
            raise FormatError(f"'{path}' is not an embedding CSV (bad header)")
        dim = len(header) - 2
        if dim < 2 or header[2:] != [f"v{i}" for i in range(dim)]:
            raise FormatError(f"'{path}' has a malformed embedding header")
        out: dict[str, Embedding] = {}
        for lineno, row in enumerate(reader, 2):
            if len(row) != dim + 2:
                raise FormatError(f"{path}:{lineno}: expected {dim + 2} fields, got {len(row)}")
            try:
                vector = [float(v) for v in row[2:]]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric vector component") from exc
            if row[0] in out:
                raise FormatError(f"{path}:{lineno}: duplicate sample_id '{row[0]}'")
            out[row[0]] = Embedding(sample_id=row[0], subject_id=row[1], vector=vector)
    if not out:
        raise FormatError(f"'{path}' contains no embeddings")
    return out


TEMPLATE_HEADER_PREFIX = ["model_id", "subject_id", "n_enrolled"]


def save_template_file(templates: Iterable[Template], path: str | Path) -> None:
    pool = list(templates)
    if not pool:
        raise EmbeddingError("no templates to save")
    dim = pool[0].vector.size
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TEMPLATE_HEADER_PREFIX + [f"v{i}" for i in range(dim)])
        for t in pool:
            if t.vector.size != dim:
                raise EmbeddingError(
                    f"template '{t.model_id}' has dimension {t.vector.size}, expected {dim}"
                )
            writer.writerow(
                [t.model_id, t.subject_id, t.n_enrolled] + [repr(float(v)) for v in t.vector]
            )


def load_template_file(path: str | Path) -> dict[str, Template]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != TEMPLATE_HEADER_PREFIX:
            raise FormatError(f"'{path}' is not a template CSV (bad header)")
        dim = len(header) - 3
        out: dict[str, Template] = {}
        for lineno, row in enumerate(reader, 2):
            if len(row) != dim + 3:
                raise FormatError(f"{path}:{lineno}: expected {dim + 3} fields, got {len(row)}")
            try:
                template = Template(
                    model_id=row[0],
                    subject_id=row[1],
                    n_enrolled=int(row[2]),
                    vector=[float(v) for v in row[3:]],
                )
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: malformed template row") from exc
            if row[0] in out:
                raise FormatError(f"{path}:{lineno}: duplicate model_id '{row[0]}'")
            out[row[0]] = template
    if not out:
        raise FormatError(f"'{path}' contains no templates")
    return out
