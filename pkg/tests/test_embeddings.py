import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from biomeval import (
    DownsampleFlattenExtractor,
    Embedding,
    EmbeddingError,
    ExternalProcessExtractor,
    FormatError,
    ModelSpec,
    cosine_score,
    cosine_similarity,
    enroll,
    enroll_all,
    extract,
    load_embedding_file,
    load_template_file,
    negated_euclidean,
    save_embedding_file,
    save_template_file,
    score_protocol,
    write_image,
)
from biomeval.synth import SynthConfig, generate


def test_downsample_flatten_dimension(rng):
    img = rng.integers(0, 256, (112, 112, 3), dtype=np.uint8)
    vec = DownsampleFlattenExtractor(block_size=8).vector_from_image(img)
    assert vec.shape == (14 * 14 * 3,)
    gray = rng.integers(0, 256, (112, 112), dtype=np.uint8)
    assert DownsampleFlattenExtractor(8).vector_from_image(gray).shape == (14 * 14,)


def test_downsample_flatten_values_are_block_means():
    img = np.arange(16, dtype=np.float64).reshape(4, 4)
    vec = DownsampleFlattenExtractor(block_size=2).vector_from_image(img)
    manual = [
        img[0:2, 0:2].mean(),
        img[0:2, 2:4].mean(),
        img[2:4, 0:2].mean(),
        img[2:4, 2:4].mean(),
    ]
    assert vec.tolist() == manual


def test_downsample_flatten_rejects_indivisible_images(rng):
    img = rng.integers(0, 256, (100, 112), dtype=np.uint8)
    with pytest.raises(EmbeddingError, match="not divisible"):
        DownsampleFlattenExtractor(8).vector_from_image(img)


def test_extract_is_deterministic(rng):
    img = rng.integers(0, 256, (112, 112), dtype=np.uint8)
    extractor = DownsampleFlattenExtractor(8)
    a = extract(img, extractor, "s1", "subjA")
    b = extract(img.copy(), extractor, "s1", "subjA")
    assert a.sample_id == "s1" and a.subject_id == "subjA"
    assert np.array_equal(a.vector, b.vector)


ECHO_CHILD = """
import sys
for line in sys.stdin:
    if not line.startswith("EXTRACT "):
        sys.exit(2)
    print("0.5 -1.25 3.0 0.125")
    sys.stdout.flush()
"""

MEAN_CHILD = """
import sys
import numpy as np
from PIL import Image
for line in sys.stdin:
    path = line.strip().split(" ", 1)[1]
    arr = np.asarray(Image.open(path), dtype=float)
    print(float(arr.mean()), float(arr.max()))
    sys.stdout.flush()
"""

FAILING_CHILD = "import sys; sys.exit(3)\n"


def _child(tmp_path, code, name):
    path = tmp_path / name
    path.write_text(code, encoding="utf-8")
    return [sys.executable, str(path)]


def test_external_extractor_echoes_fixed_vector(tmp_path, rng):
    img = rng.integers(0, 256, (16, 16), dtype=np.uint8)
    with ExternalProcessExtractor(_child(tmp_path, ECHO_CHILD, "echo.py")) as extractor:
        emb = extract(img, extractor, "s0", "A")
        assert emb.vector.tolist() == [0.5, -1.25, 3.0, 0.125]
        # the reply is taken verbatim on every request
        assert extractor.vector_from_image(img).tolist() == [0.5, -1.25, 3.0, 0.125]


def test_external_extractor_reads_the_png_it_is_given(tmp_path):
    img = np.full((8, 8), 9, dtype=np.uint8)
    png = tmp_path / "x.png"
    write_image(img, png)
    with ExternalProcessExtractor(_child(tmp_path, MEAN_CHILD, "mean.py")) as extractor:
        assert extractor.vector_from_path(png).tolist() == [9.0, 9.0]


def test_external_extractor_failure_is_an_error(tmp_path, rng):
    img = rng.integers(0, 256, (8, 8), dtype=np.uint8)
    extractor = ExternalProcessExtractor(_child(tmp_path, FAILING_CHILD, "boom.py"))
    with pytest.raises(EmbeddingError, match="no reply|exited"):
        with extractor:
            extractor.vector_from_image(img)


def test_external_extractor_dimension_check(tmp_path, rng):
    img = rng.integers(0, 256, (8, 8), dtype=np.uint8)
    with pytest.raises(EmbeddingError, match="dimension 4, expected 7"):
        with ExternalProcessExtractor(_child(tmp_path, ECHO_CHILD, "echo.py"), dim=7) as ex:
            ex.vector_from_image(img)


def _embedding(sid, vec, subject="S"):
    return Embedding(sample_id=sid, subject_id=subject, vector=np.asarray(vec, dtype=float))


def test_enroll_single_embedding_is_exact():
    model = ModelSpec("m", "S", ["e0"])
    vec = np.array([0.3, -1.7, 2.2])
    template = enroll(model, [_embedding("e0", vec)])
    assert np.array_equal(template.vector, vec)
    assert template.n_enrolled == 1


def test_enroll_two_unit_vectors():
    model = ModelSpec("m", "S", ["e0", "e1"])
    template = enroll(model, [_embedding("e0", [1.0, 0.0]), _embedding("e1", [0.0, 1.0])])
    assert template.vector.tolist() == [0.5, 0.5]
    assert template.n_enrolled == 2


def test_enroll_matches_independent_summation(rng):
    vectors = rng.normal(size=(5, 12))
    model = ModelSpec("m", "S", [f"e{i}" for i in range(5)])
    template = enroll(model, [_embedding(f"e{i}", v) for i, v in enumerate(vectors)])
    oracle = [sum(float(vectors[i][k]) for i in range(5)) / 5.0 for k in range(12)]
    assert np.max(np.abs(template.vector - np.array(oracle))) < 1e-12


def test_enroll_is_permutation_invariant(rng):
    vectors = rng.normal(size=(4, 6))
    model = ModelSpec("m", "S", [f"e{i}" for i in range(4)])
    pool = [_embedding(f"e{i}", v) for i, v in enumerate(vectors)]
    forward = enroll(model, pool)
    backward = enroll(model, pool[::-1])
    assert np.array_equal(forward.vector, backward.vector)


def test_enroll_coverage_errors():
    model = ModelSpec("m", "S", ["e0", "e1"])
    with pytest.raises(EmbeddingError, match="missing enrollment embedding 'e1'"):
        enroll(model, [_embedding("e0", [1.0, 0.0])])
    with pytest.raises(EmbeddingError, match="unexpected enrollment embedding 'e2'"):
        enroll(model, [_embedding("e0", [1, 0]), _embedding("e1", [0, 1]), _embedding("e2", [1, 1])])
    with pytest.raises(EmbeddingError, match="zero vector"):
        enroll(model, [_embedding("e0", [1.0, -1.0]), _embedding("e1", [-1.0, 1.0])])
    with pytest.raises(EmbeddingError, match="mixed embedding dimensions"):
        enroll(model, [_embedding("e0", [1.0, 0.0]), _embedding("e1", [0.0, 1.0, 0.0])])


def test_embedding_rejects_nan():
    with pytest.raises(EmbeddingError, match="NaN or Inf"):
        _embedding("bad", [1.0, float("nan")])


def test_cosine_definition_cases():
    v = np.array([0.3, -0.4, 1.2])
    assert cosine_similarity(v, v.copy()) == 1.0
    assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0
    assert cosine_similarity(v, -v) == -1.0
    with pytest.raises(EmbeddingError, match="zero vector"):
        cosine_similarity(np.zeros(3), v)
    with pytest.raises(EmbeddingError, match="mismatch"):
        cosine_similarity(np.ones(3), np.ones(4))


def test_cosine_score_on_objects():
    from biomeval import Template

    t = Template(model_id="m", subject_id="S", vector=np.array([1.0, 1.0]), n_enrolled=1)
    e = _embedding("p", [2.0, 2.0])
    assert cosine_score(t, e) == 1.0


finite_vec = st.lists(
    st.floats(min_value=-100, max_value=100), min_size=3, max_size=3
).filter(lambda v: any(abs(x) > 1e-3 for x in v))


@given(finite_vec, finite_vec, st.floats(min_value=1e-3, max_value=1e3),
       st.floats(min_value=1e-3, max_value=1e3))
def test_cosine_scale_invariance_and_bounds(u, v, su, sv):
    u, v = np.array(u), np.array(v)
    base = cosine_similarity(u, v)
    scaled = cosine_similarity(su * u, sv * v)
    assert -1.0 <= base <= 1.0
    assert abs(base - scaled) < 1e-12


def test_negated_euclidean_is_zero_for_equal_vectors():
    v = np.array([1.0, 2.0])
    assert negated_euclidean(v, v) == 0.0
    assert negated_euclidean(v, np.array([1.0, 0.0])) == -2.0


def _protocol_embeddings(protocol, rng):
    return {
        s.sample_id: Embedding(
            sample_id=s.sample_id, subject_id=s.subject_id, vector=rng.normal(size=8)
        )
        for s in protocol.samples
    }


def test_score_protocol_enumeration_and_order(split_protocol, rng):
    embeddings = _protocol_embeddings(split_protocol, rng)
    templates = enroll_all(split_protocol, embeddings)
    records = score_protocol(split_protocol, templates, embeddings, "dev")
    assert len(records) == 8  # 2 dev models x 4 dev probes
    keys = [(r.model_id, r.probe_sample_id) for r in records]
    assert keys == sorted(keys)
    for r in records:
        assert r.is_genuine == (r.reference_subject_id == r.probe_subject_id)
        assert r.group == "dev"


def test_score_protocol_probe_rescaling_invariance(split_protocol, rng):
    embeddings = _protocol_embeddings(split_protocol, rng)
    templates = enroll_all(split_protocol, embeddings)
    base = score_protocol(split_protocol, templates, embeddings, "dev")
    scaled = {
        sid: Embedding(sample_id=sid, subject_id=e.subject_id, vector=3.7 * e.vector)
        for sid, e in embeddings.items()
    }
    rescored = score_protocol(split_protocol, templates, scaled, "dev")
    for a, b in zip(base, rescored):
        assert abs(a.score - b.score) < 1e-12


def test_score_protocol_missing_ids(split_protocol, rng):
    embeddings = _protocol_embeddings(split_protocol, rng)
    templates = enroll_all(split_protocol, embeddings)
    incomplete = dict(embeddings)
    del incomplete["A-p0"]
    with pytest.raises(EmbeddingError, match="no embedding for probe sample 'A-p0'"):
        score_protocol(split_protocol, templates, incomplete, "dev")
    some_templates = {k: v for k, v in templates.items() if k != "m-A"}
    with pytest.raises(EmbeddingError, match="no template for model 'm-A'"):
        score_protocol(split_protocol, some_templates, embeddings, "dev")


def test_score_protocol_subject_mismatch(split_protocol, rng):
    embeddings = _protocol_embeddings(split_protocol, rng)
    templates = enroll_all(split_protocol, embeddings)
    embeddings["A-p0"] = Embedding(sample_id="A-p0", subject_id="WRONG", vector=np.ones(8))
    with pytest.raises(EmbeddingError, match="does not match protocol subject"):
        score_protocol(split_protocol, templates, embeddings, "dev")


def test_genuine_scores_beat_impostor_scores_on_tight_clusters():
    protocol, embeddings = generate(
        SynthConfig(
            seed=17, n_subjects=20, samples_per_subject=6, enroll_per_subject=2,
            dim=16, noise_sigma=0.05,
        )
    )
    pool = {e.sample_id: e for e in embeddings}
    templates = enroll_all(protocol, pool)
    records = score_protocol(protocol, templates, pool, "dev")
    genuine = [r.score for r in records if r.is_genuine]
    impostor = [r.score for r in records if not r.is_genuine]
    assert np.mean(genuine) > np.mean(impostor)


def test_embedding_csv_roundtrip(tmp_path, rng):
    pool = [
        Embedding(sample_id=f"s{i}", subject_id=f"subj{i % 3}", vector=rng.normal(size=5))
        for i in range(7)
    ]
    path = tmp_path / "emb.csv"
    save_embedding_file(pool, path)
    loaded = load_embedding_file(path)
    assert list(loaded) == [e.sample_id for e in pool]
    for e in pool:
        assert np.array_equal(loaded[e.sample_id].vector, e.vector)
        assert loaded[e.sample_id].subject_id == e.subject_id
    assert path.read_text().splitlines()[0] == "sample_id,subject_id,v0,v1,v2,v3,v4"


def test_embedding_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,subject\n", encoding="utf-8")
    with pytest.raises(FormatError, match="bad header"):
        load_embedding_file(path)
    path.write_text("sample_id,subject_id,v0,v1\na,S,1.0\n", encoding="utf-8")
    with pytest.raises(FormatError, match="expected 4 fields"):
        load_embedding_file(path)
    path.write_text("sample_id,subject_id,v0,v1\na,S,1.0,2.0\na,S,1.0,2.0\n", encoding="utf-8")
    with pytest.raises(FormatError, match="duplicate sample_id"):
        load_embedding_file(path)


def test_template_csv_roundtrip(tmp_path, split_protocol, rng):
    embeddings = _protocol_embeddings(split_protocol, rng)
    templates = enroll_all(split_protocol, embeddings)
    path = tmp_path / "templates.csv"
    save_template_file(templates.values(), path)
    loaded = load_template_file(path)
    assert set(loaded) == set(templates)
    for mid, t in templates.items():
        assert np.array_equal(loaded[mid].vector, t.vector)
        assert loaded[mid].n_enrolled == t.n_enrolled
