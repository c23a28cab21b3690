import json
import time

import pytest

from biomeval import (
    FormatError,
    ModelSpec,
    Protocol,
    ProtocolError,
    comparison_pairs,
    load_protocol,
    save_protocol,
)
from biomeval.synth import SynthConfig, generate

from conftest import make_sample, make_split_protocol


def test_valid_protocol_passes_validation(split_protocol):
    split_protocol.validate()


def test_roundtrip_is_structurally_equal(split_protocol, tmp_path):
    path = tmp_path / "p.json"
    save_protocol(split_protocol, path)
    reloaded = load_protocol(path)
    assert reloaded.canonical_dict() == split_protocol.canonical_dict()


def test_repeated_saves_are_byte_identical(split_protocol, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_protocol(split_protocol, a)
    save_protocol(split_protocol, b)
    assert a.read_bytes() == b.read_bytes()
    # and saving a reloaded protocol reproduces the file exactly
    save_protocol(load_protocol(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_dev_only_protocol_reports_eval_group_empty(tmp_path):
    samples = [
        make_sample("s-e0", "S", "enroll", "dev"),
        make_sample("s-p0", "S", "probe", "dev"),
    ]
    p = Protocol(
        name="t",
        kind="verification_split",
        samples=samples,
        models=[ModelSpec("m", "S", ["s-e0"])],
        sub_protocols=["all"],
    )
    with pytest.raises(ProtocolError, match="eval group empty"):
        p.validate()
    # the same file-level path fails identically
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.canonical_dict()), encoding="utf-8")
    with pytest.raises(ProtocolError, match="eval group empty"):
        load_protocol(path)


def test_subject_in_both_groups_rejected():
    p = make_split_protocol()
    p.samples.append(make_sample("A-x", "A", "probe", "eval"))
    with pytest.raises(ProtocolError, match="appears in both dev and eval"):
        p.validate()


def test_duplicate_sample_id_rejected():
    p = make_split_protocol()
    p.samples.append(p.samples[0])
    with pytest.raises(ProtocolError, match="duplicate sample_id"):
        p.validate()


def test_bad_role_and_group_values_rejected():
    p = make_split_protocol()
    p.samples[0].role = "gallery"
    with pytest.raises(ProtocolError, match="unknown role"):
        p.validate()
    p = make_split_protocol()
    p.samples[0].group = "test"
    with pytest.raises(ProtocolError, match="unknown group"):
        p.validate()


def test_group_none_rejected_in_split_protocol():
    p = make_split_protocol()
    p.samples[1].group = "none"
    with pytest.raises(ProtocolError, match="group=none"):
        p.validate()


def test_undeclared_sub_protocol_rejected():
    p = make_split_protocol()
    p.samples[1].sub_protocol = "scarf"
    with pytest.raises(ProtocolError, match="undeclared sub_protocol 'scarf'"):
        p.validate()


def test_model_rule_violations_rejected():
    p = make_split_protocol()
    p.models[0].enroll_sample_ids = ["nope"]
    with pytest.raises(ProtocolError, match="missing sample 'nope'"):
        p.validate()

    p = make_split_protocol()
    p.models[0].enroll_sample_ids = ["A-p0"]  # a probe
    with pytest.raises(ProtocolError, match="role 'probe'"):
        p.validate()

    p = make_split_protocol()
    p.models[0].enroll_sample_ids = ["B-e0"]  # other subject
    with pytest.raises(ProtocolError, match="does not match"):
        p.validate()

    p = make_split_protocol()
    p.models[0].enroll_sample_ids = []
    with pytest.raises(ProtocolError, match="no enroll samples"):
        p.validate()

    p = make_split_protocol()
    p.models.append(p.models[0])
    with pytest.raises(ProtocolError, match="duplicate model_id"):
        p.validate()


def _openset_protocol():
    samples = [
        make_sample("g-e0", "G", "enroll", "none"),
        make_sample("g-p0", "G", "probe", "none"),
        make_sample("u-p0", "U", "probe", "none"),
    ]
    return Protocol(
        name="os",
        kind="open_set",
        samples=samples,
        models=[ModelSpec("m-G", "G", ["g-e0"])],
        sub_protocols=["all"],
        unknown_subjects={"U"},
    )


def test_openset_protocol_valid():
    _openset_protocol().validate()


def test_openset_enrolled_unknown_rejected():
    p = _openset_protocol()
    p.unknown_subjects.add("G")
    with pytest.raises(ProtocolError, match="unknown subject 'G' is enrolled"):
        p.validate()


def test_openset_unpartitioned_probe_rejected():
    p = _openset_protocol()
    p.samples.append(make_sample("x-p0", "X", "probe", "none"))
    with pytest.raises(ProtocolError, match="neither enrolled nor declared unknown"):
        p.validate()


def test_unknown_subjects_rejected_outside_openset():
    p = make_split_protocol()
    p.unknown_subjects = {"Z"}
    with pytest.raises(ProtocolError, match="unknown_subjects"):
        p.validate()


def test_roc_only_requires_group_none():
    p = make_split_protocol()
    p.kind = "verification_roc_only"
    with pytest.raises(ProtocolError, match="ROC-only"):
        p.validate()


def test_fmr_target_range_checked():
    p = make_split_protocol()
    p.fmr_target = 1.5
    with pytest.raises(ProtocolError, match="fmr_target"):
        p.validate()


def test_load_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(FormatError, match="cannot parse"):
        load_protocol(path)
    path.write_text(json.dumps({"name": "x"}), encoding="utf-8")
    with pytest.raises(FormatError, match="malformed"):
        load_protocol(path)


def test_comparison_pairs_enumeration():
    # 2 models (subjects A, B) x 3 probes (A, A, B) -> 6 pairs, 3 genuine
    samples = [
        make_sample("a-e0", "A", "enroll", "dev"),
        make_sample("b-e0", "B", "enroll", "dev"),
        make_sample("a-p0", "A", "probe", "dev"),
        make_sample("a-p1", "A", "probe", "dev"),
        make_sample("b-p0", "B", "probe", "dev"),
        make_sample("c-e0", "C", "enroll", "eval"),
        make_sample("c-p0", "C", "probe", "eval"),
    ]
    p = Protocol(
        name="t",
        kind="verification_split",
        samples=samples,
        models=[
            ModelSpec("m-A", "A", ["a-e0"]),
            ModelSpec("m-B", "B", ["b-e0"]),
            ModelSpec("m-C", "C", ["c-e0"]),
        ],
        sub_protocols=["all"],
    )
    p.validate()
    pairs = comparison_pairs(p, "dev")
    assert len(pairs) == 6
    assert sum(pair.is_genuine for pair in pairs) == 3
    assert pairs == sorted(pairs, key=lambda q: (q.model_id, q.probe_sample_id))
    # pure function: identical lists on repeated calls
    assert comparison_pairs(p, "dev") == pairs
    # probe side never contains enroll samples
    by_id = p.sample_by_id()
    assert all(by_id[q.probe_sample_id].role == "probe" for q in pairs)


def test_comparison_pairs_group_without_probes(split_protocol):
    p = split_protocol
    p.samples = [s for s in p.samples if not (s.group == "eval" and s.role == "probe")]
    with pytest.raises(ProtocolError, match="no probe samples in group 'eval'"):
        comparison_pairs(p, "eval")


def test_pair_count_matches_nested_loop_on_synthetic():
    protocol, _ = generate(
        SynthConfig(
            seed=99,
            n_subjects=50,
            samples_per_subject=4,
            enroll_per_subject=1,
            dim=4,
            noise_sigma=0.1,
        )
    )
    for group in ("dev", "eval"):
        pairs = comparison_pairs(protocol, group)
        # independent nested-loop counter over the raw sample/model lists
        by_id = {s.sample_id: s for s in protocol.samples}
        count = genuine = 0
        for m in protocol.models:
            if by_id[m.enroll_sample_ids[0]].group != group:
                continue
            for s in protocol.samples:
                if s.role == "probe" and s.group == group:
                    count += 1
                    genuine += m.subject_id == s.subject_id
        assert len(pairs) == count
        assert sum(q.is_genuine for q in pairs) == genuine
        # genuine count identity: sum over subjects of models x probes
        models_of = {}
        probes_of = {}
        for m in protocol.models:
            if by_id[m.enroll_sample_ids[0]].group == group:
                models_of[m.subject_id] = models_of.get(m.subject_id, 0) + 1
        for s in protocol.samples:
            if s.role == "probe" and s.group == group:
                probes_of[s.subject_id] = probes_of.get(s.subject_id, 0) + 1
        expected = sum(models_of.get(subj, 0) * probes_of.get(subj, 0) for subj in probes_of)
        assert sum(q.is_genuine for q in pairs) == expected


def test_synthetic_protocol_roundtrips_byte_identically(tmp_path):
    protocol, _ = generate(
        SynthConfig(
            seed=50501, n_subjects=50, samples_per_subject=5, enroll_per_subject=2,
            dim=4, noise_sigma=0.2,
        )
    )
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    save_protocol(protocol, first)
    save_protocol(load_protocol(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_large_protocol_roundtrip_under_a_second(tmp_path):
    samples, models = [], []
    for i in range(2500):
        subject = f"S{i:05d}"
        group = "dev" if i % 2 == 0 else "eval"
        samples.append(make_sample(f"{subject}-e0", subject, "enroll", group))
        samples.append(make_sample(f"{subject}-e1", subject, "enroll", group))
        samples.append(make_sample(f"{subject}-p0", subject, "probe", group))
        samples.append(make_sample(f"{subject}-p1", subject, "probe", group))
        models.append(ModelSpec(f"m-{subject}", subject, [f"{subject}-e0", f"{subject}-e1"]))
    p = Protocol(
        name="big", kind="verification_split", samples=samples, models=models,
        sub_protocols=["all"],
    )
    path = tmp_path / "big.json"
    start = time.perf_counter()
    save_protocol(p, path)
    reloaded = load_protocol(path)
    elapsed = time.perf_counter() - start
    assert len(reloaded.samples) == 10000
    assert elapsed < 1.0
