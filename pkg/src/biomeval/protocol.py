"""Evaluation protocols: which samples enroll, which probe, and in which group.

A protocol is a declarative JSON file rather than code, so supporting a new
dataset means writing one file (plus landmark annotations) instead of a loader.
Three kinds exist:

* ``verification_split``   -- identity-disjoint dev/eval groups; thresholds are
  solved on dev and applied to eval.
* ``verification_roc_only`` -- no split; only ROC reporting is meaningful.
  All samples carry ``group="none"`` and enroll samples are shared.
* ``open_set``             -- a gallery plus known and declared-unknown probes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .errors import FormatError, ProtocolError

ROLES = ("enroll", "probe")
GROUPS = ("dev", "eval", "none")
KINDS = ("verification_split", "verification_roc_only", "open_set")


@dataclass
class SampleRecord:
    """One physical sample: an image path with identity, role and group labels."""

    sample_id: str
    subject_id: str
    path: str
    role: str
    group: str
    sub_protocol: str = ""
    landmark_file: str | None = None


@dataclass
class ModelSpec:
    """An enrolled model: one subject, one or more enroll samples.

    Several models per subject are allowed (some datasets define multiple
    gallery templates per identity).
    """

    model_id: str
    subject_id: str
    enroll_sample_ids: list[str]


@dataclass
class Protocol:
    name: str
    kind: str
    samples: list[SampleRecord]
    models: list[ModelSpec]
    sub_protocols: list[str] = field(default_factory=list)
    unknown_subjects: set[str] = field(default_factory=set)
    fmr_target: float = 0.001

    def sample_by_id(self) -> dict[str, SampleRecord]:
        return {s.sample_id: s for s in self.samples}

    def enrolled_subjects(self) -> set[str]:
        return {s.subject_id for s in self.samples if s.role == "enroll"}

    def subjects_of_group(self, group: str) -> set[str]:
        return {s.subject_id for s in self.samples if s.group == group}

    def validate(self) -> None:
        """Check every structural rule; raise ProtocolError naming the first violation."""
        if self.kind not in KINDS:
            raise ProtocolError(f"unknown protocol kind '{self.kind}'")
        if not (0.0 < self.fmr_target < 1.0):
            raise ProtocolError(f"fmr_target {self.fmr_target} outside (0, 1)")
        if not self.samples:
            raise ProtocolError("protocol has no samples")

        seen: set[str] = set()
        for s in self.samples:
            if s.sample_id in seen:
                raise ProtocolError(f"duplicate sample_id '{s.sample_id}'")
            seen.add(s.sample_id)
            if s.role not in ROLES:
                raise ProtocolError(f"sample '{s.sample_id}' has unknown role '{s.role}'")
            if s.group not in GROUPS:
                raise ProtocolError(f"sample '{s.sample_id}' has unknown group '{s.group}'")

        if self.kind == "verification_split":
            for s in self.samples:
                if s.group == "none":
                    raise ProtocolError(
                        f"sample '{s.sample_id}' has group=none in a verification_split protocol"
                    )
            if not any(s.group == "dev" for s in self.samples):
                raise ProtocolError("dev group empty")
            if not any(s.group == "eval" for s in self.samples):
                raise ProtocolError("eval group empty")
            both = self.subjects_of_group("dev") & self.subjects_of_group("eval")
            if both:
                subj = sorted(both)[0]
                raise ProtocolError(f"subject '{subj}' appears in both dev and eval")
        elif self.kind == "verification_roc_only":
            for s in self.samples:
                if s.group != "none":
                    raise ProtocolError(
                        f"sample '{s.sample_id}' has group '{s.group}' in a ROC-only protocol"
                    )

        declared = set(self.sub_protocols)
        for s in self.samples:
            if s.role == "probe" and s.sub_protocol not in declared:
                raise ProtocolError(
                    f"probe '{s.sample_id}' has undeclared sub_protocol '{s.sub_protocol}'"
                )

        by_id = self.sample_by_id()
        model_ids: set[str] = set()
        for m in self.models:
            if m.model_id in model_ids:
                raise ProtocolError(f"duplicate model_id '{m.model_id}'")
            model_ids.add(m.model_id)
            if not m.enroll_sample_ids:
                raise ProtocolError(f"model '{m.model_id}' has no enroll samples")
            for sid in m.enroll_sample_ids:
                s = by_id.get(sid)
                if s is None:
                    raise ProtocolError(f"model '{m.model_id}' references missing sample '{sid}'")
                if s.role != "enroll":
                    raise ProtocolError(
                        f"model '{m.model_id}' references sample '{sid}' with role '{s.role}'"
                    )
                if s.subject_id != m.subject_id:
                    raise ProtocolError(
                        f"model '{m.model_id}' subject '{m.subject_id}' does not match "
                        f"sample '{sid}' subject '{s.subject_id}'"
                    )

        if self.kind == "open_set":
            clash = self.unknown_subjects & self.enrolled_subjects()
            if clash:
                subj = sorted(clash)[0]
                raise ProtocolError(f"unknown subject '{subj}' is enrolled")
            partition = self.enrolled_subjects() | self.unknown_subjects
            for s in self.samples:
                if s.role == "probe" and s.subject_id not in partition:
                    raise ProtocolError(
                        f"probe '{s.sample_id}' subject '{s.subject_id}' is neither "
                        "enrolled nor declared unknown"
                    )
        elif self.unknown_subjects:
            raise ProtocolError(f"unknown_subjects given for kind '{self.kind}'")

    def canonical_dict(self) -> dict:
        """Canonical JSON form: fixed key order, samples/models/label lists sorted."""
        samples = []
        for s in sorted(self.samples, key=lambda r: r.sample_id):
            d = {
                "sample_id": s.sample_id,
                "subject_id": s.subject_id,
                "path": s.path,
                "role": s.role,
                "group": s.group,
                "sub_protocol": s.sub_protocol,
            }
            if s.landmark_file is not None:
                d["landmark_file"] = s.landmark_file
            samples.append(d)
        models = [
            {
                "model_id": m.model_id,
                "subject_id": m.subject_id,
                "enroll_sample_ids": list(m.enroll_sample_ids),
            }
            for m in sorted(self.models, key=lambda m: m.model_id)
        ]
        return {
            "name": self.name,
            "kind": self.kind,
            "fmr_target": self.fmr_target,
            "sub_protocols": sorted(self.sub_protocols),
            "samples": samples,
            "models": models,
            "unknown_subjects": sorted(self.unknown_subjects),
        }


class ComparisonPair(NamedTuple):
    model_id: str
    probe_sample_id: str
    is_genuine: bool
    sub_protocol: str


def load_protocol(path: str | Path) -> Protocol:
    """Parse and validate a protocol JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse protocol file '{path}': {exc}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"protocol file '{path}' is not a JSON object")

    try:
        samples = [
            SampleRecord(
                sample_id=str(d["sample_id"]),
                subject_id=str(d["subject_id"]),
                path=str(d["path"]),
                role=str(d["role"]),
                group=str(d["group"]),
                sub_protocol=str(d.get("sub_protocol", "")),
                landmark_file=d.get("landmark_file"),
            )
            for d in raw["samples"]
        ]
        models = [
            ModelSpec(
                model_id=str(d["model_id"]),
                subject_id=str(d["subject_id"]),
                enroll_sample_ids=[str(x) for x in d["enroll_sample_ids"]],
            )
            for d in raw["models"]
        ]
        protocol = Protocol(
            name=str(raw["name"]),
            kind=str(raw["kind"]),
            samples=samples,
            models=models,
            sub_protocols=[str(x) for x in raw.get("sub_protocols", [])],
            unknown_subjects={str(x) for x in raw.get("unknown_subjects", [])},
            fmr_target=float(raw.get("fmr_target", 0.001)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"protocol file '{path}' is malformed: {exc!r}") from exc

    protocol.validate()
    return protocol


def save_protocol(protocol: Protocol, path: str | Path) -> None:
    """Write the canonical JSON form (sorted, LF newlines) so repeated saves are byte-identical."""
    protocol.validate()
    text = json.dumps(protocol.canonical_dict(), indent=2, ensure_ascii=False) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def comparison_pairs(protocol: Protocol, group: str = "all") -> list[ComparisonPair]:
    """Exhaustive model x probe cross of one group, in deterministic order.

    ``group`` is ``dev``, ``eval`` or ``all``. A model belongs to the group its
    enroll samples carry. Pairs are sorted by (model_id, probe_sample_id);
    ``is_genuine`` means the model and probe share a subject.
    """
    if group not in ("dev", "eval", "all"):
        raise ProtocolError(f"unknown group '{group}'")
    by_id = protocol.sample_by_id()

    def model_group(m: ModelSpec) -> str | None:
        groups = {by_id[sid].group for sid in m.enroll_sample_ids}
        return groups.pop() if len(groups) == 1 else None

    models = sorted(protocol.models, key=lambda m: m.model_id)
    if group != "all":
        models = [m for m in models if model_group(m) == group]
    probes = sorted(
        (
            s
            for s in protocol.samples
            if s.role == "probe" and (group == "all" or s.group == group)
        ),
        key=lambda s: s.sample_id,
    )
    if not probes:
        raise ProtocolError(f"no probe samples in group '{group}'")

    return [
        ComparisonPair(m.model_id, p.sample_id, m.subject_id == p.subject_id, p.sub_protocol)
        for m in models
        for p in probes
    ]
