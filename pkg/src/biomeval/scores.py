"""Score records and labeled score sets.

The canonical interchange format is a CSV with header

    sub_protocol,group,model_id,reference_subject_id,probe_sample_id,probe_subject_id,score

(LF newlines). ``is_genuine`` is never stored; it is always derived from
subject equality, which keeps converted third-party score files honest.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, MetricError

SCORE_HEADER = [
    "sub_protocol",
    "group",
    "model_id",
    "reference_subject_id",
    "probe_sample_id",
    "probe_subject_id",
    "score",
]

_GROUPS = ("dev", "eval", "none")


@dataclass(frozen=True)
class ScoreRecord:
    """One model-vs-probe comparison result."""

    model_id: str
    probe_sample_id: str
    probe_subject_id: str
    reference_subject_id: str
    sub_protocol: str
    group: str
    score: float
    is_genuine: bool

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise MetricError(
                f"non-finite score for ({self.model_id}, {self.probe_sample_id})"
            )
        if self.group not in _GROUPS:
            raise MetricError(f"unknown group '{self.group}'")
        if self.is_genuine != (self.reference_subject_id == self.probe_subject_id):
            raise MetricError(
                f"is_genuine flag inconsistent with subjects for "
                f"({self.model_id}, {self.probe_sample_id})"
            )


class ScoreSet:
    """An immutable collection of score records split into genuine and impostor sides."""

    def __init__(self, records: Iterable[ScoreRecord]):
        self.records: tuple[ScoreRecord, ...] = tuple(records)

    @cached_property
    def genuine_scores(self) -> np.ndarray:
        """Genuine scores, sorted ascending."""
        return np.sort(np.array([r.score for r in self.records if r.is_genuine], dtype=np.float64))

    @cached_property
    def impostor_scores(self) -> np.ndarray:
        """Impostor scores, sorted ascending."""
        return np.sort(
            np.array([r.score for r in self.records if not r.is_genuine], dtype=np.float64)
        )

    @property
    def genuine_count(self) -> int:
        return int(self.genuine_scores.size)

    @property
    def impostor_count(self) -> int:
        return int(self.impostor_scores.size)

    def __len__(self) -> int:
        return len(self.records)

    @classmethod
    def from_scores(
        cls,
        genuine: Sequence[float],
        impostor: Sequence[float],
        sub_protocol: str = "all",
        group: str = "none",
    ) -> "ScoreSet":
        """Build a set from raw score values (synthetic ids), for metric-level work."""
        records = [
            ScoreRecord(
                model_id=f"m{i}",
                probe_sample_id=f"g{i}",
                probe_subject_id="same",
                reference_subject_id="same",
                sub_protocol=sub_protocol,
                group=group,
                score=float(s),
                is_genuine=True,
            )
            for i, s in enumerate(genuine)
        ]
        records += [
            ScoreRecord(
                model_id=f"m{i}",
                probe_sample_id=f"i{i}",
                probe_subject_id="other",
                reference_subject_id="reference",
                sub_protocol=sub_protocol,
                group=group,
                score=float(s),
                is_genuine=False,
            )
            for i, s in enumerate(impostor)
        ]
        return cls(records)


def split_by_group(records: Iterable[ScoreRecord]) -> dict[str, list[ScoreRecord]]:
    out: dict[str, list[ScoreRecord]] = {}
    for r in records:
        out.setdefault(r.group, []).append(r)
    return out


def split_by_label(records: Iterable[ScoreRecord]) -> dict[str, list[ScoreRecord]]:
    out: dict[str, list[ScoreRecord]] = {}
    for r in records:
        out.setdefault(r.sub_protocol, []).append(r)
    return out


def save_score_file(records: Iterable[ScoreRecord], path: str | Path) -> None:
    """Write the canonical score CSV in the given record order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.sub_protocol,
                    r.group,
                    r.model_id,
                    r.reference_subject_id,
                    r.probe_sample_id,
                    r.probe_subject_id,
                    repr(float(r.score)),
                ]
            )


def load_score_file(path: str | Path) -> list[ScoreRecord]:
    """Read a canonical score CSV; is_genuine comes from subject equality."""
    records: list[ScoreRecord] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORE_HEADER:
            raise FormatError(
                f"'{path}' is not a score CSV (expected header {','.join(SCORE_HEADER)})"
            )
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(SCORE_HEADER):
                raise FormatError(
                    f"{path}:{lineno}: expected {len(SCORE_HEADER)} fields, got {len(row)}"
                )
            sub_protocol, group, model_id, ref_subject, probe_id, probe_subject, score_text = row
            try:
                score = float(score_text)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric score {score_text!r}") from exc
            if not math.isfinite(score):
                raise FormatError(f"{path}:{lineno}: non-finite score {score_text!r}")
            if group not in _GROUPS:
                raise FormatError(f"{path}:{lineno}: unknown group '{group}'")
            records.append(
                ScoreRecord(
                    model_id=model_id,
                    probe_sample_id=probe_id,
                    probe_subject_id=probe_subject,
                    reference_subject_id=ref_subject,
                    sub_protocol=sub_protocol,
                    group=group,
                    score=score,
                    is_genuine=ref_subject == probe_subject,
                )
            )
    if not records:
        raise FormatError(f"'{path}' contains no score records")
    return records
