"""End-to-end evaluation under a threshold-selection policy.

Four policies are implemented. The operational one solves a single threshold
on the pooled dev scores and applies it uniformly to every eval sub-protocol:

* ``combined_dev_fmr``        -- one threshold at FMR=target on pooled dev scores.

Two deliberately wrong regimes are first-class policies so their effect can be
demonstrated rather than described, plus the legacy regime:

* ``per_subprotocol_dev_fmr`` -- a separate dev threshold per sub-protocol.
* ``on_eval_fmr``             -- thresholds solved directly on the eval scores.
* ``eer_dev_hter_eval``       -- EER threshold on pooled dev, HTER reported on eval.

A score's sub-protocol always comes from the probe sample, never the model.
Sub-protocol entries with an empty class report None for that rate instead of
fabricating a zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import EvaluationError, MetricError
from .metrics import (
    MetricReport,
    OpenSetCurve,
    ProbeTopMatch,
    RocPoint,
    SubProtocolRates,
    eer_threshold,
    fmr_at,
    fnmr_at,
    openset_curve,
    roc_points,
    threshold_at_fmr,
)
from .protocol import Protocol
from .scores import ScoreRecord, ScoreSet, split_by_group, split_by_label

POLICY_VARIANTS = (
    "combined_dev_fmr",
    "per_subprotocol_dev_fmr",
    "on_eval_fmr",
    "eer_dev_hter_eval",
)

COMBINED_KEY = "combined"


@dataclass(frozen=True)
class ThresholdPolicy:
    """Which threshold-selection regime to run, and at which FMR target."""

    variant: str
    fmr_target: float | None = None

    def __post_init__(self):
        if self.variant not in POLICY_VARIANTS:
            raise EvaluationError(f"unknown threshold policy '{self.variant}'")
        if self.variant == "eer_dev_hter_eval":
            if self.fmr_target is not None:
                raise EvaluationError("eer_dev_hter_eval does not take an FMR target")
        else:
            if self.fmr_target is None or not (0.0 < self.fmr_target < 1.0):
                raise EvaluationError(
                    f"policy '{self.variant}' needs an FMR target in (0, 1), "
                    f"got {self.fmr_target}"
                )

    def to_json_dict(self) -> dict:
        return {"variant": self.variant, "fmr_target": self.fmr_target}


@dataclass
class EvaluationResult:
    policy: ThresholdPolicy
    thresholds: dict[str, float]
    dev_report: MetricReport
    eval_report: MetricReport

    def to_json_dict(self) -> dict:
        return {
            "policy": self.policy.to_json_dict(),
            "thresholds": {k: self.thresholds[k] for k in sorted(self.thresholds)},
            "dev": _report_dict(self.dev_report),
            "eval": _report_dict(self.eval_report),
        }


def _report_dict(report: MetricReport) -> dict:
    return {
        "threshold": report.threshold,
        "fmr": report.fmr,
        "fnmr": report.fnmr,
        "hter": report.hter,
        "n_genuine": report.n_genuine,
        "n_impostor": report.n_impostor,
        "per_sub_protocol": {
            label: {
                "threshold": entry.threshold,
                "fmr": entry.fmr,
                "fnmr": entry.fnmr,
                "n_genuine": entry.n_genuine,
                "n_impostor": entry.n_impostor,
            }
            for label, entry in sorted(report.per_sub_protocol.items())
        },
    }


def save_report(result: EvaluationResult, path: str | Path) -> None:
    text = json.dumps(result.to_json_dict(), indent=2, ensure_ascii=False) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _error_counts(subset: ScoreSet, threshold: float) -> tuple[int, int]:
    """Integer (false matches, false non-matches) at a threshold."""
    imp = subset.impostor_scores
    gen = subset.genuine_scores
    false_matches = int(imp.size - np.searchsorted(imp, threshold, side="left"))
    false_non_matches = int(np.searchsorted(gen, threshold, side="left"))
    return false_matches, false_non_matches


def _label_rates(records: list[ScoreRecord], threshold: float) -> SubProtocolRates:
    subset = ScoreSet(records)
    return SubProtocolRates(
        fmr=fmr_at(subset, threshold) if subset.impostor_count else None,
        fnmr=fnmr_at(subset, threshold) if subset.genuine_count else None,
        n_genuine=subset.genuine_count,
        n_impostor=subset.impostor_count,
        threshold=threshold,
    )


def _uniform_report(
    records: list[ScoreRecord], threshold: float, policy: ThresholdPolicy, context: str
) -> MetricReport:
    pooled = ScoreSet(records)
    if pooled.genuine_count < 1:
        raise EvaluationError(f"{context} scores contain no genuine comparisons")
    if pooled.impostor_count < 1:
        raise EvaluationError(f"{context} scores contain no impostor comparisons")
    fmr = fmr_at(pooled, threshold)
    fnmr = fnmr_at(pooled, threshold)
    return MetricReport(
        fmr=fmr,
        fnmr=fnmr,
        hter=(fmr + fnmr) / 2.0,
        n_genuine=pooled.genuine_count,
        n_impostor=pooled.impostor_count,
        threshold=threshold,
        per_sub_protocol={
            label: _label_rates(subset, threshold)
            for label, subset in sorted(split_by_label(records).items())
        },
        policy=policy,
    )


def _per_label_report(
    records: list[ScoreRecord],
    thresholds: dict[str, float],
    policy: ThresholdPolicy,
    context: str,
    strict: bool = True,
) -> MetricReport:
    """Report where each record is judged at its own label's threshold.

    Global rates are the micro-average over the covered labels. With
    strict=False, labels without a threshold are left out of the report
    entirely (used for the informational counterpart group).
    """
    by_label = split_by_label(records)
    missing = sorted(set(by_label) - set(thresholds))
    if missing and strict:
        raise EvaluationError(
            f"sub-protocol '{missing[0]}' has no threshold (no scores to solve it on)"
        )
    covered = {label: recs for label, recs in by_label.items() if label in thresholds}
    if not covered:
        raise EvaluationError(f"{context} scores cover no thresholded sub-protocol")

    per_label = {}
    n_genuine = n_impostor = 0
    false_matches = false_non_matches = 0
    for label, recs in sorted(covered.items()):
        subset = ScoreSet(recs)
        per_label[label] = _label_rates(recs, thresholds[label])
        fm, fnm = _error_counts(subset, thresholds[label])
        n_genuine += subset.genuine_count
        n_impostor += subset.impostor_count
        false_matches += fm
        false_non_matches += fnm
    if n_genuine < 1:
        raise EvaluationError(f"{context} scores contain no genuine comparisons")
    if n_impostor < 1:
        raise EvaluationError(f"{context} scores contain no impostor comparisons")
    fmr = false_matches / n_impostor
    fnmr = false_non_matches / n_genuine
    return MetricReport(
        fmr=fmr,
        fnmr=fnmr,
        hter=(fmr + fnmr) / 2.0,
        n_genuine=n_genuine,
        n_impostor=n_impostor,
        threshold=None,
        per_sub_protocol=per_label,
        policy=policy,
    )


def evaluate_scores(
    records: Iterable[ScoreRecord], policy: ThresholdPolicy
) -> EvaluationResult:
    """Evaluate dev/eval score records under a policy (the CSV-driven entry point)."""
    pool = list(records)
    groups = split_by_group(pool)
    dev = groups.get("dev", [])
    ev = groups.get("eval", [])
    if not dev:
        raise EvaluationError("no scores in group 'dev'")
    if not ev:
        raise EvaluationError("no scores in group 'eval'")

    if policy.variant == "combined_dev_fmr":
        tau = threshold_at_fmr(ScoreSet(dev), policy.fmr_target)
        thresholds = {COMBINED_KEY: tau}
        dev_report = _uniform_report(dev, tau, policy, "dev")
        eval_report = _uniform_report(ev, tau, policy, "eval")
    elif policy.variant == "eer_dev_hter_eval":
        tau, _ = eer_threshold(ScoreSet(dev))
        thresholds = {COMBINED_KEY: tau}
        dev_report = _uniform_report(dev, tau, policy, "dev")
        eval_report = _uniform_report(ev, tau, policy, "eval")
    elif policy.variant == "per_subprotocol_dev_fmr":
        thresholds = {}
        for label, recs in sorted(split_by_label(dev).items()):
            subset = ScoreSet(recs)
            if subset.impostor_count < 1:
                raise EvaluationError(
                    f"sub-protocol '{label}' has no dev impostor scores to solve a threshold on"
                )
            thresholds[label] = threshold_at_fmr(subset, policy.fmr_target)
        dev_report = _per_label_report(dev, thresholds, policy, "dev")
        eval_report = _per_label_report(ev, thresholds, policy, "eval")
    else:  # on_eval_fmr: the second wrong regime, thresholds straight from eval
        thresholds = {}
        for label, recs in sorted(split_by_label(ev).items()):
            subset = ScoreSet(recs)
            if subset.impostor_count < 1:
                raise EvaluationError(
                    f"sub-protocol '{label}' has no eval impostor scores to solve a threshold on"
                )
            thresholds[label] = threshold_at_fmr(subset, policy.fmr_target)
        dev_report = _per_label_report(dev, thresholds, policy, "dev", strict=False)
        eval_report = _per_label_report(ev, thresholds, policy, "eval")

    return EvaluationResult(
        policy=policy, thresholds=thresholds, dev_report=dev_report, eval_report=eval_report
    )


def evaluate(
    protocol: Protocol, records: Iterable[ScoreRecord], policy: ThresholdPolicy
) -> EvaluationResult:
    """Protocol-aware wrapper around evaluate_scores (kind checking included)."""
    if protocol.kind != "verification_split":
        raise EvaluationError(
            f"policy evaluation needs a verification_split protocol, got '{protocol.kind}' "
            "(use roc_evaluate or openset_evaluate)"
        )
    return evaluate_scores(records, policy)


def roc_evaluate(
    protocol: Protocol, records: Iterable[ScoreRecord]
) -> dict[str, list[RocPoint]]:
    """One ROC per sub-protocol from the pooled scores of that label."""
    if protocol.kind != "verification_roc_only":
        raise EvaluationError(
            f"roc_evaluate needs a verification_roc_only protocol, got '{protocol.kind}' "
            "(split protocols must use evaluate)"
        )
    curves = {}
    for label, recs in sorted(split_by_label(list(records)).items()):
        subset = ScoreSet(recs)
        try:
            curves[label] = roc_points(subset)
        except MetricError as exc:
            raise EvaluationError(f"sub-protocol '{label}': {exc}") from exc
    if not curves:
        raise EvaluationError("no scores to build ROC curves from")
    return curves


def openset_matches_from_records(
    protocol: Protocol, records: Iterable[ScoreRecord]
) -> list[ProbeTopMatch]:
    """Reduce model-vs-probe scores to per-probe rank-1 outcomes.

    A gallery subject's score against a probe is the maximum over that
    subject's templates; the top subject is the one with the highest score
    (ties broken toward the lexicographically smallest subject id). Probes of
    subjects listed in unknown_subjects are the unknowns.
    """
    per_probe: dict[str, dict] = {}
    for r in records:
        entry = per_probe.setdefault(
            r.probe_sample_id, {"subject": r.probe_subject_id, "scores": {}}
        )
        prev = entry["scores"].get(r.reference_subject_id)
        if prev is None or r.score > prev:
            entry["scores"][r.reference_subject_id] = r.score

    matches = []
    for probe_id in sorted(per_probe):
        entry = per_probe[probe_id]
        top_subject = min(
            entry["scores"], key=lambda subj: (-entry["scores"][subj], subj)
        )
        matches.append(
            ProbeTopMatch(
                probe_sample_id=probe_id,
                is_known=entry["subject"] not in protocol.unknown_subjects,
                max_score=entry["scores"][top_subject],
                top_correct=top_subject == entry["subject"],
            )
        )
    return matches


def openset_evaluate(
    protocol: Protocol, templates, probe_embeddings
) -> tuple[OpenSetCurve, float]:
    """Open-set identification: TPIR-over-FPIR curve plus closed-set rank-1 rate."""
    from .embeddings import score_protocol

    if protocol.kind != "open_set":
        raise EvaluationError(
            f"openset_evaluate needs an open_set protocol, got '{protocol.kind}'"
        )
    records = score_protocol(protocol, templates, probe_embeddings, group="all")
    curve = openset_curve(openset_matches_from_records(protocol, records))
    return curve, curve.closed_set_rank1
