"""Verification and open-set metrics.

Match convention (normative for the whole package): a comparison with
``score >= threshold`` is a match. Hence

* FMR(t)  = #(impostor scores >= t) / #impostors
* FNMR(t) = #(genuine scores  <  t) / #genuine

Empirical rates only change at observed score values, so candidate thresholds
are the distinct observed scores plus one value strictly above the maximum
(the next representable float). All rates are integer counts divided once,
which keeps brute-force oracle comparisons bit-exact.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, NamedTuple

import numpy as np

from .errors import MetricError
from .scores import ScoreSet

if TYPE_CHECKING:  # pragma: no cover
    from .evaluator import ThresholdPolicy


class InsufficientImpostorsWarning(UserWarning):
    """Raised when a threshold is solved on fewer than 1/alpha impostor scores."""


def _require_impostors(scores: ScoreSet) -> np.ndarray:
    if scores.impostor_count < 1:
        raise MetricError("score set has no impostor comparisons")
    return scores.impostor_scores


def _require_genuine(scores: ScoreSet) -> np.ndarray:
    if scores.genuine_count < 1:
        raise MetricError("score set has no genuine comparisons")
    return scores.genuine_scores


def fmr_at(scores: ScoreSet, threshold: float) -> float:
    """False match rate at a threshold.

    Arguments
    ---------
    scores : ScoreSet with at least one impostor comparison.
    threshold : decision threshold; scores >= threshold count as matches.

    Returns the fraction of impostor scores at or above the threshold.
    """
    imp = _require_impostors(scores)
    count = imp.size - int(np.searchsorted(imp, threshold, side="left"))
    return count / imp.size


def fnmr_at(scores: ScoreSet, threshold: float) -> float:
    """False non-match rate at a threshold: fraction of genuine scores below it."""
    gen = _require_genuine(scores)
    count = int(np.searchsorted(gen, threshold, side="left"))
    return count / gen.size


def candidate_thresholds(values: np.ndarray) -> np.ndarray:
    """Distinct observed scores plus one value strictly above the maximum."""
    uniq = np.unique(np.asarray(values, dtype=np.float64))
    return np.append(uniq, np.nextafter(uniq[-1], np.inf))


def threshold_at_fmr(dev: ScoreSet, fmr_target: float) -> float:
    """Smallest candidate threshold whose dev FMR does not exceed the target.

    The result is guaranteed to satisfy ``fmr_at(dev, t) <= fmr_target``; when
    even the largest impostor score violates the target, the next float above
    it is returned (forcing FMR exactly 0). Warns when the impostor count is
    below 1/fmr_target, since the target is then unresolvable at the
    granularity of the data.
    """
    if not (0.0 < fmr_target <= 1.0):
        raise MetricError(f"fmr target {fmr_target} outside (0, 1]")
    imp = _require_impostors(dev)
    if imp.size < 1.0 / fmr_target:
        warnings.warn(
            f"threshold at FMR={fmr_target} solved on only {imp.size} impostor scores "
            f"(fewer than {1.0 / fmr_target:.0f})",
            InsufficientImpostorsWarning,
            stacklevel=2,
        )
    uniq = np.unique(imp)
    counts_ge = imp.size - np.searchsorted(imp, uniq, side="left")
    rates = counts_ge / imp.size
    ok = np.nonzero(rates <= fmr_target)[0]
    if ok.size:
        return float(uniq[ok[0]])
    return float(np.nextafter(uniq[-1], np.inf))


def eer_threshold(dev: ScoreSet) -> tuple[float, float]:
    """Equal error rate operating point.

    Scans every candidate threshold, picks the one minimizing |FMR - FNMR|
    (ties broken toward the smaller threshold), and returns
    ``(threshold, (FMR + FNMR) / 2)`` there.
    """
    gen = _require_genuine(dev)
    imp = _require_impostors(dev)
    cands = candidate_thresholds(np.concatenate([gen, imp]))
    fmr = (imp.size - np.searchsorted(imp, cands, side="left")) / imp.size
    fnmr = np.searchsorted(gen, cands, side="left") / gen.size
    idx = int(np.argmin(np.abs(fmr - fnmr)))
    return float(cands[idx]), float((fmr[idx] + fnmr[idx]) / 2.0)


class RocPoint(NamedTuple):
    threshold: float
    fmr: float
    fnmr: float


def roc_points(scores: ScoreSet) -> list[RocPoint]:
    """One (threshold, FMR, FNMR) point per candidate threshold, ascending.

    FMR is non-increasing and FNMR non-decreasing along the list; the last
    point (just above the maximum score) always has FMR 0.
    """
    gen = _require_genuine(scores)
    imp = _require_impostors(scores)
    cands = candidate_thresholds(np.concatenate([gen, imp]))
    fmr = (imp.size - np.searchsorted(imp, cands, side="left")) / imp.size
    fnmr = np.searchsorted(gen, cands, side="left") / gen.size
    return [RocPoint(float(t), float(f), float(m)) for t, f, m in zip(cands, fmr, fnmr)]


@dataclass(frozen=True)
class SubProtocolRates:
    """Per-label slice of a report; a rate is None when that side has no scores."""

    fmr: float | None
    fnmr: float | None
    n_genuine: int
    n_impostor: int
    threshold: float | None = None


@dataclass
class MetricReport:
    """Verification rates at one threshold policy.

    ``threshold`` is the single shared value under combined policies and None
    under per-sub-protocol policies (the per-label entries then carry their
    own thresholds). HTER is always (FMR + FNMR) / 2 by construction.
    """

    fmr: float
    fnmr: float
    hter: float
    n_genuine: int
    n_impostor: int
    threshold: float | None = None
    per_sub_protocol: dict[str, SubProtocolRates] = field(default_factory=dict)
    policy: "ThresholdPolicy | None" = None

    def __post_init__(self):
        if self.hter != (self.fmr + self.fnmr) / 2.0:
            raise MetricError("hter must equal (fmr + fnmr) / 2")
        if self.per_sub_protocol:
            if sum(e.n_genuine for e in self.per_sub_protocol.values()) != self.n_genuine:
                raise MetricError("per-label genuine counts do not sum to the global count")
            if sum(e.n_impostor for e in self.per_sub_protocol.values()) != self.n_impostor:
                raise MetricError("per-label impostor counts do not sum to the global count")


class OpenSetPoint(NamedTuple):
    fpir: float
    tpir: float
    threshold: float


@dataclass
class OpenSetCurve:
    """Rank-1 open-set operating points sorted by FPIR ascending.

    The curve always contains the threshold=-inf point, where FPIR is 1 and
    TPIR equals the closed-set rank-1 identification rate.
    """

    points: list[OpenSetPoint]

    def __post_init__(self):
        if not self.points:
            raise MetricError("open-set curve has no points")
        prev_fpir, prev_tpir = -1.0, -1.0
        for p in self.points:
            if not (0.0 <= p.fpir <= 1.0 and 0.0 <= p.tpir <= 1.0):
                raise MetricError(f"open-set point out of range: {p}")
            if p.fpir < prev_fpir:
                raise MetricError("open-set curve must be sorted by FPIR ascending")
            if p.tpir < prev_tpir:
                raise MetricError("TPIR must be non-decreasing along the curve")
            prev_fpir, prev_tpir = p.fpir, p.tpir
        if self.points[-1].fpir != 1.0:
            raise MetricError("open-set curve must reach FPIR=1")

    @property
    def closed_set_rank1(self) -> float:
        """TPIR of the FPIR=1 operating point."""
        return self.points[-1].tpir


@dataclass(frozen=True)
class ProbeTopMatch:
    """Rank-1 outcome for one probe: its best gallery score and whether the
    top-ranked gallery subject is the probe's subject."""

    probe_sample_id: str
    is_known: bool
    max_score: float
    top_correct: bool


def openset_curve(matches: Iterable[ProbeTopMatch]) -> OpenSetCurve:
    """Sweep thresholds over per-probe top matches.

    FPIR(t) is the fraction of unknown probes whose best gallery score reaches
    t; TPIR(t) is the fraction of known probes that are both correctly ranked
    at rank 1 and reach t. Candidates are every observed top score, one value
    above the maximum, and -inf (the closed-set end of the curve).
    """
    pool = list(matches)
    unknown = np.sort(
        np.array([m.max_score for m in pool if not m.is_known], dtype=np.float64)
    )
    known_total = sum(1 for m in pool if m.is_known)
    correct = np.sort(
        np.array(
            [m.max_score for m in pool if m.is_known and m.top_correct], dtype=np.float64
        )
    )
    if known_total == 0:
        raise MetricError("open-set evaluation needs at least one known probe")
    if unknown.size == 0:
        raise MetricError("open-set evaluation needs at least one unknown probe")

    all_scores = np.array([m.max_score for m in pool], dtype=np.float64)
    cands = candidate_thresholds(all_scores)[::-1]  # descending: FPIR ascends
    points = []
    for t in cands:
        fpir = (unknown.size - int(np.searchsorted(unknown, t, side="left"))) / unknown.size
        tpir = (correct.size - int(np.searchsorted(correct, t, side="left"))) / known_total
        points.append(OpenSetPoint(fpir=fpir, tpir=tpir, threshold=float(t)))
    rank1 = correct.size / known_total
    points.append(OpenSetPoint(fpir=1.0, tpir=rank1, threshold=float("-inf")))
    return OpenSetCurve(points=points)


def interpolate_tpir_at_fpir(curve: OpenSetCurve, target_fpir: float) -> float:
    """TPIR at the largest achieved FPIR not exceeding the target (step interpolation).

    When the curve has no point at or below the target, the conservative
    zero-FPIR operating value 0.0 is returned rather than extrapolating.
    """
    if not (0.0 <= target_fpir <= 1.0):
        raise MetricError(f"target FPIR {target_fpir} outside [0, 1]")
    best: OpenSetPoint | None = None
    for p in curve.points:
        if p.fpir <= target_fpir and (
            best is None or (p.fpir, p.tpir) > (best.fpir, best.tpir)
        ):
            best = p
    return best.tpir if best is not None else 0.0


def save_roc_csv(points: Iterable[RocPoint], path: str | Path) -> None:
    """Write a ROC curve as ``threshold,fmr,fnmr`` rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "fmr", "fnmr"])
        for p in points:
            writer.writerow([repr(p.threshold), repr(p.fmr), repr(p.fnmr)])


def save_openset_csv(curve: OpenSetCurve, path: str | Path) -> None:
    """Write an open-set curve as ``threshold,fpir,tpir`` rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "fpir", "tpir"])
        for p in curve.points:
            writer.writerow([repr(p.threshold), repr(p.fpir), repr(p.tpir)])
