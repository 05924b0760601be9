"""Verification analytics: genuine/impostor score split, FAR/FRR threshold
sweep, DET staircase, EER, and the detection cost function.

Convention: scores are distances and a trial is ACCEPTED iff score <=
threshold, so FAR falls and FRR rises as the threshold decreases.  The
score = threshold boundary counts as acceptance.  All threshold sweeps use
the exact candidate set (midpoints of the pooled sorted distinct scores
plus -inf/+inf sentinels), on which the error staircase attains every value
it takes anywhere on the real line.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .matching import ScoreTensor


class DegenerateScoresError(DataError):
    """Trial set lacks one of the two score populations."""


@dataclass
class TrialScores:
    """Genuine (intra) and impostor (inter) distance populations."""

    genuine: np.ndarray = field(repr=False)
    impostor: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for name in ("genuine", "impostor"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).reshape(-1)
            if arr.size == 0:
                raise DegenerateScoresError(f"no {name} trials")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} scores must be finite")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        # sorted copies are computed once and shared read-only
        gs = np.sort(self.genuine)
        is_ = np.sort(self.impostor)
        gs.flags.writeable = False
        is_.flags.writeable = False
        object.__setattr__(self, "_genuine_sorted", gs)
        object.__setattr__(self, "_impostor_sorted", is_)

    @property
    def n_genuine(self) -> int:
        return int(self.genuine.size)

    @property
    def n_impostor(self) -> int:
        return int(self.impostor.size)


@dataclass(frozen=True)
class DetPoint:
    threshold: float
    p_fa: float
    p_miss: float


@dataclass(frozen=True)
class DcfParams:
    """Eq-style cost model: cost of a miss, cost of a false alarm, target prior."""

    c_miss: float = 1.0
    c_fa: float = 1.0
    p_true: float = 0.5

    def __post_init__(self) -> None:
        if self.c_miss < 0 or self.c_fa < 0:
            raise ValueError("costs must be >= 0")
        if not 0.0 < self.p_true < 1.0:
            raise ValueError("p_true must lie in (0, 1)")

    @property
    def p_false(self) -> float:
        return 1.0 - self.p_true


def split_intra_inter(tensor: ScoreTensor) -> TrialScores:
    """Split tensor cells into genuine (own-subject) and impostor scores."""
    scores = tensor.scores
    n_probes = scores.shape[0]
    rows = np.arange(n_probes)
    gcols = tensor.genuine_columns()
    genuine = scores[rows, gcols, :].reshape(-1)
    mask = np.ones(scores.shape[:2], dtype=bool)
    mask[rows, gcols] = False
    impostor = scores[mask, :].reshape(-1)
    if impostor.size == 0:
        raise DegenerateScoresError("tensor has no impostor trials (single subject)")
    return TrialScores(genuine, impostor)


def far_frr_at(trials: TrialScores, threshold: float) -> tuple[float, float]:
    """(p_fa, p_miss) at one threshold; accept iff score <= threshold."""
    p_fa = float(np.count_nonzero(trials.impostor <= threshold)) / trials.n_impostor
    p_miss = float(np.count_nonzero(trials.genuine > threshold)) / trials.n_genuine
    return p_fa, p_miss


def _candidate_thresholds(trials: TrialScores) -> np.ndarray:
    pooled = np.unique(np.concatenate([trials.genuine, trials.impostor]))
    mids = (pooled[:-1] + pooled[1:]) / 2.0
    return np.concatenate(([-np.inf], mids, [np.inf]))


def _staircase(trials: TrialScores) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(thresholds asc, p_fa, p_miss) over the exact candidate set."""
    thresholds = _candidate_thresholds(trials)
    gs: np.ndarray = trials._genuine_sorted  # type: ignore[attr-defined]
    is_: np.ndarray = trials._impostor_sorted  # type: ignore[attr-defined]
    p_fa = np.searchsorted(is_, thresholds, side="right") / trials.n_impostor
    p_miss = 1.0 - np.searchsorted(gs, thresholds, side="right") / trials.n_genuine
    return thresholds, p_fa, p_miss


def det_curve(trials: TrialScores) -> list[DetPoint]:
    """Full DET staircase, ordered by threshold descending: (1,0) -> (0,1)."""
    thresholds, p_fa, p_miss = _staircase(trials)
    return [
        DetPoint(float(t), float(fa), float(miss))
        for t, fa, miss in zip(thresholds[::-1], p_fa[::-1], p_miss[::-1])
    ]


def eer(trials: TrialScores) -> float:
    """Error rate where the FAR and FRR staircases cross.

    Without an exact crossing, interpolates linearly between the two
    adjacent sweep points straddling p_fa = p_miss.
    """
    _, p_fa, p_miss = _staircase(trials)
    # descending threshold order: diff runs monotonically from +1 to -1
    fa = p_fa[::-1]
    miss = p_miss[::-1]
    diff = fa - miss
    idx = int(np.argmax(diff <= 0.0))
    if diff[idx] == 0.0:
        return float(fa[idx])
    d1, d2 = diff[idx - 1], diff[idx]
    t = d1 / (d1 - d2)
    return float(fa[idx - 1] + t * (fa[idx] - fa[idx - 1]))


def dcf(trials: TrialScores, threshold: float, params: DcfParams = DcfParams()) -> float:
    """Cost at a threshold: c_miss*p_miss*p_true + c_fa*p_fa*p_false."""
    p_fa, p_miss = far_frr_at(trials, threshold)
    return params.c_miss * p_miss * params.p_true + params.c_fa * p_fa * params.p_false


def min_dcf(trials: TrialScores, params: DcfParams = DcfParams()) -> tuple[float, float]:
    """Exact minimum of the cost over all thresholds, with its argmin.

    The step function attains its global minimum on the candidate set;
    ties resolve to the smallest threshold.
    """
    thresholds, p_fa, p_miss = _staircase(trials)
    costs = params.c_miss * p_miss * params.p_true + params.c_fa * p_fa * params.p_false
    idx = int(np.argmin(costs))  # first occurrence = smallest threshold
    return float(costs[idx]), float(thresholds[idx])


# Inverse normal CDF: rational approximation (central/tail split) good to
# well under 1e-8 absolute, then a single Newton correction against the
# erfc-based CDF.
_PROBIT_A = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_PROBIT_B = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_PROBIT_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_PROBIT_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
    3.754408661907416e00,
)
_PROBIT_SPLIT = 0.02425


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc (accurate deep into both tails)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_deviate(p: float) -> float:
    """Inverse standard normal CDF (probit), for p strictly inside (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probit requires 0 < p < 1, got {p}")
    a, b, c, d = _PROBIT_A, _PROBIT_B, _PROBIT_C, _PROBIT_D
    if p < _PROBIT_SPLIT:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= 1.0 - _PROBIT_SPLIT:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
            ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return x - (normal_cdf(x) - p) / pdf


@dataclass(frozen=True)
class TrialCounts:
    genuine: int
    impostor: int

    @property
    def total(self) -> int:
        return self.genuine + self.impostor


def trial_counts(n_clients: int, n_gallery_subjects: int, trials_per_client: int) -> TrialCounts:
    """Verification trial accounting: every probe claims every enrolled
    identity once, so each client trial yields one genuine and
    (gallery - 1) impostor comparisons."""
    if n_clients < 1 or n_gallery_subjects < 1 or trials_per_client < 1:
        raise ValueError("counts must be >= 1")
    if n_clients > n_gallery_subjects:
        raise ValueError("clients must be enrolled (n_clients <= gallery size)")
    genuine = n_clients * trials_per_client
    impostor = n_clients * (n_gallery_subjects - 1) * trials_per_client
    return TrialCounts(genuine, impostor)


#: probabilities are clamped into [eps, 1-eps] for the probit plot columns only
PROBIT_CLAMP = 1e-6


def _probit_clamped(p: float) -> float:
    return normal_deviate(min(max(p, PROBIT_CLAMP), 1.0 - PROBIT_CLAMP))


def det_to_csv(points: list[DetPoint]) -> str:
    """DET export: threshold, p_fa, p_miss, plus probit axes for plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "p_fa", "p_miss", "probit_p_fa", "probit_p_miss"])
    for pt in points:
        writer.writerow(
            [
                f"{pt.threshold:.17g}",
                f"{pt.p_fa:.17g}",
                f"{pt.p_miss:.17g}",
                f"{_probit_clamped(pt.p_fa):.9g}",
                f"{_probit_clamped(pt.p_miss):.9g}",
            ]
        )
    return buf.getvalue()


def save_det_csv(points: list[DetPoint], path: str | Path) -> None:
    Path(path).write_text(det_to_csv(points))


_DET_TICKS = (0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.4)


def render_det_svg(points: list[DetPoint], eer_value: float | None = None) -> str:
    """DET staircase on probit axes with the chance diagonal, as an SVG string."""
    lo, hi = 0.0005, 0.6
    zlo, zhi = normal_deviate(lo), normal_deviate(hi)
    size, margin = 480, 60
    span = size - 2 * margin

    def sx(p: float) -> float:
        z = normal_deviate(min(max(p, lo), hi))
        return margin + (z - zlo) / (zhi - zlo) * span

    def sy(p: float) -> float:
        z = normal_deviate(min(max(p, lo), hi))
        return size - margin - (z - zlo) / (zhi - zlo) * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="10">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="white" stroke="black"/>',
    ]
    for t in _DET_TICKS:
        x, y = sx(t), sy(t)
        parts.append(
            f'<line x1="{x:.1f}" y1="{size - margin}" x2="{x:.1f}" y2="{size - margin + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{size - margin + 16}" text-anchor="middle">{t * 100:g}</text>'
        )
        parts.append(
            f'<line x1="{margin - 4}" y1="{y:.1f}" x2="{margin}" y2="{y:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{margin - 6}" y="{y + 3:.1f}" text-anchor="end">{t * 100:g}</text>'
        )
    parts.append(
        f'<text x="{size / 2}" y="{size - 14}" text-anchor="middle">false alarm probability (%)</text>'
    )
    parts.append(
        f'<text x="14" y="{size / 2}" text-anchor="middle" '
        f'transform="rotate(-90 14 {size / 2})">miss probability (%)</text>'
    )
    # chance diagonal p_fa = p_miss
    parts.append(
        f'<line x1="{sx(lo):.1f}" y1="{sy(lo):.1f}" x2="{sx(hi):.1f}" y2="{sy(hi):.1f}" '
        'stroke="gray" stroke-dasharray="4 3"/>'
    )
    coords = " ".join(f"{sx(pt.p_fa):.2f},{sy(pt.p_miss):.2f}" for pt in points)
    parts.append(f'<polyline points="{coords}" fill="none" stroke="crimson" stroke-width="1.5"/>')
    if eer_value is not None and lo < eer_value < hi:
        parts.append(
            f'<circle cx="{sx(eer_value):.1f}" cy="{sy(eer_value):.1f}" r="3" fill="black"/>'
        )
        parts.append(
            f'<text x="{sx(eer_value) + 6:.1f}" y="{sy(eer_value) - 6:.1f}">EER {eer_value * 100:.2f}%</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
