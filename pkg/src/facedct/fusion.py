"""Color-channel experiments: run one pipeline per input signal (R, G, B,
luminance) and combine channel score tensors at the score level.

Score fusion adds raw distance tensors cellwise, without per-channel
normalization, so channels with a larger dynamic range weigh more by
construction."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .features import DEFAULT_DIM
from .gallery import SplitSpec, apply_split
from .matching import IdentificationResult, ScoreTensor, build_score_tensor
from .pipeline import (
    DEFAULT_WINDOW,
    TensorSummary,
    enroll_subjects,
    extract_subject_features,
    summarize_tensor,
)


def _check_compatible(tensors: list[ScoreTensor]) -> None:
    if not tensors:
        raise ValueError("fusion needs at least one tensor")
    first = tensors[0]
    for t in tensors[1:]:
        if t.scores.shape != first.scores.shape:
            raise ValueError(
                f"tensor shape {t.scores.shape} != {first.scores.shape}"
            )
        if t.probe_subjects != first.probe_subjects or t.gallery_subjects != first.gallery_subjects:
            raise ValueError("fused tensors must index identical subjects")
        if t.metric != first.metric:
            raise ValueError(f"fused tensors mix metrics {t.metric!r} and {first.metric!r}")


def fuse_scores_sum(tensors: list[ScoreTensor]) -> ScoreTensor:
    """Cellwise sum of channel score tensors."""
    _check_compatible(tensors)
    fused = np.zeros_like(tensors[0].scores)
    for t in tensors:
        fused = fused + t.scores
    return tensors[0].with_scores(fused)


def fuse_scores_weighted(tensors: list[ScoreTensor], weights: list[float]) -> ScoreTensor:
    """Cellwise weighted sum; weights must be >= 0 and not all zero."""
    _check_compatible(tensors)
    if len(weights) != len(tensors):
        raise ValueError(f"{len(weights)} weights for {len(tensors)} tensors")
    w = [float(x) for x in weights]
    if any(x < 0 for x in w):
        raise ValueError("weights must be >= 0")
    if not any(w):
        raise ValueError("weights must not all be zero")
    fused = np.zeros_like(tensors[0].scores)
    for weight, t in zip(w, tensors):
        fused = fused + weight * t.scores
    return tensors[0].with_scores(fused)


@dataclass(frozen=True)
class FusionSpec:
    """Parsed fusion request: plain sum or weighted sum over channels."""

    kind: str  # "sum" | "weighted"
    channels: tuple[str, ...]
    weights: tuple[float, ...] | None = None

    def label(self) -> str:
        if self.kind == "sum":
            return "+".join(c.upper() for c in self.channels)
        assert self.weights is not None
        return "+".join(f"{w:g}{c.upper()}" for w, c in zip(self.weights, self.channels))


_TERM_RE = re.compile(r"^([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)(gray|[rgby])$", re.IGNORECASE)


def parse_fusion_spec(spec: str) -> FusionSpec:
    """Parse "sum:R,G,B" or "w:0.3R+0.59G+0.11B" into a FusionSpec."""
    kind, sep, body = spec.partition(":")
    kind = kind.strip().lower()
    if not sep or kind not in ("sum", "w"):
        raise ValidationError(
            f"fusion spec must look like 'sum:R,G,B' or 'w:0.3R+0.59G+0.11B', got {spec!r}"
        )
    if kind == "sum":
        channels = tuple(c.strip().lower() for c in body.split(",") if c.strip())
        if not channels:
            raise ValidationError(f"fusion spec {spec!r} lists no channels")
        return FusionSpec("sum", channels)
    channels = []
    weights = []
    for term in body.split("+"):
        m = _TERM_RE.match(term.strip())
        if not m:
            raise ValidationError(f"bad fusion term {term.strip()!r} in {spec!r}")
        weights.append(float(m.group(1)))
        channels.append(m.group(2).lower())
    if not any(weights):
        raise ValidationError(f"fusion spec {spec!r} has all-zero weights")
    return FusionSpec("weighted", tuple(channels), tuple(weights))


def apply_fusion(spec: FusionSpec, tensors: dict[str, ScoreTensor]) -> ScoreTensor:
    """Fuse the per-channel tensors named by a FusionSpec."""
    try:
        selected = [tensors[c] for c in spec.channels]
    except KeyError as exc:
        raise ValidationError(f"fusion needs channel {exc.args[0]!r} but it was not run") from None
    if spec.kind == "sum":
        return fuse_scores_sum(selected)
    assert spec.weights is not None
    return fuse_scores_weighted(selected, list(spec.weights))


@dataclass(frozen=True)
class ChannelRunResult:
    """Outcome of one single-channel end-to-end run."""

    channel: str
    tensor: ScoreTensor
    summary: TensorSummary

    @property
    def identification(self) -> IdentificationResult:
        return self.summary.identification

    @property
    def min_dcf(self) -> dict[str, float]:
        return self.summary.min_dcf


def run_channel_pipeline(
    manifest: dict[str, list[Path]],
    split: SplitSpec,
    channel: str,
    metric: str = "mse",
    dim: int = DEFAULT_DIM,
    window: int = DEFAULT_WINDOW,
    c_miss: float = 1.0,
    c_fa: float = 1.0,
    priors: dict[str, float] | None = None,
) -> ChannelRunResult:
    """Single-channel experiment: select/convert channel, extract features,
    enroll the training split, score the test split, evaluate."""
    train, test = apply_split(manifest, split)
    gallery = enroll_subjects(extract_subject_features(train, channel, dim, window))
    probes = extract_subject_features(test, channel, dim, window)
    tensor = build_score_tensor(probes, gallery, metric)
    summary = summarize_tensor(tensor, c_miss, c_fa, priors)
    return ChannelRunResult(channel, tensor, summary)
