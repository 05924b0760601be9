"""Nearest-template matching: distance kernels, the probe x model x trial
score tensor, and the rank-1 identification rate.

Distances are stored (smaller = better match); a probe identifies its
subject when the genuine cell is the strict minimum of its row.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, MismatchError
from .features import FeatureVector
from .gallery import Gallery

METRICS = ("mse", "mad")


class MatchingError(DataError):
    """Probe set and gallery cannot be scored against each other."""


def _check_dims(x: FeatureVector, y: FeatureVector) -> None:
    if x.dim != y.dim:
        raise MismatchError(f"feature dims differ: {x.dim} vs {y.dim}")


def mse(x: FeatureVector, y: FeatureVector) -> float:
    """Sum of squared coefficient differences."""
    _check_dims(x, y)
    d = x.coeffs - y.coeffs
    return float(np.sum(d * d))


def mad(x: FeatureVector, y: FeatureVector) -> float:
    """Sum of absolute coefficient differences."""
    _check_dims(x, y)
    return float(np.sum(np.abs(x.coeffs - y.coeffs)))


_METRIC_FNS = {"mse": mse, "mad": mad}


def _batched_distances(metric: str, probe: np.ndarray, templates: np.ndarray) -> np.ndarray:
    # templates: (M, D); probe: (D,) -> (M,) using the same axis reduction
    # as the scalar kernels so both routes agree bit-for-bit
    d = templates - probe
    if metric == "mse":
        return np.sum(d * d, axis=1)
    return np.sum(np.abs(d), axis=1)


def check_metric(metric: str) -> str:
    metric = metric.lower()
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    return metric


def person_score(probe: FeatureVector, templates: list[FeatureVector], metric: str) -> float:
    """Distance from a probe to a person: minimum over their templates."""
    metric = check_metric(metric)
    if not templates:
        raise ValueError("person_score needs at least one template")
    fn = _METRIC_FNS[metric]
    return min(fn(probe, t) for t in templates)


@dataclass
class ScoreTensor:
    """Distances s[i][j][k]: probe k of subject i against subject j's models.

    Probe subjects must all be enrolled (appear among gallery subjects);
    the tensor is square exactly when the two subject lists coincide.
    """

    probe_subjects: tuple[str, ...]
    gallery_subjects: tuple[str, ...]
    scores: np.ndarray = field(repr=False)
    metric: str = "mse"

    def __post_init__(self) -> None:
        object.__setattr__(self, "probe_subjects", tuple(self.probe_subjects))
        object.__setattr__(self, "gallery_subjects", tuple(self.gallery_subjects))
        arr = np.asarray(self.scores, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError("scores must be a 3-D array (probe, gallery, trial)")
        if arr.shape[0] != len(self.probe_subjects) or arr.shape[1] != len(self.gallery_subjects):
            raise ValueError("scores shape does not match the subject lists")
        if arr.shape[2] < 1:
            raise ValueError("tensor needs at least one trial per subject")
        if len(set(self.probe_subjects)) != len(self.probe_subjects):
            raise ValueError("duplicate probe subjects")
        if len(set(self.gallery_subjects)) != len(self.gallery_subjects):
            raise ValueError("duplicate gallery subjects")
        missing = set(self.probe_subjects) - set(self.gallery_subjects)
        if missing:
            raise ValueError(f"probe subjects missing from gallery: {sorted(missing)}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("scores must be finite")
        if arr.size and arr.min() < 0:
            raise ValueError("distances must be >= 0")
        arr.flags.writeable = False
        object.__setattr__(self, "scores", arr)
        self.metric = check_metric(self.metric)

    @property
    def n_trials(self) -> int:
        return int(self.scores.shape[2])

    def genuine_columns(self) -> np.ndarray:
        """For each probe row, the gallery column of the same subject."""
        lookup = {s: j for j, s in enumerate(self.gallery_subjects)}
        return np.array([lookup[s] for s in self.probe_subjects], dtype=np.intp)

    def with_scores(self, scores: np.ndarray) -> "ScoreTensor":
        return ScoreTensor(self.probe_subjects, self.gallery_subjects, scores, self.metric)


@dataclass(frozen=True)
class IdentificationResult:
    successes: int
    errors: int

    @property
    def trials(self) -> int:
        return self.successes + self.errors

    @property
    def rate(self) -> float:
        return self.successes / self.trials


def build_score_tensor(
    probes: dict[str, list[FeatureVector]], gallery: Gallery, metric: str
) -> ScoreTensor:
    """Score every probe against every enrolled person's nearest template.

    Probe subjects must be enrolled and must all carry the same number of
    trials; dimensions and source channel must match the gallery.
    """
    metric = check_metric(metric)
    if not probes:
        raise MatchingError("no probe subjects supplied")
    probe_subjects = tuple(sorted(probes))
    for subject in probe_subjects:
        if subject not in gallery:
            raise MatchingError(f"probe subject {subject!r} is not enrolled")
        if not probes[subject]:
            raise MatchingError(f"probe subject {subject!r} has no trials")
    n_trials = len(probes[probe_subjects[0]])
    for subject in probe_subjects:
        if len(probes[subject]) != n_trials:
            raise MatchingError(
                f"ragged trial counts: subject {subject!r} has {len(probes[subject])} "
                f"test samples, expected {n_trials}"
            )

    gallery_subjects = tuple(gallery.subject_ids)
    template_rows = []
    group_starts = []
    for subject in gallery_subjects:
        group_starts.append(len(template_rows))
        for t in gallery.templates_of(subject):
            template_rows.append(t.coeffs)
    templates = np.vstack(template_rows)
    starts = np.array(group_starts, dtype=np.intp)

    dim = gallery.feature_dim
    scores = np.empty((len(probe_subjects), len(gallery_subjects), n_trials))
    for i, subject in enumerate(probe_subjects):
        for k, vec in enumerate(probes[subject]):
            if vec.dim != dim:
                raise MismatchError(
                    f"probe {subject!r}[{k}] has dim {vec.dim}, gallery dim is {dim}"
                )
            if vec.source_channel != gallery.channel:
                raise MismatchError(
                    f"probe {subject!r}[{k}] channel {vec.source_channel!r} != "
                    f"gallery channel {gallery.channel!r}"
                )
            dists = _batched_distances(metric, vec.coeffs, templates)
            scores[i, :, k] = np.minimum.reduceat(dists, starts)
    return ScoreTensor(probe_subjects, gallery_subjects, scores, metric)


def identification_rate(tensor: ScoreTensor) -> IdentificationResult:
    """Fraction of probes whose own subject attains the strict row minimum.

    A tie between the genuine cell and any other subject counts as an error.
    """
    scores = tensor.scores
    n_probes = scores.shape[0]
    rows = np.arange(n_probes)
    gcols = tensor.genuine_columns()
    diag = scores[rows, gcols, :]
    masked = scores.copy()
    masked[rows, gcols, :] = np.inf
    min_others = masked.min(axis=1)
    successes = int(np.sum(diag < min_others))
    total = n_probes * tensor.n_trials
    return IdentificationResult(successes, total - successes)


SCORES_FORMAT = "facedct-scores-v1"


def scores_to_csv(tensor: ScoreTensor) -> str:
    """Interchange CSV: provenance comments, then i,j,k,score rows."""
    buf = io.StringIO()
    buf.write(f"# format={SCORES_FORMAT}\n")
    buf.write(f"# metric={tensor.metric}\n")
    buf.write(f"# probe_subjects={json.dumps(list(tensor.probe_subjects))}\n")
    buf.write(f"# gallery_subjects={json.dumps(list(tensor.gallery_subjects))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "k", "score"])
    scores = tensor.scores
    for i in range(scores.shape[0]):
        for j in range(scores.shape[1]):
            for k in range(scores.shape[2]):
                writer.writerow([i, j, k, f"{scores[i, j, k]:.17g}"])
    return buf.getvalue()


def scores_from_csv(text: str) -> ScoreTensor:
    """Parse the interchange CSV back into a ScoreTensor."""
    meta: dict[str, str] = {}
    rows: list[str] = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value
        elif line.strip():
            rows.append(line)
    if meta.get("format") != SCORES_FORMAT:
        raise DataError(f"not a {SCORES_FORMAT} score file")
    try:
        probe_subjects = json.loads(meta["probe_subjects"])
        gallery_subjects = json.loads(meta["gallery_subjects"])
        metric = meta["metric"]
    except (KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"score file header incomplete: {exc}") from exc

    reader = csv.reader(io.StringIO("\n".join(rows)))
    header = next(reader, None)
    if header != ["i", "j", "k", "score"]:
        raise DataError("score file missing i,j,k,score header row")
    cells: dict[tuple[int, int, int], float] = {}
    max_k = -1
    try:
        for row in reader:
            if not row:
                continue
            i, j, k = int(row[0]), int(row[1]), int(row[2])
            cells[(i, j, k)] = float(row[3])
            max_k = max(max_k, k)
    except (ValueError, IndexError) as exc:
        raise DataError(f"malformed score row: {exc}") from exc
    shape = (len(probe_subjects), len(gallery_subjects), max_k + 1)
    expected = shape[0] * shape[1] * shape[2]
    if len(cells) != expected:
        raise DataError(
            f"score file has {len(cells)} cells, expected {expected} for shape {shape}"
        )
    scores = np.empty(shape)
    for (i, j, k), value in cells.items():
        try:
            scores[i, j, k] = value
        except IndexError:
            raise DataError(f"score cell index ({i},{j},{k}) out of bounds {shape}") from None
    try:
        return ScoreTensor(tuple(probe_subjects), tuple(gallery_subjects), scores, metric)
    except ValueError as exc:
        raise DataError(f"invalid score tensor: {exc}") from exc


def save_scores_csv(tensor: ScoreTensor, path: str | Path) -> None:
    Path(path).write_text(scores_to_csv(tensor))


def load_scores_csv(path: str | Path) -> ScoreTensor:
    return scores_from_csv(Path(path).read_text())
