"""Command-line front door.

Subcommands: enroll, evaluate, identify, det-export, fuse-eval, sigsize,
synth-data.  Experiments are driven by a JSON config file; flags override
config fields.  Exit codes are stable: 0 success, 1 validation error,
2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import DataError, ValidationError
from .features import DEFAULT_DIM, extract_features
from .fusion import apply_fusion, parse_fusion_spec, run_channel_pipeline
from .gallery import SplitSpec, apply_split, load_gallery, save_gallery
from .imageio import CHANNELS, load_manifest, prepare_plane, read_pnm_file
from .matching import (
    METRICS,
    build_score_tensor,
    load_scores_csv,
    person_score,
    save_scores_csv,
)
from .pipeline import (
    DEFAULT_WINDOW,
    enroll_subjects,
    extract_subject_features,
    summarize_tensor,
)
from .significance import (
    SignificanceParams,
    min_resolvable_error_rate,
    required_n,
    simplified_n,
)
from .synth import PLACEMENTS, SynthSpec, generate_dataset
from .verification import (
    det_curve,
    eer as eer_of,
    render_det_svg,
    save_det_csv,
    split_intra_inter,
    trial_counts,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    # route argparse failures through our exit-code contract (1, not 2)
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


@dataclass
class ExperimentConfig:
    """Aggregated experiment parameters; see README for the JSON schema."""

    manifest: Path
    train_indices: tuple[int, ...] = (1, 2, 3, 4, 5)
    test_indices: tuple[int, ...] = (6, 7, 8, 9, 10)
    window: int = DEFAULT_WINDOW
    dim: int = DEFAULT_DIM
    metrics: tuple[str, ...] = ("mse",)
    channel: str = "gray"
    c_miss: float = 1.0
    c_fa: float = 1.0
    output_dir: Path | None = None

    def split(self) -> SplitSpec:
        return SplitSpec.from_iterables(self.train_indices, self.test_indices)

    def validate(self) -> None:
        if not self.manifest.is_file():
            raise ValidationError(f"manifest file does not exist: {self.manifest}")
        if self.window < 1:
            raise ValidationError("window must be >= 1")
        if not 1 <= self.dim <= self.window * self.window:
            raise ValidationError(
                f"dim must be in [1, window^2] = [1, {self.window * self.window}]"
            )
        for m in self.metrics:
            if m not in METRICS:
                raise ValidationError(f"unknown metric {m!r} (choose from {METRICS})")
        if self.channel not in CHANNELS:
            raise ValidationError(f"unknown channel {self.channel!r} (choose from {CHANNELS})")
        if self.c_miss < 0 or self.c_fa < 0:
            raise ValidationError("DCF costs must be >= 0")
        try:
            self.split()
        except ValueError as exc:
            raise ValidationError(f"bad split: {exc}") from exc

    def payload(self) -> dict:
        return {
            "manifest": str(self.manifest),
            "train_indices": list(self.train_indices),
            "test_indices": list(self.test_indices),
            "window": self.window,
            "dim": self.dim,
            "metrics": list(self.metrics),
            "channel": self.channel,
            "dcf": {"c_miss": self.c_miss, "c_fa": self.c_fa},
            "output_dir": str(self.output_dir) if self.output_dir else None,
        }

    def sha256(self) -> str:
        canonical = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _as_indices(value, name: str) -> tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a list of integers: {exc}") from exc


def load_config(path: str | Path, overrides: argparse.Namespace) -> ExperimentConfig:
    """Read the JSON config, apply flag overrides, validate."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"config file does not exist: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")

    known = {
        "manifest", "train_indices", "test_indices", "window", "dim",
        "metric", "metrics", "channel", "dcf", "output_dir",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config fields: {sorted(unknown)}")

    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    if "manifest" not in raw:
        raise ValidationError("config is missing the 'manifest' field")
    metrics = raw.get("metrics", raw.get("metric", "mse"))
    if isinstance(metrics, str):
        metrics = [m for m in metrics.split(",") if m.strip()]
    dcf_raw = raw.get("dcf", {})

    cfg = ExperimentConfig(
        manifest=resolve(raw["manifest"]),
        train_indices=_as_indices(raw.get("train_indices", [1, 2, 3, 4, 5]), "train_indices"),
        test_indices=_as_indices(raw.get("test_indices", [6, 7, 8, 9, 10]), "test_indices"),
        window=int(raw.get("window", DEFAULT_WINDOW)),
        dim=int(raw.get("dim", DEFAULT_DIM)),
        metrics=tuple(str(m).lower() for m in metrics),
        channel=str(raw.get("channel", "gray")).lower(),
        c_miss=float(dcf_raw.get("c_miss", 1.0)),
        c_fa=float(dcf_raw.get("c_fa", 1.0)),
        output_dir=resolve(raw["output_dir"]) if raw.get("output_dir") else None,
    )

    for name in ("window", "dim"):
        value = getattr(overrides, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(overrides, "channel", None):
        cfg.channel = overrides.channel.lower()
    if getattr(overrides, "metric", None):
        cfg.metrics = tuple(m.lower() for m in overrides.metric)
    if getattr(overrides, "train_indices", None):
        cfg.train_indices = _as_indices(overrides.train_indices, "train_indices")
    if getattr(overrides, "test_indices", None):
        cfg.test_indices = _as_indices(overrides.test_indices, "test_indices")
    cfg.validate()
    return cfg


def _provenance(cfg: ExperimentConfig) -> dict:
    return {
        "tool_version": __version__,
        "config_sha256": cfg.sha256(),
        "config": cfg.payload(),
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")


def cmd_enroll(args) -> int:
    cfg = load_config(args.config, args)
    out = Path(args.out)
    manifest = load_manifest(cfg.manifest)
    train, _ = apply_split(manifest, cfg.split())
    features = extract_subject_features(train, cfg.channel, cfg.dim, cfg.window)
    gallery = enroll_subjects(features)
    meta = {
        "window": cfg.window,
        "tool_version": __version__,
        "config_sha256": cfg.sha256(),
    }
    save_gallery(gallery, out, meta=meta)
    _write_json(out / "provenance.json", _provenance(cfg))
    print(
        f"enrolled {gallery.n_templates} templates for {gallery.n_subjects} subjects "
        f"(dim={gallery.feature_dim}, channel={gallery.channel}) -> {out}"
    )
    return EXIT_OK


def _summary_row(summary) -> dict:
    return {
        "metric": summary.metric,
        "identification_rate": summary.identification.rate,
        "successes": summary.identification.successes,
        "errors": summary.identification.errors,
        "eer": summary.eer,
        "min_dcf": summary.min_dcf,
        "min_dcf_threshold": summary.min_dcf_threshold,
    }


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config, args)
    gallery, meta = load_gallery(args.gallery)
    window = int(meta.get("window", cfg.window))
    out = Path(args.out) if args.out else (cfg.output_dir or Path("results"))
    out.mkdir(parents=True, exist_ok=True)

    manifest = load_manifest(cfg.manifest)
    _, test = apply_split(manifest, cfg.split())
    probes = extract_subject_features(test, gallery.channel, gallery.feature_dim, window)

    single = len(cfg.metrics) == 1
    rows = []
    for metric in cfg.metrics:
        tensor = build_score_tensor(probes, gallery, metric)
        summary = summarize_tensor(tensor, cfg.c_miss, cfg.c_fa)
        rows.append(_summary_row(summary))

        tag = "" if single else f"_{metric}"
        save_scores_csv(tensor, out / f"scores{tag}.csv")
        trials = split_intra_inter(tensor)
        points = det_curve(trials)
        save_det_csv(points, out / f"det{tag}.csv")
        if args.svg:
            (out / f"det{tag}.svg").write_text(render_det_svg(points, summary.eer))
        print(
            f"[{metric}] identification rate {summary.identification.rate:.4f} "
            f"({summary.identification.successes}/{summary.identification.trials}), "
            f"EER {summary.eer:.4f}, min DCF {summary.min_dcf}"
        )

    counts = trial_counts(
        len(tensor.probe_subjects), len(tensor.gallery_subjects), tensor.n_trials
    )
    results = {
        **_provenance(cfg),
        "window": window,
        "trial_counts": {
            "genuine": counts.genuine,
            "impostor": counts.impostor,
            "total": counts.total,
        },
        "min_resolvable_error_rate_simplified": min_resolvable_error_rate(counts.total),
        "rows": rows,
    }
    _write_json(out / "results.json", results)
    print(f"results -> {out / 'results.json'}")
    return EXIT_OK


def cmd_identify(args) -> int:
    gallery, meta = load_gallery(args.gallery)
    window = int(meta.get("window", DEFAULT_WINDOW))
    metric = args.metric
    img = read_pnm_file(args.image)
    plane = prepare_plane(img, gallery.channel, window)
    probe = extract_features(plane, gallery.feature_dim, gallery.channel)
    best_subject, best_distance = None, None
    for subject in gallery.subject_ids:  # lexicographic; first wins ties
        d = person_score(probe, gallery.templates_of(subject), metric)
        if best_distance is None or d < best_distance:
            best_subject, best_distance = subject, d
    print(json.dumps({"subject": best_subject, "distance": best_distance, "metric": metric}))
    return EXIT_OK


def cmd_det_export(args) -> int:
    tensor = load_scores_csv(args.scores)
    trials = split_intra_inter(tensor)
    points = det_curve(trials)
    save_det_csv(points, args.out)
    if args.svg:
        Path(args.svg).write_text(render_det_svg(points, eer_of(trials)))
    print(f"det curve ({len(points)} points) -> {args.out}")
    return EXIT_OK


_CHANNEL_ROW_ORDER = {"r": 0, "g": 1, "b": 2, "y": 3, "gray": 4}


def cmd_fuse_eval(args) -> int:
    cfg = load_config(args.config, args)
    specs = [parse_fusion_spec(s) for s in args.fusion]
    metric = cfg.metrics[0]
    out = Path(args.out) if args.out else (cfg.output_dir or Path("results"))
    out.mkdir(parents=True, exist_ok=True)

    channels = {c for spec in specs for c in spec.channels}
    if args.include_y:
        channels.add("y")
    manifest = load_manifest(cfg.manifest)
    split = cfg.split()

    runs = {}
    for channel in sorted(channels, key=lambda c: _CHANNEL_ROW_ORDER.get(c, 9)):
        runs[channel] = run_channel_pipeline(
            manifest, split, channel, metric, cfg.dim, cfg.window, cfg.c_miss, cfg.c_fa
        )

    table = []
    for channel, run in runs.items():
        table.append((channel.upper(), run.summary))
    tensors = {c: r.tensor for c, r in runs.items()}
    for spec in specs:
        fused = apply_fusion(spec, tensors)
        table.append((f"score-fusion:{spec.label()}", summarize_tensor(fused, cfg.c_miss, cfg.c_fa)))

    csv_path = out / "fusion_results.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["input_signal", "identification_rate", "eer", "min_dcf_ptrue_0.5", "min_dcf_ptrue_empirical"]
        )
        for label, summary in table:
            writer.writerow(
                [
                    label,
                    f"{summary.identification.rate:.6f}",
                    f"{summary.eer:.6f}",
                    f"{summary.min_dcf['0.5']:.6f}",
                    f"{summary.min_dcf['empirical']:.6f}",
                ]
            )
    for label, summary in table:
        print(
            f"{label}: rate {summary.identification.rate:.4f}, eer {summary.eer:.4f}, "
            f"min DCF@0.5 {summary.min_dcf['0.5']:.4f}"
        )
    print(f"fusion table -> {csv_path}")
    return EXIT_OK


def cmd_sigsize(args) -> int:
    if (args.p is None) == (args.n is None):
        raise _UsageError("sigsize: provide exactly one of --p or --n")
    if not args.iid:
        print(
            "note: the sizing bound assumes i.i.d. errors; correlated samples "
            "need a larger N (pass --iid to silence this)",
            file=sys.stderr,
        )
    if args.p is not None:
        params = SignificanceParams(args.alpha, args.beta, args.p)
        payload = {
            "alpha": args.alpha,
            "beta": args.beta,
            "p": args.p,
            "required_n_exact": required_n(params),
            "required_n_simplified": simplified_n(args.p),
        }
        print(
            f"error rate {args.p:g} needs N >= {payload['required_n_exact']} "
            f"(exact rule) / {payload['required_n_simplified']} (simplified 100/P rule)"
        )
    else:
        payload = {
            "alpha": args.alpha,
            "beta": args.beta,
            "n": args.n,
            "min_error_rate_exact": min_resolvable_error_rate(args.n, "exact", args.alpha, args.beta),
            "min_error_rate_simplified": min_resolvable_error_rate(args.n, "simplified"),
        }
        print(
            f"N = {args.n} resolves error rates down to "
            f"{payload['min_error_rate_simplified']:.6g} (simplified) / "
            f"{payload['min_error_rate_exact']:.6g} (exact)"
        )
    print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def cmd_synth_data(args) -> int:
    try:
        spec = SynthSpec(
            subjects=args.subjects,
            samples=args.samples,
            noise=args.noise,
            seed=args.seed,
            width=args.width,
            height=args.height,
            placement=args.placement,
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    manifest_path = generate_dataset(spec, args.out)
    print(f"synthetic dataset ({spec.subjects} subjects x {spec.samples} samples) -> {manifest_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="facedct", description=__doc__)
    parser.add_argument("--version", action="version", version=f"facedct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--window", type=int, help="canonical analysis window side")
        p.add_argument("--dim", type=int, help="retained DCT coefficients per face")
        p.add_argument("--channel", choices=CHANNELS, help="input signal")
        p.add_argument("--metric", action="append", choices=METRICS, help="distance metric (repeatable)")
        p.add_argument("--train-indices", dest="train_indices", help="comma-separated 1-based sample indices")
        p.add_argument("--test-indices", dest="test_indices", help="comma-separated 1-based sample indices")

    p = sub.add_parser("enroll", help="build and persist a gallery from the training split")
    add_config_flags(p)
    p.add_argument("--out", required=True, help="gallery output directory")
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("evaluate", help="score the test split against a gallery")
    add_config_flags(p)
    p.add_argument("--gallery", required=True, help="gallery directory from 'enroll'")
    p.add_argument("--out", help="results directory (default: config output_dir)")
    p.add_argument("--svg", action="store_true", help="also render det.svg")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("identify", help="identify a single probe image")
    p.add_argument("--gallery", required=True)
    p.add_argument("--image", required=True, help="probe PGM/PPM file")
    p.add_argument("--metric", choices=METRICS, default="mse")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("det-export", help="DET curve CSV from a scores CSV")
    p.add_argument("--scores", required=True, help="scores.csv written by 'evaluate'")
    p.add_argument("--out", required=True, help="det CSV output path")
    p.add_argument("--svg", help="optional det SVG output path")
    p.set_defaults(func=cmd_det_export)

    p = sub.add_parser("fuse-eval", help="per-channel runs plus score-level fusion")
    add_config_flags(p)
    p.add_argument(
        "--fusion",
        action="append",
        required=True,
        help="fusion spec, e.g. 'sum:R,G,B' or 'w:0.3R+0.59G+0.11B' (repeatable)",
    )
    p.add_argument("--include-y", action="store_true", help="add a feature-level luminance row")
    p.add_argument("--out", help="results directory")
    p.set_defaults(func=cmd_fuse_eval)

    p = sub.add_parser("sigsize", help="test-set size for statistical significance")
    p.add_argument("--alpha", type=float, default=0.05, help="risk of understating the error rate")
    p.add_argument("--beta", type=float, default=0.2, help="relative error margin")
    p.add_argument("--p", type=float, help="expected error rate (solve for N)")
    p.add_argument("--n", type=int, help="trial count (solve for smallest resolvable rate)")
    p.add_argument("--iid", action="store_true", help="assert samples are independent")
    p.set_defaults(func=cmd_sigsize)

    p = sub.add_parser("synth-data", help="generate a deterministic synthetic dataset")
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma in [0,1] units")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--placement", choices=PLACEMENTS, default="gray", help="where the identity signal lives")
    p.add_argument("--out", required=True, help="dataset directory")
    p.set_defaults(func=cmd_synth_data)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
