"""Command-line surface: align, enroll, score, evaluate, roc, openset, synth, report.

Every command is deterministic given identical inputs and flags, writes its
outputs plus exactly one run manifest (inputs are content-hashed so published
score files can be re-evaluated verifiably), and reports failures as a single
``error: ...`` line on stderr with a nonzero exit code.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import __version__
from .alignment import (
    align_sample,
    choose_spec,
    read_image,
    read_landmarks,
    resolve_alignment,
    write_image,
)
from .embeddings import (
    enroll_all,
    load_embedding_file,
    load_template_file,
    save_template_file,
    score_pairs,
)
from .errors import BiomevalError, EvaluationError, FormatError
from .evaluator import (
    ThresholdPolicy,
    evaluate_scores,
    openset_matches_from_records,
    save_report,
)
from .metrics import (
    interpolate_tpir_at_fpir,
    openset_curve,
    roc_points,
    save_openset_csv,
    save_roc_csv,
)
from .plotting import (
    plot_comparison_bars,
    plot_openset_curve,
    plot_rate_bars,
    plot_roc_curves,
)
from .protocol import comparison_pairs, load_protocol, save_protocol
from .scores import ScoreSet, load_score_file, save_score_file, split_by_label
from .synth import (
    LabelShift,
    ScoreSynthConfig,
    SubProtocolNoise,
    SynthConfig,
    generate,
    generate_scores,
)

POLICY_CHOICES = {
    "combined": "combined_dev_fmr",
    "per-subprotocol": "per_subprotocol_dev_fmr",
    "on-eval": "on_eval_fmr",
    "eer-hter": "eer_dev_hter_eval",
}


@dataclass
class RunManifest:
    """Reproducibility record written next to every command's outputs."""

    command: str
    config_hash: str
    inputs: list[dict] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    seeds: list[int] = field(default_factory=list)
    duration_seconds: float = 0.0


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _config_hash(params: dict) -> str:
    return hashlib.sha256(
        json.dumps(params, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()


def _write_manifest(
    manifest_path: Path,
    command: str,
    params: dict,
    inputs: list[Path],
    outputs: list[Path],
    started: float,
    seeds: list[int] | None = None,
) -> None:
    manifest = RunManifest(
        command=command,
        config_hash=_config_hash(params),
        inputs=[{"path": str(p), "sha256": _sha256(p)} for p in inputs],
        outputs=[str(p) for p in outputs],
        seeds=seeds or [],
        duration_seconds=time.monotonic() - started,
    )
    manifest_path.write_text(
        json.dumps(manifest.__dict__, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BiomevalError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(1)

    return wrapper


def _safe_label(label: str) -> str:
    if not label:
        return "all"
    return "".join(c if (c.isalnum() or c in "._+-") else "_" for c in label)


@click.group()
@click.version_option(version=__version__, prog_name="biomeval")
def cli():
    """Biometric recognition evaluation engine."""


@cli.command()
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path), help="Directory of input PNG images.")
@click.option("--annotations", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path), help="Directory of landmark files (<image-stem>.txt).")
@click.option("--spec", "spec_arg", required=True, help="Alignment preset name or JSON spec file.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path), help="Output directory for aligned PNGs.")
@click.option("--jobs", default=1, show_default=True, envvar="BIOMEVAL_JOBS", help="Worker cap for parallel alignment.")
@_handle_errors
def align(images: Path, annotations: Path, spec_arg: str, out_dir: Path, jobs: int):
    """Crop and align every image using its annotated landmarks.

    Falls back from the two-eye anchors to eye+mouth when the spec provides a
    fallback and an eye is not annotated.
    """
    started = time.monotonic()
    profile = resolve_alignment(spec_arg)
    image_paths = sorted(images.glob("*.png"))
    if not image_paths:
        raise BiomevalError(f"no PNG images in '{images}'")
    annotation_paths = []
    for img_path in image_paths:
        ann = annotations / (img_path.stem + ".txt")
        if not ann.exists():
            raise BiomevalError(f"no annotation for image '{img_path.name}' (expected '{ann}')")
        annotation_paths.append(ann)

    out_dir.mkdir(parents=True, exist_ok=True)

    def process(img_path: Path, ann_path: Path) -> Path:
        landmarks = read_landmarks(ann_path)
        spec, effective = choose_spec(profile, landmarks)
        aligned = align_sample(read_image(img_path), effective, spec)
        out_path = out_dir / img_path.name
        write_image(aligned, out_path)
        return out_path

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(process, image_paths, annotation_paths))
    else:
        outputs = [process(i, a) for i, a in zip(image_paths, annotation_paths)]

    _write_manifest(
        out_dir / "manifest.json",
        "align",
        {"spec": str(spec_arg), "images": str(images), "annotations": str(annotations), "jobs": jobs},
        image_paths + annotation_paths,
        outputs,
        started,
    )
    click.echo(f"aligned {len(outputs)} images into {out_dir}")


@cli.command()
@click.option("--protocol", "protocol_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@_handle_errors
def enroll(protocol_path: Path, embeddings_path: Path, out_path: Path):
    """Average enrollment embeddings into one template per model (CSV output)."""
    started = time.monotonic()
    protocol = load_protocol(protocol_path)
    embeddings = load_embedding_file(embeddings_path)
    templates = enroll_all(protocol, embeddings)
    save_template_file(templates.values(), out_path)
    _write_manifest(
        Path(str(out_path) + ".manifest.json"),
        "enroll",
        {"protocol": str(protocol_path), "embeddings": str(embeddings_path)},
        [protocol_path, embeddings_path],
        [out_path],
        started,
    )
    click.echo(f"enrolled {len(templates)} templates into {out_path}")


@cli.command()
@click.option("--protocol", "protocol_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--templates", "templates_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Template CSV from 'enroll'; omitted templates are enrolled on the fly.")
@click.option("--group", default="all", show_default=True, type=click.Choice(["dev", "eval", "all"]))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--jobs", default=1, show_default=True, envvar="BIOMEVAL_JOBS", help="Worker cap for parallel scoring.")
@_handle_errors
def score(protocol_path: Path, embeddings_path: Path, templates_path: Path | None,
          group: str, out_path: Path, jobs: int):
    """Score every model-vs-probe comparison pair into the canonical score CSV."""
    started = time.monotonic()
    protocol = load_protocol(protocol_path)
    embeddings = load_embedding_file(embeddings_path)
    if templates_path is not None:
        templates = load_template_file(templates_path)
    else:
        templates = enroll_all(protocol, embeddings)

    # In a split protocol "all" means both groups back to back, never the
    # meaningless cross-group comparisons.
    if protocol.kind == "verification_split" and group == "all":
        pairs = comparison_pairs(protocol, "dev") + comparison_pairs(protocol, "eval")
    else:
        pairs = comparison_pairs(protocol, group)

    if jobs > 1:
        chunk = max(1, (len(pairs) + jobs - 1) // jobs)
        blocks = [pairs[i : i + chunk] for i in range(0, len(pairs), chunk)]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(
                lambda block: score_pairs(protocol, block, templates, embeddings), blocks
            )
        records = [r for block in results for r in block]
    else:
        records = score_pairs(protocol, pairs, templates, embeddings)

    save_score_file(records, out_path)
    inputs = [protocol_path, embeddings_path] + ([templates_path] if templates_path else [])
    _write_manifest(
        Path(str(out_path) + ".manifest.json"),
        "score",
        {"protocol": str(protocol_path), "embeddings": str(embeddings_path),
         "templates": str(templates_path) if templates_path else None,
         "group": group, "jobs": jobs},
        inputs,
        [out_path],
        started,
    )
    click.echo(f"wrote {len(records)} scores to {out_path}")


@cli.command()
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--policy", "policy_name", default="combined", show_default=True, type=click.Choice(sorted(POLICY_CHOICES)))
@click.option("--fmr-target", default=0.001, show_default=True, help="FMR target for threshold selection (ignored by eer-hter).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--curves", "curves_dir", type=click.Path(file_okay=False, path_type=Path), help="Also write per-sub-protocol ROC CSVs and figures here.")
@_handle_errors
def evaluate(scores_path: Path, policy_name: str, fmr_target: float, out_path: Path,
             curves_dir: Path | None):
    """Select thresholds per the policy and report dev/eval rates (JSON output)."""
    started = time.monotonic()
    records = load_score_file(scores_path)
    variant = POLICY_CHOICES[policy_name]
    policy = ThresholdPolicy(
        variant=variant,
        fmr_target=None if variant == "eer_dev_hter_eval" else fmr_target,
    )
    if variant == "on_eval_fmr":
        click.echo(
            "warning: on-eval thresholds are selected on the eval set itself; "
            "the resulting rates are not operational",
            err=True,
        )
    result = evaluate_scores(records, policy)
    save_report(result, out_path)
    outputs = [out_path]

    if curves_dir is not None:
        curves_dir.mkdir(parents=True, exist_ok=True)
        eval_records = [r for r in records if r.group == "eval"]
        curves = {}
        for label, recs in sorted(split_by_label(eval_records).items()):
            subset = ScoreSet(recs)
            if subset.genuine_count < 1 or subset.impostor_count < 1:
                continue  # a one-sided label has no ROC
            curves[label] = roc_points(subset)
            csv_path = curves_dir / f"roc_eval_{_safe_label(label)}.csv"
            save_roc_csv(curves[label], csv_path)
            outputs.append(csv_path)
        pooled = ScoreSet(eval_records)
        if pooled.genuine_count and pooled.impostor_count:
            pooled_points = roc_points(pooled)
            csv_path = curves_dir / "roc_eval_combined.csv"
            save_roc_csv(pooled_points, csv_path)
            outputs.append(csv_path)
            curves["combined"] = pooled_points
        roc_fig = curves_dir / "roc_eval.png"
        plot_roc_curves(curves, roc_fig, f"eval ROC ({scores_path.name})")
        rates_fig = curves_dir / "rates_eval.png"
        plot_rate_bars(result.eval_report, rates_fig, f"eval rates, policy {policy_name}")
        outputs += [roc_fig, rates_fig]

    _write_manifest(
        Path(str(out_path) + ".manifest.json"),
        "evaluate",
        {"scores": str(scores_path), "policy": policy_name, "fmr_target": fmr_target,
         "curves": str(curves_dir) if curves_dir else None},
        [scores_path],
        outputs,
        started,
    )
    click.echo(f"wrote report to {out_path}")


@cli.command()
@click.option("--protocol", "protocol_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@_handle_errors
def roc(protocol_path: Path, scores_path: Path, out_dir: Path):
    """Per-sub-protocol ROC curves for a ROC-only protocol (no dev/eval split)."""
    started = time.monotonic()
    from .evaluator import roc_evaluate

    protocol = load_protocol(protocol_path)
    records = load_score_file(scores_path)
    curves = roc_evaluate(protocol, records)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for label, points in sorted(curves.items()):
        csv_path = out_dir / f"roc_{_safe_label(label)}.csv"
        save_roc_csv(points, csv_path)
        outputs.append(csv_path)
    fig_path = out_dir / "roc.png"
    plot_roc_curves(curves, fig_path, f"ROC ({protocol.name})")
    outputs.append(fig_path)
    _write_manifest(
        out_dir / "manifest.json",
        "roc",
        {"protocol": str(protocol_path), "scores": str(scores_path)},
        [protocol_path, scores_path],
        outputs,
        started,
    )
    click.echo(f"wrote {len(curves)} ROC curves to {out_dir}")


@cli.command()
@click.option("--protocol", "protocol_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Embedding CSV; templates are enrolled on the fly.")
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="Precomputed score CSV instead of embeddings.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Output curve CSV (threshold,fpir,tpir).")
@_handle_errors
def openset(protocol_path: Path, embeddings_path: Path | None, scores_path: Path | None,
            out_path: Path):
    """Open-set identification: rank-1 TPIR over FPIR curve plus summary."""
    started = time.monotonic()
    if (embeddings_path is None) == (scores_path is None):
        raise EvaluationError("give exactly one of --embeddings or --scores")
    protocol = load_protocol(protocol_path)
    if protocol.kind != "open_set":
        raise EvaluationError(
            f"openset needs an open_set protocol, got '{protocol.kind}'"
        )
    if embeddings_path is not None:
        from .embeddings import score_protocol

        embeddings = load_embedding_file(embeddings_path)
        templates = enroll_all(protocol, embeddings)
        records = score_protocol(protocol, templates, embeddings, group="all")
        inputs = [protocol_path, embeddings_path]
    else:
        records = load_score_file(scores_path)
        inputs = [protocol_path, scores_path]

    curve = openset_curve(openset_matches_from_records(protocol, records))
    save_openset_csv(curve, out_path)
    fig_path = out_path.with_suffix(".png")
    plot_openset_curve(curve, fig_path, f"open-set ROC ({protocol.name})")
    summary = {
        "closed_set_rank1": curve.closed_set_rank1,
        "tpir_at_fpir": {
            repr(target): interpolate_tpir_at_fpir(curve, target)
            for target in (0.001, 0.01, 0.1, 1.0)
        },
    }
    summary_path = out_path.with_suffix(".summary.json")
    summary_path.write_text(
        json.dumps(summary, indent=2, ensure_ascii=False) + "\n", encoding="utf-8", newline="\n"
    )
    _write_manifest(
        Path(str(out_path) + ".manifest.json"),
        "openset",
        {"protocol": str(protocol_path),
         "embeddings": str(embeddings_path) if embeddings_path else None,
         "scores": str(scores_path) if scores_path else None},
        inputs,
        [out_path, fig_path, summary_path],
        started,
    )
    click.echo(
        f"wrote open-set curve to {out_path} (closed-set rank-1 {curve.closed_set_rank1:.4f})"
    )


def _parse_synth_config(path: Path) -> tuple[str, SynthConfig | ScoreSynthConfig]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot parse synth config '{path}': {exc}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"synth config '{path}' is not a JSON object")
    mode = raw.pop("mode", "embeddings")

    if mode == "embeddings":
        labels = raw.pop("sub_protocol_labels", None)
        config = SynthConfig(
            seed=int(raw.pop("seed")),
            n_subjects=int(raw.pop("n_subjects")),
            samples_per_subject=int(raw.pop("samples_per_subject")),
            enroll_per_subject=int(raw.pop("enroll_per_subject")),
            dim=int(raw.pop("dim")),
            noise_sigma=float(raw.pop("noise_sigma")),
            n_unknown_subjects=int(raw.pop("n_unknown_subjects", 0)),
            kind=raw.pop("kind", None),
            name=str(raw.pop("name", "synthetic")),
            fmr_target=float(raw.pop("fmr_target", 0.001)),
        )
        if labels is not None:
            config.sub_protocol_labels = [
                SubProtocolNoise(label=str(l), extra_sigma=0.0)
                if isinstance(l, str)
                else SubProtocolNoise(
                    label=str(l["label"]), extra_sigma=float(l.get("extra_sigma", 0.0))
                )
                for l in labels
            ]
    elif mode == "scores":
        labels = raw.pop("labels", None)
        config = ScoreSynthConfig(
            seed=int(raw.pop("seed")),
            n_genuine=int(raw.pop("n_genuine")),
            n_impostor=int(raw.pop("n_impostor")),
            genuine_mean=float(raw.pop("genuine_mean")),
            genuine_std=float(raw.pop("genuine_std")),
            impostor_mean=float(raw.pop("impostor_mean")),
            impostor_std=float(raw.pop("impostor_std")),
            groups=tuple(raw.pop("groups", ("dev", "eval"))),
        )
        if labels is not None:
            config.labels = [
                LabelShift(label=str(l))
                if isinstance(l, str)
                else LabelShift(
                    label=str(l["label"]),
                    genuine_shift=float(l.get("genuine_shift", 0.0)),
                    impostor_shift=float(l.get("impostor_shift", 0.0)),
                )
                for l in labels
            ]
    else:
        raise FormatError(f"unknown synth mode '{mode}'")
    if raw:
        raise FormatError(f"unknown synth config key '{sorted(raw)[0]}'")
    return mode, config


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path), help="JSON config; mode 'embeddings' (default) or 'scores'.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@_handle_errors
def synth(config_path: Path, out_dir: Path):
    """Generate a seeded synthetic protocol + embeddings (or a raw score set)."""
    started = time.monotonic()
    mode, config = _parse_synth_config(config_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    if mode == "embeddings":
        from .embeddings import save_embedding_file

        protocol, embeddings = generate(config)
        protocol_path = out_dir / "protocol.json"
        embeddings_path = out_dir / "embeddings.csv"
        save_protocol(protocol, protocol_path)
        save_embedding_file(embeddings, embeddings_path)
        outputs = [protocol_path, embeddings_path]
    else:
        scores = generate_scores(config)
        scores_path = out_dir / "scores.csv"
        save_score_file(scores.records, scores_path)
        outputs = [scores_path]
    _write_manifest(
        out_dir / "manifest.json",
        "synth",
        {"config": str(config_path), "mode": mode},
        [config_path],
        outputs,
        started,
        seeds=[config.seed],
    )
    click.echo(f"wrote synthetic {mode} to {out_dir}")


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.argument("reports", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@_handle_errors
def report(out_dir: Path, reports: tuple[Path, ...]):
    """Aggregate evaluation reports into one comparison table (CSV, Markdown, figure)."""
    started = time.monotonic()
    rows = []
    for path in reports:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            per_label = {
                label: entry["fnmr"]
                for label, entry in data["eval"]["per_sub_protocol"].items()
            }
            thresholds = data["thresholds"]
            rows.append(
                {
                    "name": path.stem,
                    "policy": data["policy"]["variant"],
                    "fmr_target": data["policy"]["fmr_target"],
                    "thresholds": thresholds,
                    "eval_fmr": data["eval"]["fmr"],
                    "eval_fnmr": data["eval"]["fnmr"],
                    "eval_hter": data["eval"]["hter"],
                    "per_label": per_label,
                }
            )
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise FormatError(f"'{path}' is not an evaluation report: {exc!r}") from exc

    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "comparison.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["name", "policy", "fmr_target", "thresholds", "eval_fmr", "eval_fnmr", "eval_hter"]
        )
        for row in rows:
            thresholds = ";".join(
                f"{k}={row['thresholds'][k]!r}" for k in sorted(row["thresholds"])
            )
            writer.writerow(
                [
                    row["name"],
                    row["policy"],
                    "" if row["fmr_target"] is None else repr(row["fmr_target"]),
                    thresholds,
                    repr(row["eval_fmr"]),
                    repr(row["eval_fnmr"]),
                    repr(row["eval_hter"]),
                ]
            )

    labels = sorted({label for row in rows for label in row["per_label"]})
    md_lines = [
        "# Evaluation comparison",
        "",
        "| name | policy | FMR target | eval FMR | eval FNMR | eval HTER |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for row in rows:
        target = "" if row["fmr_target"] is None else f"{row['fmr_target']:g}"
        md_lines.append(
            f"| {row['name']} | {row['policy']} | {target} "
            f"| {row['eval_fmr']:.6f} | {row['eval_fnmr']:.6f} | {row['eval_hter']:.6f} |"
        )
    md_lines += ["", "## Eval FNMR per sub-protocol", ""]
    md_lines.append("| sub-protocol | " + " | ".join(r["name"] for r in rows) + " |")
    md_lines.append("| --- |" + " --- |" * len(rows))
    for label in labels:
        cells = []
        for row in rows:
            value = row["per_label"].get(label)
            cells.append("n/a" if value is None else f"{value:.6f}")
        md_lines.append(f"| {label or '(all)'} | " + " | ".join(cells) + " |")
    md_path = out_dir / "comparison.md"
    md_path.write_text("\n".join(md_lines) + "\n", encoding="utf-8", newline="\n")

    fig_path = out_dir / "comparison.png"
    plot_comparison_bars(rows, fig_path, "eval FNMR per sub-protocol")

    _write_manifest(
        out_dir / "manifest.json",
        "report",
        {"reports": [str(p) for p in reports]},
        list(reports),
        [csv_path, md_path, fig_path],
        started,
    )
    click.echo(f"wrote comparison of {len(rows)} reports to {out_dir}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(130)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(2)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(exc.exit_code or 1)
    except BiomevalError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
