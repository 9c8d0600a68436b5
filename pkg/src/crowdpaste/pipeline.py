"""Operator-facing pipeline commands wiring the library modules together.

Flow: ``extract-bboxes`` turns masks into YOLO label files, ``build-bank``
cuts sprites into a reusable bank, ``augment`` plans and composites synthetic
crowded scenes, ``evaluate`` scores predictions against truths, and
``replay-plan`` re-composites a saved plan byte-for-byte.

Every augmented sample derives its random streams from a stable hash of
(image stem, sample index), so outputs are bit-identical across reruns and
worker counts, and adding images never perturbs existing outputs.
"""

from __future__ import annotations

import csv
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .annotations import (
    label_components,
    read_labels,
    read_normalized_labels,
    to_normalized,
    write_labels,
)
from .compositor import composite
from .config import PipelineConfig
from .evaluation import count_summary, iou_histogram, match_boxes
from .imgio import find_image_for_stem, list_image_stems, load_image, load_mask, save_image
from .object_bank import SpriteObject, cut_sprites, load_bank, save_bank
from .placement import load_plan, plan_deng, plan_psada, save_plan
from .reporting import save_count_figure, save_iou_histogram_figure
from .sampling import RngStream, stable_stream_index

logger = logging.getLogger(__name__)

__all__ = [
    "cmd_extract_bboxes",
    "cmd_build_bank",
    "cmd_augment",
    "cmd_evaluate",
    "cmd_replay_plan",
]

AUGMENT_SUBDIR = "augmented"
PASTED_CLASS_ID = 0


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _mask_stems(config: PipelineConfig) -> list[str]:
    masks_dir = config.masks_path
    if not masks_dir.is_dir():
        raise FileNotFoundError(f"masks directory not found: {masks_dir}")
    return list_image_stems(masks_dir)


def cmd_extract_bboxes(config: PipelineConfig) -> int:
    """Generate one YOLO label file per mask; report per-image box counts."""
    try:
        stems = _mask_stems(config)
    except FileNotFoundError as exc:
        return _fail(str(exc))

    labels_dir = config.labels_path
    labels_dir.mkdir(parents=True, exist_ok=True)
    config.output_root.mkdir(parents=True, exist_ok=True)

    rows = []
    missing = 0
    total_boxes = 0
    for stem in stems:
        if find_image_for_stem(config.images_path, stem) is None:
            rows.append([stem, "missing_image", 0, 0])
            missing += 1
            continue
        mask_path = find_image_for_stem(config.masks_path, stem)
        mask = load_mask(mask_path)
        height, width = mask.shape
        _, components = label_components(mask, config.connectivity)
        kept = [c for c in components if c.area >= config.min_area]
        dropped = len(components) - len(kept)
        labels = [to_normalized(c.box, width, height, PASTED_CLASS_ID) for c in kept]
        write_labels(labels, labels_dir / f"{stem}.txt")
        rows.append([stem, "ok", len(kept), dropped])
        total_boxes += len(kept)

    report_path = config.output_root / "extract_report.csv"
    _write_csv(report_path, ["stem", "status", "boxes", "dropped"], rows)
    print(f"extract-bboxes: {len(stems)} masks, {total_boxes} boxes -> {labels_dir}")
    if missing:
        return _fail(f"{missing} mask(s) have no matching image (see {report_path})")
    return 0


def cmd_build_bank(config: PipelineConfig) -> int:
    """Cut sprites from every (image, mask) pair into the bank directory."""
    try:
        stems = _mask_stems(config)
    except FileNotFoundError as exc:
        return _fail(str(exc))

    sprites: list[SpriteObject] = []
    for stem in stems:
        image_path = find_image_for_stem(config.images_path, stem)
        if image_path is None:
            logger.warning("skipping %s: no matching image", stem)
            continue
        mask_path = find_image_for_stem(config.masks_path, stem)
        image = load_image(image_path)
        mask = load_mask(mask_path)
        sprites.extend(
            cut_sprites(image, mask, stem, config.connectivity, config.min_area)
        )

    manifest = save_bank(sprites, config.bank_path)
    print(f"build-bank: {len(manifest.entries)} sprites -> {config.bank_path}")
    if not manifest.entries:
        logger.warning("bank is empty; augment will refuse to run")
    return 0


# Worker-process state for parallel augmentation; populated by the initializer.
_WORKER: dict = {}


def _init_augment_worker(config: PipelineConfig) -> None:
    _WORKER["config"] = config
    _WORKER["bank"] = load_bank(config.bank_path)


def _augment_task(task: tuple[str, int]) -> list:
    return _augment_sample(_WORKER["config"], _WORKER["bank"], *task)


def _augment_sample(
    config: PipelineConfig, bank: list[SpriteObject], stem: str, sample_index: int
) -> list:
    """Plan + composite one (base image, sample index) pair; returns a manifest row."""
    image_path = find_image_for_stem(config.images_path, stem)
    base = load_image(image_path)
    height, width = base.shape[:2]
    label_path = config.labels_path / f"{stem}.txt"
    base_labels = read_normalized_labels(label_path)

    image_id = f"{stem}_aug{sample_index}"
    plan_rng = RngStream(
        config.master_seed, stable_stream_index(stem, sample_index, "plan")
    )
    if config.engine == "psada":
        plan = plan_psada(width, height, len(bank), config.psada, plan_rng, image_id)
    else:
        existing = read_labels(label_path, width, height)
        plan = plan_deng(width, height, existing, len(bank), config.deng, plan_rng, image_id)
    plan.source_stem = stem
    plan.sample_index = sample_index

    comp_rng = RngStream(
        config.master_seed, stable_stream_index(stem, sample_index, "composite")
    )
    sample = composite(
        base, base_labels, plan, bank, config.jitter, comp_rng, config.visibility_threshold
    )

    out_dir = config.output_root / AUGMENT_SUBDIR
    out_image = out_dir / "images" / f"{image_id}.png"
    out_labels = out_dir / "labels" / f"{image_id}.txt"
    out_plan = out_dir / "plans" / f"{image_id}.json"
    save_image(out_image, sample.image)
    write_labels(sample.labels, out_labels)
    save_plan(plan, out_plan)
    return [
        image_path.name,
        str(out_plan.relative_to(config.output_root)),
        str(out_image.relative_to(config.output_root)),
        str(out_labels.relative_to(config.output_root)),
        width,
        height,
    ]


def cmd_augment(config: PipelineConfig) -> int:
    """Produce augmented images, labels, and plan files for the whole dataset."""
    try:
        bank = load_bank(config.bank_path)
    except Exception as exc:
        return _fail(f"cannot load bank: {exc}")
    if not bank:
        return _fail(f"bank at {config.bank_path} is empty")

    if not config.images_path.is_dir():
        return _fail(f"images directory not found: {config.images_path}")
    stems = list_image_stems(config.images_path)
    if not stems:
        return _fail(f"no base images in {config.images_path}")
    missing_labels = [s for s in stems if not (config.labels_path / f"{s}.txt").exists()]
    if missing_labels:
        return _fail(
            f"missing label files for {len(missing_labels)} image(s) "
            f"(run extract-bboxes first): {', '.join(missing_labels[:5])}"
        )

    out_dir = config.output_root / AUGMENT_SUBDIR
    for sub in ("images", "labels", "plans"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    tasks = [(stem, k) for stem in stems for k in range(config.samples_per_base_image)]
    if config.worker_count == 1:
        rows = [_augment_sample(config, bank, stem, k) for stem, k in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=config.worker_count,
            initializer=_init_augment_worker,
            initargs=(config,),
        ) as pool:
            rows = list(pool.map(_augment_task, tasks))

    _write_csv(
        out_dir / "manifest.csv",
        ["source_image", "plan_file", "output_image", "output_labels"],
        [row[:4] for row in rows],
    )
    _write_csv(
        out_dir / "dims.csv",
        ["image_id", "width", "height"],
        [[Path(row[2]).stem, row[4], row[5]] for row in rows],
    )
    print(
        f"augment: {len(rows)} samples ({config.engine}, seed {config.master_seed}, "
        f"{config.worker_count} worker(s)) -> {out_dir}"
    )
    return 0


def _read_dims(dims_file: Path) -> dict[str, tuple[int, int]]:
    dims = {}
    with open(dims_file, newline="") as handle:
        for row in csv.reader(handle):
            if not row or row[0] == "image_id":
                continue
            dims[row[0]] = (int(row[1]), int(row[2]))
    return dims


def cmd_evaluate(
    config: PipelineConfig,
    predictions_dir: Path,
    truths_dir: Path,
    dims_file: Path | None = None,
    out_dir: Path | None = None,
) -> int:
    """Match predictions to truths per image; write delimited reports and figures."""
    predictions_dir = Path(predictions_dir)
    truths_dir = Path(truths_dir)
    for directory in (predictions_dir, truths_dir):
        if not directory.is_dir():
            return _fail(f"label directory not found: {directory}")

    pred_stems = {p.stem for p in predictions_dir.glob("*.txt")}
    truth_stems = {p.stem for p in truths_dir.glob("*.txt")}
    only_pred = sorted(pred_stems - truth_stems)
    only_truth = sorted(truth_stems - pred_stems)
    if only_pred or only_truth:
        return _fail(
            f"label stems differ: only in predictions {only_pred[:5]}, "
            f"only in truths {only_truth[:5]}"
        )
    stems = sorted(truth_stems)
    if not stems:
        return _fail("no label files to evaluate")

    if dims_file is None:
        for candidate in (truths_dir / "dims.csv", truths_dir.parent / "dims.csv"):
            if candidate.exists():
                dims_file = candidate
                break
    if dims_file is None or not Path(dims_file).exists():
        return _fail("no image-dimensions manifest found; pass --dims")
    dims = _read_dims(Path(dims_file))
    missing_dims = [s for s in stems if s not in dims]
    if missing_dims:
        return _fail(f"dims manifest missing {len(missing_dims)} stem(s): {missing_dims[:5]}")

    out_dir = Path(out_dir) if out_dir is not None else config.output_root / "eval"
    figures_dir = out_dir / "figures"
    figures_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    match_rows = []
    count_rows = []
    pred_counts = []
    matched_counts = []
    truth_counts = []
    for stem in stems:
        width, height = dims[stem]
        preds = read_labels(predictions_dir / f"{stem}.txt", width, height)
        truths = read_labels(truths_dir / f"{stem}.txt", width, height)
        report = match_boxes(preds, truths, config.iou_threshold, image_id=stem)
        reports.append(report)
        for pi, ti, value in report.matches:
            match_rows.append([stem, "match", pi, ti, f"{value:.6f}"])
        for pi in report.unmatched_predictions:
            match_rows.append([stem, "unmatched_prediction", pi, "", ""])
        for ti in report.unmatched_truths:
            match_rows.append([stem, "unmatched_truth", "", ti, ""])
        count_rows.append([stem, len(preds), len(report.matches), len(truths)])
        pred_counts.append((stem, len(preds)))
        matched_counts.append((stem, len(report.matches)))
        truth_counts.append((stem, len(truths)))

    predicted_summary = count_summary(pred_counts, truth_counts)
    matched_summary = count_summary(matched_counts, truth_counts)
    histogram = iou_histogram(reports, config.histogram_bin_width)
    total_matches = sum(count for _, count in histogram)

    _write_csv(out_dir / "matches.csv",
               ["image_id", "record", "pred_index", "truth_index", "iou"], match_rows)
    _write_csv(out_dir / "counts.csv",
               ["image_id", "predicted", "matched", "truth"], count_rows)
    _write_csv(out_dir / "histogram.csv",
               ["bin_lower", "count"],
               [[f"{edge:.6f}", count] for edge, count in histogram])
    _write_csv(
        out_dir / "summary.csv",
        ["metric", "value"],
        [
            ["images", len(stems)],
            ["mean_predicted", f"{predicted_summary.mean_predicted:.6f}"],
            ["mean_matched", f"{matched_summary.mean_predicted:.6f}"],
            ["mean_truth", f"{predicted_summary.mean_truth:.6f}"],
            ["ratio_predicted", f"{predicted_summary.ratio:.6f}"],
            ["ratio_matched", f"{matched_summary.ratio:.6f}"],
            ["total_matches", total_matches],
        ],
    )
    save_iou_histogram_figure(histogram, figures_dir / "iou_histogram.png")
    save_count_figure(predicted_summary, matched_summary, figures_dir / "mean_counts.png")

    print(
        f"evaluate: {len(stems)} images | mean predicted {predicted_summary.mean_predicted:.2f}, "
        f"mean truth {predicted_summary.mean_truth:.2f}, ratio {predicted_summary.ratio:.3f} | "
        f"matched ratio {matched_summary.ratio:.3f} | reports -> {out_dir}"
    )
    return 0


def cmd_replay_plan(
    config: PipelineConfig, plan_file: Path, out_dir: Path | None = None
) -> int:
    """Re-composite a saved plan; reproduces the original augment output."""
    plan_file = Path(plan_file)
    if not plan_file.exists():
        return _fail(f"plan file not found: {plan_file}")
    plan = load_plan(plan_file)
    if not plan.source_stem:
        return _fail(f"plan {plan_file} records no source stem; cannot locate the base image")

    image_path = find_image_for_stem(config.images_path, plan.source_stem)
    if image_path is None:
        return _fail(f"base image for stem {plan.source_stem!r} not found in {config.images_path}")
    label_path = config.labels_path / f"{plan.source_stem}.txt"
    if not label_path.exists():
        return _fail(f"base labels not found: {label_path}")

    try:
        bank = load_bank(config.bank_path)
    except Exception as exc:
        return _fail(f"cannot load bank: {exc}")

    base = load_image(image_path)
    base_labels = read_normalized_labels(label_path)
    comp_rng = RngStream(
        plan.seed_info[0],
        stable_stream_index(plan.source_stem, plan.sample_index, "composite"),
    )
    sample = composite(
        base, base_labels, plan, bank, config.jitter, comp_rng, config.visibility_threshold
    )

    out_dir = Path(out_dir) if out_dir is not None else config.output_root / "replayed"
    out_dir.mkdir(parents=True, exist_ok=True)
    out_image = out_dir / f"{plan.image_id}.png"
    out_labels = out_dir / f"{plan.image_id}.txt"
    save_image(out_image, sample.image)
    write_labels(sample.labels, out_labels)
    print(f"replay-plan: {plan.image_id} -> {out_image}")
    return 0
