"""Dataset auditing: MST class distributions and out-of-domain evaluation.

A trained model is run read-only over a manifest; per-image failures
(missing mask, unreadable file, empty region) are counted as skipped with
their reason and excluded from the percentage denominator.
"""

import importlib.resources
import json
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from . import metrics
from .data import MST_CLASSES, load_image
from .descriptors import FeatureConfig, descriptor_layout, feature_vector
from .segmentation import DEFAULT_BOUNDS, RegionKind, resolve_mask


class AuditError(RuntimeError):
    pass


@dataclass
class DistributionReport:
    dataset: str
    counts: list                      # per MST class, index 0 = class 1
    percentages: list                 # over classified images, sums to 100
    skipped: list = field(default_factory=list)  # [(image_id, reason)]

    @property
    def classified(self):
        return int(sum(self.counts))

    def to_dict(self):
        return {"dataset": self.dataset,
                "counts": [int(c) for c in self.counts],
                "percentages": [float(p) for p in self.percentages],
                "classified": self.classified,
                "skipped": [{"image_id": i, "reason": r} for i, r in self.skipped]}


@dataclass
class OodEvaluation:
    dataset: str
    acc: float
    ooacc: float
    confusion: np.ndarray
    skipped: list = field(default_factory=list)

    def to_dict(self):
        return {"dataset": self.dataset, "acc": float(self.acc),
                "ooacc": float(self.ooacc),
                "confusion": self.confusion.astype(int).tolist(),
                "skipped": [{"image_id": i, "reason": r} for i, r in self.skipped]}


def classify_manifest(manifest, model, region, feature_config=FeatureConfig(),
                      mask_dir=None, bounds=DEFAULT_BOUNDS, image_loader=None):
    """Classify every image in a manifest; failures become (id, reason) skips.

    Returns (predictions dict image_id -> label, skipped list). The model's
    layout hash is checked against the configured feature extraction before
    any image is touched.
    """
    layout = descriptor_layout(feature_config)
    if model.layout_hash != layout.hash():
        raise AuditError(
            f"model was trained on layout {model.layout_hash}, but the "
            f"configured extraction produces {layout.hash()}")
    loader = image_loader or load_image
    predictions = {}
    skipped = []
    for image_id in sorted(manifest.images):
        record = manifest.images[image_id]
        try:
            image = loader(record.path)
        except Exception as exc:
            skipped.append((image_id, f"unreadable image: {exc}"))
            continue
        try:
            mask = resolve_mask(image, image_id, region, mask_dir, bounds)
            features = feature_vector(image, mask, region, feature_config)
        except Exception as exc:
            skipped.append((image_id, str(exc)))
            continue
        scores = model.predict_scores(features.values[None, :], layout.hash())
        predictions[image_id] = int(np.argmax(scores[0]) + 1)
    return predictions, skipped


def audit_dataset(manifest, model, region, feature_config=FeatureConfig(),
                  mask_dir=None, bounds=DEFAULT_BOUNDS, image_loader=None):
    """Per-class MST distribution of a dataset under a trained model."""
    predictions, skipped = classify_manifest(
        manifest, model, region, feature_config, mask_dir, bounds, image_loader)
    if not predictions:
        raise AuditError(f"no image in {manifest.name!r} could be classified "
                         f"({len(skipped)} skipped)")
    counts = np.bincount(np.array(list(predictions.values())) - 1,
                         minlength=len(MST_CLASSES))
    percentages = counts / counts.sum() * 100.0
    return DistributionReport(dataset=manifest.name, counts=counts.tolist(),
                              percentages=percentages.tolist(), skipped=skipped)


def evaluate_ood(manifest, model, region, feature_config=FeatureConfig(),
                 mask_dir=None, bounds=DEFAULT_BOUNDS, image_loader=None):
    """Acc / OOAcc of a model on a fully labeled out-of-domain manifest."""
    unlabeled = [i for i, ind in manifest.individuals.items() if ind.label is None]
    if unlabeled:
        raise AuditError(f"manifest {manifest.name!r} has unlabeled individuals: "
                         f"{sorted(unlabeled)[:5]}")
    predictions, skipped = classify_manifest(
        manifest, model, region, feature_config, mask_dir, bounds, image_loader)
    if not predictions:
        raise AuditError("no image could be classified")
    ids = sorted(predictions)
    y_true = [manifest.individuals[manifest.images[i].individual_id].label
              for i in ids]
    y_pred = [predictions[i] for i in ids]
    report = metrics.evaluate(y_true, y_pred)
    return OodEvaluation(dataset=manifest.name, acc=report.acc,
                         ooacc=report.ooacc, confusion=report.confusion,
                         skipped=skipped)


# ---------------------------------------------------------------------------
# Report rendering

def load_palette(path=None):
    """MST swatch palette: list of {"mst": 1..10, "hex": "#rrggbb"}.

    Defaults to the packaged palette taken from the published MST scale.
    """
    if path is None:
        source = importlib.resources.files("skintone").joinpath(
            "assets/mst_palette.json")
        entries = json.loads(source.read_text(encoding="utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            entries = json.load(fh)
    swatches = sorted(entries, key=lambda e: e["mst"])
    if [e["mst"] for e in swatches] != list(MST_CLASSES):
        raise ValueError("palette must contain exactly the MST classes 1..10")
    return swatches


def _svg_bars(report, palette):
    bar_w, gap, chart_h, pad = 48, 12, 220, 30
    width = pad * 2 + 10 * bar_w + 9 * gap
    height = chart_h + pad * 2 + 20
    top = max(max(report.percentages), 1e-9)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}">',
             f'<text x="{pad}" y="{pad - 10}" font-size="14">'
             f'{escape(report.dataset)} - MST class distribution (%)</text>']
    hexes = {e["mst"]: e["hex"] for e in palette}
    for i, pct in enumerate(report.percentages):
        cls = i + 1
        h = pct / top * chart_h
        x = pad + i * (bar_w + gap)
        y = pad + chart_h - h
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w}" '
                     f'height="{h:.1f}" fill="{hexes[cls]}" stroke="#444"/>')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{pad + chart_h + 16}" '
                     f'font-size="12" text-anchor="middle">{cls}</text>')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{max(y - 4, 12):.1f}" '
                     f'font-size="10" text-anchor="middle">{pct:.1f}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def emit_report(report, fmt, path, palette=None):
    """Write a DistributionReport as json, csv, or an svg bar chart."""
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("mst_class,count,percentage\n")
            for i, (count, pct) in enumerate(zip(report.counts,
                                                 report.percentages)):
                fh.write(f"{i + 1},{count},{pct!r}\n")
    elif fmt == "svg":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_svg_bars(report, palette or load_palette()))
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {fmt!r} (use json|csv|svg)")
