"""Dataset manifests, per-individual MST labels, and image loading.

A manifest is a set of image records grouped by individual. Skin tone labels
live at the individual level: every image of the same person carries the same
MST class (1..10), and any disagreement between records is a hard error.
"""

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

MST_MIN = 1
MST_MAX = 10
MST_CLASSES = tuple(range(MST_MIN, MST_MAX + 1))


class ManifestError(ValueError):
    """Malformed manifest file or integrity violation."""


class LabelFileError(ValueError):
    """Malformed annotator label file."""


class ImageDecodeError(ValueError):
    """Unreadable or corrupt image file."""


def validate_mst(value):
    """Check an MST class label, returning it as int. Raises ValueError outside 1..10."""
    label = int(value)
    if label != value or not (MST_MIN <= label <= MST_MAX):
        raise ValueError(f"MST label must be an integer in {MST_MIN}..{MST_MAX}, got {value!r}")
    return label


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    path: str
    individual_id: str
    source_dataset: str = ""
    label: int | None = None

    def __post_init__(self):
        if not self.path:
            raise ManifestError(f"image {self.image_id!r}: path is empty")
        if self.label is not None:
            object.__setattr__(self, "label", validate_mst(self.label))


@dataclass
class Individual:
    individual_id: str
    label: int | None = None
    image_ids: list = field(default_factory=list)


@dataclass
class DatasetManifest:
    name: str
    individuals: dict = field(default_factory=dict)   # individual_id -> Individual
    images: dict = field(default_factory=dict)        # image_id -> ImageRecord

    def __len__(self):
        return len(self.images)

    def labeled_individuals(self):
        return {i: ind for i, ind in self.individuals.items() if ind.label is not None}

    def subset(self, image_ids, name=None):
        """New manifest restricted to the given image ids (individuals re-derived)."""
        records = [self.images[i] for i in sorted(image_ids)]
        return build_manifest(records, name or self.name)

    def validate(self):
        """Exhaustive referential-integrity scan; raises ManifestError on violation."""
        seen_owner = {}
        for ind_id, ind in self.individuals.items():
            if not ind.image_ids:
                raise ManifestError(f"individual {ind_id!r} has no images")
            for img_id in ind.image_ids:
                rec = self.images.get(img_id)
                if rec is None:
                    raise ManifestError(f"individual {ind_id!r} references missing image {img_id!r}")
                if rec.individual_id != ind_id:
                    raise ManifestError(f"image {img_id!r} tagged {rec.individual_id!r} "
                                        f"but listed under {ind_id!r}")
                if img_id in seen_owner:
                    raise ManifestError(f"image {img_id!r} belongs to two individuals: "
                                        f"{seen_owner[img_id]!r} and {ind_id!r}")
                seen_owner[img_id] = ind_id
                if rec.label is not None and ind.label is not None and rec.label != ind.label:
                    raise ManifestError(f"image {img_id!r} label {rec.label} conflicts with "
                                        f"individual {ind_id!r} label {ind.label}")
        for img_id, rec in self.images.items():
            if rec.individual_id not in self.individuals:
                raise ManifestError(f"image {img_id!r} references missing individual "
                                    f"{rec.individual_id!r}")
            if img_id not in seen_owner:
                raise ManifestError(f"image {img_id!r} not listed under any individual")


def build_manifest(records, name=""):
    """Group image records by individual and validate label consistency."""
    images = {}
    individuals = {}
    for rec in records:
        if rec.image_id in images:
            raise ManifestError(f"duplicate image_id {rec.image_id!r}")
        images[rec.image_id] = rec
        ind = individuals.setdefault(rec.individual_id, Individual(rec.individual_id))
        ind.image_ids.append(rec.image_id)
        if rec.label is not None:
            if ind.label is None:
                ind.label = rec.label
            elif ind.label != rec.label:
                raise ManifestError(
                    f"individual {rec.individual_id!r} has conflicting labels "
                    f"{ind.label} and {rec.label} (image {rec.image_id!r})")
    for ind in individuals.values():
        ind.image_ids.sort()
    manifest = DatasetManifest(name=name, individuals=individuals, images=images)
    manifest.validate()
    return manifest


def load_manifest(path, name=None):
    """Load a JSONL manifest: one image record per line.

    Line schema: {"image_id": str, "path": str, "individual_id": str,
                  "source_dataset": str, "label": int|null}
    """
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                records.append(ImageRecord(
                    image_id=obj["image_id"],
                    path=obj["path"],
                    individual_id=obj["individual_id"],
                    source_dataset=obj.get("source_dataset", ""),
                    label=obj.get("label"),
                ))
            except (KeyError, ValueError) as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from exc
    return build_manifest(records, name if name is not None else path.stem)


def save_manifest(manifest, path):
    """Write a manifest back to JSONL (records sorted by image_id)."""
    with open(path, "w", encoding="utf-8") as fh:
        for img_id in sorted(manifest.images):
            rec = manifest.images[img_id]
            fh.write(json.dumps({
                "image_id": rec.image_id,
                "path": rec.path,
                "individual_id": rec.individual_id,
                "source_dataset": rec.source_dataset,
                "label": rec.label,
            }, sort_keys=True) + "\n")


def import_csv(path, name=None, path_col="file", label_col=None,
               individual_col=None, source_dataset="csv"):
    """Import a FairFace-style CSV label table as a manifest.

    Each row becomes one image record; when the table has no individual
    column (FairFace has none), every image is its own individual.
    """
    path = Path(path)
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or path_col not in reader.fieldnames:
            raise ManifestError(f"{path}: missing column {path_col!r}")
        for lineno, row in enumerate(reader, start=2):
            img_path = row[path_col]
            image_id = Path(img_path).stem
            label = None
            if label_col is not None and row.get(label_col, "") not in ("", None):
                try:
                    label = validate_mst(int(row[label_col]))
                except ValueError as exc:
                    raise ManifestError(f"{path}:{lineno}: {exc}") from exc
            records.append(ImageRecord(
                image_id=image_id,
                path=img_path,
                individual_id=row[individual_col] if individual_col else image_id,
                source_dataset=source_dataset,
                label=label,
            ))
    return build_manifest(records, name if name is not None else path.stem)


def load_image(path):
    """Decode a PNG/JPEG file to an (H, W, 3) uint8 RGB array.

    Alpha is dropped, grayscale is expanded to three channels, and 16-bit
    sources are truncated to their high byte (with a warning).
    """
    try:
        with PILImage.open(path) as img:
            if img.mode in ("I", "I;16", "I;16B", "I;16L", "I;16N"):
                warnings.warn(f"{path}: 16-bit image truncated to 8-bit")
                arr = np.asarray(img, dtype=np.uint32)
                arr = (arr >> 8).astype(np.uint8) if arr.max() > 255 else arr.astype(np.uint8)
                return np.repeat(arr[:, :, None], 3, axis=2)
            rgb = img.convert("RGB")
            return np.asarray(rgb, dtype=np.uint8).copy()
    except ImageDecodeError:
        raise
    except Exception as exc:
        raise ImageDecodeError(f"cannot decode image {path}: {exc}") from exc


@dataclass(frozen=True)
class LabelRecord:
    individual_id: str
    annotator_id: str
    label: int
    timestamp: int  # UTC seconds

    def __post_init__(self):
        object.__setattr__(self, "label", validate_mst(self.label))


def load_label_file(path):
    """Read one annotator label file (JSONL of LabelRecord lines)."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(LabelRecord(
                    individual_id=obj["individual_id"],
                    annotator_id=obj["annotator_id"],
                    label=obj["label"],
                    timestamp=int(obj.get("timestamp", 0)),
                ))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise LabelFileError(f"{path}:{lineno}: {exc}") from exc
    return records


def append_label(path, record):
    """Append one label record to a JSONL sink (atomic single write + flush)."""
    line = json.dumps({
        "individual_id": record.individual_id,
        "annotator_id": record.annotator_id,
        "label": record.label,
        "timestamp": record.timestamp,
    }, sort_keys=True) + "\n"
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line)
        fh.flush()


def merge_label_files(paths):
    """Merge annotator label files into a subjects x raters ratings matrix.

    Duplicate (individual, annotator) pairs are an error. Individuals rated
    by fewer than two annotators are kept in the matrix but flagged: the
    agreement subset (see RatingsMatrix.shared_subjects) excludes them.
    """
    from .metrics import RatingsMatrix

    if not paths:
        raise LabelFileError("at least one label file is required")
    cells = {}
    for path in paths:
        for rec in load_label_file(path):
            key = (rec.individual_id, rec.annotator_id)
            if key in cells:
                raise LabelFileError(
                    f"duplicate rating for individual {rec.individual_id!r} "
                    f"by annotator {rec.annotator_id!r}")
            cells[key] = rec.label
    subjects = sorted({k[0] for k in cells})
    raters = sorted({k[1] for k in cells})
    srow = {s: i for i, s in enumerate(subjects)}
    rcol = {r: j for j, r in enumerate(raters)}
    values = np.full((len(subjects), len(raters)), np.nan)
    for (ind, rater), label in cells.items():
        values[srow[ind], rcol[rater]] = label
    matrix = RatingsMatrix(subjects=subjects, raters=raters, values=values)
    if not matrix.shared_subjects():
        warnings.warn("no individual was rated by two or more annotators; "
                      "agreement subset is empty")
    return matrix
