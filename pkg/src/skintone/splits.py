"""Leakage-safe dataset partitioning: IMG/IND splits, k-fold, balancing.

IMG splits shuffle images directly (leakage-prone when one person has many
photos); IND splits assign whole individuals so nobody appears on both sides
of a partition boundary. Both stratify by class label and are deterministic
given (manifest, parameters, seed): items are ordered by id before the
seeded shuffle, so manifest file order never matters.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import MST_CLASSES

PARTITION_NAMES = ("train", "val", "test")


class SplitError(ValueError):
    pass


@dataclass
class SplitPlan:
    mode: str  # "IMG" | "IND"
    partitions: dict  # name -> sorted list of image_ids
    seed: int
    provenance: dict = field(default_factory=dict)

    def individual_sets(self, manifest):
        """Per-partition sets of individual ids (for leakage checks)."""
        return {name: {manifest.images[i].individual_id for i in ids}
                for name, ids in self.partitions.items()}

    def to_dict(self):
        return {"mode": self.mode, "seed": self.seed,
                "partitions": {k: sorted(v) for k, v in self.partitions.items()},
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, obj):
        return cls(mode=obj["mode"], partitions={k: list(v) for k, v in
                                                 obj["partitions"].items()},
                   seed=obj["seed"], provenance=obj.get("provenance", {}))


def save_plan(plan, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_plan(path):
    with open(path, encoding="utf-8") as fh:
        return SplitPlan.from_dict(json.load(fh))


def _check_fractions(fractions):
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != len(PARTITION_NAMES):
        raise SplitError(f"expected {len(PARTITION_NAMES)} fractions "
                         f"(train, val, test), got {len(fractions)}")
    if any(f < 0 for f in fractions):
        raise SplitError("fractions must be non-negative")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise SplitError(f"fractions must sum to 1, got {sum(fractions)}")
    return fractions


def _largest_remainder(n, fractions):
    """Integer cut sizes summing to n, one per fraction (largest remainder)."""
    quotas = [f * n for f in fractions]
    base = [math.floor(q) for q in quotas]
    rest = n - sum(base)
    order = sorted(range(len(fractions)),
                   key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return base


def _grouped_by_class(items, label_of):
    """Sorted item ids per class, labeled items only."""
    groups = {c: [] for c in MST_CLASSES}
    for item in sorted(items):
        label = label_of(item)
        if label is not None:
            groups[label].append(item)
    return groups


def _stratified_cut(groups, fractions, seed, unit_name):
    """Shuffle each class group and cut it by the fractions."""
    active = [i for i, f in enumerate(fractions) if f > 0]
    rng = np.random.default_rng(seed)
    parts = {name: [] for name in PARTITION_NAMES}
    for cls in MST_CLASSES:
        members = groups[cls]
        if not members:
            continue
        if len(members) < len(active):
            raise SplitError(f"class {cls} has {len(members)} {unit_name}, "
                             f"fewer than the {len(active)} non-empty partitions")
        shuffled = [members[i] for i in rng.permutation(len(members))]
        sizes = _largest_remainder(len(members), fractions)
        start = 0
        for name, size in zip(PARTITION_NAMES, sizes):
            parts[name].extend(shuffled[start:start + size])
            start += size
    return parts


def split_by_images(manifest, fractions, seed):
    """IMG split: stratified, seeded partition of the labeled images."""
    fractions = _check_fractions(fractions)
    groups = _grouped_by_class(
        manifest.images,
        lambda i: manifest.individuals[manifest.images[i].individual_id].label)
    parts = _stratified_cut(groups, fractions, seed, "images")
    return SplitPlan(mode="IMG",
                     partitions={k: sorted(v) for k, v in parts.items()},
                     seed=seed, provenance={"fractions": list(fractions)})


def split_by_individuals(manifest, fractions, seed):
    """IND split: individuals are partitioned and all their images follow."""
    fractions = _check_fractions(fractions)
    groups = _grouped_by_class(manifest.individuals,
                               lambda i: manifest.individuals[i].label)
    ind_parts = _stratified_cut(groups, fractions, seed, "individuals")
    parts = {}
    for name, ind_ids in ind_parts.items():
        parts[name] = sorted(img for ind in ind_ids
                             for img in manifest.individuals[ind].image_ids)
    return SplitPlan(mode="IND", partitions=parts, seed=seed,
                     provenance={"fractions": list(fractions)})


def kfold_by_individual(manifest, k, seed):
    """Stratified k folds of individuals; fold sizes differ by <=1 per class."""
    if k < 2:
        raise SplitError(f"k must be >= 2, got {k}")
    groups = _grouped_by_class(manifest.individuals,
                               lambda i: manifest.individuals[i].label)
    rng = np.random.default_rng(seed)
    folds = {f"fold_{i}": [] for i in range(k)}
    for cls in MST_CLASSES:
        members = groups[cls]
        if not members:
            continue
        if len(members) < k:
            raise SplitError(f"class {cls} has {len(members)} individuals, "
                             f"fewer than k={k}")
        shuffled = [members[i] for i in rng.permutation(len(members))]
        for pos, ind in enumerate(shuffled):
            folds[f"fold_{pos % k}"].append(ind)
    partitions = {}
    for name, ind_ids in folds.items():
        partitions[name] = sorted(img for ind in ind_ids
                                  for img in manifest.individuals[ind].image_ids)
    return SplitPlan(mode="IND", partitions=partitions, seed=seed,
                     provenance={"k": k})


def build_custom_test(manifest, n_per_class=10, seed=0):
    """Hold out exactly n individuals per class (identity-leakage probe).

    Returns (plan with one "custom_test" partition, manifest of the rest).
    """
    groups = _grouped_by_class(manifest.individuals,
                               lambda i: manifest.individuals[i].label)
    rng = np.random.default_rng(seed)
    held = []
    for cls in MST_CLASSES:
        members = groups[cls]
        if len(members) < n_per_class:
            raise SplitError(f"class {cls} has only {len(members)} individuals, "
                             f"need {n_per_class}")
        shuffled = [members[i] for i in rng.permutation(len(members))]
        held.extend(shuffled[:n_per_class])
    held_images = sorted(img for ind in held
                         for img in manifest.individuals[ind].image_ids)
    plan = SplitPlan(mode="IND", partitions={"custom_test": held_images},
                     seed=seed, provenance={"n_per_class": n_per_class})
    held_set = set(held)
    remainder_ids = [img_id for img_id, rec in manifest.images.items()
                     if rec.individual_id not in held_set]
    return plan, manifest.subset(remainder_ids, name=f"{manifest.name}-remainder")


@dataclass
class BalancePlan:
    max_per_individual: int
    seed: int
    selected: list  # sorted image_ids
    per_class_counts: dict  # class -> selected image count

    def to_dict(self):
        return {"max_per_individual": self.max_per_individual, "seed": self.seed,
                "selected": sorted(self.selected),
                "per_class_counts": {str(k): v for k, v in
                                     sorted(self.per_class_counts.items())}}


def balance(manifest, m, seed):
    """Cap every individual at m images (1..5), chosen by seeded shuffle."""
    if not 1 <= m <= 5:
        raise SplitError(f"max images per individual must be in 1..5, got {m}")
    rng = np.random.default_rng(seed)
    selected = []
    per_class = {c: 0 for c in MST_CLASSES}
    for ind_id in sorted(manifest.individuals):
        ind = manifest.individuals[ind_id]
        images = sorted(ind.image_ids)
        take = min(m, len(images))
        picked = [images[i] for i in rng.permutation(len(images))[:take]]
        selected.extend(picked)
        if ind.label is not None:
            per_class[ind.label] += take
    return BalancePlan(max_per_individual=m, seed=seed, selected=sorted(selected),
                       per_class_counts=per_class)
