"""Ordinal classification metrics and inter-annotator agreement statistics.

Labels are MST classes 1..10. Off-by-one accuracy (OOAcc) counts a prediction
as correct when it lands within one class of the truth, which matches the
ordinal structure of the scale. bAcc / wOOAcc are the macro (per-class mean)
versions of Acc / OOAcc over classes that actually occur.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .data import MST_CLASSES

N_CLASSES = len(MST_CLASSES)


class UndefinedMetricError(ValueError):
    """The statistic has no defined value on this input (e.g. zero variance)."""


# ---------------------------------------------------------------------------
# Confusion matrix and derived scores

def confusion(y_true, y_pred):
    """10x10 count matrix, rows = true class, cols = predicted class."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("empty prediction set")
    for arr, which in ((y_true, "true"), (y_pred, "predicted")):
        if arr.min() < 1 or arr.max() > N_CLASSES:
            raise ValueError(f"{which} labels outside 1..{N_CLASSES}")
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(cm, (y_true - 1, y_pred - 1), 1)
    return cm


def row_normalized(cm):
    """Confusion matrix with each row scaled to sum to 1 (zero rows stay zero)."""
    cm = np.asarray(cm, dtype=float)
    sums = cm.sum(axis=1, keepdims=True)
    return np.divide(cm, sums, out=np.zeros_like(cm), where=sums > 0)


@dataclass
class EvaluationReport:
    confusion: np.ndarray
    acc: float
    bacc: float
    ooacc: float
    wooacc: float
    per_class_recall: np.ndarray
    per_class_ooacc: np.ndarray
    support: np.ndarray

    def to_dict(self):
        return {
            "confusion": self.confusion.astype(int).tolist(),
            "acc": float(self.acc),
            "bacc": float(self.bacc),
            "ooacc": float(self.ooacc),
            "wooacc": float(self.wooacc),
            "per_class_recall": [float(v) for v in self.per_class_recall],
            "per_class_ooacc": [float(v) for v in self.per_class_ooacc],
            "support": self.support.astype(int).tolist(),
        }


def scores(cm, wooacc_weighting="macro"):
    """Compute Acc / bAcc / OOAcc / wOOAcc from a confusion matrix.

    wOOAcc is the macro mean of per-class off-by-one recall by default;
    wooacc_weighting="frequency" weights classes by their support instead.
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = cm.sum()
    if total <= 0:
        raise ValueError("empty confusion matrix")
    support = cm.sum(axis=1)
    supported = support > 0

    acc = np.trace(cm) / total

    recall = np.zeros(N_CLASSES)
    recall[supported] = np.diag(cm)[supported] / support[supported]
    bacc = recall[supported].mean()

    band = np.abs(np.subtract.outer(np.arange(N_CLASSES), np.arange(N_CLASSES))) <= 1
    ooacc = cm[band].sum() / total

    oo_hits = (cm * band).sum(axis=1)
    per_class_oo = np.zeros(N_CLASSES)
    per_class_oo[supported] = oo_hits[supported] / support[supported]
    if wooacc_weighting == "macro":
        wooacc = per_class_oo[supported].mean()
    elif wooacc_weighting == "frequency":
        wooacc = (per_class_oo[supported] * support[supported]).sum() / total
    else:
        raise ValueError(f"unknown wooacc_weighting {wooacc_weighting!r}")

    return EvaluationReport(
        confusion=cm, acc=float(acc), bacc=float(bacc), ooacc=float(ooacc),
        wooacc=float(wooacc), per_class_recall=recall,
        per_class_ooacc=per_class_oo, support=support,
    )


def evaluate(y_true, y_pred, wooacc_weighting="macro"):
    """Shorthand for scores(confusion(y_true, y_pred))."""
    return scores(confusion(y_true, y_pred), wooacc_weighting=wooacc_weighting)


def save_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def confusion_to_csv(cm, path):
    """Write the raw confusion counts as CSV (header = predicted class)."""
    cm = np.asarray(cm, dtype=int)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("true\\pred," + ",".join(str(c) for c in MST_CLASSES) + "\n")
        for i, row in enumerate(cm):
            fh.write(str(i + 1) + "," + ",".join(str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Inter-annotator agreement

@dataclass
class RatingsMatrix:
    """Subjects x raters grid of MST labels; NaN marks a missing rating."""
    subjects: list
    raters: list
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.subjects), len(self.raters)):
            raise ValueError("ratings matrix shape does not match subject/rater lists")

    def shared_subjects(self, min_raters=2):
        """Subject ids rated by at least min_raters annotators."""
        counts = np.sum(~np.isnan(self.values), axis=1)
        return [s for s, c in zip(self.subjects, counts) if c >= min_raters]

    def complete_cases(self):
        """Rows where every rater gave a rating."""
        mask = ~np.isnan(self.values).any(axis=1)
        return self.values[mask]


def _pairwise_fraction(values, tol):
    """Mean over rater pairs of the fraction of co-rated subjects within tol."""
    n_raters = values.shape[1]
    if n_raters < 2:
        raise ValueError("at least two raters are required")
    fractions = []
    for a in range(n_raters):
        for b in range(a + 1, n_raters):
            both = ~np.isnan(values[:, a]) & ~np.isnan(values[:, b])
            if not both.any():
                continue
            diff = np.abs(values[both, a] - values[both, b])
            fractions.append(float(np.mean(diff <= tol)))
    if not fractions:
        raise UndefinedMetricError("no pair of raters shares any rated subject")
    return float(np.mean(fractions))


def exact_agreement(ratings):
    """Raw agreement: mean over rater pairs of the identical-label fraction."""
    return _pairwise_fraction(ratings.values, tol=0)


def offbyone_agreement(ratings):
    """Off-by-one agreement: labels within one MST class count as a match."""
    return _pairwise_fraction(ratings.values, tol=1)


def icc3(ratings):
    """ICC(3,1): two-way mixed effects, consistency, single rater.

    Computed from complete cases only. ICC = (MS_s - MS_e) / (MS_s + (k-1) MS_e)
    where MS_s is the between-subject and MS_e the residual mean square of the
    two-way (subject x rater) ANOVA with raters fixed.
    """
    data = ratings.complete_cases()
    n, k = data.shape
    if n < 2 or k < 2:
        raise ValueError(f"ICC needs >=2 complete subjects and >=2 raters, got {n}x{k}")
    grand = data.mean()
    ss_total = ((data - grand) ** 2).sum()
    ss_subjects = k * ((data.mean(axis=1) - grand) ** 2).sum()
    ss_raters = n * ((data.mean(axis=0) - grand) ** 2).sum()
    ss_error = ss_total - ss_subjects - ss_raters
    ms_subjects = ss_subjects / (n - 1)
    ms_error = ss_error / ((n - 1) * (k - 1))
    if ms_subjects < 1e-12:
        raise UndefinedMetricError("zero between-subject variance: ICC undefined")
    return float((ms_subjects - ms_error) / (ms_subjects + (k - 1) * ms_error))


def _interval_delta(a, b, _counts=None):
    return (a - b) ** 2


def _nominal_delta(a, b, _counts=None):
    return float(a != b)


def _ordinal_delta(a, b, counts):
    # Krippendorff's ordinal difference: squared sum of coincidence-marginal
    # frequencies of every value between a and b, minus half the endpoints.
    lo, hi = min(a, b), max(a, b)
    between = sum(n for v, n in counts.items() if lo <= v <= hi)
    return (between - (counts[a] + counts[b]) / 2.0) ** 2


_DELTAS = {"interval": _interval_delta, "nominal": _nominal_delta,
           "ordinal": _ordinal_delta}


def krippendorff_alpha(ratings, metric="interval"):
    """Krippendorff's alpha = 1 - D_o/D_e over incomplete multi-rater data.

    Observed disagreement D_o averages the metric over all co-rated value
    pairs within each subject (weighted 1/(m_u - 1)); expected disagreement
    D_e averages it over all pairable values regardless of subject. The
    interval metric (a-b)^2 is the default for the equally spaced MST scale.
    """
    if metric not in _DELTAS:
        raise ValueError(f"metric must be one of {sorted(_DELTAS)}, got {metric!r}")
    delta = _DELTAS[metric]

    units = []
    for row in ratings.values:
        vals = row[~np.isnan(row)]
        if vals.size >= 2:
            units.append(vals)
    if not units:
        raise UndefinedMetricError("no subject was rated by two or more annotators")

    pooled = np.concatenate(units)
    n_total = pooled.size
    uniq, cnt = np.unique(pooled, return_counts=True)
    counts = dict(zip(uniq.tolist(), cnt.tolist()))

    d_o = 0.0
    for vals in units:
        m = vals.size
        pair_sum = 0.0
        for i in range(m):
            for j in range(m):
                if i != j:
                    pair_sum += delta(vals[i], vals[j], counts)
        d_o += pair_sum / (m - 1)
    d_o /= n_total

    d_e = 0.0
    for va, na in counts.items():
        for vb, nb in counts.items():
            npairs = na * (na - 1) if va == vb else na * nb
            d_e += npairs * delta(va, vb, counts)
    d_e /= n_total * (n_total - 1)

    if d_e == 0.0:
        raise UndefinedMetricError("all ratings identical: expected disagreement is zero")
    return float(1.0 - d_o / d_e)
