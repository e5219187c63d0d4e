import numpy as np
import pytest

from oracles import (oracle_confusion, oracle_icc3,
                     oracle_krippendorff_interval)
from skintone.metrics import (RatingsMatrix, UndefinedMetricError, confusion,
                              evaluate, exact_agreement, icc3,
                              krippendorff_alpha, offbyone_agreement,
                              row_normalized, scores)


def ratings_of(rows, raters=None):
    rows = np.asarray(rows, dtype=float)
    subjects = [f"s{i}" for i in range(rows.shape[0])]
    raters = raters or [f"r{j}" for j in range(rows.shape[1])]
    return RatingsMatrix(subjects=subjects, raters=raters, values=rows)


# ---------------------------------------------------------------------------
# Confusion and scores

def test_confusion_diagonal_for_perfect():
    y = np.array([1, 5, 10, 5, 3])
    cm = confusion(y, y)
    assert cm.sum() == 5
    assert (cm == np.diag(np.bincount(y - 1, minlength=10))).all()


def test_confusion_single_pair():
    cm = confusion([5], [7])
    assert cm[4, 6] == 1
    assert cm.sum() == 1


def test_confusion_matches_tally_oracle():
    rng = np.random.default_rng(0)
    y_true = rng.integers(1, 11, size=200)
    y_pred = rng.integers(1, 11, size=200)
    assert confusion(y_true, y_pred).tolist() == oracle_confusion(y_true, y_pred)


def test_confusion_rejects_mismatch_and_range():
    with pytest.raises(ValueError):
        confusion([1, 2], [1])
    with pytest.raises(ValueError):
        confusion([0], [1])
    with pytest.raises(ValueError):
        confusion([1], [11])


def test_perfect_scores_all_one():
    y = np.array([1, 2, 3, 4, 5, 6, 7, 8, 9, 10])
    report = scores(confusion(y, y))
    assert report.acc == report.bacc == report.ooacc == report.wooacc == 1.0


def test_scores_off_by_one_band():
    # predictions one class above truth -> acc 0, ooacc 1
    y_true = np.array([1, 2, 3, 4, 5])
    y_pred = y_true + 1
    report = evaluate(y_true, y_pred)
    assert report.acc == 0.0
    assert report.ooacc == 1.0
    assert report.wooacc == 1.0


def test_acc_leq_ooacc_property():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(1, 60))
        y_true = rng.integers(1, 11, size=n)
        y_pred = rng.integers(1, 11, size=n)
        report = evaluate(y_true, y_pred)
        assert report.acc <= report.ooacc + 1e-12
        assert report.bacc <= report.wooacc + 1e-12


def test_shifted_predictions_ooacc_geq_acc():
    rng = np.random.default_rng(2)
    y_true = rng.integers(1, 11, size=500)
    y_pred = rng.integers(1, 11, size=500)
    shifted = np.clip(y_pred + 1, 1, 10)
    base = evaluate(y_true, y_pred)
    assert evaluate(y_true, shifted).ooacc >= base.acc - 1e-12


def test_random_baseline_monte_carlo():
    rng = np.random.default_rng(3)
    n = 100_000
    y_true = np.repeat(np.arange(1, 11), n // 10)
    y_pred = rng.integers(1, 11, size=n)
    report = evaluate(y_true, y_pred)
    assert report.acc == pytest.approx(0.10, abs=0.01)
    assert report.ooacc == pytest.approx(0.28, abs=0.01)


def test_unsupported_classes_excluded_from_macro():
    y_true = np.array([1, 1, 2, 2])
    y_pred = np.array([1, 1, 2, 1])
    report = evaluate(y_true, y_pred)
    assert report.bacc == pytest.approx((1.0 + 0.5) / 2)
    assert report.support[2:].sum() == 0


def test_wooacc_frequency_weighting_equals_ooacc():
    rng = np.random.default_rng(4)
    y_true = rng.integers(1, 11, size=300)
    y_pred = rng.integers(1, 11, size=300)
    report = evaluate(y_true, y_pred, wooacc_weighting="frequency")
    assert report.wooacc == pytest.approx(report.ooacc)


def test_row_normalized():
    cm = confusion([1, 1, 2], [1, 2, 2])
    rn = row_normalized(cm)
    assert rn[0].sum() == pytest.approx(1.0)
    assert rn[5].sum() == 0.0


# ---------------------------------------------------------------------------
# Pairwise agreement

def test_identical_raters_agree_fully():
    ratings = ratings_of([[3, 3], [7, 7], [1, 1]])
    assert exact_agreement(ratings) == 1.0


def test_total_disagreement():
    ratings = ratings_of([[1, 5], [2, 8], [3, 9]])
    assert exact_agreement(ratings) == 0.0


def test_three_rater_pairwise_mean():
    rows = [[1, 1, 2], [2, 2, 2], [3, 4, 3], [5, 5, 6]]
    ratings = ratings_of(rows)
    # pairs: (r0,r1) agree on 3/4; (r0,r2) on 2/4; (r1,r2) on 1/4
    assert exact_agreement(ratings) == pytest.approx((3 / 4 + 2 / 4 + 1 / 4) / 3)


def test_offbyone_agreement():
    ratings = ratings_of([[4, 5], [7, 6], [1, 3]])
    assert offbyone_agreement(ratings) == pytest.approx(2 / 3)
    assert exact_agreement(ratings) == 0.0


def test_agreement_ignores_missing():
    ratings = ratings_of([[4, np.nan], [5, 5], [np.nan, 2], [7, 7]])
    assert exact_agreement(ratings) == 1.0


def test_agreement_no_overlap_error():
    ratings = ratings_of([[4, np.nan], [np.nan, 2]])
    with pytest.raises(UndefinedMetricError):
        exact_agreement(ratings)


# ---------------------------------------------------------------------------
# ICC(3,1)

def test_icc3_identical_raters():
    ratings = ratings_of([[1, 1], [5, 5], [9, 9], [3, 3]])
    assert icc3(ratings) == pytest.approx(1.0)


def test_icc3_constant_offset_is_still_one():
    base = np.array([2, 4, 6, 8, 10], dtype=float)
    ratings = ratings_of(np.stack([base, base + 1], axis=1))
    assert icc3(ratings) == pytest.approx(1.0)


def test_icc3_matches_anova_oracle():
    data = [[9, 2, 5], [6, 1, 3], [8, 4, 6], [7, 1, 2], [10, 5, 6], [6, 2, 4]]
    ratings = ratings_of(data)
    assert icc3(ratings) == pytest.approx(oracle_icc3(data), abs=1e-9)


def test_icc3_zero_subject_variance_undefined():
    ratings = ratings_of([[5, 5], [5, 5], [5, 5]])
    with pytest.raises(UndefinedMetricError):
        icc3(ratings)


def test_icc3_complete_cases_only():
    data = [[9, 2, 5], [6, 1, 3], [8, 4, np.nan], [7, 1, 2], [10, 5, 6]]
    complete = [[9, 2, 5], [6, 1, 3], [7, 1, 2], [10, 5, 6]]
    assert icc3(ratings_of(data)) == pytest.approx(oracle_icc3(complete), abs=1e-9)


def test_icc3_invariant_under_constant_shift():
    rng = np.random.default_rng(5)
    data = rng.integers(1, 11, size=(8, 3)).astype(float)
    data[0, 0] += 1  # avoid exact degeneracy
    a = icc3(ratings_of(data))
    b = icc3(ratings_of(data + 4.0))
    assert a == pytest.approx(b, abs=1e-12)


# ---------------------------------------------------------------------------
# Krippendorff's alpha

def test_alpha_perfect_agreement():
    ratings = ratings_of([[1, 1], [5, 5], [9, 9]])
    assert krippendorff_alpha(ratings) == pytest.approx(1.0)


def test_alpha_constant_ratings_undefined():
    ratings = ratings_of([[4, 4], [4, 4]])
    with pytest.raises(UndefinedMetricError):
        krippendorff_alpha(ratings)


def test_alpha_with_missing_matches_bruteforce():
    data = [[1, 2, np.nan], [3, 3, 3], [np.nan, 8, 9], [5, 5, 6], [7, np.nan, 7]]
    ratings = ratings_of(data)
    rows = [[v for v in row if not np.isnan(v)] for row in data]
    assert krippendorff_alpha(ratings) == pytest.approx(
        oracle_krippendorff_interval(rows), abs=1e-9)


def test_alpha_interval_shift_invariant():
    rng = np.random.default_rng(6)
    data = rng.integers(1, 8, size=(10, 3)).astype(float)
    a = krippendorff_alpha(ratings_of(data))
    b = krippendorff_alpha(ratings_of(data + 3.0))
    assert a == pytest.approx(b, abs=1e-12)


def test_alpha_singleton_rows_excluded():
    data = [[1, 2], [3, np.nan], [4, 5]]
    rows = [[1, 2], [4, 5]]
    assert krippendorff_alpha(ratings_of(data)) == pytest.approx(
        oracle_krippendorff_interval(rows), abs=1e-9)


def test_alpha_nominal_metric_flag():
    data = [[1, 1], [2, 2], [1, 2], [2, 1]]
    alpha = krippendorff_alpha(ratings_of(data), metric="nominal")
    assert -1.0 <= alpha <= 1.0
    with pytest.raises(ValueError):
        krippendorff_alpha(ratings_of(data), metric="euclidean")


def test_high_agreement_regime():
    # near-identical raters on a spread of tones: alpha and ICC almost 1
    rng = np.random.default_rng(7)
    base = rng.integers(1, 11, size=60).astype(float)
    noisy = base.copy()
    noisy[::7] = np.clip(noisy[::7] + 1, 1, 10)
    ratings = ratings_of(np.stack([base, noisy], axis=1))
    assert krippendorff_alpha(ratings) > 0.9
    assert icc3(ratings) > 0.9
    assert offbyone_agreement(ratings) == 1.0
