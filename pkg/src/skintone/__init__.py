"""Skin tone classification and dataset fairness auditing toolkit.

Classic color-descriptor features (channel histograms, moments, GCH, BIC,
CCV), from-scratch classifiers with ordinal losses, leakage-safe dataset
splits, ordinal and inter-annotator agreement metrics, seeded augmentation,
dataset distribution audits, and an annotation backend - all on the 10-tone
MST scale.
"""

__version__ = "0.1.0"

from .augmentation import AugmentConfig, augment, augment_batch
from .classifiers import (Model, ModelSpec, grid_search, ingest_embeddings,
                          kfold_cv, load_model, predict, save_model, train)
from .data import (DatasetManifest, ImageRecord, Individual, LabelRecord,
                   build_manifest, load_image, load_manifest,
                   merge_label_files, save_manifest)
from .descriptors import (FeatureConfig, FeatureVector, bic, ccv,
                          channel_histogram, feature_vector, gch, moments,
                          quantize_color, rebin, scalar_channel)
from .losses import LossConfig, loss
from .metrics import (EvaluationReport, RatingsMatrix, confusion,
                      exact_agreement, icc3, krippendorff_alpha,
                      offbyone_agreement, scores)
from .segmentation import (RegionKind, SegmentationBounds, extract_region,
                           load_external_mask, skin_mask_ycbcr)
from .splits import (BalancePlan, SplitPlan, balance, build_custom_test,
                     kfold_by_individual, split_by_images,
                     split_by_individuals)
