import numpy as np
import pytest
from PIL import Image as PILImage

from oracles import oracle_skin_mask
from skintone.color import ycbcr_channels
from skintone.segmentation import (EmptyRegionError, MaskError, RegionKind,
                                   SegmentationBounds, extract_region,
                                   full_mask, load_external_mask,
                                   mask_path_for, resolve_mask,
                                   skin_mask_ycbcr)


def test_skin_pixel_inside_bounds_selected():
    # mid-tone skin: (Cb, Cr) lands near (100, 150)
    img = np.array([[[180, 120, 90]]], dtype=np.uint8)
    _, cb, cr = ycbcr_channels(img)
    assert 77 <= cb[0, 0] <= 127 and 133 <= cr[0, 0] <= 173
    assert skin_mask_ycbcr(img)[0, 0]


def test_black_pixel_not_selected():
    img = np.zeros((1, 1, 3), dtype=np.uint8)
    assert not skin_mask_ycbcr(img)[0, 0]


def test_skin_mask_matches_per_pixel_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        img = rng.integers(0, 256, size=(6, 6, 3), dtype=np.uint8)
        assert (skin_mask_ycbcr(img) == oracle_skin_mask(img)).all()


def test_skin_mask_is_pixel_local():
    rng = np.random.default_rng(11)
    img = rng.integers(0, 256, size=(8, 5, 3), dtype=np.uint8)
    perm = rng.permutation(8)
    assert (skin_mask_ycbcr(img[perm]) == skin_mask_ycbcr(img)[perm]).all()


def test_custom_bounds():
    img = np.array([[[0, 0, 255]]], dtype=np.uint8)  # extreme blue
    assert not skin_mask_ycbcr(img)[0, 0]
    wide = SegmentationBounds(cb_min=0, cb_max=256, cr_min=0, cr_max=256)
    assert skin_mask_ycbcr(img, wide)[0, 0]


# ---------------------------------------------------------------------------
# External masks

def save_mask_png(values, path):
    PILImage.fromarray(values.astype(np.uint8), mode="L").save(path)


def test_all_255_mask_full(tmp_path):
    img = np.zeros((3, 4, 3), dtype=np.uint8)
    path = tmp_path / "m.png"
    save_mask_png(np.full((3, 4), 255), path)
    assert load_external_mask(path, img).all()


def test_wrong_size_mask_rejected(tmp_path):
    img = np.zeros((3, 4, 3), dtype=np.uint8)
    path = tmp_path / "m.png"
    save_mask_png(np.full((4, 4), 255), path)
    with pytest.raises(MaskError, match="4x4"):
        load_external_mask(path, img)


def test_threshold_strictly_above_127(tmp_path):
    img = np.zeros((1, 3, 3), dtype=np.uint8)
    path = tmp_path / "m.png"
    save_mask_png(np.array([[127, 128, 0]]), path)
    mask = load_external_mask(path, img)
    assert mask.tolist() == [[False, True, False]]


# ---------------------------------------------------------------------------
# Region extraction

def test_full_image_region():
    img = np.arange(4 * 4 * 3, dtype=np.uint8).reshape(4, 4, 3)
    region = extract_region(img, None, RegionKind.FULL_IMAGE)
    assert len(region) == 16
    assert region.width == 4 and region.height == 4


def test_half_mask_region():
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    mask = np.zeros((4, 4), dtype=bool)
    mask[:2] = True
    region = extract_region(img, mask, RegionKind.FACE)
    assert len(region) == 8


def test_masked_count_equals_popcount():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(9, 7, 3), dtype=np.uint8)
    mask = rng.random((9, 7)) < 0.4
    mask[0, 0] = True  # keep non-empty
    region = extract_region(img, mask, RegionKind.FACE)
    assert len(region) == int(mask.sum())


def test_all_false_mask_is_empty_region():
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    with pytest.raises(EmptyRegionError):
        extract_region(img, np.zeros((4, 4), dtype=bool), RegionKind.SKIN_ONLY)


def test_masked_kind_requires_mask():
    img = np.zeros((4, 4, 3), dtype=np.uint8)
    with pytest.raises(MaskError):
        extract_region(img, None, RegionKind.FACE)


def test_region_kind_parse():
    assert RegionKind.parse("full") == RegionKind.FULL_IMAGE
    assert RegionKind.parse("FACE") == RegionKind.FACE
    assert RegionKind.parse("skin_only") == RegionKind.SKIN_ONLY
    with pytest.raises(ValueError):
        RegionKind.parse("torso")


def test_resolve_mask_sidecar_and_fallback(tmp_path):
    img = np.full((2, 2, 3), 200, dtype=np.uint8)
    save_mask_png(np.full((2, 2), 255), tmp_path / "pic.mask.png")
    assert resolve_mask(img, "pic", RegionKind.FACE, tmp_path).all()
    # no sidecar for skin -> YCbCr fallback (here: nothing skin-colored)
    mask = resolve_mask(img, "other", RegionKind.SKIN_ONLY, tmp_path)
    assert mask.shape == (2, 2)
    with pytest.raises(MaskError):
        resolve_mask(img, "other", RegionKind.FACE, tmp_path)
    assert resolve_mask(img, "pic", RegionKind.FULL_IMAGE, tmp_path) is None


def test_mask_path_convention(tmp_path):
    assert mask_path_for("img1", tmp_path).name == "img1.mask.png"
    assert mask_path_for("img1", tmp_path,
                         RegionKind.SKIN_ONLY).name == "img1.skin.png"


def test_full_mask_shape():
    img = np.zeros((5, 3, 3), dtype=np.uint8)
    assert full_mask(img).shape == (5, 3)
    assert full_mask(img).all()
