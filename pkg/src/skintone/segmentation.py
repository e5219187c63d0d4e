"""Input regions for feature extraction: full image, masked face, skin only.

Face and skin masks normally come from an external segmenter and travel as
sidecar PNGs named <image_id>.mask.png / <image_id>.skin.png. When no mask is
available, skin_mask_ycbcr gives a classic chroma-threshold fallback.
"""

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .color import ycbcr_channels


class EmptyRegionError(ValueError):
    """The selected region contains no pixels."""


class MaskError(ValueError):
    """Missing, unreadable, or mismatched mask."""


class RegionKind(enum.Enum):
    FULL_IMAGE = "full"
    FACE = "face"
    SKIN_ONLY = "skin"

    @classmethod
    def parse(cls, text):
        for kind in cls:
            if text.lower() in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown region kind {text!r} (use full|face|skin)")


@dataclass(frozen=True)
class SegmentationBounds:
    """Inclusive Cb/Cr windows for the fallback skin detector (Chai-Ngan rule)."""
    cb_min: float = 77.0
    cb_max: float = 127.0
    cr_min: float = 133.0
    cr_max: float = 173.0


DEFAULT_BOUNDS = SegmentationBounds()


@dataclass
class RegionPixels:
    """Pixels selected from one image region, with the source dimensions."""
    pixels: np.ndarray  # (N, 3) uint8
    width: int
    height: int

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.shape[1] != 3:
            raise ValueError("region pixels must have shape (N, 3)")
        if len(self.pixels) == 0:
            raise EmptyRegionError("region selected no pixels")

    def __len__(self):
        return len(self.pixels)


def skin_mask_ycbcr(image, bounds=DEFAULT_BOUNDS):
    """Boolean skin mask: Cb in [cb_min, cb_max] and Cr in [cr_min, cr_max].

    Pixel-local and deterministic; may come back all-false on skin-free input.
    """
    _, cb, cr = ycbcr_channels(image)
    return ((cb >= bounds.cb_min) & (cb <= bounds.cb_max)
            & (cr >= bounds.cr_min) & (cr <= bounds.cr_max))


def full_mask(image):
    return np.ones(image.shape[:2], dtype=bool)


def load_external_mask(path, image):
    """Read a sidecar mask PNG (8-bit, value > 127 selects the pixel)."""
    try:
        with PILImage.open(path) as img:
            if img.mode != "L":
                img = img.convert("L")
            arr = np.asarray(img, dtype=np.uint8)
    except Exception as exc:
        raise MaskError(f"cannot read mask {path}: {exc}") from exc
    if arr.shape != image.shape[:2]:
        raise MaskError(f"mask {path} is {arr.shape[1]}x{arr.shape[0]} but image is "
                        f"{image.shape[1]}x{image.shape[0]}")
    return arr > 127


def mask_path_for(image_id, mask_dir, kind=RegionKind.FACE):
    """Sidecar path convention: <image_id>.mask.png (face) / <image_id>.skin.png."""
    suffix = ".skin.png" if kind == RegionKind.SKIN_ONLY else ".mask.png"
    return Path(mask_dir) / f"{image_id}{suffix}"


def resolve_mask(image, image_id, kind, mask_dir=None, bounds=DEFAULT_BOUNDS):
    """Find the mask for one image per the sidecar convention.

    FULL_IMAGE needs none. FACE requires a sidecar file. SKIN_ONLY prefers a
    sidecar and falls back to the YCbCr skin detector when none exists.
    """
    if kind == RegionKind.FULL_IMAGE:
        return None
    sidecar = mask_path_for(image_id, mask_dir, kind) if mask_dir else None
    if sidecar is not None and sidecar.exists():
        return load_external_mask(sidecar, image)
    if kind == RegionKind.SKIN_ONLY:
        return skin_mask_ycbcr(image, bounds)
    raise MaskError(f"no mask file for image {image_id!r} "
                    f"(expected {sidecar if sidecar else 'a --mask-dir'})")


def extract_region(image, mask, kind):
    """Select the pixels of one region kind.

    FULL_IMAGE takes every pixel and needs no mask; FACE and SKIN_ONLY
    require one. Raises EmptyRegionError when the selection is empty.
    """
    h, w = image.shape[:2]
    if kind == RegionKind.FULL_IMAGE:
        return RegionPixels(pixels=image.reshape(-1, 3).copy(), width=w, height=h)
    if mask is None:
        raise MaskError(f"region kind {kind.name} requires a mask")
    if mask.shape != (h, w):
        raise MaskError("mask dimensions do not match the image")
    selected = image[mask]
    if selected.size == 0:
        raise EmptyRegionError(f"mask selected no pixels for {kind.name}")
    return RegionPixels(pixels=selected.copy(), width=w, height=h)
