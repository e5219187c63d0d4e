"""Deterministic, seeded training-time image augmentation.

Transforms run in a fixed order: geometric (hflip, vflip, translate, scale,
rotate), photometric (brightness, contrast, hue, saturation), blur and noise,
then grid shuffle and coarse dropout. Geometric ops keep the output size by
padding with edge replication and center-cropping.

Randomness comes from numpy's PCG64 generator seeded per call. The draw order
is fixed and reproducible: for each *enabled* transform, in the order above,
one uniform gate draw, then that transform's parameter draws (listed in each
apply function). Disabled transforms consume no draws.
"""

from dataclasses import dataclass, asdict

import numpy as np
from scipy import ndimage

from .color import hsv_to_rgb, rgb_to_hsv


@dataclass(frozen=True)
class AugmentConfig:
    hflip_p: float = 0.5
    vflip_p: float = 0.5
    translate_frac: float = 0.1
    scale_range: tuple = (0.9, 1.1)
    rotate_deg: float = 15.0
    brightness_delta: float = 0.2    # fraction of full scale (255)
    contrast_delta: float = 0.2
    hue_delta_deg: float = 10.0
    saturation_delta: float = 0.15
    blur_sigma: tuple = (0.0, 1.5)
    noise_std: float = 10.0          # stddev in 8-bit counts
    grid_size: int = 4
    dropout_count: int = 4
    dropout_max_frac: float = 0.2    # of the smaller image dimension

    def __post_init__(self):
        for name in ("hflip_p", "vflip_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if self.translate_frac < 0 or self.translate_frac > 1:
            raise ValueError("translate_frac must be in [0, 1]")
        lo, hi = self.scale_range
        if not (0 < lo <= hi):
            raise ValueError(f"invalid scale_range {self.scale_range}")
        blo, bhi = self.blur_sigma
        if not (0 <= blo <= bhi):
            raise ValueError(f"invalid blur_sigma range {self.blur_sigma}")
        if self.noise_std < 0 or self.rotate_deg < 0 or self.hue_delta_deg < 0:
            raise ValueError("ranges must be non-negative")
        object.__setattr__(self, "scale_range", tuple(self.scale_range))
        object.__setattr__(self, "blur_sigma", tuple(self.blur_sigma))

    @classmethod
    def none(cls):
        """Everything disabled; augment() becomes the identity."""
        return cls(hflip_p=0.0, vflip_p=0.0, translate_frac=0.0,
                   scale_range=(1.0, 1.0), rotate_deg=0.0, brightness_delta=0.0,
                   contrast_delta=0.0, hue_delta_deg=0.0, saturation_delta=0.0,
                   blur_sigma=(0.0, 0.0), noise_std=0.0, grid_size=0,
                   dropout_count=0, dropout_max_frac=0.0)

    def to_dict(self):
        d = asdict(self)
        d["scale_range"] = list(self.scale_range)
        d["blur_sigma"] = list(self.blur_sigma)
        return d

    @classmethod
    def from_dict(cls, obj):
        obj = dict(obj)
        if "scale_range" in obj:
            obj["scale_range"] = tuple(obj["scale_range"])
        if "blur_sigma" in obj:
            obj["blur_sigma"] = tuple(obj["blur_sigma"])
        return cls(**obj)


def _center_fit(img, height, width):
    """Crop or edge-pad a float image back to (height, width)."""
    h, w = img.shape[:2]
    if h > height:
        top = (h - height) // 2
        img = img[top:top + height]
    elif h < height:
        top = (height - h) // 2
        img = np.pad(img, ((top, height - h - top), (0, 0), (0, 0)), mode="edge")
    if w > width:
        left = (w - width) // 2
        img = img[:, left:left + width]
    elif w < width:
        left = (width - w) // 2
        img = np.pad(img, ((0, 0), (left, width - w - left), (0, 0)), mode="edge")
    return img


def _translate(img, dy, dx):
    h, w = img.shape[:2]
    pad_y, pad_x = abs(dy), abs(dx)
    if pad_y == 0 and pad_x == 0:
        return img
    padded = np.pad(img, ((pad_y, pad_y), (pad_x, pad_x), (0, 0)), mode="edge")
    return padded[pad_y - dy:pad_y - dy + h, pad_x - dx:pad_x - dx + w]


def _apply_hue_saturation(img, dh, ds):
    h, s, v = rgb_to_hsv(np.clip(img, 0, 255))
    h = (h + dh) % 1.0
    s = np.clip(s * (1.0 + ds), 0.0, 1.0)
    return hsv_to_rgb(h, s, v)


def augment(image, cfg, seed):
    """Apply one seeded draw of the configured pipeline to an RGB uint8 image.

    Deterministic given (image, cfg, seed); output dimensions always equal the
    input's. With every transform disabled the input comes back bit-exact.
    """
    rng = np.random.default_rng(seed)
    h, w = image.shape[:2]
    if cfg.grid_size > min(h, w):
        raise ValueError(f"grid size {cfg.grid_size} exceeds image "
                         f"dimensions {w}x{h}")

    img = image.astype(np.float64)
    touched = False

    # -- geometric ------------------------------------------------------
    if cfg.hflip_p > 0:
        if rng.uniform() < cfg.hflip_p:
            img = img[:, ::-1]
            touched = True
    if cfg.vflip_p > 0:
        if rng.uniform() < cfg.vflip_p:
            img = img[::-1]
            touched = True
    if cfg.translate_frac > 0:
        rng.uniform()  # gate
        dx = int(round(rng.uniform(-cfg.translate_frac, cfg.translate_frac) * w))
        dy = int(round(rng.uniform(-cfg.translate_frac, cfg.translate_frac) * h))
        img = _translate(img, dy, dx)
        touched = True
    if cfg.scale_range != (1.0, 1.0):
        rng.uniform()  # gate
        factor = rng.uniform(*cfg.scale_range)
        zoomed = ndimage.zoom(img, (factor, factor, 1.0), order=1, mode="nearest")
        img = _center_fit(zoomed, h, w)
        touched = True
    if cfg.rotate_deg > 0:
        rng.uniform()  # gate
        angle = rng.uniform(-cfg.rotate_deg, cfg.rotate_deg)
        img = ndimage.rotate(img, angle, reshape=False, order=1, mode="nearest")
        touched = True

    # -- photometric ----------------------------------------------------
    if cfg.brightness_delta > 0:
        rng.uniform()  # gate
        img = img + rng.uniform(-cfg.brightness_delta, cfg.brightness_delta) * 255.0
        touched = True
    if cfg.contrast_delta > 0:
        rng.uniform()  # gate
        factor = 1.0 + rng.uniform(-cfg.contrast_delta, cfg.contrast_delta)
        mean = img.mean()
        img = (img - mean) * factor + mean
        touched = True
    if cfg.hue_delta_deg > 0 or cfg.saturation_delta > 0:
        rng.uniform()  # gate
        dh = (rng.uniform(-cfg.hue_delta_deg, cfg.hue_delta_deg) / 360.0
              if cfg.hue_delta_deg > 0 else 0.0)
        ds = (rng.uniform(-cfg.saturation_delta, cfg.saturation_delta)
              if cfg.saturation_delta > 0 else 0.0)
        img = _apply_hue_saturation(img, dh, ds)
        touched = True

    # -- blur / noise ---------------------------------------------------
    if cfg.blur_sigma != (0.0, 0.0):
        rng.uniform()  # gate
        sigma = rng.uniform(*cfg.blur_sigma)
        if sigma > 0:
            img = ndimage.gaussian_filter(img, sigma=(sigma, sigma, 0.0))
        touched = True
    if cfg.noise_std > 0:
        rng.uniform()  # gate
        img = img + rng.normal(0.0, cfg.noise_std, size=img.shape)
        touched = True

    # -- grid shuffle / coarse dropout -----------------------------------
    if cfg.grid_size >= 2:
        rng.uniform()  # gate
        g = cfg.grid_size
        cell_h, cell_w = h // g, w // g
        perm = rng.permutation(g * g)
        cells = [img[r * cell_h:(r + 1) * cell_h, c * cell_w:(c + 1) * cell_w].copy()
                 for r in range(g) for c in range(g)]
        img = img.copy()
        for dest, src in enumerate(perm):
            r, c = divmod(dest, g)
            img[r * cell_h:(r + 1) * cell_h, c * cell_w:(c + 1) * cell_w] = cells[src]
        touched = True
    if cfg.dropout_count > 0 and cfg.dropout_max_frac > 0:
        rng.uniform()  # gate
        max_px = max(1, int(cfg.dropout_max_frac * min(h, w)))
        img = img.copy()
        for _ in range(cfg.dropout_count):
            hole_h = int(rng.integers(1, max_px + 1))
            hole_w = int(rng.integers(1, max_px + 1))
            y = int(rng.integers(0, h - hole_h + 1))
            x = int(rng.integers(0, w - hole_w + 1))
            img[y:y + hole_h, x:x + hole_w] = 0.0
        touched = True

    if not touched:
        return image.copy()
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def augment_batch(images, cfg, base_seed):
    """Augment a batch with per-image seeds base_seed + index."""
    return [augment(img, cfg, base_seed + i) for i, img in enumerate(images)]
