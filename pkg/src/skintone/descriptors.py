"""Color descriptor bank: channel histograms, moments, GCH, BIC, and CCV.

Eleven histograms are computed per region: six scalar channels (R, G, B,
CIELAB L, YCbCr Y, HSV V) at 256 native bins, plus four quantized-color
descriptors (GCH, CCV coherent/incoherent, BIC border/interior) at 64 native
bins over a 6-bit color quantization (top two bits of each channel). They are
re-binned to a target size and concatenated with per-channel statistical
moments into one feature vector.
"""

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .color import lab_lightness, ycbcr_channels
from .segmentation import RegionKind, RegionPixels, extract_region, full_mask

SCALAR_CHANNELS = ("R", "G", "B", "L", "Y", "V")
QUANTIZED_DESCRIPTORS = ("GCH", "COHERENT", "INCOHERENT", "BORDER", "INTERIOR")
VALID_BINS = (128, 64, 32, 16)
MOMENT_NAMES = ("mean", "variance", "skewness", "kurtosis")


class RebinError(ValueError):
    """Requested bin count does not divide the native bin count."""


# ---------------------------------------------------------------------------
# Quantization and scalar channels

def quantize_color(rgb):
    """Map an 8-bit RGB triple to its 6-bit color index (0..63).

    index = (R >> 6)*16 + (G >> 6)*4 + (B >> 6), i.e. the two most
    significant bits of each channel.
    """
    r, g, b = int(rgb[0]), int(rgb[1]), int(rgb[2])
    return (r >> 6) * 16 + (g >> 6) * 4 + (b >> 6)


def quantize_image(image):
    """Per-pixel 6-bit color indices for an (H, W, 3) uint8 array."""
    img = np.asarray(image, dtype=np.uint8)
    return ((img[..., 0] >> 6).astype(np.int64) * 16
            + (img[..., 1] >> 6).astype(np.int64) * 4
            + (img[..., 2] >> 6).astype(np.int64))


def scalar_channel(pixels, channel):
    """Channel values in 0..255 for an (N, 3) uint8 pixel array.

    R/G/B pass through; Y is BT.601 full-range luma; V = max(R, G, B);
    L is CIELAB L* rescaled by 255/100.
    """
    pixels = np.asarray(pixels)
    if channel == "R":
        return pixels[:, 0].astype(np.int64)
    if channel == "G":
        return pixels[:, 1].astype(np.int64)
    if channel == "B":
        return pixels[:, 2].astype(np.int64)
    if channel == "Y":
        y, _, _ = ycbcr_channels(pixels)
        return np.clip(np.rint(y), 0, 255).astype(np.int64)
    if channel == "V":
        return pixels.max(axis=1).astype(np.int64)
    if channel == "L":
        lightness = lab_lightness(pixels)
        return np.clip(np.rint(lightness * 255.0 / 100.0), 0, 255).astype(np.int64)
    raise ValueError(f"unknown channel {channel!r}")


# ---------------------------------------------------------------------------
# Histograms

@dataclass
class Histogram:
    counts: np.ndarray
    channel: str
    native_bins: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts)

    def total(self):
        return float(self.counts.sum())


def channel_histogram(region, channel):
    """256-bin count histogram of one scalar channel over a region."""
    values = scalar_channel(_pixels_of(region), channel)
    counts = np.bincount(values, minlength=256)
    return Histogram(counts=counts, channel=channel, native_bins=256)


def gch(region):
    """Global Color Histogram: 64-bin counts of quantized colors."""
    pixels = _pixels_of(region)
    q = ((pixels[:, 0].astype(np.int64) >> 6) * 16
         + (pixels[:, 1].astype(np.int64) >> 6) * 4
         + (pixels[:, 2].astype(np.int64) >> 6))
    counts = np.bincount(q, minlength=64)
    return Histogram(counts=counts, channel="GCH", native_bins=64)


def _pixels_of(region):
    if isinstance(region, RegionPixels):
        return region.pixels
    pixels = np.asarray(region)
    if pixels.size == 0:
        raise ValueError("empty region")
    return pixels.reshape(-1, 3)


# ---------------------------------------------------------------------------
# Statistical moments

@dataclass
class Moments:
    mean: float
    variance: float
    skewness: float
    kurtosis: float  # excess kurtosis

    def as_tuple(self):
        return (self.mean, self.variance, self.skewness, self.kurtosis)


def moments(region, channel):
    """Population moments of one scalar channel.

    skew = E[(x-mu)^3]/sigma^3 and kurt = E[(x-mu)^4]/sigma^4 - 3; both are
    defined as 0 when the variance is 0 so feature vectors stay finite.
    """
    values = scalar_channel(_pixels_of(region), channel).astype(np.float64)
    mu = values.mean()
    centered = values - mu
    var = float(np.mean(centered ** 2))
    if var == 0.0:
        return Moments(mean=float(mu), variance=0.0, skewness=0.0, kurtosis=0.0)
    sigma = math.sqrt(var)
    skew = float(np.mean(centered ** 3)) / sigma ** 3
    kurt = float(np.mean(centered ** 4)) / sigma ** 4 - 3.0
    return Moments(mean=float(mu), variance=var, skewness=skew, kurtosis=kurt)


# ---------------------------------------------------------------------------
# BIC: border/interior classification (4-connectivity)

def bic(image, mask):
    """Split the quantized-color histogram into border and interior parts.

    A masked pixel is border when any 4-neighbor that is inside both the
    image and the mask has a different quantized color; otherwise interior.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("empty mask")
    q = quantize_image(image)
    border = np.zeros_like(mask)
    # Right and down pairs cover every 4-neighbor relation once.
    for (sa, sb) in (((slice(None), slice(None, -1)), (slice(None), slice(1, None))),
                     ((slice(None, -1), slice(None)), (slice(1, None), slice(None)))):
        differs = (q[sa] != q[sb]) & mask[sa] & mask[sb]
        border[sa] |= differs
        border[sb] |= differs
    interior = mask & ~border
    border &= mask
    border_hist = np.bincount(q[border], minlength=64)
    interior_hist = np.bincount(q[interior], minlength=64)
    return (Histogram(counts=border_hist, channel="BORDER", native_bins=64),
            Histogram(counts=interior_hist, channel="INTERIOR", native_bins=64))


# ---------------------------------------------------------------------------
# CCV: color coherence vectors (8-connectivity components)

def _component_sizes(q, mask):
    """Size of the 8-connected equal-color component of each masked pixel.

    Union-find over the masked grid; two neighbors join when both are masked
    and share a quantized color. Returns an (H, W) array, 0 outside the mask.
    """
    h, w = q.shape
    parent = list(range(h * w))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]  # path halving
            x = parent[x]
        return x

    flat_q = q.ravel()
    flat_mask = mask.ravel()
    offsets = ((0, 1), (1, 0), (1, 1), (1, -1))
    for dy, dx in offsets:
        ys, xs = np.nonzero(mask)
        ny, nx = ys + dy, xs + dx
        ok = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        a = (ys[ok] * w + xs[ok])
        b = (ny[ok] * w + nx[ok])
        join = flat_mask[b] & (flat_q[a] == flat_q[b])
        for pa, pb in zip(a[join].tolist(), b[join].tolist()):
            ra, rb = find(pa), find(pb)
            if ra != rb:
                parent[rb] = ra
    sizes = np.zeros(h * w, dtype=np.int64)
    roots = [find(i) for i in np.nonzero(flat_mask)[0].tolist()]
    counts = {}
    for r in roots:
        counts[r] = counts.get(r, 0) + 1
    out = np.zeros(h * w, dtype=np.int64)
    for i, r in zip(np.nonzero(flat_mask)[0].tolist(), roots):
        out[i] = counts[r]
    return out.reshape(h, w)


def ccv(image, mask, tau):
    """Color coherence vectors: coherent and incoherent 64-bin histograms.

    Pixels belonging to an 8-connected component of size >= tau (same
    quantized color, inside the mask) are coherent.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("empty mask")
    q = quantize_image(image)
    sizes = _component_sizes(q, mask)
    coherent_mask = mask & (sizes >= tau)
    incoherent_mask = mask & (sizes < tau)
    coherent = np.bincount(q[coherent_mask], minlength=64)
    incoherent = np.bincount(q[incoherent_mask], minlength=64)
    return (Histogram(counts=coherent, channel="COHERENT", native_bins=64),
            Histogram(counts=incoherent, channel="INCOHERENT", native_bins=64))


# ---------------------------------------------------------------------------
# Re-binning and the assembled feature vector

def rebin(hist, target):
    """Sum adjacent bin groups down to `target` bins (identity at native size).

    Raises RebinError when the native bin count is not divisible by target,
    e.g. asking a 64-bin quantized descriptor for 128 bins.
    """
    if target not in VALID_BINS:
        raise RebinError(f"target bins must be one of {VALID_BINS}, got {target}")
    current = len(hist.counts)
    if current == target:
        return Histogram(counts=hist.counts.copy(), channel=hist.channel,
                         native_bins=hist.native_bins)
    if current % target != 0:
        raise RebinError(f"cannot rebin {current}-bin {hist.channel} histogram "
                         f"to {target} bins")
    group = current // target
    counts = hist.counts.reshape(target, group).sum(axis=1)
    return Histogram(counts=counts, channel=hist.channel,
                     native_bins=hist.native_bins)


@dataclass(frozen=True)
class FeatureConfig:
    """Descriptor bank settings (config keys desc.bins / desc.tau_percent /
    desc.normalize; tau overrides the percentage when set)."""
    bins: int = 16
    tau: int | None = None
    tau_percent: float = 1.0
    normalize: bool = True

    def __post_init__(self):
        if self.bins not in VALID_BINS:
            raise ValueError(f"bins must be one of {VALID_BINS}, got {self.bins}")

    def tau_for(self, region_size):
        if self.tau is not None:
            return max(1, int(self.tau))
        return max(1, math.ceil(self.tau_percent / 100.0 * region_size))


@dataclass(frozen=True)
class FeatureLayout:
    """Block layout of an assembled feature vector, hashable for model guards."""
    blocks: tuple  # ((name, start, length), ...)
    length: int
    bins: int
    normalize: bool

    def hash(self):
        payload = json.dumps({"blocks": self.blocks, "length": self.length,
                              "bins": self.bins, "normalize": self.normalize},
                             sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class FeatureVector:
    values: np.ndarray
    layout: FeatureLayout


def _layout_for(bins, normalize):
    blocks = []
    start = 0
    for name in SCALAR_CHANNELS:
        width = min(bins, 256)
        blocks.append((name, start, width))
        start += width
    for name in QUANTIZED_DESCRIPTORS:
        width = min(bins, 64)  # 64-native descriptors stay at 64 when bins=128
        blocks.append((name, start, width))
        start += width
    blocks.append(("MOMENTS", start, 4 * len(SCALAR_CHANNELS)))
    start += 4 * len(SCALAR_CHANNELS)
    return FeatureLayout(blocks=tuple(blocks), length=start, bins=bins,
                         normalize=normalize)


def embedding_layout(dim):
    """Layout stand-in for externally computed embedding vectors."""
    return FeatureLayout(blocks=(("EMBEDDING", 0, dim),), length=dim,
                         bins=0, normalize=False)


def descriptor_layout(config):
    """The layout feature_vector() will produce for this config."""
    return _layout_for(config.bins, config.normalize)


def feature_vector(image, mask, kind, config=FeatureConfig()):
    """Assemble the full descriptor feature vector for one image region.

    Layout: [R, G, B, L, Y, V, GCH, Coherent, Incoherent, Border, Interior]
    histograms, each re-binned to config.bins (quantized descriptors cap at
    their native 64), then mean/variance/skewness/kurtosis for the six scalar
    channels. With normalize on, each histogram block is divided by its own
    sum; moments are appended unnormalized.
    """
    region = extract_region(image, mask, kind)
    if kind == RegionKind.FULL_IMAGE:
        desc_mask = full_mask(image)
    else:
        desc_mask = np.asarray(mask, dtype=bool)
    tau = config.tau_for(len(region))

    hists = [channel_histogram(region, ch) for ch in SCALAR_CHANNELS]
    hists.append(gch(region))
    coherent, incoherent = ccv(image, desc_mask, tau)
    border, interior = bic(image, desc_mask)
    hists.extend([coherent, incoherent, border, interior])

    parts = []
    for hist in hists:
        target = min(config.bins, hist.native_bins)
        counts = rebin(hist, target).counts.astype(np.float64)
        if config.normalize:
            total = counts.sum()
            if total > 0:
                counts = counts / total
        parts.append(counts)
    for ch in SCALAR_CHANNELS:
        parts.append(np.array(moments(region, ch).as_tuple(), dtype=np.float64))

    layout = _layout_for(config.bins, config.normalize)
    values = np.concatenate(parts)
    assert values.shape[0] == layout.length
    return FeatureVector(values=values, layout=layout)


# ---------------------------------------------------------------------------
# Feature cache files

def save_features(path, image_ids, labels, matrix):
    """Write a feature cache CSV with header image_id,label,f0..f{N-1}."""
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "label"]
                        + [f"f{i}" for i in range(matrix.shape[1])])
        for img_id, label, row in zip(image_ids, labels, matrix):
            writer.writerow([img_id, "" if label is None else int(label)]
                            + [repr(float(v)) for v in row])


def load_features(path):
    """Read a feature cache CSV -> (image_ids, labels with None, matrix)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["image_id", "label"]:
            raise ValueError(f"{path}: not a feature cache file")
        width = len(header) - 2
        ids, labels, rows = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width + 2:
                raise ValueError(f"{path}:{lineno}: expected {width} feature "
                                 f"columns, got {len(row) - 2}")
            ids.append(row[0])
            labels.append(int(row[1]) if row[1] != "" else None)
            rows.append([float(v) for v in row[2:]])
    return ids, labels, np.array(rows, dtype=np.float64)
