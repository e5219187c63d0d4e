"""Vectorized color space conversions shared by segmentation and descriptors.

All conversions take 8-bit RGB arrays of shape (..., 3) and work in float64.
YCbCr follows BT.601 full range; CIELAB uses sRGB primaries with a D65 white.
"""

import numpy as np


def ycbcr_channels(rgb):
    """BT.601 full-range (Y, Cb, Cr) as float arrays in 0..255 / 16..240-ish."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return y, cb, cr


def lab_lightness(rgb):
    """CIELAB L* in 0..100 (sRGB primaries, D65 white point)."""
    rgb = np.asarray(rgb, dtype=np.float64) / 255.0
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    # Only Y is needed for L*.
    y = (0.2126729 * linear[..., 0] + 0.7151522 * linear[..., 1]
         + 0.0721750 * linear[..., 2])
    eps = (6.0 / 29.0) ** 3
    fy = np.where(y > eps, np.cbrt(y), y / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    return 116.0 * fy - 16.0


def rgb_to_hsv(rgb):
    """RGB in 0..255 -> (h, s, v) floats with h, s in [0, 1] and v in 0..255."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)
    h = np.zeros_like(v)
    mask = c > 0
    rm = mask & (v == r)
    gm = mask & (v == g) & ~rm
    bm = mask & (v == b) & ~rm & ~gm
    h[rm] = ((g - b)[rm] / c[rm]) % 6.0
    h[gm] = (b - r)[gm] / c[gm] + 2.0
    h[bm] = (r - g)[bm] / c[bm] + 4.0
    return h / 6.0, s, v


def hsv_to_rgb(h, s, v):
    """Inverse of rgb_to_hsv; returns float RGB in 0..255."""
    h = (np.asarray(h, dtype=np.float64) % 1.0) * 6.0
    s = np.clip(np.asarray(s, dtype=np.float64), 0.0, 1.0)
    v = np.asarray(v, dtype=np.float64)
    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)]
    rgb = np.zeros(h.shape + (3,), dtype=np.float64)
    for idx, (rc, gc, bc) in enumerate(choices):
        sel = i == idx
        rgb[sel, 0] = rc[sel]
        rgb[sel, 1] = gc[sel]
        rgb[sel, 2] = bc[sel]
    return rgb
