"""Render a small gallery of seeded augmentations of one face-like image.

Writes demo_output/augmented_*.png; with a fixed seed the gallery is
byte-for-byte reproducible across runs.
"""

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from skintone.augmentation import AugmentConfig, augment, augment_batch

out_dir = Path("demo_output")
out_dir.mkdir(exist_ok=True)

# a stylized portrait: skin-toned oval on a gradient background
h = w = 96
yy, xx = np.mgrid[0:h, 0:w]
img = np.zeros((h, w, 3), dtype=np.float64)
img[..., 0] = 60 + xx * 0.8
img[..., 1] = 80 + yy * 0.5
img[..., 2] = 120
oval = ((yy - 48) / 34.0) ** 2 + ((xx - 48) / 24.0) ** 2 < 1
img[oval] = (198, 144, 110)
img = img.astype(np.uint8)
PILImage.fromarray(img).save(out_dir / "augmented_original.png")

cfg = AugmentConfig()  # default ranges: flips, jitter, blur, noise, dropout
variants = augment_batch([img] * 8, cfg, base_seed=7)
for i, variant in enumerate(variants):
    PILImage.fromarray(variant).save(out_dir / f"augmented_{i}.png")

replay = augment(img, cfg, seed=7)
print("deterministic:", bool((replay == variants[0]).all()))

photometric_only = AugmentConfig.none().to_dict()
photometric_only.update(brightness_delta=0.2, contrast_delta=0.2,
                        hue_delta_deg=10.0, saturation_delta=0.15)
soft = augment(img, AugmentConfig.from_dict(photometric_only), seed=3)
PILImage.fromarray(soft).save(out_dir / "augmented_photometric.png")

print(f"wrote {len(variants) + 2} images to {out_dir}/")
