"""Walk through the color descriptor bank on a tiny hand-made image.

Shows the 6-bit quantization, the eleven histograms, mass conservation,
and how re-binning shrinks the feature vector.
"""

import numpy as np

from skintone.descriptors import (FeatureConfig, bic, ccv, channel_histogram,
                                  feature_vector, gch, moments,
                                  quantize_color, rebin)
from skintone.segmentation import RegionKind, RegionPixels, full_mask

# A 8x8 image: a dark-brown block on a beige background, one blue outlier.
img = np.zeros((8, 8, 3), dtype=np.uint8)
img[:, :] = (214, 189, 150)   # beige
img[2:6, 2:6] = (96, 65, 52)  # brown block
img[7, 7] = (40, 90, 200)     # isolated outlier

print("quantized colors present:",
      sorted({quantize_color(p) for p in img.reshape(-1, 3)}))

region = RegionPixels(pixels=img.reshape(-1, 3), width=8, height=8)

r_hist = channel_histogram(region, "R")
print(f"R histogram: {int(r_hist.counts.sum())} counts over "
      f"{(r_hist.counts > 0).sum()} occupied bins (= 64 pixels)")

m = moments(region, "L")
print(f"L moments: mean={m.mean:.2f} var={m.variance:.2f} "
      f"skew={m.skewness:.3f} kurt={m.kurtosis:.3f}")

g = gch(region)
print("GCH mass:", int(g.counts.sum()))

mask = full_mask(img)
border, interior = bic(img, mask)
print(f"BIC: border={int(border.counts.sum())} "
      f"interior={int(interior.counts.sum())} (sums to 64)")

coherent, incoherent = ccv(img, mask, tau=3)
print(f"CCV tau=3: coherent={int(coherent.counts.sum())} "
      f"incoherent={int(incoherent.counts.sum())} "
      f"(the lone blue pixel is incoherent: "
      f"{int(incoherent.counts[quantize_color((40, 90, 200))])})")

small = rebin(r_hist, 16)
print("re-binned R histogram to 16 bins, mass preserved:",
      int(small.counts.sum()))

vec = feature_vector(img, None, RegionKind.FULL_IMAGE, FeatureConfig(bins=16))
print(f"assembled feature vector: {len(vec.values)} dims "
      f"(11 histograms x 16 bins + 24 moments), layout hash {vec.layout.hash()}")
