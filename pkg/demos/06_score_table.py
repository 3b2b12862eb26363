"""
Combining PSNR, MS-SSIM and LPIPS into one score
================================================

Each metric is taken relative to the best value in its column (LPIPS inverted
because lower is better) and the three ratios are multiplied.  Small relative
differences are strongly amplified.
"""

# %%
from pdloss import score

best = (27.14, 0.906, 0.233)
rows = {
    "no perceptual loss": (27.14, 0.906, 0.311),
    "L1 feature loss, 0.005": (26.92, 0.900, 0.264),
    "contextual, 0.1": (26.44, 0.896, 0.239),
    "PDL, 0.01": (26.62, 0.898, 0.233),
}
for name, (p, m, l) in rows.items():
    print(f"{name:<24} {score(p, m, l, *best):.3f}")
