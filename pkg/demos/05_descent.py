"""
Pulling a blurred image back towards its target
===============================================

Plain subgradient descent on pixel L1 plus a small distribution term, starting
from a box-blurred copy of the target.
"""

# %%
import numpy as np

from pdloss import LossConfig, descend, psnr
from pdloss.synthetic import box_blur, demo_scene

target = demo_scene(32)
start = box_blur(target)
print(f"start PSNR {psnr(start, target):.2f} dB")

# %%
final, trace = descend(start, target, LossConfig(lam=0.01), steps=500, step_size=0.05)
for step in (0, 50, 100, 200, 300, 400, 500):
    b = trace[step]
    print(f"step {step:>3}  total {b.total:.6f}  pixel {b.pixel_term:.6f}  distribution {b.distribution_term:.6f}")

# %%
print(f"final/initial loss {trace[-1].total / trace[0].total:.3f}")
print(f"final PSNR {psnr(final, target):.2f} dB")
print("largest pixel error", float(np.abs(final.data - target.data).max()))
