"""Left and right OTOCs of the nonreciprocal magnon channel and the rectification sweep.

    python demos/magnon_diode.py
"""
import numpy as np

from kicked_otoc.qid import QidParams, otoc_left_right, rectification_sweep

params = QidParams()
t = np.linspace(0.0, 60.0, 7)
c_left, c_right = otoc_left_right(params, t)
for row in zip(t, c_left, c_right):
    print("t={:5.1f}  C_L={:.4e}  C_R={:.4e}".format(*row))

for d, r, zeta in rectification_sweep(params, [0.0, 0.5, 1.0, 2.0, 3.0], points=4000):
    print(f"D={d:.1f}  R={r:.4f}  zeta^4={zeta**4:.4f}")
