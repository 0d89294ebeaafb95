"""Time-averaged LMOTOC over the (tau0, tau1) plane and the finite-size exponent.

Prints the order parameter as a coarse text map (rows tau0, columns tau1,
both in units of pi/28), then the transect transition points for a few
chain lengths and the fitted 1/nu.

    python demos/phase_map.py
"""
import numpy as np

from kicked_otoc import SpinChainSpec
from kicked_otoc.phase import extract_critical_line, finite_size_exponent, finite_size_points, scan

grid = scan(SpinChainSpec(8, "closed"), t_horizon=1000)
shades = " .:-=+*#%@"
for k, row in enumerate(grid.order_parameter):
    cells = "".join(shades[min(int(abs(v) * 10), 9)] for v in row)
    print(f"{k:2d} |{cells}|")

line = extract_critical_line(grid)
print(f"{len(line.points)} critical points, {len(line.skipped_rows)} rows without a crossing")

points = finite_size_points(SpinChainSpec(6, "closed"), [6, 8, 10])
for n, tc in points.items():
    print(f"N={n:2d}  tau0c = {tc / (np.pi / 56):.3f} pi/56")
fit = finite_size_exponent(points)
print(f"1/nu = {fit.inv_nu:.3f} +- {fit.stderr:.3f}")
