"""Phase structure in the (tau0, tau1) plane from the time-averaged LMOTOC.

The order parameter is ``F̄ = (1/T) Σ_{n=1}^{T} Re F_x^{l,l}(n)``: it stays
finite in the (π-)ferromagnetic regions and averages to zero in the
(0π-)paramagnetic ones.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from ._jobs import ordered_map
from .errors import FitError
from .floquet import build_floquet
from .hilbert import SpinChainSpec, site_signs
from .otoc import ObservablePair, long_time_average, otoc_single_site
from .spectral import dominant_frequency

GRID_STEP = np.pi / 28
DEFAULT_THRESHOLD = 0.01
DEFAULT_T = 1000
# Column used for finite-size scaling.  In the infinite chain the transition
# on this column sits on the diagonal, tau0c = tau1.
DEFAULT_TRANSECT = np.pi / 8


def default_axis() -> np.ndarray:
    """``k π/28`` for ``k = 0..13``."""
    return GRID_STEP * np.arange(14)


@dataclass
class PhaseGrid:
    tau0_values: np.ndarray
    tau1_values: np.ndarray
    order_parameter: np.ndarray  # shape (len(tau0), len(tau1))
    n_sites: int
    t_horizon: int
    boundary: str
    site: int
    dominant_frequency: np.ndarray | None = None


def _point(template: SpinChainSpec, tau0: float, tau1: float, site: int,
           t_horizon: int, with_frequency: bool) -> tuple[float, float]:
    spec = replace(template, tau0=float(tau0), tau1=float(tau1))
    series = otoc_single_site(spec, ObservablePair("single_site_x", site, site), t_horizon)
    fbar = long_time_average(series, t_horizon)
    freq = np.nan
    if with_frequency:
        try:
            freq = dominant_frequency(series, t_horizon)
        except ValueError:
            pass
    return fbar, freq


def scan(spec_template: SpinChainSpec, tau0_values: Sequence[float] | None = None,
         tau1_values: Sequence[float] | None = None, t_horizon: int = DEFAULT_T,
         site: int | None = None, with_frequency: bool = False, jobs: int = 1) -> PhaseGrid:
    """Time-averaged LMOTOC ``F̄`` on a ``tau0 x tau1`` grid.

    ``site`` defaults to ``N // 2``.  Couplings and boundary come from
    ``spec_template``; its own kick durations are ignored.
    """
    tau0_values = default_axis() if tau0_values is None else np.asarray(tau0_values, float)
    tau1_values = default_axis() if tau1_values is None else np.asarray(tau1_values, float)
    for axis in (tau0_values, tau1_values):
        if np.any(axis < 0) or np.any(axis > np.pi / 2 + 1e-12):
            raise ValueError("grid values must lie in [0, π/2]")
    if spec_template.n_sites % 2:
        raise ValueError("phase scans use an even number of sites")
    site = spec_template.n_sites // 2 if site is None else site
    points = [(t0, t1) for t0 in tau0_values for t1 in tau1_values]
    results = ordered_map(
        lambda p: _point(spec_template, p[0], p[1], site, t_horizon, with_frequency),
        points, jobs)
    arr = np.array(results).reshape(tau0_values.size, tau1_values.size, 2)
    return PhaseGrid(tau0_values, tau1_values, arr[..., 0], spec_template.n_sites, t_horizon,
                     spec_template.boundary, site,
                     arr[..., 1] if with_frequency else None)


@dataclass
class CriticalLine:
    points: list[tuple[float, float]]
    threshold: float
    skipped_rows: list[float] = field(default_factory=list)


def _first_crossing(x: np.ndarray, y: np.ndarray, threshold: float) -> float | None:
    above = np.nonzero(np.abs(y) > threshold)[0]
    if above.size == 0:
        return None
    k = above[0]
    if k == 0:
        return float(x[0])
    y0, y1 = abs(y[k - 1]), abs(y[k])
    return float(x[k - 1] + (threshold - y0) * (x[k] - x[k - 1]) / (y1 - y0))


def extract_critical_line(grid: PhaseGrid, threshold: float = DEFAULT_THRESHOLD) -> CriticalLine:
    """First ``|F̄| > threshold`` crossing along each constant-``tau0`` row.

    Crossings are linearly interpolated between neighbouring grid values;
    rows that never cross are listed in ``skipped_rows``.
    """
    points, skipped = [], []
    for t0, row in zip(grid.tau0_values, grid.order_parameter):
        t1 = _first_crossing(grid.tau1_values, row, threshold)
        if t1 is None:
            skipped.append(float(t0))
        else:
            points.append((float(t0), t1))
    points.sort()
    return CriticalLine(points, threshold, skipped)


def critical_tau0(grid: PhaseGrid, tau1: float = DEFAULT_TRANSECT,
                  threshold: float = DEFAULT_THRESHOLD) -> float:
    """``tau0`` where the ordered region ends on the column nearest ``tau1``.

    At ``tau0 = 0`` there is no transverse kick, ``sigma^x`` is conserved and
    ``F̄ = 1``.  Walking up in ``tau0`` the first value with ``F̄ <= threshold``
    marks the transition, linearly interpolated against the last ordered
    point.  The comparison is signed: past the transition ``F̄`` often
    overshoots to small negative values.
    """
    j = int(np.argmin(np.abs(grid.tau1_values - tau1)))
    col = grid.order_parameter[:, j]
    below = np.nonzero(col <= threshold)[0]
    if below.size == 0:
        raise FitError(f"no disordered point on the tau1={tau1:.6g} transect")
    k = below[0]
    if k == 0:
        raise FitError("transect starts inside the disordered region")
    x0, x1 = grid.tau0_values[k - 1], grid.tau0_values[k]
    y0, y1 = col[k - 1], col[k]
    return float(x0 + (y0 - threshold) * (x1 - x0) / (y0 - y1))


def finite_size_points(spec_template: SpinChainSpec, sizes: Sequence[int],
                       tau1: float = DEFAULT_TRANSECT,
                       tau0_values: Sequence[float] | None = None,
                       t_horizon: int = DEFAULT_T, threshold: float = DEFAULT_THRESHOLD,
                       jobs: int = 1) -> dict[int, float]:
    """Transect critical points ``{N: tau0c(N)}`` for several chain lengths.

    Only the single column ``tau1`` is scanned.  ``tau0_values`` defaults to
    29 evenly spaced points on ``[0, tau1]``; the transition moves in by a
    fraction of a coarse grid step between sizes, so the default phase-scan
    step is too coarse for this.
    """
    tau0_values = (np.linspace(0.0, tau1, 29) if tau0_values is None
                   else np.asarray(tau0_values, dtype=float))
    out = {}
    for n in sizes:
        grid = scan(replace(spec_template, n_sites=n), tau0_values, [tau1], t_horizon, jobs=jobs)
        out[n] = critical_tau0(grid, tau1, threshold)
    return out


@dataclass(frozen=True)
class ScalingFit:
    inv_nu: float
    stderr: float
    sizes: tuple[int, ...]
    excluded: tuple[int, ...]


def finite_size_exponent(critical_points: Mapping[int, float],
                         tau0c_infinity: float = DEFAULT_TRANSECT) -> ScalingFit:
    """``1/ν`` from ``|tau0c(N) - tau0c(∞)| ∝ N^{-1/ν}`` on log-log axes."""
    sizes, gaps, excluded = [], [], []
    for n, tc in sorted(critical_points.items()):
        gap = abs(tc - tau0c_infinity)
        if gap > 0:
            sizes.append(n)
            gaps.append(gap)
        else:
            excluded.append(n)
    if len(set(sizes)) < 3:
        raise FitError("finite-size scaling needs at least three sizes with nonzero gaps")
    fit = stats.linregress(np.log(sizes), np.log(gaps))
    return ScalingFit(float(-fit.slope), float(fit.stderr), tuple(sizes), tuple(excluded))


# -- optional multiplet diagnostic ----------------------------------------------

def parity_multiplets(spec: SpinChainSpec, tol: float = 1e-8) -> dict[str, int]:
    """Count eigenphase pairings between the two parity sectors of ``U``.

    With ``h_x = 0`` the map commutes with ``P = Π sigma^z_l``.  For every
    even-parity eigenphase we look for an odd-parity partner at the same
    phase (``(u, p), (u, -p)``) or shifted by π (``(u, p), (-u, -p)``).
    The counts separate the ferromagnetic phase (degenerate partners) from
    the π-ferromagnet (π-shifted partners).
    """
    if spec.h_x != 0:
        raise ValueError("parity is only conserved for h_x = 0")
    u = build_floquet(spec).u
    parity = np.prod(site_signs(spec.n_sites), axis=0)
    phases = {}
    for p in (1, -1):
        idx = np.nonzero(parity == p)[0]
        phases[p] = np.angle(np.linalg.eigvals(u[np.ix_(idx, idx)]))

    def matched(shift: float) -> int:
        d = np.angle(np.exp(1j * (phases[1][:, None] + shift - phases[-1][None, :])))
        return int(np.sum(np.abs(d).min(axis=1) < tol))

    return {"same": matched(0.0), "shifted": matched(np.pi), "levels": int(phases[1].size)}
