"""Magnonic quantum-information diode: left/right OTOCs and rectification.

A 2D ferromagnet with nearest (``J1``) and next-nearest (``J2``) exchange
and an electrically induced Dzyaloshinskii-Moriya term ``D`` has magnons
with the nonreciprocal dispersion ``ω(±D, k) = ω(k) ± D sin(k_x a)``.
Right- and left-moving magnons of equal frequency carry different wave
vectors ``k+`` and ``k-``; summing over the magnonic-crystal modes
``k+ = m0 π / a0`` gives closed-form left and right OTOCs, and the ratio of
their time integrals is the rectification coefficient ``R``.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field, replace
from typing import Literal, NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from ._jobs import ordered_map

DEFAULT_TIME_POINTS = 20_000
_T_CHUNK = 2048


def default_suppression(d: float) -> float:
    return float(np.exp(-d / 5.0))


@dataclass(frozen=True)
class QidParams:
    j1: float = 1.0
    j2: float = 0.5
    d: float = 1.0
    n_modes: int = 1000
    a: float = 1e-3
    a0: float = 1.0
    r12: float = 10.0  # spin separation in units of a
    suppression: Callable[[float], float] = field(default=default_suppression, compare=False)
    t_max: float | None = None

    def __post_init__(self):
        if self.j1 < 0 or self.j2 < 0:
            raise ValueError("exchange couplings must be non-negative")
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if not 0 < self.a <= self.a0:
            raise ValueError("need 0 < a <= a0")
        if abs(self.suppression(0.0) - 1.0) > 1e-12:
            raise ValueError("suppression must satisfy zeta(0) = 1")

    @property
    def distance(self) -> float:
        return self.r12 * self.a


def dispersion(params: QidParams, kx, ky, sign: int = 1):
    """``ω(±D, k) = 2J1(1 - γ1) + 2J2(1 - γ2) ± D sin(k_x a)``.

    Momenta enter every lattice harmonic as the phase ``k a``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    x, y = np.asarray(kx) * params.a, np.asarray(ky) * params.a
    gamma1 = 0.5 * (np.cos(x) + np.cos(y))
    gamma2 = 0.5 * (np.cos(x + y) + np.cos(x - y))
    base = 2 * params.j1 * (1 - gamma1) + 2 * params.j2 * (1 - gamma2)
    return base + sign * params.d * np.sin(x)


def mode_frequency(params: QidParams, k, d: float | None = None):
    """On-axis branch ``ω_s(D, k) = 2J1(1 - ½cos ka) + 2J2(1 - cos ka) + D sin ka``.

    It differs from :func:`dispersion` on the x axis by the constant ``J1``,
    which drops out of every OTOC (only ``|Ω|²`` enters).
    """
    d = params.d if d is None else d
    x = np.asarray(k) * params.a
    return 2 * params.j1 * (1 - 0.5 * np.cos(x)) + 2 * params.j2 * (1 - np.cos(x)) + d * np.sin(x)


class WaveVectors(NamedTuple):
    k_plus: np.ndarray
    k_minus: np.ndarray
    omega: np.ndarray


def wave_vectors(params: QidParams, m0=None) -> WaveVectors:
    """``k+ = m0 π/a0``, ``k- = k+ + (2/a) arctan(D/(J1 + 2J2))`` and ``ω_{m0} = ω_s(D, k+)``.

    ``m0`` defaults to every mode ``1..n_modes``.
    """
    m0 = np.arange(1, params.n_modes + 1) if m0 is None else np.asarray(m0)
    if np.any(m0 < 1) or np.any(m0 > params.n_modes):
        raise ValueError(f"m0 must lie in 1..{params.n_modes}")
    k_plus = m0 * np.pi / params.a0
    k_minus = k_plus + (2.0 / params.a) * np.arctan(params.d / (params.j1 + 2 * params.j2))
    return WaveVectors(k_plus, k_minus, mode_frequency(params, k_plus))


Side = Literal["left", "right"]


class OmegaPair(NamedTuple):
    omega1: np.ndarray
    omega2: np.ndarray
    side: str


def omega_sums(params: QidParams, t, side: Side) -> OmegaPair:
    """``Ω1 = Σ_{m0} e^{-i k r12} e^{i ω_{m0} t}`` and ``Ω2 = Ω1^*``.

    The right sum uses ``k = k+``, the left sum ``k = k-``.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    wv = wave_vectors(params)
    k = wv.k_plus if side == "right" else wv.k_minus
    spatial = np.exp(-1j * k * params.distance)
    out = np.empty(t.size, dtype=complex)
    for start in range(0, t.size, _T_CHUNK):
        ts = t[start:start + _T_CHUNK]
        out[start:start + ts.size] = np.exp(1j * np.outer(ts, wv.omega)) @ spatial
    return OmegaPair(out, out.conj(), side)


def _otoc_from_omega(pair: OmegaPair, n_modes: int) -> np.ndarray:
    prod = (pair.omega1 * pair.omega2).real
    return 8.0 / n_modes**2 * prod - 8.0 / n_modes**4 * prod**2


def otoc_left_right(params: QidParams, t) -> tuple[np.ndarray, np.ndarray]:
    """``C_L(t)`` and ``C_R(t) = ζ⁴(D) · [same form with the right sums]``."""
    c_left = _otoc_from_omega(omega_sums(params, t, "left"), params.n_modes)
    c_right = params.suppression(params.d) ** 4 * _otoc_from_omega(
        omega_sums(params, t, "right"), params.n_modes)
    return c_left, c_right


def group_velocities(params: QidParams) -> tuple[float, float]:
    """``v_g^±`` as forward differences of the on-axis ``ω(±D, k)`` at ``k → 0+``."""
    h = 1e-6 / params.a
    out = []
    for sign in (1, -1):
        w0 = dispersion(params, 0.0, 0.0, sign)
        out.append(float((dispersion(params, h, 0.0, sign) - w0) / h))
    return out[0], out[1]


def horizon(params: QidParams) -> float:
    """``t_max = N a / v`` with the slower of the two group velocities."""
    if params.t_max is not None:
        return float(params.t_max)
    v = min(abs(x) for x in group_velocities(params))
    if v == 0:
        raise ValueError("group velocity vanishes; pass an explicit t_max")
    return params.n_modes * params.a / v


def time_grid(params: QidParams, points: int = DEFAULT_TIME_POINTS) -> np.ndarray:
    return np.linspace(0.0, horizon(params), points)


class UndefinedRectification(ZeroDivisionError):
    pass


def rectification(params: QidParams, t_grid=None) -> float:
    """``R = ∫ C_R dt / ∫ C_L dt`` by the trapezoidal rule."""
    t_grid = time_grid(params) if t_grid is None else np.asarray(t_grid, dtype=float)
    c_left, c_right = otoc_left_right(params, t_grid)
    denom = trapezoid(c_left, t_grid)
    if denom == 0:
        raise UndefinedRectification("left OTOC integrates to zero")
    return float(trapezoid(c_right, t_grid) / denom)


def rectification_sweep(params: QidParams, d_values, jobs: int = 1,
                        points: int = DEFAULT_TIME_POINTS) -> list[tuple[float, float, float]]:
    """Rows ``(D, R, ζ(D))``; each ``D`` gets its own horizon and time grid."""

    def one(d):
        p = replace(params, d=float(d))
        return float(d), rectification(p, time_grid(p, points)), float(p.suppression(float(d)))

    return ordered_map(one, d_values, jobs)
