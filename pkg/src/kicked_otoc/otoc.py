"""Out-of-time-order correlators of the kicked Ising chain.

Conventions
-----------
Single-site protocols use ``F(n) = <psi|W(n) V W(n) V|psi>`` with
``W(n) = U^{†n} W U^n`` and ``C(n) = 1 - Re F(n)``; ``W = sigma^a_l``,
``V = sigma^a_m`` and ``psi`` is the product state polarized along ``+a``.
For Hermitian unitary observables ``1 - Re F = ½ ||[W(n), V] psi||²``, and
``C`` is evaluated in that commutator form so that tiny values (short times,
small kicks) are not lost to cancellation.

Block protocols use ``C(n) = -Tr([W(n), V]²) / (2 d_A d_B) = C2 - C4`` with
``C2 = Tr(W(n)² V²)/2^N`` and ``C4 = Tr(W(n) V W(n) V)/2^N``.

All heavy lifting happens in the sigma^x product basis, where the Ising
factor of the Floquet map is diagonal and sigma^x observables are diagonal
too (see :class:`~kicked_otoc.floquet.XBasisPropagator`).
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from ._jobs import ordered_map
from .errors import ContractViolation, FitError
from .floquet import FloquetMap, XBasisPropagator
from .hilbert import (
    RandomEnsembleSpec,
    SpinChainSpec,
    hadamard_factors,
    kron_left,
    kron_right,
    sample,
    site_signs,
)

Kind = Literal["single_site_z", "single_site_x", "spin_block", "random_gue"]

# Above this Hilbert-space dimension single-site series switch from a
# one-off Schur decomposition to matrix-free batched evolution.
EIGEN_DIM_LIMIT = 1024
EXACT_TRACE_MAX_SITES = 12
DEFAULT_EPSILON = 1e-3
SATURATION_LEVEL = 0.8


@dataclass(frozen=True)
class ObservablePair:
    kind: Kind
    l: int | None = None
    m: int | None = None
    seed: int | None = None

    def validate(self, n_sites: int) -> None:
        if self.kind in ("single_site_z", "single_site_x"):
            for name, site in (("l", self.l), ("m", self.m)):
                if site is None or not 1 <= site <= n_sites:
                    raise ValueError(f"site {name}={site} outside 1..{n_sites}")
        elif self.kind in ("spin_block", "random_gue"):
            if n_sites % 2:
                raise ValueError("block observables need an even number of sites")
        else:
            raise ValueError(f"unknown observable kind {self.kind!r}")

    @property
    def axis(self) -> str:
        return "z" if self.kind == "single_site_z" else "x"


@dataclass
class OtocSeries:
    n: np.ndarray
    c: np.ndarray
    protocol: ObservablePair
    spec: SpinChainSpec
    trace_mode: str
    f: np.ndarray | None = None
    c2: np.ndarray | None = None
    c4: np.ndarray | None = None
    c_err: np.ndarray | None = None
    c_infinity: float | None = None
    meta: dict = field(default_factory=dict)

    def scaled(self) -> np.ndarray:
        if not self.c_infinity:
            raise ValueError("series carries no asymptotic value to scale by")
        return self.c / self.c_infinity


# -- observables in the sigma^x basis ----------------------------------------

class _Diagonal:
    def __init__(self, values: np.ndarray):
        self.values = np.asarray(values, dtype=float)

    def apply(self, x):
        return self.values[:, None] * x if x.ndim == 2 else self.values * x

    def apply_rows(self, r):
        return r * self.values[None, :]

    def dense(self):
        return np.diag(self.values).astype(complex)


class _BitFlip:
    def __init__(self, perm: np.ndarray):
        self.perm = perm

    def apply(self, x):
        return x[self.perm]

    def apply_rows(self, r):
        return r[:, self.perm]

    def dense(self):
        d = self.perm.size
        out = np.zeros((d, d), dtype=complex)
        out[self.perm, np.arange(d)] = 1.0
        return out


def _site_operator(axis: str, site: int, n_sites: int):
    """sigma^axis_site expressed in the sigma^x product basis."""
    if axis == "x":
        return _Diagonal(site_signs(n_sites)[site - 1])
    perm = np.arange(2**n_sites) ^ (1 << (n_sites - site))
    return _BitFlip(perm)


def _polarized_state(axis: str, n_sites: int) -> np.ndarray:
    d = 2**n_sites
    if axis == "x":
        psi = np.zeros(d, dtype=complex)
        psi[0] = 1.0
        return psi
    return np.full(d, 1.0 / np.sqrt(d), dtype=complex)


def spin_block_values(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of the two half-chain block observables in the sigma^x basis.

    ``W = (2/N) Σ_{l ≤ N/2} sigma^x_l`` and ``V = (2/N) Σ_{l > N/2} sigma^x_l``.
    """
    z = site_signs(n_sites).astype(float)
    half = n_sites // 2
    return (2.0 / n_sites) * z[:half].sum(axis=0), (2.0 / n_sites) * z[half:].sum(axis=0)


# -- single-site protocols ----------------------------------------------------

def _single_site_eigen(prop, w, v, psi, n_values, chunk=512):
    u = prop.dense()
    t, q = scipy.linalg.schur(u, output="complex")
    theta = np.angle(np.diag(t))
    qh = q.conj().T
    wq = qh @ w.apply(q)
    vq = qh @ v.apply(q)
    phi_b = qh @ psi
    phi_a = qh @ v.apply(psi)
    same = np.allclose(phi_a, phi_b, atol=1e-14, rtol=0)
    f_out = np.empty(n_values.size, dtype=complex)
    c_out = np.empty(n_values.size)
    for start in range(0, n_values.size, chunk):
        ns = n_values[start:start + chunk]
        ph = np.exp(1j * np.outer(theta, ns))
        b = ph.conj() * (wq @ (ph * phi_b[:, None]))
        a = b if same else ph.conj() * (wq @ (ph * phi_a[:, None]))
        vb = vq @ b
        f_out[start:start + ns.size] = np.einsum("ij,ij->j", vb.conj(), a)
        c_out[start:start + ns.size] = 0.5 * np.sum(np.abs(a - vb) ** 2, axis=0)
    return f_out, c_out


def _evolved_rows(prop, w, start: np.ndarray, n_max: int) -> np.ndarray:
    """Rows ``W(n) start`` for ``n = 0..n_max`` by batched backward kicks."""
    rows = np.empty((n_max + 1, start.size), dtype=complex)
    current = start.copy()
    for n in range(n_max + 1):
        rows[n] = w.apply(current)
        if n < n_max:
            current = prop.apply(current)
    for k in range(1, n_max + 1):
        rows[k:] = prop.apply_adjoint_rows(rows[k:])
    return rows


def _single_site_kicks(prop, w, v, psi, n_max):
    b = _evolved_rows(prop, w, psi, n_max)
    v_psi = v.apply(psi)
    a = b if np.allclose(v_psi, psi, atol=1e-14, rtol=0) else _evolved_rows(prop, w, v_psi, n_max)
    vb = v.apply_rows(b)
    f = np.einsum("ij,ij->i", vb.conj(), a)
    c = 0.5 * np.sum(np.abs(a - vb) ** 2, axis=1)
    return f, c


def otoc_single_site(spec: SpinChainSpec, pair: ObservablePair, n_max: int,
                     method: Literal["auto", "eigen", "kicks"] = "auto") -> OtocSeries:
    """TMOTOC (``single_site_z``) or LMOTOC (``single_site_x``) for ``n = 0..n_max``.

    ``method="eigen"`` diagonalizes the propagator once (complex Schur form)
    and evaluates all kicks at once; ``"kicks"`` evolves the needed states
    matrix-free, costing O(n_max²) propagator applications.  ``"auto"``
    picks the eigenbasis for dimensions up to ``EIGEN_DIM_LIMIT``.
    """
    if pair.kind not in ("single_site_z", "single_site_x"):
        raise ValueError(f"otoc_single_site needs a single-site pair, got {pair.kind!r}")
    pair.validate(spec.n_sites)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    prop = XBasisPropagator.from_spec(spec)
    w = _site_operator(pair.axis, pair.l, spec.n_sites)
    v = _site_operator(pair.axis, pair.m, spec.n_sites)
    psi = _polarized_state(pair.axis, spec.n_sites)
    if method == "auto":
        method = "eigen" if spec.dim <= EIGEN_DIM_LIMIT else "kicks"
    n_values = np.arange(n_max + 1)
    if method == "eigen":
        f, c = _single_site_eigen(prop, w, v, psi, n_values)
    elif method == "kicks":
        f, c = _single_site_kicks(prop, w, v, psi, n_max)
    else:
        raise ValueError(f"unknown method {method!r}")
    return OtocSeries(n=n_values, c=c, f=f, protocol=pair, spec=spec,
                      trace_mode="polarized_state", meta={"method": method})


# -- block protocols ------------------------------------------------------------

def _block_exact(prop, w_values, v_values, n_max, stop_above=None):
    d = w_values.size
    w_op = np.diag(w_values).astype(complex)
    dv2 = (v_values[:, None] - v_values[None, :]) ** 2
    v2 = v_values**2
    c, c2, c4 = (np.empty(n_max + 1) for _ in range(3))
    for n in range(n_max + 1):
        weight = w_op.real**2 + w_op.imag**2
        c[n] = np.sum(weight * dv2) / (2 * d)
        c2[n] = weight.sum(axis=1) @ v2 / d
        c4[n] = v_values @ weight @ v_values / d
        if stop_above is not None and c[n] > stop_above:
            return c[:n + 1], c2[:n + 1], c4[:n + 1]
        if n < n_max:
            w_op = prop.conjugate(w_op)
    return c, c2, c4


def _block_haar(prop, w, v, n_max, states: int, seed: int):
    n_sites = prop.spec.n_sites
    seeds = np.random.SeedSequence(seed).generate_state(states, dtype=np.uint64)
    per_state = []
    for s in seeds:
        psi = sample(RandomEnsembleSpec("HaarState", prop.spec.dim, int(s)))
        psi = kron_left(*hadamard_factors(n_sites), psi)
        b = _evolved_rows(prop, w, psi, n_max)
        a = _evolved_rows(prop, w, v.apply(psi), n_max)
        vb = v.apply_rows(b)
        per_state.append((
            0.5 * np.sum(np.abs(a - vb) ** 2, axis=1),
            np.sum(np.abs(a) ** 2, axis=1),
            np.einsum("ij,ij->i", vb.conj(), a).real,
        ))
    arr = np.array(per_state)  # (states, 3, n)
    mean = arr.mean(axis=0)
    err = arr[:, 0].std(axis=0, ddof=1) / np.sqrt(states) if states > 1 else np.zeros(n_max + 1)
    return mean[0], mean[1], mean[2], err


def otoc_block(spec: SpinChainSpec, n_max: int,
               trace_mode: Literal["exact_trace", "haar_estimate"] = "exact_trace",
               states: int = 3, seed: int = 0,
               stop_at_saturation: bool = False) -> OtocSeries:
    """Spin-block OTOC between the two half chains, with ``C2`` and ``C4``.

    ``exact_trace`` evolves the full operator ``W(n)`` (chains up to
    ``EXACT_TRACE_MAX_SITES``); ``haar_estimate`` replaces ``Tr(·)/2^N`` by
    an average over ``states`` Haar-random states and reports the standard
    error of ``C`` in ``c_err``.

    With ``stop_at_saturation`` an exact-trace run ends at the first kick
    where ``C/C(∞)`` exceeds ``SATURATION_LEVEL``, which is all an
    auto-windowed growth fit needs.
    """
    pair = ObservablePair("spin_block")
    pair.validate(spec.n_sites)
    prop = XBasisPropagator.from_spec(spec)
    w_values, v_values = spin_block_values(spec.n_sites)
    c_inf = 4.0 / spec.n_sites**2
    if trace_mode == "exact_trace":
        if spec.n_sites > EXACT_TRACE_MAX_SITES:
            raise ValueError(f"exact traces are limited to N <= {EXACT_TRACE_MAX_SITES}; "
                             "use trace_mode='haar_estimate'")
        stop = SATURATION_LEVEL * c_inf if stop_at_saturation else None
        c, c2, c4 = _block_exact(prop, w_values, v_values, n_max, stop)
        err, label = None, "exact_trace"
    elif trace_mode == "haar_estimate":
        if states < 3:
            raise ValueError("Haar estimation uses at least 3 states")
        c, c2, c4, err = _block_haar(prop, _Diagonal(w_values), _Diagonal(v_values),
                                     n_max, states, seed)
        label = f"haar_estimate({states})"
    else:
        raise ValueError(f"unknown trace mode {trace_mode!r}")
    return OtocSeries(n=np.arange(c.size), c=c, c2=c2, c4=c4, c_err=err,
                      protocol=pair, spec=spec, trace_mode=label, c_infinity=c_inf,
                      meta={"seed": seed} if trace_mode == "haar_estimate" else {})


def _realization_seeds(seed: int, realizations: int) -> list[tuple[int, int]]:
    children = np.random.SeedSequence(seed).spawn(realizations)
    return [tuple(int(s) for s in child.generate_state(2, dtype=np.uint64)) for child in children]


def _random_block_series(prop, w_a, v_b, n_max):
    """Exact-trace ``C, C2, C4`` for ``W = w_a ⊗ I`` and ``V = I ⊗ v_b`` (x basis)."""
    m_a, m_b = w_a.shape[0], v_b.shape[0]
    d = m_a * m_b
    eye_a = np.eye(m_a, dtype=complex)
    v_b2 = v_b @ v_b
    w_op = np.kron(w_a, np.eye(m_b, dtype=complex))
    c2, c4 = np.empty(n_max + 1), np.empty(n_max + 1)
    for n in range(n_max + 1):
        vwv = kron_right(kron_left(eye_a, v_b, w_op), eye_a, v_b)
        c4[n] = np.vdot(w_op, vwv).real / d
        c2[n] = np.vdot(w_op, kron_right(w_op, eye_a, v_b2)).real / d
        if n < n_max:
            w_op = prop.conjugate(w_op)
    return c2 - c4, c2, c4


def otoc_random_observables(spec: SpinChainSpec, n_max: int, realizations: int,
                            seed: int = 0, jobs: int = 1) -> OtocSeries:
    """Ensemble-mean OTOC of independent GUE observables on the two half chains.

    ``W = W_A ⊗ I`` and ``V = I ⊗ V_B`` with ``W_A, V_B`` drawn from GUE of
    dimension ``2^{N/2}``.  With that normalization the saturation value is
    ``C(∞) = 2^N``, and the mean scaled OTOC ``C/2^N`` estimates the operator
    entanglement of ``U^n``.  ``c_err`` holds the standard error of the mean;
    ``meta["per_realization"]`` keeps every realization's ``C``.
    """
    pair = ObservablePair("random_gue", seed=seed)
    pair.validate(spec.n_sites)
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    prop = XBasisPropagator.from_spec(spec)
    h_a, h_b = hadamard_factors(spec.n_sites)
    m_a, m_b = h_a.shape[0], h_b.shape[0]

    def one(seeds):
        w_a = sample(RandomEnsembleSpec("GUE", m_a, seeds[0]))
        v_b = sample(RandomEnsembleSpec("GUE", m_b, seeds[1]))
        return _random_block_series(prop, h_a @ w_a @ h_a, h_b @ v_b @ h_b, n_max)

    runs = np.array(ordered_map(one, _realization_seeds(seed, realizations), jobs))
    c_all = runs[:, 0]
    err = (c_all.std(axis=0, ddof=1) / np.sqrt(realizations) if realizations > 1
           else np.zeros(n_max + 1))
    return OtocSeries(n=np.arange(n_max + 1), c=c_all.mean(axis=0), c2=runs[:, 1].mean(axis=0),
                      c4=runs[:, 2].mean(axis=0), c_err=err, protocol=pair, spec=spec,
                      trace_mode="exact_trace", c_infinity=float(spec.dim),
                      meta={"realizations": realizations, "seed": seed, "per_realization": c_all})


# -- operator entanglement and random-unitary asymptotes ------------------------

def operator_schmidt_weights(u: np.ndarray, dim_a: int) -> np.ndarray:
    """``λ_i = s_i² / Σ s²`` from the singular values of the reshuffled ``u``."""
    d = u.shape[0]
    dim_b = d // dim_a
    reshuffled = u.reshape(dim_a, dim_b, dim_a, dim_b).transpose(0, 2, 1, 3)
    s = np.linalg.svd(reshuffled.reshape(dim_a * dim_a, dim_b * dim_b), compute_uv=False)
    lam = s**2
    return lam / lam.sum()


def opee(fmap: FloquetMap, n: int) -> float:
    """Operator entanglement ``1 - Σ λ_i²`` of ``U^n`` across the half-chain cut."""
    n_sites = fmap.spec.n_sites
    if n_sites % 2:
        raise ValueError("the half-chain cut needs an even number of sites")
    if n < 0:
        raise ValueError("n must be non-negative")
    un = np.linalg.matrix_power(fmap.u, n)
    lam = operator_schmidt_weights(un, 2 ** (n_sites // 2))
    return float(1.0 - np.sum(lam**2))


class CueAsymptote(NamedTuple):
    exact: float
    leading: float


def cue_saturation(tr_w2: float, tr_v2: float, dim: int) -> CueAsymptote:
    """Haar-unitary average ``Tr(W²) Tr(V²) / (d² - 1)`` and its ``/d²`` leading term."""
    return CueAsymptote(tr_w2 * tr_v2 / (dim**2 - 1), tr_w2 * tr_v2 / dim**2)


def cue_asymptote_operators(w: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> CueAsymptote:
    """CUE saturation value for explicit traceless observables."""
    d = w.shape[0]
    for name, op in (("W", w), ("V", v)):
        tr = np.trace(op)
        if abs(tr) > tol * max(1.0, float(np.linalg.norm(op))):
            raise ContractViolation(f"{name} is not traceless (Tr = {tr:.3e})")
    return cue_saturation(float(np.vdot(w, w).real), float(np.vdot(v, v).real), d)


def cue_asymptote(pair: ObservablePair, n_sites: int) -> CueAsymptote:
    """CUE saturation value for the protocol's observables.

    Pauli pairs have ``Tr σ² = 2^N``; block observables ``Tr W² = Tr V² = 2^{N+1}/N``.
    GUE observables use their ensemble-mean traces ``2^N · 2^{N/2}``.
    """
    pair.validate(n_sites)
    d = 2**n_sites
    if pair.kind in ("single_site_z", "single_site_x"):
        return cue_saturation(d, d, d)
    if pair.kind == "spin_block":
        tr = 2.0 * d / n_sites
        return cue_saturation(tr, tr, d)
    return cue_saturation(d * 2 ** (n_sites // 2), d * 2 ** (n_sites - n_sites // 2), d)


# -- derived diagnostics ------------------------------------------------------------

def departure_time(series: OtocSeries, epsilon: float = DEFAULT_EPSILON) -> int | None:
    """First kick with ``1 - Re F(n) > epsilon`` (``None`` if it never departs)."""
    values = 1.0 - series.f.real if series.f is not None else series.c
    hits = np.nonzero(values > epsilon)[0]
    return int(series.n[hits[0]]) if hits.size else None


def departure_times(series: Mapping[int, OtocSeries] | Iterable[OtocSeries],
                    epsilon: float = DEFAULT_EPSILON) -> dict[int, int | None]:
    """Departure-time table keyed by separation ``Δl``.

    Accepts either a ``{Δl: series}`` mapping or single-site series, whose
    separation is read from the protocol as ``|l - m|``.
    """
    if isinstance(series, Mapping):
        items = dict(series)
    else:
        items = {abs(s.protocol.l - s.protocol.m): s for s in series}
    return {dl: departure_time(items[dl], epsilon) for dl in sorted(items)}


def propagation_speed(table: Mapping[int, int | None]) -> float:
    """Inverse slope of the least-squares line through ``(Δl, t_Δl)``."""
    pts = [(dl, t) for dl, t in table.items() if t is not None]
    if len(pts) < 2 or len({dl for dl, _ in pts}) < 2:
        raise FitError("need departures at two or more separations to fit a speed")
    x, y = np.array(pts, dtype=float).T
    slope = np.polyfit(x, y, 1)[0]
    if slope <= 0:
        raise FitError(f"departure times do not grow with separation (slope {slope:.3g})")
    return float(1.0 / slope)


@dataclass(frozen=True)
class PowerLawFit:
    b: float
    prefactor: float
    window: tuple[int, int]
    residual: float
    auto_window: bool


@dataclass(frozen=True)
class ExponentialFit:
    mu: float
    prefactor: float
    window: tuple[int, int]
    residual: float
    auto_window: bool


@dataclass(frozen=True)
class SaturationStats:
    c_infinity: float | None
    fit: PowerLawFit | ExponentialFit | None


def _c_infinity(series: OtocSeries, c_infinity: float | None) -> float:
    value = c_infinity if c_infinity is not None else series.c_infinity
    if not value:
        raise FitError("no asymptotic value C(inf) available for this series")
    return float(value)


def saturation_index(series: OtocSeries, c_infinity: float | None = None,
                     level: float = SATURATION_LEVEL) -> int | None:
    ratio = series.c / _c_infinity(series, c_infinity)
    hits = np.nonzero(ratio > level)[0]
    return int(series.n[hits[0]]) if hits.size else None


def auto_window(series: OtocSeries, c_infinity: float | None = None) -> tuple[int, int]:
    """``[2, n_sat // 2]`` with ``n_sat`` the first kick where ``C/C(∞) > 0.8``."""
    n_sat = saturation_index(series, c_infinity)
    if n_sat is None:
        raise FitError("series never reaches 0.8 C(inf); supply a fit window")
    window = (2, n_sat // 2)
    if window[1] <= window[0]:
        raise FitError(f"saturation at n={n_sat} leaves no room for a fit window")
    return window


def _window_mask(series: OtocSeries, window: tuple[int, int]) -> np.ndarray:
    lo, hi = window
    if lo > hi or lo < series.n[0] or hi > series.n[-1]:
        raise FitError(f"window {window} outside the series range")
    return (series.n >= lo) & (series.n <= hi)


def _line_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return slope, intercept, float(np.sqrt(np.mean(resid**2)))


def fit_growth(series: OtocSeries, window: tuple[int, int] | None = None,
               c_infinity: float | None = None) -> SaturationStats:
    """Power law ``C(n) ∝ n^b`` by least squares on log-log axes.

    ``C(∞)`` is only needed to auto-select the window; with an explicit
    window it is reported when known and may be absent.
    """
    auto = window is None
    c_inf = (_c_infinity(series, c_infinity) if auto
             else c_infinity if c_infinity is not None else series.c_infinity)
    window = auto_window(series, c_inf) if auto else tuple(window)
    mask = _window_mask(series, window)
    n, c = series.n[mask].astype(float), series.c[mask]
    if np.any(c <= 0) or np.any(n <= 0):
        raise FitError("power-law fit needs positive n and C inside the window")
    slope, intercept, resid = _line_fit(np.log(n), np.log(c))
    return SaturationStats(c_inf, PowerLawFit(float(slope), float(np.exp(intercept)),
                                              window, resid, auto))


def fit_saturation(series: OtocSeries, window: tuple[int, int] | None = None,
                   c_infinity: float | None = None) -> SaturationStats:
    """Exponential approach ``1 - C/C(∞) ∝ e^{-μ n}`` on log-linear axes."""
    c_inf = _c_infinity(series, c_infinity)
    auto = window is None
    window = auto_window(series, c_inf) if auto else tuple(window)
    mask = _window_mask(series, window)
    gap = 1.0 - series.c[mask] / c_inf
    if np.any(gap <= 0):
        raise FitError("exponential fit needs C < C(inf) inside the window")
    slope, intercept, resid = _line_fit(series.n[mask].astype(float), np.log(gap))
    return SaturationStats(c_inf, ExponentialFit(float(-slope), float(np.exp(intercept)),
                                                 window, resid, auto))


def long_time_average(series: OtocSeries, t_horizon: int) -> float:
    """``(1/T) Σ_{n=1}^{T} Re F(n)``."""
    if series.f is None:
        raise ValueError("long-time averages need a series with F(n)")
    if t_horizon < 1 or series.n[-1] < t_horizon:
        raise ValueError(f"series ends at n={series.n[-1]}, shorter than T={t_horizon}")
    sel = (series.n >= 1) & (series.n <= t_horizon)
    return float(np.mean(series.f[sel].real))
