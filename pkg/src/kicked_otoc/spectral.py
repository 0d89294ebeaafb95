"""Quasi-energy statistics in bit-reversal sectors, and OTOC frequency content.

The open (and closed) kicked Ising chain is symmetric under reversing the
site order, ``B|s_1 … s_N> = |s_N … s_1>``.  Level statistics are only
meaningful inside one symmetry sector, so the Floquet map is projected onto
the even or odd eigenspace of ``B`` before its eigenphases are taken.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from numpy.polynomial import Polynomial
from scipy import stats

from .errors import ContractViolation, InconclusiveSpectrum
from .floquet import FloquetMap
from .otoc import OtocSeries

Sector = Literal["even", "odd"]
Verdict = Literal["wigner_dyson", "poisson", "inconclusive"]

DEFAULT_POLY_DEGREE = 6
DEGENERACY_GAP = 1e-10
MIN_LEVELS = 50


def bit_reversal_permutation(n_sites: int) -> np.ndarray:
    """``perm[i]`` is the index of the site-reversed basis state ``B|i>``."""
    idx = np.arange(2**n_sites)
    out = np.zeros_like(idx)
    for k in range(n_sites):
        out |= ((idx >> k) & 1) << (n_sites - 1 - k)
    return out


@dataclass(frozen=True)
class SymmetrySectors:
    """Columns of ``even_basis`` / ``odd_basis`` span the ``B = ±1`` eigenspaces."""

    n_sites: int
    even_basis: sp.csr_matrix
    odd_basis: sp.csr_matrix

    def basis(self, sector: Sector) -> sp.csr_matrix:
        if sector not in ("even", "odd"):
            raise ValueError(f"sector must be 'even' or 'odd', got {sector!r}")
        return self.even_basis if sector == "even" else self.odd_basis

    @property
    def dims(self) -> dict[str, int]:
        return {"even": self.even_basis.shape[1], "odd": self.odd_basis.shape[1]}


def sector_decompose(n_sites: int, boundary: str = "open") -> SymmetrySectors:
    """Even/odd bases from palindromes and symmetrized non-palindrome pairs.

    The reflection symmetry holds for either boundary (the wrap bond maps to
    itself), so ``boundary`` is only validated.
    """
    if boundary not in ("open", "closed"):
        raise ValueError(f"boundary must be 'open' or 'closed', got {boundary!r}")
    d = 2**n_sites
    perm = bit_reversal_permutation(n_sites)
    idx = np.arange(d)
    palindromes = idx[perm == idx]
    reps = idx[idx < perm]
    partners = perm[reps]
    r = 1.0 / np.sqrt(2.0)

    n_even = palindromes.size + reps.size
    even_rows = np.concatenate([palindromes, reps, partners])
    even_cols = np.concatenate([np.arange(palindromes.size),
                                palindromes.size + np.arange(reps.size),
                                palindromes.size + np.arange(reps.size)])
    even_vals = np.concatenate([np.ones(palindromes.size), np.full(2 * reps.size, r)])
    even = sp.csr_matrix((even_vals, (even_rows, even_cols)), shape=(d, n_even))

    odd_rows = np.concatenate([reps, partners])
    odd_cols = np.concatenate([np.arange(reps.size), np.arange(reps.size)])
    odd_vals = np.concatenate([np.full(reps.size, r), np.full(reps.size, -r)])
    odd = sp.csr_matrix((odd_vals, (odd_rows, odd_cols)), shape=(d, reps.size))
    return SymmetrySectors(n_sites, even, odd)


@dataclass(frozen=True)
class SpectralSet:
    quasi_energies: np.ndarray
    degenerate: bool
    sector: str = "even"
    period: float = 2 * np.pi
    unfolded_spacings: np.ndarray | None = None
    ks_wigner: float | None = None
    ks_poisson: float | None = None
    poly_degree: int | None = None


def circular_gaps(phases: np.ndarray, period: float = 2 * np.pi) -> np.ndarray:
    """Consecutive gaps of sorted points on a circle, including the wrap gap."""
    ordered = np.sort(phases)
    return np.diff(np.append(ordered, ordered[0] + period))


def quasi_energies(fmap: FloquetMap, sector: Sector = "even",
                   sectors: SymmetrySectors | None = None,
                   tol: float = 1e-9) -> SpectralSet:
    """Sorted eigenphases in ``(-π, π]`` of the Floquet map restricted to a sector."""
    n_sites = fmap.spec.n_sites
    perm = bit_reversal_permutation(n_sites)
    violation = float(np.abs(fmap.u[np.ix_(perm, perm)] - fmap.u).max())
    if violation > tol:
        raise ContractViolation(f"Floquet map does not commute with bit reversal ({violation:.3e})")
    sectors = sectors or sector_decompose(n_sites)
    basis = sectors.basis(sector)
    block = (basis.T @ (basis.T @ fmap.u.T).T)
    eigs = scipy.linalg.eigvals(block, overwrite_a=True, check_finite=False)
    phases = np.sort(np.angle(eigs))
    phases[phases <= -np.pi] = np.pi
    phases = np.sort(phases)
    degenerate = bool(np.min(circular_gaps(phases)) < DEGENERACY_GAP)
    return SpectralSet(phases, degenerate, sector=sector)


def wigner_cdf(s):
    return 1.0 - np.exp(-np.pi * np.asarray(s) ** 2 / 4.0)


def poisson_cdf(s):
    return stats.expon.cdf(s)


def unfold(levels: np.ndarray, period: float = 2 * np.pi,
           poly_degree: int = DEFAULT_POLY_DEGREE) -> np.ndarray:
    """Spacings after mapping levels through a smooth fit of their staircase.

    The counting function is fitted on the ``M`` sorted levels plus the first
    level shifted by one period, so the ``M`` spacings include the wrap
    gap.  Spacings are normalized to unit mean.
    """
    ordered = np.sort(np.asarray(levels, dtype=float))
    x = np.append(ordered, ordered[0] + period)
    counts = np.arange(1, x.size + 1, dtype=float)
    smooth = Polynomial.fit(x, counts, poly_degree)
    spacings = np.diff(smooth(x))
    return spacings / spacings.mean()


def unfold_and_score(spec_set: SpectralSet,
                     poly_degree: int = DEFAULT_POLY_DEGREE) -> SpectralSet:
    """Unfold the quasi-energies and attach KS distances to Wigner and Poisson."""
    if spec_set.degenerate:
        raise InconclusiveSpectrum("spectrum is degenerate; spacing statistics are inconclusive")
    if spec_set.quasi_energies.size < MIN_LEVELS:
        raise ValueError(f"need at least {MIN_LEVELS} levels, got {spec_set.quasi_energies.size}")
    spacings = unfold(spec_set.quasi_energies, spec_set.period, poly_degree)
    return score_spacings(spacings, spec_set, poly_degree)


def score_spacings(spacings: np.ndarray, spec_set: SpectralSet,
                   poly_degree: int = DEFAULT_POLY_DEGREE) -> SpectralSet:
    return replace(spec_set, unfolded_spacings=spacings, poly_degree=poly_degree,
                   ks_wigner=float(stats.kstest(spacings, wigner_cdf).statistic),
                   ks_poisson=float(stats.kstest(spacings, poisson_cdf).statistic))


def pooled_score(sets: list[SpectralSet],
                 poly_degree: int = DEFAULT_POLY_DEGREE) -> SpectralSet:
    """Score the union of separately unfolded sectors."""
    if any(s.degenerate for s in sets):
        raise InconclusiveSpectrum("a pooled sector is degenerate")
    spacings = np.concatenate([unfold(s.quasi_energies, s.period, poly_degree) for s in sets])
    merged = SpectralSet(np.sort(np.concatenate([s.quasi_energies for s in sets])),
                         degenerate=False, sector="pooled", period=sets[0].period)
    return score_spacings(spacings, merged, poly_degree)


def verdict(spec_set: SpectralSet) -> Verdict:
    if spec_set.degenerate:
        return "inconclusive"
    if spec_set.ks_wigner is None:
        raise ValueError("spectral set has not been scored yet")
    return "wigner_dyson" if spec_set.ks_wigner < spec_set.ks_poisson else "poisson"


def dominant_frequency(series: OtocSeries | np.ndarray, t_horizon: int) -> float:
    """Strongest nonzero frequency (cycles per kick) of ``Re F(n)``, ``n = 1..T``."""
    if isinstance(series, OtocSeries):
        values = series.f.real if series.f is not None else 1.0 - series.c
    else:
        values = np.asarray(series, dtype=float)
    if values.size < t_horizon + 1:
        raise ValueError(f"series shorter than the horizon T={t_horizon}")
    window = values[1:t_horizon + 1]
    spectrum = np.abs(np.fft.rfft(window - window.mean())) / t_horizon
    spectrum[0] = 0.0
    if spectrum.max() <= 1e-12 * max(1.0, float(np.abs(window).max())):
        raise ValueError("series has no nonzero frequency content")
    return float(np.argmax(spectrum) / t_horizon)
