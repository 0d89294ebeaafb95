import numpy as np
import pytest
from scipy.stats import unitary_group

from kicked_otoc.errors import ContractViolation, InconclusiveSpectrum
from kicked_otoc.floquet import FloquetMap, build_floquet
from kicked_otoc.hilbert import SpinChainSpec
from kicked_otoc.spectral import (
    SpectralSet,
    bit_reversal_permutation,
    circular_gaps,
    dominant_frequency,
    poisson_cdf,
    pooled_score,
    quasi_energies,
    sector_decompose,
    unfold,
    unfold_and_score,
    verdict,
    wigner_cdf,
)


@pytest.mark.parametrize("n,even,odd", [(2, 3, 1), (4, 10, 6), (5, 20, 12), (8, 136, 120)])
def test_sector_dimensions(n, even, odd):
    assert sector_decompose(n).dims == {"even": even, "odd": odd}


def test_reversal_is_an_involution():
    perm = bit_reversal_permutation(7)
    assert np.array_equal(perm[perm], np.arange(2**7))
    # |s1 s2 s3> = |001> reversed is |100>
    assert bit_reversal_permutation(3)[0b001] == 0b100


@pytest.mark.parametrize("n", [4, 6])
def test_sector_bases_are_orthonormal_eigenvectors(n):
    sectors = sector_decompose(n)
    perm = bit_reversal_permutation(n)
    full = np.hstack([sectors.even_basis.toarray(), sectors.odd_basis.toarray()])
    assert np.allclose(full.T @ full, np.eye(2**n), atol=1e-14)
    for sign, basis in ((1, sectors.even_basis), (-1, sectors.odd_basis)):
        b = basis.toarray()
        assert np.array_equal(b[perm], sign * b)


def test_identity_map_is_degenerate():
    spec = SpinChainSpec(6)
    fmap = build_floquet(spec)
    s = quasi_energies(fmap)
    assert s.degenerate and np.allclose(s.quasi_energies, 0)
    with pytest.raises(InconclusiveSpectrum):
        unfold_and_score(s)
    assert verdict(s) == "inconclusive"


def test_chaotic_map_not_degenerate_and_dims_add_up():
    fmap = build_floquet(SpinChainSpec(8, "open", 1, 4, 4).with_period(np.pi / 3))
    even, odd = quasi_energies(fmap, "even"), quasi_energies(fmap, "odd")
    assert not even.degenerate
    assert even.quasi_energies.size + odd.quasi_energies.size == 256
    assert np.all(np.diff(even.quasi_energies) >= 0)
    assert even.quasi_energies.min() > -np.pi and even.quasi_energies.max() <= np.pi


def test_sector_spectra_reassemble_full_spectrum():
    fmap = build_floquet(SpinChainSpec(6, "open", 1, 4, 4).with_period(0.7))
    both = np.concatenate([quasi_energies(fmap, s).quasi_energies for s in ("even", "odd")])
    full = np.angle(np.linalg.eigvals(fmap.u))
    key = lambda a: np.sort(np.exp(1j * a).round(10).view(float).reshape(-1, 2), axis=0)
    assert np.allclose(key(both), key(full), atol=1e-9)


def test_noncommuting_map_rejected():
    u = unitary_group.rvs(16, random_state=4)
    with pytest.raises(ContractViolation):
        quasi_energies(FloquetMap(SpinChainSpec(4), u, u.conj().T))


def test_cdfs_are_normalized():
    assert wigner_cdf(6.0) >= 0.9999
    # the exponential tail is heavier: 1 - e^{-6} at s = 6, past 0.9999 by s = 10
    assert poisson_cdf(6.0) == pytest.approx(1 - np.exp(-6.0), rel=1e-15)
    assert poisson_cdf(10.0) >= 0.9999
    assert wigner_cdf(0.0) == 0 and poisson_cdf(0.0) == 0


def test_circular_gaps_include_wrap():
    gaps = circular_gaps(np.array([-3.0, 0.0, 3.0]))
    assert gaps.sum() == pytest.approx(2 * np.pi)
    assert gaps[-1] == pytest.approx(2 * np.pi - 6.0)


def test_unfolding_is_scale_invariant(rng):
    levels = np.sort(rng.uniform(-1, 1, 300))
    a = unfold(levels, period=2.0)
    b = unfold(3 * levels, period=6.0)
    assert a.mean() == pytest.approx(1.0, abs=0.01)
    assert np.abs(a - b).max() < 1e-6


def test_poisson_levels_score_poisson(rng):
    levels = np.cumsum(rng.exponential(size=800))
    levels = 2 * np.pi * levels / (levels[-1] + 1.0) - np.pi
    s = unfold_and_score(SpectralSet(levels, degenerate=False))
    assert s.ks_poisson < s.ks_wigner
    assert verdict(s) == "poisson"


def test_cue_eigenphases_score_wigner():
    phases = np.angle(np.linalg.eigvals(unitary_group.rvs(600, random_state=9)))
    s = unfold_and_score(SpectralSet(np.sort(phases), degenerate=False))
    assert s.ks_wigner < s.ks_poisson
    assert s.unfolded_spacings.mean() == pytest.approx(1.0, abs=0.01)
    assert verdict(s) == "wigner_dyson"


def test_too_few_levels():
    with pytest.raises(ValueError):
        unfold_and_score(SpectralSet(np.linspace(-3, 3, 20), degenerate=False))


def test_pooled_sectors():
    fmap = build_floquet(SpinChainSpec(8, "open", 1, 4, 4).with_period(np.pi / 3))
    pooled = pooled_score([quasi_energies(fmap, s) for s in ("even", "odd")])
    assert pooled.sector == "pooled" and pooled.unfolded_spacings.size == 256
    assert verdict(pooled) == "wigner_dyson"


@pytest.mark.parametrize("n", [8, 10])
def test_chaos_and_integrability_at_desk_scale(n):
    chaotic = unfold_and_score(quasi_energies(
        build_floquet(SpinChainSpec(n, "open", 1, 4, 4).with_period(np.pi / 3))))
    regular = unfold_and_score(quasi_energies(
        build_floquet(SpinChainSpec(n, "open", 1, 0, 4).with_period(np.pi / 18))))
    assert verdict(chaotic) == "wigner_dyson"
    assert verdict(regular) == "poisson"


def test_pure_cosine_frequency():
    n = np.arange(1001)
    assert dominant_frequency(np.cos(2 * np.pi * 0.125 * n), 1000) == pytest.approx(0.125, abs=1e-3)


def test_constant_series_has_no_frequency():
    with pytest.raises(ValueError):
        dominant_frequency(np.ones(101), 100)


def test_frequency_needs_full_horizon():
    with pytest.raises(ValueError):
        dominant_frequency(np.ones(50), 100)
