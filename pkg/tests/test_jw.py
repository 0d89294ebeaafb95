import time

import mpmath
import numpy as np
import pytest

from kicked_otoc.errors import SingularModeError
from kicked_otoc.hilbert import SpinChainSpec
from kicked_otoc.jw import (
    brute_force_amplitudes,
    cos_gamma,
    grid_amplitudes,
    mode_amplitudes,
    mode_coefficients,
    momentum_grid,
    pair_fock_propagator,
    pair_matrix,
    tmotoc_analytic,
)
from kicked_otoc.otoc import ObservablePair, departure_time, otoc_single_site

TAU = np.pi / 28


def test_grid_is_symmetric_and_evenly_spaced():
    g = momentum_grid(8)
    assert g.modes[0] == pytest.approx(-7 * np.pi / 8)
    assert np.allclose(np.diff(g.modes), 2 * np.pi / 8)
    assert np.allclose(g.modes[g.partner()], -g.modes)


def test_grid_needs_even_chain():
    with pytest.raises(ValueError):
        momentum_grid(7)


def test_identity_evolution_has_zero_phase():
    for q in momentum_grid(6).modes:
        assert cos_gamma(q, 0.0, 0.0) == 1.0


def test_gamma_even_in_q():
    a = mode_coefficients(np.pi / 6, 0.3, 0.2)
    b = mode_coefficients(-np.pi / 6, 0.3, 0.2)
    assert a.gamma_q == pytest.approx(b.gamma_q, abs=1e-14)


def test_gamma_against_high_precision():
    mpmath.mp.dps = 200
    tau = mpmath.pi / 28
    q = mpmath.pi / 6
    t0, t1 = 2 * tau, 4 * tau
    ref = mpmath.acos(mpmath.cos(t1 / 2) * mpmath.cos(t0) + mpmath.cos(q) * mpmath.sin(t1 / 2) * mpmath.sin(t0))
    coeff = mode_coefficients(np.pi / 6, TAU, TAU)
    assert abs(coeff.gamma_q - float(ref)) < 1e-14
    assert coeff.t0 == pytest.approx(2 * TAU) and coeff.t1 == pytest.approx(4 * TAU)


def test_gamma_matches_fock_space_eigenphases():
    q, tau0, tau1 = 3 * np.pi / 10, 0.41, 0.17
    u = pair_fock_propagator(q, tau0, tau1)
    even = u[np.ix_([0, 3], [0, 3])]
    phases = np.sort(np.abs(np.angle(np.linalg.eigvals(even))))
    gamma = mode_coefficients(q, tau0, tau1).gamma_q
    assert np.allclose(phases, [gamma, gamma], atol=1e-12)


def test_pair_matrix_is_even_block_of_fock_map():
    q, tau0, tau1 = -np.pi / 4, 0.3, 0.55
    u = pair_fock_propagator(q, tau0, tau1)
    assert np.allclose(u[np.ix_([0, 3], [0, 3])], pair_matrix(q, tau0, tau1), atol=1e-13)
    # odd parity never mixes with the vacuum sector
    assert np.abs(u[np.ix_([1, 2], [0, 3])]).max() < 1e-14


def test_amplitudes_at_zero_kicks():
    c = mode_coefficients(np.pi / 3, 0.2, 0.3)
    a = mode_amplitudes(c, 0)
    assert a.phi_q == pytest.approx(c.alpha_plus**2 + c.alpha_minus**2)
    assert a.psi_q == pytest.approx(c.alpha_plus * c.beta_plus + c.alpha_minus * c.beta_minus)
    assert a.phi_q == pytest.approx(1.0) and abs(a.psi_q) < 1e-12


def test_amplitudes_conjugate_under_time_reversal():
    c = mode_coefficients(np.pi / 3, 0.2, 0.3)
    assert mode_amplitudes(c, -7).phi_q == pytest.approx(np.conj(mode_amplitudes(c, 7).phi_q))


@pytest.mark.parametrize("q", momentum_grid(12).modes)
def test_amplitudes_match_per_mode_evolution(q):
    n = np.arange(1, 51)
    amps = mode_amplitudes(mode_coefficients(q, TAU, np.pi / 56), n)
    phi, psi = brute_force_amplitudes(q, TAU, np.pi / 56, n)
    assert np.abs(amps.phi_q - phi).max() <= 1e-10
    assert np.abs(amps.psi_q - psi).max() <= 1e-10
    assert np.abs(amps.phi_q).max() <= 1 + 1e-9


def test_decoupled_mode_is_singular():
    with pytest.raises(SingularModeError):
        mode_coefficients(0.0, 0.3, 0.2)
    with pytest.raises(SingularModeError):
        mode_coefficients(np.pi / 3, 0.3, 0.0)


def test_singular_modes_fall_back_to_brute_force():
    # tau1 = pi/2 makes sin(t1/2) vanish for every mode
    phi, psi = grid_amplitudes(6, 0.3, np.pi / 2, np.arange(5))
    for k, q in enumerate(momentum_grid(6).modes):
        ref_phi, ref_psi = brute_force_amplitudes(q, 0.3, np.pi / 2, np.arange(5))
        assert np.allclose(phi[k], ref_phi) and np.allclose(psi[k], ref_psi)


def test_no_kicks_gives_unity():
    assert tmotoc_analytic(8, TAU, TAU, 2, 5, 0) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("delta", [0, 1, 3])
def test_matches_exact_diagonalization(delta):
    spec = SpinChainSpec(8, "closed").with_period(TAU)
    ed = otoc_single_site(spec, ObservablePair("single_site_z", 2, 2 + delta), 120).f
    jw = tmotoc_analytic(8, TAU, TAU, 2, 2 + delta, np.arange(121))
    assert np.abs(ed - jw).max() < 1e-10


def test_unequal_periods_and_couplings_absorbed():
    # J_x and h_z only enter through J_x tau1 and h_z tau0
    spec = SpinChainSpec(6, "closed", j_x=2.0, h_z=0.5, tau0=0.4, tau1=0.05)
    ed = otoc_single_site(spec, ObservablePair("single_site_z", 1, 2), 60).f
    jw = tmotoc_analytic(6, 0.2, 0.1, 1, 2, np.arange(61))
    assert np.abs(ed - jw).max() < 1e-10


def test_translation_invariance_and_bound():
    n = np.arange(1001)
    ref = tmotoc_analytic(10, TAU, np.pi / 56, 1, 4, n)
    for l in (3, 7, 9):
        m = (l + 3 - 1) % 10 + 1
        assert np.abs(tmotoc_analytic(10, TAU, np.pi / 56, l, m, n) - ref).max() < 1e-12
    assert np.abs(ref).max() <= 1 + 1e-8


def test_departure_time_equals_ed():
    spec = SpinChainSpec(12, "closed", tau0=np.pi / 56, tau1=np.pi / 28)
    ed = otoc_single_site(spec, ObservablePair("single_site_z", 3, 6), 40)
    jw_f = tmotoc_analytic(12, np.pi / 56, np.pi / 28, 3, 6, np.arange(41))
    jw = type(ed)(n=ed.n, c=1 - jw_f.real, f=jw_f, protocol=ed.protocol, spec=spec,
                  trace_mode="jw_analytic")
    assert departure_time(jw) == departure_time(ed)


def test_revival_within_horizon():
    n = np.arange(5001)
    f = tmotoc_analytic(12, TAU, TAU, 1, 1, n)
    revived = np.nonzero(np.abs(f[1:] - 1) < 1e-3)[0] + 1
    assert revived.size > 0
    assert revived[0] == 593


def _best_time(n_sites, n, repeats=3):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        tmotoc_analytic(n_sites, TAU, TAU, 1, 1, n)
        best = min(best, time.perf_counter() - start)
    return best


def test_cubic_cost():
    n = np.arange(600)
    ratio = _best_time(24, n) / _best_time(12, n)
    assert 6 <= ratio <= 10
