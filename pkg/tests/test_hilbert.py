import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kicked_otoc.errors import ContractViolation
from kicked_otoc.hilbert import (
    RandomEnsembleSpec,
    SpinChainSpec,
    build_hamiltonian,
    ising_energies,
    kron_left,
    kron_right,
    operator_to_x_basis,
    pauli_site,
    sample,
    unitary_exp,
)

from conftest import oracle_terms, site_op


def test_single_site_z():
    assert np.array_equal(pauli_site("z", 1, 1), np.diag([1, -1]))


def test_x_on_second_of_two_sites():
    expected = np.kron(np.eye(2), [[0, 1], [1, 0]])
    assert np.array_equal(pauli_site("x", 2, 2), expected)


def test_y_squares_to_identity():
    y = pauli_site("y", 1, 2)
    assert np.allclose(y @ y, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("site", [0, 4])
def test_site_out_of_range(site):
    with pytest.raises(ValueError):
        pauli_site("x", site, 3)


@settings(max_examples=30, deadline=None)
@given(axis=st.sampled_from("xyz"), n=st.integers(1, 5), data=st.data())
def test_pauli_involutive_traceless_and_msb_first(axis, n, data):
    site = data.draw(st.integers(1, n))
    p = pauli_site(axis, site, n)
    assert np.abs(p @ p - np.eye(2**n)).max() <= 1e-12
    assert abs(np.trace(p)) <= 1e-12
    assert np.array_equal(p, site_op(axis, site, n))


@settings(max_examples=30, deadline=None)
@given(a=st.sampled_from("xyz"), b=st.sampled_from("xyz"), n=st.integers(2, 4), data=st.data())
def test_distinct_sites_commute(a, b, n, data):
    l = data.draw(st.integers(1, n))
    m = data.draw(st.integers(1, n).filter(lambda k: k != l))
    p, q = pauli_site(a, l, n), pauli_site(b, m, n)
    assert np.abs(p @ q - q @ p).max() == 0


def test_two_site_open_bond():
    h = build_hamiltonian(SpinChainSpec(2), "XX")
    assert np.array_equal(h, np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]]))


def test_three_site_z_spectrum():
    h = build_hamiltonian(SpinChainSpec(3, "closed"), "Z")
    assert sorted(np.linalg.eigvalsh(h)) == pytest.approx([-3, -1, -1, -1, 1, 1, 1, 3])


def test_closed_xx_traceless():
    assert np.trace(build_hamiltonian(SpinChainSpec(4, "closed"), "XX")) == 0


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("boundary", ["open", "closed"])
def test_terms_match_kronecker_oracle(n, boundary):
    spec = SpinChainSpec(n, boundary)
    for term, ref in zip(("XX", "X", "Z"), oracle_terms(n, boundary)):
        h = build_hamiltonian(spec, term)
        assert np.abs(h - ref).max() == 0
        assert np.abs(h - h.conj().T).max() <= 1e-12


def test_bond_count():
    open_xx = build_hamiltonian(SpinChainSpec(5, "open"), "XX")
    closed_xx = build_hamiltonian(SpinChainSpec(5, "closed"), "XX")
    # each bond contributes +1 on the all-plus x state
    plus = np.full(32, 32 ** -0.5)
    assert plus @ open_xx @ plus == pytest.approx(4)
    assert plus @ closed_xx @ plus == pytest.approx(5)


def test_ising_energies_are_x_basis_diagonal():
    spec = SpinChainSpec(4, "closed", j_x=0.7, h_x=-1.3)
    h = spec.j_x * build_hamiltonian(spec, "XX") + spec.h_x * build_hamiltonian(spec, "X")
    rotated = operator_to_x_basis(h, 4)
    assert np.abs(rotated - np.diag(ising_energies(spec))).max() < 1e-12


def test_spec_validation():
    with pytest.raises(ValueError):
        SpinChainSpec(1)
    with pytest.raises(ValueError):
        SpinChainSpec(4, tau0=-0.1)
    with pytest.raises(ValueError):
        SpinChainSpec(4, boundary="periodic")


def test_qubit_cap(monkeypatch):
    monkeypatch.setenv("OTOC_MAX_QUBITS", "6")
    with pytest.raises(ValueError, match="cap"):
        SpinChainSpec(8)


def test_exp_at_zero_is_identity(rng):
    m = rng.standard_normal((6, 6))
    assert np.allclose(unitary_exp(m + m.T, 0.0), np.eye(6), atol=1e-14)


def test_exp_diagonal():
    u = unitary_exp(np.diag([1.0, -1.0]).astype(complex), np.pi / 2)
    assert np.allclose(u, np.diag([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)]), atol=1e-14)


def test_exp_against_taylor_series():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    t = 0.83
    term, total = np.eye(2, dtype=complex), np.eye(2, dtype=complex)
    for k in range(1, 31):
        term = term @ (-1j * t * sx) / k
        total = total + term
    assert np.abs(unitary_exp(sx, t) - total).max() <= 1e-12


def test_exp_group_property(rng):
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    h = a + a.conj().T
    lhs = unitary_exp(h, 0.4) @ unitary_exp(h, 1.1)
    assert np.abs(lhs - unitary_exp(h, 1.5)).max() <= 1e-10
    u = unitary_exp(h, 2.7)
    assert np.abs(u.conj().T @ u - np.eye(8)).max() <= 1e-10


def test_exp_rejects_non_hermitian():
    with pytest.raises(ContractViolation):
        unitary_exp(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_kron_helpers(rng):
    a1, a2 = rng.standard_normal((4, 4)), rng.standard_normal((8, 8))
    x = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    full = np.kron(a1, a2)
    assert np.allclose(kron_left(a1, a2, x), full @ x)
    assert np.allclose(kron_right(x, a1, a2), x @ full)
    vec = x[:, 0].copy()
    assert np.allclose(kron_left(a1, a2, vec), full @ vec)


def test_gue_hermitian_and_reproducible():
    spec = RandomEnsembleSpec("GUE", 16, 42)
    w = sample(spec)
    assert np.abs(w - w.conj().T).max() == 0
    assert sample(spec).tobytes() == w.tobytes()
    assert sample(RandomEnsembleSpec("GUE", 16, 43)).tobytes() != w.tobytes()


def test_gue_diagonal_mean_vanishes():
    draws = np.array([np.diag(sample(RandomEnsembleSpec("GUE", 2, s))).real
                      for s in range(10_000)])
    # unit variance diagonal: the mean of 10^4 draws has sigma = 1/100
    assert np.all(np.abs(draws.mean(axis=0)) < 3 / 100)


def test_gue_second_moment_is_dim_identity():
    acc = np.zeros((4, 4), dtype=complex)
    for s in range(10_000):
        w = sample(RandomEnsembleSpec("GUE", 4, s))
        acc += w @ w
    mean = acc / 10_000
    assert np.abs(mean - 4 * np.eye(4)).max() < 0.15


def test_cue_unitary():
    u = sample(RandomEnsembleSpec("CUE", 32, 7))
    assert np.abs(u.conj().T @ u - np.eye(32)).max() <= 1e-10
    assert sample(RandomEnsembleSpec("CUE", 32, 7)).tobytes() == u.tobytes()


def test_haar_state_normalized():
    psi = sample(RandomEnsembleSpec("HaarState", 64, 3))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_sample_rejects_tiny_dim():
    with pytest.raises(ValueError):
        sample(RandomEnsembleSpec("GUE", 1, 0))
