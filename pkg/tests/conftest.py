"""Shared brute-force oracles.

Everything here is deliberately naive: operators are assembled from explicit
Kronecker products and propagators come from ``scipy.linalg.expm``, so the
package's index arithmetic and eigen-exponentials are checked against an
unrelated code path.
"""
from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
PAULIS = {"x": SX, "y": SY, "z": SZ}


def kron_string(factors):
    return reduce(np.kron, factors)


def site_op(axis, site, n):
    return kron_string([PAULIS[axis] if k == site else I2 for k in range(1, n + 1)])


def oracle_terms(n, boundary):
    bonds = [(k, k + 1) for k in range(1, n)]
    if boundary == "closed":  # N bonds, so N=2 counts its bond twice
        bonds.append((n, 1))
    hxx = sum(site_op("x", a, n) @ site_op("x", b, n) for a, b in bonds)
    hx = sum(site_op("x", k, n) for k in range(1, n + 1))
    hz = sum(site_op("z", k, n) for k in range(1, n + 1))
    return hxx, hx, hz


def oracle_floquet(n, boundary, j_x, h_x, h_z, tau0, tau1):
    hxx, hx, hz = oracle_terms(n, boundary)
    return expm(-1j * tau1 * (j_x * hxx + h_x * hx)) @ expm(-1j * tau0 * h_z * hz)


def oracle_single_site(u, axis, l, m, n, n_max):
    """``C(n) = ½‖[W(n), V]ψ‖²`` and ``F(n)`` from explicit dense powers."""
    w0, v = site_op(axis, l, n), site_op(axis, m, n)
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    if axis == "x":
        psi = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    out_c, out_f = [], []
    un = np.eye(2**n, dtype=complex)
    for _ in range(n_max + 1):
        w = un.conj().T @ w0 @ un
        out_f.append(psi.conj() @ w @ v @ w @ v @ psi)
        comm = w @ v - v @ w
        out_c.append(0.5 * np.linalg.norm(comm @ psi) ** 2)
        un = u @ un
    return np.array(out_c), np.array(out_f)


def oracle_block(u, n, n_max):
    """Block OTOC ``-Tr([W(n), V]²) / (2·2^N)`` for the half-chain x blocks."""
    half = n // 2
    w0 = sum(site_op("x", k, n) for k in range(1, half + 1)) * (2 / n)
    v = sum(site_op("x", k, n) for k in range(half + 1, n + 1)) * (2 / n)
    out = []
    un = np.eye(2**n, dtype=complex)
    for _ in range(n_max + 1):
        w = un.conj().T @ w0 @ un
        comm = w @ v - v @ w
        out.append(-np.trace(comm @ comm).real / (2 * 2**n))
        un = u @ un
    return np.array(out)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# -- acceptance summary ----------------------------------------------------------

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """``criterion(k, ok, detail)`` logs one summary line, then asserts ``ok``."""
    log = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(k, ok, detail):
        log[k] = (bool(ok), detail)
        assert ok, f"criterion {k}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_ACCEPTANCE, {})
    if not log:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for k in sorted(log):
        ok, detail = log[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
