"""Computational-basis utilities for spin-1/2 chains.

Basis index convention: site 1 is the most significant bit, and bit value 0
is spin up (sigma^z = +1).  All operators are dense ``complex128`` arrays.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.stats import unitary_group

from .errors import ContractViolation

Axis = Literal["x", "y", "z"]
Boundary = Literal["open", "closed"]
Term = Literal["XX", "X", "Z"]

DEFAULT_MAX_QUBITS = 14

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def max_qubits() -> int:
    """Hard cap on chain length, read from ``OTOC_MAX_QUBITS``."""
    raw = os.environ.get("OTOC_MAX_QUBITS", "")
    return int(raw) if raw.strip() else DEFAULT_MAX_QUBITS


def _check_size(n_sites: int) -> None:
    cap = max_qubits()
    if n_sites > cap:
        raise ValueError(f"n_sites={n_sites} exceeds the qubit cap {cap} (OTOC_MAX_QUBITS)")


@dataclass(frozen=True)
class SpinChainSpec:
    """Kicked Ising chain: sizes, couplings and the two kick durations.

    A single-period protocol with period ``tau`` is ``tau0 = tau1 = tau``.
    The default couplings (``j_x=1, h_x=0, h_z=1``) give the transverse-field
    Floquet chain without longitudinal field.
    """

    n_sites: int
    boundary: Boundary = "open"
    j_x: float = 1.0
    h_x: float = 0.0
    h_z: float = 1.0
    tau0: float = 0.0
    tau1: float = 0.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if self.boundary not in ("open", "closed"):
            raise ValueError(f"boundary must be 'open' or 'closed', got {self.boundary!r}")
        if self.tau0 < 0 or self.tau1 < 0:
            raise ValueError("kick durations tau0, tau1 must be non-negative")
        _check_size(self.n_sites)

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    @property
    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour pairs (1-based); the closed chain adds (N, 1)."""
        pairs = [(l, l + 1) for l in range(1, self.n_sites)]
        if self.boundary == "closed":
            pairs.append((self.n_sites, 1))
        return pairs

    def with_period(self, tau: float) -> "SpinChainSpec":
        return replace(self, tau0=tau, tau1=tau)

    def to_dict(self) -> dict:
        return asdict(self)


def _bit(site: int, n_sites: int) -> int:
    return 1 << (n_sites - site)


@lru_cache(maxsize=8)
def site_signs(n_sites: int) -> np.ndarray:
    """Row ``l-1`` holds the sigma^z_l eigenvalue (+1/-1) of every basis state."""
    idx = np.arange(2**n_sites)
    bits = (idx[None, :] >> (n_sites - 1 - np.arange(n_sites))[:, None]) & 1
    signs = (1 - 2 * bits).astype(np.int8)
    signs.flags.writeable = False
    return signs


def pauli_site(axis: Axis, site: int, n_sites: int) -> np.ndarray:
    """Dense ``I ⊗ … ⊗ sigma^axis ⊗ … ⊗ I`` acting on ``site`` (1-based)."""
    if axis not in PAULI:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} outside 1..{n_sites}")
    _check_size(n_sites)
    left = np.eye(2 ** (site - 1))
    right = np.eye(2 ** (n_sites - site))
    return np.kron(np.kron(left, PAULI[axis]), right)


def build_hamiltonian(spec: SpinChainSpec, term: Term) -> np.ndarray:
    """Dense ``H_xx``, ``H_x`` or ``H_z`` for the chain (unit coefficients).

    Built by index arithmetic: sigma^x strings are bit-flip permutations and
    sigma^z sums are diagonal, so no Kronecker products are formed.
    """
    n, d = spec.n_sites, spec.dim
    idx = np.arange(d)
    h = np.zeros((d, d), dtype=complex)
    if term == "Z":
        h[idx, idx] = site_signs(n).sum(axis=0)
    elif term == "X":
        for l in range(1, n + 1):
            h[idx ^ _bit(l, n), idx] += 1.0
    elif term == "XX":
        for a, b in spec.bonds:
            h[idx ^ (_bit(a, n) | _bit(b, n)), idx] += 1.0
    else:
        raise ValueError(f"unknown Hamiltonian term {term!r}")
    return h


def ising_energies(spec: SpinChainSpec) -> np.ndarray:
    """Eigenvalues of ``j_x*H_xx + h_x*H_x`` in the sigma^x product basis.

    Entry ``i`` belongs to the x-basis state whose bits encode |+> (0) and
    |-> (1) per site, in the same site ordering as the computational basis.
    """
    z = site_signs(spec.n_sites).astype(float)
    bond = sum((z[a - 1] * z[b - 1] for a, b in spec.bonds), np.zeros(spec.dim))
    return spec.j_x * bond + spec.h_x * z.sum(axis=0)


def assert_hermitian(h: np.ndarray, tol: float = 1e-10) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    err = float(np.abs(h - h.conj().T).max(initial=0.0))
    if err > tol * scale:
        raise ContractViolation(f"matrix is not Hermitian (max deviation {err:.3e})")


def unitary_exp(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` by spectral decomposition."""
    assert_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


# -- Kronecker-structured application ---------------------------------------

def split_dims(n_sites: int) -> tuple[int, int]:
    """Factor ``2**n_sites`` as ``m1 * m2`` with the two halves of the chain."""
    h = n_sites // 2
    return 2**h, 2 ** (n_sites - h)


def kron_left(a1: np.ndarray, a2: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(a1 ⊗ a2) @ x`` without forming the Kronecker product."""
    m1, m2 = a1.shape[0], a2.shape[0]
    cols = x.shape[1] if x.ndim == 2 else 1
    y = (a1 @ x.reshape(m1, m2 * cols)).reshape(m1, m2, cols)
    y = np.matmul(a2, y)
    return y.reshape(x.shape)


def kron_right(x: np.ndarray, b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """``x @ (b1 ⊗ b2)`` without forming the Kronecker product."""
    m1, m2 = b1.shape[0], b2.shape[0]
    rows = x.shape[0]
    y = (x.reshape(rows * m1, m2) @ b2).reshape(rows, m1, m2)
    y = np.matmul(b1.T, y)
    return y.reshape(rows, m1 * m2)


@lru_cache(maxsize=16)
def _hadamard_power(k: int) -> np.ndarray:
    h = np.array([[1.0]])
    h2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    for _ in range(k):
        h = np.kron(h, h2)
    h.flags.writeable = False
    return h


def hadamard_factors(n_sites: int) -> tuple[np.ndarray, np.ndarray]:
    """The two half-chain factors of ``H2^{⊗N}`` (real, symmetric, involutive)."""
    h = n_sites // 2
    return _hadamard_power(h), _hadamard_power(n_sites - h)


def to_x_basis(a: np.ndarray, n_sites: int) -> np.ndarray:
    """Rotate a vector (or the columns of a matrix) into the sigma^x product basis."""
    h1, h2 = hadamard_factors(n_sites)
    return kron_left(h1, h2, a.astype(complex, copy=False))


def operator_to_x_basis(op: np.ndarray, n_sites: int) -> np.ndarray:
    """``Had · op · Had`` with ``Had = H2^{⊗N}`` (its own inverse)."""
    h1, h2 = hadamard_factors(n_sites)
    return kron_right(kron_left(h1, h2, op.astype(complex, copy=False)), h1, h2)


# -- random ensembles ---------------------------------------------------------

Ensemble = Literal["GUE", "CUE", "HaarState"]


@dataclass(frozen=True)
class RandomEnsembleSpec:
    ensemble: Ensemble
    dim: int
    seed: int


def sample(spec: RandomEnsembleSpec) -> np.ndarray:
    """Draw one GUE matrix, CUE matrix or Haar-random state.

    GUE samples are ``(M + M^†)/2`` with independent standard normal real and
    imaginary parts in ``M``, so that the ensemble mean of ``W^2`` is
    ``dim * I``.  The same ``(ensemble, dim, seed)`` always yields the same bytes.
    """
    if spec.dim < 2:
        raise ValueError("dim must be >= 2")
    rng = np.random.default_rng(spec.seed)
    d = spec.dim
    if spec.ensemble == "GUE":
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return (m + m.conj().T) / 2
    if spec.ensemble == "CUE":
        return unitary_group.rvs(d, random_state=rng)
    if spec.ensemble == "HaarState":
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        return v / np.linalg.norm(v)
    raise ValueError(f"unknown ensemble {spec.ensemble!r}")
