"""Dense complex linear algebra for 1-3 qubit registers.

Everything in this module is a plain ``numpy.ndarray`` of complex128; the
functions below are the only operations the simulators need: Pauli operators,
tensor embedding, Hermitian exponentiation, unitary state update, partial
trace and expectation values.

Conventions (fixed throughout the package):

* basis ordering ``(|0>, |1>)`` with ``sigma_z = diag(1, -1)``, so ``|0>`` is
  the ground state of a qubit with free Hamiltonian ``-(omega/2) sigma_z``;
* ``sigma_minus = |0><1|`` lowers, ``sigma_plus = |1><0|`` raises;
* site 0 is the leftmost tensor factor.
"""

from __future__ import annotations

import numpy as np

# Tolerances sized to survive thousands of sequential 8x8 unitary
# applications in double precision.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = -1e-9
UNITARITY_TOL = 1e-12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 0], [1, 0]], dtype=complex),
    "minus": np.array([[0, 1], [0, 0]], dtype=complex),
}

IDENTITY_2 = np.eye(2, dtype=complex)


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 operator for ``axis`` in {x, y, z, plus, minus}."""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected one of {sorted(_PAULI)}")


def ket(*bits: int) -> np.ndarray:
    """Computational-basis state vector |b0 b1 ...> with bit 0 leftmost."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    index = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError("bits must be 0 or 1")
        index = (index << 1) | b
    psi[index] = 1.0
    return psi


def plus_ket(phase: float = 0.0) -> np.ndarray:
    """Single-qubit state (|0> + e^{i phase} |1>)/sqrt(2)."""
    return np.array([1.0, np.exp(1j * phase)], dtype=complex) / np.sqrt(2.0)


def density(psi: np.ndarray) -> np.ndarray:
    """Pure-state density matrix |psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def embed(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Tensor-embed a 2x2 operator at ``site`` into an ``n_qubits`` register.

    Identities fill all other sites; site 0 is the leftmost factor.
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError("embed expects a 2x2 operator")
    if not 0 <= site < n_qubits:
        raise ValueError(f"site {site} out of range for {n_qubits} qubits")
    out = np.array([[1.0 + 0j]])
    for s in range(n_qubits):
        out = np.kron(out, op if s == site else IDENTITY_2)
    return out


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def unitary_of(h: np.ndarray, t: float) -> np.ndarray:
    """U = exp(-i h t) for Hermitian ``h`` via spectral decomposition."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("unitary_of requires a Hermitian generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def check_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> None:
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > tol:
        raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3e})")


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = PSD_TOL,
) -> None:
    """Raise ValueError unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > herm_tol:
        raise ValueError(f"state is not Hermitian (max dev {herm:.3e})")
    tr = abs(rho.trace() - 1.0)
    if tr > trace_tol:
        raise ValueError(f"state trace deviates from 1 by {tr:.3e}")
    lo = np.linalg.eigvalsh(rho).min()
    if lo < psd_tol:
        raise ValueError(f"state has negative eigenvalue {lo:.3e}")


def apply(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Unitary state update U rho U^dag."""
    rho = np.asarray(rho, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if rho.shape != u.shape:
        raise ValueError(f"dimension mismatch: state {rho.shape}, unitary {u.shape}")
    return u @ rho @ u.conj().T


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Reduced state of one factor of a bipartite register.

    ``dims = (dim_a, dim_b)`` declares the factorization (a leftmost) and
    ``keep`` selects the factor (0 or 1) that survives.
    """
    rho = np.asarray(rho, dtype=complex)
    da, db = dims
    if rho.shape != (da * db, da * db):
        raise ValueError(f"state of dim {rho.shape[0]} does not factor as {da}x{db}")
    if keep not in (0, 1):
        raise ValueError("keep must be 0 (left factor) or 1 (right factor)")
    r = rho.reshape(da, db, da, db)
    if keep == 0:
        return np.trace(r, axis1=1, axis2=3)
    return np.trace(r, axis1=0, axis2=2)


def expect(rho: np.ndarray, obs: np.ndarray, imag_tol: float = 1e-10) -> float:
    """Tr[rho obs] for a Hermitian observable; the imaginary residue must
    stay below ``imag_tol`` or the state is considered corrupted."""
    rho = np.asarray(rho, dtype=complex)
    obs = np.asarray(obs, dtype=complex)
    if rho.shape != obs.shape:
        raise ValueError("dimension mismatch between state and observable")
    if not is_hermitian(obs):
        raise ValueError("observable must be Hermitian")
    val = np.trace(rho @ obs)
    if abs(val.imag) > imag_tol:
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)
