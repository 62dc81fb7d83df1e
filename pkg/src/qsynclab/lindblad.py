"""Quantum optical master equation for two collectively damped qubits.

    drho/dt = -i[H_s + H_d, rho] + D_-(rho) + D_+(rho) = L(rho)

with H_s = sum_i omega_i Z_i (literal, no 1/2), exchange coupling
H_d = f12 (sp_1 sm_2 + sp_2 sm_1), emission

    D_-(rho) = sum_ij gamma_ij (nbar+1) (sm_j rho sp_i - {sp_i sm_j, rho}/2)

and absorption D_+ with sp/sm swapped and prefactor gamma_ij nbar. Decay
rates are gamma_i = omega_i^3 g on the diagonal and
gamma_ij = sqrt(gamma_i gamma_j) a12 off it; a12 <= 1 keeps the generator
completely positive. sm = |0><1| so emission relaxes toward |00>.

The generator is time independent, so propagation applies a precomputed
one-step matrix exponential to the row-major vectorized state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SimulationError
from .qdyn import IDENTITY_2, check_density_matrix, embed, pauli
from .trajectory import Trajectory

_SX = pauli("x")
_SZ = pauli("z")
_SM = pauli("minus")
_I4 = np.eye(4, dtype=complex)

_SM_OPS = (embed(_SM, 0, 2), embed(_SM, 1, 2))
_SP_OPS = tuple(op.conj().T for op in _SM_OPS)
_W_SX1 = np.kron(_SX, IDENTITY_2).T.reshape(16)
_W_SX2 = np.kron(IDENTITY_2, _SX).T.reshape(16)


@dataclass(frozen=True)
class MeConfig:
    """Master-equation parameters (hbar = 1 units)."""

    omega1: float
    omega2: float
    f12: float
    g: float
    a12: float = 1.0
    n_bar: float = 0.0
    t_max: float = 500.0
    sample_dt: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.a12 <= 1.0:
            raise ValueError("a12 must lie in [0, 1]")
        if self.n_bar < 0:
            raise ValueError("n_bar must be non-negative")
        if self.g <= 0:
            raise ValueError("g must be positive")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.sample_dt <= 0:
            raise ValueError("sample_dt must be positive")
        if self.omega2 <= 0:
            raise ValueError("omega2 must be positive")


def _left(a: np.ndarray) -> np.ndarray:
    return np.kron(a, _I4)


def _right(b: np.ndarray) -> np.ndarray:
    return np.kron(_I4, b.T)


def _sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # vec(A rho B) = (A kron B^T) vec(rho), row-major vec
    return np.kron(a, b.T)


def decay_rates(cfg: MeConfig) -> np.ndarray:
    """2x2 rate matrix gamma_ij = sqrt(gamma_i gamma_j) a(k0 r_ij)."""
    g1 = cfg.omega1 ** 3 * cfg.g
    g2 = cfg.omega2 ** 3 * cfg.g
    cross = np.sqrt(g1 * g2) * cfg.a12
    return np.array([[g1, cross], [cross, g2]])


def hamiltonian(cfg: MeConfig) -> np.ndarray:
    """H_s + H_d on the two-qubit register."""
    h = cfg.omega1 * embed(_SZ, 0, 2) + cfg.omega2 * embed(_SZ, 1, 2)
    h = h + cfg.f12 * (_SP_OPS[0] @ _SM_OPS[1] + _SP_OPS[1] @ _SM_OPS[0])
    return h


def emission_dissipator(cfg: MeConfig) -> np.ndarray:
    """Superoperator of the spontaneous/thermal emission terms."""
    gam = decay_rates(cfg)
    out = np.zeros((16, 16), dtype=complex)
    for i in range(2):
        for j in range(2):
            rate = gam[i, j] * (cfg.n_bar + 1.0)
            anti = _SP_OPS[i] @ _SM_OPS[j]
            out += rate * (_sandwich(_SM_OPS[j], _SP_OPS[i])
                           - 0.5 * (_left(anti) + _right(anti)))
    return out


def absorption_dissipator(cfg: MeConfig) -> np.ndarray:
    """Superoperator of the thermal absorption terms (vanishes at nbar=0)."""
    gam = decay_rates(cfg)
    out = np.zeros((16, 16), dtype=complex)
    for i in range(2):
        for j in range(2):
            rate = gam[i, j] * cfg.n_bar
            anti = _SM_OPS[i] @ _SP_OPS[j]
            out += rate * (_sandwich(_SP_OPS[j], _SM_OPS[i])
                           - 0.5 * (_left(anti) + _right(anti)))
    return out


def liouvillian(cfg: MeConfig) -> np.ndarray:
    """16x16 generator acting on the vectorized density matrix."""
    h = hamiltonian(cfg)
    commutator = -1j * (_left(h) - _right(h))
    return commutator + emission_dissipator(cfg) + absorption_dissipator(cfg)


def step_propagator(cfg: MeConfig) -> np.ndarray:
    """exp(L * sample_dt), the one-sample propagator."""
    return scipy.linalg.expm(liouvillian(cfg) * cfg.sample_dt)


def _sample_count(cfg: MeConfig) -> int:
    n = int(round(cfg.t_max / cfg.sample_dt))
    if abs(n * cfg.sample_dt - cfg.t_max) > 1e-9 * max(1.0, cfg.t_max):
        raise ValueError("t_max must be an integer multiple of sample_dt")
    return n


def propagate(rho0: np.ndarray, cfg: MeConfig) -> Trajectory:
    """Sample (<sx_1>, <sx_2>) at t = 0, sample_dt, ..., t_max."""
    check_density_matrix(rho0)
    n = _sample_count(cfg)
    prop = step_propagator(cfg)
    v = np.asarray(rho0, dtype=complex).reshape(16)
    sx1 = np.empty(n + 1)
    sx2 = np.empty(n + 1)
    trace_vec = _I4.reshape(16)
    for k in range(n + 1):
        if k:
            v = prop @ v
        drift = abs(v @ trace_vec - 1.0)
        if drift > 1e-8:
            raise SimulationError(f"trace deviation {drift:.3e} at sample {k}")
        sx1[k] = (v @ _W_SX1).real
        sx2[k] = (v @ _W_SX2).real
    times = np.arange(n + 1, dtype=float) * cfg.sample_dt
    return Trajectory("me", times, sx1, sx2)


def propagate_batch(configs: list, rho0: np.ndarray, head: int, tail: int):
    """Propagate many configs at once; record post-initial samples.

    Returns ``(head_sx1, head_sx2, tail_sx1, tail_sx2)``: the first ``head``
    samples after t=0 and the last ``tail`` samples of the run. All configs
    must share ``t_max`` and ``sample_dt``.
    """
    if not configs:
        raise ValueError("empty config batch")
    n = _sample_count(configs[0])
    if any(_sample_count(c) != n for c in configs):
        raise ValueError("all configs in a batch must share the sampling grid")
    if head > n or tail > n + 1:
        raise ValueError("head/tail exceed the number of samples")
    check_density_matrix(rho0)
    props = np.stack([step_propagator(c) for c in configs])
    m = len(configs)
    v = np.broadcast_to(np.asarray(rho0, dtype=complex).reshape(16, 1), (m, 16, 1)).copy()
    h1 = np.zeros((m, head))
    h2 = np.zeros((m, head))
    t1 = np.zeros((m, max(tail, 1)))
    t2 = np.zeros((m, max(tail, 1)))
    trace_vec = _I4.reshape(16)
    # sample index runs 0..n; the tail window may include the t=0 sample
    # only when tail = n+1, which build_dataset never requests.
    for k in range(n + 1):
        if k:
            v = np.matmul(props, v)
        e1 = (v[:, :, 0] @ _W_SX1).real
        e2 = (v[:, :, 0] @ _W_SX2).real
        if k == n:
            drift = np.abs(v[:, :, 0] @ trace_vec - 1.0).max()
            if drift > 1e-8:
                raise SimulationError(f"trace deviation {drift:.3e} at final sample")
        if 1 <= k <= head:
            h1[:, k - 1] = e1
            h2[:, k - 1] = e2
        if tail:
            t1[:, k % tail] = e1
            t2[:, k % tail] = e2
    if tail:
        perm = np.arange(n + 1 - tail, n + 1) % tail
        t1, t2 = t1[:, perm], t2[:, perm]
    else:
        t1 = t1[:, :0]
        t2 = t2[:, :0]
    return h1, h2, t1, t2
