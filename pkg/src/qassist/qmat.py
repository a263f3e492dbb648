"""Small dense complex matrices (2x2 and 4x4) and spin operators.

Two-qubit basis ordering is |00>, |01>, |10>, |11>, where |0> is the
S_z = +1/2 state. Qubit 1 is the system, qubit 2 the assistant.
"""

import numpy as np

HERMITIAN_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
SPLUS = SX + 1j * SY
SMINUS = SX - 1j * SY
PAULI = (2 * SX, 2 * SY, 2 * SZ)


def _check_dim(m, dims, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise ValueError(f"{name} must be square with dimension in {dims}, got shape {m.shape}")
    return m


def kron(a, b):
    """Tensor product of two 2x2 matrices (qubit 1 on the left)."""
    a = _check_dim(a, (2,), "a")
    b = _check_dim(b, (2,), "b")
    return np.kron(a, b).astype(complex)


def spin_op(axis, qubit):
    """S_axis acting on `qubit` (1 or 2) of the pair; axis in 'xyz'."""
    op = {"x": SX, "y": SY, "z": SZ}[axis]
    if qubit == 1:
        return kron(op, I2)
    if qubit == 2:
        return kron(I2, op)
    raise ValueError(f"qubit must be 1 or 2, got {qubit!r}")


def is_hermitian(h, tol=HERMITIAN_TOL):
    h = np.asarray(h)
    return np.max(np.abs(h - h.conj().T), initial=0.0) <= tol


def is_unitary(u, tol=1e-10):
    u = np.asarray(u)
    return np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= tol


def expm_hermitian(h, t):
    """exp(-i h t) by spectral decomposition of a Hermitian h."""
    h = _check_dim(h, (2, 4), "h")
    if not is_hermitian(h):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    # symmetrize so eigh sees exactly Hermitian input
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def partial_trace_assistant(rho):
    """Reduced 2x2 state of qubit 1 after tracing out qubit 2."""
    rho = _check_dim(rho, (4,), "rho")
    return np.einsum("ajbj->ab", rho.reshape(2, 2, 2, 2))


def partial_trace_system(rho):
    """Reduced 2x2 state of qubit 2 after tracing out qubit 1."""
    rho = _check_dim(rho, (4,), "rho")
    return np.einsum("jajb->ab", rho.reshape(2, 2, 2, 2))


def is_density_matrix(rho, tol=1e-12, psd_tol=1e-10):
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -psd_tol


def bloch_to_rho(s):
    """1/2 (1 + s . sigma) for a length-3 Bloch vector."""
    sx, sy, sz = s
    return 0.5 * (I2 + sx * PAULI[0] + sy * PAULI[1] + sz * PAULI[2])


def rho_to_bloch(rho):
    rho = _check_dim(rho, (2,), "rho")
    return np.array([np.real(np.trace(rho @ p)) for p in PAULI])


def commutator(a, b):
    return a @ b - b @ a
