"""Dense complex linear-algebra primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Density matrices
and pure states are validated on entry with :func:`as_density` and
:func:`as_pure` rather than wrapped in classes.
"""
from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .config import check_guard
from .errors import InvariantError, ShapeError

HERM_TOL = 1e-10
NEG_EIG_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12
ENTROPY_CUTOFF = 1e-12


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvariantError("matrix has non-finite entries")
    return m


def as_density(rho, tol: float = TRACE_TOL) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return it as a complex array."""
    m = as_matrix(rho)
    if m.shape[0] != m.shape[1]:
        raise ShapeError("density matrix must be square")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERM_TOL:
        raise InvariantError("density matrix is not Hermitian")
    if abs(np.trace(m) - 1) > tol:
        raise InvariantError(f"density matrix has trace {np.trace(m).real:.3e}")
    if np.linalg.eigvalsh(hermitize(m))[0] < -NEG_EIG_TOL:
        raise InvariantError("density matrix has a negative eigenvalue")
    return m


def as_pure(vec, tol: float = NORM_TOL) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    if abs(np.vdot(v, v).real - 1) > tol:
        raise InvariantError("pure state must have unit norm")
    return v


def hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def eigh_psd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a PSD matrix with round-off negatives clamped.

    Raises InvariantError for eigenvalues below ``-NEG_EIG_TOL``.
    """
    w, v = np.linalg.eigh(hermitize(a))
    if w.size and w[0] < -NEG_EIG_TOL:
        raise InvariantError(f"matrix expected PSD has eigenvalue {w[0]:.3e}")
    return np.clip(w, 0.0, None), v


def sqrtm_psd(a: np.ndarray) -> np.ndarray:
    w, v = eigh_psd(a)
    return (v * np.sqrt(w)) @ v.conj().T


def tensor_product(a, b, guard: int | None = None) -> np.ndarray:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    check_guard(a.shape[0] * b.shape[0], guard, "rows")
    check_guard(a.shape[1] * b.shape[1], guard, "cols")
    return np.kron(a, b)


def kron_all(mats: Sequence[np.ndarray], guard: int | None = None) -> np.ndarray:
    return reduce(lambda x, y: tensor_product(x, y, guard), mats)


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    rho : array, shape (D, D)
        Operator on the composite space, ``D = prod(dims)``.
    dims : sequence of int
        Local dimensions in tensor order.
    keep : sequence of int
        Indices of subsystems to keep. Order in the result follows ``dims``.
    """
    rho = as_matrix(rho)
    dims = [int(x) for x in dims]
    total = int(np.prod(dims)) if dims else 1
    if rho.shape != (total, total):
        raise ShapeError(f"dims {dims} do not match matrix of shape {rho.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} out of range")
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    if not traced:
        return rho.copy()
    t = rho.reshape(dims + dims)
    # einsum labels: row indices 0..n-1, column indices n..2n-1; traced share labels
    row = list(range(n))
    col = [i if i in traced else n + i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    res = np.einsum(t, row + col, out)
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return res.reshape(d_keep, d_keep)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared)."""
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise ShapeError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    # Tr sqrt(sqrt(rho) sigma sqrt(rho)) = nuclear norm of sqrt(rho) sqrt(sigma);
    # the nuclear norm is exactly symmetric and avoids a second square root
    sv = np.linalg.svd(sqrtm_psd(rho) @ sqrtm_psd(sigma), compute_uv=False)
    return float(min(1.0, np.sum(sv)))


def fidelity_pure(psi: np.ndarray, rho: np.ndarray) -> float:
    """Fidelity of a pure state with a density matrix, ``sqrt(<psi|rho|psi>)``."""
    val = np.vdot(psi, rho @ psi).real
    return float(np.sqrt(min(max(val, 0.0), 1.0)))


def entropy_of_spectrum(w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -NEG_EIG_TOL:
        raise InvariantError(f"negative eigenvalue {w.min():.3e} in entropy")
    w = w[w > ENTROPY_CUTOFF]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits."""
    w, _ = eigh_psd(as_matrix(rho))
    return entropy_of_spectrum(w)


def purity(rho) -> float:
    rho = as_matrix(rho)
    return float(np.vdot(rho, rho).real)


def haar_unitary(d: int, stream: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The phases of R's diagonal are pushed into Q so the result is exactly
    Haar and not biased by the QR sign convention.
    """
    if d < 1:
        raise ShapeError("d must be >= 1")
    z = (stream.standard_normal((d, d)) + 1j * stream.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_state(d: int, stream: np.random.Generator) -> np.ndarray:
    g = stream.standard_normal(d) + 1j * stream.standard_normal(d)
    return g / np.linalg.norm(g)


def haar_state_in_subspace(isometry, stream: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector in the column span of ``isometry``."""
    w = as_matrix(isometry)
    if np.max(np.abs(w.conj().T @ w - np.eye(w.shape[1])), initial=0.0) > 1e-10:
        raise InvariantError("columns of the isometry are not orthonormal")
    return w @ haar_state(w.shape[1], stream)


def random_density(d: int, stream: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state: marginal of a Haar pure state on ``d x rank``."""
    rank = d if rank is None else rank
    g = stream.standard_normal((d, rank)) + 1j * stream.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def op_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0
