"""Second singular value of unital channels and the block relations behind it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .channels import CPTP_TOL, KrausChannel, identity_vector, is_unital, transfer_matrix
from .errors import PreconditionError
from .linalg import op_norm

# dense SVD of the d^2 x d^2 restricted block up to this d, Lanczos beyond
DENSE_MAX_D = 16


@dataclass(frozen=True)
class SpectralReport:
    lambda2: float
    fixed_point_residual: float
    offdiag_residual: float
    restricted_singular_values: tuple[float, ...]
    method: str = "dense"


def _projectors(d: int) -> tuple[np.ndarray, np.ndarray]:
    v = identity_vector(d)
    p0 = np.outer(v, v.conj()) / d
    return p0, np.eye(d * d) - p0


def _require_unital(ch: KrausChannel) -> None:
    if ch.d_in != ch.d_out or not is_unital(ch, CPTP_TOL):
        raise PreconditionError("second singular value needs a unital channel")


def second_singular_value(ch: KrausChannel, method: str = "auto") -> SpectralReport:
    """lambda_2 = operator norm of the transfer matrix on the traceless sector.

    ``method="dense"`` takes the full SVD of ``P1 E P1``; ``"lanczos"`` only
    the leading singular value, applying the channel matrix-free.
    """
    _require_unital(ch)
    d = ch.d_in
    if method == "auto":
        method = "dense" if d <= DENSE_MAX_D else "lanczos"
    if method == "lanczos":
        return _lanczos_report(ch)
    E = transfer_matrix(ch).mat
    p0, p1 = _projectors(d)
    sv = np.linalg.svd(p1 @ E @ p1, compute_uv=False)
    # P1 has rank d^2 - 1, so one singular value belongs to the fixed point
    sv = np.sort(sv)[::-1][: d * d - 1]
    v = identity_vector(d)
    return SpectralReport(
        lambda2=float(sv[0]) if sv.size else 0.0,
        fixed_point_residual=float(np.linalg.norm(E @ v - v)),
        offdiag_residual=op_norm(p1 @ E @ p0) + op_norm(p0 @ E @ p1),
        restricted_singular_values=tuple(float(s) for s in sv),
        method="dense",
    )


def _lanczos_report(ch: KrausChannel) -> SpectralReport:
    d = ch.d_in
    K = ch.kraus
    Kd = np.conj(np.swapaxes(K, 1, 2))
    eye = np.eye(d)

    def strip(x):
        return x - np.trace(x) / d * eye

    def mv(v):
        x = strip(v.reshape(d, d))
        return strip(np.sum(K @ x @ Kd, axis=0)).reshape(-1)

    def rmv(v):
        x = strip(v.reshape(d, d))
        return strip(np.sum(Kd @ x @ K, axis=0)).reshape(-1)

    op = LinearOperator((d * d, d * d), matvec=mv, rmatvec=rmv, dtype=complex)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(d * d)
    s = svds(op, k=3, which="LM", return_singular_vectors=False, v0=v0, tol=1e-13)
    s = np.sort(s)[::-1]
    one = eye.reshape(-1)
    E_one = np.sum(K @ Kd, axis=0).reshape(-1)
    return SpectralReport(
        lambda2=float(s[0]),
        fixed_point_residual=float(np.linalg.norm(E_one - one)),
        offdiag_residual=float(np.linalg.norm(strip(E_one.reshape(d, d)))),
        restricted_singular_values=tuple(float(x) for x in s),
        method="lanczos",
    )


def check_block_structure(ch: KrausChannel) -> tuple[float, float, float]:
    """Residuals of the three block relations of ``E^dag E``.

    Returns ``(excess, diag0, offdiag)``: the largest eigenvalue of
    ``P1 E^dag E P1 - lambda2^2 P1`` clipped at zero, ``||P0 E^dag E P0 - P0||``
    and ``||P1 E^dag E P0||``. Works on any square Kraus set, so non-TP
    negative controls are accepted.
    """
    d = ch.d_in
    E = transfer_matrix(ch).mat
    p0, p1 = _projectors(d)
    sv = np.linalg.svd(p1 @ E @ p1, compute_uv=False)
    lam2 = float(sv.max()) if sv.size else 0.0
    EE = E.conj().T @ E
    top = np.linalg.eigvalsh(p1 @ EE @ p1 - lam2 ** 2 * p1)[-1]
    return (
        max(0.0, float(top)),
        op_norm(p0 @ EE @ p0 - p0),
        op_norm(p1 @ EE @ p0),
    )


def is_expander(ch: KrausChannel, C: float, tol: float = 1e-9) -> bool:
    """Whether ``lambda2^2 == C / k`` within ``tol``."""
    lam2 = second_singular_value(ch).lambda2
    return abs(lam2 ** 2 - C / ch.k) <= tol
