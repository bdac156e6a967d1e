"""Upper and lower bounds on quantum and zero-error capacities (in bits)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import KrausChannel, WeightOperator, apply, is_unital
from .config import AscentOptions, derive_stream
from .errors import ParameterError, PreconditionError, ShapeError
from .linalg import as_density, eigh_psd, entropy_of_spectrum, random_density, von_neumann_entropy
from .norms import NormEstimate, g_map_2norm, lemma_2norm_bound, output_2norm_tensor
from .spectral import second_singular_value

_TASK_LSD = 11


@dataclass(frozen=True)
class CapacityReport:
    upper_bits: float
    lower_bits: float
    gap_bits: float
    upper_method: str
    lower_method: str
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FidelityDecay:
    beta: float
    n: int
    eta_bound: float


def _require_unital(ch: KrausChannel) -> None:
    if ch.d_in != ch.d_out or not is_unital(ch):
        raise PreconditionError("this bound is stated for unital channels")


def q_upper_unital(ch: KrausChannel, lambda2: float | None = None) -> float:
    """``log2(1 + d lambda2^2)``."""
    _require_unital(ch)
    if lambda2 is None:
        lambda2 = second_singular_value(ch).lambda2
    return math.log2(1 + ch.d_in * lambda2 ** 2)


def q_upper_2norm(ch: KrausChannel, n: int = 1, clip: bool = False,
                  lambda2: float | None = None) -> float:
    """``log2(d * B**(1/n))`` with ``B`` the spectral-gap bound on ``||E^{(x)n}||_2``.

    With ``clip=True`` the bound is first capped at 1 (every output purity
    is at most 1), which can only tighten the result.
    """
    _require_unital(ch)
    B = lemma_2norm_bound(ch, n, lambda2)
    if clip:
        B = min(1.0, B)
    return math.log2(ch.d_in * B ** (1.0 / n))


def q_upper_2norm_estimate(ch: KrausChannel, n: int, opts: AscentOptions | None = None) -> float:
    """Diagnostic only: the same formula with the ascent estimate in place of B.

    Not a certified bound, because the estimate is a lower bound on the norm.
    """
    est = output_2norm_tensor(ch, n, opts)
    return math.log2(ch.d_in * est.value ** (1.0 / n))


def purification(rho) -> np.ndarray:
    """Purification of ``rho`` as a ``d x d`` amplitude matrix ``Psi[r, a]``.

    The vector on ``R (x) A`` is ``Psi.reshape(-1)``.
    """
    w, v = eigh_psd(np.asarray(rho, dtype=complex))
    return np.sqrt(w)[:, None] * v.T


def coherent_information(ch: KrausChannel, rho, psi_ra: np.ndarray | None = None) -> float:
    """``S(E(rho)) - S((id_R (x) E)(Psi_RA))`` in bits.

    ``psi_ra`` is any purification in amplitude-matrix form (see
    :func:`purification`); the eigenvector purification is used by default.
    The joint output ``sum_a u_a u_a^dag`` has the same nonzero spectrum as
    the ``k x k`` Gram matrix of ``u_a = (I (x) E_a)|Psi>``, which is what
    gets diagonalized.
    """
    rho = as_density(rho, tol=1e-9)
    if rho.shape[0] != ch.d_in:
        raise ShapeError("state does not match channel input")
    psi = purification(rho) if psi_ra is None else np.asarray(psi_ra, dtype=complex)
    u = np.einsum("ra,koa->kro", psi, ch.kraus).reshape(ch.k, -1)
    gram = u.conj() @ u.T
    joint = entropy_of_spectrum(eigh_psd(gram)[0])
    return von_neumann_entropy(apply(ch, rho)) - joint


def q_lower_lsd(ch: KrausChannel, restarts: int = 16, seed: int = 0) -> float:
    """Best coherent information over ``I/d`` and random inputs, clamped at 0."""
    d = ch.d_in
    best = coherent_information(ch, np.eye(d) / d)
    for r in range(restarts):
        best = max(best, coherent_information(ch, random_density(d, derive_stream(seed, _TASK_LSD, r))))
    return max(0.0, best)


def fidelity_decay(beta: float, n: int) -> FidelityDecay:
    """Cap ``(1+beta)**(-n/4)`` on the average fidelity of an over-rate code."""
    if not beta > 0:
        raise ParameterError("beta must be positive")
    if n < 1:
        raise ParameterError("n must be >= 1")
    return FidelityDecay(beta, n, (1 + beta) ** (-n / 4))


def g_norm_bound(ch: KrausChannel, n: int, pi: WeightOperator,
                 opts: AscentOptions | None = None) -> tuple[float, str]:
    """Value used for ``||G_{E^n, Pi}||_2`` and whether it is certified.

    For ``Pi = I`` on a unital channel this is ``min(1, (1/d + lambda2^2)**n)``,
    a true upper bound; otherwise it falls back to the ascent estimate.
    """
    D = ch.d_out ** n
    if pi.dim != D:
        raise ShapeError(f"Pi must act on the {D}-dimensional output of E^n")
    if (ch.d_in == ch.d_out and is_unital(ch)
            and np.allclose(pi.mat, np.eye(D), atol=1e-12, rtol=0)):
        return min(1.0, lemma_2norm_bound(ch, n)), "certified"
    return g_map_2norm(ch, n, pi, opts).value, "estimate"


def codespace_bound_rhs(ch: KrausChannel, n: int, pi: WeightOperator, eta: float,
                        opts: AscentOptions | None = None) -> float:
    """``||G_{E^n, Pi}||_2 Tr(Pi^2) / eta^4``, an upper bound on the code dimension."""
    if not 0 < eta <= 1:
        raise ParameterError("eta must lie in (0, 1]")
    g, _ = g_norm_bound(ch, n, pi, opts)
    return g * pi.trace_squared() / eta ** 4


def zero_error_upper(ch: KrausChannel, n: int, pi: WeightOperator,
                     opts: AscentOptions | None = None) -> float:
    """``(1/n) log2(||G_{E^n, Pi}||_2 Tr(Pi^2))`` in bits per channel use."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    g, _ = g_norm_bound(ch, n, pi, opts)
    return math.log2(g * pi.trace_squared()) / n


def capacity_report(ch: KrausChannel, n: int = 1, lsd_restarts: int = 16,
                    seed: int = 0) -> CapacityReport:
    lam2 = second_singular_value(ch).lambda2
    uppers = {
        "spectral_gap": q_upper_unital(ch, lam2),
        f"two_norm_n{n}": q_upper_2norm(ch, n, lambda2=lam2),
    }
    method = min(uppers, key=uppers.get)
    upper = uppers[method]
    lower = q_lower_lsd(ch, lsd_restarts, seed)
    details = dict(uppers)
    details["two_norm_clipped"] = q_upper_2norm(ch, n, clip=True, lambda2=lam2)
    details["lambda2"] = lam2
    return CapacityReport(upper, lower, upper - lower, method, "coherent_information", details)
