"""Codes with an ancilla, Petz recovery, and Monte Carlo average fidelity.

Register order is ``A_1 ... A_n T`` throughout; the ancilla is last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import codespace_bound_rhs, g_norm_bound
from .channels import KrausChannel, WeightOperator, apply, p_pi_map, tensor_power
from .config import derive_stream
from .errors import InvariantError, ParameterError, PreconditionError, ShapeError
from .linalg import as_density, eigh_psd, fidelity_pure, haar_state, haar_unitary, sqrtm_psd

RecoveryMap = KrausChannel

_TASK_FID = 21


@dataclass(frozen=True, eq=False)
class CodeSpec:
    n: int
    d: int
    d_T: int
    d_C: int
    encoder: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.encoder, dtype=complex)
        if W.shape != (self.d ** self.n * self.d_T, self.d_C):
            raise ShapeError(f"encoder shape {W.shape} does not match (d^n d_T, d_C)")
        if np.max(np.abs(W.conj().T @ W - np.eye(self.d_C))) > 1e-10:
            raise InvariantError("encoder columns are not orthonormal")
        W.setflags(write=False)
        object.__setattr__(self, "encoder", W)

    @property
    def dim(self) -> int:
        return self.d ** self.n * self.d_T


@dataclass(frozen=True)
class FidelityEstimate:
    eta_hat: float
    stderr: float
    trials: int
    seed: int


@dataclass(frozen=True)
class Lemma3Verdict:
    passed: bool
    d_C: int
    rhs: float
    slack: float
    eta: FidelityEstimate
    g_norm: float
    g_norm_kind: str


def random_code(n: int, d: int, d_T: int, d_C: int, stream: np.random.Generator) -> CodeSpec:
    D = d ** n * d_T
    if not 1 <= d_C <= D:
        raise ShapeError(f"d_C must lie in [1, {D}]")
    return CodeSpec(n, d, d_T, d_C, haar_unitary(D, stream)[:, :d_C])


def ancilla_reset(d_T: int) -> KrausChannel:
    """``rho -> |0><0| Tr(rho)`` on the ancilla, Kraus ops ``|0><i|``."""
    ops = np.zeros((d_T, d_T, d_T), dtype=complex)
    ops[np.arange(d_T), 0, np.arange(d_T)] = 1.0
    return KrausChannel(ops)


def code_noise_channel(ch: KrausChannel, code: CodeSpec, guard: int | None = None) -> KrausChannel:
    """``E^{(x)n} (x) T`` on ``A_1..A_n T``, with the ancilla reset to ``|0>``."""
    if ch.d_in != code.d:
        raise ShapeError("channel and code disagree on the single-use dimension")
    noise = tensor_power(ch, code.n, guard)
    if code.d_T == 1:
        return noise
    reset = ancilla_reset(code.d_T).kraus
    ops = np.einsum("aij,bkl->abikjl", noise.kraus, reset)
    k = noise.k * code.d_T
    return KrausChannel(ops.reshape(k, noise.d_out * code.d_T, noise.d_in * code.d_T))


def apply_noise_to_code(ch: KrausChannel, code: CodeSpec, psi0, guard: int | None = None) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.size != code.d_C:
        raise ShapeError(f"codeword coordinates must have dimension {code.d_C}")
    psi = code.encoder @ psi0
    return apply(code_noise_channel(ch, code, guard), np.outer(psi, psi.conj()))


def default_reference_state(code: CodeSpec) -> np.ndarray:
    """Normalized code projector ``W W^dag / d_C``."""
    W = code.encoder
    return W @ W.conj().T / code.d_C


def petz_recovery(noise: KrausChannel, sigma) -> RecoveryMap:
    """Petz map ``sigma^1/2 N^dag(N(sigma)^-1/2 . N(sigma)^-1/2) sigma^1/2``.

    Outside supp N(sigma) the map is completed by sending everything to the
    first basis state of the input space, which keeps it CPTP.
    """
    try:
        sigma = as_density(sigma, tol=1e-9)
    except (InvariantError, ShapeError) as exc:
        raise ParameterError(f"reference is not a state: {exc}") from exc
    if sigma.shape[0] != noise.d_in:
        raise ParameterError("reference state does not match the noise input")
    out = apply(noise, sigma)
    w, v = eigh_psd(out)
    keep = w > 1e-12 * max(w.max(), 1e-300)
    inv_sqrt = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    s_half = sqrtm_psd(sigma)
    # R_a = sigma^1/2 N_a^dag N(sigma)^-1/2
    ops = s_half[None] @ np.conj(np.swapaxes(noise.kraus, 1, 2)) @ inv_sqrt[None]
    comp = v[:, ~keep]
    if comp.shape[1]:
        sink = np.zeros(noise.d_in, dtype=complex)
        sink[0] = 1.0
        extra = np.einsum("i,bj->bij", sink, comp.conj().T)
        ops = np.concatenate([ops, extra])
    return KrausChannel(ops)


def adjoint_recovery(noise: KrausChannel) -> RecoveryMap:
    """The map ``N^dag``; a channel only when ``N`` is unital."""
    return KrausChannel(np.conj(np.swapaxes(noise.kraus, 1, 2)))


def _recovered_fidelities(noise: KrausChannel, rec: RecoveryMap, W: np.ndarray,
                          psi0s: np.ndarray) -> np.ndarray:
    psis = psi0s @ W.T                                   # (N, D)
    nv = (noise.kraus @ psis.T).transpose(2, 0, 1)          # (N, a, o): N_a psi
    back = (rec.kraus.conj().transpose(0, 2, 1) @ psis.T).transpose(2, 0, 1)  # (N, b, j): R_b^dag psi
    overlaps = back.conj() @ nv.transpose(0, 2, 1)
    f2 = np.sum(np.abs(overlaps) ** 2, axis=(1, 2))
    return np.sqrt(np.clip(f2, 0.0, 1.0))


def average_fidelity(ch: KrausChannel, code: CodeSpec, rec: RecoveryMap, trials: int,
                     seed: int = 0, batch: int = 256, start: int = 0) -> FidelityEstimate:
    """Monte Carlo estimate of the Haar-average recovery fidelity over the codespace.

    Trial ``t`` draws its codeword from ``derive_stream(seed, _TASK_FID, t)``;
    ``start`` shifts the trial index range so disjoint ranges are independent.
    """
    if trials < 2:
        raise ParameterError("need at least two trials for a standard error")
    noise = code_noise_channel(ch, code)
    if rec.d_in != noise.d_out or rec.d_out != code.dim:
        raise ShapeError("recovery map does not match the code registers")
    fids = np.empty(trials)
    for lo in range(0, trials, batch):
        hi = min(trials, lo + batch)
        psi0s = np.stack([haar_state(code.d_C, derive_stream(seed, _TASK_FID, start + t))
                          for t in range(lo, hi)])
        fids[lo:hi] = _recovered_fidelities(noise, rec, code.encoder, psi0s)
    return FidelityEstimate(float(fids.mean()), float(fids.std(ddof=1) / math.sqrt(trials)),
                            trials, seed)


def verify_bk(noise: KrausChannel, rec: RecoveryMap, pi: WeightOperator, psi) -> tuple[float, float]:
    """Both sides of ``F^2(psi, R(N(psi))) <= sqrt(<psi|P_Pi(N(psi))|psi> <psi|R(Pi^2)|psi>)``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    image = apply(noise, np.eye(noise.d_in))
    if pi.leakage(image) > 1e-8:
        raise PreconditionError("Pi must be fully supported on the image of the noise")
    rho = np.outer(psi, psi.conj())
    out = apply(noise, rho)
    lhs = float(np.vdot(psi, apply(rec, out) @ psi).real)
    a = np.vdot(psi, p_pi_map(noise, pi, out) @ psi).real
    b = np.vdot(psi, apply(rec, pi.squared) @ psi).real
    return lhs, float(math.sqrt(max(a, 0.0) * max(b, 0.0)))


def check_lemma3(ch: KrausChannel, code: CodeSpec, rec: RecoveryMap, pi: WeightOperator,
                 trials: int = 2000, seed: int = 0, opts=None) -> Lemma3Verdict:
    """Check ``d_C <= ||G||_2 Tr(Pi^2) / eta^4`` against a Monte Carlo eta.

    ``pi`` acts on the output of ``E^n`` only. The ancilla is reset to
    ``|0>``, and with ``Pi_T`` proportional to ``|0><0|`` it contributes a
    factor ``||G_T||_2 Tr(Pi_T^2) = 1`` whatever the scale.

    The bound is relaxed by the first-order propagation of 3 standard errors
    of eta through ``eta^-4``.
    """
    est = average_fidelity(ch, code, rec, trials, seed)
    eta = max(est.eta_hat, 1e-12)
    g, kind = g_norm_bound(ch, code.n, pi, opts)
    rhs = codespace_bound_rhs(ch, code.n, pi, min(eta, 1.0), opts)
    slack = 4 * 3 * est.stderr / eta
    return Lemma3Verdict(code.d_C <= rhs * (1 + slack), code.d_C, rhs, slack, est, g, kind)


def decay_threshold(ch: KrausChannel, n: int, beta: float) -> float:
    """Code dimension ``d^n ||E^n||_2 (1+beta)^n`` above which eta^4 <= (1+beta)^-n."""
    g, _ = g_norm_bound(ch, n, WeightOperator.identity(ch.d_out ** n))
    return ch.d_in ** n * g * (1 + beta) ** n
