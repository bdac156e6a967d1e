"""Kraus-operator channels, vectorization and the derived weight maps.

Vectorization convention: ``|i><j| -> |i>|j>``, i.e. row-major flattening.
Under it a channel with Kraus set ``{E_i}`` acts as the transfer matrix
``sum_i kron(E_i, conj(E_i))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from .config import check_guard
from .errors import InvariantError, ParameterError, ShapeError, SupportError
from .linalg import as_matrix, eigh_psd, kron_all, op_norm

CPTP_TOL = 1e-9
RANK_RTOL = 1e-10
SUPPORT_TOL = 1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive map ``rho -> sum_i E_i rho E_i^dag``.

    ``kraus`` has shape ``(k, d_out, d_in)``. Trace preservation is checked
    at construction unless ``check=False`` (used for negative controls and
    for derived maps that are CP but not TP).
    """

    kraus: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] < 1:
            raise ShapeError(f"Kraus array must have shape (k, d_out, d_in), got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise InvariantError("Kraus operators have non-finite entries")
        object.__setattr__(self, "kraus", _frozen(k))
        if self.check:
            dev = self.tp_residual()
            if dev > CPTP_TOL:
                raise InvariantError(f"Kraus set is not trace preserving (residual {dev:.3e})")

    @classmethod
    def from_ops(cls, ops: Sequence, check: bool = True) -> "KrausChannel":
        return cls(np.stack([as_matrix(o) for o in ops]), check=check)

    @property
    def k(self) -> int:
        return self.kraus.shape[0]

    @property
    def d_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def d_out(self) -> int:
        return self.kraus.shape[1]

    def tp_residual(self) -> float:
        flat = self.kraus.reshape(-1, self.d_in)
        s = flat.conj().T @ flat
        return op_norm(s - np.eye(self.d_in))

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)


def _dag(ops: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(ops, -1, -2))


def apply(ch: KrausChannel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.d_in, ch.d_in):
        raise ShapeError(f"channel input is {ch.d_in}-dimensional, got {rho.shape}")
    K = ch.kraus
    return np.sum(K @ rho @ _dag(K), axis=0)


def adjoint_apply(ch: KrausChannel, x) -> np.ndarray:
    """Heisenberg-picture map ``x -> sum_i E_i^dag x E_i``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (ch.d_out, ch.d_out):
        raise ShapeError(f"adjoint input is {ch.d_out}-dimensional, got {x.shape}")
    K = ch.kraus
    return np.sum(_dag(K) @ x @ K, axis=0)


def adjoint_channel(ch: KrausChannel, check: bool = True) -> KrausChannel:
    return KrausChannel(_dag(ch.kraus), check=check)


def vectorize(a) -> np.ndarray:
    return np.asarray(a, dtype=complex).reshape(-1)


def unvectorize(v, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d)


def identity_vector(d: int) -> np.ndarray:
    """``|I> = sum_i |i>|i>`` (unnormalized)."""
    return vectorize(np.eye(d))


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    mat: np.ndarray
    d_in: int
    d_out: int

    def fixed_point_residual(self) -> float:
        if self.d_in != self.d_out:
            raise ShapeError("fixed point needs a square channel")
        v = identity_vector(self.d_in)
        return float(np.linalg.norm(self.mat @ v - v))


def transfer_matrix(ch: KrausChannel) -> TransferMatrix:
    K = ch.kraus
    k, o, i = K.shape
    mat = np.einsum("kab,kcd->acbd", K, K.conj()).reshape(o * o, i * i)
    return TransferMatrix(_frozen(mat), ch.d_in, ch.d_out)


def compose(first: KrausChannel, second: KrausChannel, check: bool = True) -> KrausChannel:
    """Channel ``second o first``."""
    if first.d_out != second.d_in:
        raise ShapeError("cannot compose channels with mismatched dimensions")
    ops = np.einsum("aoj,bji->baoi", second.kraus, first.kraus)
    return KrausChannel(ops.reshape(-1, second.d_out, first.d_in), check=check)


def tensor_power(ch: KrausChannel, n: int, guard: int | None = None) -> KrausChannel:
    """Materialize ``ch^{(x)n}`` with ``k**n`` Kraus operators."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    check_guard(ch.k ** n, guard, "Kraus count")
    check_guard(ch.d_in ** n, guard, "input dimension")
    check_guard(ch.d_out ** n, guard, "output dimension")
    if n == 1:
        return ch
    ops = [kron_all([ch.kraus[i] for i in idx], guard) for idx in product(range(ch.k), repeat=n)]
    return KrausChannel(np.stack(ops), check=ch.check)


def tensor_channels(chs: Sequence[KrausChannel], guard: int | None = None) -> KrausChannel:
    for attr in ("d_in", "d_out"):
        check_guard(int(np.prod([getattr(c, attr) for c in chs])), guard, attr)
    ops = [kron_all([c.kraus[i] for c, i in zip(chs, idx)], guard)
           for idx in product(*[range(c.k) for c in chs])]
    return KrausChannel(np.stack(ops), check=all(c.check for c in chs))


def is_unital(ch: KrausChannel, tol: float = CPTP_TOL) -> bool:
    if ch.d_in != ch.d_out:
        raise ShapeError("unitality is only defined for square channels")
    s = np.sum(ch.kraus @ _dag(ch.kraus), axis=0)
    return op_norm(s - np.eye(ch.d_out)) <= tol


def unitary_mixture(unitaries: Sequence, probs: Sequence[float]) -> KrausChannel:
    """Channel ``rho -> sum_i p_i U_i rho U_i^dag``."""
    p = np.asarray(probs, dtype=float)
    us = [as_matrix(u) for u in unitaries]
    if len(us) != p.size or p.size == 0:
        raise ParameterError("need one probability per unitary")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ParameterError("probabilities must be non-negative and sum to 1")
    for u in us:
        if u.shape[0] != u.shape[1] or op_norm(u.conj().T @ u - np.eye(u.shape[0])) > 1e-10:
            raise InvariantError("mixture component is not unitary")
    return KrausChannel(np.stack([np.sqrt(pi) * u for pi, u in zip(p, us)]))


def weyl_operators(d: int) -> list[np.ndarray]:
    """The ``d**2`` Heisenberg-Weyl operators ``X^a Z^b``; index 0 is the identity."""
    omega = np.exp(2j * np.pi / d)
    X = np.roll(np.eye(d), 1, axis=0)
    Z = np.diag(omega ** np.arange(d))
    return [np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
            for a in range(d) for b in range(d)]


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(np.eye(d)[None])


def depolarizing(d: int, p: float) -> KrausChannel:
    """``rho -> (1-p) rho + p I/d`` for ``0 <= p <= d^2/(d^2-1)``."""
    if d < 2:
        raise ParameterError("depolarizing channel needs d >= 2")
    pmax = d * d / (d * d - 1)
    if not (0 <= p <= pmax + 1e-15):
        raise ParameterError(f"depolarizing parameter must lie in [0, {pmax}]")
    w0 = max(0.0, 1 - p * (d * d - 1) / (d * d))
    weights = [w0] + [p / (d * d)] * (d * d - 1)
    return KrausChannel(np.stack([np.sqrt(w) * u for w, u in zip(weights, weyl_operators(d))]))


def dephasing(p: float, d: int = 2) -> KrausChannel:
    if d != 2:
        raise ParameterError("dephasing is defined for qubits only")
    if not 0 <= p <= 1:
        raise ParameterError("dephasing parameter must lie in [0, 1]")
    Z = np.diag([1.0, -1.0])
    return KrausChannel(np.stack([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * Z]))


def named_channel(kind: str, d: int, p: float | None = None) -> KrausChannel:
    if kind == "identity":
        return identity_channel(d)
    if p is None:
        raise ParameterError(f"channel {kind!r} needs a parameter p")
    if kind == "depolarizing":
        return depolarizing(d, p)
    if kind == "dephasing":
        return dephasing(p, d)
    raise ParameterError(f"unknown channel kind {kind!r}")


def random_channel(d_in: int, k: int, stream: np.random.Generator, d_out: int | None = None) -> KrausChannel:
    """Kraus operators cut from a Haar-random isometry ``C^d_in -> C^k (x) C^d_out``."""
    d_out = d_in if d_out is None else d_out
    g = stream.standard_normal((k * d_out, d_in)) + 1j * stream.standard_normal((k * d_out, d_in))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausChannel(q.reshape(k, d_out, d_in))


def random_unitary_mixture(d: int, k: int, stream: np.random.Generator) -> KrausChannel:
    from .linalg import haar_unitary

    us = [haar_unitary(d, stream) for _ in range(k)]
    p = stream.dirichlet(np.ones(k))
    p = p / p.sum()
    return unitary_mixture(us, p)


class WeightOperator:
    """Positive semi-definite weight ``Pi`` with cached support data.

    Eigenvalues at or below ``RANK_RTOL * max eigenvalue`` count as zero.
    """

    def __init__(self, mat):
        m = as_matrix(mat)
        if m.shape[0] != m.shape[1]:
            raise ShapeError("weight operator must be square")
        w, v = eigh_psd(m)
        cut = RANK_RTOL * (w.max() if w.size else 0.0)
        keep = w > cut
        if not keep.any():
            raise InvariantError("weight operator is zero")
        self.mat = _frozen((m + m.conj().T) / 2)
        self.eigvals = _frozen(np.where(keep, w, 0.0))
        self._vecs = _frozen(v)
        self._keep = keep

    @classmethod
    def identity(cls, d: int, scale: float = 1.0) -> "WeightOperator":
        return cls(scale * np.eye(d))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def _func(self, f) -> np.ndarray:
        w = np.zeros_like(self.eigvals.real)
        w[self._keep] = f(self.eigvals.real[self._keep])
        return (self._vecs * w) @ self._vecs.conj().T

    @cached_property
    def support(self) -> np.ndarray:
        return self._func(np.ones_like)

    @cached_property
    def pinv(self) -> np.ndarray:
        return self._func(lambda x: 1 / x)

    @cached_property
    def pinv_sqrt(self) -> np.ndarray:
        return self._func(lambda x: 1 / np.sqrt(x))

    @cached_property
    def squared(self) -> np.ndarray:
        return self.mat @ self.mat

    def trace_squared(self) -> float:
        return float(np.sum(self.eigvals.real ** 2))

    def leakage(self, rho: np.ndarray) -> float:
        """Weight of ``rho`` outside supp(Pi), relative to the weight of ``rho``."""
        rho = np.asarray(rho, dtype=complex)
        total = np.linalg.norm(rho)
        if total == 0:
            return 0.0
        inside = self.support @ rho @ self.support
        return float(np.linalg.norm(rho - inside) / total)

    def require_support(self, rho: np.ndarray, tol: float = SUPPORT_TOL) -> None:
        if rho.shape != self.mat.shape:
            raise ShapeError(f"weight operator is {self.dim}-dimensional, got {rho.shape}")
        leak = self.leakage(rho)
        if leak > tol:
            raise SupportError(f"operator leaks outside supp(Pi) (relative weight {leak:.3e})")


def p_pi_map(ch: KrausChannel, pi: WeightOperator, rho) -> np.ndarray:
    """``E^dag(Pi^+ rho Pi^+)``; CP but not trace preserving in general."""
    rho = np.asarray(rho, dtype=complex)
    pi.require_support(rho)
    return adjoint_apply(ch, pi.pinv @ rho @ pi.pinv)


def g_map(ch: KrausChannel, pi: WeightOperator, rho) -> np.ndarray:
    """``Pi^{-1/2} E(rho) Pi^{-1/2}`` with pseudo-inverse square roots."""
    out = apply(ch, rho)
    pi.require_support(out)
    return pi.pinv_sqrt @ out @ pi.pinv_sqrt
