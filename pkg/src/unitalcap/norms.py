"""Maximum output 2-norm (output purity) of tensor-power channels.

The objective ``f(psi) = Tr[(E^{(x)n}(psi psi^dag))^2]`` is maximized over
pure states (a mixed input never does better) by the fixed-point ascent

    psi <- normalize( E^dag( E(psi psi^dag) ) psi ),

run in lockstep over a batch of restarts. The tensor power is never
materialized: each restart keeps the ``k**n`` vectors ``K_a psi`` and the
purity is the squared Frobenius norm of their Gram matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, WeightOperator, apply, is_unital
from .config import AscentOptions, check_guard, derive_stream
from .errors import ExponentUndefinedError, PreconditionError, ShapeError
from .spectral import second_singular_value

# derived-stream task ids
_TASK_SINGLE = 1
_TASK_TENSOR = 2
_TASK_G = 3


@dataclass(frozen=True)
class NormEstimate:
    value: float
    maximizer: np.ndarray
    restarts: int
    iterations_per_restart: int
    converged: bool
    certified_upper: float | None = None
    history: tuple[float, ...] = ()


@dataclass(frozen=True)
class MultiplicativityReport:
    n: int
    norm1: NormEstimate
    norm_n: NormEstimate
    alpha_hat: float
    alpha_cert: float | None


class _ProductMap:
    """Forward/adjoint action of ``M (K)^{(x)n}`` on batches of pure states.

    ``post`` is an optional matrix ``M`` on the output space (``Pi^{-1/2}``
    for the weighted map); ``None`` means the identity.
    """

    def __init__(self, ch: KrausChannel, n: int, post: np.ndarray | None = None,
                 guard: int | None = None):
        check_guard(ch.d_in ** n, guard, "input dimension")
        check_guard(ch.d_out ** n, guard, "output dimension")
        check_guard(ch.k ** n, guard, "Kraus count")
        self.K = np.asarray(ch.kraus)
        self.n = n
        self.k, self.d_out, self.d_in = self.K.shape
        self.D_in = self.d_in ** n
        self.D_out = self.d_out ** n
        self.post = post
        if post is not None and post.shape != (self.D_out, self.D_out):
            raise ShapeError("post-multiplier does not match the output space")

    def forward(self, x: np.ndarray) -> np.ndarray:
        """(R, D_in) -> (R, k**n, D_out): the vectors ``M K_a x``."""
        R, n, k, do, di = x.shape[0], self.n, self.k, self.d_out, self.d_in
        KT = self.K.reshape(k * do, di).T
        t = x.reshape(R, 1, 1, di, di ** (n - 1))
        for s in range(n):
            m, left, right = k ** s, do ** s, di ** (n - 1 - s)
            # site s is axis 3; one flat matmul over everything else
            y = t.transpose(0, 1, 2, 4, 3).reshape(-1, di) @ KT
            y = y.reshape(R, m, left, right, k, do).transpose(0, 1, 4, 2, 5, 3)
            t = y.reshape(R, m * k, left * do, di, right // di) if s + 1 < n else y
        v = t.reshape(R, k ** n, self.D_out)
        if self.post is not None:
            v = v @ self.post.T
        return v

    def adjoint(self, w: np.ndarray) -> np.ndarray:
        """(R, k**n, D_out) -> (R, D_in): ``sum_a K_a^dag M^dag w_a``."""
        R, n, k, do, di = w.shape[0], self.n, self.k, self.d_out, self.d_in
        if self.post is not None:
            w = w @ self.post.conj()
        KdT = self.K.conj().reshape(k * do, di)
        t = w
        # peel off the last site first; its Kraus index is the fastest one
        for s in reversed(range(n)):
            m, left, right = k ** s, do ** s, di ** (n - 1 - s)
            t = t.reshape(R, m, k, left, do, right).transpose(0, 1, 3, 5, 2, 4)
            t = t.reshape(-1, k * do) @ KdT
            t = t.reshape(R, m, left, right, di).transpose(0, 1, 2, 4, 3)
        return t.reshape(R, self.D_in)

    def purity_and_step(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v = self.forward(x)
        gram = v.conj() @ v.transpose(0, 2, 1)
        f = np.sum(np.abs(gram) ** 2, axis=(1, 2))
        w = gram.transpose(0, 2, 1) @ v
        return f, self.adjoint(w)


def _random_states(R: int, D: int, seed: int, task: int) -> np.ndarray:
    out = np.empty((R, D), dtype=complex)
    for r in range(R):
        g = derive_stream(seed, task, r)
        z = g.standard_normal(D) + 1j * g.standard_normal(D)
        out[r] = z / np.linalg.norm(z)
    return out


def _ascent(pm: _ProductMap, starts: np.ndarray, opts: AscentOptions) -> NormEstimate:
    x = starts / np.linalg.norm(starts, axis=1, keepdims=True)
    R = x.shape[0]
    f, g = pm.purity_and_step(x)
    best_val = f.copy()
    best_x = x.copy()
    active = np.ones(R, dtype=bool)
    iters = np.zeros(R, dtype=int)
    for _ in range(opts.max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        g_act = g[idx]
        norms = np.linalg.norm(g_act, axis=1)
        stalled = norms == 0
        norms[stalled] = 1.0
        x_new = g_act / norms[:, None]
        f_new, g_new = pm.purity_and_step(x_new)
        iters[idx] += 1
        improved = f_new > best_val[idx]
        best_val[idx[improved]] = f_new[improved]
        best_x[idx[improved]] = x_new[improved]
        done = (np.abs(f_new - f[idx]) <= opts.tol) | stalled
        x[idx], f[idx], g[idx] = x_new, f_new, g_new
        active[idx[done]] = False
    r = int(np.argmax(best_val))
    history = tuple(float(v) for v in np.maximum.accumulate(best_val))
    return NormEstimate(
        value=float(best_val[r]),
        maximizer=best_x[r].copy(),
        restarts=R,
        iterations_per_restart=int(iters.max()),
        converged=not active.any(),
        history=history,
    )


def output_2norm(ch: KrausChannel, opts: AscentOptions | None = None) -> NormEstimate:
    """Lower estimate of ``max_rho Tr[E(rho)^2]`` with its maximizing pure state."""
    opts = opts or AscentOptions()
    pm = _ProductMap(ch, 1)
    return _ascent(pm, _random_states(opts.restarts, pm.D_in, opts.seed, _TASK_SINGLE), opts)


def lemma_2norm_bound(ch: KrausChannel, n: int, lambda2: float | None = None) -> float:
    """``(1/d + lambda2^2)**n``, an upper bound on ``||E^{(x)n}||_2`` for unital E."""
    if ch.d_in != ch.d_out or not is_unital(ch):
        raise PreconditionError("the spectral-gap 2-norm bound needs a unital channel")
    if lambda2 is None:
        lambda2 = second_singular_value(ch).lambda2
    return (1.0 / ch.d_in + lambda2 ** 2) ** n


def _product_power(psi: np.ndarray, n: int) -> np.ndarray:
    out = psi
    for _ in range(n - 1):
        out = np.kron(out, psi)
    return out


def output_2norm_tensor(ch: KrausChannel, n: int, opts: AscentOptions | None = None,
                        single: NormEstimate | None = None,
                        guard: int | None = None) -> NormEstimate:
    """Lower estimate of ``||E^{(x)n}||_2``.

    The first restart is the n-fold product of the single-copy maximizer, so
    the estimate never falls below ``single.value**n``. For unital channels
    ``certified_upper`` carries ``min(1, (1/d + lambda2^2)**n)``.
    """
    opts = opts or AscentOptions()
    pm = _ProductMap(ch, n, guard=guard)
    if single is None:
        single = output_2norm(ch, opts)
    starts = _random_states(opts.restarts, pm.D_in, opts.seed, _TASK_TENSOR)
    starts[0] = _product_power(single.maximizer, n)
    est = _ascent(pm, starts, opts)
    cert = None
    if ch.d_in == ch.d_out and is_unital(ch):
        cert = min(1.0, lemma_2norm_bound(ch, n))
    return NormEstimate(est.value, est.maximizer, est.restarts, est.iterations_per_restart,
                        est.converged, cert, est.history)


def g_map_2norm(ch: KrausChannel, n: int, pi: WeightOperator,
                opts: AscentOptions | None = None, guard: int | None = None) -> NormEstimate:
    """Lower estimate of ``max_psi Tr[G(psi)^2]`` for ``G = Pi^{-1/2} E^{(x)n} Pi^{-1/2}``.

    The conjugation is split as ``Pi^{-1/2} K_a psi`` per Kraus vector, so
    the Gram trick still applies. Product warm starts are used as for
    :func:`output_2norm_tensor`.
    """
    opts = opts or AscentOptions()
    pm = _ProductMap(ch, n, post=pi.pinv_sqrt, guard=guard)
    if pi.dim != pm.D_out:
        raise ShapeError(f"Pi acts on dimension {pi.dim}, channel output is {pm.D_out}")
    # the channel image must sit inside supp(Pi)
    image = apply(ch, np.eye(ch.d_in))
    pi_image = image
    for _ in range(n - 1):
        pi_image = np.kron(pi_image, image)
    pi.require_support(pi_image)
    starts = _random_states(opts.restarts, pm.D_in, opts.seed, _TASK_G)
    starts[0] = _product_power(output_2norm(ch, opts).maximizer, n)
    return _ascent(pm, starts, opts)


def multiplicativity_report(ch: KrausChannel, n: int, opts: AscentOptions | None = None,
                            guard: int | None = None) -> MultiplicativityReport:
    """Empirical exponent ``log ||E^n||_2 / (n log ||E||_2)``.

    ``alpha_cert`` uses the certified upper bound on the n-copy norm; it is
    ``None`` unless both that bound and the 1-copy estimate are below 1.
    """
    opts = opts or AscentOptions()
    norm1 = output_2norm(ch, opts)
    if norm1.value >= 1 - 1e-9:
        raise ExponentUndefinedError("||E||_2 is 1, the multiplicativity exponent is undefined")
    norm_n = output_2norm_tensor(ch, n, opts, single=norm1, guard=guard)
    denom = n * math.log(norm1.value)
    alpha_hat = math.log(norm_n.value) / denom
    alpha_cert = None
    if norm_n.certified_upper is not None and norm_n.certified_upper < 1:
        alpha_cert = math.log(norm_n.certified_upper) / denom
    return MultiplicativityReport(n, norm1, norm_n, alpha_hat, alpha_cert)
