"""Random mixed-unitary expanders: sampling, ensemble statistics, capacity gaps."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .capacity import coherent_information
from .channels import KrausChannel, is_unital
from .config import AscentOptions, derive_stream
from .errors import ParameterError, PreconditionError
from .linalg import haar_unitary
from .norms import MultiplicativityReport, multiplicativity_report, output_2norm
from .spectral import second_singular_value

CSV_COLUMNS = ("seed", "d", "k", "lambda2_sq", "c_hat", "q_upper_bits", "q_lower_bits",
               "norm2_est", "norm2_cert_upper", "alpha_hat")

# ascent settings for per-sample norm estimates; the full defaults are too slow at d=32, n=2
SURVEY_ASCENT = AscentOptions(restarts=4, max_iter=300, tol=1e-12)


@dataclass(frozen=True)
class ExpanderSample:
    seed: int | None
    d: int
    k: int
    lambda2_sq: float
    c_hat: float
    q_upper: float
    q_lower: float
    gap: float
    lsd_at_maximally_mixed: float | None = None
    norm2_est: float | None = None
    norm2_cert_upper: float | None = None
    alpha_hat: float | None = None

    def csv_row(self) -> tuple:
        return (self.seed, self.d, self.k, self.lambda2_sq, self.c_hat, self.q_upper,
                self.q_lower, self.norm2_est, self.norm2_cert_upper, self.alpha_hat)


@dataclass(frozen=True)
class EnsembleReport:
    samples: tuple[ExpanderSample, ...]
    eps: float
    fraction_within: float
    fraction_within_5eps: float
    c_hat_quantiles: tuple[tuple[float, float], ...]
    tail_probability_label: float


@dataclass(frozen=True)
class CorollaryCheck:
    report: MultiplicativityReport
    exponent: float
    holds: bool


def hastings_channel(d: int, k: int, stream: np.random.Generator) -> KrausChannel:
    """``rho -> (1/k) sum_i (U_i rho U_i^dag + U_i^dag rho U_i)`` for k/2 Haar unitaries."""
    if k < 2 or k % 2:
        raise ParameterError("k must be even and >= 2")
    if d < 2:
        raise ParameterError("d must be >= 2")
    us = [haar_unitary(d, stream) for _ in range(k // 2)]
    ops = []
    for u in us:
        ops += [u / math.sqrt(k), u.conj().T / math.sqrt(k)]
    return KrausChannel(np.stack(ops))


def expander_capacity_report(ch: KrausChannel, seed: int | None = None,
                             norm_opts: AscentOptions | None = None,
                             n: int | None = None) -> ExpanderSample:
    """Capacity sandwich of a unital channel read as a ``(k lambda2^2, k, d)``-expander.

    Bounds are clamped below at 0. When ``norm_opts`` is given the 1-copy
    2-norm estimate is recorded; with ``n`` as well, the n-copy
    multiplicativity exponent too.
    """
    if ch.d_in != ch.d_out or not is_unital(ch):
        raise PreconditionError("expander bounds need a unital channel")
    d, k = ch.d_in, ch.k
    lam2_sq = second_singular_value(ch).lambda2 ** 2
    c_hat = k * lam2_sq
    raw_lower = math.log2(d) - math.log2(k)
    gap = math.log2(c_hat + k / d)
    q_lower = max(0.0, raw_lower)
    q_upper = max(0.0, raw_lower + gap)
    lsd = coherent_information(ch, np.eye(d) / d)
    norm2 = cert = alpha = None
    if norm_opts is not None:
        if n is not None and n >= 2:
            rep = multiplicativity_report(ch, n, norm_opts)
            norm2, alpha = rep.norm1.value, rep.alpha_hat
        else:
            norm2 = output_2norm(ch, norm_opts).value
        cert = 1 / d + c_hat / k
    return ExpanderSample(seed, d, k, lam2_sq, c_hat, q_upper, q_lower, q_upper - q_lower,
                          lsd, norm2, cert, alpha)


def sample_hastings(d: int, k: int, stream: np.random.Generator, seed: int | None = None,
                    norm_opts: AscentOptions | None = None,
                    n: int | None = None) -> tuple[KrausChannel, ExpanderSample]:
    ch = hastings_channel(d, k, stream)
    return ch, expander_capacity_report(ch, seed, norm_opts, n)


def _trial(args) -> ExpanderSample:
    master_seed, t, d, k, norm_opts, n = args
    # per-trial seed recorded in the CSV; sample is rebuilt by derive_stream(seed)
    seed = int(np.random.SeedSequence(master_seed, spawn_key=(t,)).generate_state(1, np.uint64)[0])
    opts = None if norm_opts is None else replace(norm_opts, seed=seed)
    _, sample = sample_hastings(d, k, derive_stream(seed), seed, opts, n)
    return sample


def ensemble_survey(d: int, k: int, trials: int, eps: float, master_seed: int = 0,
                    norm_opts: AscentOptions | None = None, n: int | None = None,
                    workers: int = 1,
                    quantiles: tuple[float, ...] = (0.1, 0.5, 0.9)) -> EnsembleReport:
    """Sample ``trials`` independent channels and summarize ``c_hat = k lambda2^2``.

    Results are identical for any ``workers`` because each trial owns its stream.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not eps > 0:
        raise ParameterError("eps must be positive")
    tasks = [(master_seed, t, d, k, norm_opts, n) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            samples = tuple(ex.map(_trial, tasks))
    else:
        samples = tuple(map(_trial, tasks))
    lam = np.array([s.lambda2_sq for s in samples])
    c = np.array([s.c_hat for s in samples])
    qs = tuple((q, float(v)) for q, v in zip(quantiles, np.quantile(c, quantiles)))
    return EnsembleReport(
        samples=samples,
        eps=eps,
        fraction_within=float(np.mean(lam <= (4 + 4 * eps) / k)),
        fraction_within_5eps=float(np.mean(lam <= (4 + 5 * eps) / k)),
        c_hat_quantiles=qs,
        tail_probability_label=1 - math.exp(-eps * d ** (2 / 15)),
    )


def multiplicativity_survey(ch: KrausChannel, n: int, opts: AscentOptions | None = None,
                            exponent: str = "minus") -> CorollaryCheck:
    """Multiplicativity report plus a verdict for ``||E^n|| <= ||E||^(n a)``.

    ``exponent`` picks ``a = 1 + 4/log2 k`` (``"plus"``) or ``1 - 4/log2 k``
    (``"minus"``). Both norms are ascent estimates, so the verdict
    ``alpha_hat >= a`` is empirical, not certified.
    """
    if exponent not in ("plus", "minus"):
        raise ParameterError("exponent must be 'plus' or 'minus'")
    rep = multiplicativity_report(ch, n, opts)
    shift = 4 / math.log2(ch.k) if ch.k > 1 else math.inf
    a = 1 + shift if exponent == "plus" else 1 - shift
    return CorollaryCheck(rep, a, rep.alpha_hat >= a - 1e-9)
