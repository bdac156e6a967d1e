"""Randomized property suites for the inequalities the bounds rest on.

Each suite draws case ``t`` from ``derive_stream(master_seed, suite_id, t)``
and reports the cases that violate the inequality at the stated tolerance.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import (KrausChannel, WeightOperator, apply, depolarizing, identity_channel,
                       random_channel, random_unitary_mixture)
from .config import AscentOptions, derive_stream
from .errors import ParameterError
from .linalg import eigh_psd, haar_state, purity, random_density
from .norms import lemma_2norm_bound, output_2norm_tensor
from .recovery import check_lemma3, code_noise_channel, petz_recovery, random_code, verify_bk, \
    default_reference_state
from .spectral import check_block_structure, second_singular_value

BK_TOL = 1e-8
LEMMA5_TOL = 1e-8
BLOCK_TOL = 1e-9
FIXED_POINT_TOL = 1e-10
PURE_TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    cases: int
    violations: list[int] = field(default_factory=list)
    worst_margin: float = -np.inf
    elapsed: float = 0.0
    master_seed: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, t: int, margin: float) -> None:
        """``margin`` > 0 means the case violates the inequality."""
        self.worst_margin = max(self.worst_margin, float(margin))
        if margin > 0:
            self.violations.append(t)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        line = (f"{self.name}: {verdict} cases={self.cases} violations={len(self.violations)} "
                f"worst_margin={self.worst_margin:.3e} elapsed={self.elapsed:.1f}s")
        if self.violations:
            line += f" offending: seed={self.master_seed} cases={self.violations[:10]}"
        return line


def _random_weight(d: int, rng: np.random.Generator) -> WeightOperator:
    # full rank, spread over about two orders of magnitude
    u = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))[0]
    w = np.exp(rng.uniform(-2.3, 2.3, size=d))
    return WeightOperator((u * w) @ u.conj().T)


def bk_suite(trials: int = 500, master_seed: int = 0) -> SuiteResult:
    """Recovery-fidelity inequality on random (noise, recovery, Pi, psi) tuples."""
    res = SuiteResult("bk", trials, master_seed=master_seed)
    t0 = time.perf_counter()
    for t in range(trials):
        rng = derive_stream(master_seed, 101, t)
        d = int(rng.choice([2, 3]))
        noise = random_channel(d, int(rng.integers(1, 4)), rng)
        rec = random_channel(d, int(rng.integers(1, 4)), rng)
        pi = _random_weight(d, rng)
        lhs, rhs = verify_bk(noise, rec, pi, haar_state(d, rng))
        res.record(t, lhs - rhs - BK_TOL)
    res.elapsed = time.perf_counter() - t0
    return res


def lemma5_suite(trials: int = 50, master_seed: int = 0,
                 opts: AscentOptions | None = None) -> SuiteResult:
    """Ascent estimate of ``||E^n||_2`` never exceeds ``(1/d + lambda2^2)^n``."""
    res = SuiteResult("lemma5", trials, master_seed=master_seed)
    t0 = time.perf_counter()
    for t in range(trials):
        rng = derive_stream(master_seed, 102, t)
        d, k, n = (2, 3)[t % 2], (2, 3, 4)[(t // 2) % 3], (1, 2, 3)[(t // 6) % 3]
        ch = random_unitary_mixture(d, k, rng)
        o = opts or AscentOptions(seed=int(rng.integers(2**32)))
        est = output_2norm_tensor(ch, n, o)
        res.record(t, est.value - lemma_2norm_bound(ch, n) - LEMMA5_TOL)
    res.elapsed = time.perf_counter() - t0
    return res


def blocks_suite(trials: int = 100, master_seed: int = 0) -> SuiteResult:
    """Block relations of the transfer matrix for random unital channels."""
    res = SuiteResult("blocks", trials, master_seed=master_seed)
    t0 = time.perf_counter()
    for t in range(trials):
        rng = derive_stream(master_seed, 103, t)
        ch = random_unitary_mixture(int(rng.integers(2, 5)), int(rng.integers(1, 5)), rng)
        excess, diag0, off = check_block_structure(ch)
        fp = second_singular_value(ch).fixed_point_residual
        res.record(t, max(excess - BLOCK_TOL, diag0 - BLOCK_TOL, off - BLOCK_TOL,
                          fp - FIXED_POINT_TOL))
    res.elapsed = time.perf_counter() - t0
    return res


def pure_dominance_suite(trials: int = 200, master_seed: int = 0) -> SuiteResult:
    """Some eigenvector of a mixed input has at least its output purity."""
    res = SuiteResult("pure-dominance", trials, master_seed=master_seed)
    t0 = time.perf_counter()
    for t in range(trials):
        rng = derive_stream(master_seed, 104, t)
        d = int(rng.integers(2, 5))
        ch = random_channel(d, int(rng.integers(1, 5)), rng)
        rho = random_density(d, rng)
        _, vecs = eigh_psd(rho)
        best = max(purity(apply(ch, np.outer(v, v.conj()))) for v in vecs.T)
        res.record(t, purity(apply(ch, rho)) - best - PURE_TOL)
    res.elapsed = time.perf_counter() - t0
    return res


def lemma3_cases(master_seed: int = 0):
    """Fixed panel of (label, channel, code) triples for the code-dimension bound."""
    rng = derive_stream(master_seed, 105, 0)
    yield "depolarizing(2,0.1) n=3 d_C=2", depolarizing(2, 0.1), random_code(3, 2, 1, 2, rng)
    yield "identity(2) n=1 d_C=2", identity_channel(2), random_code(1, 2, 1, 2, rng)
    yield "depolarizing(2,0.5) n=2 d_T=2 d_C=4", depolarizing(2, 0.5), random_code(2, 2, 2, 4, rng)
    yield "unitary mixture d=3 k=3 n=1 d_C=2", random_unitary_mixture(3, 3, rng), \
        random_code(1, 3, 1, 2, rng)


def lemma3_suite(trials: int = 2000, master_seed: int = 0) -> SuiteResult:
    """Code-dimension bound with Petz recovery and ``Pi = I``."""
    cases = list(lemma3_cases(master_seed))
    res = SuiteResult("lemma3", len(cases), master_seed=master_seed)
    t0 = time.perf_counter()
    for t, (_, ch, code) in enumerate(cases):
        noise = code_noise_channel(ch, code)
        rec = petz_recovery(noise, default_reference_state(code))
        pi = WeightOperator.identity(ch.d_out ** code.n)
        v = check_lemma3(ch, code, rec, pi, trials, master_seed)
        res.record(t, 1.0 if not v.passed else v.d_C / (v.rhs * (1 + v.slack)) - 1)
    res.elapsed = time.perf_counter() - t0
    return res


SUITES: dict[str, tuple[Callable[..., SuiteResult], int]] = {
    "bk": (bk_suite, 500),
    "lemma5": (lemma5_suite, 50),
    "lemma3": (lemma3_suite, 2000),
    "blocks": (blocks_suite, 100),
    "pure-dominance": (pure_dominance_suite, 200),
}


def run_suite(name: str, trials: int | None = None, master_seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise ParameterError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn, default = SUITES[name]
    return fn(default if trials is None else trials, master_seed)
