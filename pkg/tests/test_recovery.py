import math

import numpy as np
import pytest

from unitalcap.capacity import codespace_bound_rhs
from unitalcap.channels import (WeightOperator, apply, depolarizing, identity_channel,
                                random_channel, random_unitary_mixture)
from unitalcap.config import derive_stream
from unitalcap.errors import InvariantError, ParameterError, PreconditionError, ShapeError
from unitalcap.linalg import haar_state
from unitalcap.recovery import (CodeSpec, adjoint_recovery, apply_noise_to_code, average_fidelity,
                                check_lemma3, code_noise_channel, decay_threshold,
                                default_reference_state, petz_recovery, random_code, verify_bk)


def petz_setup(ch, n, d_C, seed, d_T=1):
    code = random_code(n, ch.d_in, d_T, d_C, derive_stream(seed))
    noise = code_noise_channel(ch, code)
    return code, noise, petz_recovery(noise, default_reference_state(code))


def test_random_code_isometry_and_determinism():
    a = random_code(2, 2, 1, 3, derive_stream(50))
    b = random_code(2, 2, 1, 3, derive_stream(50))
    assert np.allclose(a.encoder.conj().T @ a.encoder, np.eye(3))
    assert np.array_equal(a.encoder, b.encoder)
    assert a.dim == 4
    with pytest.raises(ShapeError):
        random_code(1, 2, 1, 3, derive_stream(50))


def test_code_spec_validation():
    with pytest.raises(InvariantError):
        CodeSpec(1, 2, 1, 2, np.array([[1, 1], [0, 0]]))
    with pytest.raises(ShapeError):
        CodeSpec(1, 2, 1, 2, np.eye(3)[:, :2])


def test_noise_output_is_state():
    ch = random_unitary_mixture(2, 2, derive_stream(51))
    code = random_code(2, 2, 2, 2, derive_stream(52))
    out = apply_noise_to_code(ch, code, [1, 0])
    assert out.shape == (8, 8)
    assert np.trace(out) == pytest.approx(1, abs=1e-12)
    # ancilla ends in |0>
    anc = out.reshape(4, 2, 4, 2).trace(axis1=0, axis2=2)
    assert np.allclose(anc, np.diag([1, 0]), atol=1e-12)


def test_petz_is_cptp_including_rank_deficient():
    ch = random_channel(2, 2, derive_stream(53))
    noise = code_noise_channel(ch, random_code(2, 2, 1, 1, derive_stream(54)))
    full = petz_recovery(noise, np.eye(4) / 4)
    assert full.tp_residual() <= 1e-9
    pure = np.zeros((4, 4))
    pure[1, 1] = 1
    rank1 = petz_recovery(identity_channel(4), pure)
    assert rank1.tp_residual() <= 1e-9
    with pytest.raises(ParameterError):
        petz_recovery(noise, np.eye(4))


def test_petz_recovers_reference():
    ch = depolarizing(2, 0.4)
    code, noise, rec = petz_setup(ch, 2, 1, 55)
    sigma = default_reference_state(code)
    assert np.allclose(apply(rec, apply(noise, sigma)), sigma, atol=1e-10)
    est = average_fidelity(ch, code, rec, 50, seed=1)
    assert est.eta_hat == pytest.approx(1, abs=1e-9)


def test_identity_noise_perfect_recovery():
    code, _, rec = petz_setup(identity_channel(2), 2, 3, 56)
    assert average_fidelity(identity_channel(2), code, rec, 100).eta_hat == pytest.approx(1, abs=1e-9)


def test_fully_depolarizing_fidelity():
    # output is I/D for every input, so R returns sigma = P_C/d_C and F = d_C^-1/2
    ch = depolarizing(2, 1.0)
    code, _, rec = petz_setup(ch, 2, 2, 57)
    est = average_fidelity(ch, code, rec, 200)
    assert est.eta_hat == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert est.eta_hat <= 0.92


def test_petz_beats_adjoint_on_unital_noise():
    ch = depolarizing(2, 0.3)
    code, noise, petz = petz_setup(ch, 2, 2, 58)
    a = average_fidelity(ch, code, petz, 1000, seed=3)
    b = average_fidelity(ch, code, adjoint_recovery(noise), 1000, seed=3)
    assert a.eta_hat >= b.eta_hat - 3 * (a.stderr + b.stderr)


def test_disjoint_ranges_combine():
    ch = depolarizing(2, 0.2)
    code, _, rec = petz_setup(ch, 2, 2, 59)
    whole = average_fidelity(ch, code, rec, 300, seed=7, batch=64)
    lo = average_fidelity(ch, code, rec, 100, seed=7)
    hi = average_fidelity(ch, code, rec, 200, seed=7, start=100)
    assert whole.eta_hat == pytest.approx((100 * lo.eta_hat + 200 * hi.eta_hat) / 300, abs=1e-12)


def test_fidelity_decreases_with_noise():
    etas = []
    for p in (0.05, 0.3, 0.7):
        ch = depolarizing(2, p)
        code, _, rec = petz_setup(ch, 2, 2, 60)
        etas.append(average_fidelity(ch, code, rec, 1000, seed=4))
    for x, y in zip(etas, etas[1:]):
        assert x.eta_hat > y.eta_hat + 3 * (x.stderr + y.stderr)


def test_verify_bk_sweep():
    worst = -np.inf
    for t in range(200):
        g = derive_stream(61, t)
        d = int(g.choice([2, 3]))
        noise = random_channel(d, int(g.integers(1, 4)), g)
        rec = random_channel(d, int(g.integers(1, 4)), g)
        a = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
        pi = WeightOperator(a @ a.conj().T + 0.05 * np.eye(d))
        lhs, rhs = verify_bk(noise, rec, pi, haar_state(d, g))
        assert 0 <= lhs <= 1 + 1e-12
        worst = max(worst, lhs - rhs)
    assert worst <= 1e-8


def test_verify_bk_scale_invariant():
    g = derive_stream(62)
    noise, rec = random_channel(3, 2, g), random_channel(3, 2, g)
    psi = haar_state(3, g)
    a = g.standard_normal((3, 3))
    base = a @ a.T + 0.1 * np.eye(3)
    _, r1 = verify_bk(noise, rec, WeightOperator(base), psi)
    _, r2 = verify_bk(noise, rec, WeightOperator(7.5 * base), psi)
    assert r1 == pytest.approx(r2, rel=1e-10)


def test_verify_bk_requires_support():
    with pytest.raises(PreconditionError):
        verify_bk(depolarizing(2, 0.3), identity_channel(2), WeightOperator(np.diag([1.0, 0])), [1, 0])


def test_check_lemma3_identity_code():
    ch = identity_channel(2)
    code, _, rec = petz_setup(ch, 1, 2, 63)
    v = check_lemma3(ch, code, rec, WeightOperator.identity(2), trials=200)
    assert v.passed
    assert v.rhs == pytest.approx(2, abs=1e-9)
    assert v.g_norm_kind == "certified"


def test_check_lemma3_with_ancilla():
    ch = depolarizing(2, 0.5)
    code, _, rec = petz_setup(ch, 2, 4, 64, d_T=2)
    assert check_lemma3(ch, code, rec, WeightOperator.identity(4), trials=500).passed


def test_decay_threshold():
    ch = depolarizing(2, 0.6)
    lam_bound = 0.5 + 0.4 ** 2
    assert decay_threshold(ch, 3, 0.5) == pytest.approx(8 * lam_bound ** 3 * 1.5 ** 3)
    # the 2-norm bound is capped at 1
    assert decay_threshold(depolarizing(2, 0.2), 3, 0.5) == pytest.approx(8 * 1.5 ** 3)
    # above the threshold the code-dimension bound forces eta^4 below (1+beta)^-n
    n, beta = 3, 0.5
    d_C = decay_threshold(ch, n, beta) * 1.01
    eta = (1 + beta) ** (-n / 4)
    assert codespace_bound_rhs(ch, n, WeightOperator.identity(8), eta) < d_C
