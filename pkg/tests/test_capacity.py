import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitalcap.capacity import (capacity_report, codespace_bound_rhs, coherent_information,
                                fidelity_decay, g_norm_bound, purification, q_lower_lsd,
                                q_upper_2norm, q_upper_unital, zero_error_upper)
from unitalcap.channels import (WeightOperator, apply, dephasing, depolarizing, identity_channel,
                                random_channel, random_unitary_mixture)
from unitalcap.config import AscentOptions, derive_stream
from unitalcap.errors import ParameterError, PreconditionError
from unitalcap.linalg import haar_unitary, partial_trace, random_density, von_neumann_entropy

FAST = AscentOptions(restarts=16)


def brute_coherent_info(ch, rho):
    # |Psi> = sum_i sqrt(w_i) |i>_R |v_i>_A, output (I (x) E)(Psi) built in full
    w, v = np.linalg.eigh(rho)
    d = rho.shape[0]
    psi = sum(np.sqrt(max(w[i], 0)) * np.kron(np.eye(d)[i], v[:, i]) for i in range(d))
    big = np.outer(psi, psi.conj())
    out = sum(np.kron(np.eye(d), K) @ big @ np.kron(np.eye(d), K).conj().T for K in ch.kraus)
    return von_neumann_entropy(partial_trace(out, (d, ch.d_out), [1])) - von_neumann_entropy(out)


def test_upper_formulas():
    for d in (2, 3, 4):
        assert q_upper_unital(identity_channel(d)) == pytest.approx(math.log2(1 + d), abs=1e-12)
        assert q_upper_2norm(identity_channel(d)) == pytest.approx(math.log2(1 + d), abs=1e-12)
        assert q_upper_2norm(identity_channel(d), clip=True) == pytest.approx(math.log2(d), abs=1e-12)
        assert q_upper_unital(depolarizing(d, 1.0)) == pytest.approx(0, abs=1e-12)
    assert q_upper_unital(depolarizing(2, 0.2)) == pytest.approx(math.log2(2.28), abs=1e-12)
    assert q_upper_2norm(depolarizing(2, 0.2), 2) == pytest.approx(math.log2(2 * (0.5 + 0.64)), abs=1e-12)


def test_upper_requires_unital():
    with pytest.raises(PreconditionError):
        q_upper_unital(random_channel(2, 2, derive_stream(40)))


def test_coherent_information_examples():
    assert coherent_information(identity_channel(3), np.eye(3) / 3) == pytest.approx(math.log2(3), abs=1e-12)
    assert coherent_information(depolarizing(2, 1.0), np.eye(2) / 2) == pytest.approx(-1, abs=1e-12)
    # complete dephasing: I_c at I/2 is 0
    assert coherent_information(dephasing(0.5), np.eye(2) / 2) == pytest.approx(0, abs=1e-12)
    pure = np.diag([1.0, 0, 0])
    # pure input: the reference is trivial and the two entropies coincide
    assert coherent_information(random_channel(3, 2, derive_stream(41)), pure) == pytest.approx(0, abs=1e-9)


def test_coherent_information_matches_brute_force():
    for t in range(20):
        g = derive_stream(42, t)
        d = int(g.integers(2, 4))
        ch = random_channel(d, int(g.integers(1, 4)), g)
        rho = random_density(d, g)
        assert coherent_information(ch, rho) == pytest.approx(brute_coherent_info(ch, rho), abs=1e-9)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_coherent_information_independent_of_purification(seed):
    g = np.random.default_rng(seed)
    ch = random_channel(3, 2, g)
    rho = random_density(3, g)
    psi = purification(rho)
    u = haar_unitary(3, g)
    assert coherent_information(ch, rho, u @ psi) == pytest.approx(coherent_information(ch, rho), abs=1e-9)


def test_lsd_depolarizing():
    # I_c at I/2 is 1 - H(1 - 3p/4, p/4, p/4, p/4)
    p = 0.2
    w = np.array([1 - 3 * p / 4] + [p / 4] * 3)
    exact = 1 + float(np.sum(w * np.log2(w)))
    assert exact == pytest.approx(0.1524, abs=1e-4)
    assert q_lower_lsd(depolarizing(2, p)) >= exact - 1e-12
    assert q_lower_lsd(depolarizing(2, 1.0)) == 0.0


def test_lower_never_exceeds_upper():
    for t in range(20):
        ch = random_unitary_mixture(2, int(derive_stream(43, t).integers(1, 4)), derive_stream(44, t))
        assert q_lower_lsd(ch, restarts=8) <= q_upper_unital(ch) + 1e-9


def test_capacity_report_sandwich():
    for d in (2, 3):
        rep = capacity_report(identity_channel(d))
        assert rep.upper_bits == pytest.approx(math.log2(1 + d), abs=1e-9)
        assert rep.lower_bits == pytest.approx(math.log2(d), abs=1e-9)
    rep = capacity_report(depolarizing(3, 1.0))
    assert rep.upper_bits == pytest.approx(0, abs=1e-9) and rep.lower_bits == 0
    assert rep.gap_bits == pytest.approx(rep.upper_bits - rep.lower_bits)


def test_fidelity_decay():
    assert fidelity_decay(1, 10).eta_bound == pytest.approx(2 ** -2.5, abs=1e-12)
    assert fidelity_decay(3, 4).eta_bound == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(ParameterError):
        fidelity_decay(0, 4)
    with pytest.raises(ParameterError):
        fidelity_decay(1, 0)


def test_codespace_rhs_values():
    for d in (2, 3):
        I = WeightOperator.identity(d)
        assert codespace_bound_rhs(identity_channel(d), 1, I, 1.0) == pytest.approx(d, abs=1e-12)
        assert codespace_bound_rhs(identity_channel(d), 1, I, 0.5) == pytest.approx(16 * d, abs=1e-10)
        assert codespace_bound_rhs(depolarizing(d, 1.0), 1, I, 1.0) == pytest.approx(1, abs=1e-12)
    with pytest.raises(ParameterError):
        codespace_bound_rhs(identity_channel(2), 1, WeightOperator.identity(2), 0.0)


def test_zero_error_values():
    assert zero_error_upper(identity_channel(2), 1, WeightOperator.identity(2)) == pytest.approx(1, abs=1e-12)
    assert zero_error_upper(identity_channel(3), 2, WeightOperator.identity(9)) == pytest.approx(math.log2(3), abs=1e-12)
    assert zero_error_upper(depolarizing(2, 1.0), 1, WeightOperator.identity(2)) == pytest.approx(0, abs=1e-12)


def test_g_norm_bound_kind():
    ch = depolarizing(2, 0.3)
    val, kind = g_norm_bound(ch, 1, WeightOperator.identity(2))
    assert kind == "certified" and val == pytest.approx(0.5 + 0.7 ** 2)
    val2, kind2 = g_norm_bound(ch, 1, WeightOperator.identity(2, 2.0), FAST)
    assert kind2 == "estimate"


@pytest.mark.parametrize("c", [0.5, 2.0, 5.0])
def test_codespace_rhs_scale_invariant(c):
    ch = random_unitary_mixture(2, 3, derive_stream(45))
    ref = codespace_bound_rhs(ch, 1, WeightOperator.identity(2, 1.0000001), 0.9, FAST)
    scaled = codespace_bound_rhs(ch, 1, WeightOperator.identity(2, c), 0.9, FAST)
    assert scaled == pytest.approx(ref, rel=1e-8)
