import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitalcap.channels import (KrausChannel, dephasing, depolarizing, identity_channel,
                                random_channel, random_unitary_mixture, transfer_matrix,
                                unvectorize, vectorize)
from unitalcap.config import derive_stream
from unitalcap.errors import PreconditionError
from unitalcap.expanders import hastings_channel
from unitalcap.linalg import haar_unitary
from unitalcap.spectral import check_block_structure, is_expander, second_singular_value


def test_identity_has_no_gap():
    for d in (2, 3, 5):
        assert second_singular_value(identity_channel(d)).lambda2 == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("d,p", [(d, p) for d in (2, 3, 4) for p in (0.0, 0.2, 0.5, 1.0)]
                         + [(2, 1.1), (3, 1.1)])
def test_depolarizing_lambda2(d, p):
    rep = second_singular_value(depolarizing(d, p))
    assert rep.lambda2 == pytest.approx(abs(1 - p), abs=1e-10)
    assert rep.fixed_point_residual <= 1e-10


@pytest.mark.parametrize("p", [0.0, 0.3, 0.5])
def test_dephasing_lambda2(p):
    # off-diagonal sector is scaled by 1-2p, Z keeps norm 1
    assert second_singular_value(dephasing(p)).lambda2 == pytest.approx(max(1.0, abs(1 - 2 * p)), abs=1e-10)


def test_non_unital_rejected():
    ad = KrausChannel(np.stack([np.array([[1, 0], [0, np.sqrt(0.7)]]),
                                np.array([[0, np.sqrt(0.3)], [0, 0]])]))
    with pytest.raises(PreconditionError):
        second_singular_value(ad)


def test_lambda2_matches_definition_on_traceless_inputs():
    # sup over traceless X of ||E(X)||_F / ||X||_F, approached from below by
    # power iteration on the traceless sector using only the channel action
    for t in range(5):
        g = derive_stream(20, t)
        ch = random_unitary_mixture(3, 3, g)
        E = transfer_matrix(ch).mat
        lam2 = second_singular_value(ch).lambda2
        x = g.standard_normal(9) + 1j * g.standard_normal(9)
        best = 0.0
        for _ in range(3000):
            X = unvectorize(x, 3)
            X -= np.trace(X) / 3 * np.eye(3)
            x = vectorize(X)
            x /= np.linalg.norm(x)
            y = E @ x
            best = max(best, np.linalg.norm(y))
            x = E.conj().T @ y
        assert best <= lam2 + 1e-10
        assert best >= lam2 - 1e-6
        for _ in range(200):
            X = g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3))
            X -= np.trace(X) / 3 * np.eye(3)
            assert np.linalg.norm(E @ vectorize(X)) <= lam2 * np.linalg.norm(X) + 1e-10


def test_dense_and_lanczos_agree():
    for d, k in ((4, 4), (8, 6), (20, 4)):
        ch = hastings_channel(d, k, derive_stream(21, d))
        dense = second_singular_value(ch, "dense").lambda2
        lanczos = second_singular_value(ch, "lanczos").lambda2
        assert dense == pytest.approx(lanczos, abs=1e-9)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_lambda2_unitarily_invariant(seed):
    g = np.random.default_rng(seed)
    ch = random_unitary_mixture(3, 3, g)
    u, v = haar_unitary(3, g), haar_unitary(3, g)
    rotated = KrausChannel(np.stack([u @ K @ v for K in ch.kraus]))
    assert second_singular_value(rotated).lambda2 == pytest.approx(second_singular_value(ch).lambda2, abs=1e-10)


def test_lambda2_at_most_one():
    for t in range(30):
        g = derive_stream(22, t)
        lam = second_singular_value(random_unitary_mixture(int(g.integers(2, 5)), int(g.integers(1, 6)), g)).lambda2
        assert -1e-12 <= lam <= 1 + 1e-10


def test_block_structure_unital():
    worst = 0.0
    for t in range(30):
        g = derive_stream(23, t)
        ch = random_unitary_mixture(int(g.integers(2, 4)), int(g.integers(2, 5)), g)
        worst = max(worst, *check_block_structure(ch))
    assert worst <= 1e-9


def test_block_structure_negative_controls():
    # non-TP Kraus set: the P0 block no longer fixes |I>
    scaled = KrausChannel(np.stack([1.2 * np.eye(2)]), check=False)
    assert check_block_structure(scaled)[1] > 0.1
    # TP but not unital: mixing between the sectors
    ch = random_channel(3, 2, derive_stream(24))
    assert check_block_structure(ch)[2] > 1e-3


def test_is_expander():
    ch = depolarizing(2, 0.5)
    assert is_expander(ch, 0.25 * ch.k)
    assert not is_expander(ch, 0.3 * ch.k)
