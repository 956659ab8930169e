import json

import numpy as np
import pytest

from renyi_dpi.channels import (
    KrausChannel,
    environment_trace,
    full_trace_channel,
    generalized_pauli,
    identity_channel,
    load_channel,
    partial_trace_channel,
    pauli_twirl_b,
    random_channel,
    save_channel,
    stinespring_isometry,
    unitary_channel,
    validate_cptp,
)
from renyi_dpi.errors import DimensionMismatchError, InvalidInputError, InvalidShapeError
from renyi_dpi.linalg import hs_inner, kron, partial_trace
from renyi_dpi.states import random_density, random_unitary


def test_apply_examples():
    rho = random_density(3, seed=1)
    np.testing.assert_array_equal(identity_channel(3).apply(rho), rho)
    assert full_trace_channel(3).apply(rho)[0, 0].real == pytest.approx(1.0)
    ra, rb = random_density(2, seed=2), random_density(3, seed=3)
    np.testing.assert_allclose(partial_trace_channel((2, 3), [0]).apply(kron(ra, rb)), ra, atol=1e-14)


def test_adjoint_examples():
    H = random_density(2, seed=4)
    ptr = partial_trace_channel((2, 3), [0])
    np.testing.assert_allclose(ptr.adjoint_apply(H), kron(H, np.eye(3)), atol=1e-14)
    ch = random_channel(4, 2, 3, seed=5)
    np.testing.assert_allclose(ch.adjoint_apply(np.eye(2)), np.eye(4), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_pairing(seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(3, 2, 3, seed=seed)
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Y = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert abs(hs_inner(ch.apply(X), Y) - hs_inner(X, ch.adjoint_apply(Y))) <= 1e-10


def test_validate_examples():
    rep = validate_cptp(identity_channel(3))
    assert rep.tp_residual <= 1e-12 and abs(rep.choi_min_eig) <= 1e-12
    rep = validate_cptp(KrausChannel.from_kraus([np.eye(2) / 2]))
    assert rep.tp_residual == pytest.approx(0.75)
    assert not rep.is_valid()


@pytest.mark.parametrize("seed", range(5))
def test_random_channel_valid_and_deterministic(seed):
    ch = random_channel(4, 2, 3, seed=seed)
    rep = validate_cptp(ch)
    assert rep.tp_residual <= 1e-10 and rep.choi_min_eig >= -1e-10
    again = random_channel(4, 2, 3, seed=seed)
    for a, b in zip(ch.kraus, again.kraus):
        np.testing.assert_array_equal(a, b)


def test_random_channel_single_kraus_is_unitary():
    (U,) = random_channel(3, 3, 1, seed=8).kraus
    np.testing.assert_allclose(U.conj().T @ U, np.eye(3), atol=1e-12)


def test_random_channel_shape_checks():
    with pytest.raises(InvalidShapeError):
        random_channel(4, 1, 2)
    with pytest.raises(InvalidShapeError):
        random_channel(2, 2, 0)


def test_kraus_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        KrausChannel(2, 2, (np.eye(3),))
    with pytest.raises(DimensionMismatchError):
        identity_channel(2).apply(np.eye(3))


def test_partial_trace_channel_matches_function():
    X = random_density(4, seed=11)
    for keep in ([0], [1]):
        np.testing.assert_allclose(
            partial_trace_channel((2, 2), keep).apply(X), partial_trace(X, (2, 2), keep), atol=1e-12
        )
    np.testing.assert_allclose(partial_trace_channel((2, 2), [0, 1]).apply(X), X, atol=1e-15)
    ch = partial_trace_channel((2, 3), [1])
    assert ch.dim_out == 3
    assert validate_cptp(ch).tp_residual <= 1e-12


def test_generalized_pauli():
    fam = generalized_pauli(2)
    assert len(fam.ops) == 4
    X, Z = np.array([[0, 1], [1, 0]]), np.diag([1, -1])
    for op, ref in zip(fam.ops, [np.eye(2), Z, X, X @ Z]):
        np.testing.assert_allclose(op, ref, atol=1e-12)
    np.testing.assert_allclose(generalized_pauli(1).ops[0], [[1]])
    rng = np.random.default_rng(0)
    M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    ops = generalized_pauli(3).ops
    for v in ops:
        np.testing.assert_allclose(v.conj().T @ v, np.eye(3), atol=1e-10)
    twirl = sum(v @ M @ v.conj().T for v in ops) / 9
    np.testing.assert_allclose(twirl, np.trace(M) / 3 * np.eye(3), atol=1e-10)


def test_pauli_twirl():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(pauli_twirl_b(np.outer(phi, phi), (2, 2)), np.eye(4) / 4, atol=1e-12)
    rho = random_density(6, seed=3)
    expected = kron(partial_trace(rho, (2, 3), [0]), np.eye(3) / 3)
    np.testing.assert_allclose(pauli_twirl_b(rho, (2, 3)), expected, atol=1e-9)
    np.testing.assert_allclose(pauli_twirl_b(random_density(2, seed=1), (2, 1)), random_density(2, seed=1))


def test_stinespring():
    V = stinespring_isometry(identity_channel(2))
    np.testing.assert_allclose(V, np.eye(2))
    ptr = partial_trace_channel((2, 2), [0])
    V = stinespring_isometry(ptr)
    rho = random_density(4, seed=6)
    np.testing.assert_allclose(environment_trace(V, rho, 2), ptr.apply(rho), atol=1e-10)
    V = stinespring_isometry(random_channel(3, 2, 4, seed=2))
    np.testing.assert_allclose(V.conj().T @ V, np.eye(3), atol=1e-10)


def test_unitary_channel_inverse_and_composition():
    U = random_unitary(3, seed=2)
    X = random_density(3, seed=5)
    back = unitary_channel(U).compose(unitary_channel(U.conj().T))
    np.testing.assert_allclose(back.apply(X), X, atol=1e-12)
    comp = random_channel(3, 2, 2, seed=1).compose(random_channel(3, 3, 2, seed=2))
    assert validate_cptp(comp).is_valid()


def test_json_round_trip(tmp_path):
    ch = random_channel(4, 2, 2, seed=3)
    obj = json.loads(json.dumps(ch.to_json()))
    assert obj["kraus"][0]["rows"] == 2 and obj["kraus"][0]["cols"] == 4
    back = KrausChannel.from_json(obj)
    for a, b in zip(ch.kraus, back.kraus):
        np.testing.assert_array_equal(a, b)
    save_channel(tmp_path / "c.json", identity_channel(2))
    assert load_channel(tmp_path / "c.json").to_json()["kraus"][0]["dim"] == 2


def test_json_malformed(tmp_path):
    with pytest.raises(InvalidInputError):
        KrausChannel.from_json({"dim_in": 2})
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(InvalidInputError):
        load_channel(tmp_path / "bad.json")
