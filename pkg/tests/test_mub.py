import cmath
import itertools
import math

import numpy as np
import pytest

from racahcf import InvalidInputError, UnsupportedError, mub
from racahcf.mub import MubParams


def test_params_validation():
    with pytest.raises(InvalidInputError):
        MubParams(1)
    with pytest.raises(InvalidInputError):
        MubParams(3, 0.0, 3)


def test_vra_examples():
    assert np.allclose(mub.vra_matrix(MubParams(2)), [[0, 1], [1, 0]])
    for r in (0.0, 0.3, 1.0):
        for a in (0, 1):
            q = cmath.exp(1j * math.pi)
            v = mub.vra_matrix(MubParams(2, r, a))
            assert np.allclose(v, [[0, q ** a], [cmath.exp(1j * math.pi * r), 0]])
    z = mub.vra_matrix(MubParams(2, 0, 0)).conj().T @ mub.vra_matrix(MubParams(2, 0, 1))
    assert np.allclose(z, np.diag([1, -1]))


def test_vra_factorization():
    for d in (2, 3, 5, 6):
        w = mub.weyl_pair(d, 0.4)
        for a in range(d):
            p = MubParams(d, 0.4, a)
            ref = mub.weyl_pair(d, 0.4)
            assert np.max(np.abs(mub.vra_matrix(p) - w.P @ ref.X @ np.linalg.matrix_power(ref.Z, a))) < 1e-14


def test_printed_vectors():
    s = 1 / math.sqrt(2)
    # components ordered phi_0, phi_1
    assert np.allclose(mub.mub_vector(MubParams(2), 0), [s, s])
    assert np.allclose(mub.mub_vector(MubParams(2), 1), [-s, s])
    assert np.allclose(mub.mub_vector(MubParams(2, 0, 1), 0), [1j * s, s])
    t = 1 / math.sqrt(3)
    q = cmath.exp(2j * math.pi / 3)
    assert np.allclose(mub.mub_vector(MubParams(3), 0), [t, t, t])
    assert np.allclose(mub.mub_vector(MubParams(3, 0, 1), 1), [t, q * q * t, t])


@pytest.mark.parametrize("d", range(2, 12))
def test_eigen_relation(d):
    for r in (0.0, 0.5, 1.0):
        for a in range(d):
            p = MubParams(d, r, a)
            v = mub.vra_matrix(p)
            for al in range(d):
                u = mub.mub_vector(p, al)
                assert np.linalg.norm(v @ u - mub.eigenvalue(p, al) * u) < 1e-11


@pytest.mark.parametrize("d", range(2, 12))
def test_hra(d):
    p = MubParams(d, 0.3, d // 2)
    h = mub.hra_matrix(p)
    assert np.max(np.abs(h.conj().T @ h - np.eye(d))) < 1e-12
    assert np.max(np.abs(h - mub.mub_basis(p))) < 1e-12
    diag = h.conj().T @ mub.vra_matrix(p) @ h
    assert np.max(np.abs(diag - np.diag(mub.hra_diagonal(p)))) < 1e-12


def test_hadamard_like():
    assert np.allclose(np.abs(mub.hra_matrix(MubParams(2))), 1 / math.sqrt(2))


def test_report_prime_and_composite():
    rep = mub.unbiasedness_report(5, 0.0)
    n = len(rep["names"])
    assert n == 6
    off = [(i, k) for i in range(n) for k in range(n) if i != k]
    assert len(off) // 2 == 15
    for i, k in off:
        assert abs(rep["min"][i, k] - 1 / math.sqrt(5)) < 1e-12
        assert abs(rep["max"][i, k] - 1 / math.sqrt(5)) < 1e-12
    for i in range(n):
        assert abs(rep["max"][i, i] - 1) < 1e-12 and rep["min"][i, i] < 1e-12
    rep6 = mub.unbiasedness_report(6, 0.0)
    hi = rep6["max"]
    assert not np.allclose(hi[:6, :6][~np.eye(6, dtype=bool)], 1 / math.sqrt(6))
    assert np.allclose(hi[6, :6], 1 / math.sqrt(6))


def test_gauss_sum():
    assert abs(mub.gauss_sum(1, 1, 1) - 1) < 1e-15
    q = cmath.exp(2j * math.pi / 3)
    assert abs(mub.gauss_sum(2, 0, 3) - (1 + 2 * q)) < 1e-12
    assert abs(mub.gauss_sum(2, 0, 3) - 1j * math.sqrt(3)) < 1e-12
    with pytest.raises(InvalidInputError):
        mub.gauss_sum(2, 0, 4)
    with pytest.raises(InvalidInputError):
        mub.gauss_sum(1, 0, 3)


def test_gauss_route_p5():
    p = 5
    for a, b in itertools.permutations(range(p), 2):
        for al, be in itertools.product(range(p), repeat=2):
            ip = np.vdot(mub.mub_vector(MubParams(p, 0, a), al), mub.mub_vector(MubParams(p, 0, b), be))
            s = mub.gauss_sum(a - b, -(a - b) * p - 2 * (al - be), p)
            assert abs(p * ip - s) < 1e-10


def test_weyl_relations():
    for d in range(2, 26):
        w = mub.weyl_pair(d)
        q = cmath.exp(2j * math.pi / d)
        assert np.max(np.abs(w.X @ w.Z - q * w.Z @ w.X)) < 1e-12
        assert np.max(np.abs(np.linalg.matrix_power(w.X, d) - np.eye(d))) < 1e-12
        assert np.max(np.abs(np.linalg.matrix_power(w.Z, d) - np.eye(d))) < 1e-12


def test_pauli_set():
    ps = mub.pauli_set(2)
    mats = {(a, b): m for a, b, m in ps}
    assert np.allclose(mats[(1, 1)], -1j * np.array([[0, -1j], [1j, 0]]))
    ps3 = mub.pauli_set(3)
    assert len(ps3) == 9
    traceless = [m for a, b, m in ps3 if abs(np.trace(m)) < 1e-12]
    assert len(traceless) == 8
    for a, b, m in ps3:
        assert np.allclose(m.conj().T @ m, np.eye(3))
        p = np.linalg.matrix_power(m, 3)
        assert np.allclose(p, p[0, 0] * np.eye(3))


def test_cartan_partition():
    sets = mub.cartan_partition(5)
    assert sorted(sets[2]) == [(1, 1), (2, 2), (3, 3), (4, 4)]
    assert sorted(sets[3]) == [(1, 2), (2, 4), (3, 1), (4, 3)]
    assert mub.cartan_partition(2) == [[(0, 1)], [(1, 0)], [(1, 1)]]
    flat = [x for s in sets for x in s]
    assert len(flat) == len(set(flat)) == 24
    mats = {(a, b): m for a, b, m in mub.pauli_set(5)}
    for s in sets:
        for x, y in itertools.combinations(s, 2):
            assert np.max(np.abs(mats[x] @ mats[y] - mats[y] @ mats[x])) < 1e-12
    with pytest.raises(UnsupportedError):
        mub.cartan_partition(6)


def test_basis_json():
    data = mub.basis_to_json(MubParams(3, 0, 1))
    assert len(data["vectors"]) == 3 and set(data["vectors"][0][0]) == {"re", "im"}
