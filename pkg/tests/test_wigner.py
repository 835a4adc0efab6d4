from fractions import Fraction

import numpy as np
import pytest

from racahcf import HalfInt, SqrtRationalSum, wigner
from racahcf.oracle import cg_oracle, recoupling_oracle

h = HalfInt.of
R = SqrtRationalSum.rational
S = SqrtRationalSum.sqrt


def test_cg_examples():
    assert wigner.cg(h("1/2"), h("1/2"), h("1/2"), h("-1/2"), 0, 0) == S(Fraction(1, 2))
    assert wigner.cg(2, 1, 0, 0, 2, 1) == R(1)
    assert wigner.cg(1, 1, 1, 1, 1, 1).is_zero()


def test_one_jm():
    assert wigner.one_jm(h("1/2"), h("1/2"), h("1/2")) == 0
    assert wigner.one_jm(h("1/2"), h("1/2"), h("-1/2")) == -1
    assert wigner.one_jm(1, 0, 0) == -1


def test_three_jm_examples():
    assert wigner.three_jm(3, 3, 2, -2, 2, 0).is_zero()
    assert wigner.three_jm(h("1/2"), h("1/2"), 0, h("1/2"), h("-1/2"), 0) == S(Fraction(1, 2))
    assert wigner.three_jm(1, 1, 1, 0, 0, 0).is_zero()


def test_three_jm_closed_form_j_j_0():
    for tj in range(0, 9):
        j = HalfInt(tj)
        for m in j.projections():
            v = wigner.three_jm(j, j, 0, m, -m, 0)
            sign = -1 if ((tj - m.twice) // 2) % 2 else 1
            assert v == S(Fraction(1, tj + 1)) * sign


def test_six_j_examples():
    assert wigner.six_j(1, 1, 1, 1, 1, 1) == R(Fraction(1, 6))
    assert wigner.six_j(1, 1, 3, 1, 1, 1).is_zero()
    assert wigner.six_j(1, 1, 1, 0, 1, 1) == R(Fraction(-1, 3))


def test_nine_j_examples():
    assert wigner.nine_j([[0, 0, 0]] * 3) == R(1)
    assert wigner.nine_j([[1, 1, 3], [1, 1, 1], [1, 1, 1]]).is_zero()
    hh = h("1/2")
    rows = [[hh, hh, 1], [hh, hh, 1], [1, 1, 0]]
    assert wigner.nine_j(rows) == recoupling_oracle(rows)


def test_nine_j_single_sum_route():
    # 9-j as a sum over x of products of three 6-j symbols
    rows = [[1, 2, 1], [2, 1, 2], [1, 2, 2]]
    (a, b, c), (d, e, f), (g, hh, i) = rows
    total = SqrtRationalSum.zero()
    for x2 in range(0, 20):
        x = HalfInt(x2)
        term = wigner.six_j(a, b, c, f, i, x) * wigner.six_j(d, e, f, b, x, hh) * wigner.six_j(g, hh, i, x, a, d)
        term = term * (x2 + 1)
        total = total - term if x2 % 2 else total + term
    assert wigner.nine_j(rows) == total


def test_oracle_cg_matches_production():
    for t1 in range(0, 5):
        for t2 in range(0, 5):
            table = cg_oracle(HalfInt(t1), HalfInt(t2))
            for (u1, u2, tj, tm), v in table.items():
                assert wigner.cg(HalfInt(t1), HalfInt(u1), HalfInt(t2), HalfInt(u2), HalfInt(tj), HalfInt(tm)) == v


def test_threejm_array_matches_scalar():
    arr = wigner.threejm_array(4, 3, 3)
    for i1 in range(5):
        for i2 in range(4):
            for i3 in range(4):
                m1, m2, m3 = 4 - 2 * i1, 3 - 2 * i2, 3 - 2 * i3
                ref = wigner.three_jm(HalfInt(4), HalfInt(3), HalfInt(3), HalfInt(m1), HalfInt(m2), HalfInt(m3))
                assert arr[i1, i2, i3] == pytest.approx(ref.to_float(), abs=1e-14)


def test_regge_like_symmetries_six_j():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b, c, d, e, f = (int(x) for x in rng.integers(0, 4, size=6))
        v = wigner.six_j(a, b, c, d, e, f)
        assert v == wigner.six_j(b, a, c, e, d, f)
        assert v == wigner.six_j(d, e, c, a, b, f)
        assert v == wigner.six_j(c, a, b, f, d, e)


def test_triangle():
    assert wigner.triangle(2, 2, 4)
    assert not wigner.triangle(2, 2, 6)
    assert not wigner.triangle(1, 2, 2)
