import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from racahcf import ExactComplex, HalfInt, InvalidInputError, SqrtRationalSum, UnsupportedError, chain, oracle, wigner
from racahcf import crystalfield as cf

D_LABELS = [
    "(00)0 (00)0 0", "(00)0 (22)0 0", "(00)0 (44)0 0", "(00)0 (04)4 4", "(00)0 (22)4 4", "(00)0 (24)4 4",
    "(00)0 (44)4 4", "(00)0 (24)6 6", "(00)0 (44)6 6", "(00)0 (44)8 8",
    "(ss)1 (22)1 0", "(ss)1 (22)3 4",
    "(ss)0 (22)0 0", "(ss)0 (22)4 4",
]
F_LABELS = [
    "(00)0 (00)0 0", "(00)0 (22)0 0", "(00)0 (44)0 0", "(00)0 (66)0 0", "(00)0 (04)4 4", "(00)0 (22)4 4",
    "(00)0 (24)4 4", "(00)0 (26)4 4", "(00)0 (44)4 4", "(00)0 (46)4 4", "(00)0 (66)4 4", "(00)0 (06)6 6",
    "(00)0 (24)6 6", "(00)0 (26)6 6", "(00)0 (44)6 6", "(00)0 (46)6 6", "(00)0 (66)6 6", "(00)0 (26)8 8",
    "(00)0 (44)8 8", "(00)0 (46)8 8", "(00)0 (66)8 8", "(00)0 (46)9 9", "(00)0 (46)10, 10",
    "(00)0 (66)10, 10", "(00)0 (66)12, 12a", "(00)0 (66)12, 12b",
    "(ss)1 (33)1 0", "(ss)1 (33)3 4", "(ss)1 (33)5 4", "(ss)1 (33)5 6",
    "(ss)0 (33)0 0", "(ss)0 (33)4 4", "(ss)0 (33)6 6",
]

FK = {0: 1000.0, 2: 4900.0, 4: 4410.0}
COUL = cf.CoulombParams(2, "slater_sub", (1000, 100, 10))


@pytest.fixture(scope="module")
def d1():
    return cf.enumerate_basis(2, 1)


@pytest.fixture(scope="module")
def d2():
    return cf.enumerate_basis(2, 2)


def test_config_dimension():
    assert cf.config_dimension(2, 1) == 10
    assert cf.config_dimension(2, 2) == 45
    assert cf.config_dimension(3, 2) == 91
    with pytest.raises(InvalidInputError):
        cf.config_dimension(2, 11)


def test_basis(d1, d2):
    assert len(d1) == 10
    assert {str(b.term) for b in d1} == {"2D"}
    assert {b.J.twice for b in d1} == {3, 5}
    assert {b.chain.irrep for b in d1} == {"G3/2", "E5/2"}
    assert len(d2) == 45
    assert [str(t) for t in cf.terms(2, 2)] == ["1S", "1D", "1G", "3P", "3F"]
    b0 = cf.enumerate_basis(2, 0)
    assert len(b0) == 1 and str(b0[0].term) == "1S" and b0[0].J == HalfInt(0)
    assert len(cf.enumerate_basis(3, 2)) == 91
    with pytest.raises(UnsupportedError):
        cf.enumerate_basis(2, 3)


def test_coulomb(d1, d2):
    assert np.allclose(cf.coulomb_matrix(2, 1, COUL, d1).full(), 0)
    m = cf.coulomb_matrix(2, 2, COUL, d2, exact=True)
    a, b, c = cf.convert_coulomb_params(COUL, "racah").values
    expected = {"3F": a - 8 * b, "3P": a + 7 * b, "1D": a - 3 * b + 2 * c, "1G": a + 4 * b + 2 * c,
                "1S": a + 14 * b + 7 * c}
    for labels, blk in m.blocks.values():
        for i, lab in enumerate(labels):
            assert blk[i, i] == ExactComplex(expected[str(lab.term)])


def test_spinorbit(d1):
    m = cf.spinorbit_matrix(2, 1, 300.0, d1)
    full = m.full(d1)
    for i, lab in enumerate(d1):
        expected = 300.0 if lab.J.twice == 5 else -450.0
        assert abs(full[i, i] - expected) < 1e-10
    assert abs(np.trace(full)) < 1e-10
    assert np.allclose(cf.spinorbit_matrix(2, 1, 0.0, d1).full(), 0)


def test_dk_from_bkq():
    assert all(abs(v) == 0 for v in cf.dk_from_bkq(2, {(4, 0): 0.0, (4, 4): 0.0, (4, -4): 0.0}).values())
    dk = cf.dk_from_bkq(2, cf.cubic_bkq(1), exact=True)
    assert dk == {(4, 0): ExactComplex(6 * SqrtRationalSum.sqrt(30))}
    num = cf.dk_from_bkq(2, cf.cubic_bkq(1.0))
    assert abs(num[(4, 0)] - 32.86335345030997) < 1e-12
    with pytest.raises(InvalidInputError):
        cf.dk_from_bkq(2, {(3, 0): 1.0})
    with pytest.raises(InvalidInputError):
        cf.dk_from_bkq(2, {(4, 2): 1.0})
    with pytest.raises(InvalidInputError):
        cf.dk_from_bkq(2, {(4, 1): 1.0, (4, -1): -1.0})


def test_cubic_ratio_is_invariant():
    # the sqrt(5/14) ratio makes the one-electron operator commute with C3(111)
    m = oracle.one_electron_matrix(2, 0.0, cf.cubic_bkq(1.0))
    u = chain.su2((1, 1, 1), 2 * np.pi / 3)
    d = np.kron(chain.wigner_d(4, u), chain.wigner_d(1, u))
    assert np.max(np.abs(d @ m - m @ d)) < 1e-12


def test_crystalfield_d1_exact(d1):
    dk = cf.dk_from_bkq(2, cf.cubic_bkq(1), exact=True)
    m = cf.crystalfield_matrix(2, 1, dk, d1, exact=True)
    assert m.trace() == ExactComplex(0)
    for labels, blk in m.blocks.values():
        n = blk.shape[0]
        # (M - 6)(M + 4) = 0 exactly
        for i, k in itertools.product(range(n), repeat=2):
            s = ExactComplex(0)
            for t in range(n):
                s = s + (blk[i, t] - ExactComplex(6 * int(i == t))) * (blk[t, k] + ExactComplex(4 * int(t == k)))
            assert s.is_zero()
    levels = cf.diagonalize_levels(m)
    assert [(round(lv.energy, 10), lv.degeneracy) for lv in levels] == [(-4.0, 6), (6.0, 4)]
    assert np.allclose(cf.crystalfield_matrix(2, 1, {}, d1).full(), 0)


def test_block_structure_exact_zeros(d2):
    dk = cf.dk_from_bkq(2, cf.cubic_bkq(700.0))
    m = cf.coulomb_matrix(2, 2, COUL, d2) + cf.spinorbit_matrix(2, 2, 300.0, d2) + cf.crystalfield_matrix(2, 2, dk, d2)
    full = m.full(d2)
    for i, k in itertools.product(range(45), repeat=2):
        a, b = d2[i].chain, d2[k].chain
        if (a.irrep, a.gamma) != (b.irrep, b.gamma):
            assert full[i, k] == 0
    assert m.is_hermitian()


def test_trace_of_one_body_term(d1, d2):
    bkq = {(0, 0): 1.0}
    for n, basis, expected in ((1, d1, 10.0), (2, d2, 90.0)):
        m = cf.crystalfield_matrix(2, n, cf.dk_from_bkq(2, bkq), basis)
        assert abs(m.trace() - expected) < 1e-10
    m = cf.crystalfield_matrix(2, 2, cf.dk_from_bkq(2, cf.cubic_bkq(1.0)), d2)
    assert abs(m.trace()) < 1e-10


def _d1_adapted_states(basis):
    # columns in the kron(orbital, spin) space of the oracle, S coupled first
    cols = []
    for lab in basis:
        t = chain.reduce_representation(lab.J, "O")
        col = t.column(lab.chain)
        v = np.zeros(10, dtype=complex)
        for iM, tM in enumerate(range(lab.J.twice, -lab.J.twice - 1, -2)):
            for i_ml, ml in enumerate(range(2, -3, -1)):
                for i_ms, tms in enumerate((1, -1)):
                    c = wigner.cg(HalfInt(1), HalfInt(tms), 2, ml, lab.J, HalfInt(tM)).to_float()
                    v[2 * i_ml + i_ms] += col[iM] * c
        cols.append(v)
    return np.array(cols).T


def test_wigner_eckart_consistency_d1(d1):
    p = _d1_adapted_states(d1)
    assert np.allclose(p.conj().T @ p, np.eye(10))
    for k in (0, 2, 4):
        table = chain.reduce_representation(k, "O")
        red = cf.reduced_c(2, k).to_float()
        for lab in table.labels:
            if lab.irrep != "A1":
                continue
            bkq = {(k, q): complex(table.coefficient(q, lab)) / red for q in range(-k, k + 1)}
            op = oracle.one_electron_matrix(2, 0.0, bkq)
            direct = p.conj().T @ op @ p
            ours = cf.crystalfield_matrix(2, 1, {(k, lab.a): 1.0}, d1).full(d1)
            assert np.max(np.abs(direct - ours)) < 1e-12


def test_reduced_unit_tensor(d2):
    t = cf.terms(2, 2)
    t1 = cf.terms(2, 1)[0]
    for k in range(5):
        assert cf.reduced_unit_tensor(2, 1, t1, t1, k) == SqrtRationalSum.rational(1)
    for a, b in itertools.product(t, repeat=2):
        for k in range(5):
            x = cf.reduced_unit_tensor(2, 2, a, b, k).to_float()
            if a.S != b.S:
                assert x == 0
                continue
            assert abs(x - oracle.two_electron_reduced_unit_tensor(2, int(a.L), int(b.L), k)) < 1e-12
    assert cf.reduced_unit_tensor(2, 2, t[4], t[0], 2).is_zero()
    assert abs(cf.reduced_unit_tensor(2, 2, t[4], t[4], 4).to_float() + 1.4832396974191326) < 1e-12


def test_oracle_equivalence_d2(d2):
    for dq in (0.0, 700.0):
        bkq = cf.cubic_bkq(dq)
        dk = cf.dk_from_bkq(2, bkq)
        h = cf.coulomb_matrix(2, 2, COUL, d2) + cf.spinorbit_matrix(2, 2, 250.0, d2) + \
            cf.crystalfield_matrix(2, 2, dk, d2)
        ref = oracle.determinant_matrix(2, 2, FK, 250.0, bkq)
        e1 = np.sort(np.linalg.eigvalsh(h.full()))
        e2 = np.sort(np.linalg.eigvalsh(ref))
        assert np.max(np.abs(e1 - e2) / np.maximum(1, np.abs(e2))) < 1e-9


def test_non_invariant_bkq_rejected():
    with pytest.raises(InvalidInputError):
        cf.dk_from_bkq(2, {(2, 0): 1.0})


def test_heff_reproduces_ordinary_model(d2):
    dk = cf.dk_from_bkq(2, cf.cubic_bkq(500.0))
    ordinary = {
        "coulomb": cf.coulomb_matrix(2, 2, COUL, d2),
        "so": cf.spinorbit_matrix(2, 2, 300.0, d2),
        "cf": cf.crystalfield_matrix(2, 2, dk, d2),
    }
    fk = {k: float(v) for k, v in COUL.capital().items()}
    parts = {
        "coulomb": cf.isotropic_effective_params(2, fk=fk),
        "so": cf.isotropic_effective_params(2, zeta=300.0),
        "cf": cf.isotropic_effective_params(2, dk=dk),
    }
    for name, params in parts.items():
        h = cf.heff_matrix(2, 2, params, d2)
        assert np.max(np.abs(h.full() - ordinary[name].full())) < 1e-9 * max(1.0, np.max(np.abs(h.full())))
    with pytest.raises(UnsupportedError):
        cf.heff_matrix(2, 1, {}, cf.enumerate_basis(2, 1))


def test_heff_constants():
    so = cf.isotropic_effective_params(2, zeta=1)
    (lab, val), = so.items()
    assert str(lab) == "(ss)1 (22)1 0"
    assert val == ExactComplex(-3 * SqrtRationalSum.sqrt(15))
    lf = cf.isotropic_effective_params(2, dk={(4, 0): 1})
    (lab, val), = lf.items()
    assert str(lab) == "(ss)0 (22)4 4" and val == ExactComplex(SqrtRationalSum.sqrt(2))


def test_heff_general_parameter_is_hermitian(d2):
    for lab in cf.enumerate_effective_params(2, "O"):
        h = cf.heff_matrix(2, 2, {lab: 1.0}, d2)
        assert h.is_hermitian(), str(lab)


def test_enumeration_lists():
    assert [str(x) for x in cf.enumerate_effective_params(2, "O")] == D_LABELS
    assert [str(x) for x in cf.enumerate_effective_params(3, "O")] == F_LABELS
    assert len(cf.enumerate_effective_params(2, "O", restricted=True)) == 5
    assert len(cf.enumerate_effective_params(3, "O", "coulomb")) == 26
    for text in F_LABELS:
        assert str(cf.parse_effective_label(text, 3)) == text
    with pytest.raises(UnsupportedError):
        cf.enumerate_effective_params(1, "O")
    with pytest.raises(UnsupportedError):
        cf.enumerate_effective_params(2, "C3")


def test_conversions():
    abc = cf.convert_coulomb_params(COUL, "racah")
    assert abc.values == (510, 50, 350)
    f = cf.convert_coulomb_params(cf.CoulombParams(3, "slater_sub", (0, 1, 0, 0)), "racah")
    assert f.values == (-10, Fraction(70, 9), Fraction(1, 9), Fraction(5, 3))
    cap = cf.CoulombParams(3, "slater_capital", (0, 225, 1089, 184081))
    assert cf.convert_coulomb_params(cap, "slater_sub").values == (0, 1, 1, 25)
    for ell in (2, 3):
        src = cf.CoulombParams(ell, "slater_capital", tuple(Fraction(i * 7 + 3, i + 2) for i in range(ell + 1)))
        for a, b in itertools.permutations(cf.SCHEMES, 2):
            x = cf.convert_coulomb_params(src, a)
            assert cf.convert_coulomb_params(cf.convert_coulomb_params(x, b), a).values == x.values
    with pytest.raises(InvalidInputError):
        cf.convert_coulomb_params(COUL, "e_lambda", b=[[1, 1, 1], [1, 1, 1], [0, 0, 1]])
    with pytest.raises(InvalidInputError):
        cf.CoulombParams(3, "racah_abc", (1, 2, 3, 4))


def test_subscript_normalization_consistency():
    # B = (9 F^2 - 5 F^4) / 441 only with F_2 = F^2 / 49, F_4 = F^4 / 441
    f2, f4 = Fraction(3), Fraction(11)
    b = cf.convert_coulomb_params(cf.CoulombParams(2, "slater_capital", (0, f2, f4)), "racah").values[1]
    assert b == (9 * f2 - 5 * f4) / 441


def test_laporte_platt():
    ok, res = cf.laporte_platt_check([1, 5, 9], 2)
    assert ok and all(v == 0 for v in res.values())
    racah = cf.convert_coulomb_params(cf.CoulombParams(2, "slater_capital", (1, 5, 9)), "racah")
    assert racah.values[1] == 0
    assert not cf.laporte_platt_check([1, 1, 9], 2)[0]
    assert cf.laporte_platt_check([0, 0, 0], 2)[0]


def test_diagonalize_levels(d1, d2):
    zero = cf.spinorbit_matrix(2, 1, 0.0, d1)
    levels = cf.diagonalize_levels(zero)
    assert len(levels) == 1 and levels[0].degeneracy == 10 and levels[0].energy == 0
    h = cf.coulomb_matrix(2, 2, COUL, d2)
    levels = cf.diagonalize_levels(h)
    got = sorted((round(lv.energy, 8), lv.degeneracy) for lv in levels)
    assert got == [(110.0, 21), (860.0, 9), (1060.0, 5), (1410.0, 9), (3660.0, 1)]
    assert abs(cf.barycenter(levels) - np.trace(h.full()).real / 45) < 1e-9


def test_diagonalize_rejects_non_hermitian(d1):
    m = cf.spinorbit_matrix(2, 1, 1.0, d1)
    key = next(k for k, (b, blk) in m.blocks.items() if blk.shape[0] > 1)
    blk = m.blocks[key][1].copy()
    blk[0, 1] += 1.0
    m.blocks[key] = (m.blocks[key][0], blk)
    with pytest.raises(Exception):
        cf.diagonalize_levels(m)


def test_parameter_file(tmp_path, d2):
    data = {"ell": 2, "N": 2, "group": "O", "coulomb": {"scheme": "racah", "values": [510, 50, 350]},
            "zeta": 300, "bkq": [{"k": 4, "q": q, "re": v.real, "im": 0.0} for (k, q), v in
                                 cf.cubic_bkq(500.0).items()]}
    path = tmp_path / "p.json"
    path.write_text(json.dumps(data))
    pset = cf.load_parameter_file(path)
    h = pset.total(d2)
    ref = oracle.determinant_matrix(2, 2, FK, 300.0, cf.cubic_bkq(500.0))
    assert np.allclose(np.sort(np.linalg.eigvalsh(h.full())), np.sort(np.linalg.eigvalsh(ref)))
    out = h.to_json()
    assert json.loads(json.dumps(out)) == out
    bad = tmp_path / "bad.json"
    bad.write_text("{\"ell\": 2}")
    with pytest.raises(InvalidInputError):
        cf.load_parameter_file(bad)


def _d2_adapted_states(basis):
    """Columns |(s s)S (l l)L; J a Gamma gamma) in the oracle product space."""
    h = HalfInt(1)
    cols = []
    for lab in basis:
        S, L, J = lab.term.S, lab.term.L, lab.J
        col = chain.reduce_representation(J, "O").column(lab.chain)
        v = np.zeros(100, dtype=complex)
        for iM, tM in enumerate(range(J.twice, -J.twice - 1, -2)):
            for tMS in range(-S.twice, S.twice + 1, 2):
                tML = tM - tMS
                if abs(tML) > L.twice:
                    continue
                c_j = wigner.cg(S, HalfInt(tMS), L, HalfInt(tML), J, HalfInt(tM)).to_float()
                for ms1, ms2 in itertools.product((1, -1), repeat=2):
                    c_s = wigner.cg(h, HalfInt(ms1), h, HalfInt(ms2), S, HalfInt(tMS)).to_float()
                    if not c_s:
                        continue
                    for ml1 in range(-2, 3):
                        ml2 = tML // 2 - ml1
                        if abs(ml2) > 2:
                            continue
                        c_l = wigner.cg(2, ml1, 2, ml2, L, HalfInt(tML)).to_float()
                        a = 2 * (2 - ml1) + (0 if ms1 > 0 else 1)
                        b = 2 * (2 - ml2) + (0 if ms2 > 0 else 1)
                        v[a * 10 + b] += col[iM] * c_j * c_s * c_l
        cols.append(v)
    return np.array(cols).T


def test_d2_matrix_elements_match_oracle(d2):
    p = _d2_adapted_states(d2)
    assert np.allclose(p.conj().T @ p, np.eye(45), atol=1e-12)
    bkq = cf.cubic_bkq(1500.0)
    one = oracle.one_electron_matrix(2, 300.0, bkq)
    full = np.kron(one, np.eye(10)) + np.kron(np.eye(10), one) + oracle.coulomb_two_body(2, FK)
    direct = p.conj().T @ full @ p
    ours = cf.coulomb_matrix(2, 2, COUL, d2) + cf.spinorbit_matrix(2, 2, 300.0, d2) + \
        cf.crystalfield_matrix(2, 2, cf.dk_from_bkq(2, bkq), d2)
    assert np.max(np.abs(direct - ours.full(d2))) < 1e-10 * np.max(np.abs(direct))
    cf_only = np.kron(oracle.one_electron_matrix(2, 0.0, bkq), np.eye(10))
    cf_only = p.conj().T @ (cf_only + np.kron(np.eye(10), oracle.one_electron_matrix(2, 0.0, bkq))) @ p
    idx = [i for i, lab in enumerate(d2) if str(lab.term) == "3F"]
    block = cf.crystalfield_matrix(2, 2, cf.dk_from_bkq(2, bkq), d2).full(d2)[np.ix_(idx, idx)]
    assert np.max(np.abs(block - cf_only[np.ix_(idx, idx)])) < 1e-10 * np.max(np.abs(block))
