import json

import pytest

from racahcf import HalfInt, InvalidInputError, UnsupportedError, groupdata as gd


def L(name, group="O"):
    return gd.IrrepLabel(group, name)


def test_octahedral_tables():
    o = gd.get_group("O")
    assert o.order == 24
    assert o.labels() == ["A1", "A2", "E", "T1", "T2"]
    assert sum(o.irrep(x).dim ** 2 for x in o.labels()) == 24
    ostar = gd.get_group("O*")
    assert ostar.order == 48
    assert sum(ostar.irrep(x).dim ** 2 for x in ostar.labels()) == 48


def test_kron_multiplicity():
    assert gd.kron_multiplicity(L("A2"), L("A2"), L("A1")) == 1
    for g in ("A1", "A2", "E", "T1", "T2"):
        for c in ("A1", "A2", "E", "T1", "T2"):
            assert gd.kron_multiplicity(L(g), L("A1"), L(c)) == int(g == c)


def test_a2_a2_e_has_no_invariant():
    # A2 x A2 = A1, and A1 x E does not contain A1
    assert gd.kron_multiplicity(L("A2"), L("A2"), L("E")) == 0


def test_branching():
    assert gd.branching_multiplicity(L("E"), 2) == 1
    assert gd.branching_multiplicity(L("T2"), 2) == 1
    assert gd.branching_multiplicity(L("A1"), 12) == 2
    assert gd.branching_multiplicity(L("A1"), 0) == 1
    for g in ("A2", "E", "T1", "T2"):
        assert gd.branching_multiplicity(L(g), 0) == 0


def test_decompose_spin_dimensions():
    for tj in range(0, 21):
        j = HalfInt(tj)
        group = "O" if tj % 2 == 0 else "O*"
        parts = gd.decompose_spin(j, group)
        assert sum(gd.dim(lab) * n for lab, n in parts) == tj + 1


def test_frobenius_schur():
    for g in ("A1", "A2", "E", "T1", "T2"):
        assert gd.frobenius_schur(L(g)) == 1
    assert gd.frobenius_schur(gd.irrep("SU(2)", "1/2")) == -1
    assert gd.frobenius_schur(gd.identity_irrep("C5")) == 1


def test_quasi_momentum():
    expected = {"A1": 0, "A2": 3, "E": 2, "T1": 1, "T2": 2}
    for g, j in expected.items():
        assert gd.quasi_momentum(L(g)) == HalfInt.of(j)
    assert gd.quasi_momentum(gd.irrep("U(1)", "-3/2")) == HalfInt(3)
    assert gd.quasi_momentum(gd.irrep("C3", "1")) == HalfInt(2)


def test_unknown_group():
    with pytest.raises(UnsupportedError):
        gd.get_group("Ih")


def test_load_group_table(tmp_path):
    data = {
        "name": "C2test",
        "order": 2,
        "classes": [{"size": 1, "angle": 0.0, "square_class_index": 0},
                    {"size": 1, "angle": 3.141592653589793, "square_class_index": 0}],
        "irreps": [{"label": "A", "dim": 1, "chars": [1, 1]}, {"label": "B", "dim": 1, "chars": [1, -1]}],
    }
    path = tmp_path / "c2.json"
    path.write_text(json.dumps(data))
    table = gd.load_group_table(path)
    assert gd.get_group("C2test") is table
    assert gd.branching_multiplicity(gd.IrrepLabel("C2test", "B"), 1) == 2


def test_malformed_table(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "X", "order": 3, "classes": [], "irreps": []}))
    with pytest.raises(InvalidInputError):
        gd.load_group_table(path)
