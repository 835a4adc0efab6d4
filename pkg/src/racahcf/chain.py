"""SU(2) > G symmetry adaptation.

A :class:`ReductionTable` is the unitary matrix U^j whose columns are the
vectors |j a Gamma gamma) written on the standard basis |j m), rows ordered
m = j, j-1, ..., -j.  Columns are ordered by irrep (group order), then
branching index a, then component gamma.

Tables for ``O`` with j <= 3 use the printed exact vectors (with the
imaginary unit, or with i replaced by 1 for ``variant="real"``); j = 3
only fixes A2 that way.  Every other O / O* table is generated by
projection operators built from fixed reference matrices D^Gamma(R), so
that a given irrep is carried by the same matrices in every j.  The
reference matrices come from the quasi-angular-momentum tables
(j = 0, 1, 2, 3 printed; j = 1/2 and 3/2 the identity; E5/2 from a
character projection inside j = 5/2).  Generated entries are snapped to
exact ``sign*sqrt(p/q)`` form when every entry of the table allows it.

For ``C<d>`` with d = 2j + 1 the table holds the eigenvectors |j alpha; r a)
of the operator v_ra (see :mod:`racahcf.mub`); for ``U(1)`` it is the
identity.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from . import groupdata, wigner
from .errors import ConsistencyError, InvalidInputError, UnsupportedError
from .exactnum import ExactComplex, HalfInt, SqrtRationalSum, snap_complex, twice

TABLE_TWICE_J_MAX = 60
VARIANTS = ("standard", "real")

COMPONENT_NAMES = {
    "A1": ("a1",),
    "A2": ("a2",),
    "E": ("theta", "epsilon"),
    "T1": ("x", "y", "z"),
    "T2": ("x", "y", "z"),
}


@dataclass(frozen=True, order=True)
class ChainLabel:
    """(a, Gamma, gamma): branching index, irrep name, component index."""

    a: int
    irrep: str
    gamma: int

    def __str__(self):
        return f"{self.a}{self.irrep}{self.gamma}"


class ReductionTable:
    """Coefficients (j m | j a Gamma gamma) for one (j, group)."""

    def __init__(self, j, group: str, labels, matrix, exact=None, variant: str = "standard"):
        self.j = HalfInt.of(j)
        self.group = group
        self.labels = tuple(labels)
        m = np.array(matrix, dtype=complex)
        n = self.j.twice + 1
        if m.shape != (n, len(self.labels)) or len(self.labels) != n:
            raise InvalidInputError("reduction table must be square of size 2j+1")
        m.setflags(write=False)
        self.matrix = m
        self.exact = exact
        self.variant = variant
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def index(self, label: ChainLabel) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InvalidInputError(f"label {label} not in the j={self.j} table of {self.group}") from None

    def has(self, label: ChainLabel) -> bool:
        return label in self._index

    def column(self, label: ChainLabel) -> np.ndarray:
        return self.matrix[:, self.index(label)]

    def exact_column(self, label: ChainLabel):
        if self.exact is None:
            return None
        i = self.index(label)
        return [row[i] for row in self.exact]

    def row_index(self, m) -> int:
        tm = twice(m)
        if abs(tm) > self.j.twice or (self.j.twice - tm) % 2:
            raise InvalidInputError(f"m = {HalfInt(tm)} invalid for j = {self.j}")
        return (self.j.twice - tm) // 2

    def coefficient(self, m, label: ChainLabel):
        r, c = self.row_index(m), self.index(label)
        if self.exact is not None:
            return self.exact[r][c]
        return complex(self.matrix[r, c])

    def irreps(self) -> list[tuple[str, int]]:
        """(irrep, multiplicity) in column order."""
        out: dict[str, int] = {}
        for lab in self.labels:
            out[lab.irrep] = max(out.get(lab.irrep, 0), lab.a + 1)
        return list(out.items())

    def blocks(self) -> list[tuple[int, str]]:
        """Distinct (a, Gamma) pairs in column order."""
        seen = []
        for lab in self.labels:
            key = (lab.a, lab.irrep)
            if key not in seen:
                seen.append(key)
        return seen

    def components(self, a: int, irrep: str) -> list[ChainLabel]:
        return [lab for lab in self.labels if lab.a == a and lab.irrep == irrep]

    def to_json(self) -> dict:
        entries = []
        for r in range(self.j.twice + 1):
            tm = self.j.twice - 2 * r
            for c, lab in enumerate(self.labels):
                z = self.matrix[r, c]
                if abs(z) < 1e-15:
                    continue
                entry = {"two_m": tm, "a": lab.a, "irrep": lab.irrep, "gamma": lab.gamma, "re": z.real, "im": z.imag}
                if self.exact is not None:
                    entry["exact"] = self.exact[r][c].to_json()
                entries.append(entry)
        return {"group": self.group, "two_j": self.j.twice, "variant": self.variant, "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> "ReductionTable":
        try:
            tj = int(data["two_j"])
            n = tj + 1
            labels = sorted(
                {ChainLabel(int(e["a"]), str(e["irrep"]), int(e["gamma"])) for e in data["entries"]},
                key=lambda lab: (_irrep_rank(data["group"], lab.irrep), lab.a, lab.gamma),
            )
            if len(labels) != n:
                raise InvalidInputError("table does not have 2j+1 columns")
            index = {lab: i for i, lab in enumerate(labels)}
            mat = np.zeros((n, n), dtype=complex)
            exact = [[ExactComplex(0) for _ in range(n)] for _ in range(n)] if all(
                "exact" in e for e in data["entries"]
            ) else None
            for e in data["entries"]:
                r = (tj - int(e["two_m"])) // 2
                c = index[ChainLabel(int(e["a"]), str(e["irrep"]), int(e["gamma"]))]
                mat[r, c] = complex(float(e["re"]), float(e["im"]))
                if exact is not None:
                    exact[r][c] = ExactComplex.from_json(e["exact"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed reduction table: {exc}") from exc
        table = cls(HalfInt(tj), str(data["group"]), labels, mat, exact, str(data.get("variant", "standard")))
        if np.max(np.abs(mat.conj().T @ mat - np.eye(n))) > 1e-10:
            raise InvalidInputError("reduction table is not unitary")
        return table


def _irrep_rank(group: str, name: str) -> int:
    try:
        return groupdata.get_group(group).labels().index(name)
    except (UnsupportedError, ValueError):
        return 0


# ---------------------------------------------------------------- SU(2) bits


@lru_cache(maxsize=None)
def _angular_momentum_matrices(tj: int):
    n = tj + 1
    tms = np.arange(tj, -tj - 1, -2)
    jz = np.diag(tms / 2).astype(complex)
    jp = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        tm = tms[i]
        jp[i - 1, i] = math.sqrt((tj - tm) * (tj + tm + 2)) / 2
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz


def rotation_vector(u: np.ndarray) -> np.ndarray:
    """theta * n for u = exp(-i theta n.sigma/2), theta in [0, 2 pi]."""
    c = u[0, 0].real
    s = np.array([-u[0, 1].imag, -u[0, 1].real, -u[0, 0].imag])
    half = math.atan2(np.linalg.norm(s), c)
    if np.linalg.norm(s) < 1e-14:
        return np.zeros(3) if c > 0 else np.array([0.0, 0.0, 2 * math.pi])
    return 2 * half * s / np.linalg.norm(s)


def wigner_d(tj: int, u: np.ndarray) -> np.ndarray:
    """D^j(u) on |j m), m descending, with D^(1/2)(u) = u."""
    w = rotation_vector(u)
    jx, jy, jz = _angular_momentum_matrices(tj)
    return expm(-1j * (w[0] * jx + w[1] * jy + w[2] * jz))


def su2(axis, angle: float) -> np.ndarray:
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * (n[0] * sx + n[1] * sy + n[2] * sz)


@lru_cache(maxsize=None)
def octahedral_elements() -> tuple[np.ndarray, ...]:
    """The 48 SU(2) elements of O*, generated by C4(z) and C3(1,1,1)."""
    gens = [su2((0, 0, 1), math.pi / 2), su2((1, 1, 1), 2 * math.pi / 3)]
    key = lambda m: tuple(np.round(np.concatenate([m.real.ravel(), m.imag.ravel()]), 8) + 0.0)
    elems = [np.eye(2, dtype=complex)]
    seen = {key(elems[0])}
    frontier = list(elems)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = g @ a
                k = key(b)
                if k not in seen:
                    seen.add(k)
                    elems.append(b)
                    nxt.append(b)
        frontier = nxt
    if len(elems) != 48:
        raise ConsistencyError(f"O* closure produced {len(elems)} elements")
    for e in elems:
        e.setflags(write=False)
    return tuple(elems)


@lru_cache(maxsize=None)
def _dmats(tj: int) -> np.ndarray:
    arr = np.array([wigner_d(tj, u) for u in octahedral_elements()])
    arr.setflags(write=False)
    return arr


# ------------------------------------------------------------ printed tables

_S2 = SqrtRationalSum.sqrt(Fraction(1, 2))


def _vec(tj: int, comps: dict[int, ExactComplex]) -> list[ExactComplex]:
    out = [ExactComplex(0)] * (tj + 1)
    for tm, v in comps.items():
        out[(tj - tm) // 2] = v
    return out


def _printed_vectors(variant: str) -> dict[int, dict[str, list[list[ExactComplex]]]]:
    """Exact O vectors keyed by 2j then irrep; each irrep a list of components."""
    i = ExactComplex(0, 1) if variant == "standard" else ExactComplex(1)
    one = ExactComplex(1)
    h = ExactComplex(_S2)
    return {
        0: {"A1": [_vec(0, {0: one})]},
        2: {
            "T1": [
                _vec(2, {2: -i * h, -2: i * h}),
                _vec(2, {2: h, -2: h}),
                _vec(2, {0: i}),
            ]
        },
        4: {
            "E": [_vec(4, {0: one}), _vec(4, {4: h, -4: h})],
            "T2": [
                _vec(4, {2: i * h, -2: i * h}),
                _vec(4, {2: h, -2: -h}),
                _vec(4, {4: -i * h, -4: i * h}),
            ],
        },
        6: {"A2": [_vec(6, {4: h, -4: -h})]},
    }


def _to_array(cols: list[list[ExactComplex]]) -> np.ndarray:
    return np.array([[complex(v) for v in col] for col in cols]).T


@lru_cache(maxsize=None)
def _reference_matrices(variant: str) -> dict[str, np.ndarray]:
    """D^Gamma(R) over the 48 elements of O* for every irrep."""
    printed = _printed_vectors(variant)
    refs: dict[str, np.ndarray] = {}
    for tj, block in printed.items():
        d = _dmats(tj)
        for name, cols in block.items():
            u = _to_array(cols)
            refs[name] = np.einsum("mi,rmn,nk->rik", u.conj(), d, u)
    refs["E1/2"] = _dmats(1).copy()
    refs["G3/2"] = _dmats(3).copy()
    # E5/2 = E1/2 x A2: project j = 5/2 with its character
    chi = np.trace(refs["E1/2"], axis1=1, axis2=2) * refs["A2"][:, 0, 0]
    d5 = _dmats(5)
    proj = 2 / 48 * np.einsum("r,rmn->mn", chi.conj(), d5)
    basis = _gram_schmidt_image(proj, 2)
    refs["E5/2"] = np.einsum("mi,rmn,nk->rik", basis.conj(), d5, basis)
    for v in refs.values():
        v.setflags(write=False)
    return refs


def _phase_fix(v: np.ndarray) -> np.ndarray:
    for x in v:
        if abs(x) > 1e-8:
            return v * (abs(x) / x)
    return v


def _gram_schmidt_image(proj: np.ndarray, rank: int) -> np.ndarray:
    """Orthonormal basis of the image of a projector, seeded by e_0, e_1, ..."""
    kept: list[np.ndarray] = []
    for i in range(proj.shape[0]):
        v = proj[:, i].copy()
        for k in kept:
            v -= (k.conj() @ v) * k
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            kept.append(_phase_fix(v / nv))
        if len(kept) == rank:
            break
    if len(kept) != rank:
        raise ConsistencyError("projection image has unexpected rank")
    return np.array(kept).T


def _generate_o(tj: int, variant: str, group_name: str) -> ReductionTable:
    refs = _reference_matrices(variant)
    d = _dmats(tj)
    printed = _printed_vectors(variant).get(tj, {})
    table = groupdata.get_group("O*" if tj % 2 else "O")
    cols: list[np.ndarray] = []
    labels: list[ChainLabel] = []
    exact_cols: dict[int, list[ExactComplex]] = {}
    for name in table.labels():
        sigma = groupdata.branching_multiplicity(groupdata.IrrepLabel(table.name, name), HalfInt(tj))
        if not sigma:
            continue
        if name in printed:
            for g, col in enumerate(printed[name]):
                exact_cols[len(cols)] = col
                cols.append(np.array([complex(v) for v in col]))
                labels.append(ChainLabel(0, name, g))
            continue
        ref = refs[name]
        dim = ref.shape[1]
        p00 = dim / 48 * np.einsum("r,rmn->mn", ref[:, 0, 0].conj(), d)
        seeds = _gram_schmidt_image(p00, sigma)
        for a in range(sigma):
            u0 = seeds[:, a]
            for g in range(dim):
                pg0 = dim / 48 * np.einsum("r,rmn->mn", ref[:, g, 0].conj(), d)
                cols.append(pg0 @ u0)
                labels.append(ChainLabel(a, name, g))
    mat = np.array(cols).T
    if np.max(np.abs(mat.conj().T @ mat - np.eye(tj + 1))) > 1e-10:
        raise ConsistencyError(f"generated table for j={HalfInt(tj)} is not unitary")
    exact = _snap_table(mat, exact_cols)
    if exact is not None:
        mat = np.array([[complex(v) for v in row] for row in exact])
    return ReductionTable(HalfInt(tj), group_name, labels, mat, exact, variant)


def _snap_table(mat: np.ndarray, known: dict[int, list[ExactComplex]]):
    n = mat.shape[0]
    out = [[None] * n for _ in range(n)]
    for c in range(n):
        if c in known:
            for r in range(n):
                out[r][c] = known[c][r]
            continue
        for r in range(n):
            z = snap_complex(complex(mat[r, c]))
            if z is None or abs(complex(z) - mat[r, c]) > 1e-9:
                return None
            out[r][c] = z
    return out


def _cyclic_table(tj: int, d: int, r: float, a: int) -> ReductionTable:
    if d != tj + 1:
        raise UnsupportedError(f"C{d} tables exist only for j = {Fraction(d - 1, 2)}")
    n = tj + 1
    mat = np.zeros((n, n), dtype=complex)
    for row in range(n):
        tm = tj - 2 * row
        k = (tj + tm) // 2  # j + m
        for alpha in range(n):
            expo = k * (n - k) * a / 2 - (tj * tm / 4) * r + k * alpha
            mat[row, alpha] = np.exp(2j * math.pi * expo / n) / math.sqrt(n)
    labels = [ChainLabel(0, str(alpha), 0) for alpha in range(n)]
    return ReductionTable(HalfInt(tj), f"C{d}", labels, mat, None, f"r={r!r},a={a}")


def _u1_table(tj: int) -> ReductionTable:
    n = tj + 1
    labels = [ChainLabel(0, str(HalfInt(tj - 2 * i)), 0) for i in range(n)]
    exact = [[ExactComplex(1 if r == c else 0) for c in range(n)] for r in range(n)]
    return ReductionTable(HalfInt(tj), "U(1)", labels, np.eye(n), exact)


_tables: dict = {}
_tables_lock = threading.Lock()


def register_table(table: ReductionTable) -> None:
    """Make a custom (for example JSON-loaded) table available to the chain functions."""
    with _tables_lock:
        _tables[(table.group, table.j.twice, table.variant, None)] = table


def reduce_representation(j, group: str, *, variant: str = "standard", r: float = 0.0, a: int = 0) -> ReductionTable:
    """Unitary table U^j adapting |j m) to ``group``.

    ``variant`` selects the printed O vectors as they are ("standard") or
    with i -> 1 ("real"); ``r`` and ``a`` parametrize the C_d tables.
    For ``O`` and half-integer j the table is that of ``O*``.
    """
    tj = twice(j)
    if tj < 0:
        raise InvalidInputError("negative angular momentum")
    if tj > TABLE_TWICE_J_MAX:
        raise InvalidInputError(f"tables are generated only up to j = {TABLE_TWICE_J_MAX // 2}")
    if variant not in VARIANTS and not group.startswith("C"):
        raise InvalidInputError(f"unknown variant {variant!r}")
    extra = (float(r), int(a)) if group.startswith("C") else None
    key = (group, tj, variant, extra)
    hit = _tables.get(key) or _tables.get((group, tj, variant, None))
    if hit is not None:
        return hit
    if group in ("O", "O*"):
        name = "O*" if (group == "O*" or tj % 2) else "O"
        table = _generate_o(tj, variant, name)
    elif group == "U(1)":
        table = _u1_table(tj)
    elif group.startswith("C") and group[1:].isdigit():
        if not 0 <= int(a) < int(group[1:]):
            raise InvalidInputError("a must satisfy 0 <= a < d")
        table = _cyclic_table(tj, int(group[1:]), float(r), int(a))
    else:
        groupdata.get_group(group)  # raises for unknown names
        raise UnsupportedError(f"no reduction-table generator for group {group!r}; register one")
    with _tables_lock:
        _tables.setdefault(key, table)
    return _tables[key]


def adapt_components(coeffs, table: ReductionTable) -> np.ndarray:
    """Components on |j a Gamma gamma) of a vector given on |j m)."""
    v = np.asarray(coeffs, dtype=complex)
    if v.shape != (table.j.twice + 1,):
        raise InvalidInputError("coefficient vector must have length 2j+1")
    return table.matrix.conj().T @ v


# ------------------------------------------------------------ coupling sums


@lru_cache(maxsize=None)
def _cg_array(t1: int, t2: int, t: int) -> np.ndarray:
    out = np.zeros((t1 + 1, t2 + 1, t + 1))
    if wigner.triangle(t1, t2, t):
        for i1 in range(t1 + 1):
            for i2 in range(t2 + 1):
                um = (t1 - 2 * i1) + (t2 - 2 * i2)
                if abs(um) <= t:
                    out[i1, i2, (t - um) // 2] = wigner._cg2(t1, t1 - 2 * i1, t2, t2 - 2 * i2, t, um).to_float()
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _f_tensor(t1: int, tk: int, t2: int) -> np.ndarray:
    """T[i1, iq, i2] = (-1)^(j1-m1) (j1 k j2; -m1 q m2)."""
    base = wigner.threejm_array(t1, tk, t2)[::-1, :, :]
    sign = np.array([(-1) ** i for i in range(t1 + 1)], dtype=float)
    out = sign[:, None, None] * base
    out.setflags(write=False)
    return out


def _group_tables(group, variant, *js):
    return [reduce_representation(j, group, variant=variant) for j in js]


def _exact_ok(*tables) -> bool:
    return all(t.is_exact for t in tables)


def _ec_conj(col):
    return [v.conjugate() for v in col]


def adapted_cgc(j1, c1: ChainLabel, j2, c2: ChainLabel, j, c: ChainLabel, group: str, *,
                variant: str = "standard", exact: bool = False):
    """(j1 j2 c1 c2 | j c) = sum (j1m1|c1)* (j2m2|c2)* <j1m1 j2m2|jm> (jm|c)."""
    u1, u2, u = _group_tables(group, variant, j1, j2, j)
    if exact and _exact_ok(u1, u2, u):
        a1, a2, a = _ec_conj(u1.exact_column(c1)), _ec_conj(u2.exact_column(c2)), u.exact_column(c)
        t1, t2, t = u1.j.twice, u2.j.twice, u.j.twice
        total = ExactComplex(0)
        for i1, x1 in enumerate(a1):
            if x1.is_zero():
                continue
            for i2, x2 in enumerate(a2):
                if x2.is_zero():
                    continue
                um = (t1 - 2 * i1) + (t2 - 2 * i2)
                if abs(um) > t:
                    continue
                cgv = wigner._cg2(t1, t1 - 2 * i1, t2, t2 - 2 * i2, t, um)
                if cgv.is_zero():
                    continue
                total = total + x1 * x2 * a[(t - um) // 2] * cgv
        return total
    arr = _cg_array(u1.j.twice, u2.j.twice, u.j.twice)
    return complex(np.einsum("a,b,abc,c->", u1.column(c1).conj(), u2.column(c2).conj(), arr, u.column(c)))


def f_symbol(j1, j2, k, c1: ChainLabel, c2: ChainLabel, c: ChainLabel, group: str, *,
             variant: str = "standard", exact: bool = False):
    """f(j1 j2 k; c1 c2 c) = sum (j1m1|c1)* (kq|c) (j2m2|c2) (-1)^(j1-m1) (j1 k j2; -m1 q m2)."""
    u1, u2, uk = _group_tables(group, variant, j1, j2, k)
    t1, t2, tk = u1.j.twice, u2.j.twice, uk.j.twice
    if exact and _exact_ok(u1, u2, uk):
        a1, a2, ak = _ec_conj(u1.exact_column(c1)), u2.exact_column(c2), uk.exact_column(c)
        total = ExactComplex(0)
        for i1, x1 in enumerate(a1):
            if x1.is_zero():
                continue
            tm1 = t1 - 2 * i1
            for i2, x2 in enumerate(a2):
                if x2.is_zero():
                    continue
                tm2 = t2 - 2 * i2
                tq = tm1 - tm2
                if abs(tq) > tk:
                    continue
                xk = ak[(tk - tq) // 2]
                if xk.is_zero():
                    continue
                w = wigner._threejm2(t1, -tm1, tk, tq, t2, tm2)
                if w.is_zero():
                    continue
                if ((t1 - tm1) // 2) % 2:
                    w = -w
                total = total + x1 * x2 * xk * w
        return total
    return complex(np.einsum("a,aqb,q,b->", u1.column(c1).conj(), _f_tensor(t1, tk, t2), uk.column(c), u2.column(c2)))


def f_symbol_via_cgc(j1, j2, k, c1, c2, c, group: str, *, variant: str = "standard", exact: bool = False):
    """Second route: (-1)^(2k) (2j1+1)^(-1/2) (j2 k c2 c | j1 c1)*."""
    tk, t1 = twice(k), twice(j1)
    val = adapted_cgc(j2, c2, k, c, j1, c1, group, variant=variant, exact=exact)
    if isinstance(val, ExactComplex):
        out = val.conjugate() * SqrtRationalSum.sqrt(Fraction(1, t1 + 1))
        return -out if tk % 2 else out
    return (-1) ** tk * val.conjugate() / math.sqrt(t1 + 1)


def one_jagamma(j, c1: ChainLabel, c2: ChainLabel, group: str, *, variant: str = "standard", exact: bool = False):
    """sum_{m m'} (jm|c1)* (-1)^(j+m) delta(m',-m) (jm'|c2)*."""
    (u,) = _group_tables(group, variant, j)
    tj = u.j.twice
    if exact and u.is_exact:
        a1, a2 = _ec_conj(u.exact_column(c1)), _ec_conj(u.exact_column(c2))
        total = ExactComplex(0)
        for i in range(tj + 1):
            tm = tj - 2 * i
            term = a1[i] * a2[tj - i]
            total = total - term if ((tj + tm) // 2) % 2 else total + term
        return total
    sign = np.array([(-1) ** ((tj + tj - 2 * i) // 2) for i in range(tj + 1)], dtype=float)
    return complex(np.sum(u.column(c1).conj() * sign * u.column(c2).conj()[::-1]))


def fbar_symbol(j1, j2, j3, c1: ChainLabel, c2: ChainLabel, c3: ChainLabel, group: str, *,
                variant: str = "standard", exact: bool = False):
    """sum (j1 j2 j3; m1 m2 m3) prod (j_i m_i | c_i)*."""
    u1, u2, u3 = _group_tables(group, variant, j1, j2, j3)
    t1, t2, t3 = u1.j.twice, u2.j.twice, u3.j.twice
    if exact and _exact_ok(u1, u2, u3):
        a1, a2, a3 = (_ec_conj(t.exact_column(c)) for t, c in ((u1, c1), (u2, c2), (u3, c3)))
        total = ExactComplex(0)
        for i1, x1 in enumerate(a1):
            if x1.is_zero():
                continue
            for i2, x2 in enumerate(a2):
                if x2.is_zero():
                    continue
                tm3 = -(t1 - 2 * i1) - (t2 - 2 * i2)
                if abs(tm3) > t3:
                    continue
                x3 = a3[(t3 - tm3) // 2]
                if x3.is_zero():
                    continue
                w = wigner._threejm2(t1, t1 - 2 * i1, t2, t2 - 2 * i2, t3, tm3)
                if not w.is_zero():
                    total = total + x1 * x2 * x3 * w
        return total
    arr = wigner.threejm_array(t1, t2, t3)
    return complex(np.einsum("abc,a,b,c->", arr, u1.column(c1).conj(), u2.column(c2).conj(), u3.column(c3).conj()))


def fbar_block(j1, j2, j3, block1, block2, block3, group: str, *, variant: str = "standard") -> np.ndarray:
    """All f-bar values of one (a Gamma) x3 block, indexed by components."""
    u1, u2, u3 = _group_tables(group, variant, j1, j2, j3)
    cols = [
        t.matrix[:, [t.index(lab) for lab in t.components(*blk)]].conj()
        for t, blk in ((u1, block1), (u2, block2), (u3, block3))
    ]
    arr = wigner.threejm_array(u1.j.twice, u2.j.twice, u3.j.twice)
    return np.einsum("abc,ai,bk,cl->ikl", arr, *cols)


# ---------------------------------------------------------------- V symbols


class VPhaseConvention:
    """Phase x(Gamma1 Gamma2 Gamma3), symmetric in its arguments (default 1)."""

    def __init__(self, phases: dict | None = None, name: str = "custom"):
        self.name = name
        self._phases = {}
        for key, val in (phases or {}).items():
            if abs(abs(complex(val)) - 1) > 1e-12:
                raise InvalidInputError("phases must have modulus 1")
            self._phases[tuple(sorted(key))] = complex(val)

    def __call__(self, g1: str, g2: str, g3: str) -> complex:
        return self._phases.get(tuple(sorted((g1, g2, g3))), 1.0 + 0j)

    def items(self):
        return dict(self._phases)


DEFAULT_PHASES = VPhaseConvention({}, "default")
GRIFFITH_PHASES = VPhaseConvention(
    {("E", "T2", "T2"): -1, ("T1", "T1", "T1"): -1, ("T1", "T1", "T2"): -1, ("T2", "T2", "T2"): -1},
    "griffith",
)
PHASE_PRESETS = {"default": DEFAULT_PHASES, "griffith": GRIFFITH_PHASES}


def _triple_multiplicity(group: str, g1: str, g2: str, g3: str) -> int:
    gtab = groupdata.get_group(group)
    sizes = np.array([c.size for c in gtab.classes], dtype=float)
    prod = np.array(gtab.irrep(g1).chars) * np.array(gtab.irrep(g2).chars) * np.array(gtab.irrep(g3).chars)
    val = np.sum(sizes * prod) / gtab.order
    return int(round(val.real))


def _symbol_group(g1, g2, g3, group):
    spinor = any("/" in g for g in (g1, g2, g3))
    return "O*" if (group in ("O", "O*") and spinor) or group == "O*" else group


@lru_cache(maxsize=None)
def _fbar_hat(group: str, g1: str, g2: str, g3: str, variant: str):
    jh = [groupdata.quasi_momentum(groupdata.IrrepLabel(group, g)) for g in (g1, g2, g3)]
    block = fbar_block(jh[0], jh[1], jh[2], (0, g1), (0, g2), (0, g3), group, variant=variant)
    block.setflags(write=False)
    return jh, block


def v_block(g1: str, g2: str, g3: str, phases: VPhaseConvention = DEFAULT_PHASES, *, group: str = "O",
            variant: str = "standard") -> np.ndarray:
    """V(g1 g2 g3; gamma1 gamma2 gamma3) for all components."""
    group = _symbol_group(g1, g2, g3, group)
    mult = _triple_multiplicity(group, g1, g2, g3)
    dims = [groupdata.get_group(group).irrep(g).dim for g in (g1, g2, g3)]
    if mult == 0:
        return np.zeros(dims, dtype=complex)
    if mult > 1:
        raise UnsupportedError(f"triple ({g1}, {g2}, {g3}) is not multiplicity-free")
    _, fb = _fbar_hat(group, g1, g2, g3, variant)
    norm = math.sqrt(float(np.sum(np.abs(fb) ** 2)))
    if norm < 1e-12:
        raise ConsistencyError(f"f-bar vanishes at the quasi momenta of ({g1}, {g2}, {g3})")
    return phases(g1, g2, g3) * fb / norm


def v_symbol(g1, g2, g3, gamma1: int, gamma2: int, gamma3: int, phases: VPhaseConvention = DEFAULT_PHASES, *,
             group: str = "O", variant: str = "standard") -> complex:
    """Finite-group 3-Gamma symbol as a renormalized f-bar at the quasi momenta."""
    g1, g2, g3 = (str(g) for g in (g1, g2, g3))
    blk = v_block(g1, g2, g3, phases, group=group, variant=variant)
    try:
        return complex(blk[gamma1, gamma2, gamma3])
    except IndexError:
        raise InvalidInputError("component index out of range") from None


def shortcut_position(g1: str, g2: str, g3: str, group: str = "O") -> int | None:
    """Index k such that the other two quasi-momentum representations are
    irreducible (so the closed normalization applies), else None."""
    group = _symbol_group(g1, g2, g3, group)
    names = (g1, g2, g3)
    irred = []
    for g in names:
        jh = groupdata.quasi_momentum(groupdata.IrrepLabel(group, g))
        irred.append(jh.twice + 1 == groupdata.get_group(group).irrep(g).dim)
    for k in range(3):
        if all(irred[i] for i in range(3) if i != k):
            return k
    return None


def v_symbol_shortcut(g1, g2, g3, gamma1, gamma2, gamma3, phases: VPhaseConvention = DEFAULT_PHASES, *,
                      group: str = "O", variant: str = "standard") -> complex:
    """x [Gamma_k]^(-1/2) (2 jhat_k + 1)^(1/2) f-bar, valid when the other two
    quasi-momentum representations are irreducible."""
    g1, g2, g3 = (str(g) for g in (g1, g2, g3))
    group = _symbol_group(g1, g2, g3, group)
    k = shortcut_position(g1, g2, g3, group)
    if k is None:
        raise InvalidInputError("shortcut needs two irreducible quasi-momentum representations")
    names = (g1, g2, g3)
    jh = [groupdata.quasi_momentum(groupdata.IrrepLabel(group, g)) for g in names]
    dk = groupdata.get_group(group).irrep(names[k]).dim
    fb = fbar_symbol(
        jh[0], jh[1], jh[2],
        ChainLabel(0, g1, gamma1), ChainLabel(0, g2, gamma2), ChainLabel(0, g3, gamma3),
        group, variant=variant,
    )
    return phases(g1, g2, g3) * math.sqrt((jh[k].twice + 1) / dk) * fb


def multiplicity_free_triples(group: str = "O") -> list[tuple[str, str, str]]:
    """Unordered irrep triples (group order) whose product contains the identity once."""
    labels = groupdata.get_group(group).labels()
    out = []
    for a, b, c in itertools.combinations_with_replacement(labels, 3):
        if _triple_multiplicity(group, a, b, c) == 1:
            out.append((a, b, c))
    return out


def v_table_rows(group: str = "O", phases: VPhaseConvention = DEFAULT_PHASES, variant: str = "standard"):
    """(g1, g2, g3, gamma1, gamma2, gamma3, value) over all unordered
    multiplicity-free triples and all components."""
    rows = []
    for g1, g2, g3 in multiplicity_free_triples(group):
        blk = v_block(g1, g2, g3, phases, group=group, variant=variant)
        for idx in itertools.product(*(range(n) for n in blk.shape)):
            rows.append((g1, g2, g3, *idx, complex(blk[idx])))
    return rows


# ----------------------------------------------------------- Racah lemma


@dataclass
class Factorization:
    reduced: dict
    residual: float
    skipped: list


def racah_factorize(j1, j2, j3, group: str = "O", *, phases: VPhaseConvention = DEFAULT_PHASES,
                    variant: str = "standard", tol: float = 1e-10) -> Factorization:
    """Write every f-bar block as reduced coefficient times V.

    Returns reduced coefficients keyed by ((a1, G1), (a2, G2), (a3, G3)),
    the largest back-substitution residual, and the blocks skipped because
    their triple is not multiplicity-free.
    """
    u1, u2, u3 = _group_tables(group, variant, j1, j2, j3)
    reduced = {}
    skipped = []
    worst = 0.0
    gname = u1.group if u1.group == u2.group == u3.group else "O*"
    for b1 in u1.blocks():
        for b2 in u2.blocks():
            for b3 in u3.blocks():
                fb = fbar_block(j1, j2, j3, b1, b2, b3, group, variant=variant)
                mult = _triple_multiplicity(gname if gname in ("O", "O*") else group, b1[1], b2[1], b3[1])
                if mult == 0:
                    res = float(np.max(np.abs(fb))) if fb.size else 0.0
                    if res > tol:
                        raise ConsistencyError(f"selection rule violated in block {b1, b2, b3}")
                    reduced[(b1, b2, b3)] = 0j
                    worst = max(worst, res)
                    continue
                if mult > 1:
                    skipped.append((b1, b2, b3))
                    continue
                v = v_block(b1[1], b2[1], b3[1], phases, group=group, variant=variant)
                coeff = complex(np.vdot(v, fb) / np.vdot(v, v))
                res = float(np.max(np.abs(fb - coeff * v)))
                if res > tol:
                    raise ConsistencyError(f"block {b1, b2, b3} does not factorize (residual {res:.3g})")
                reduced[(b1, b2, b3)] = coeff
                worst = max(worst, res)
    return Factorization(reduced, worst, skipped)


def snap(value):
    """Exact form of a float-complex chain value when recognisable, else the value."""
    if isinstance(value, ExactComplex):
        return value
    z = snap_complex(complex(value))
    return value if z is None else z


def independent_v_entries(group: str = "O", phases: VPhaseConvention = DEFAULT_PHASES, variant: str = "standard",
                          tol: float = 1e-12):
    """Nonzero V values, one per orbit of column permutations that keep the
    irrep triple fixed."""
    out = {}
    for row in v_table_rows(group, phases, variant):
        g, c, val = row[:3], row[3:6], row[6]
        if abs(val) < tol:
            continue
        keys = [tuple(c[i] for i in p) for p in itertools.permutations(range(3)) if tuple(g[i] for i in p) == g]
        out.setdefault((g, min(keys)), val)
    return out
