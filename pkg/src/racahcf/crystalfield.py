"""Symmetry-adapted weak-field model for l^N (N <= 2) in a point group.

Basis vectors are |l^N S L J a Gamma gamma), with S coupled before L.
Matrices are block diagonal in (Gamma, gamma) by construction: only pairs
of basis vectors sharing both labels are ever evaluated, so entries between
different blocks are exact zeros.

Parameters
----------
Coulomb integrals travel as :class:`CoulombParams` in any of the schemes
``slater_capital`` (F^k), ``slater_sub`` (F_k, l = 2, 3), ``racah``
(A, B, C for d; E^0..E^3 for f) and ``e_lambda``.  Crystal-field input is
either B^k_q (Wybourne) or the adapted D[k a0].

Every builder takes ``exact=True`` to return :class:`ExactComplex` entries
when all inputs are exact and the needed reduction tables are exact.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np

from . import chain, groupdata, wigner
from .chain import ChainLabel
from .errors import ConsistencyError, InvalidInputError, UnsupportedError
from .exactnum import ExactComplex, HalfInt, SqrtRationalSum

_LETTERS = "SPDFGHIKLMNOQRTUVWXYZ"
_HALF = HalfInt(1)


def config_dimension(ell: int, n: int) -> int:
    if ell < 0:
        raise InvalidInputError("l must be non-negative")
    if not 0 <= n <= 4 * ell + 2:
        raise InvalidInputError(f"N must lie in 0..{4 * ell + 2}")
    return math.comb(4 * ell + 2, n)


@dataclass(frozen=True, order=True)
class TermLabel:
    alpha: int
    S: HalfInt
    L: HalfInt

    def __str__(self):
        return f"{self.S.twice + 1}{_LETTERS[int(self.L)]}"


@dataclass(frozen=True, order=True)
class LevelLabel:
    term: TermLabel
    J: HalfInt
    chain: ChainLabel

    def __str__(self):
        return f"{self.term}{self.J} {self.chain.a}{self.chain.irrep}:{self.chain.gamma}"


def terms(ell: int, n: int) -> list[TermLabel]:
    """LS terms of l^N for N <= 2, ordered by S then L."""
    if n < 0 or n > 4 * ell + 2:
        raise InvalidInputError("N out of range")
    if n > 2:
        raise UnsupportedError("configurations with N > 2 need fractional parentage")
    if n == 0:
        return [TermLabel(0, HalfInt(0), HalfInt(0))]
    if n == 1:
        return [TermLabel(0, HalfInt(1), HalfInt(2 * ell))]
    out = [TermLabel(0, HalfInt(0), HalfInt(2 * L)) for L in range(0, 2 * ell + 1, 2)]
    out += [TermLabel(0, HalfInt(2), HalfInt(2 * L)) for L in range(1, 2 * ell, 2)]
    return out


def enumerate_basis(ell: int, n: int, group: str = "O", *, variant: str = "standard") -> list[LevelLabel]:
    out = []
    for t in terms(ell, n):
        for tj in range(abs(t.S.twice - t.L.twice), t.S.twice + t.L.twice + 1, 2):
            table = chain.reduce_representation(HalfInt(tj), group, variant=variant)
            out.extend(LevelLabel(t, HalfInt(tj), lab) for lab in table.labels)
    if len(out) != config_dimension(ell, n):
        raise ConsistencyError("basis size differs from the configuration dimension")
    return out


# ----------------------------------------------------------------- matrices


class EnergyMatrix:
    """Hermitian energy matrix stored as (Gamma, gamma) blocks."""

    def __init__(self, blocks: dict, group: str):
        self.blocks = dict(blocks)
        self.group = group

    @property
    def exact(self) -> bool:
        return any(m.dtype == object for _, m in self.blocks.values())

    def keys(self):
        return list(self.blocks)

    def basis(self) -> list[LevelLabel]:
        return [lab for labels, _ in self.blocks.values() for lab in labels]

    def full(self, basis: list[LevelLabel] | None = None) -> np.ndarray:
        basis = self.basis() if basis is None else basis
        pos = {lab: i for i, lab in enumerate(basis)}
        out = np.zeros((len(basis), len(basis)), dtype=complex)
        for labels, m in self.blocks.values():
            idx = [pos[lab] for lab in labels]
            out[np.ix_(idx, idx)] = _to_complex(m)
        return out

    def numeric(self) -> "EnergyMatrix":
        return EnergyMatrix({k: (b, _to_complex(m)) for k, (b, m) in self.blocks.items()}, self.group)

    def _combine(self, other, op):
        if self.blocks.keys() != other.blocks.keys():
            raise InvalidInputError("energy matrices have different block structure")
        out = {}
        for key, (labels, m) in self.blocks.items():
            olabels, om = other.blocks[key]
            if labels != olabels:
                raise InvalidInputError("energy matrices have different bases")
            if m.dtype == object or om.dtype == object:
                if m.dtype != om.dtype:
                    m, om = _to_complex(m), _to_complex(om)
            out[key] = (labels, op(m, om))
        return EnergyMatrix(out, self.group)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def scaled(self, factor) -> "EnergyMatrix":
        return EnergyMatrix({k: (b, m * factor) for k, (b, m) in self.blocks.items()}, self.group)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        for _, m in self.blocks.values():
            c = _to_complex(m)
            if c.size and np.max(np.abs(c - c.conj().T)) > tol * max(1.0, np.max(np.abs(c))):
                return False
        return True

    def trace(self):
        total = 0
        for _, m in self.blocks.values():
            for i in range(m.shape[0]):
                total = total + m[i, i]
        return total

    def to_json(self) -> dict:
        blocks = []
        for (irrep, gamma), (labels, m) in self.blocks.items():
            c = _to_complex(m)
            blocks.append({
                "irrep": irrep,
                "gamma": gamma,
                "basis": [str(lab) for lab in labels],
                "entries": [[[float(z.real), float(z.imag)] for z in row] for row in c],
            })
        return {"group": self.group, "blocks": blocks}


def _to_complex(m: np.ndarray) -> np.ndarray:
    if m.dtype != object:
        return m
    return np.array([[complex(x) for x in row] for row in m], dtype=complex).reshape(m.shape)


def _block_order(group: str, key):
    try:
        labels = groupdata.get_group(group).labels()
        rank = labels.index(key[0])
    except (UnsupportedError, ValueError):
        rank = 0
    return (rank, key[0], key[1])


def _assemble(basis: list[LevelLabel], element, exact: bool, group: str) -> EnergyMatrix:
    grouped: dict = {}
    for lab in basis:
        grouped.setdefault((lab.chain.irrep, lab.chain.gamma), []).append(lab)
    blocks = {}
    for key in sorted(grouped, key=lambda k: _block_order(group, k)):
        labels = grouped[key]
        n = len(labels)
        if exact:
            m = np.empty((n, n), dtype=object)
            for i, j in itertools.product(range(n), repeat=2):
                m[i, j] = ExactComplex.coerce(element(labels[i], labels[j]))
        else:
            m = np.zeros((n, n), dtype=complex)
            for i, j in itertools.product(range(n), repeat=2):
                m[i, j] = complex(element(labels[i], labels[j]))
        blocks[key] = (labels, m)
    return EnergyMatrix(blocks, group)


def _sqrt(q) -> SqrtRationalSum:
    return SqrtRationalSum.sqrt(Fraction(q))


def _neg_if(x, odd: bool):
    return -x if odd else x


def _value(x, exact: bool):
    """Parameter value as ExactComplex (exact) or complex."""
    if exact:
        if isinstance(x, (ExactComplex, SqrtRationalSum)):
            return ExactComplex.coerce(x)
        if isinstance(x, (int, Rational)):
            return ExactComplex(Fraction(x))
        raise InvalidInputError(f"exact evaluation needs exact parameters, got {x!r}")
    return complex(x)


def _structural(x: SqrtRationalSum, exact: bool):
    return ExactComplex(x) if exact else x.to_float()


# ------------------------------------------------------------ parameters


_SUB_NORMS = {
    2: {0: Fraction(1), 2: Fraction(49), 4: Fraction(441)},
    3: {0: Fraction(1), 2: Fraction(225), 4: Fraction(1089), 6: Fraction(184081, 25)},
}
_SCHEME_ALIASES = {"slater": "slater_sub", "racah_abc": "racah", "racah_e": "racah"}
SCHEMES = ("slater_capital", "slater_sub", "racah", "e_lambda")


def scheme_names(scheme: str, ell: int) -> list[str]:
    scheme = _SCHEME_ALIASES.get(scheme, scheme)
    if scheme == "slater_capital":
        return [f"F^{k}" for k in range(0, 2 * ell + 1, 2)]
    if scheme == "slater_sub":
        return [f"F_{k}" for k in range(0, 2 * ell + 1, 2)]
    if scheme == "racah":
        return ["A", "B", "C"] if ell == 2 else ["E^0", "E^1", "E^2", "E^3"]
    if scheme == "e_lambda":
        return [f"E_lambda{lam}" for lam in range(ell + 1)]
    raise InvalidInputError(f"unknown Coulomb scheme {scheme!r}")


@dataclass(frozen=True)
class CoulombParams:
    ell: int
    scheme: str
    values: tuple

    def __post_init__(self):
        scheme = _SCHEME_ALIASES.get(self.scheme, self.scheme)
        if scheme not in SCHEMES:
            raise InvalidInputError(f"unknown Coulomb scheme {self.scheme!r}")
        if self.scheme == "racah_abc" and self.ell != 2:
            raise InvalidInputError("A, B, C are defined for d shells only")
        if self.scheme == "racah_e" and self.ell != 3:
            raise InvalidInputError("E^0..E^3 are defined for f shells only")
        if scheme in ("slater_sub", "racah") and self.ell not in _SUB_NORMS:
            raise UnsupportedError(f"scheme {scheme} is defined only for l = 2, 3")
        object.__setattr__(self, "scheme", scheme)
        vals = tuple(_exactify(v) for v in self.values)
        if len(vals) != self.ell + 1:
            raise InvalidInputError(f"scheme {scheme} needs {self.ell + 1} values")
        object.__setattr__(self, "values", vals)

    def as_dict(self) -> dict:
        return dict(zip(scheme_names(self.scheme, self.ell), self.values))

    def capital(self) -> dict[int, object]:
        """{k: F^k}."""
        return dict(zip(range(0, 2 * self.ell + 1, 2), convert_coulomb_params(self, "slater_capital").values))


def _exactify(v):
    if isinstance(v, bool):
        raise InvalidInputError("boolean is not a parameter value")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError as exc:
            raise InvalidInputError(f"bad parameter value {v!r}") from exc
    if isinstance(v, float):
        if not math.isfinite(v):
            raise InvalidInputError("parameter values must be finite")
        return v
    raise InvalidInputError(f"bad parameter value {v!r}")


def b_matrix(ell: int) -> list[list[Fraction]]:
    """b(l)_{lambda k} = (-1)^lambda (2l+1) (l k l; 0 0 0)(l k l; -lambda 0 lambda)."""
    rows = []
    for lam in range(ell + 1):
        row = []
        for k in range(0, 2 * ell + 1, 2):
            v = wigner.three_jm(ell, k, ell, 0, 0, 0) * wigner.three_jm(ell, k, ell, -lam, 0, lam) * (2 * ell + 1)
            row.append(_neg_if(v, lam % 2).as_fraction())
        rows.append(row)
    return rows


def _racah_matrix(ell: int) -> list[list[Fraction]]:
    """Rows map subscript Slater integrals to the Racah parameters."""
    if ell == 2:
        return [[Fraction(1), Fraction(0), Fraction(-49)], [Fraction(0), Fraction(1), Fraction(-5)],
                [Fraction(0), Fraction(0), Fraction(35)]]
    return [
        [Fraction(1), Fraction(-10), Fraction(-33), Fraction(-286)],
        [Fraction(0), Fraction(70, 9), Fraction(231, 9), Fraction(2002, 9)],
        [Fraction(0), Fraction(1, 9), Fraction(-3, 9), Fraction(7, 9)],
        [Fraction(0), Fraction(5, 3), Fraction(6, 3), Fraction(-91, 3)],
    ]


def _to_capital_matrix(scheme: str, ell: int, b=None) -> list[list[Fraction]]:
    """Matrix M with values_scheme = M @ F_capital."""
    n = ell + 1
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    if scheme == "slater_capital":
        return ident
    sub = [[Fraction(0) if i != j else 1 / _SUB_NORMS[ell][2 * i] for j in range(n)] for i in range(n)] \
        if ell in _SUB_NORMS else None
    if scheme == "slater_sub":
        return sub
    if scheme == "racah":
        return _matmul(_racah_matrix(ell), sub)
    if scheme == "e_lambda":
        return [[Fraction(x) for x in row] for row in (b if b is not None else b_matrix(ell))]
    raise InvalidInputError(f"unknown scheme {scheme!r}")


def _matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
            for i in range(len(a))]


def _inverse(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise InvalidInputError("parameter transformation matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _apply(m, values):
    return tuple(sum((m[i][j] * values[j] for j in range(len(values))), Fraction(0)) for i in range(len(m)))


def convert_coulomb_params(params: CoulombParams, target: str, *, b=None) -> CoulombParams:
    """Exact linear change of Coulomb parametrization.  ``b`` overrides the
    b(l) matrix of the ``e_lambda`` scheme."""
    target = _SCHEME_ALIASES.get(target, target)
    if target not in SCHEMES:
        raise InvalidInputError(f"unknown Coulomb scheme {target!r}")
    ell = params.ell
    if b is not None:
        if len(b) != ell + 1 or any(len(row) != ell + 1 for row in b):
            raise InvalidInputError(f"custom b matrix must be {ell + 1} x {ell + 1}")
        _inverse([[Fraction(x) for x in row] for row in b])
    if target in ("slater_sub", "racah") and ell not in _SUB_NORMS:
        raise UnsupportedError(f"scheme {target} is defined only for l = 2, 3")
    src = _to_capital_matrix(params.scheme, ell, b)
    capital = _apply(_inverse(src), params.values)
    out = _apply(_to_capital_matrix(target, ell, b), capital)
    return CoulombParams(ell, target, out)


def laporte_platt_check(fk, ell: int):
    """(holds, residuals) for F^k = (2k+1) F^0, k = 2, 4, ..., 2l."""
    if isinstance(fk, CoulombParams):
        fk = fk.capital()
    elif not isinstance(fk, dict):
        fk = dict(zip(range(0, 2 * ell + 1, 2), fk))
    f0 = fk.get(0, 0)
    res = {k: fk.get(k, 0) - (2 * k + 1) * f0 for k in range(2, 2 * ell + 1, 2)}
    return all(v == 0 for v in res.values()), res


# ---------------------------------------------------------------- Coulomb


def reduced_c(ell: int, k: int) -> SqrtRationalSum:
    """(l || C^k || l) = (-1)^l (2l+1) (l k l; 0 0 0)."""
    v = wigner.three_jm(ell, k, ell, 0, 0, 0) * (2 * ell + 1)
    return _neg_if(v, ell % 2)


def term_energy_coefficients(ell: int, n: int, term: TermLabel) -> dict[int, SqrtRationalSum]:
    """E(term) = sum_k coefficient_k F^k."""
    if n < 2:
        return {}
    L = int(term.L)
    out = {}
    for k in range(0, 2 * ell + 1, 2):
        c = reduced_c(ell, k)
        v = c * c * wigner.six_j(ell, ell, L, ell, ell, k)
        out[k] = _neg_if(v, L % 2)
    return out


def coulomb_matrix(ell: int, n: int, params: CoulombParams | None, basis: list[LevelLabel], *,
                   group: str = "O", exact: bool = False) -> EnergyMatrix:
    fk = params.capital() if params is not None else {}
    energies = {}
    for t in terms(ell, n):
        e = ExactComplex(0) if exact else 0.0
        for k, c in term_energy_coefficients(ell, n, t).items():
            if k in fk:
                e = e + _structural(c, exact) * _value(fk[k], exact)
        energies[t] = e

    def element(b1, b2):
        if b1 == b2:
            return energies[b1.term]
        return 0

    return _assemble(basis, element, exact, group)


# ------------------------------------------------------------ spin-orbit


def _one_electron_in_pair(tj: int, t12: int, t12p: int, k: int) -> SqrtRationalSum:
    """<(j j) J12 || t^k(1) || (j j) J12'> for a one-electron operator with
    unit one-electron reduced element."""
    v = wigner.six_j(HalfInt(tj), HalfInt(t12), HalfInt(tj), HalfInt(t12p), HalfInt(tj), k)
    v = v * _sqrt((t12 + 1) * (t12p + 1))
    return _neg_if(v, ((2 * tj + t12p) // 2 + k) % 2)


def spinorbit_reduced(ell: int, n: int, t1: TermLabel, t2: TermLabel) -> SqrtRationalSum:
    """(S L || sum_i s_i l_i || S' L'), doubly reduced."""
    if n == 0:
        return SqrtRationalSum.zero()
    s_red = _sqrt(Fraction(3, 2))
    l_red = _sqrt(ell * (ell + 1) * (2 * ell + 1))
    if n == 1:
        return s_red * l_red if t1 == t2 else SqrtRationalSum.zero()
    spin = _one_electron_in_pair(1, t1.S.twice, t2.S.twice, 1) * s_red
    orb = _one_electron_in_pair(2 * ell, t1.L.twice, t2.L.twice, 1) * l_red
    return spin * orb * 2


def spinorbit_matrix(ell: int, n: int, zeta, basis: list[LevelLabel], *, group: str = "O",
                     exact: bool = False) -> EnergyMatrix:
    z = _value(zeta, exact)
    cache = {}

    def element(b1, b2):
        if b1.J != b2.J or b1.chain != b2.chain:
            return 0
        key = (b1.term, b2.term, b1.J)
        if key not in cache:
            t1, t2 = b1.term, b2.term
            sj = wigner.six_j(t1.S, t1.L, b1.J, t2.L, t2.S, 1)
            v = sj * spinorbit_reduced(ell, n, t1, t2)
            v = _neg_if(v, ((t2.S.twice + t1.L.twice + b1.J.twice) // 2) % 2)
            cache[key] = _structural(v, exact) * z
        return cache[key]

    return _assemble(basis, element, exact, group)


# ---------------------------------------------------------- crystal field


def _identity(group: str) -> str:
    return "A1" if group in ("O", "O*") else groupdata.identity_irrep(group)


def _check_bkq(ell: int, bkq: dict) -> None:
    for (k, q) in bkq:
        if int(k) != k or int(q) != q:
            raise InvalidInputError("k and q must be integers")
        if k % 2 or not 0 <= k <= 2 * ell:
            raise InvalidInputError(f"crystal-field rank k={k} must be even and at most 2l")
        if abs(q) > k:
            raise InvalidInputError(f"|q| > k in B^{k}_{q}")
    for (k, q), b in bkq.items():
        partner = bkq.get((k, -q), 0)
        lhs = complex(partner)
        rhs = (-1) ** q * complex(b).conjugate()
        if abs(lhs - rhs) > 1e-9 * max(1.0, abs(rhs)):
            raise InvalidInputError(f"B^{k}_{-q} must equal (-1)^q (B^{k}_{q})*")


def dk_from_bkq(ell: int, bkq: dict, group: str = "O", *, variant: str = "standard", exact: bool = False,
                invariance_tol: float = 1e-4) -> dict:
    """D[k a0] = (-1)^l (2l+1) (l k l; 000) sum_q B^k_q (kq | k a0 Gamma0 gamma0)*.

    Raises when the B^k_q set has a component outside the identity irrep
    larger than ``invariance_tol`` relative to the largest B^k_q (the
    Hamiltonian would not be invariant); smaller residues are dropped."""
    _check_bkq(ell, bkq)
    ident = _identity(group)
    out = {}
    for k in sorted({k for k, _ in bkq}):
        table = chain.reduce_representation(k, group, variant=variant)
        vec = np.zeros(2 * k + 1, dtype=complex)
        for q in range(-k, k + 1):
            vec[k - q] = complex(bkq.get((k, q), 0))
        comps = chain.adapt_components(vec.conj(), table).conj()
        for lab, c in zip(table.labels, comps):
            if lab.irrep != ident and abs(c) > invariance_tol * max(1.0, np.max(np.abs(vec))):
                raise InvalidInputError(f"B^{k}_q set is not invariant under {group}")
        pre = reduced_c(ell, k)
        for lab in table.labels:
            if lab.irrep != ident:
                continue
            if exact and table.is_exact:
                total = ExactComplex(0)
                for q in range(-k, k + 1):
                    b = bkq.get((k, q), 0)
                    if b:
                        total = total + _value(b, True) * table.coefficient(q, lab).conjugate()
                out[(k, lab.a)] = total * ExactComplex(pre)
            else:
                out[(k, lab.a)] = complex(comps[table.index(lab)]) * pre.to_float()
    return out


def cubic_bkq(dq, ell: int = 2) -> dict:
    """Octahedral set B^4_0 = 21 Dq, B^4_{+-4} = 21 Dq sqrt(5/14)."""
    if isinstance(dq, (int, Fraction)):
        b40 = SqrtRationalSum.rational(21 * Fraction(dq))
        b44 = b40 * _sqrt(Fraction(5, 14))
    else:
        b40 = 21.0 * float(dq)
        b44 = b40 * math.sqrt(5 / 14)
    return {(4, 0): b40, (4, 4): b44, (4, -4): b44}


def reduced_unit_tensor(ell: int, n: int, term: TermLabel, term2: TermLabel, k: int) -> SqrtRationalSum:
    """(l^N alpha S L || U^(k) || l^N alpha' S L'), orbital reduced element."""
    if term.S != term2.S or n == 0:
        return SqrtRationalSum.zero()
    L, Lp = int(term.L), int(term2.L)
    if not wigner.triangle(2 * L, 2 * Lp, 2 * k):
        return SqrtRationalSum.zero()
    if n == 1:
        return SqrtRationalSum.rational(1)
    if n > 2:
        raise UnsupportedError("N > 2 needs fractional parentage")
    v = wigner.six_j(ell, L, ell, Lp, ell, k) * _sqrt((2 * L + 1) * (2 * Lp + 1)) * 2
    return _neg_if(v, (Lp + k) % 2)


@lru_cache(maxsize=None)
def _f_cached(tj1: int, tj2: int, k: int, c1: ChainLabel, c2: ChainLabel, c0: ChainLabel, group: str, variant: str,
              exact: bool):
    return chain.f_symbol(HalfInt(tj1), HalfInt(tj2), k, c1, c2, c0, group, variant=variant, exact=exact)


def crystalfield_matrix(ell: int, n: int, dk: dict, basis: list[LevelLabel], group: str = "O", *,
                        variant: str = "standard", exact: bool = False) -> EnergyMatrix:
    """Matrix of sum_{k a0} D[k a0] U^(k)_{a0 Gamma0 gamma0}."""
    ident = _identity(group)
    params = {key: _value(v, exact) for key, v in dk.items() if complex(v) != 0}
    for k, _ in params:
        if k % 2 or not 0 <= k <= 2 * ell:
            raise InvalidInputError(f"crystal-field rank k={k} must be even and at most 2l")

    def element(b1, b2):
        t1, t2 = b1.term, b2.term
        if t1.S != t2.S:
            return 0
        total = ExactComplex(0) if exact else 0j
        for (k, a0), d in params.items():
            red = reduced_unit_tensor(ell, n, t1, t2, k)
            if red.is_zero():
                continue
            sj = wigner.six_j(t1.L, k, t2.L, b2.J, t1.S, b1.J)
            if sj.is_zero():
                continue
            geo = red * sj * _sqrt((b1.J.twice + 1) * (b2.J.twice + 1))
            geo = _neg_if(geo, ((t1.S.twice + t2.L.twice + b1.J.twice) // 2) % 2)
            f = _f_cached(b1.J.twice, b2.J.twice, k, b1.chain, b2.chain, ChainLabel(a0, ident, 0), group, variant,
                          exact)
            total = total + _structural(geo, exact) * f * d
        return total

    return _assemble(basis, element, exact, group)


# ------------------------------------------------- effective Hamiltonian


@dataclass(frozen=True, order=True)
class EffectiveParameterLabel:
    """D[(k1 k2) kS (k3 k4) kL k a0]; k1 = k2 = 1/2 marks a one-body term,
    written (ss), whose orbital pair is (l l)."""

    k1: HalfInt
    k2: HalfInt
    kS: int
    k3: int
    k4: int
    kL: int
    k: int
    a0: int = 0
    multiplicity: int = field(default=1, compare=False)

    @property
    def one_body(self) -> bool:
        return self.k1 == _HALF and self.k2 == _HALF

    def __str__(self):
        spin = "(ss)" if self.one_body else f"({self.k1}{self.k2})"
        sep = ", " if (self.kL >= 10 or self.k >= 10) else " "
        suffix = "ab"[self.a0] if self.multiplicity > 1 else ""
        return f"{spin}{self.kS} ({self.k3}{self.k4}){self.kL}{sep}{self.k}{suffix}"


FAMILIES = ("coulomb", "spin-orbit", "ligand-field")


def _sigma_identity(k: int, group: str) -> int:
    return groupdata.branching_multiplicity(groupdata.IrrepLabel(group, _identity(group)), HalfInt(2 * k))


def _label_allowed(family: str, ell: int, k3: int, k4: int, kL: int, k: int, restricted: bool) -> bool:
    """Selection predicate reproducing the printed parameter lists."""
    if family == "coulomb":
        if k3 > k4 or k3 % 2 or k4 % 2 or k4 > 2 * ell:
            return False
        if not abs(k3 - k4) <= kL <= k3 + k4 or k != kL:
            return False
        if k3 == k4 and kL % 2:
            return False  # the symmetrized pair sum vanishes
        return (k3 == k4 and kL == 0) if restricted else True
    if family == "spin-orbit":
        if kL % 2 == 0 or not 1 <= kL <= 2 * ell - 1 or not abs(kL - 1) <= k <= kL + 1:
            return False
        return (kL == 1 and k == 0) if restricted else True
    if family == "ligand-field":
        if kL % 2 or not 0 <= kL <= 2 * ell or k != kL:
            return False
        return kL > 0 if restricted else True
    raise InvalidInputError(f"unknown family {family!r}")


def enumerate_effective_params(ell: int, group: str = "O", family: str = "all", *,
                               restricted: bool = False) -> list[EffectiveParameterLabel]:
    """Effective-Hamiltonian parameter labels for l^N in ``group``.

    ``restricted`` keeps only the isotropic Coulomb and spin-orbit terms and
    the ordinary ligand-field terms of rank > 0."""
    if group != "O":
        raise UnsupportedError("effective-parameter enumeration is built for O only")
    if ell not in (2, 3):
        raise UnsupportedError("effective-parameter enumeration is built for d and f shells")
    fams = FAMILIES if family == "all" else (family,)
    out = []
    for fam in fams:
        if fam not in FAMILIES:
            raise InvalidInputError(f"unknown family {fam!r}")
        cands = []
        if fam == "coulomb":
            for kL in range(0, 4 * ell + 1):
                for k3 in range(0, 2 * ell + 1):
                    for k4 in range(k3, 2 * ell + 1):
                        if _label_allowed(fam, ell, k3, k4, kL, kL, restricted):
                            cands.append((HalfInt(0), 0, k3, k4, kL, kL))
        else:
            kS = 1 if fam == "spin-orbit" else 0
            for kL in range(0, 2 * ell + 1):
                for k in range(0, 2 * ell + 2):
                    if _label_allowed(fam, ell, ell, ell, kL, k, restricted):
                        cands.append((_HALF, kS, ell, ell, kL, k))
        for kk, kS, k3, k4, kL, k in cands:
            sigma = _sigma_identity(k, group)
            for a0 in range(sigma):
                out.append(EffectiveParameterLabel(kk, kk, kS, k3, k4, kL, k, a0, sigma))
    return out


def parse_effective_label(text: str, ell: int) -> EffectiveParameterLabel:
    """Inverse of ``str(EffectiveParameterLabel)``, e.g. '(00)0 (66)12, 12a'."""
    m = re.fullmatch(r"\s*\((ss|\d\d)\)(\d+)\s+\((\d)(\d)\)(\d+),?\s+(\d+)([ab]?)\s*", text)
    if not m:
        raise InvalidInputError(f"cannot parse parameter label {text!r}")
    spin, kS, k3, k4, kL, k, suffix = m.groups()
    kk = (_HALF, _HALF) if spin == "ss" else (HalfInt(2 * int(spin[0])), HalfInt(2 * int(spin[1])))
    a0 = "ab".index(suffix) if suffix else 0
    sigma = _sigma_identity(int(k), "O")
    return EffectiveParameterLabel(kk[0], kk[1], int(kS), int(k3), int(k4), int(kL), int(k), a0, max(sigma, 1))


def _pair_tensor_reduced(tj: int, t12: int, t12p: int, ka: HalfInt, kb: HalfInt, kab: int, ra, rb) -> SqrtRationalSum:
    """<(j j) J12 || {A^ka(1) B^kb(2)}^kab || (j j) J12'> with one-electron
    reduced elements ra, rb."""
    nj = wigner.nine_j([[HalfInt(tj), HalfInt(tj), ka], [HalfInt(tj), HalfInt(tj), kb],
                        [HalfInt(t12), HalfInt(t12p), kab]])
    if nj.is_zero():
        return nj
    return nj * _sqrt((t12 + 1) * (t12p + 1) * (2 * kab + 1)) * ra * rb


def _swap_phase(ka, kb, kab) -> bool:
    return ((HalfInt.of(ka).twice + HalfInt.of(kb).twice) // 2 - kab) % 2 == 1


def effective_reduced(ell: int, n: int, lab: EffectiveParameterLabel, t1: TermLabel, t2: TermLabel, tJ: int,
                      tJp: int) -> SqrtRationalSum:
    """(l^N S L J || sum_{ij} {...}^(k) || l^N S' L' J') in (S L) J coupling."""
    ts, tl = 1, 2 * ell
    big = wigner.nine_j([[t1.S, t2.S, lab.kS], [t1.L, t2.L, lab.kL], [HalfInt(tJ), HalfInt(tJp), lab.k]])
    if big.is_zero():
        return big
    big = big * _sqrt((tJ + 1) * (tJp + 1) * (2 * lab.k + 1))
    one = SqrtRationalSum.rational(1)
    zero = HalfInt(0)
    if lab.one_body:
        if n == 1:
            return big
        ids, idl = _sqrt(2), _sqrt(2 * ell + 1)
        kS, kL = HalfInt(2 * lab.kS), HalfInt(2 * lab.kL)
        e1 = _pair_tensor_reduced(ts, t1.S.twice, t2.S.twice, kS, zero, lab.kS, one, ids) * \
            _pair_tensor_reduced(tl, t1.L.twice, t2.L.twice, kL, zero, lab.kL, one, idl)
        e2 = _pair_tensor_reduced(ts, t1.S.twice, t2.S.twice, zero, kS, lab.kS, ids, one) * \
            _pair_tensor_reduced(tl, t1.L.twice, t2.L.twice, zero, kL, lab.kL, idl, one)
        return big * (e1 + e2)
    if n < 2:
        return SqrtRationalSum.zero()
    k3, k4 = HalfInt(2 * lab.k3), HalfInt(2 * lab.k4)
    s12 = _pair_tensor_reduced(ts, t1.S.twice, t2.S.twice, lab.k1, lab.k2, lab.kS, one, one)
    s21 = _neg_if(_pair_tensor_reduced(ts, t1.S.twice, t2.S.twice, lab.k2, lab.k1, lab.kS, one, one),
                  _swap_phase(lab.k1, lab.k2, lab.kS))
    o12 = _pair_tensor_reduced(tl, t1.L.twice, t2.L.twice, k3, k4, lab.kL, one, one)
    o21 = _neg_if(_pair_tensor_reduced(tl, t1.L.twice, t2.L.twice, k4, k3, lab.kL, one, one),
                  _swap_phase(k3, k4, lab.kL))
    return big * (s12 * o12 + s21 * o21)


def heff_matrix(ell: int, n: int, params: dict, basis: list[LevelLabel], group: str = "O", *,
                variant: str = "standard", exact: bool = False) -> EnergyMatrix:
    """Matrix of the effective Hamiltonian; two-body sums run over ordered
    pairs i != j, one-body terms over single electrons."""
    if n != 2:
        raise UnsupportedError("the effective Hamiltonian is assembled for N = 2")
    ident = _identity(group)
    params = {lab: _value(v, exact) for lab, v in params.items() if complex(v) != 0}
    for lab in params:
        if not isinstance(lab, EffectiveParameterLabel):
            raise InvalidInputError("parameter keys must be EffectiveParameterLabel")
        if lab.a0 >= _sigma_identity(lab.k, group):
            raise InvalidInputError(f"{lab}: a0 exceeds the branching multiplicity")

    def element(b1, b2):
        total = ExactComplex(0) if exact else 0j
        for lab, d in params.items():
            red = effective_reduced(ell, n, lab, b1.term, b2.term, b1.J.twice, b2.J.twice)
            if red.is_zero():
                continue
            f = _f_cached(b1.J.twice, b2.J.twice, lab.k, b1.chain, b2.chain, ChainLabel(lab.a0, ident, 0), group,
                          variant, exact)
            total = total + _structural(red, exact) * f * d
        return total

    return _assemble(basis, element, exact, group)


def isotropic_effective_params(ell: int, fk: dict | None = None, zeta=0, dk: dict | None = None) -> dict:
    """Effective parameters reproducing H_C, H_so and H_cf of the ordinary model."""
    out = {}
    zero = HalfInt(0)
    for k, f in (fk or {}).items():
        c = reduced_c(ell, k)
        scale = c * c * _sqrt(2 * k + 1)
        out[EffectiveParameterLabel(zero, zero, 0, k, k, 0, 0)] = _scale(scale, f)
    if zeta:
        scale = -_sqrt(Fraction(9, 2) * ell * (ell + 1) * (2 * ell + 1))
        out[EffectiveParameterLabel(_HALF, _HALF, 1, ell, ell, 1, 0)] = _scale(scale, zeta)
    for (k, a0), d in (dk or {}).items():
        sigma = _sigma_identity(k, "O")
        out[EffectiveParameterLabel(_HALF, _HALF, 0, ell, ell, k, k, a0, sigma)] = _scale(_sqrt(2), d)
    return out


def _scale(s: SqrtRationalSum, v):
    if isinstance(v, (ExactComplex, SqrtRationalSum, int, Fraction)):
        return ExactComplex(s) * ExactComplex.coerce(v if not isinstance(v, int) else Fraction(v))
    return s.to_float() * v


# --------------------------------------------------------------- levels


@dataclass(frozen=True)
class Level:
    energy: float
    irreps: tuple[str, ...]
    degeneracy: int


def diagonalize_levels(matrices, *, merge: bool = True, tol: float = 1e-8) -> list[Level]:
    """Eigenvalues of the summed matrices per irrep block.

    Degeneracy counts [Gamma] times the eigenvalue multiplicity.  With
    ``merge`` coincident energies from different irreps become one level."""
    if isinstance(matrices, EnergyMatrix):
        matrices = [matrices]
    total = matrices[0]
    for m in matrices[1:]:
        total = total + m
    if not total.is_hermitian():
        raise ConsistencyError("energy matrix is not Hermitian")
    per_irrep: dict[str, list[np.ndarray]] = {}
    for (irrep, _gamma), (_, m) in total.blocks.items():
        per_irrep.setdefault(irrep, []).append(np.linalg.eigvalsh(_to_complex(m)))
    raw = []
    scale = 1.0
    for irrep, spectra in per_irrep.items():
        for ev in spectra:
            scale = max(scale, float(np.max(np.abs(ev))) if ev.size else 0.0)
    for irrep, spectra in per_irrep.items():
        for ev in spectra:
            raw.extend((float(e), irrep) for e in ev)
    raw.sort()
    levels: list[list] = []
    for e, irrep in raw:
        if levels and abs(e - levels[-1][0]) <= tol * scale and (merge or levels[-1][1] == [irrep]):
            lv = levels[-1]
            lv[2] += 1
            if irrep not in lv[1]:
                lv[1].append(irrep)
            lv[3].append(e)
        else:
            levels.append([e, [irrep], 1, [e]])
    return [Level(float(np.mean(lv[3])), tuple(lv[1]), lv[2]) for lv in levels]


def barycenter(levels: list[Level]) -> float:
    total = sum(lv.degeneracy for lv in levels)
    return sum(lv.energy * lv.degeneracy for lv in levels) / total if total else 0.0


# ----------------------------------------------------------- parameter file


@dataclass
class CfParameterSet:
    ell: int
    n: int
    group: str = "O"
    coulomb: CoulombParams | None = None
    zeta: object = 0.0
    bkq: dict = field(default_factory=dict)

    def matrices(self, basis=None, *, variant: str = "standard") -> dict[str, EnergyMatrix]:
        basis = basis or enumerate_basis(self.ell, self.n, self.group, variant=variant)
        dk = dk_from_bkq(self.ell, self.bkq, self.group, variant=variant) if self.bkq else {}
        return {
            "coulomb": coulomb_matrix(self.ell, self.n, self.coulomb, basis, group=self.group),
            "spin-orbit": spinorbit_matrix(self.ell, self.n, self.zeta, basis, group=self.group),
            "crystal-field": crystalfield_matrix(self.ell, self.n, dk, basis, self.group, variant=variant),
        }

    def total(self, basis=None, *, variant: str = "standard") -> EnergyMatrix:
        parts = list(self.matrices(basis, variant=variant).values())
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return out


def parameter_set_from_json(data: dict) -> CfParameterSet:
    try:
        ell, n = int(data["ell"]), int(data["N"])
        group = str(data.get("group", "O"))
        coul = data.get("coulomb")
        cp = CoulombParams(ell, coul["scheme"], tuple(coul["values"])) if coul else None
        bkq = {}
        for e in data.get("bkq", []):
            bkq[(int(e["k"]), int(e["q"]))] = complex(float(e.get("re", 0.0)), float(e.get("im", 0.0)))
        zeta = float(data.get("zeta", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed parameter file: {exc}") from exc
    config_dimension(ell, n)
    _check_bkq(ell, bkq)
    return CfParameterSet(ell, n, group, cp, zeta, bkq)


def load_parameter_file(path) -> CfParameterSet:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read parameter file {path}: {exc}") from exc
    return parameter_set_from_json(data)
