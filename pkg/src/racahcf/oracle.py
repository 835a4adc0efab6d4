"""Slow, literal reference implementations used to check the production code.

Nothing here calls into :mod:`racahcf.wigner`, :mod:`racahcf.chain` or
:mod:`racahcf.crystalfield`:

* Clebsch-Gordan tables come from the highest-weight condition and
  repeated lowering, in exact arithmetic.
* 6-j and 9-j symbols are overlaps of explicitly coupled states.
* Configuration matrices for l^N (N <= 2) are built over Slater
  determinants.  Angular integrals are Gaunt integrals evaluated by
  quadrature over the sphere with scipy's spherical harmonics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError
from .exactnum import HalfInt, SqrtRationalSum, twice

_ZERO = SqrtRationalSum.zero()


def _ladder(tj: int, tm: int, step: int) -> SqrtRationalSum:
    """sqrt((j -+ m)(j +- m + 1)) for J+ (step=+1) or J- (step=-1)."""
    if step > 0:
        val = Fraction((tj - tm) * (tj + tm + 2), 4)
    else:
        val = Fraction((tj + tm) * (tj - tm + 2), 4)
    return SqrtRationalSum.sqrt(val)


def cg_oracle(j1, j2) -> dict[tuple[int, int, int, int], SqrtRationalSum]:
    """Full table of <j1 m1 j2 m2 | j m>, keyed by twice-values
    ``(2 m1, 2 m2, 2 j, 2 m)``; only nonzero entries are stored."""
    t1, t2 = twice(j1), twice(j2)
    if t1 < 0 or t2 < 0:
        raise InvalidInputError("negative angular momentum")
    table: dict[tuple[int, int, int, int], SqrtRationalSum] = {}
    for tJ in range(t1 + t2, abs(t1 - t2) - 1, -2):
        # highest weight: J+ psi = 0 inside the M = J subspace
        lo = max(-t1, tJ - t2)
        coeffs: dict[int, SqrtRationalSum] = {lo: SqrtRationalSum.rational(1)}
        u = lo
        while u + 2 <= t1:
            a = _ladder(t1, u, +1)
            b = _ladder(t2, tJ - u - 2, +1)
            coeffs[u + 2] = -(coeffs[u] * a) / b
            u += 2
        norm2 = sum((c * c).as_fraction() for c in coeffs.values())
        scale = SqrtRationalSum.sqrt(Fraction(1) / norm2)
        if coeffs[t1].to_float() < 0:
            scale = -scale
        state = {(u, tJ - u): c * scale for u, c in coeffs.items()}
        tM = tJ
        while True:
            for (u1, u2), c in state.items():
                if not c.is_zero():
                    table[(u1, u2, tJ, tM)] = c
            if tM == -tJ:
                break
            lowered: dict[tuple[int, int], SqrtRationalSum] = {}
            for (u1, u2), c in state.items():
                if u1 - 2 >= -t1:
                    key = (u1 - 2, u2)
                    lowered[key] = lowered.get(key, _ZERO) + c * _ladder(t1, u1, -1)
                if u2 - 2 >= -t2:
                    key = (u1, u2 - 2)
                    lowered[key] = lowered.get(key, _ZERO) + c * _ladder(t2, u2, -1)
            norm = _ladder(tJ, tM, -1)
            state = {k: v / norm for k, v in lowered.items()}
            tM -= 2
    return table


def _lookup(tables, t1, t2):
    key = (t1, t2)
    if key not in tables:
        tables[key] = cg_oracle(HalfInt(t1), HalfInt(t2))
    return tables[key]


def _tri(a, b, c):
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def _proj(t):
    return range(-t, t + 1, 2)


def recoupling_oracle(*args, tm: int | None = None, tables: dict | None = None) -> SqrtRationalSum:
    """6-j (six arguments, layout {j1 j2 j12; j3 j j23}) or 9-j (nine
    arguments, row-major) symbol from the defining recoupling overlap.

    ``tm`` selects twice the total projection used in the overlap (default
    the stretched value); ``tables`` may hold oracle CG tables shared
    between calls.
    """
    if len(args) == 1:
        args = tuple(x for row in args[0] for x in row)
    t = [twice(x) for x in args]
    if any(x < 0 for x in t):
        raise InvalidInputError("negative angular momentum")
    tables = {} if tables is None else tables
    if len(t) == 6:
        return _sixj_oracle(*t, tm=tm, tables=tables)
    if len(t) == 9:
        return _ninej_oracle(*t, tm=tm, tables=tables)
    raise InvalidInputError("expected six or nine arguments")


def _sixj_oracle(j1, j2, j12, j3, j, j23, tm, tables):
    if not (_tri(j1, j2, j12) and _tri(j12, j3, j) and _tri(j2, j3, j23) and _tri(j1, j23, j)):
        return _ZERO
    m = j if tm is None else tm
    if abs(m) > j or (j - m) % 2:
        raise InvalidInputError("bad projection for the recoupling overlap")
    c12 = _lookup(tables, j1, j2)
    c123 = _lookup(tables, j12, j3)
    c23 = _lookup(tables, j2, j3)
    c1_23 = _lookup(tables, j1, j23)
    total = _ZERO
    for m1 in _proj(j1):
        for m2 in _proj(j2):
            m3 = m - m1 - m2
            if abs(m3) > j3:
                continue
            a = c12.get((m1, m2, j12, m1 + m2))
            b = c123.get((m1 + m2, m3, j, m)) if a is not None else None
            c = c23.get((m2, m3, j23, m2 + m3)) if b is not None else None
            d = c1_23.get((m1, m2 + m3, j, m)) if c is not None else None
            if d is None:
                continue
            total = total + a * b * c * d
    phase = (j1 + j2 + j3 + j) // 2
    val = total / SqrtRationalSum.sqrt(Fraction((j12 + 1) * (j23 + 1)))
    return -val if phase % 2 else val


def _ninej_oracle(j1, j2, j12, j3, j4, j34, j13, j24, j, tm, tables):
    ok = (
        _tri(j1, j2, j12) and _tri(j3, j4, j34) and _tri(j12, j34, j)
        and _tri(j1, j3, j13) and _tri(j2, j4, j24) and _tri(j13, j24, j)
    )
    if not ok:
        return _ZERO
    m = j if tm is None else tm
    if abs(m) > j or (j - m) % 2:
        raise InvalidInputError("bad projection for the recoupling overlap")
    c12 = _lookup(tables, j1, j2)
    c34 = _lookup(tables, j3, j4)
    cL = _lookup(tables, j12, j34)
    c13 = _lookup(tables, j1, j3)
    c24 = _lookup(tables, j2, j4)
    cR = _lookup(tables, j13, j24)
    total = _ZERO
    for m1, m2, m3 in itertools.product(_proj(j1), _proj(j2), _proj(j3)):
        m4 = m - m1 - m2 - m3
        if abs(m4) > j4:
            continue
        vals = (
            c12.get((m1, m2, j12, m1 + m2)),
            c34.get((m3, m4, j34, m3 + m4)),
            cL.get((m1 + m2, m3 + m4, j, m)),
            c13.get((m1, m3, j13, m1 + m3)),
            c24.get((m2, m4, j24, m2 + m4)),
            cR.get((m1 + m3, m2 + m4, j, m)),
        )
        if any(v is None for v in vals):
            continue
        prod = vals[0]
        for v in vals[1:]:
            prod = prod * v
        total = total + prod
    return total / SqrtRationalSum.sqrt(Fraction((j12 + 1) * (j34 + 1) * (j13 + 1) * (j24 + 1)))


# ------------------------------------------------------------ determinants


@dataclass(frozen=True, order=True)
class DeterminantState:
    """Occupied spin-orbitals as sorted (2 m_l, 2 m_s) pairs."""

    occupied: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(set(self.occupied)) != len(self.occupied):
            raise InvalidInputError("Pauli principle violated")
        if tuple(sorted(self.occupied)) != self.occupied:
            raise InvalidInputError("occupied spin-orbitals must be sorted")


def spin_orbitals(ell: int) -> list[tuple[int, int]]:
    """(2 m_l, 2 m_s) with m_l descending, spin up first."""
    return [(2 * m, s) for m in range(ell, -ell - 1, -1) for s in (1, -1)]


def determinant_states(ell: int, n: int) -> list[DeterminantState]:
    orbs = spin_orbitals(ell)
    return [DeterminantState(tuple(sorted(c))) for c in itertools.combinations(orbs, n)]


def _angular_grid(lmax: int):
    """Gauss-Legendre in cos(theta) times a uniform phi grid, exact for
    products of spherical harmonics up to total degree ``lmax``."""
    x, w = np.polynomial.legendre.leggauss(lmax // 2 + 2)
    nphi = lmax + 2
    phi = 2 * np.pi * np.arange(nphi) / nphi
    theta = np.arccos(x)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    weights = np.outer(w, np.full(nphi, 2 * np.pi / nphi))
    return th, ph, weights


def gaunt_matrix(ell: int, k: int, q: int) -> np.ndarray:
    """<l m | C^k_q | l m'> by quadrature, rows and columns m descending."""
    from scipy.special import sph_harm_y

    th, ph, wts = _angular_grid(2 * ell + k)
    ms = range(ell, -ell - 1, -1)
    ylm = {m: sph_harm_y(ell, m, th, ph) for m in ms}
    ck = np.sqrt(4 * np.pi / (2 * k + 1)) * sph_harm_y(k, q, th, ph)
    out = np.zeros((2 * ell + 1, 2 * ell + 1), dtype=complex)
    for i, m in enumerate(ms):
        for j, mp in enumerate(ms):
            if m - mp == q:
                out[i, j] = np.sum(wts * ylm[m].conj() * ck * ylm[mp])
    out[np.abs(out) < 1e-14] = 0
    return out


def _one_body_ops(tj: int):
    """(J_z, J_+, J_-) for spin j = tj/2, basis m descending."""
    n = tj + 1
    tms = [tj - 2 * i for i in range(n)]
    jz = np.diag([t / 2 for t in tms]).astype(complex)
    jp = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        t = tms[i]
        jp[i - 1, i] = np.sqrt((tj - t) * (tj + t + 2)) / 2
    return jz, jp, jp.conj().T


def one_electron_matrix(ell: int, zeta, bkq: dict | None = None) -> np.ndarray:
    """zeta l.s + sum B^k_q C^k_q over the spin-orbitals of :func:`spin_orbitals`."""
    lz, lp, lm = _one_body_ops(2 * ell)
    sz, sp, sm = _one_body_ops(1)
    h = float(zeta) * (np.kron(lz, sz) + 0.5 * (np.kron(lp, sm) + np.kron(lm, sp)))
    orb = np.zeros((2 * ell + 1, 2 * ell + 1), dtype=complex)
    for (k, q), b in (bkq or {}).items():
        if b:
            orb += complex(b) * gaunt_matrix(ell, k, q)
    return h + np.kron(orb, np.eye(2))


def coulomb_two_body(ell: int, fk: dict) -> np.ndarray:
    """sum_k F^k C^k(1).C^k(2) on the two-particle product space."""
    n = 2 * (2 * ell + 1)
    v = np.zeros((n * n, n * n), dtype=complex)
    for k, f in fk.items():
        if not f:
            continue
        for q in range(-k, k + 1):
            a = np.kron(gaunt_matrix(ell, k, q), np.eye(2))
            b = np.kron(gaunt_matrix(ell, k, -q), np.eye(2))
            v += float(f) * (-1) ** q * np.kron(a, b)
    return v


def antisymmetrizer(ell: int) -> np.ndarray:
    """Columns (e_a x e_b - e_b x e_a)/sqrt(2) for a < b."""
    n = 2 * (2 * ell + 1)
    cols = []
    for a, b in itertools.combinations(range(n), 2):
        v = np.zeros(n * n)
        v[a * n + b] = 1 / np.sqrt(2)
        v[b * n + a] = -1 / np.sqrt(2)
        cols.append(v)
    return np.array(cols).T


def determinant_matrix(ell: int, n_electrons: int, fk: dict | None = None, zeta=0.0,
                       bkq: dict | None = None) -> np.ndarray:
    """H_C + H_so + H_cf over the determinants of l^N, N <= 2.

    ``fk`` holds capital Slater integrals {k: F^k}; ``bkq`` the Wybourne
    crystal-field parameters {(k, q): B^k_q}.
    """
    if not 0 <= n_electrons <= 2:
        raise InvalidInputError("the determinant oracle handles N <= 2")
    if n_electrons == 0:
        return np.zeros((1, 1), dtype=complex)
    h = one_electron_matrix(ell, zeta, bkq)
    if n_electrons == 1:
        return h
    n = h.shape[0]
    full = np.kron(h, np.eye(n)) + np.kron(np.eye(n), h) + coulomb_two_body(ell, fk or {})
    a = antisymmetrizer(ell)
    return a.T @ full @ a


def _orbital_pair_state(ell: int, tL: int, tM: int, tables) -> np.ndarray:
    """|(l l) L M> on the orbital product space from oracle CG tables."""
    t = 2 * ell
    cgt = _lookup(tables, t, t)
    n = 2 * ell + 1
    v = np.zeros(n * n)
    for i, m1 in enumerate(range(t, -t - 1, -2)):
        for j, m2 in enumerate(range(t, -t - 1, -2)):
            c = cgt.get((m1, m2, tL, tM))
            if c is not None:
                v[i * n + j] = c.to_float()
    return v


def unit_tensor_matrix(ell: int, k: int, q: int, tables=None) -> np.ndarray:
    """<l m | u^k_q | l m'> = <l m' k q | l m> / sqrt(2l+1) from oracle CG tables."""
    tables = {} if tables is None else tables
    t = 2 * ell
    cgt = _lookup(tables, t, 2 * k)
    out = np.zeros((2 * ell + 1, 2 * ell + 1))
    for i, m in enumerate(range(t, -t - 1, -2)):
        for j, mp in enumerate(range(t, -t - 1, -2)):
            c = cgt.get((mp, 2 * q, t, m))
            if c is not None:
                out[i, j] = c.to_float() / np.sqrt(t + 1)
    return out


def two_electron_reduced_unit_tensor(ell: int, L: int, Lp: int, k: int) -> float:
    """(l^2 L || U^(k) || l^2 L') by Wigner-Eckart inversion of one element of
    u^k(1) + u^k(2) between oracle-coupled orbital pair states."""
    tables: dict = {}
    n = 2 * ell + 1
    eye = np.eye(n)
    for M in range(-L, L + 1):
        for Mp in range(-Lp, Lp + 1):
            q = M - Mp
            if abs(q) > k:
                continue
            cg = _lookup(tables, 2 * Lp, 2 * k).get((2 * Mp, 2 * q, 2 * L, 2 * M))
            if cg is None:
                continue
            u = unit_tensor_matrix(ell, k, q, tables)
            op = np.kron(u, eye) + np.kron(eye, u)
            bra = _orbital_pair_state(ell, 2 * L, 2 * M, tables)
            ket = _orbital_pair_state(ell, 2 * Lp, 2 * Mp, tables)
            return float(bra @ op @ ket) * np.sqrt(2 * L + 1) / cg.to_float()
    return 0.0
