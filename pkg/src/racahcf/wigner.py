"""Exact SU(2) coupling symbols: Clebsch-Gordan coefficients, the 1-jm
metric, 3-jm, 6-j and 9-j symbols.

All public functions accept anything :meth:`HalfInt.of` understands and
return :class:`SqrtRationalSum` values.  Evaluation uses the closed Racah
single-sum formulas; results are memoized on a canonical form of the
arguments (symmetry-reduced for 3-jm and 6-j).  The caches are unbounded
and meant for angular momenta up to about j = 40.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError
from .exactnum import SqrtRationalSum, twice

MAX_TWICE_J = 80
_ZERO = SqrtRationalSum.zero()


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _check_jm(tj: int, tm: int) -> None:
    if tj < 0:
        raise InvalidInputError(f"negative angular momentum {tj}/2")
    if tj > MAX_TWICE_J:
        raise InvalidInputError(f"j = {tj}/2 exceeds the supported bound j <= {MAX_TWICE_J // 2}")
    if (tj - tm) % 2:
        raise InvalidInputError(f"projection {tm}/2 has the wrong parity for j = {tj}/2")
    if abs(tm) > tj:
        raise InvalidInputError(f"|m| = {abs(tm)}/2 exceeds j = {tj}/2")


def triangle(ta: int, tb: int, tc: int) -> bool:
    """Triangle condition on twice-values, including integer perimeter."""
    return (
        ta >= 0 and tb >= 0 and tc >= 0
        and (ta + tb + tc) % 2 == 0
        and abs(ta - tb) <= tc <= ta + tb
    )


def _delta_sq(ta: int, tb: int, tc: int) -> Fraction:
    return Fraction(
        _fact((ta + tb - tc) // 2) * _fact((ta - tb + tc) // 2) * _fact((tb + tc - ta) // 2),
        _fact((ta + tb + tc) // 2 + 1),
    )


@lru_cache(maxsize=None)
def _cg2(ta: int, tma: int, tb: int, tmb: int, tc: int, tmc: int) -> SqrtRationalSum:
    if tma + tmb != tmc or not triangle(ta, tb, tc):
        return _ZERO
    pre = (tc + 1) * _delta_sq(ta, tb, tc) * (
        _fact((tc + tmc) // 2) * _fact((tc - tmc) // 2)
        * _fact((ta - tma) // 2) * _fact((ta + tma) // 2)
        * _fact((tb - tmb) // 2) * _fact((tb + tmb) // 2)
    )
    n1 = (ta + tb - tc) // 2
    n2 = (ta - tma) // 2
    n3 = (tb + tmb) // 2
    n4 = (tc - tb + tma) // 2
    n5 = (tc - ta - tmb) // 2
    total = Fraction(0)
    for k in range(max(0, -n4, -n5), min(n1, n2, n3) + 1):
        den = _fact(k) * _fact(n1 - k) * _fact(n2 - k) * _fact(n3 - k) * _fact(n4 + k) * _fact(n5 + k)
        total += Fraction(-1 if k % 2 else 1, den)
    if total == 0:
        return _ZERO
    return SqrtRationalSum.sqrt(pre) * total


def cg(j1, m1, j2, m2, j, m) -> SqrtRationalSum:
    """Clebsch-Gordan coefficient <j1 m1 j2 m2 | j m> (Condon-Shortley phase)."""
    t = [twice(x) for x in (j1, m1, j2, m2, j, m)]
    _check_jm(t[0], t[1])
    _check_jm(t[2], t[3])
    _check_jm(t[4], t[5])
    return _cg2(*t)


def one_jm(j, m, mp) -> int:
    """Herring-Wigner metric (-1)^(j+m) delta(mp, -m)."""
    tj, tm, tmp = twice(j), twice(m), twice(mp)
    _check_jm(tj, tm)
    _check_jm(tj, tmp)
    if tmp != -tm:
        return 0
    return -1 if ((tj + tm) // 2) % 2 else 1


def _threejm_canonical(cols):
    """Pick a canonical representative among the 12 trivially related 3-jm
    symbols; returns (key, sign) with value(cols) = sign * value(key)."""
    tsum = cols[0][0] + cols[1][0] + cols[2][0]
    odd_sign = -1 if (tsum // 2) % 2 else 1
    best = None
    for perm in itertools.permutations(range(3)):
        parity = _perm_parity(perm)
        for flip in (1, -1):
            key = tuple((cols[p][0], flip * cols[p][1]) for p in perm)
            sign = 1
            if parity:
                sign *= odd_sign
            if flip == -1:
                sign *= odd_sign
            if best is None or key < best[0]:
                best = (key, sign)
    return best


def _perm_parity(perm) -> int:
    inv = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    return inv % 2


@lru_cache(maxsize=None)
def _threejm_key(key) -> SqrtRationalSum:
    (t1, u1), (t2, u2), (t3, u3) = key
    # (2 j3 + 1)^(-1/2) (-1)^(j3 - m3 - 2 j2) <j2 m2 j1 m1 | j3 -m3>
    c = _cg2(t2, u2, t1, u1, t3, -u3)
    if c.is_zero():
        return _ZERO
    phase = (t3 - u3 - 2 * t2) // 2
    val = c * SqrtRationalSum.sqrt(Fraction(1, t3 + 1))
    return -val if phase % 2 else val


def _threejm2(t1, u1, t2, u2, t3, u3) -> SqrtRationalSum:
    if u1 + u2 + u3 != 0 or not triangle(t1, t2, t3):
        return _ZERO
    key, sign = _threejm_canonical(((t1, u1), (t2, u2), (t3, u3)))
    val = _threejm_key(key)
    return val if sign > 0 else -val


def three_jm(j1, j2, j3, m1, m2, m3) -> SqrtRationalSum:
    """Wigner 3-jm symbol (j1 j2 j3; m1 m2 m3)."""
    t = [twice(x) for x in (j1, j2, j3, m1, m2, m3)]
    for tj, tm in zip(t[:3], t[3:]):
        _check_jm(tj, tm)
    return _threejm2(t[0], t[3], t[1], t[4], t[2], t[5])


def _sixj_canonical(a, b, c, d, e, f):
    top, bot = (a, b, c), (d, e, f)
    best = None
    for perm in itertools.permutations(range(3)):
        cols = [(top[p], bot[p]) for p in perm]
        for swap in ((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)):
            cc = [(y, x) if s else (x, y) for (x, y), s in zip(cols, swap)]
            key = tuple(x for x, _ in cc) + tuple(y for _, y in cc)
            if best is None or key < best:
                best = key
    return best


@lru_cache(maxsize=None)
def _sixj_key(a, b, c, d, e, f) -> SqrtRationalSum:
    pre = _delta_sq(a, b, c) * _delta_sq(a, e, f) * _delta_sq(d, b, f) * _delta_sq(d, e, c)
    al = ((a + b + c) // 2, (a + e + f) // 2, (d + b + f) // 2, (d + e + c) // 2)
    be = ((a + b + d + e) // 2, (b + c + e + f) // 2, (c + a + f + d) // 2)
    total = Fraction(0)
    for t in range(max(al), min(be) + 1):
        den = 1
        for x in al:
            den *= _fact(t - x)
        for y in be:
            den *= _fact(y - t)
        total += Fraction((-1 if t % 2 else 1) * _fact(t + 1), den)
    if total == 0:
        return _ZERO
    return SqrtRationalSum.sqrt(pre) * total


def _sixj2(a, b, c, d, e, f) -> SqrtRationalSum:
    if not (triangle(a, b, c) and triangle(a, e, f) and triangle(d, b, f) and triangle(d, e, c)):
        return _ZERO
    return _sixj_key(*_sixj_canonical(a, b, c, d, e, f))


def six_j(j1, j2, j12, j3, j, j23) -> SqrtRationalSum:
    """Wigner 6-j symbol {j1 j2 j12; j3 j j23}."""
    t = [twice(x) for x in (j1, j2, j12, j3, j, j23)]
    for x in t:
        if x < 0:
            raise InvalidInputError("negative angular momentum")
        if x > MAX_TWICE_J:
            raise InvalidInputError("angular momentum above supported bound")
    return _sixj2(*t)


@lru_cache(maxsize=None)
def _ninej2(a, b, c, d, e, f, g, h, i) -> SqrtRationalSum:
    rows_ok = triangle(a, b, c) and triangle(d, e, f) and triangle(g, h, i)
    cols_ok = triangle(a, d, g) and triangle(b, e, h) and triangle(c, f, i)
    if not (rows_ok and cols_ok):
        return _ZERO
    lo = max(abs(a - i), abs(h - d), abs(b - f))
    hi = min(a + i, h + d, b + f)
    total = _ZERO
    for x in range(lo, hi + 1, 2):
        w1 = _sixj2(a, d, g, h, i, x)
        if w1.is_zero():
            continue
        w2 = _sixj2(b, e, h, d, x, f)
        if w2.is_zero():
            continue
        w3 = _sixj2(c, f, i, x, a, b)
        if w3.is_zero():
            continue
        term = w1 * w2 * w3 * (x + 1)
        total = total + (-term if x % 2 else term)
    return total


def nine_j(rows) -> SqrtRationalSum:
    """Wigner 9-j symbol from a 3x3 nested sequence."""
    flat = [twice(x) for row in rows for x in row]
    if len(flat) != 9 or any(len(r) != 3 for r in rows):
        raise InvalidInputError("nine_j expects a 3x3 array")
    for x in flat:
        if x < 0:
            raise InvalidInputError("negative angular momentum")
        if x > MAX_TWICE_J:
            raise InvalidInputError("angular momentum above supported bound")
    return _ninej2(*flat)


def clear_caches() -> None:
    for fn in (_cg2, _threejm_key, _sixj_key, _ninej2, threejm_array):
        fn.cache_clear()


@lru_cache(maxsize=None)
def threejm_array(t1: int, t2: int, t3: int) -> np.ndarray:
    """Float array A[i1, i2, i3] = (j1 j2 j3; m1 m2 m3) with m_i = j_i - i_i,
    indexed on twice-values; read-only."""
    n1, n2, n3 = t1 + 1, t2 + 1, t3 + 1
    out = np.zeros((n1, n2, n3))
    if triangle(t1, t2, t3):
        for i1 in range(n1):
            u1 = t1 - 2 * i1
            for i2 in range(n2):
                u2 = t2 - 2 * i2
                u3 = -u1 - u2
                if abs(u3) > t3:
                    continue
                i3 = (t3 - u3) // 2
                out[i1, i2, i3] = _threejm2(t1, u1, t2, u2, t3, u3).to_float()
    out.setflags(write=False)
    return out
