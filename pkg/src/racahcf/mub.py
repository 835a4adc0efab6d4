"""Nonstandard SU(2) > C_d bases, Weyl pairs and mutually unbiased bases.

Vectors live on the computational basis phi_0 ... phi_{d-1}; fractional
powers of q = exp(2 pi i / d) are taken as exp(2 pi i x / d).  Everything
here is double-precision complex.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedError


@dataclass(frozen=True)
class MubParams:
    d: int
    r: float = 0.0
    a: int = 0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise InvalidInputError("d must be an integer >= 2")
        if not 0 <= self.a < self.d:
            raise InvalidInputError("a must satisfy 0 <= a < d")
        if not math.isfinite(self.r):
            raise InvalidInputError("r must be finite")

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi / self.d)


def qpow(d: int, x: float) -> complex:
    return cmath.exp(2j * math.pi * x / d)


def vra_matrix(p: MubParams) -> np.ndarray:
    d = p.d
    v = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        v[n - 1, n] = qpow(d, n * p.a)
    v[d - 1, 0] = cmath.exp(1j * math.pi * (d - 1) * p.r)
    return v


def mub_vector(p: MubParams, alpha: int) -> np.ndarray:
    """phi(a alpha; r), including the global phase q^((d-1)^2 r / 4)."""
    d = p.d
    if not 0 <= alpha < d:
        raise InvalidInputError("alpha must satisfy 0 <= alpha < d")
    out = np.zeros(d, dtype=complex)
    glob = (d - 1) ** 2 * p.r / 4
    for n in range(d):
        out[d - 1 - n] = qpow(d, glob + n * (d - n) * p.a / 2 - n * (d - 1) * p.r / 2 + n * alpha)
    return out / math.sqrt(d)


def mub_basis(p: MubParams) -> np.ndarray:
    """Columns are mub_vector(p, alpha) for alpha = 0 .. d-1."""
    return np.array([mub_vector(p, al) for al in range(p.d)]).T


def eigenvalue(p: MubParams, alpha: int) -> complex:
    return qpow(p.d, (p.d - 1) * (p.r + p.a) / 2 - alpha)


def hra_matrix(p: MubParams) -> np.ndarray:
    """H_ra from its closed matrix-element formula (rows n, columns alpha)."""
    d = p.d
    h = np.zeros((d, d), dtype=complex)
    for n in range(d):
        for al in range(d):
            x = (d - 1 - n) * (n + 1) * p.a / 2 + (d - 1) ** 2 * p.r / 4 + (d - 1 - n) * (al - (d - 1) * p.r / 2)
            h[n, al] = qpow(d, x)
    return h / math.sqrt(d)


def hra_diagonal(p: MubParams) -> np.ndarray:
    """Expected diagonal of H^dagger V H."""
    d = p.d
    return np.array([qpow(d, (d - 1) * (p.r + p.a) / 2 - k) for k in range(d)])


@dataclass(frozen=True)
class WeylPair:
    X: np.ndarray
    Z: np.ndarray
    P: np.ndarray


def weyl_pair(d: int, r: float = 0.0) -> WeylPair:
    if d < 2:
        raise InvalidInputError("d must be >= 2")
    x = np.roll(np.eye(d, dtype=complex), 1, axis=1)
    z = np.diag([qpow(d, k) for k in range(d)])
    pr = np.eye(d, dtype=complex)
    pr[d - 1, d - 1] = cmath.exp(1j * math.pi * (d - 1) * r)
    return WeylPair(x, z, pr)


def pauli_set(d: int) -> list[tuple[int, int, np.ndarray]]:
    """(a, b, X^a Z^b) for all a, b in 0 .. d-1."""
    w = weyl_pair(d)
    out = []
    for a in range(d):
        xa = np.linalg.matrix_power(w.X, a)
        for b in range(d):
            out.append((a, b, xa @ np.linalg.matrix_power(w.Z, b)))
    return out


def unbiasedness_report(d: int, r: float = 0.0) -> dict:
    """Min and max |<u|v>| for every pair among B_r0 .. B_r,d-1 and the
    computational basis (listed last)."""
    bases = [mub_basis(MubParams(d, r, a)) for a in range(d)] + [np.eye(d, dtype=complex)]
    names = [f"B{a}" for a in range(d)] + ["computational"]
    n = len(bases)
    lo = np.zeros((n, n))
    hi = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            g = np.abs(bases[i].conj().T @ bases[k])
            lo[i, k], hi[i, k] = g.min(), g.max()
    return {"d": d, "r": r, "names": names, "min": lo, "max": hi}


def gauss_sum(u: int, v: int, w: int) -> complex:
    """S(u, v, w) = sum_{k=0}^{|w|-1} exp(i pi (u k^2 + v k) / w)."""
    if u * w == 0 or math.gcd(u, w) != 1 or (u * w + v) % 2:
        raise InvalidInputError("gauss_sum needs gcd(u, w) = 1, uw != 0 and uw + v even")
    return complex(sum(cmath.exp(1j * math.pi * (u * k * k + v * k) / w) for k in range(abs(w))))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % f for f in range(2, math.isqrt(n) + 1))


def cartan_partition(p: int) -> list[list[tuple[int, int]]]:
    """p+1 sets of p-1 commuting (a, b) labels of X^a Z^b."""
    if not is_prime(p):
        raise UnsupportedError(f"{p} is not prime")
    sets = [[(0, b) for b in range(1, p)], [(a, 0) for a in range(1, p)]]
    for c in range(1, p):
        sets.append([(a, c * a % p) for a in range(1, p)])
    return sets


def basis_to_json(p: MubParams) -> dict:
    vecs = mub_basis(p).T
    return {
        "d": p.d,
        "r": p.r,
        "a": p.a,
        "vectors": [[{"re": float(z.real), "im": float(z.imag)} for z in v] for v in vecs],
    }
