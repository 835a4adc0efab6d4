"""Character tables of subgroups of SU(2) and the multiplicities derived
from them.

Built in: the octahedral group ``O``, its double cover ``O*``, ``U(1)``,
cyclic groups ``C<d>`` (any d >= 1) and ``SU(2)`` itself (for
Frobenius-Schur indicators).  More tables can be loaded from JSON files;
the environment variable ``RACAH_GROUP_PATH`` lists extra files or
directories (``os.pathsep`` separated) read on first use.

JSON layout::

    {"name": "O", "order": 24,
     "classes": [{"size": 1, "angle": 0.0, "square_class_index": 0,
                  "double_partner": false}, ...],
     "irreps": [{"label": "A1", "dim": 1, "chars": [1, 1, 1, 1, 1]}, ...],
     "double_cover": "O*", "is_double": false}

Characters may be numbers, ``[re, im]`` pairs or ``{"re": .., "im": ..}``.
Angles are SU(2) rotation angles in radians (0 <= angle < 4 pi for double
groups); the character of the spin-j representation on a class is
sin((2j+1) w/2) / sin(w/2).
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import InvalidInputError, UnsupportedError
from .exactnum import HalfInt

QUASI_MOMENTUM_BOUND = 30
_TOL = 1e-9


@dataclass(frozen=True)
class GroupClass:
    size: int
    angle: float
    square_class_index: int | None = None
    double_partner: bool = False


@dataclass(frozen=True)
class Irrep:
    label: str
    dim: int
    chars: tuple[complex, ...]


@dataclass(frozen=True)
class GroupTable:
    name: str
    order: int
    classes: tuple[GroupClass, ...]
    irreps: tuple[Irrep, ...]
    double_cover: str | None = None
    is_double: bool = False
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {ir.label: i for i, ir in enumerate(self.irreps)})

    def irrep(self, label: str) -> Irrep:
        try:
            return self.irreps[self._index[label]]
        except KeyError:
            raise InvalidInputError(f"group {self.name} has no irrep {label!r}") from None

    def labels(self) -> list[str]:
        return [ir.label for ir in self.irreps]

    def validate(self) -> None:
        if sum(c.size for c in self.classes) != self.order:
            raise InvalidInputError(f"{self.name}: class sizes do not add up to the order")
        sizes = np.array([c.size for c in self.classes], dtype=float)
        if not self.irreps or any(abs(x - 1) > _TOL for x in self.irreps[0].chars):
            raise InvalidInputError(f"{self.name}: first irrep must be the identity")
        for a in self.irreps:
            if len(a.chars) != len(self.classes):
                raise InvalidInputError(f"{self.name}: character row of {a.label} has wrong length")
            for b in self.irreps:
                ip = np.sum(sizes * np.conj(a.chars) * np.array(b.chars)) / self.order
                want = 1.0 if a is b else 0.0
                if abs(ip - want) > 1e-8:
                    raise InvalidInputError(f"{self.name}: characters of {a.label}, {b.label} not orthonormal")

    def to_json(self) -> dict:
        def enc(z):
            z = complex(z)
            return z.real if abs(z.imag) < 1e-15 else [z.real, z.imag]

        return {
            "name": self.name,
            "order": self.order,
            "classes": [
                {
                    "size": c.size,
                    "angle": c.angle,
                    "square_class_index": c.square_class_index,
                    "double_partner": c.double_partner,
                }
                for c in self.classes
            ],
            "irreps": [{"label": ir.label, "dim": ir.dim, "chars": [enc(z) for z in ir.chars]} for ir in self.irreps],
            "double_cover": self.double_cover,
            "is_double": self.is_double,
        }


@dataclass(frozen=True)
class IrrepLabel:
    """An irreducible representation class of a named group."""

    group: str
    name: str

    def __str__(self):
        return self.name


def _decode_char(z) -> complex:
    if isinstance(z, dict):
        return complex(z.get("re", 0.0), z.get("im", 0.0))
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise InvalidInputError(f"bad character entry {z!r}")
        return complex(z[0], z[1])
    return complex(z)


def table_from_json(data: dict) -> GroupTable:
    try:
        classes = tuple(
            GroupClass(
                int(c["size"]),
                float(c["angle"]),
                None if c.get("square_class_index") is None else int(c["square_class_index"]),
                bool(c.get("double_partner", False)),
            )
            for c in data["classes"]
        )
        irreps = tuple(
            Irrep(str(ir["label"]), int(ir["dim"]), tuple(_decode_char(z) for z in ir["chars"]))
            for ir in data["irreps"]
        )
        table = GroupTable(
            str(data["name"]),
            int(data["order"]),
            classes,
            irreps,
            data.get("double_cover"),
            bool(data.get("is_double", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed group table: {exc}") from exc
    table.validate()
    return table


def _octahedral() -> GroupTable:
    tp = 2 * math.pi
    classes = (
        GroupClass(1, 0.0, 0),
        GroupClass(8, tp / 3, 1),
        GroupClass(3, math.pi, 0),
        GroupClass(6, math.pi / 2, 2),
        GroupClass(6, math.pi, 0),
    )
    irreps = (
        Irrep("A1", 1, (1, 1, 1, 1, 1)),
        Irrep("A2", 1, (1, 1, 1, -1, -1)),
        Irrep("E", 2, (2, -1, 2, 0, 0)),
        Irrep("T1", 3, (3, 0, -1, 1, -1)),
        Irrep("T2", 3, (3, 0, -1, -1, 1)),
    )
    return GroupTable("O", 24, classes, tuple(Irrep(i.label, i.dim, tuple(map(complex, i.chars))) for i in irreps), "O*")


def _octahedral_double() -> GroupTable:
    tp = 2 * math.pi
    r2 = math.sqrt(2)
    # E, Ebar, 8C3, 8C3bar, 6C4, 6C4bar, 6C2 (with bars), 12C2' (with bars)
    classes = (
        GroupClass(1, 0.0, 0),
        GroupClass(1, tp, 0, True),
        GroupClass(8, tp / 3, 3),
        GroupClass(8, tp / 3 + tp, 3, True),
        GroupClass(6, math.pi / 2, 6),
        GroupClass(6, math.pi / 2 + tp, 6, True),
        GroupClass(6, math.pi, 1),
        GroupClass(12, math.pi, 1),
    )
    irreps = (
        Irrep("A1", 1, (1, 1, 1, 1, 1, 1, 1, 1)),
        Irrep("A2", 1, (1, 1, 1, 1, -1, -1, 1, -1)),
        Irrep("E", 2, (2, 2, -1, -1, 0, 0, 2, 0)),
        Irrep("T1", 3, (3, 3, 0, 0, 1, 1, -1, -1)),
        Irrep("T2", 3, (3, 3, 0, 0, -1, -1, -1, 1)),
        Irrep("E1/2", 2, (2, -2, 1, -1, r2, -r2, 0, 0)),
        Irrep("E5/2", 2, (2, -2, 1, -1, -r2, r2, 0, 0)),
        Irrep("G3/2", 4, (4, -4, -1, 1, 0, 0, 0, 0)),
    )
    return GroupTable(
        "O*", 48, classes, tuple(Irrep(i.label, i.dim, tuple(map(complex, i.chars))) for i in irreps), None, True
    )


def cyclic_table(d: int) -> GroupTable:
    """C_d generated by a rotation through 2 pi / d; irrep ``mu`` has
    character q^(mu k) on the k-th power, q = exp(2 pi i / d)."""
    if d < 1:
        raise InvalidInputError("cyclic group order must be positive")
    classes = tuple(GroupClass(1, 2 * math.pi * k / d, (2 * k) % d) for k in range(d))
    irreps = tuple(
        Irrep(str(mu), 1, tuple(complex(np.exp(2j * math.pi * mu * k / d)) for k in range(d))) for mu in range(d)
    )
    return GroupTable(f"C{d}", d, classes, irreps)


_registry: dict[str, GroupTable] = {}
_lock = threading.Lock()
_env_loaded = False


def _load_env() -> None:
    global _env_loaded
    if _env_loaded:
        return
    _env_loaded = True
    spec = os.environ.get("RACAH_GROUP_PATH", "")
    for part in filter(None, spec.split(os.pathsep)):
        p = Path(part)
        files = sorted(p.glob("*.json")) if p.is_dir() else [p]
        for f in files:
            load_group_table(f)


def register_group(table: GroupTable) -> None:
    table.validate()
    with _lock:
        _registry[table.name] = table


def load_group_table(path) -> GroupTable:
    """Read a group table from a JSON file and register it."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read group table {path}: {exc}") from exc
    table = table_from_json(data)
    register_group(table)
    return table


_CONTINUOUS = ("U(1)", "SU(2)")


def get_group(name: str) -> GroupTable:
    """Finite group table by name (``O``, ``O*``, ``C5``, or a loaded table)."""
    if not _registry:
        with _lock:
            if not _registry:
                _registry["O"] = _octahedral()
                _registry["O*"] = _octahedral_double()
    _load_env()
    if name in _registry:
        return _registry[name]
    if name.startswith("C") and name[1:].isdigit():
        table = cyclic_table(int(name[1:]))
        with _lock:
            _registry.setdefault(name, table)
        return table
    if name in _CONTINUOUS:
        raise UnsupportedError(f"{name} has no finite character table")
    raise UnsupportedError(f"unknown group {name!r}")


def known_groups() -> list[str]:
    get_group("O")
    return sorted(_registry) + list(_CONTINUOUS)


def irrep(group: str, name) -> IrrepLabel:
    """Validated irrep label.  For U(1) the name is the projection m, for
    SU(2) the angular momentum j (both accept '3/2' style strings)."""
    if group in _CONTINUOUS:
        h = HalfInt.of(name)
        if group == "SU(2)" and h.twice < 0:
            raise InvalidInputError("SU(2) irreps need j >= 0")
        return IrrepLabel(group, str(h))
    table = get_group(group)
    table.irrep(str(name))
    return IrrepLabel(group, str(name))


def irreps_of(group: str) -> list[IrrepLabel]:
    if group in _CONTINUOUS:
        raise UnsupportedError(f"{group} has infinitely many irreps")
    return [IrrepLabel(group, lab) for lab in get_group(group).labels()]


def dim(label: IrrepLabel) -> int:
    if label.group in ("U(1)",):
        return 1
    if label.group == "SU(2)":
        return HalfInt.of(label.name).twice + 1
    return get_group(label.group).irrep(label.name).dim


def spin_character(j, angle: float) -> float:
    """chi^(j)(w) = sin((2j+1) w/2) / sin(w/2), with the limits at w = 0 mod 2 pi."""
    tj = HalfInt.of(j).twice
    s = math.sin(angle / 2)
    if abs(s) < 1e-12:
        # w = 2 pi n: value (2j+1) * (+-1)^(2j n)
        n = round(angle / (2 * math.pi))
        return (tj + 1) * (-1 if (tj * n) % 2 else 1)
    return math.sin((tj + 1) * angle / 2) / s


def _round_count(x: complex, what: str) -> int:
    n = round(x.real)
    if abs(x - n) > 1e-6:
        raise InvalidInputError(f"{what} is not an integer ({x})")
    return int(n)


def _table_for(label: IrrepLabel, tj: int | None = None) -> GroupTable:
    table = get_group(label.group)
    if tj is not None and tj % 2 and not table.is_double:
        if table.double_cover is None:
            raise UnsupportedError(f"group {table.name} has no double cover for half-integer j")
        return get_group(table.double_cover)
    return table


def kron_multiplicity(a: IrrepLabel, b: IrrepLabel, c: IrrepLabel) -> int:
    """sigma(c | a x b)."""
    if not (a.group == b.group == c.group):
        raise InvalidInputError("irreps from different groups")
    g = a.group
    if g == "U(1)":
        return int(HalfInt.of(a.name) + HalfInt.of(b.name) == HalfInt.of(c.name))
    if g == "SU(2)":
        ta, tb, tc = (HalfInt.of(x.name).twice for x in (a, b, c))
        return int((ta + tb + tc) % 2 == 0 and abs(ta - tb) <= tc <= ta + tb)
    table = get_group(g)
    sizes = np.array([cl.size for cl in table.classes], dtype=float)
    xa = np.array(table.irrep(a.name).chars)
    xb = np.array(table.irrep(b.name).chars)
    xc = np.array(table.irrep(c.name).chars)
    return _round_count(np.sum(sizes * xa * xb * np.conj(xc)) / table.order, "Kronecker multiplicity")


def branching_multiplicity(gamma: IrrepLabel, j) -> int:
    """sigma(Gamma | j): occurrences of Gamma in the spin-j representation."""
    tj = HalfInt.of(j).twice
    if tj < 0:
        raise InvalidInputError("negative angular momentum")
    if gamma.group == "U(1)":
        tm = HalfInt.of(gamma.name).twice
        return int(abs(tm) <= tj and (tj - tm) % 2 == 0)
    if gamma.group == "SU(2)":
        return int(HalfInt.of(gamma.name).twice == tj)
    table = _table_for(gamma, tj)
    if gamma.name not in table.labels():
        raise InvalidInputError(f"{gamma.name} is not an irrep of {table.name}")
    row = np.array(table.irrep(gamma.name).chars)
    total = 0j
    for cl, x in zip(table.classes, row):
        total += cl.size * np.conj(x) * spin_character(HalfInt(tj), cl.angle)
    return _round_count(total / table.order, "branching multiplicity")


def decompose_spin(j, group: str) -> list[tuple[IrrepLabel, int]]:
    """(Gamma, sigma(Gamma|j)) for every irrep occurring in (j)."""
    tj = HalfInt.of(j).twice
    table = get_group(group)
    if tj % 2 and not table.is_double:
        if table.double_cover is None:
            raise UnsupportedError(f"group {group} has no double cover for half-integer j")
        table = get_group(table.double_cover)
    out = []
    for lab in table.labels():
        n = branching_multiplicity(IrrepLabel(table.name, lab), HalfInt(tj))
        if n:
            out.append((IrrepLabel(table.name, lab), n))
    return out


def frobenius_schur(a: IrrepLabel) -> int:
    """Frobenius-Schur indicator |G|^-1 sum_R chi(R^2): +1 orthogonal,
    -1 symplectic (pseudo-real), 0 complex."""
    if a.group == "U(1)":
        return 1 if HalfInt.of(a.name).twice == 0 else 0
    if a.group == "SU(2)":
        tj = HalfInt.of(a.name).twice
        # Haar average over conjugacy classes diag(e^{it}, e^{-it}), t in [0, pi]
        f = lambda t: spin_character(HalfInt(tj), 4 * t) * (2 / math.pi) * math.sin(t) ** 2
        val, _ = integrate.quad(f, 0.0, math.pi, limit=200)
        return _round_count(complex(val), "Frobenius-Schur indicator")
    table = get_group(a.group)
    if any(cl.square_class_index is None for cl in table.classes):
        raise UnsupportedError(f"group {table.name} carries no class-squaring map")
    row = table.irrep(a.name).chars
    total = sum(cl.size * row[cl.square_class_index] for cl in table.classes)
    return _round_count(complex(total) / table.order, "Frobenius-Schur indicator")


def quasi_momentum(gamma: IrrepLabel) -> HalfInt:
    """Smallest j with sigma(Gamma | j) = 1 (search bounded at j = 30)."""
    if gamma.group == "U(1)":
        return abs(HalfInt.of(gamma.name))
    if gamma.group == "SU(2)":
        return HalfInt.of(gamma.name)
    for tj in range(0, 2 * QUASI_MOMENTUM_BOUND + 1):
        table = get_group(gamma.group)
        if tj % 2 and not table.is_double and table.double_cover is None:
            continue
        if branching_multiplicity(gamma, HalfInt(tj)) == 1:
            return HalfInt(tj)
    raise UnsupportedError(f"no j <= {QUASI_MOMENTUM_BOUND} contains {gamma.name} exactly once")


def identity_irrep(group: str) -> IrrepLabel:
    if group in _CONTINUOUS:
        return IrrepLabel(group, "0")
    return IrrepLabel(group, get_group(group).irreps[0].label)
