"""Command-line front end: ``racahcf <command> ...``.

Payloads go to stdout as JSON (CSV for level lists and V tables),
diagnostics to stderr.  Exit codes: 0 ok, 2 invalid input, 3 unsupported,
1 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction

from . import chain, crystalfield, mub, wigner
from .chain import ChainLabel
from .errors import ConsistencyError, InvalidInputError, UnsupportedError
from .exactnum import ExactComplex, HalfInt, SqrtRationalSum


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidInputError(message)


def _half(text: str) -> HalfInt:
    return HalfInt.of(text)


def _chain_label(text: str) -> ChainLabel:
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidInputError(f"chain label must look like a:irrep:gamma, got {text!r}")
    try:
        return ChainLabel(int(parts[0]), parts[1], int(parts[2]))
    except ValueError as exc:
        raise InvalidInputError(f"bad chain label {text!r}") from exc


def _number(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else float(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def _scalar_payload(value, exact: bool) -> dict:
    if isinstance(value, SqrtRationalSum):
        out = {"value": value.to_float()}
        if exact:
            out["exact"] = value.to_json()
            out["text"] = str(value)
        return out
    if isinstance(value, ExactComplex):
        z = complex(value)
        out = {"value": {"re": z.real, "im": z.imag}}
        if exact:
            out["exact"] = value.to_json()
            out["text"] = str(value)
        return out
    z = complex(value)
    if exact:
        snapped = chain.snap(z)
        if isinstance(snapped, ExactComplex):
            return {"value": {"re": z.real, "im": z.imag}, "exact": snapped.to_json(), "text": str(snapped)}
    return {"value": {"re": z.real, "im": z.imag}}


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


# ------------------------------------------------------------ commands


def _cmd_wigner(args) -> str:
    js = [_half(x) for x in args.j]
    ms = [_half(x) for x in (args.m or [])]
    kind = args.kind
    if kind == "3jm":
        _need(js, 3, ms, 3)
        value = wigner.three_jm(js[0], js[1], js[2], ms[0], ms[1], ms[2])
    elif kind == "cg":
        _need(js, 3, ms, 3)
        value = wigner.cg(js[0], ms[0], js[1], ms[1], js[2], ms[2])
    elif kind == "6j":
        _need(js, 6, ms, 0)
        value = wigner.six_j(*js)
    else:
        _need(js, 9, ms, 0)
        value = wigner.nine_j([js[0:3], js[3:6], js[6:9]])
    out = {"symbol": kind, "j": [str(j) for j in js]}
    if ms:
        out["m"] = [str(m) for m in ms]
    out.update(_scalar_payload(value, args.exact))
    return _dump(out)


def _need(js, nj, ms, nm):
    if len(js) != nj or len(ms) != nm:
        raise InvalidInputError(f"expected {nj} j values and {nm} m values")


def _cmd_reduce(args) -> str:
    table = chain.reduce_representation(_half(args.j), args.group, variant=args.variant, r=args.r, a=args.a)
    data = table.to_json()
    if not args.exact:
        for e in data["entries"]:
            e.pop("exact", None)
    return _dump(data)


def _cmd_fsym(args) -> str:
    j1, j2, k = (_half(x) for x in args.j)
    value = chain.f_symbol(j1, j2, k, _chain_label(args.c1), _chain_label(args.c2), _chain_label(args.c), args.group,
                           variant=args.variant, exact=args.exact)
    return _dump(_scalar_payload(value, args.exact))


def _cmd_fbar(args) -> str:
    j1, j2, j3 = (_half(x) for x in args.j)
    value = chain.fbar_symbol(j1, j2, j3, _chain_label(args.c1), _chain_label(args.c2), _chain_label(args.c3),
                              args.group, variant=args.variant, exact=args.exact)
    return _dump(_scalar_payload(value, args.exact))


def _component(irrep: str, gamma: int) -> str:
    names = chain.COMPONENT_NAMES.get(irrep)
    return names[gamma] if names and gamma < len(names) else str(gamma)


def _cmd_vsym(args) -> str:
    if args.group != "O":
        raise UnsupportedError("V tables are built for O only")
    phases = chain.PHASE_PRESETS[args.phases]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["irrep1", "irrep2", "irrep3", "comp1", "comp2", "comp3", "value_re", "value_im"]
    w.writerow(head + (["exact"] if args.exact else []))
    for g1, g2, g3, c1, c2, c3, value in chain.v_table_rows(args.group, phases, args.variant):
        z = complex(value)
        row = [g1, g2, g3, _component(g1, c1), _component(g2, c2), _component(g3, c3), repr(z.real), repr(z.imag)]
        if args.exact:
            s = chain.snap(z)
            row.append(str(s) if isinstance(s, ExactComplex) else "")
        w.writerow(row)
    return buf.getvalue()


def _sweep_points(spec: str | None):
    if not spec:
        return [None]
    try:
        name, lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise InvalidInputError("sweep must look like Dq:lo:hi:n") from exc
    if name != "Dq":
        raise UnsupportedError("only Dq sweeps are available")
    if n < 1:
        raise InvalidInputError("sweep needs at least one point")
    if n == 1:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _cmd_cf(args) -> str:
    base = crystalfield.load_parameter_file(args.params)
    basis = crystalfield.enumerate_basis(base.ell, base.n, base.group, variant=args.variant)
    results = []
    for dq in _sweep_points(args.sweep):
        pset = base
        if dq is not None:
            pset = crystalfield.CfParameterSet(base.ell, base.n, base.group, base.coulomb, base.zeta,
                                               crystalfield.cubic_bkq(dq, base.ell))
        results.append((dq, pset.total(basis, variant=args.variant)))
    if args.kind == "matrix":
        payload = []
        for dq, m in results:
            item = m.to_json()
            if dq is not None:
                item["Dq"] = dq
            payload.append(item)
        return _dump(payload if args.sweep else payload[0])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["energy", "irrep", "degeneracy"]
    w.writerow((["Dq"] if args.sweep else []) + head)
    for dq, m in results:
        levels = crystalfield.diagonalize_levels(m)
        for lv in levels:
            w.writerow(([repr(dq)] if args.sweep else []) + [repr(lv.energy), "+".join(lv.irreps), lv.degeneracy])
    return buf.getvalue()


def _parse_values(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(Fraction(tok))
        except ValueError as exc:
            raise InvalidInputError(f"bad value {tok!r}") from exc
    return out


def _cmd_params(args) -> str:
    if args.kind == "convert":
        values = _parse_values(args.values)
        ell = args.ell if args.ell is not None else len(values) - 1
        src = crystalfield.CoulombParams(ell, args.source, tuple(values))
        dst = crystalfield.convert_coulomb_params(src, args.target)
        if args.exact:
            return _dump({k: str(v) for k, v in dst.as_dict().items()})
        return _dump({k: _number(v) for k, v in dst.as_dict().items()})
    labels = crystalfield.enumerate_effective_params(args.ell, args.group, args.family, restricted=args.restricted)
    return _dump([
        {"label": str(x), "family": _family(x), "k1": str(x.k1), "k2": str(x.k2), "kS": x.kS, "k3": x.k3,
         "k4": x.k4, "kL": x.kL, "k": x.k, "a0": x.a0}
        for x in labels
    ])


def _family(lab) -> str:
    if not lab.one_body:
        return "coulomb"
    return "spin-orbit" if lab.kS == 1 else "ligand-field"


def _cmd_mub(args) -> str:
    if args.kind == "basis":
        return _dump(mub.basis_to_json(mub.MubParams(args.d, args.r, args.a)))
    if args.kind == "report":
        rep = mub.unbiasedness_report(args.d, args.r)
        names = rep["names"]
        pairs = []
        for i in range(len(names)):
            for k in range(i + 1, len(names)):
                pairs.append({"a": names[i], "b": names[k], "min": float(rep["min"][i, k]),
                              "max": float(rep["max"][i, k])})
        return _dump({"d": args.d, "r": args.r, "target": 1 / args.d ** 0.5, "pairs": pairs})
    sets = mub.cartan_partition(args.d)
    return _dump({"p": args.d, "sets": [[[a, b] for a, b in s] for s in sets]})


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--exact", action="store_true", help="emit exact values where available")
    common.add_argument("--variant", choices=chain.VARIANTS, default="standard")

    p = _Parser(prog="racahcf", description="Wigner-Racah algebra, crystal fields and MUBs")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    w = sub.add_parser("wigner", parents=[common], help="3jm, 6j, 9j and CG coefficients")
    w.add_argument("kind", choices=["3jm", "6j", "9j", "cg"])
    w.add_argument("--j", nargs="+", required=True)
    w.add_argument("--m", nargs="*")
    w.set_defaults(func=_cmd_wigner)

    r = sub.add_parser("reduce", parents=[common], help="SU(2) > G reduction coefficients")
    r.add_argument("--group", default="O")
    r.add_argument("--j", required=True)
    r.add_argument("--r", type=float, default=0.0)
    r.add_argument("--a", type=int, default=0)
    r.set_defaults(func=_cmd_reduce)

    f = sub.add_parser("fsym", parents=[common], help="f coupling symbol")
    f.add_argument("--group", default="O")
    f.add_argument("--j", nargs=3, required=True, metavar=("J1", "J2", "K"))
    for name in ("c1", "c2", "c"):
        f.add_argument(f"--{name}", required=True, help="chain label a:irrep:gamma")
    f.set_defaults(func=_cmd_fsym)

    fb = sub.add_parser("fbar", parents=[common], help="symmetrized f symbol")
    fb.add_argument("--group", default="O")
    fb.add_argument("--j", nargs=3, required=True, metavar=("J1", "J2", "J3"))
    for name in ("c1", "c2", "c3"):
        fb.add_argument(f"--{name}", required=True, help="chain label a:irrep:gamma")
    fb.set_defaults(func=_cmd_fbar)

    v = sub.add_parser("vsym", parents=[common], help="V coupling table (CSV)")
    v.add_argument("--group", default="O")
    v.add_argument("--phases", choices=sorted(chain.PHASE_PRESETS), default="default")
    v.set_defaults(func=_cmd_vsym)

    c = sub.add_parser("cf", parents=[common], help="weak-field energy matrices and levels")
    c.add_argument("kind", choices=["matrix", "levels"])
    c.add_argument("--params", required=True, help="parameter file (JSON)")
    c.add_argument("--sweep", help="Dq:lo:hi:n, replaces B^k_q by the cubic set")
    c.set_defaults(func=_cmd_cf)

    pr = sub.add_parser("params", parents=[common], help="Coulomb conversions and effective parameters")
    pr.add_argument("kind", choices=["convert", "enumerate"])
    pr.add_argument("--from", dest="source", default="slater_capital")
    pr.add_argument("--to", dest="target", default="racah")
    pr.add_argument("--values")
    pr.add_argument("--ell", type=int)
    pr.add_argument("--group", default="O")
    pr.add_argument("--family", choices=("all",) + crystalfield.FAMILIES, default="all")
    pr.add_argument("--restricted", action="store_true")
    pr.set_defaults(func=_cmd_params)

    m = sub.add_parser("mub", parents=[common], help="nonstandard bases and MUBs")
    m.add_argument("kind", choices=["basis", "report", "partition"])
    m.add_argument("--d", type=int, required=True)
    m.add_argument("--r", type=float, default=0.0)
    m.add_argument("--a", type=int, default=0)
    m.set_defaults(func=_cmd_mub)
    return p


_NEG_FRACTION = re.compile(r"-\d+/\d+")


def _protect_negative_fractions(argv):
    # argparse only recognises decimal negatives; -3/2 becomes -1.5
    out = []
    for tok in argv:
        if _NEG_FRACTION.fullmatch(tok):
            q = Fraction(tok)
            tok = str(float(q)) if q.denominator <= 2 else tok
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _protect_negative_fractions(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
        if args.command == "params":
            if args.kind == "convert" and not args.values:
                raise InvalidInputError("params convert needs --values")
            if args.kind == "enumerate" and args.ell is None:
                raise InvalidInputError("params enumerate needs --ell")
        out = args.func(args)
    except InvalidInputError as exc:
        print(f"racahcf: error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedError as exc:
        print(f"racahcf: unsupported: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"racahcf: internal error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"racahcf: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
