"""expmat command line: JSON in, JSON or text out.

Every input document is a JSON object with "schema": 1 and an explicit "p".
Polynomials are coefficient lists (constant term first) and polynomial
matrices are row lists of polynomials. Constant matrices are row lists of ints.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Callable

import numpy as np

from .errors import ExpmatError, SchemaError, ShapeError
from .field import Prime
from .poly import Poly
from .polymat import PolyMatrix, ordered_partition

SCHEMA = 1


# ---------------------------------------------------------------- I/O helpers

def _poly(p: int, data) -> Poly:
    return Poly.from_json(p, data)


def _polys(p: int, data) -> list[Poly]:
    if not isinstance(data, list):
        raise ShapeError("expected a list of polynomials")
    return [_poly(p, f) for f in data]


def _matrix(p: int, data) -> PolyMatrix:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ShapeError("matrix must be a non-empty list of rows")
    if len({len(r) for r in data}) != 1:
        raise ShapeError("matrix rows differ in length")
    return PolyMatrix.from_entries(p, [[_poly(p, e) for e in row] for row in data])


def _const(p: int, data) -> np.ndarray:
    M = np.asarray(data, dtype=np.int64)
    if M.ndim != 2:
        raise ShapeError("constant matrix must be two-dimensional")
    return M % p


def _mat_out(A: PolyMatrix) -> list:
    return [[e.to_json() for e in row] for row in A.entries()]


def _const_out(M) -> list:
    return np.asarray(M, dtype=np.int64).tolist()


def _load(doc: dict, required: set[str], optional: set[str] = frozenset()) -> int:
    """Check the envelope and return p."""
    if not isinstance(doc, dict):
        raise SchemaError("input must be a JSON object")
    if doc.get("schema") != SCHEMA:
        raise SchemaError(f"input must carry \"schema\": {SCHEMA}")
    allowed = {"schema", "p"} | required | set(optional)
    extra = set(doc) - allowed
    if extra:
        raise SchemaError(f"unknown fields: {sorted(extra)}")
    missing = ({"p"} | required) - set(doc)
    if missing:
        raise SchemaError(f"missing fields: {sorted(missing)}")
    if not isinstance(doc["p"], int):
        raise SchemaError("p must be an integer")
    return int(Prime(doc["p"]))


# ---------------------------------------------------------------- commands

def cmd_verify(doc, args):
    from .expcore import verify_exponential
    p = _load(doc, {"A"})
    return {"exponential": verify_exponential(_matrix(p, doc["A"]), args.mode)}


def cmd_factor(doc, args):
    from .expcore import factor_frobenius
    p = _load(doc, {"A"})
    w = factor_frobenius(_matrix(p, doc["A"]))
    return {"parts": [{"e": int(e), "N": _const_out(N)} for e, N in w.frob_parts]}


def cmd_partition(doc, args):
    p = _load(doc, {"A"})
    return {"partition": ordered_partition(_matrix(p, doc["A"]))}


def cmd_triangulate(doc, args):
    from .expcore import triangulate
    p = _load(doc, {"A"})
    A = _matrix(p, doc["A"])
    P = triangulate(A)
    return {"P": _const_out(P), "triangular": _mat_out(A.conj(P))}


def cmd_extract_sym(doc, args):
    from .heisenberg import extract_symmetric, extract_symmetric_recursive
    p = _load(doc, {"a", "b"})
    fn = extract_symmetric_recursive if args.recursive else extract_symmetric
    return {"S": _const_out(fn(_polys(p, doc["a"]), _polys(p, doc["b"])))}


def cmd_heis_build(doc, args):
    from .heisenberg import HeisExpData, HeisProfile, heis_build
    p = _load(doc, {"m", "profile", "S", "a1", "a2", "alpha2", "alpha"})
    prof = doc["profile"]
    if not isinstance(prof, list) or len(prof) != 3:
        raise ShapeError("profile must be [ell, r1, r2]")
    pr = HeisProfile(int(doc["m"]), *map(int, prof))
    S = np.asarray(doc["S"], dtype=np.int64).reshape(pr.r1, pr.r1)
    d = HeisExpData(pr, S, _polys(p, doc["a1"]), _polys(p, doc["a2"]),
                    _polys(p, doc["alpha2"]), _poly(p, doc["alpha"]))
    return {"matrix": _mat_out(heis_build(d))}


def cmd_classify_daleth(doc, args):
    from .heisenberg import classify_daleth
    p = _load(doc, {"A"})
    c = classify_daleth(_matrix(p, doc["A"]))
    out = c.to_json()
    out["P"] = _const_out(c.P)
    out["normal_form"] = _mat_out(c.matrix())
    return out


def _label_out(L, P, T) -> dict:
    out = L.to_json()
    out["P"] = _const_out(P)
    out["template"] = _mat_out(T)
    return out


def cmd_canon4(doc, args):
    from .classify4 import canonical_template, classify4
    p = _load(doc, {"A"})
    L, P = classify4(_matrix(p, doc["A"]))
    return _label_out(L, P, canonical_template(L))


def decide(A: PolyMatrix, B: PolyMatrix, oracle: bool = False) -> tuple[str, np.ndarray | None]:
    """Pick a structured decider when both matrices share a recognised shape,
    otherwise fall back to the brute-force search."""
    from .errors import NotHeisenbergError
    from .heisenberg import equiv_heis_matrices, eta_inv
    from .oracle import brute_equiv
    from .stripes import ablock_from_matrix, equiv_ablock, stripe_form_of
    from . import stripes

    if A.shape != B.shape or A.p != B.p:
        raise ShapeError("matrices must have the same size and p")
    if oracle:
        return "oracle", brute_equiv(A, B)
    sa, sb = stripe_form_of(A), stripe_form_of(B)
    if sa is not None and sb is not None and (sa.n, sa.kind) == (sb.n, sb.kind):
        fn = {"J_n": stripes.equiv_J_n, "J_n1_0": stripes.equiv_J_n1_0,
              "J_n1_1": stripes.equiv_J_n1_1, "J_1n_1": stripes.equiv_J_1n_1}[sa.kind]
        w = fn(sa, sb)
        return f"stripe:{sa.kind}", None if w is None else w.P
    n = A.n
    for i1 in range(1, n):
        for i3 in range(1, n - i1 + 1):
            i2 = n - i1 - i3
            try:
                a, b = ablock_from_matrix(A, i1, i2, i3), ablock_from_matrix(B, i1, i2, i3)
            except ShapeError:
                continue
            w = equiv_ablock(a, b)
            return f"ablock:{i1},{i2},{i3}", None if w is None else w.P
    if n >= 3:
        try:
            eta_inv(A), eta_inv(B)
        except NotHeisenbergError:
            pass
        else:
            return "heisenberg", equiv_heis_matrices(A, B)
    return "oracle", brute_equiv(A, B)


def cmd_equiv(doc, args):
    p = _load(doc, {"A", "B"})
    route, P = decide(_matrix(p, doc["A"]), _matrix(p, doc["B"]), args.oracle)
    return {"equivalent": P is not None, "route": route,
            "P": None if P is None else _const_out(P)}


def _rep(p: int, doc) -> "Rep":
    from .modrep import Rep
    gens = doc["gens"]
    if not isinstance(gens, list) or not gens:
        raise ShapeError("gens must be a non-empty list of matrices")
    mats = [_const(p, U) for U in gens]
    n = int(doc.get("n", mats[0].shape[0]))
    return Rep(p, n, mats)


def cmd_rep2exp(doc, args):
    from .modrep import rep_to_exp
    p = _load(doc, {"gens"}, {"n"})
    return {"matrix": _mat_out(rep_to_exp(_rep(p, doc)))}


def cmd_exp2rep(doc, args):
    from .modrep import exp_to_rep
    p = _load(doc, {"A"})
    R = exp_to_rep(_matrix(p, doc["A"]))
    return {"n": R.n, "r": R.r, "gens": [_const_out(U) for U in R.gens]}


def cmd_classify_rep4(doc, args):
    from .classify4 import canonical_template
    from .modrep import classify_rep4
    p = _load(doc, {"gens"}, {"n"})
    L, P = classify_rep4(_rep(p, doc))
    return _label_out(L, P, canonical_template(L))


def cmd_enumerate(doc, args):
    from .classify4 import enumerate_classes, regime
    p = int(Prime(args.p))
    return {"p": p, "regime": regime(p), "classes": enumerate_classes(p)}


def cmd_certify_disjoint(doc, args):
    from .oracle import certify_disjoint
    p = _load(doc, {"a", "b"}, {"seed"})
    ra = [_matrix(p, A) for A in doc["a"]]
    rb = [_matrix(p, B) for B in doc["b"]]
    out = certify_disjoint(ra, rb, seed=int(doc.get("seed", 0)))
    out["disjoint"] = not out["violations"]
    return out


COMMANDS: dict[str, tuple[Callable, str]] = {
    "verify": (cmd_verify, "check that A(T)A(T') = A(T+T')"),
    "factor": (cmd_factor, "factor into Frobenius-twisted truncated exponentials"),
    "partition": (cmd_partition, "ordered partition of an upper unipotent matrix"),
    "triangulate": (cmd_triangulate, "constant P making P^-1 A P upper unipotent"),
    "extract-sym": (cmd_extract_sym, "symmetric S with b = a S"),
    "heis-build": (cmd_heis_build, "Heisenberg exponential from profile data"),
    "classify-daleth": (cmd_classify_daleth, "daleth type and normal form"),
    "canon4": (cmd_canon4, "4x4 class label, conjugator and template"),
    "equiv": (cmd_equiv, "decide constant conjugacy of A and B"),
    "rep2exp": (cmd_rep2exp, "representation to exponential matrix"),
    "exp2rep": (cmd_exp2rep, "exponential matrix to representation"),
    "classify-rep4": (cmd_classify_rep4, "class of a 4-dimensional representation"),
    "enumerate": (cmd_enumerate, "class descriptors for a prime"),
    "certify-disjoint": (cmd_certify_disjoint, "brute-force check that two lists share no class"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="expmat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--json", action="store_true", help="emit JSON instead of text")
        if name == "enumerate":
            sp.add_argument("-p", type=int, required=True)
            continue
        sp.add_argument("input", nargs="?", default="-", help="input file, '-' for stdin")
        if name == "verify":
            sp.add_argument("--mode", choices=("bivariate", "coefficientwise"), default="bivariate")
        if name == "equiv":
            sp.add_argument("--oracle", action="store_true", help="force the brute-force search")
        if name == "extract-sym":
            sp.add_argument("--recursive", action="store_true")
    return ap


def _read(path: str) -> Any:
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from None


def _text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines += _text(v, indent + 1)
        else:
            lines.append(f"{pad}{k}: {json.dumps(v, sort_keys=True)}")
    return lines


def emit(obj: dict, as_json: bool, stream) -> None:
    if as_json:
        stream.write(json.dumps(obj, sort_keys=True) + "\n")
    else:
        stream.write("\n".join(_text(obj)) + "\n")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    fn = COMMANDS[args.command][0]
    try:
        doc = None if args.command == "enumerate" else _read(args.input)
        out = fn(doc, args)
    except ExpmatError as e:
        err = {"schema": SCHEMA, **e.to_json()}
        emit(err, args.json, sys.stdout)
        return e.exit_code
    except OSError as e:
        emit({"schema": SCHEMA, "error": "io", "message": str(e)}, args.json, sys.stdout)
        return 2
    emit({"schema": SCHEMA, **out}, args.json, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
