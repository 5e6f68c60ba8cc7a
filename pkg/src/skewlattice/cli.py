"""Command line: reduce, verify, signature, oracle shortest, gen, constants."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ._linalg import LatticeError
from .algebra import AlgebraError
from .exactfield import FieldError
from .harness import (
    InstanceError,
    gen_instance,
    oracle_shortest,
    parse_instance,
    reduce_instance,
    serialize,
    verify_cert,
)
from .hermforms import FormError, weakly_unitary_dbasis
from .realmodels import ModelError, alpha_eps_normalize, real_model, signature_of
from .reduction import constants_table

INPUT_ERRORS = (InstanceError, AlgebraError, FieldError, FormError, ModelError, LatticeError,
                FileNotFoundError, json.JSONDecodeError, ValueError)


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _reduce_one(path: str) -> dict:
    inst = parse_instance(path)
    cert = reduce_instance(inst)
    return cert.to_json()


def cmd_reduce(args) -> int:
    paths = args.instances
    if len(paths) == 1:
        cert = _reduce_one(paths[0])
        _emit(cert, args.output)
        return 0 if all(cert["flags"].values()) else 1
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            certs = list(pool.map(_reduce_one, paths))
    else:
        certs = [_reduce_one(p) for p in paths]
    lines = [json.dumps({"instance": p, "passed": all(c["flags"].values()), "certificate": c})
             for p, c in zip(paths, certs)]
    text = "\n".join(lines)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0 if all(all(c["flags"].values()) for c in certs) else 1


def cmd_verify(args) -> int:
    inst = parse_instance(args.instance)
    cert = json.loads(Path(args.certificate).read_text())
    report = verify_cert(inst, cert)
    _emit(report.to_json(), args.output)
    return 0 if report.passed else 1


def _complex_str(z: complex, digits: int) -> str:
    # drop signed zeros
    re, im = (0.0 if x == 0 else x for x in (z.real, z.imag))
    return f"{re:.{digits}g}{im:+.{digits}g}i"


def cmd_signature(args) -> int:
    inst = parse_instance(args.instance)
    if inst.alg.albert_type != "IV":
        raise InstanceError("signatures are defined for type IV algebras only")
    model = real_model(inst.alg)
    basis = weakly_unitary_dbasis(inst.form)
    sig = signature_of(inst.form, model, basis)
    norm = alpha_eps_normalize(inst.form, basis, model)
    print("signature", tuple(int(r) for r in sig))
    e, m = norm.sign.signs.shape[:2]
    for i in range(e):
        print(f"sign matrix, component {i + 1}")
        blocks = [norm.sign.block(i, j) for j in range(m)]
        full = np.zeros((sum(b.shape[0] for b in blocks),) * 2, dtype=complex)
        k = 0
        for b in blocks:
            s = b.shape[0]
            full[k:k + s, k:k + s] = b
            k += s
        for row in full:
            print(" ".join(_complex_str(z, args.precision) for z in row))
    return 0


def cmd_oracle(args) -> int:
    gram = json.loads(Path(args.gram).read_text()) if Path(args.gram).exists() else json.loads(args.gram)
    vectors = oracle_shortest(gram, args.bound)
    _emit([list(v) for v in vectors], args.output)
    return 0


def cmd_gen(args) -> int:
    if args.count == 1:
        inst = gen_instance(args.type, args.d, args.e, args.m, args.height, args.seed)
        _emit(serialize(inst), args.output)
        return 0
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        seed = args.seed + k
        inst = gen_instance(args.type, args.d, args.e, args.m, args.height, seed)
        name = f"{args.type}_d{args.d}_e{args.e}_m{args.m}_h{args.height}_s{seed}.json"
        (out / name).write_text(json.dumps(serialize(inst), indent=1) + "\n")
    return 0


def cmd_constants(args) -> int:
    c = constants_table(args.type, args.d, args.e, args.m)
    _emit(c.to_json(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skewlattice", description="weakly unitary bases of skew-Hermitian lattices")
    p.add_argument("--seed", type=int, default=0, help="random seed for generated instances")
    p.add_argument("--precision", type=int, default=6, help="significant digits for printed decimals")
    p.add_argument("--parallel", type=int, default=1, help="worker processes for batch runs")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", help="compute a weakly unitary basis and its certificate")
    r.add_argument("instances", nargs="+")
    r.add_argument("-o", "--output")
    r.add_argument("--parallel", type=int, default=argparse.SUPPRESS)
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="recheck a certificate against its instance")
    v.add_argument("instance")
    v.add_argument("certificate")
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("signature", help="signature and sign matrix of a type IV form")
    s.add_argument("instance")
    s.set_defaults(func=cmd_signature)

    o = sub.add_parser("oracle", help="brute-force reference computations")
    osub = o.add_subparsers(dest="oracle", required=True)
    sv = osub.add_parser("shortest", help="all nonzero v with v G v^T <= bound")
    sv.add_argument("gram", help="JSON matrix or a path to one")
    sv.add_argument("bound")
    sv.add_argument("-o", "--output")
    sv.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="random instance")
    g.add_argument("--type", choices=["III", "IV"], required=True)
    g.add_argument("-d", type=int, default=None)
    g.add_argument("-e", type=int, default=1)
    g.add_argument("-m", type=int, default=1)
    g.add_argument("--height", type=int, default=10)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("constants", help="exact constants of the height bound")
    c.add_argument("--type", choices=["III", "IV"], required=True)
    c.add_argument("-d", type=int, default=None)
    c.add_argument("-e", type=int, default=1)
    c.add_argument("-m", type=int, default=1)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_constants)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "d", None) is None and hasattr(args, "type"):
        args.d = 2 if args.type == "III" else 1
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
