"""Command-line entry point.

Exit codes: 0 success, 1 mathematical failure (not a monad, unstable,
refuted, residual over tolerance), 2 usage or input-format error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import connections as conn
from .complexes import ComplexNotExact, DegreeMismatch, TwistTerm, UnsupportedTerm, line
from .exact_field import Field, FieldMismatch
from .extensions import (RangeError, ShapeError, StageFailed, TowerSpec, build_tower,
                         class_of_f, cohomology_ext, extension_monad, split_last,
                         stability_check, term_table)
from .graded import HomogeneousForm, form_from_json
from .lines import check_real_triviality, scan_lines
from .monad import (ComplexConditionFailed, GenerationFailed, Monad, NotValidated, cohomology,
                    gen_instanton_syzygy, gen_null_correlation, validate_monad)
from .omega import OmegaSection

SEED_ENV = "MONADFORGE_SEED"


class UsageError(Exception):
    pass


class MathFailure(Exception):
    def __init__(self, msg, payload=None):
        super().__init__(msg)
        self.payload = payload


# ---------------------------------------------------------------------------
# helpers


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _field(args):
    try:
        return Field.from_spec(args.field)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read_json(path):
    if path is None:
        raise UsageError("--in is required")
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from None


def _read_monad(args):
    obj = _read_json(args.inp)
    try:
        return Monad.from_json(obj)
    except ComplexConditionFailed as e:
        raise MathFailure(f"not a complex: {e}") from None
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise UsageError(f"malformed monad JSON: {e!r}") from None


def _emit(args, obj):
    text = json.dumps(obj, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _random_f(M, kind, k, rng):
    degree = k - M.left.twist
    if kind == "line":
        return [HomogeneousForm.random(M.field, degree, rng) for _ in range(M.n)]
    p = 1 if kind == "omega1" else 2
    return [OmegaSection.random(M.field, p, degree, rng) for _ in range(M.n)]


def _term(kind, k):
    return TwistTerm(kind, 1, k)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    field = _field(args)
    if args.type == "null-correlation":
        M = gen_null_correlation(field)
    else:
        if args.n is None or args.n < 1:
            raise UsageError("--n must be a positive integer for instanton generation")
        try:
            M = gen_instanton_syzygy(args.n, seed=_seed(args), field=field, d_max=args.dmax)
        except GenerationFailed as e:
            raise MathFailure(str(e), {"error": str(e), "stats": e.stats}) from None
    _emit(args, M.to_json())


def cmd_validate(args):
    M = _read_monad(args)
    rep = validate_monad(M, d_max=args.dmax, seed=_seed(args))
    _emit(args, rep.to_json())
    if not rep.certified:
        raise MathFailure("monad not certified")


def cmd_cohom(args):
    M = _read_monad(args)
    if args.tmin > args.tmax:
        raise UsageError("--tmin must not exceed --tmax")
    try:
        if M.has_omega:
            table = cohomology_ext(M, args.tmin, args.tmax, force=args.force, d_max=args.dmax)
        else:
            table = cohomology(M, args.tmin, args.tmax, force=args.force, d_max=args.dmax)
    except NotValidated as e:
        raise MathFailure(str(e)) from None
    except (ComplexNotExact, UnsupportedTerm) as e:
        raise MathFailure(str(e), {"error": str(e)}) from None
    if args.text:
        print(table.format())
    else:
        _emit(args, table.to_json())


def _read_f(M, args, k):
    if args.f is None:
        return _random_f(M, args.kind, k, np.random.default_rng(_seed(args)))
    arr = _read_json(args.f)
    if args.kind == "line":
        return [form_from_json(M.field, a, k - M.left.twist) for a in arr]
    return [OmegaSection.from_json(M.field, a) for a in arr]


def cmd_extend(args):
    M = _read_monad(args)
    try:
        f = _read_f(M, args, args.k)
        E = extension_monad(M, _term(args.kind, args.k), f)
    except (RangeError, ShapeError, DegreeMismatch) as e:
        raise UsageError(str(e)) from None
    if not args.no_validate:
        rep = validate_monad(E, d_max=args.dmax, seed=_seed(args))
        if not rep.certified:
            _emit(args, {"monad": E.to_json(), "validation": rep.to_json()})
            raise MathFailure("extension monad not certified")
    _emit(args, E.to_json())


def _alt(table, t):
    return sum((-1) ** i * h for i, h in enumerate(table.row(t)))


def cmd_tower(args):
    obj = _read_json(args.inp)
    if "base" not in obj and not args.steps:
        raise UsageError("give --steps k1,k2,... or a tower spec")
    try:
        if "base" in obj:
            spec = TowerSpec.from_json(obj)
        else:
            base = Monad.from_json(obj)
            rng = np.random.default_rng(_seed(args))
            ks = [int(s) for s in args.steps.split(",")]
            spec = TowerSpec(base, [(k, [HomogeneousForm.random(base.field, k - base.left.twist,
                                                                rng) for _ in range(base.n)])
                                    for k in ks])
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"malformed tower input: {e!r}") from None
    try:
        stages = build_tower(spec, d_max=args.dmax)
    except StageFailed as e:
        raise MathFailure(f"stage {e.args[0]} failed", {"stage": e.args[0]}) from None
    except (RangeError, DegreeMismatch) as e:
        raise UsageError(str(e)) from None
    t0, t1 = args.tmin, args.tmax
    tables = [cohomology_ext(S, t0, t1, force=True) for S in stages]
    additive = True
    for i, (k, _) in enumerate(spec.steps):
        tk = term_table(spec.base.field, line(1, k), t0, t1)
        for t in range(t0, t1 + 1):
            if _alt(tables[i + 1], t) != _alt(tables[i], t) + _alt(tk, t):
                additive = False
    _emit(args, {"spec": spec.to_json(), "stages": [S.to_json() for S in stages],
                 "tables": [tb.to_json() for tb in tables], "chi_additive": additive})
    if not additive:
        raise MathFailure("Euler characteristics are not additive")


def cmd_class(args):
    E = _read_monad(args)
    try:
        base, f, k = split_last(E)
        cls = class_of_f(base, k, f)
    except (ShapeError, RangeError) as e:
        raise UsageError(str(e)) from None
    out = cls.to_json()
    out.update({"zero": cls.is_zero(), "quotient_dim": cls.quotient_dim})
    _emit(args, out)


def cmd_stability(args):
    E = _read_monad(args)
    try:
        rep = stability_check(E)
    except ShapeError as e:
        raise UsageError(str(e)) from None
    _emit(args, rep.to_json())
    if not rep.stable:
        raise MathFailure("extension is not stable")


def cmd_scan(args):
    M = _read_monad(args)
    res = scan_lines(M, count=args.count, seed=_seed(args), pencils=args.pencils)
    _emit(args, res)


def cmd_real(args):
    M = _read_monad(args)
    try:
        ok, info = check_real_triviality(M, samples=args.samples, seed=_seed(args))
    except FieldMismatch as e:
        raise UsageError(f"{e}; generate the monad with --field rational") from None
    _emit(args, {"trivial_on_real_lines": ok, **info})
    if not ok:
        raise MathFailure("found a real line with nontrivial splitting")


def cmd_conn_demo(args):
    rep = conn.lab_report(rho=args.rho, h=args.h, count=args.count, seed=_seed(args))
    _emit(args, rep)
    r = rep["residuals"]
    if r["asd"] > args.tol or r["gauge"] > args.tol or r["dirac"] > 1e-3:
        raise MathFailure("residual above tolerance")


def cmd_dirac(args):
    A = conn.bpst_connection(rho=args.rho)
    psi = conn.bpst_zero_mode(args.rho)
    pts = conn.standard_points(args.count, _seed(args))
    coarse = [conn.dirac_residual(A, psi, x, args.h) for x in pts]
    fine = [conn.dirac_residual(A, psi, x, args.h / 2) for x in pts]
    ratio = max(coarse) / max(fine) if max(fine) > 0 else float("inf")
    _emit(args, {"points": pts.tolist(), "h": args.h,
                 "residuals": {"dirac": max(coarse), "dirac_half_h": max(fine)},
                 "refinement_ratio": ratio})
    if max(coarse) > 1e-3:
        raise MathFailure("zero mode residual above tolerance")


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="prime:32003",
                        help="prime:<p> | rational | gaussian (default prime:32003)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed; {SEED_ENV} is used when absent")
    common.add_argument("--dmax", type=int, default=None, help="saturation degree bound")
    common.add_argument("--in", dest="inp", default=None, help="input JSON ('-' for stdin)")
    common.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = argparse.ArgumentParser(prog="monadforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a monad")
    g.add_argument("--type", choices=["null-correlation", "instanton"], default="null-correlation")
    g.add_argument("--n", type=int, default=None, help="charge for --type instanton")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", parents=[common], help="certify or refute a monad")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("cohom", parents=[common], help="cohomology table")
    c.add_argument("--tmin", type=int, default=-3)
    c.add_argument("--tmax", type=int, default=3)
    c.add_argument("--force", action="store_true", help="skip validation")
    c.add_argument("--text", action="store_true", help="print an aligned table")
    c.set_defaults(func=cmd_cohom)

    e = sub.add_parser("extend", parents=[common], help="extend by O(k), Omega^1(k) or Omega^2(k)")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--kind", choices=["line", "omega1", "omega2"], default="line")
    e.add_argument("--f", default=None, help="JSON list of entries of f; random when absent")
    e.add_argument("--no-validate", action="store_true")
    e.set_defaults(func=cmd_extend)

    t = sub.add_parser("tower", parents=[common], help="iterated line-bundle extensions")
    t.add_argument("--steps", default=None, help="comma-separated twists, e.g. -1,0")
    t.add_argument("--tmin", type=int, default=-3)
    t.add_argument("--tmax", type=int, default=3)
    t.set_defaults(func=cmd_tower)

    k = sub.add_parser("class", parents=[common], help="extension class of the last step")
    k.set_defaults(func=cmd_class)

    s = sub.add_parser("stability", parents=[common], help="stability of an extension by O(-1)")
    s.set_defaults(func=cmd_stability)

    sl = sub.add_parser("scan-lines", parents=[common], help="splitting types on random lines")
    sl.add_argument("--count", type=int, default=200)
    sl.add_argument("--pencils", type=int, default=4)
    sl.set_defaults(func=cmd_scan)

    r = sub.add_parser("real-check", parents=[common], help="triviality on real lines")
    r.add_argument("--samples", type=int, default=50)
    r.set_defaults(func=cmd_real)

    for name, func, helptext in (("conn-demo", cmd_conn_demo, "BPST residual sweep"),
                                 ("dirac-check", cmd_dirac, "zero-mode Dirac residuals")):
        d = sub.add_parser(name, parents=[common], help=helptext)
        d.add_argument("--rho", type=float, default=1.0)
        d.add_argument("--h", type=float, default=1e-3)
        d.add_argument("--count", type=int, default=20)
        d.add_argument("--tol", type=float, default=1e-6)
        d.set_defaults(func=func)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if getattr(args, "h", 1.0) <= 0 or getattr(args, "rho", 1.0) <= 0:
            raise UsageError("--h and --rho must be positive")
        args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except MathFailure as e:
        print(f"failure: {e}", file=sys.stderr)
        return 1
    return 0


run = main

if __name__ == "__main__":
    sys.exit(main())
