"""Command-line front end: ``sacksterms <command> ...``.

Objects are read from JSON files, inline JSON, or one of the built-in names
``rdelta``, ``rmult``, ``rcopy`` and ``trivial`` (``figure1`` for trees).
A default verification profile may be named by ``SACKSTERMS_PROFILE``.
"""

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import constructions as C
from .conditions import (
    NotSplittable,
    Trivial,
    evaluate_under,
    split,
    stack,
    term_stronger,
    validate_R,
)
from .conditions import from_json as condition_from_json
from .dot import UnsupportedObject, export_dot
from .ordinals import limits_up_to, parse_ordinal
from .pairing import tau, tau_inv
from .prep import PrepData
from .qstar import Mode, PresentedSubstitution, Window, validate_condition
from .report import _jsonable
from .suites import FIGURE1_LEAVES, Profile, run_suite
from .trees import (
    ClippedTree,
    canonical_terms,
    refinement_substitution,
    search_common_refinement,
    splitting_fronts,
    validate_tree,
)

PROFILE_ENV = "SACKSTERMS_PROFILE"
BUILTIN_CONDITIONS = {
    "rdelta": C.build_r_delta,
    "rmult": C.build_r_mult,
    "rcopy": C.build_r_copy,
    "trivial": Trivial,
}


GLOBAL_DEFAULTS = {
    "window_rows": 10,
    "window_cols": 30,
    "coef_cap": 8,
    "depth": 4,
    "seed": 0,
    "format": "text",
    "profile": lambda: os.environ.get(PROFILE_ENV),
}


class InputError(Exception):
    """Unreadable or malformed input; the message carries the position."""


def load_json(source):
    """Parse a file path or inline JSON text, reporting line and column on failure."""
    path = Path(source)
    try:
        is_file = path.is_file()
    except OSError:
        is_file = False
    label = str(path) if is_file else "<inline>"
    try:
        text = path.read_text() if is_file else source
    except OSError as e:
        raise InputError(f"{source}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{label}:{e.lineno}:{e.colno}: {e.msg}") from None


def load_condition(source):
    if source in BUILTIN_CONDITIONS:
        return BUILTIN_CONDITIONS[source]()
    try:
        return condition_from_json(load_json(source))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"{source}: not a condition ({e})") from None


def load_tree(source):
    if source == "figure1":
        return ClippedTree.from_leaves(3, FIGURE1_LEAVES)
    try:
        return ClippedTree.from_json(load_json(source))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"{source}: not a tree ({e})") from None


def load_substitution(source):
    try:
        return PresentedSubstitution.from_json(load_json(source))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"{source}: not a presented substitution ({e})") from None


def load_profile(path):
    data = load_json(path)
    names = {f.name for f in dataclasses.fields(Profile)}
    unknown = set(data) - names
    if unknown:
        raise InputError(f"{path}: unknown profile fields {sorted(unknown)}")
    return Profile(**data)


def _window(args):
    return Window(rows=args.window_rows, cols=args.window_cols, coef_cap=args.coef_cap)


def _term(t):
    return {"term": str(t), **t.to_json()}


def _emit(args, payload, text=None):
    if args.format == "json":
        print(json.dumps(_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(text if text is not None else _as_text(payload))


def _as_text(payload, indent=""):
    if isinstance(payload, dict):
        lines = []
        for k, v in payload.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}{k}:")
                lines.append(_as_text(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {v}")
        return "\n".join(lines)
    if isinstance(payload, list):
        return "\n".join(f"{indent}- {v}" for v in payload)
    return f"{indent}{payload}"


def _report(args, rep, extra=None):
    payload = rep.to_json()
    if extra:
        payload.update(extra)
    if args.format == "json":
        _emit(args, payload)
    else:
        print("ok" if rep.ok else "FAILED")
        for v in rep.violations:
            print(f"  violation [{v.clause}] at {v.cell}: {v.detail}")
        if rep.unconfirmed:
            print(f"  {len(rep.unconfirmed)} claim(s) unconfirmed inside the window")
        for k, v in sorted(payload["info"].items()):
            print(f"  {k}: {v}")
        for k, v in (extra or {}).items():
            print(f"  {k}: {v}")
    return 0 if rep.ok else 1


# -- commands ---------------------------------------------------------------


def cmd_tau(args):
    if args.inverse is not None:
        n, m = tau_inv(args.inverse)
        _emit(args, {"k": args.inverse, "n": n, "m": m}, f"{args.inverse} = tau({n}, {m})")
        return 0
    if len(args.pair) != 2:
        raise InputError("tau needs two naturals, or --inverse K")
    n, m = args.pair
    _emit(args, {"n": n, "m": m, "tau": tau(n, m)}, str(tau(n, m)))
    return 0


def cmd_ord(args):
    a = parse_ordinal(args.a)
    if args.op == "parse":
        out = a
    elif args.op == "limits":
        out = [str(d) for d in limits_up_to(a, args.coef_cap)]
        _emit(args, {"limits": out}, "\n".join(out))
        return 0
    else:
        if args.b is None:
            raise InputError(f"ord {args.op} needs a second ordinal")
        b = parse_ordinal(args.b)
        if args.op == "add":
            out = a + b
        elif args.op == "sub":
            out = a - b
        else:
            c = (a > b) - (a < b)
            _emit(args, {"cmp": c}, str(c))
            return 0
    _emit(args, {"ordinal": str(out), "cnf": out.to_json()}, str(out))
    return 0


def cmd_tree(args):
    tree = load_tree(args.tree)
    if args.op == "validate":
        rep = validate_tree(tree)
        _emit(args, {"valid": rep.valid, "full_fronts": rep.full_fronts, "errors": rep.errors})
        return 0 if rep.valid else 1
    if args.op == "fronts":
        fronts = splitting_fronts(tree)
        payload = {f"F{f.index}": sorted(f.members) for f in fronts}
        _emit(args, payload)
        return 0
    if args.op == "terms":
        ts = canonical_terms(tree)
        _emit(args, {f"t{i}": _term(t) for i, t in enumerate(ts)}, "\n".join(f"t{i} = {t}" for i, t in enumerate(ts)))
        return 0
    other = load_tree(args.other) if args.other else None
    if other is None:
        raise InputError(f"tree {args.op} needs --other")
    if args.op == "refine":
        wit = refinement_substitution(tree, other)
        _emit(args, {
            "phi": {str(k): _term(v) for k, v in wit.phi.items()},
            "certified": wit.certified,
            "checked": wit.checked,
            "agrees": wit.agrees,
        })
        return 0 if wit.agrees else 1
    common = search_common_refinement(tree, other, args.splits)
    _emit(args, {"found": common is not None, "tree": common.to_json() if common else None})
    return 0 if common is not None else 1


def cmd_qstar(args):
    if args.source == "sigma-rdelta":
        phi = C.build_r_delta().sigma()
    else:
        phi = load_substitution(args.source)
    return _report(args, validate_condition(phi, Mode(args.mode), _window(args)))


def cmd_prep(args):
    delta = parse_ordinal(args.delta)
    coding = PrepData().site(delta, args.n, args.m)
    zetas = [str(z) for z in coding.nu.first(args.count)]
    _emit(args, {"delta": str(delta), "n": args.n, "m": args.m, "nu": zetas}, " ".join(zetas))
    return 0


def cmd_cond(args):
    w = _window(args)
    p = load_condition(args.cond)
    if args.op == "validate":
        return _report(args, validate_R(p, w), {"height": str(p.height)})
    if args.op == "sigma":
        sig = p.sigma()
        rows = [[str(sig.cell(n, m)) for m in range(w.cols)] for n in range(w.rows)]
        _emit(args, {"rows": rows}, "\n".join(" ".join(r) for r in rows))
        return 0
    if args.op == "eval":
        if not args.assignment:
            raise InputError("cond eval needs --assignment")
        data = load_json(args.assignment)
        b = {tuple(int(v) for v in k.split(",")) if "," in k else int(k): v for k, v in data.items()}
        ev = evaluate_under(p, b, w)
        _emit(args, {
            "values": {f"{n}@{a}": v for (n, a), v in sorted(ev.values.items())},
            "symbolic": {f"{n}@{a}": str(t) for (n, a), t in sorted(ev.symbolic.items())},
        })
        return 0
    if args.op == "split":
        try:
            lo, hi = split(p, parse_ordinal(args.at), w)
        except NotSplittable as e:
            _emit(args, {"splittable": False, "reason": str(e)})
            return 1
        _emit(args, {"splittable": True, "lower": lo.to_json(), "upper": hi.to_json()})
        return 0
    if not args.other:
        raise InputError(f"cond {args.op} needs --other")
    q = load_condition(args.other)
    if args.op == "stack":
        _emit(args, stack(p, q).to_json())
        return 0
    return _report(args, term_stronger(p, q, w))


def _entry(args, cond):
    alpha = parse_ordinal(args.alpha)
    t = cond.entry(args.n, alpha)
    _emit(args, {"n": args.n, "alpha": str(alpha), **_term(t)}, str(t))
    return 0


def cmd_rdelta(args):
    return _entry(args, C.build_r_delta())


def cmd_rmult(args):
    return _entry(args, C.build_r_mult())


def cmd_builder(args):
    phi = load_substitution(args.matrix)
    w = _window(args)
    try:
        q = C.matrix_to_condition(C.schedule_matrix(phi), w)
    except C.HypothesisViolation as e:
        _emit(args, {"ok": False, "clause": e.clause, "cell": e.cell, "detail": str(e)})
        return 1
    rep = validate_R(q, w)
    sq = q.sigma()
    inp = C.schedule_matrix(phi)
    for n in range(w.rows):
        for m in range(w.cols):
            if sq.cell(n, m) != inp.cell(n, m):
                rep.add("sigma", (n, m), f"{sq.cell(n, m)} != {inp.cell(n, m)}")
    return _report(args, rep, {"condition": q.to_json()} if args.format == "json" else None)


def cmd_pipeline(args):
    w = _window(args)
    p = load_condition(args.base)
    phi = load_substitution(args.phi)
    try:
        res = C.gurke_pipeline(p, phi, w)
    except C.HypothesisViolation as e:
        _emit(args, {"ok": False, "clause": e.clause, "cell": e.cell, "detail": str(e)})
        return 1
    return _report(args, C.certify_pipeline(res, w), {"q": res.q.to_json()} if args.format == "json" else None)


def cmd_verify(args):
    profile = args.profile_obj
    changes = {"seed": args.seed, "rows": args.window_rows, "cols": args.window_cols, "coef_cap": args.coef_cap,
               "depth": args.depth}
    changes = {k: v for k, v in changes.items() if v is not None and k in args.explicit}
    if args.full:
        changes["full"] = True
    if args.suite:
        changes["suites"] = args.suite
    if args.inject:
        changes["inject"] = args.inject
    profile = dataclasses.replace(profile, **changes)
    print(f"seed {profile.seed}", file=sys.stderr)
    out, code = run_suite(profile)
    if args.format == "json":
        _emit(args, out)
    else:
        for name, rep in out["suites"].items():
            line = f"{'PASS' if rep['ok'] else 'FAIL'} {name}"
            if not rep["ok"]:
                v = rep["violations"][0]
                line += f": [{v['clause']}] at {v['cell']} {v['detail']}"
            print(line)
    return code


def cmd_export(args):
    if args.kind == "tree":
        obj = load_tree(args.source)
    elif args.kind == "fronts":
        obj = splitting_fronts(load_tree(args.source))
    else:
        cond = C.build_r_delta() if args.source == "sigma-rdelta" else load_condition(args.source)
        sig = cond.sigma()
        obj = [[sig.cell(n, m) for m in range(args.window_cols)] for n in range(args.window_rows)]
    sys.stdout.write(export_dot(obj))
    return 0


# -- parser -------------------------------------------------------------------


def build_parser():
    # global flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("window and sampling")
    g.add_argument("--window-rows", type=int, default=argparse.SUPPRESS, help="rows in the window (10)")
    g.add_argument("--window-cols", type=int, default=argparse.SUPPRESS, help="columns in the window (30)")
    g.add_argument("--coef-cap", type=int, default=argparse.SUPPRESS, help="largest CNF coefficient visited (8)")
    g.add_argument("--depth", type=int, default=argparse.SUPPRESS, help="tree depth for exhaustive checks (4)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (0)")
    g.add_argument("--format", choices=["json", "text"], default=argparse.SUPPRESS)
    g.add_argument("--profile", default=argparse.SUPPRESS, help=f"profile JSON (default ${PROFILE_ENV})")
    ap = argparse.ArgumentParser(prog="sacksterms", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)


    p = add("tau", help="pairing function")
    p.add_argument("pair", type=int, nargs="*")
    p.add_argument("--inverse", type=int)
    p.set_defaults(fn=cmd_tau)

    p = add("ord", help="ordinal arithmetic in w^e*c+... notation")
    p.add_argument("op", choices=["parse", "add", "sub", "cmp", "limits"])
    p.add_argument("a")
    p.add_argument("b", nargs="?")
    p.set_defaults(fn=cmd_ord)

    p = add("tree", help="clipped trees: validate, fronts, canonical terms, refinement")
    p.add_argument("op", choices=["validate", "fronts", "terms", "refine", "common"])
    p.add_argument("tree", help="tree JSON {depth, leaves} or 'figure1'")
    p.add_argument("--other")
    p.add_argument("--splits", type=int, default=2)
    p.set_defaults(fn=cmd_tree)

    p = add("qstar", help="validate a presented substitution")
    p.add_argument("source", help="substitution JSON or 'sigma-rdelta'")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="qstar")
    p.set_defaults(fn=cmd_qstar)

    p = add("prep", help="list the default coding positions at a site")
    p.add_argument("delta")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--count", type=int, default=6)
    p.set_defaults(fn=cmd_prep)

    p = add("cond", help="operations on conditions")
    p.add_argument("op", choices=["validate", "stack", "split", "sigma", "stronger", "eval"])
    p.add_argument("cond")
    p.add_argument("--other")
    p.add_argument("--at", default="w")
    p.add_argument("--assignment")
    p.set_defaults(fn=cmd_cond)

    for name, fn in (("rdelta", cmd_rdelta), ("rmult", cmd_rmult)):
        p = add(name, help=f"entries of {name}")
        p.add_argument("op", choices=["entry"])
        p.add_argument("n", type=int)
        p.add_argument("alpha")
        p.set_defaults(fn=fn)

    p = add("builder", help="condition from schedule composed with a substitution")
    p.add_argument("op", choices=["from-matrix"])
    p.add_argument("matrix", help="presented substitution JSON")
    p.set_defaults(fn=cmd_builder)

    p = add("pipeline", help="refinement pipeline with certificates")
    p.add_argument("op", choices=["run"])
    p.add_argument("base", help="condition JSON or built-in name")
    p.add_argument("phi", help="presented substitution JSON")
    p.set_defaults(fn=cmd_pipeline)

    p = add("verify", help="run the verification suites")
    p.add_argument("--full", action="store_true", help="acceptance-size samples")
    p.add_argument("--suite", action="append")
    p.add_argument("--inject", choices=["rdelta-top"])
    p.set_defaults(fn=cmd_verify)

    p = add("export", help="DOT text")
    p.add_argument("kind", choices=["tree", "fronts", "window"])
    p.add_argument("source")
    p.set_defaults(fn=cmd_export)
    return ap


def _explicit_flags(argv):
    names = {"--seed": "seed", "--window-rows": "rows", "--window-cols": "cols", "--coef-cap": "coef_cap",
             "--depth": "depth"}
    return {names[a.split("=")[0]] for a in argv if a.split("=")[0] in names}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    for k, v in GLOBAL_DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v() if callable(v) else v)
    args.explicit = _explicit_flags(argv)
    try:
        args.profile_obj = load_profile(args.profile) if args.profile else Profile()
        if args.profile:
            # profile supplies defaults; flags given on the command line still win
            prof = args.profile_obj
            for flag, field in (("window_rows", "rows"), ("window_cols", "cols"), ("coef_cap", "coef_cap"),
                                ("depth", "depth"), ("seed", "seed")):
                if field not in args.explicit:
                    setattr(args, flag, getattr(prof, field))
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, UnsupportedObject, LookupError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
