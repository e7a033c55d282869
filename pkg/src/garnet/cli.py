"""Command line front end.

Every subcommand reads JSON inputs, runs one job, prints a short human
summary to standard output, and writes a machine report to --output.
Reports are serialized with sorted keys and a fixed indent so identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import density as dn
from .arrows import ArrowObj, EndoData, FinSetAmbient, PresheafAmbient, Square
from .awfs import (GeneratedAWFS, factorization_to_json,
                   find_lifting_structures, has_rlp, quillen_factorize,
                   replay, solve_lifting, structure_to_json, trace_from_json,
                   verify_trace)
from .density import arrow_diagram_from_json, validate_diagram
from .errors import (EnumerationCap, GarnetError, IterationLimit,
                     MalformedInput)
from .fincat import category_from_json, category_to_json, validate_category
from .finset import FinFunction, FinSet
from .freemonad import DEFAULT_MAX_STEPS, Backdrop
from .presheaf import presheaf_from_json, validate_presheaf

FORMAT = 1

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_LIMIT = 2
EXIT_NO_STRUCTURE = 3
EXIT_CAP = 4
EXIT_INTERNAL = 5


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cap(args):
    if args.cap is not None:
        return args.cap
    env = os.environ.get("GARNET_CAP")
    return int(env) if env else None


def _ambient(args):
    if args.ambient == "finset":
        return FinSetAmbient(), {"kind": "finset"}
    if not args.base:
        raise MalformedInput("a presheaf ambient needs --base")
    base = category_from_json(_read_json(args.base))
    return PresheafAmbient(base), {"kind": "presheaf",
                                   "base": category_to_json(base)}


def _ambient_from_spec(spec):
    if spec.get("kind") == "finset":
        return FinSetAmbient()
    if spec.get("kind") == "presheaf":
        return PresheafAmbient(category_from_json(spec["base"]))
    raise MalformedInput("unknown ambient kind in report")


def _generators(args, inner):
    if args.generators == "subobject_classifier":
        return arrow_diagram_from_json("subobject_classifier", inner)
    return arrow_diagram_from_json(_read_json(args.generators), inner)


def _map(args, inner):
    data = _read_json(args.map)
    if isinstance(data, dict) and "mor" in data:
        data = data["mor"]
    return ArrowObj(inner, dn._mor_from_json(inner, data))


def _session(args):
    inner, spec = _ambient(args)
    u = _generators(args, inner)
    f = _map(args, inner)
    aw = GeneratedAWFS(
        u, backdrop=Backdrop(args.backdrop), cap=_cap(args),
        max_steps=args.max_steps if args.max_steps is not None
        else DEFAULT_MAX_STEPS)
    return inner, spec, aw, f


def _shape(inner, g: ArrowObj) -> str:
    return f"{inner.obj_size(g.dom)} -> {inner.obj_size(g.cod)}"


# -- subcommands ------------------------------------------------------------------


def _cmd_validate(args):
    problems = []
    checked = []
    if args.generators:
        inner, _spec = _ambient(args)
        u = _generators(args, inner)
        problems += validate_diagram(u)
        checked.append("generators")
    if args.category:
        problems += validate_category(category_from_json(
            _read_json(args.category)))
        checked.append("category")
    if args.presheaf:
        if not args.base:
            raise MalformedInput("validating a presheaf needs --base")
        base = category_from_json(_read_json(args.base))
        problems += validate_presheaf(
            presheaf_from_json(_read_json(args.presheaf), base))
        checked.append("presheaf")
    if not checked:
        raise MalformedInput("nothing to validate; pass --generators, "
                             "--category, or --presheaf")
    report = {"checked": checked, "ok": not problems, "problems": problems}
    human = ["valid" if not problems else
             f"{len(problems)} problem(s): " + "; ".join(problems)]
    return (EXIT_OK if not problems else EXIT_INVALID), report, human


def _cmd_factorize(args):
    inner, spec, aw, f = _session(args)
    fact = aw.factorize(f)
    report = {"ambient": spec, "backdrop": args.backdrop,
              "factorization": factorization_to_json(fact)}
    human = [f"factored {_shape(inner, f)} as left {_shape(inner, fact.left)}"
             f" then right {_shape(inner, fact.right)}",
             f"midpoint size {inner.obj_size(fact.midpoint)}, "
             f"converged at stage {fact.converged_stage}"]
    return EXIT_OK, report, human


def _cmd_lift(args):
    inner, _spec, aw, f = _session(args)
    out = find_lifting_structures(aw, f, mode=args.mode, cap=_cap(args))
    if args.mode == "count":
        report = {"mode": "count", "count": out}
        return EXIT_OK, report, [f"{out} coherent lifting structure(s)"]
    if args.mode == "first":
        if not out:
            report = {"mode": "first", "found": False}
            return EXIT_NO_STRUCTURE, report, ["no lifting structure"]
        report = {"mode": "first", "found": True,
                  "structure": structure_to_json(out[0])}
        return EXIT_OK, report, ["found a lifting structure with "
                                 f"{len(out[0].fillers)} filler(s)"]
    report = {"mode": "all", "count": len(out),
              "structures": [structure_to_json(s) for s in out]}
    return EXIT_OK, report, [f"{len(out)} coherent lifting structure(s)"]


def _cmd_solve(args):
    inner, _spec, aw, f = _session(args)
    prob = _read_json(args.problem)
    i = prob["index"]
    alpha = Square(aw.generators.arrow(i), f,
                   dn._mor_from_json(inner, prob["top"]),
                   dn._mor_from_json(inner, prob["bottom"]))
    found = find_lifting_structures(aw, f, mode="first", cap=_cap(args))
    if not found:
        return EXIT_NO_STRUCTURE, {"found": False}, ["no lifting structure"]
    filler = solve_lifting(found[0], i, alpha)
    report = {"found": True, "index": i,
              "filler": inner.mor_to_json(filler)}
    return EXIT_OK, report, [f"solved the problem at generator {i}"]


def _cmd_laws(args):
    inner, _spec, aw, f = _session(args)
    suite = aw.law_suite(f)
    report = {"pass": suite["pass"], "checks": suite["checks"]}
    failed = [k for k, v in suite["checks"].items() if not v]
    human = ["all laws hold" if suite["pass"]
             else "failed: " + ", ".join(sorted(failed))]
    return (EXIT_OK if suite["pass"] else EXIT_INTERNAL), report, human


class _ReportedFactorization:
    """The facts a verification needs, read back from a report file."""

    def __init__(self, f, left, right):
        self.f = f
        self.left = left
        self.right = right
        self.midpoint = left.cod


def _load_report(path):
    data = _read_json(path)
    if "factorization" not in data:
        raise MalformedInput("not a factorize report")
    inner = _ambient_from_spec(data.get("ambient", {}))
    fd = data["factorization"]
    trace = trace_from_json(fd["trace"], inner)
    fact = _ReportedFactorization(
        ArrowObj(inner, dn._mor_from_json(inner, fd["f"])),
        ArrowObj(inner, dn._mor_from_json(inner, fd["left"])),
        ArrowObj(inner, dn._mor_from_json(inner, fd["right"])))
    return inner, trace, fact


def _cmd_trace_verify(args):
    _inner, trace, fact = _load_report(args.report)
    out = verify_trace(trace, fact, cap=_cap(args))
    report = {"pass": out["pass"], "items": out["items"]}
    failed = [it for it in out["items"] if not it["pass"]]
    human = [f"trace verifies: {len(out['items'])} checks"] if out["pass"] \
        else [f"trace rejected: {len(failed)} failing check(s), first at "
              f"stage {failed[0]['stage']} ({failed[0]['check']})"]
    return (EXIT_OK if out["pass"] else EXIT_INVALID), report, human


def _doubling(inner):
    def on_obj(x):
        return FinSet(tuple(f"{lbl}*{i}" for lbl in x.labels
                            for i in range(2)))

    def on_mor(m):
        return FinFunction(on_obj(m.dom), on_obj(m.cod),
                           tuple(m.table[j] * 2 + i
                                 for j in range(m.dom.size)
                                 for i in range(2)))
    return EndoData(inner, on_obj, on_mor)


def _cmd_replay(args):
    inner, trace, _fact = _load_report(args.report)
    if args.functor == "identity":
        fun = EndoData(inner, lambda x: x, lambda m: m)
    else:
        if not isinstance(inner, FinSetAmbient):
            raise MalformedInput("the doubling functor is only defined "
                                 "over finite sets")
        fun = _doubling(inner)
    if args.witnesses:
        raw = _read_json(args.witnesses)
        witnesses = {j: ArrowObj(inner, dn._mor_from_json(inner, d))
                     for j, d in raw.items()}
    else:
        witnesses = {j: ArrowObj(inner,
                                 fun.on_mor(trace.generators.arrow(j).mor))
                     for j in trace.generators.index.objects}
    out, info = replay(trace, fun, witnesses)
    report = {"functor": args.functor,
              "output": inner.mor_to_json(out.mor),
              "checks": info["checks"],
              "structure": info["structure"],
              "witnesses": {j: inner.mor_to_json(w.mor)
                            for j, w in info["witnesses"].items()}}
    human = [f"replayed to {_shape(inner, out)}; "
             f"{len(info['checks'])} preservation check(s) passed"]
    return EXIT_OK, report, human


def _cmd_quillen(args):
    inner, _spec, aw, f = _session(args)
    out = quillen_factorize(aw, f, max_steps=args.max_steps)
    report = {"left": inner.mor_to_json(out.left.mor),
              "right": inner.mor_to_json(out.right.mor),
              "steps": out.steps,
              "stage_tops": [inner.mor_to_json(t) for t in out.stage_tops]}
    human = [f"attached cells for {out.steps} stage(s): "
             f"left {_shape(inner, out.left)}, "
             f"right {_shape(inner, out.right)}"]
    return EXIT_OK, report, human


def _cmd_rlp(args):
    inner, _spec, aw, f = _session(args)
    answer = has_rlp(f, aw.generators, cap=_cap(args))
    report = {"has_rlp": answer}
    human = ["every problem has a filler" if answer
             else "some problem has no filler"]
    return EXIT_OK, report, human


_DISPATCH = {
    "validate": _cmd_validate,
    "factorize": _cmd_factorize,
    "lift": _cmd_lift,
    "solve": _cmd_solve,
    "laws": _cmd_laws,
    "trace-verify": _cmd_trace_verify,
    "replay": _cmd_replay,
    "quillen": _cmd_quillen,
    "rlp": _cmd_rlp,
}


def _parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--output", help="write the machine report here")
    shared.add_argument("--cap", type=int, default=None,
                        help="enumeration cap (or env GARNET_CAP)")

    ambient = argparse.ArgumentParser(add_help=False)
    ambient.add_argument("--ambient", choices=("finset", "presheaf"),
                         default="finset")
    ambient.add_argument("--base", help="base category file for presheaves")

    job = argparse.ArgumentParser(add_help=False)
    job.add_argument("--generators", required=True,
                     help="diagram file, or 'subobject_classifier'")
    job.add_argument("--map", required=True, help="the map to process")
    job.add_argument("--backdrop", choices=("all", "mono"), default="all")
    job.add_argument("--max-steps", type=int, default=None)

    p = argparse.ArgumentParser(
        prog="garnet",
        description="algebraic small object argument over finite ambients")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[shared, ambient],
                       help="check categories, presheaves, or diagrams")
    v.add_argument("--generators")
    v.add_argument("--category")
    v.add_argument("--presheaf")

    sub.add_parser("factorize", parents=[shared, ambient, job],
                   help="factor a map and emit its trace")

    li = sub.add_parser("lift", parents=[shared, ambient, job],
                        help="search coherent lifting structures")
    li.add_argument("--mode", choices=("first", "count", "all"),
                    default="all")

    so = sub.add_parser("solve", parents=[shared, ambient, job],
                        help="read one filler off a lifting structure")
    so.add_argument("--problem", required=True,
                    help="file with index, top, bottom")

    sub.add_parser("laws", parents=[shared, ambient, job],
                   help="run the full law suite at a map")

    tv = sub.add_parser("trace-verify", parents=[shared],
                        help="recheck an emitted factorize report")
    tv.add_argument("--report", required=True)

    rp = sub.add_parser("replay", parents=[shared],
                        help="re-run a trace under a functor")
    rp.add_argument("--report", required=True)
    rp.add_argument("--functor", choices=("identity", "times2"),
                    default="identity")
    rp.add_argument("--witnesses", help="generator witness file")

    sub.add_parser("quillen", parents=[shared, ambient, job],
                   help="cell-by-cell factorization without quotients")

    sub.add_parser("rlp", parents=[shared, ambient, job],
                   help="check plain fillers against the generators")
    return p


def _emit(args, code, report, human):
    body = {"format": FORMAT, "command": args.command}
    body.update(report)
    for line in human:
        print(line)
    if args.output:
        blob = json.dumps(body, indent=2, sort_keys=True) + "\n"
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(blob)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        code, report, human = _DISPATCH[args.command](args)
    except EnumerationCap as exc:
        return _emit(args, EXIT_CAP,
                     {"error": {"kind": "EnumerationCap",
                                "message": str(exc)}},
                     [f"enumeration cap exceeded: {exc}"])
    except IterationLimit as exc:
        return _emit(args, EXIT_LIMIT,
                     {"error": {"kind": "IterationLimit",
                                "message": str(exc)}},
                     [f"iteration limit: {exc}"])
    except (GarnetError, OSError, KeyError, ValueError) as exc:
        return _emit(args, EXIT_INVALID,
                     {"error": {"kind": type(exc).__name__,
                                "message": str(exc)}},
                     [f"invalid input: {exc}"])
    except AssertionError as exc:
        return _emit(args, EXIT_INTERNAL,
                     {"error": {"kind": "AssertionError",
                                "message": str(exc)}},
                     [f"internal invariant breach: {exc}"])
    return _emit(args, code, report, human)


if __name__ == "__main__":
    sys.exit(main())
