"""Command-line interface.

Every invocation prints exactly one JSON document on stdout.  Exit code 0
means the status is ``valid`` or ``holds``; 1 means ``countermodel``,
``fails`` or ``unknown-above-bound``; 2 means ``error``.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .formula import (
    FormulaSyntaxError, parse, pretty, sharp, subformula_closure, to_ast, u_translate,
)
from .kripke import BiFrame
from .logics import (
    NoCountermodelUpTo, decide_bounded, enumerate_biframes, filtrate, get_frame_class,
)
from .morphism import PointMap, is_c_morphism, is_d_morphism, is_dd_morphism, is_p_morphism
from .semantics import BudgetExceeded, Model, kripke_truth, topo_truth, valid
from .topospace import FiniteSpace

_EXIT = {
    "valid": 0, "holds": 0,
    "countermodel": 1, "fails": 1, "unknown-above-bound": 1,
    "error": 2,
}


@dataclass
class Verdict:
    status: str
    payload: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return _EXIT[self.status]

    def to_json(self) -> str:
        return json.dumps({"status": self.status, **self.payload}, ensure_ascii=False, indent=2)


class CliError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}") from None


def _load_structure(path: str):
    data = _load_json(path)
    if "worlds" in data:
        return BiFrame.from_dict(data), data
    if "points" in data:
        return FiniteSpace.from_dict(data), data
    raise CliError(f"{path} describes neither a frame nor a space")


def cmd_parse(args) -> Verdict:
    f = parse(args.formula)
    if args.emit == "ast":
        return Verdict("holds", {"ast": to_ast(f)})
    return Verdict("holds", {"pretty": pretty(f)})


_SEMANTICS = {"kripke": "kripke", "topo-d": "d", "topo-c": "c"}


def cmd_check(args) -> Verdict:
    S, data = _load_structure(args.structure)
    f = parse(args.formula)
    mode = _SEMANTICS[args.semantics]
    if (mode == "kripke") != isinstance(S, BiFrame):
        raise CliError(f"semantics {args.semantics} does not fit a {'frame' if isinstance(S, BiFrame) else 'space'}")
    if args.at is not None:
        model = Model.from_dict(data)
        if mode == "kripke":
            truth = kripke_truth(S, model.valuation, args.at, f)
        else:
            truth = topo_truth(S, model.valuation, args.at, f, mode)
        return Verdict("holds" if truth else "fails", {"formula": pretty(f), "at": args.at})
    res = valid(S, f, mode)
    if res.valid:
        return Verdict("valid", {"formula": pretty(f)})
    return Verdict("countermodel", {"countermodel": res.countermodel.to_dict()})


def cmd_decide(args) -> Verdict:
    f = parse(args.formula)
    res = decide_bounded(args.logic, f, args.bound, iso=args.iso)
    if isinstance(res, NoCountermodelUpTo):
        return Verdict("unknown-above-bound", {
            "logic": args.logic, "formula": pretty(f), **res.to_dict(),
            "note": "no countermodel up to the bound; this is not a proof of theoremhood",
        })
    return Verdict("countermodel", {"logic": args.logic, "countermodel": res.to_dict()})


def cmd_translate(args) -> Verdict:
    f = parse(args.formula)
    g = sharp(f) if args.sharp else u_translate(f)
    return Verdict("holds", {"input": pretty(f), "output": pretty(g)})


def cmd_morphism(args) -> Verdict:
    h = PointMap.from_dict(_load_json(args.map))
    src, _ = _load_structure(args.src)
    dst, _ = _load_structure(args.dst)
    if not isinstance(dst, BiFrame):
        raise CliError("the target must be a frame")
    if args.kind == "p":
        if not isinstance(src, BiFrame):
            raise CliError("p-morphisms need a frame as source")
        res = is_p_morphism(h, src, dst)
    else:
        if not isinstance(src, FiniteSpace):
            raise CliError(f"{args.kind}-morphisms need a space as source")
        if args.kind == "d":
            res = is_d_morphism(h, src, dst, args.allow_non_surjective)
        elif args.kind == "c":
            res = is_c_morphism(h, src, dst, args.allow_non_surjective)
        else:
            res = is_dd_morphism(h, src, dst)
    return Verdict("holds" if res else "fails", {"kind": args.kind, **res.to_dict()})


def cmd_filtrate(args) -> Verdict:
    model = Model.from_dict(_load_json(args.model))
    try:
        lines = Path(args.formulas).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CliError(f"cannot read {args.formulas}: {exc.strerror}") from None
    psi = [parse(line) for line in lines if line.strip() and not line.lstrip().startswith("#")]
    if args.close:
        psi = list(subformula_closure(psi))
    res = filtrate(model, psi)
    Path(args.out).write_text(json.dumps(res.model.to_dict(), indent=2) + "\n", encoding="utf-8")
    return Verdict("holds", {"class_count": res.class_count, "projection": res.projection, "out": args.out})


def cmd_enumerate(args) -> Verdict:
    fc = get_frame_class(args.cls)
    frames = list(enumerate_biframes(fc, args.size, iso=args.iso))
    payload: dict = {"class": fc.name, "size": args.size, "iso": args.iso, "count": len(frames)}
    if not args.count_only:
        payload["frames"] = [F.to_dict() for F in frames]
    return Verdict("holds", payload)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topomodal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", help="parse and re-emit a formula")
    s.add_argument("--formula", required=True)
    s.add_argument("--emit", choices=["ast", "pretty"], default="pretty")
    s.set_defaults(func=cmd_parse)

    for name in ("check", "valid"):
        s = sub.add_parser(name, help="validity, or truth at a point with --at")
        s.add_argument("--structure", required=True, help="frame, space or model file")
        s.add_argument("--formula", required=True)
        s.add_argument("--semantics", choices=list(_SEMANTICS), default="kripke")
        s.add_argument("--at", help="evaluate at this point under the file's valuation")
        s.set_defaults(func=cmd_check)

    s = sub.add_parser("decide", help="bounded countermodel search in a logic")
    s.add_argument("--logic", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--bound", type=int, required=True)
    s.add_argument("--iso", action="store_true", help="skip isomorphic copies")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("translate", help="apply the reflexive or universal translation")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--sharp", action="store_true")
    g.add_argument("--u", action="store_true")
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_translate)

    s = sub.add_parser("morphism", help="check a map between structures")
    s.add_argument("--kind", choices=["p", "c", "d", "dd"], required=True)
    s.add_argument("--map", required=True)
    s.add_argument("--src", required=True)
    s.add_argument("--dst", required=True)
    s.add_argument("--allow-non-surjective", action="store_true")
    s.set_defaults(func=cmd_morphism)

    s = sub.add_parser("filtrate", help="filtrate a Kripke model through a formula set")
    s.add_argument("--model", required=True)
    s.add_argument("--formulas", required=True, help="one formula per line")
    s.add_argument("--out", required=True)
    s.add_argument("--close", action="store_true", help="close the set under subformulas first")
    s.set_defaults(func=cmd_filtrate)

    s = sub.add_parser("enumerate", help="list rooted frames of a class")
    s.add_argument("--class", dest="cls", required=True)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--iso", action="store_true")
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(func=cmd_enumerate)
    return p


def run(argv=None) -> Verdict:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormulaSyntaxError as exc:
        print(f"syntax error at byte {exc.offset}: {exc}", file=sys.stderr)
        return Verdict("error", {"message": str(exc), "offset": exc.offset})
    except (CliError, ValueError, KeyError, TypeError, BudgetExceeded) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return Verdict("error", {"message": msg})


def main(argv=None) -> int:
    try:
        verdict = run(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code if isinstance(exc.code, int) else 2
        if code != 0:
            print(Verdict("error", {"message": "invalid command line"}).to_json())
            return 2
        return 0
    print(verdict.to_json())
    return verdict.exit_code


if __name__ == "__main__":
    sys.exit(main())
