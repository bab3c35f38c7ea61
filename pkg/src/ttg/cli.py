"""Command-line front end: ``ttg MODEL COMMAND ...`` and ``ttg chromatic ...``.

Exit status is 0 on success, 1 when a checked property fails and 2 on
usage or parse errors.  Reports are deterministic: fixed ordering and no
timestamps, so two runs on the same input give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import chromatic as chrom
from .engine import rho as rho_mod
from .engine.colimit import DEFAULT_DEPTH, affordable_depth
from .engine.compare import compare_comparison_maps
from .engine.localize import verify_localization
from .engine.rho import default_generator, fiber_descent, koszul_preimage, rho_closed_set, rho_object
from .engine.verify import PROPERTIES, VerifyContext
from .errors import ConsistencyError, ParseError, PropertyFailure, TTGError, UnsupportedError, UsageError
from .models import AlgebraModel, support
from .models.modelfile import load_model, parse_algebra_element
from .spaces import connected_components, filtration_to_dot, map_to_dot, space_to_dot

FORMATS = ("text", "json", "dot")


@dataclass
class RunConfig:
    """Options shared by every command."""

    model_path: Optional[str]
    command: str
    depth: int = DEFAULT_DEPTH
    graded: bool = False
    fmt: str = "text"
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise UsageError("the depth must be at least 1")
        if self.fmt not in FORMATS:
            raise UsageError(f"unknown format {self.fmt!r}")


class Output:
    """One report in the three formats; ``dot`` is None where it makes no sense."""

    def __init__(self, payload: dict, text: str, dot: Optional[str] = None, status: int = 0):
        self.payload = payload
        self.text = text
        self.dot = dot
        self.status = status

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        if fmt == "dot":
            if self.dot is None:
                raise UsageError("this command has no DOT rendering")
            return self.dot
        return self.text.rstrip("\n") + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--depth", type=int, default=argparse.SUPPRESS, help="colimit depth (default $TTG_DEPTH or 3)")
    common.add_argument("--graded", action="store_true", default=argparse.SUPPRESS, help="use graded rings")
    common.add_argument("--format", dest="fmt", choices=FORMATS, default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for sampled ring elements")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="ttg", parents=[common], description="Comparison maps on finite tensor triangulated models.")
    parser.add_argument("target", help="a model file, or 'chromatic'")
    parser.add_argument("rest", nargs=argparse.REMAINDER)
    return parser


def model_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="ttg MODEL", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("spc", parents=[common], help="the spectrum of the model")
    p = sub.add_parser("supp", parents=[common], help="support of an object")
    p.add_argument("object")
    p = sub.add_parser("rho", parents=[common], help="a comparison map")
    p.add_argument("object", nargs="?")
    p.add_argument("--unit", action="store_true")
    p.add_argument("--closed-set", help="comma-separated points of a closed set")
    p.add_argument("--gens", nargs="+", help="generator objects for --closed-set")
    p = sub.add_parser("koszul", parents=[common], help="Koszul preimage of ring classes")
    p.add_argument("object")
    p.add_argument("classes", nargs="*", help="basis index (e.g. 0, or 0+1) or coordinates (e.g. 1,0)")
    p = sub.add_parser("descend", parents=[common], help="iterative fiber descent")
    p.add_argument("object", nargs="?", default="unit")
    p.add_argument("--max-steps", type=int, default=3)
    p = sub.add_parser("localize", parents=[common], help="check the localization square")
    p.add_argument("--set", dest="gens", nargs="+", required=True, help="elements of End(1), or vertices to drop")
    p = sub.add_parser("verify", parents=[common], help="run a named property check")
    p.add_argument("property", help=f"one of: all, {', '.join(PROPERTIES)}")
    return parser


def chromatic_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="ttg chromatic", parents=[common])
    parser.add_argument("--primes", default=",".join(map(str, chrom.DEFAULT_PRIMES)), help="comma-separated primes")
    parser.add_argument("--levels", type=int, default=chrom.DEFAULT_LEVELS, help="level cap")
    parser.add_argument("--localize-at", type=int, help="restrict to one prime")
    parser.add_argument("--descend", type=int, help="number of selfmaps in the descent chain")
    return parser


def _config(ns_list, model_path, command) -> RunConfig:
    vals = {}
    for ns in ns_list:
        vals.update(vars(ns))
    env = os.environ.get("TTG_DEPTH")
    depth = vals.get("depth")
    if depth is None:
        try:
            depth = int(env) if env else DEFAULT_DEPTH
        except ValueError:
            raise UsageError(f"TTG_DEPTH must be an integer, got {env!r}") from None
    return RunConfig(model_path, command, depth, bool(vals.get("graded", False)), vals.get("fmt", "text"), vals.get("seed", 0))


# -- model commands -----------------------------------------------------------------


def _space_text(space) -> list[str]:
    lines = [f"points: {', '.join(map(str, space.points))}"]
    pairs = space.covering_pairs()
    lines.append("specializations: " + (", ".join(f"{x} ~> {y}" for x, y in pairs) if pairs else "none"))
    lines.append(f"discrete: {'yes' if space.is_discrete() else 'no'}")
    return lines


def cmd_spc(mf, cfg, args) -> Output:
    space = mf.model.space
    comps = [space.sort(c) for c in connected_components(space)]
    payload = {"model": mf.model.name, **space.as_dict(), "discrete": space.is_discrete(), "components": comps}
    text = [f"Spc({mf.model.name})"] + _space_text(space)
    text.append("components: " + " | ".join(", ".join(c) for c in comps))
    return Output(payload, "\n".join(text), space_to_dot(space, name=f"Spc({mf.model.name})"))


def cmd_supp(mf, cfg, args) -> Output:
    X = mf.object(args.object)
    space = mf.model.space
    pts = space.sort(support(X))
    payload = {"model": mf.model.name, "object": args.object, "support": pts}
    text = f"supp({args.object}) = {{{', '.join(pts)}}}"
    return Output(payload, text, space_to_dot(space, highlight=pts, name=f"supp({args.object})"))


def _depth_for(X, cfg) -> int:
    d = affordable_depth(X, cfg.depth)
    if d == 0:
        raise UnsupportedError("the colimit ring of this object is too large to compute")
    return d


def _ring_info(cmap) -> dict:
    alg = cmap.algebra
    return {
        "dim": alg.dim,
        "basis": [alg.element_str(b) for b in alg.basis()],
        "primes": {q.label: alg.element_str(q.idempotent) for q in cmap.primes},
    }


def _map_output(cmap, title: str, cfg) -> Output:
    payload = cmap.as_dict()
    payload["fibers"] = {str(y): [str(x) for x in xs] for y, xs in cmap.fibers().items()}
    payload["ring"] = _ring_info(cmap)
    payload["depth_requested"] = cfg.depth
    ring = payload["ring"]
    lines = [title]
    lines.append(f"ring: dimension {ring['dim']}, depth {cmap.meta.get('depth')}, stabilized {cmap.meta.get('stabilized')}")
    for i, b in enumerate(ring["basis"]):
        lines.append(f"  [{i}] {b}")
    lines.append("primes: " + ", ".join(f"{k} (idempotent {v})" for k, v in ring["primes"].items()))
    for x in cmap.domain.points:
        lines.append(f"  {x} -> {cmap(x)}")
    lines.append(f"spectral: {bool(cmap.spectral)}; inclusion-reversing: {cmap.reversal_witness is None}")
    if "approximation" in cmap.meta:
        lines.append(f"approximation: {cmap.meta['approximation']}")
    return Output(payload, "\n".join(lines), map_to_dot(cmap.domain, cmap.target, cmap.assignment, name=title))


def cmd_rho(mf, cfg, args) -> Output:
    m = mf.model
    chosen = sum([bool(args.object), bool(args.unit), bool(args.closed_set)])
    if chosen != 1:
        raise UsageError("rho needs exactly one of: an object, --unit, --closed-set")
    if args.gens and not args.closed_set:
        raise UsageError("--gens only applies to --closed-set")
    if args.closed_set:
        pts = [x.strip() for x in args.closed_set.split(",") if x.strip()]
        pts = m.space.check_points(pts)
        if not m.space.is_closed(pts):
            raise UsageError(f"{{{', '.join(m.space.sort(pts))}}} is not closed")
        gens = [mf.object(g) for g in args.gens] if args.gens else [default_generator(m, pts)]
        depth = min(_depth_for(g, cfg) for g in gens)
        cmap = rho_closed_set(m.space.closed(pts), gens, depth=depth, graded=cfg.graded)
        out = _map_output(cmap, f"rho_Z for Z = {{{', '.join(m.space.sort(pts))}}}", cfg)
        if set(pts) == set(m.space.points):
            # experiment: does the whole-space map reduce to the unit's?
            U = m.unit()
            unit_map = rho_object(U, depth=_depth_for(U, cfg), graded=cfg.graded, label="unit")
            same, witness = compare_comparison_maps(cmap, unit_map)
            out.payload["matches_unit"] = {"iso": same, "witness": _jsonable(witness)}
            out.text += f"\nmatches rho_unit: {'yes' if same else 'no'}"
        return out
    name = "unit" if args.unit else args.object
    X = mf.object(name)
    cmap = rho_object(X, depth=_depth_for(X, cfg), graded=cfg.graded, label=name)
    return _map_output(cmap, f"rho_{name}", cfg)


def parse_class(token: str, dim: int) -> np.ndarray:
    """``"2"`` is basis vector 2, ``"0+1"`` a sum of basis vectors, ``"1,0"`` coordinates."""
    try:
        if "," in token:
            v = np.array([int(t) for t in token.split(",")], dtype=np.int64)
            if v.size != dim:
                raise UsageError(f"class {token!r} needs {dim} coordinates")
            return v
        v = np.zeros(dim, dtype=np.int64)
        for t in token.split("+"):
            i = int(t)
            if not 0 <= i < dim:
                raise UsageError(f"basis index {i} out of range 0..{dim - 1}")
            v[i] += 1
        return v
    except ValueError:
        raise UsageError(f"cannot read class {token!r}") from None


def cmd_koszul(mf, cfg, args) -> Output:
    X = mf.object(args.object)
    cmap = rho_object(X, depth=_depth_for(X, cfg), label=args.object)
    classes = [parse_class(t, cmap.algebra.dim) for t in args.classes]
    names = [cmap.algebra.element_str(c) for c in classes]
    status = 0
    try:
        res = koszul_preimage(cmap, classes)
        body = res.as_dict()
        body["koszul_ranks"] = {str(n): res.koszul.rank(n) for n in res.koszul.degrees}
    except PropertyFailure as exc:
        body = dict(exc.report or {})
        status = 1
    payload = {"model": mf.model.name, "object": args.object, "classes": names, **body, "verdict": "pass" if status == 0 else "fail"}
    lines = [
        f"object {args.object}, classes [{', '.join(names)}]",
        f"V = {{{', '.join(body.get('V', []))}}}",
        f"preimage = {{{', '.join(body.get('preimage', []))}}}",
        f"supp(Koszul object) = {{{', '.join(body.get('koszul_support', []))}}}",
        f"verdict: {payload['verdict']}",
    ]
    return Output(payload, "\n".join(lines), status=status)


def cmd_descend(mf, cfg, args) -> Output:
    if args.max_steps < 0:
        raise UsageError("--max-steps must be nonnegative")
    X = mf.object(args.object)
    filt = fiber_descent(X, depth=cfg.depth, max_steps=args.max_steps)
    payload = {"model": mf.model.name, "object": args.object, "filtration": filt.as_dict()}
    return Output(payload, filt.render(), filtration_to_dot(filt, name=f"descent({args.object})"))


def _cli_element(m, text: str):
    try:
        return parse_algebra_element(m.algebra, text)
    except ParseError as exc:
        raise UsageError(f"--set: bad element {text!r}: {exc.message}") from None


def cmd_localize(mf, cfg, args) -> Output:
    m = mf.model
    gens = [_cli_element(m, g) for g in args.gens] if isinstance(m, AlgebraModel) else list(args.gens)
    report = verify_localization(m, gens, depth=min(cfg.depth, 2), samples=[mf.object(n) for n in mf.object_names])
    lines = [f"localization of {m.name} ({report['kind']}) at S = {report['S']}"]
    lines.append("rings: " + ", ".join(f"{k} dim {v}" for k, v in report["rings"].items()))
    for k, v in report["checks"].items():
        lines.append(f"  {k}: {'ok' if v else 'FAILED'}")
    lines.append(f"verdict: {report['verdict']}")
    return Output(_jsonable(report), "\n".join(lines), status=0 if report["verdict"] == "pass" else 1)


def cmd_verify(mf, cfg, args) -> Output:
    if args.property != "all" and args.property not in PROPERTIES:
        raise UsageError(f"unknown property {args.property!r}; choose from all, {', '.join(PROPERTIES)}")
    samples = {n: mf.object(n) for n in mf.object_names}
    ctx = VerifyContext(mf.model, samples, cfg.depth)
    props = list(PROPERTIES) if args.property == "all" else [args.property]
    reports = [PROPERTIES[p](ctx) for p in props]
    lines = []
    for r in reports:
        line = f"{r.property:15s} {r.verdict}"
        if r.witness and r.verdict != "pass":
            line += "  " + json.dumps(_jsonable(r.witness), sort_keys=True, ensure_ascii=False)
        lines.append(line)
    ok = all(r.ok for r in reports)
    lines.append(f"{sum(r.ok for r in reports)}/{len(reports)} ok")
    payload = {"model": mf.model.name, "depth": cfg.depth, "reports": [_jsonable(r.as_dict()) for r in reports], "ok": ok}
    return Output(payload, "\n".join(lines), status=0 if ok else 1)


MODEL_COMMANDS = {
    "spc": cmd_spc,
    "supp": cmd_supp,
    "rho": cmd_rho,
    "koszul": cmd_koszul,
    "descend": cmd_descend,
    "localize": cmd_localize,
    "verify": cmd_verify,
}


# -- chromatic ------------------------------------------------------------------------


def cmd_chromatic(cfg, args) -> Output:
    try:
        primes = [int(t) for t in args.primes.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot read primes {args.primes!r}") from None
    space = chrom.ChromaticSpace(primes, args.levels)
    payload: dict = {"space": space.as_dict()}
    lines = [f"{space.name}, primes {list(space.primes)}, levels <= {space.levels}"]
    if args.localize_at is not None:
        payload["localization"] = chrom.check_localization(space, args.localize_at)
        space = chrom.localize_at(space, args.localize_at)
        payload["space"] = space.as_dict()
        lines.append(f"localized at {args.localize_at}: verdict {payload['localization']['verdict']}")
    rho = chrom.rho_unit(space, graded=cfg.graded)
    payload["rho_unit"] = rho.as_dict()
    lines.append(f"rho_unit: spectral {bool(rho.spectral)}, inclusion-reversing {rho.reversal_witness is None}")
    for y, xs in rho.fibers().items():
        lines.append(f"  fiber over {y}: {{{', '.join(xs)}}}")
    dot = chrom.diagram_to_dot(rho)
    status = 0 if rho.valid else 1
    if args.descend is not None:
        p = args.localize_at if args.localize_at is not None else space.primes[0]
        filt = chrom.descend(space, p, args.descend)
        payload["descent"] = {"prime": p, **filt.as_dict()}
        lines.append(f"descent at p = {p}:")
        lines.append(" ⊃ ".join(f"closure{{{c.labels()[0]}}}" for c in filt.chain()))
        lines.extend("  " + line for line in filt.render().splitlines())
        lines.append(f"never reached: {{{', '.join(filt.residue.labels())}}} (Thomason: {filt.residue_thomason})")
        dot = filtration_to_dot(filt, name=f"descent at {p}")
    if "localization" in payload and payload["localization"]["verdict"] != "pass":
        status = 1
    return Output(payload, "\n".join(lines), dot, status)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_jsonable(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        top = build_parser().parse_args(argv)
        if top.target == "chromatic":
            sub = chromatic_parser().parse_args(top.rest)
            cfg = _config([top, sub], None, "chromatic")
            out = cmd_chromatic(cfg, sub)
        else:
            sub = model_parser().parse_args(top.rest)
            cfg = _config([top, sub], top.target, sub.command)
            rho_mod.SAMPLE_SEED = cfg.seed
            mf = load_model(top.target)
            out = MODEL_COMMANDS[sub.command](mf, cfg, sub)
        stdout.write(out.render(cfg.fmt))
        return out.status
    except PropertyFailure as exc:
        stderr.write(f"ttg: property failure: {exc}\n")
        if exc.report:
            stderr.write(json.dumps(_jsonable(exc.report), sort_keys=True, ensure_ascii=False) + "\n")
        return 1
    except ConsistencyError as exc:
        stderr.write(f"ttg: internal consistency check failed: {exc}\n")
        return 1
    except (UsageError, UnsupportedError) as exc:
        stderr.write(f"ttg: error: {exc}\n")
        return 2
    except OSError as exc:
        stderr.write(f"ttg: error: {exc}\n")
        return 2
    except TTGError as exc:
        stderr.write(f"ttg: error: {exc}\n")
        return 1
    finally:
        rho_mod.SAMPLE_SEED = 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
