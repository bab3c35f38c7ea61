"""Reader for ``.ttg`` model files.

A model file is TOML with one ``[model]`` table, any number of
``[object.NAME]`` tables and optional ``[map.NAME]`` tables.  The grammar is
documented in ``docs/model-format.md``; every error raised here is a
ParseError carrying a line and column.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ParseError, TTGError, UsageError
from ..rings import element_from_polynomial, parse_presentation
from ..rings import spec as zariski_spec
from .algebra import AlgebraModel
from .core import ChainMap, Complex, Model, cone, direct_sum, scalar_map, suspend, tensor
from .homotopy import minimize
from .poset import FinitePoset, PosetModel

OBJECT_FORMS = ("terms", "rep", "simple", "projective", "sum", "tensor", "shift", "cone", "dual", "same")


class ModelFile:
    """A parsed model file: the model plus lazily built named objects."""

    def __init__(self, text: str, source: str = "<string>"):
        self.text = text
        self.source = source
        try:
            self.raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            line, col = _toml_position(exc)
            msg = str(exc).split(" (at line")[0]
            raise ParseError(msg, line, col, source) from None
        if "model" not in self.raw or not isinstance(self.raw["model"], dict):
            raise ParseError("missing [model] table", 1, 1, source)
        unknown = [k for k in self.raw if k not in ("model", "object", "map")]
        if unknown:
            raise self._error(f"unknown top-level table [{unknown[0]}]", f"[{unknown[0]}")
        self.model = self._build_model(self.raw["model"])
        self._object_specs = self.raw.get("object", {})
        self._map_specs = self.raw.get("map", {})
        self._objects: dict[str, Complex] = {}
        self._maps: dict[str, ChainMap] = {}
        self._building: list[str] = []

    # -- locations -------------------------------------------------------------
    def _locate(self, header: Optional[str] = None, key: Optional[str] = None) -> tuple[int, int]:
        lines = self.text.splitlines()
        start = 0
        if header is not None:
            pat = re.compile(r"^\s*\[\s*" + _header_regex(header) + r"\s*\]")
            for i, ln in enumerate(lines):
                if pat.match(ln):
                    start = i
                    break
            else:
                for i, ln in enumerate(lines):
                    if header.split(".")[-1] in ln:
                        return i + 1, ln.find(header.split(".")[-1]) + 1
                return 1, 1
        if key is None:
            ln = lines[start] if lines else ""
            return start + 1, len(ln) - len(ln.lstrip()) + 1
        kpat = re.compile(r"^\s*\"?" + re.escape(key) + r"\"?\s*[=.]")
        for i in range(start + (1 if header else 0), len(lines)):
            if header is not None and i > start and lines[i].lstrip().startswith("["):
                break
            if kpat.match(lines[i]):
                return i + 1, lines[i].find(key) + 1
        ln = lines[start] if lines else ""
        return start + 1, len(ln) - len(ln.lstrip()) + 1

    def _error(self, message: str, header: Optional[str] = None, key: Optional[str] = None) -> ParseError:
        if header is not None and header.startswith("["):
            # raw header text search
            for i, ln in enumerate(self.text.splitlines()):
                if ln.lstrip().startswith(header):
                    return ParseError(message, i + 1, ln.find(header) + 1, self.source)
            return ParseError(message, 1, 1, self.source)
        line, col = self._locate(header, key)
        return ParseError(message, line, col, self.source)

    # -- model -------------------------------------------------------------------
    def _build_model(self, spec: dict) -> Model:
        kind = spec.get("kind")
        allowed = {"kind", "char", "presentation", "elements", "relations", "name"}
        for k in spec:
            if k not in allowed:
                raise self._error(f"unknown key {k!r} in [model]", "model", k)
        name = str(spec.get("name", Path(self.source).stem if self.source != "<string>" else ""))
        if kind == "algebra":
            if "presentation" not in spec:
                raise self._error("algebra model needs a presentation", "model", "kind")
            text = spec["presentation"]
            if not isinstance(text, str):
                raise self._error("presentation must be a string", "model", "presentation")
            try:
                alg = parse_presentation(text)
                # residue fields must be prime fields; refuse here, not at first use
                zariski_spec(alg)
            except TTGError as exc:
                line, col = self._locate("model", "presentation")
                # offset into the quoted string on that line
                ln = self.text.splitlines()[line - 1]
                q = ln.find('"', ln.find("presentation"))
                inner = getattr(exc, "column", None)
                if q >= 0 and inner:
                    col = q + inner
                raise ParseError(getattr(exc, "message", str(exc)), line, col, self.source) from None
            if "char" in spec and int(spec["char"]) != alg.p:
                raise self._error(
                    f"char = {spec['char']} disagrees with the presentation (characteristic {alg.p})",
                    "model",
                    "char",
                )
            return AlgebraModel(alg, name=name or alg.name)
        if kind == "poset":
            elements = spec.get("elements")
            if not isinstance(elements, list) or not elements:
                raise self._error("poset model needs a nonempty elements list", "model", "elements")
            relations = spec.get("relations", [])
            if not isinstance(relations, list) or any(
                not isinstance(r, list) or len(r) != 2 for r in relations
            ):
                raise self._error("relations must be a list of [smaller, larger] pairs", "model", "relations")
            p = spec.get("char", 2)
            try:
                poset = FinitePoset([str(e) for e in elements], [(str(a), str(b)) for a, b in relations])
                return PosetModel(poset, int(p), name=name or "poset")
            except UsageError as exc:
                key = "relations" if "relation" in str(exc) or "cycle" in str(exc) else "char"
                raise self._error(str(exc), "model", key) from None
        if kind is None:
            raise self._error("[model] needs kind = \"algebra\" or \"poset\"", "model")
        raise self._error(f"unknown model kind {kind!r}", "model", "kind")

    # -- elements ------------------------------------------------------------------
    def element(self, value, where: tuple = (None, None)) -> np.ndarray:
        """An element of ``End(𝟙)``: algebra element or poset scalar."""
        m = self.model
        try:
            if isinstance(m, AlgebraModel):
                return parse_algebra_element(m.algebra, value)
            if isinstance(value, bool) or not isinstance(value, (int, list)):
                raise UsageError(f"poset scalars are integers, got {value!r}")
            return np.array(value, dtype=np.int64) % m.p
        except ParseError as exc:
            raise self._error(f"bad element {value!r}: {exc.message}", *where) from None
        except UsageError as exc:
            raise self._error(str(exc), *where) from None

    # -- objects -------------------------------------------------------------------
    @property
    def object_names(self) -> list[str]:
        return list(self._object_specs)

    @property
    def map_names(self) -> list[str]:
        return list(self._map_specs)

    def object(self, name: str) -> Complex:
        name = str(name)
        if name in self._objects:
            return self._objects[name]
        if name in self._building:
            cycle = " -> ".join(self._building[self._building.index(name) :] + [name])
            raise self._error(f"objects refer to each other in a cycle: {cycle}", f"object.{name}")
        if name not in self._object_specs:
            X = self._builtin(name)
            if X is None:
                raise UsageError(f"unknown object {name!r} in {self.source}")
            self._objects[name] = X
            return X
        self._building.append(name)
        try:
            X = self._build_object(name, self._object_specs[name])
        finally:
            self._building.pop()
        X = X.renamed(name)
        self._objects[name] = X
        return X

    def _builtin(self, name: str) -> Optional[Complex]:
        m = self.model
        if name in ("unit", "1", "𝟙"):
            return m.unit()
        if isinstance(m, PosetModel):
            if name.startswith("S") and name[1:] in m.poset.index:
                return m.simple(name[1:], name)
            if name.startswith("P") and name[1:] in m.poset.index:
                return m.projective(name[1:]).renamed(name)
        return None

    def _ref(self, owner: str, key: str, value) -> Complex:
        if not isinstance(value, str):
            raise self._error(f"expected an object name, got {value!r}", f"object.{owner}", key)
        try:
            return self.object(value)
        except UsageError as exc:
            if isinstance(exc, ParseError):
                raise
            raise self._error(f"unknown object {value!r}", f"object.{owner}", key) from None

    def _build_object(self, name: str, spec) -> Complex:
        hdr = f"object.{name}"
        if not isinstance(spec, dict):
            raise self._error(f"object {name} must be a table", hdr)
        forms = [k for k in spec if k in OBJECT_FORMS]
        extra = [k for k in spec if k not in OBJECT_FORMS and k != "d"]
        if extra:
            raise self._error(f"unknown key {extra[0]!r} in object {name}", hdr, extra[0])
        if len(forms) != 1:
            raise self._error(
                f"object {name} needs exactly one of {', '.join(OBJECT_FORMS)}", hdr
            )
        form = forms[0]
        val = spec[form]
        m = self.model
        if form == "terms":
            return self._explicit(name, spec)
        if "d" in spec:
            raise self._error("key 'd' only goes with 'terms'", hdr, "d")
        if form == "same":
            return self._ref(name, form, val)
        if form == "sum" or form == "tensor":
            if not isinstance(val, list) or not val:
                raise self._error(f"{form} needs a nonempty list of object names", hdr, form)
            parts = [self._ref(name, form, v) for v in val]
            if form == "sum":
                return direct_sum(*parts)
            out = parts[0]
            for P in parts[1:]:
                out = minimize(tensor(out, P)).small
            return out
        if form == "shift":
            if not isinstance(val, dict) or "of" not in val:
                raise self._error("shift needs {of = NAME, by = K}", hdr, form)
            by = val.get("by", 1)
            if not isinstance(by, int):
                raise self._error("shift amount must be an integer", hdr, form)
            return suspend(self._ref(name, form, val["of"]), by)
        if form == "dual":
            X = self._ref(name, form, val)
            if not m.rigid:
                raise self._error(
                    "model not rigid: the poset backend has no duals "
                    "(the triangle S2 -> 1 -> S1 does not split)",
                    hdr,
                    form,
                )
            return m.dual(X)
        if form == "cone":
            if not isinstance(val, dict):
                raise self._error("cone needs {map = NAME} or {scalar = ELEMENT, of = NAME}", hdr, form)
            if "map" in val:
                return cone(self.map(val["map"], owner=name))
            if "scalar" in val:
                X = self._ref(name, form, val.get("of", "unit"))
                a = self.element(val["scalar"], (hdr, form))
                return cone(scalar_map(X, a))
            raise self._error("cone needs a map or a scalar", hdr, form)
        if form == "rep":
            if not isinstance(m, PosetModel):
                raise self._error("rep objects need a poset model", hdr, form)
            return self._rep(name, val)
        if form == "simple" or form == "projective":
            if not isinstance(m, PosetModel):
                raise self._error(f"{form} objects need a poset model", hdr, form)
            e = str(val)
            if e not in m.poset.index:
                raise self._error(f"unknown poset element {e!r}", hdr, form)
            return m.simple(e) if form == "simple" else m.projective(e)
        raise self._error(f"unsupported object form {form}", hdr, form)

    def _degree_keys(self, name: str, key: str, table) -> dict:
        hdr = f"object.{name}"
        if not isinstance(table, dict):
            raise self._error(f"{key} must be a table keyed by degree", hdr, key)
        out = {}
        for k, v in table.items():
            try:
                out[int(k)] = v
            except ValueError:
                raise self._error(f"degree {k!r} is not an integer", hdr, key) from None
        return out

    def _explicit(self, name: str, spec: dict) -> Complex:
        hdr = f"object.{name}"
        m = self.model
        terms = self._degree_keys(name, "terms", spec["terms"])
        diffs = self._degree_keys(name, "d", spec.get("d", {}))
        try:
            if isinstance(m, AlgebraModel):
                ranks = {}
                for n, r in terms.items():
                    if not isinstance(r, int) or r < 0:
                        raise self._error(f"rank in degree {n} must be a nonnegative integer", hdr, "terms")
                    ranks[n] = r
                grids = {}
                for n, grid in diffs.items():
                    grids[n] = [[self.element(c, (hdr, "d")) for c in row] for row in _grid(grid)]
                return m.free_complex(ranks, grids, name)
            labs = {}
            for n, summands in terms.items():
                if not isinstance(summands, list):
                    raise self._error(f"degree {n} must list poset elements", hdr, "terms")
                for e in summands:
                    if str(e) not in m.poset.index:
                        raise self._error(f"unknown poset element {e!r}", hdr, "terms")
                labs[n] = [m.poset.index[str(e)] for e in summands]
            arrs = {}
            for n, grid in diffs.items():
                rows = _grid(grid)
                if any(not isinstance(c, int) or isinstance(c, bool) for r in rows for c in r):
                    raise self._error("poset differentials have integer entries", hdr, "d")
                arrs[n] = np.array(rows, dtype=np.int64).reshape(len(rows), -1)[:, :, None] if rows else np.zeros((0, 0, 1), dtype=np.int64)
            return Complex(m, labs, arrs, name)
        except ParseError:
            raise
        except UsageError as exc:
            raise self._error(f"object {name}: {exc}", hdr, "d" if "d^" in str(exc) else "terms") from None

    def _rep(self, name: str, val) -> Complex:
        hdr = f"object.{name}"
        m = self.model
        if not isinstance(val, dict) or "dims" not in val:
            raise self._error("rep needs {dims = {...}, maps = [...]}", hdr, "rep")
        dims = val["dims"]
        if not isinstance(dims, dict):
            raise self._error("dims must map element names to dimensions", hdr, "rep")
        maps = {}
        for entry in val.get("maps", []):
            if not isinstance(entry, dict) or not {"from", "to", "matrix"} <= set(entry):
                raise self._error("each map needs from, to and matrix", hdr, "rep")
            maps[(str(entry["from"]), str(entry["to"]))] = entry["matrix"]
        try:
            rep = m.representation({str(k): v for k, v in dims.items()}, maps)
        except (UsageError, ValueError) as exc:
            raise self._error(f"object {name}: {exc}", hdr, "rep") from None
        return m.from_representation(rep, name)

    # -- maps -------------------------------------------------------------------------
    def map(self, name: str, owner: Optional[str] = None) -> ChainMap:
        name = str(name)
        if name in self._maps:
            return self._maps[name]
        if name not in self._map_specs:
            if owner is not None:
                raise self._error(f"unknown map {name!r}", f"object.{owner}", "cone")
            raise UsageError(f"unknown map {name!r} in {self.source}")
        spec = self._map_specs[name]
        hdr = f"map.{name}"
        for k in spec:
            if k not in ("source", "target", "components", "scalar", "on"):
                raise self._error(f"unknown key {k!r} in map {name}", hdr, k)
        if "scalar" in spec:
            X = self._map_ref(name, "on", spec.get("on", "unit"))
            f = scalar_map(X, self.element(spec["scalar"], (hdr, "scalar")))
        else:
            if "source" not in spec or "target" not in spec:
                raise self._error(f"map {name} needs source and target", hdr)
            X = self._map_ref(name, "source", spec["source"])
            Y = self._map_ref(name, "target", spec["target"])
            comps = {}
            table = spec.get("components", {})
            if not isinstance(table, dict):
                raise self._error("components must be a table keyed by degree", hdr, "components")
            m = self.model
            for k, grid in table.items():
                try:
                    n = int(k)
                except ValueError:
                    raise self._error(f"degree {k!r} is not an integer", hdr, "components") from None
                rows = _grid(grid)
                tl, sl = Y.labels(n), X.labels(n)
                if len(rows) != tl.size or any(len(r) != sl.size for r in rows):
                    raise self._error(
                        f"component {n} must be a {tl.size} x {sl.size} grid", hdr, "components"
                    )
                arr = np.zeros((tl.size, sl.size, m.D), dtype=np.int64)
                for i, r in enumerate(rows):
                    for j, c in enumerate(r):
                        a = self.element(c, (hdr, "components"))
                        if isinstance(m, AlgebraModel):
                            if np.any(a) and tl[i] != sl[j]:
                                raise self._error(
                                    f"component {n} entry ({i}, {j}) joins different local factors",
                                    hdr,
                                    "components",
                                )
                            if tl[i] == sl[j]:
                                arr[i, j] = m.scalar_entry(a, int(sl[j]))
                        else:
                            arr[i, j, 0] = int(np.asarray(a).reshape(-1)[0]) if np.size(a) else 0
                comps[n] = arr
            try:
                f = ChainMap(X, Y, comps, check=True)
            except UsageError as exc:
                raise self._error(f"map {name}: {exc}", hdr, "components") from None
        self._maps[name] = f
        return f

    def _map_ref(self, owner: str, key: str, value) -> Complex:
        try:
            return self.object(str(value))
        except UsageError as exc:
            if isinstance(exc, ParseError):
                raise
            raise self._error(f"unknown object {value!r}", f"map.{owner}", key) from None


def _grid(value) -> list[list]:
    if not isinstance(value, list) or any(not isinstance(r, list) for r in value):
        raise UsageError("matrices are lists of rows")
    return value


def _header_regex(header: str) -> str:
    parts = header.split(".")
    return r"\s*\.\s*".join(r"\"?" + re.escape(p) + r"\"?" for p in parts)


def _toml_position(exc) -> tuple[int, int]:
    line = getattr(exc, "lineno", None)
    col = getattr(exc, "colno", None)
    if line is None:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        if m:
            line, col = int(m.group(1)), int(m.group(2))
    return line or 1, col or 1


_TUPLE = re.compile(r"^\s*\((.*)\)\s*$", re.S)


def parse_algebra_element(alg, value) -> np.ndarray:
    """Element syntax: integer, coordinate list, polynomial in x, or a tuple
    ``(f1, ..., fk)`` with one polynomial per factor of the presentation."""
    if isinstance(value, bool):
        raise UsageError("booleans are not algebra elements")
    if isinstance(value, int):
        return alg.vec(value)
    if isinstance(value, list):
        if len(value) != alg.dim or any(not isinstance(c, int) for c in value):
            raise UsageError(f"coordinate lists need {alg.dim} integers")
        return np.array(value, dtype=np.int64) % alg.p
    if not isinstance(value, str):
        raise UsageError(f"cannot read {value!r} as an algebra element")
    m = _TUPLE.match(value)
    pres = alg.presentation
    if m and pres is not None and "," in m.group(1):
        parts = [s.strip() for s in m.group(1).split(",")]
        if len(parts) != len(pres.terms):
            raise UsageError(
                f"tuple has {len(parts)} entries but the presentation has {len(pres.terms)} factors"
            )
        out = []
        for part, term in zip(parts, pres.terms):
            v = element_from_polynomial(parse_presentation(term.text), part)
            out.extend(v.tolist())
        return np.array(out, dtype=np.int64) % alg.p
    return element_from_polynomial(alg, value)


def load_model(path) -> ModelFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read model file {path}: {exc.strerror}") from None
    return ModelFile(text, str(path))


def parse_model(text: str, source: str = "<string>") -> ModelFile:
    return ModelFile(text, source)
