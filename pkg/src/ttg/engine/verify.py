"""Registered property checks, run over a set of sample objects.

Each check returns a ``Report`` with fields property, model, samples,
verdict and witness.  Verdicts:

* ``pass`` / ``fail``;
* ``expected-failure``: the documented failure of a converse on a
  non-rigid model was observed (this counts as success);
* ``not-applicable``: the property needs structure the model lacks.

Rings are computed at the requested depth when affordable and at the
largest affordable depth otherwise; the depth used is recorded.
"""

from __future__ import annotations

import itertools
from typing import Callable, Optional

import numpy as np

from ..errors import UsageError
from ..models import (
    AlgebraModel,
    Complex,
    cone,
    direct_sum,
    evaluate,
    hom_space,
    identity,
    is_acyclic_at,
    is_nullhomotopic,
    is_zero,
    minimize,
    suspend,
    tensor,
    tensor_maps,
)
from ..models.homotopy import evaluate_map
from ..rings import FinCommAlgebra, match_prime
from ..spaces import connected_components, is_connected
from .balanced import BalancedEndoRing, TensorSquare, balanced_endos
from .colimit import DEFAULT_DEPTH, affordable_depth, r_object
from .compare import compare_comparison_maps
from .localize import localize_model
from .rho import (
    ComparisonMap,
    _ring_elements,
    default_generator,
    rho_closed_set,
    rho_from_ring,
    rho_unnatural,
    unit_action,
)

OK_VERDICTS = ("pass", "expected-failure", "not-applicable")
# ordered pairs of samples are limited to objects of at most this rank
PAIR_RANK = 4


class Report:
    def __init__(self, prop: str, model: str, samples: list, verdict: str, witness=None, details=None):
        self.property = prop
        self.model = model
        self.samples = list(samples)
        self.verdict = verdict
        self.witness = witness
        self.details = details or {}

    @property
    def ok(self) -> bool:
        return self.verdict in OK_VERDICTS

    def as_dict(self) -> dict:
        out = {
            "property": self.property,
            "model": self.model,
            "samples": self.samples,
            "verdict": self.verdict,
            "witness": self.witness,
        }
        if self.details:
            out["details"] = self.details
        return out

    def __repr__(self):
        return f"Report({self.property}: {self.verdict})"


class VerifyContext:
    """Samples plus caches shared by the checks of one model."""

    def __init__(self, model, samples: Optional[dict] = None, depth: int = DEFAULT_DEPTH):
        self.model = model
        self.depth = depth
        samples = dict(samples or {})
        if "unit" not in samples:
            samples = {"unit": model.unit(), **samples}
        self.samples = samples
        self._rho: dict = {}

    def names(self, nonzero: bool = True) -> list[str]:
        return [n for n, X in self.samples.items() if not (nonzero and is_zero(X))]

    def rho_of(self, X: Complex, label: str, graded: bool = False) -> Optional[ComparisonMap]:
        """The comparison map of X at the affordable depth, or None."""
        key = (X.key, graded)
        if key not in self._rho:
            d = affordable_depth(X, self.depth)
            if d == 0:
                self._rho[key] = None
            else:
                R = r_object(X, depth=d, graded=graded, label=label)
                self._rho[key] = rho_from_ring(R)
        return self._rho[key]

    def rho(self, name: str, graded: bool = False) -> Optional[ComparisonMap]:
        return self.rho_of(self.samples[name], name, graded)

    def pairs(self) -> list[tuple[str, str]]:
        small = [n for n in self.names() if minimize(self.samples[n]).small.total_rank() <= PAIR_RANK]
        return list(itertools.product(small, repeat=2))


def _report(ctx: VerifyContext, prop: str, samples, failures: list, details=None) -> Report:
    verdict = "fail" if failures else "pass"
    return Report(prop, ctx.model.name, samples, verdict, failures[0] if failures else None, details)


def _endo_elements(E: BalancedEndoRing) -> list[np.ndarray]:
    d = E.dim(0)
    if d == 0:
        return []
    if E.p**d <= 729:
        return [np.array(v, dtype=np.int64) for v in itertools.product(range(E.p), repeat=d)]
    return list(np.eye(d, dtype=np.int64))


# -- evaluation functors --------------------------------------------------------


def field_model(p: int) -> AlgebraModel:
    return AlgebraModel(FinCommAlgebra(p, [[[1]]], [1], name=f"F{p}"), name=f"D(F{p})")


class Evaluation:
    """The tensor functor to complexes of vector spaces at one point."""

    def __init__(self, model, point: str):
        self.model = model
        self.point = point
        self.q = model.point_index(point)
        cache = model._cache.setdefault("field_model", {})
        if model.p not in cache:
            cache[model.p] = field_model(model.p)
        self.target = cache[model.p]

    def __call__(self, X: Complex) -> Complex:
        dims, diffs = evaluate(X, self.q)
        terms = {n: [0] * r for n, r in dims.items()}
        return Complex(self.target, terms, {n: a[:, :, None] for n, a in diffs.items() if a.size}, X.name, check=False)

    def map(self, f, src: Complex, tgt: Complex):
        from ..models import ChainMap

        comps = {n: a[:, :, None] for n, a in evaluate_map(f, self.q).items()}
        return ChainMap(src, tgt, comps)


# -- the checks ----------------------------------------------------------------


def check_killscone(ctx: VerifyContext) -> Report:
    """``f^{⊗2} ⊗ cone(f)`` is null for balanced f."""
    failures, count = [], 0
    names = ctx.names()
    for name in names:
        E = balanced_endos(ctx.samples[name])
        for c in _endo_elements(E):
            f = E.element(0, c)
            C = minimize(cone(f)).small
            g = tensor_maps(tensor_maps(f, f), identity(C))
            count += 1
            if not is_nullhomotopic(g):
                failures.append({"object": name, "element": c.tolist()})
    return _report(ctx, "killscone", names, failures, {"maps_checked": count})


def _single_prime_localizations(model) -> list[tuple[str, object]]:
    out = []
    for x in model.points:
        if model.kind == "algebra":
            prime = model.primes[model.point_index(x)]
            out.append((x, localize_model(model, [prime.idempotent])))
        else:
            others = [e for e in model.poset.elements if f"x{e}" != x]
            out.append((x, localize_model(model, others) if others else None))
    return out


def check_local_E(ctx: VerifyContext) -> Report:
    """After localizing at one prime, the nonunits of E_X are closed under addition."""
    failures, details = [], {}
    names = ctx.names()
    for x, loc in _single_prime_localizations(ctx.model):
        for name in names:
            X = ctx.samples[name]
            Xl = loc(X) if loc is not None else X
            if is_zero(Xl):
                continue
            E = balanced_endos(Xl)
            elems = _endo_elements(E)
            units = [E.is_unit(0, c) for c in elems]
            nonunits = [c for c, u in zip(elems, units) if not u]
            details[f"{name}@{x}"] = {"dim": E.dim(0), "nonunits": len(nonunits)}
            if not any(units):
                failures.append({"object": name, "point": x, "reason": "no units"})
                continue
            for a, b in itertools.combinations_with_replacement(nonunits, 2):
                s = (a + b) % E.p
                if E.is_unit(0, s):
                    failures.append({"object": name, "point": x, "a": a.tolist(), "b": b.tolist()})
                    break
    return _report(ctx, "local_E", names, failures, details)


def check_twisting(ctx: VerifyContext) -> Report:
    """``X⊗f⊗g = f⊗X⊗g`` with g balanced forces ``f⊗g`` balanced on ``X⊗Y``."""
    failures, checked, skipped = [], 0, 0
    pairs = ctx.pairs()
    for xn, yn in pairs:
        MX = minimize(ctx.samples[xn]).small
        EY = balanced_endos(ctx.samples[yn])
        idX = identity(MX)
        W = tensor(MX, EY.minimal)
        red = minimize(W)
        square = TensorSquare(red.small)
        for f in hom_space(MX, MX).basis:
            for g in EY.basis_maps(0):
                lhs = tensor_maps(tensor_maps(idX, f), g)
                rhs = tensor_maps(tensor_maps(f, idX), g)
                if not hom_space(lhs.source, lhs.target).is_null(lhs - rhs):
                    skipped += 1
                    continue
                checked += 1
                h = red.proj @ tensor_maps(f, g) @ red.incl
                if np.any(square.defect(h, 0)):
                    failures.append({"X": xn, "Y": yn})
    return _report(ctx, "twisting", [f"{a}⊗{b}" for a, b in pairs], failures, {"checked": checked, "hypothesis_not_met": skipped})


def check_functorial_E(ctx: VerifyContext) -> Report:
    """Evaluation at a point sends E_X into E_{FX}, multiplicatively."""
    failures, count = [], 0
    names = ctx.names()
    for x in ctx.model.points:
        F = Evaluation(ctx.model, x)
        for name in names:
            E = balanced_endos(ctx.samples[name])
            M = E.minimal
            FM = F(M)
            if is_zero(FM):
                continue
            EF = BalancedEndoRing(FM)
            maps = E.basis_maps(0)
            images = [F.map(f, FM, FM) for f in maps]
            hs = hom_space(FM, FM)
            if not hs.is_null(F.map(identity(M), FM, FM) - identity(FM)):
                failures.append({"object": name, "point": x, "reason": "identity not preserved"})
            for f, Ff in zip(maps, images):
                count += 1
                if not EF.is_balanced(0, EF.from_object(0, Ff)):
                    failures.append({"object": name, "point": x, "reason": "image not balanced"})
            for (f, Ff), (g, Fg) in itertools.product(zip(maps, images), repeat=2):
                Ffg = F.map(f @ g, FM, FM)
                if not hs.is_null(Ffg - Ff @ Fg):
                    failures.append({"object": name, "point": x, "reason": "not multiplicative"})
    return _report(ctx, "functorial_E", names, failures, {"maps_checked": count})


def check_naturality(ctx: VerifyContext) -> Report:
    """``ρ_X(q)`` is the pullback of ``ρ_{F_q X}`` along ``F_*: R_X -> R_{F_q X}``."""
    failures, count = [], 0
    names = ctx.names()
    for name in names:
        cmap = ctx.rho(name)
        if cmap is None:
            continue
        R = cmap.ring
        M = R.representing_object
        for x in cmap.domain.points:
            F = Evaluation(ctx.model, x)
            FM = F(M)
            RF = r_object(FM, depth=max(1, min(R.depth, affordable_depth(FM, R.depth))), label=f"F{name}")
            rhoF = rho_from_ring(RF)
            red = minimize(FM)
            cols = []
            for b in np.eye(cmap.algebra.dim, dtype=np.int64):
                Fg = F.map(R.element_map(0, b), FM, FM)
                cols.append(RF.class_of(1, 0, red.proj @ Fg @ red.incl))
            Fstar = np.column_stack(cols)
            (pt,) = rhoF.domain.points
            chi = rhoF.prime(rhoF(pt)).character
            pulled = match_prime(cmap.algebra, (chi @ Fstar) % ctx.model.p).label
            count += 1
            if pulled != cmap(x):
                failures.append({"object": name, "point": x, "rho": cmap(x), "pulled_back": pulled})
    return _report(ctx, "naturality", names, failures, {"squares": count})


def _compare_pair(ctx: VerifyContext, prop: str, pairs: list[tuple[str, Complex, str, Complex]]) -> Report:
    failures, details = [], {}
    for an, A, bn, B in pairs:
        ca, cb = ctx.rho_of(A, an), ctx.rho_of(B, bn)
        if ca is None or cb is None:
            details[f"{an} vs {bn}"] = "skipped: over the size budget"
            continue
        ok, wit = compare_comparison_maps(ca, cb)
        details[f"{an} vs {bn}"] = {
            "depths": [ca.meta["depth"], cb.meta["depth"]],
            "stabilized": [bool(ca.meta["stabilized"]), bool(cb.meta["stabilized"])],
            "iso": ok,
        }
        if not ok:
            failures.append({"objects": [an, bn], **wit})
    samples = sorted({p[0] for p in pairs})
    return _report(ctx, prop, samples, failures, details)


def check_xky(ctx: VerifyContext) -> Report:
    """``R_{X⊗Y} ≅ R_{X⊗X⊗Y}`` compatibly with the comparison maps."""
    pairs = []
    for xn, yn in ctx.pairs():
        X, Y = ctx.samples[xn], ctx.samples[yn]
        W1 = minimize(tensor(X, Y)).small
        W2 = minimize(tensor(X, W1)).small
        if is_zero(W1):
            continue
        pairs.append((f"{xn}⊗{yn}", W1, f"{xn}⊗{xn}⊗{yn}", W2))
    return _compare_pair(ctx, "xky", pairs)


def check_dual_inv(ctx: VerifyContext) -> Report:
    """``R_X ≅ R_{DX}``."""
    if not ctx.model.rigid:
        return Report("dual_inv", ctx.model.name, [], "not-applicable", {"reason": "model has no duals"})
    pairs = [(n, ctx.samples[n], f"D{n}", ctx.model.dual(ctx.samples[n])) for n in ctx.names()]
    return _compare_pair(ctx, "dual_inv", pairs)


def check_sum_inv(ctx: VerifyContext) -> Report:
    """``R_X ≅ R_{X⊕X} ≅ R_{X⊕ΣX}``."""
    pairs = []
    for n in ctx.names():
        X = ctx.samples[n]
        pairs.append((n, X, f"{n}⊕{n}", direct_sum(X, X)))
        pairs.append((n, X, f"{n}⊕Σ{n}", direct_sum(X, suspend(X, 1))))
    return _compare_pair(ctx, "sum_inv", pairs)


def _maps(ctx: VerifyContext, graded: bool = False):
    for n in ctx.names(nonzero=False):
        cmap = ctx.rho(n, graded)
        if cmap is not None:
            yield n, cmap


def check_dense(ctx: VerifyContext) -> Report:
    failures, names = [], []
    for n, cmap in _maps(ctx):
        names.append(n)
        if cmap.target.closed(cmap.image()).points != frozenset(cmap.target.points):
            failures.append({"object": n, "image": sorted(cmap.image()), "spec": list(cmap.target.points)})
    return _report(ctx, "dense", names, failures)


def check_proper(ctx: VerifyContext) -> Report:
    failures, names = [], []
    for n, cmap in _maps(ctx):
        names.append(n)
        whole = frozenset(cmap.domain.points)
        for W in cmap.target.closed_sets():
            if W.points == frozenset(cmap.target.points):
                continue
            if whole and cmap.preimage(W.points) == whole:
                failures.append({"object": n, "closed_set": W.labels()})
    return _report(ctx, "proper", names, failures)


def check_connected_fwd(ctx: VerifyContext) -> Report:
    failures, names = [], []
    for graded in (False, True):
        for n, cmap in _maps(ctx, graded):
            names.append(n + ("•" if graded else ""))
            z_conn = is_connected(cmap.domain, cmap.domain.points)
            s_conn = is_connected(cmap.target, cmap.target.points)
            if z_conn and not s_conn:
                failures.append({"object": n, "graded": graded})
    return _report(ctx, "connected_fwd", names, failures)


def check_connected_rigid(ctx: VerifyContext) -> Report:
    """Spec connected implies Z connected, on rigid models.

    On a non-rigid model the check looks for the documented counterexample.
    """
    witnesses, names = [], []
    for graded in (False, True):
        for n, cmap in _maps(ctx, graded):
            names.append(n + ("•" if graded else ""))
            if not cmap.domain.points:
                continue
            z_conn = is_connected(cmap.domain, cmap.domain.points)
            s_conn = is_connected(cmap.target, cmap.target.points)
            if s_conn and not z_conn:
                witnesses.append(
                    {
                        "object": n,
                        "graded": graded,
                        "ring_dims": {str(k): v for k, v in cmap.ring.dims.items()},
                        "spec": list(map(str, cmap.target.points)),
                        "Z_components": [sorted(c) for c in connected_components(cmap.domain, cmap.domain.points)],
                    }
                )
    if ctx.model.rigid:
        return _report(ctx, "connected_rigid", names, witnesses)
    if witnesses:
        return Report("connected_rigid", ctx.model.name, names, "expected-failure", witnesses[0])
    return Report("connected_rigid", ctx.model.name, names, "fail", {"reason": "expected counterexample not found"})


def check_constant(ctx: VerifyContext) -> Report:
    failures, names = [], []
    for n, cmap in _maps(ctx):
        names.append(n)
        if cmap.domain.points and cmap.is_constant() and len(cmap.target.points) != 1:
            failures.append({"object": n, "spec": list(map(str, cmap.target.points))})
    return _report(ctx, "constant", names, failures)


def check_inclusion_rev(ctx: VerifyContext) -> Report:
    """Every emitted comparison map is spectral and inclusion-reversing."""
    failures, names = [], []
    maps = []
    for graded in (False, True):
        for n, cmap in _maps(ctx, graded):
            maps.append((n + ("•" if graded else ""), cmap))
    model = ctx.model
    for Z in model.space.closed_sets():
        if not Z.points:
            continue
        maps.append((f"ρ_{{{','.join(Z.labels())}}}", rho_closed_set(Z, [default_generator(model, Z.points)], depth=min(ctx.depth, 2))))
    A, alpha = unit_action(model.unit())
    maps.append(("ρ_unit_action", rho_unnatural(model.unit(), A, alpha, label="unit")))
    for n, cmap in maps:
        names.append(n)
        if not cmap.spectral:
            failures.append({"map": n, "reason": cmap.spectral.reason or "not spectral"})
        elif cmap.reversal_witness is not None:
            failures.append({"map": n, "violating_pair": list(map(str, cmap.reversal_witness))})
    return _report(ctx, "inclusion_rev", names, failures)


PROPERTIES: dict[str, Callable[[VerifyContext], Report]] = {
    "killscone": check_killscone,
    "local_E": check_local_E,
    "twisting": check_twisting,
    "functorial_E": check_functorial_E,
    "naturality": check_naturality,
    "xky": check_xky,
    "dual_inv": check_dual_inv,
    "sum_inv": check_sum_inv,
    "dense": check_dense,
    "proper": check_proper,
    "connected_fwd": check_connected_fwd,
    "connected_rigid": check_connected_rigid,
    "constant": check_constant,
    "inclusion_rev": check_inclusion_rev,
}


def verify(model, prop: str, samples: Optional[dict] = None, depth: int = DEFAULT_DEPTH, ctx: Optional[VerifyContext] = None) -> Report:
    if prop not in PROPERTIES:
        raise UsageError(f"unknown property {prop!r}; choose from {', '.join(PROPERTIES)}")
    ctx = ctx or VerifyContext(model, samples, depth)
    return PROPERTIES[prop](ctx)


def verify_all(model, samples: Optional[dict] = None, depth: int = DEFAULT_DEPTH) -> list[Report]:
    ctx = VerifyContext(model, samples, depth)
    return [PROPERTIES[p](ctx) for p in PROPERTIES]
