"""Free algebras and free monads on pointed endofunctors.

The construction iterates a one-step quotient on triples (A, B, f: TA -> B)
until the step's unit becomes invertible, keeping a full trace: every stage's
pushouts, the unit components with their backdrop certificates, and the
convergence bookkeeping.  The trace is what makes extensions cheap: the
universal property of the colimit is replayed stage by stage instead of being
re-solved globally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arrows import PointedEndofunctor
from .errors import (BackdropViolation, DomainMismatch, IterationLimit,
                     MalformedInput, NotAnAlgebra)

DEFAULT_MAX_STEPS = 64


@dataclass(frozen=True)
class Backdrop:
    """A class of maps the construction's unit components must stay inside.

    kind "all" admits everything, "mono" admits the ambient's monos, and
    "domain" tests the top component of a square against an inner backdrop
    (only meaningful over an arrow ambient).
    """
    kind: str
    inner: "Backdrop | None" = None

    def __post_init__(self):
        if self.kind not in ("all", "mono", "domain"):
            raise MalformedInput(f"unknown backdrop kind {self.kind!r}")
        if (self.kind == "domain") != (self.inner is not None):
            raise MalformedInput(
                "domain backdrop takes exactly one inner backdrop")

    def contains(self, ambient, m) -> bool:
        if self.kind == "all":
            return True
        if self.kind == "mono":
            return ambient.is_mono(m)
        return self.inner.contains(ambient.inner, m.top)


def backdrop_to_json(b: Backdrop):
    if b.kind == "domain":
        return {"kind": "domain", "inner": backdrop_to_json(b.inner)}
    return b.kind


def backdrop_from_json(data) -> Backdrop:
    if isinstance(data, str):
        return Backdrop(data)
    if isinstance(data, dict) and data.get("kind") == "domain":
        if "inner" not in data:
            raise MalformedInput("domain backdrop needs an inner backdrop")
        return Backdrop("domain", backdrop_from_json(data["inner"]))
    raise MalformedInput(f"not a backdrop description: {data!r}")


@dataclass(frozen=True)
class FreeMonadConfig:
    ambient: object
    backdrop: Backdrop
    t: PointedEndofunctor

    def __post_init__(self):
        if self.t.ambient != self.ambient:
            raise MalformedInput(
                "the pointed endofunctor lives over a different ambient")


@dataclass(frozen=True)
class QoppaObject:
    """A partial algebra stage: objects a, b and a map f: T(a) -> b."""
    a: object
    b: object
    f: object


@dataclass(frozen=True)
class StepResult:
    new: QoppaObject
    g: object  # unit domain component a -> b, equals f after the point
    h: object  # unit codomain component b -> new.b
    k: object  # induced structure map T(b) -> new.b
    mid: object = field(repr=False)    # pushout of the point against g
    out: object = field(repr=False)    # pushout of the gap against the fold
    gap: object = field(repr=False)    # mid -> T(b)
    fold: object = field(repr=False)   # mid -> b
    certificates: tuple = ()


@dataclass(frozen=True)
class StageRecord:
    index: int
    x: QoppaObject
    step: StepResult = field(repr=False)
    unit_iso: tuple
    coherent: bool | None


@dataclass(frozen=True)
class FreeMonadTrace:
    start: object
    stages: tuple
    converged_stage: int | None
    stability: dict | None = field(repr=False, default=None)


@dataclass(frozen=True)
class FreeAlgebraResult:
    cfg: FreeMonadConfig = field(repr=False)
    start: object
    carrier: object
    structure: object
    unit: object
    trace: FreeMonadTrace = field(repr=False)


def qoppa_step(cfg: FreeMonadConfig, x: QoppaObject) -> StepResult:
    """One quotient step: glue a fresh free layer onto b and collapse the
    part already reachable from a."""
    amb, t = cfg.ambient, cfg.t
    if amb.dom(x.f) != t.on_obj(x.a) or amb.cod(x.f) != x.b:
        raise MalformedInput("stage map must go from T(a) to b")
    g = amb.compose(x.f, t.unit(x.a))
    certs = []
    if not cfg.backdrop.contains(amb, g):
        raise BackdropViolation(
            "stage unit domain component fell outside the backdrop")
    certs.append({"component": "domain", "provenance": "hypothesis",
                  "in_backdrop": True})
    mid = amb.pushout(t.unit(x.a), g)
    gap = mid.mediate(t.on_mor(g), t.unit(x.b))
    fold = mid.mediate(x.f, amb.identity(x.b))
    out = amb.pushout(gap, fold)
    k, h = out.left, out.right
    # the point of the new stage is h, on the nose
    assert amb.compose(k, t.unit(x.b)) == h
    if not cfg.backdrop.contains(amb, h):
        raise BackdropViolation(
            "stage unit codomain component fell outside the backdrop; "
            "cobase change left the configured class")
    certs.append({"component": "codomain", "provenance": "cobase-change",
                  "in_backdrop": True})
    return StepResult(QoppaObject(x.b, amb.cod(h), k), g, h, k,
                      mid, out, gap, fold, tuple(certs))


def step_on_morphism(cfg: FreeMonadConfig, src: StepResult, tgt: StepResult,
                     a, b):
    """The step's action on a stage morphism (a, b): the new domain component
    is b and the new codomain component is the induced map between the step
    pushouts."""
    amb, t = cfg.ambient, cfg.t
    q = amb.compose(tgt.k, t.on_mor(b))
    r = amb.compose(tgt.h, b)
    return b, src.out.mediate(q, r)


def _coherence(cfg, prev: StageRecord, step: StepResult) -> bool:
    # applying the step to the previous unit must reproduce this unit
    _, c = step_on_morphism(cfg, prev.step, step, prev.step.g, prev.step.h)
    return c == step.h


def free_algebra(cfg: FreeMonadConfig, start,
                 max_steps: int = DEFAULT_MAX_STEPS) -> FreeAlgebraResult:
    """Iterate the quotient step from (start, T start, id) until the unit
    inverts, then extract the algebra."""
    if max_steps < 1:
        raise MalformedInput("max_steps must be at least 1")
    amb, t = cfg.ambient, cfg.t
    if not cfg.backdrop.contains(amb, t.unit(start)):
        raise BackdropViolation("the unit at the seed is outside the backdrop")
    tx = t.on_obj(start)
    x = QoppaObject(start, tx, amb.identity(tx))
    stages: list[StageRecord] = []
    converged = None
    for n in range(max_steps):
        step = qoppa_step(cfg, x)
        coherent = _coherence(cfg, stages[-1], step) if stages else None
        unit_iso = (amb.is_iso(step.g), amb.is_iso(step.h))
        stages.append(StageRecord(n, x, step, unit_iso, coherent))
        if unit_iso[0] and unit_iso[1]:
            converged = n
            break
        x = step.new
    if converged is None:
        err = IterationLimit(f"no convergence within {max_steps} steps")
        err.trace = FreeMonadTrace(start, tuple(stages), None)
        raise err
    # stability: one step past detection must again be invertible, and the
    # two step units compose to the recorded stabilization iso
    step = stages[-1].step
    extra = qoppa_step(cfg, step.new)
    coherent = _coherence(cfg, stages[-1], extra)
    extra_iso = (amb.is_iso(extra.g), amb.is_iso(extra.h))
    stages.append(StageRecord(converged + 1, step.new, extra, extra_iso,
                              coherent))
    assert extra_iso == (True, True), "converged stage failed to stabilize"
    stability = {"domain": amb.compose(extra.g, step.g),
                 "codomain": amb.compose(extra.h, step.h)}
    at = stages[converged]
    carrier = at.x.a
    structure = amb.compose(amb.inverse(at.step.g), at.x.f)
    assert amb.compose(structure, t.unit(carrier)) == amb.identity(carrier)
    unit = amb.identity(start)
    for rec in stages[:converged]:
        unit = amb.compose(rec.step.g, unit)
    if not cfg.backdrop.contains(amb, unit):
        raise BackdropViolation("the composite unit is outside the backdrop")
    trace = FreeMonadTrace(start, tuple(stages), converged, stability)
    return FreeAlgebraResult(cfg, start, carrier, structure, unit, trace)


def algebra_extend(free: FreeAlgebraResult, target, h):
    """The unique algebra map out of the free algebra extending h, rebuilt
    by walking the trace.

    target is a pair (object, structure map T(object) -> object) satisfying
    the unit law; h goes from the free algebra's seed to the target object.
    """
    cfg = free.cfg
    amb, t = cfg.ambient, cfg.t
    d_obj, d = target
    if amb.dom(d) != t.on_obj(d_obj) or amb.cod(d) != d_obj:
        raise MalformedInput("target structure must go from T(object) to it")
    if amb.compose(d, t.unit(d_obj)) != amb.identity(d_obj):
        raise NotAnAlgebra("target structure does not retract the unit")
    if amb.dom(h) != free.start or amb.cod(h) != d_obj:
        raise DomainMismatch("extension seed must go from the start object "
                             "to the target object")
    u = h
    v = amb.compose(d, t.on_mor(u))
    for n in range(free.trace.converged_stage):
        rec = free.trace.stages[n]
        u, v = v, rec.step.out.mediate(amb.compose(d, t.on_mor(v)), v)
    at = free.trace.stages[free.trace.converged_stage]
    assert amb.compose(v, at.x.f) == amb.compose(d, t.on_mor(u))
    assert amb.compose(u, free.unit) == h
    assert amb.compose(u, free.structure) == amb.compose(d, t.on_mor(u))
    return u


class FreeMonad:
    """The free monad generated by a pointed endofunctor, with algebras
    computed on demand and law reports per requested object."""

    def __init__(self, cfg: FreeMonadConfig,
                 max_steps: int = DEFAULT_MAX_STEPS):
        self.cfg = cfg
        self.max_steps = max_steps
        self._algebras: dict = {}
        self.law_reports: dict = {}

    def algebra(self, x) -> FreeAlgebraResult:
        if x not in self._algebras:
            self._algebras[x] = free_algebra(self.cfg, x, self.max_steps)
        return self._algebras[x]

    def apply(self, x):
        return self.algebra(x).carrier

    def unit(self, x):
        return self.algebra(x).unit

    def map(self, m):
        """Functorial action on an ambient morphism."""
        amb = self.cfg.ambient
        src = self.algebra(amb.dom(m))
        tgt = self.algebra(amb.cod(m))
        return algebra_extend(src, (tgt.carrier, tgt.structure),
                              amb.compose(tgt.unit, m))

    def mult(self, x):
        fa = self.algebra(x)
        outer = self.algebra(fa.carrier)
        return algebra_extend(outer, (fa.carrier, fa.structure),
                              self.cfg.ambient.identity(fa.carrier))

    def laws(self, x) -> dict:
        """Check the monad laws at x and record the report."""
        if x in self.law_reports:
            return self.law_reports[x]
        amb = self.cfg.ambient
        fa = self.algebra(x)
        rx = fa.carrier
        mu = self.mult(x)
        ident = amb.identity(rx)
        report = {
            "left_unit": amb.compose(mu, self.unit(rx)) == ident,
            "right_unit": amb.compose(mu, self.map(fa.unit)) == ident,
            "associativity": amb.compose(mu, self.map(mu)) ==
                amb.compose(mu, self.mult(rx)),
            "unit_in_backdrop": self.cfg.backdrop.contains(amb, fa.unit),
        }
        self.law_reports[x] = report
        return report


def free_monad(cfg: FreeMonadConfig,
               max_steps: int = DEFAULT_MAX_STEPS) -> FreeMonad:
    return FreeMonad(cfg, max_steps)


def trace_to_json(result: FreeAlgebraResult) -> dict:
    amb = result.cfg.ambient
    stages = []
    for rec in result.trace.stages:
        stages.append({
            "stage": rec.index,
            "object": {"a": amb.obj_to_json(rec.x.a),
                       "b": amb.obj_to_json(rec.x.b),
                       "f": amb.mor_to_json(rec.x.f)},
            "pushouts": {"mid": amb.obj_to_json(rec.step.mid.obj),
                         "out": amb.obj_to_json(rec.step.out.obj)},
            "unit": {"domain": amb.mor_to_json(rec.step.g),
                     "codomain": amb.mor_to_json(rec.step.h)},
            "unit_components_iso": list(rec.unit_iso),
            "step_unit_coherent": rec.coherent,
            "certificates": list(rec.step.certificates),
        })
    return {
        "start": amb.obj_to_json(result.start),
        "stages": stages,
        "converged_stage": result.trace.converged_stage,
        "stability": {
            "domain": amb.mor_to_json(result.trace.stability["domain"]),
            "codomain": amb.mor_to_json(result.trace.stability["codomain"]),
        },
        "carrier": amb.obj_to_json(result.carrier),
        "structure": amb.mor_to_json(result.structure),
        "unit": amb.mor_to_json(result.unit),
    }
