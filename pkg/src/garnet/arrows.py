"""Arrow categories over a pluggable ambient.

An AmbientHandle bundles the operations every construction downstream
needs: composition, colimits with mediators, hom enumeration, and the
mono/iso tests.  Three ambients are provided: finite sets, finite
presheaves, and the arrow category over any ambient (so the arrow category
over an ambient is itself an ambient, which is what the free-monad layer
iterates on).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import finset, presheaf as psh
from .errors import BoundaryMismatch, DomainMismatch, NaturalityViolation
from .fincat import FinCategory


class FinSetAmbient:
    kind = "finset"

    def __eq__(self, other):
        return isinstance(other, FinSetAmbient)

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return "FinSetAmbient()"

    def dom(self, m):
        return m.dom

    def cod(self, m):
        return m.cod

    def identity(self, x):
        return finset.identity(x)

    def compose(self, g, f):
        return finset.compose(g, f)

    def inverse(self, m):
        return m.inverse()

    def is_mono(self, m):
        return m.is_injective

    def is_epi(self, m):
        return m.is_surjective

    def is_iso(self, m):
        return m.is_bijective

    def is_identity(self, m):
        return m.is_identity

    def initial(self):
        return finset.EMPTY

    def from_initial(self, x):
        return finset.FinFunction(finset.EMPTY, x, ())

    def hom(self, a, b, cap=None):
        return finset.enumerate_functions(a, b, cap=cap)

    def isos(self, a, b, cap=None):
        return finset.enumerate_bijections(a, b, cap=cap)

    def pushout(self, f, g, tags=("i0", "i1")):
        return finset.pushout(f, g, tags=tags)

    def coproduct(self, parts, tags=None):
        return finset.coproduct(parts, tags=tags)

    def coequalizer(self, f, g):
        return finset.coequalizer(f, g)

    def sequential_colimit(self, maps, start=None):
        return finset.sequential_colimit(maps, start=start)

    def pullback(self, f, g):
        return finset.pullback(f, g)

    def obj_size(self, x):
        return x.size

    def obj_to_json(self, x):
        return finset.finset_to_json(x)

    def mor_to_json(self, m):
        return finset.function_to_json(m)


class PresheafAmbient:
    kind = "presheaf"

    def __init__(self, base: FinCategory):
        self.base = base

    def __eq__(self, other):
        return isinstance(other, PresheafAmbient) and self.base == other.base

    def __hash__(self):
        return hash((self.kind, self.base))

    def __repr__(self):
        return f"PresheafAmbient({self.base!r})"

    def dom(self, m):
        return m.source

    def cod(self, m):
        return m.target

    def identity(self, x):
        return psh.presheaf_identity(x)

    def compose(self, g, f):
        return psh.presheaf_compose(g, f)

    def inverse(self, m):
        return psh.presheaf_inverse(m)

    def is_mono(self, m):
        return m.is_mono

    def is_epi(self, m):
        return m.is_epi

    def is_iso(self, m):
        return m.is_iso

    def is_identity(self, m):
        return m.is_identity

    def initial(self):
        return psh.initial_presheaf(self.base)

    def from_initial(self, x):
        empty = self.initial()
        return psh.PresheafMap(empty, x, {
            c: finset.FinFunction(empty.at(c), x.at(c), ())
            for c in self.base.objects})

    def hom(self, a, b, cap=None):
        return psh.enumerate_maps(a, b, cap=cap)

    def isos(self, a, b, cap=None):
        return [m for m in self.hom(a, b, cap=cap) if m.is_iso]

    def pushout(self, f, g, tags=("i0", "i1")):
        return psh.presheaf_pushout(f, g, tags=tags)

    def coproduct(self, parts, tags=None):
        return psh.presheaf_coproduct(parts, tags=tags, base=self.base)

    def coequalizer(self, f, g):
        return psh.presheaf_coequalizer(f, g)

    def sequential_colimit(self, maps, start=None):
        return psh.presheaf_sequential_colimit(maps, start=start)

    def pullback(self, f, g):
        return psh.presheaf_pullback(f, g)

    def obj_size(self, x):
        return sum(x.at(c).size for c in self.base.objects)

    def obj_to_json(self, x):
        return psh.presheaf_to_json(x)

    def mor_to_json(self, m):
        return psh.presheaf_map_to_json(m)


@dataclass(frozen=True)
class ArrowObj:
    """An object of the arrow category: a morphism of the inner ambient."""
    ambient: object
    mor: object

    @property
    def dom(self):
        return self.ambient.dom(self.mor)

    @property
    def cod(self):
        return self.ambient.cod(self.mor)


@dataclass(frozen=True)
class Square:
    """A commuting square, i.e. a morphism source -> target of arrows."""
    source: ArrowObj
    target: ArrowObj
    top: object
    bottom: object

    def __post_init__(self):
        amb = self.source.ambient
        if self.target.ambient != amb:
            raise BoundaryMismatch("squares must live in one ambient")
        if amb.dom(self.top) != self.source.dom \
                or amb.cod(self.top) != self.target.dom \
                or amb.dom(self.bottom) != self.source.cod \
                or amb.cod(self.bottom) != self.target.cod:
            raise BoundaryMismatch("square sides are mistyped")
        lhs = amb.compose(self.target.mor, self.top)
        rhs = amb.compose(self.bottom, self.source.mor)
        if lhs != rhs:
            raise BoundaryMismatch("square does not commute")


def identity_square(f: ArrowObj) -> Square:
    amb = f.ambient
    return Square(f, f, amb.identity(f.dom), amb.identity(f.cod))


def compose_squares(s2: Square, s1: Square) -> Square:
    """Composition in the arrow category: s2 after s1."""
    if s1.target != s2.source:
        raise BoundaryMismatch("squares do not share the middle arrow")
    amb = s1.source.ambient
    return Square(s1.source, s2.target,
                  amb.compose(s2.top, s1.top),
                  amb.compose(s2.bottom, s1.bottom))


def stack_squares(upper: Square, lower: Square) -> Square:
    """Paste two squares along a shared middle row.

    The upper square sits over arrows f -> g and the lower over f' -> g'
    with f' following f; the result is a square over the composites.
    """
    if upper.bottom != lower.top:
        raise BoundaryMismatch("shared middle row differs")
    amb = upper.source.ambient
    src = ArrowObj(amb, amb.compose(lower.source.mor, upper.source.mor))
    tgt = ArrowObj(amb, amb.compose(lower.target.mor, upper.target.mor))
    return Square(src, tgt, upper.top, lower.bottom)


def compose_arrows(lower: ArrowObj, upper: ArrowObj) -> ArrowObj:
    """The composite arrow (lower after upper) as an object of Arr."""
    amb = upper.ambient
    return ArrowObj(amb, amb.compose(lower.mor, upper.mor))


class _ArrPushoutResult:
    def __init__(self, obj, left, right, dom_po, cod_po):
        self.obj: ArrowObj = obj
        self.left: Square = left
        self.right: Square = right
        self._dom_po = dom_po
        self._cod_po = cod_po

    def mediate(self, q: Square, r: Square) -> Square:
        return Square(self.obj, q.target,
                      self._dom_po.mediate(q.top, r.top),
                      self._cod_po.mediate(q.bottom, r.bottom))


class _ArrCoproductResult:
    def __init__(self, obj, injections, dom_cp, cod_cp):
        self.obj: ArrowObj = obj
        self.injections: tuple[Square, ...] = injections
        self._dom_cp = dom_cp
        self._cod_cp = cod_cp

    def mediate(self, legs: Sequence[Square], cod: ArrowObj | None = None):
        target = legs[0].target if legs else cod
        assert target is not None
        top = self._dom_cp.mediate([leg.top for leg in legs],
                                   cod=target.dom)
        bottom = self._cod_cp.mediate([leg.bottom for leg in legs],
                                      cod=target.cod)
        return Square(self.obj, target, top, bottom)


class _ArrCoequalizerResult:
    def __init__(self, obj, proj, dom_ce, cod_ce):
        self.obj: ArrowObj = obj
        self.proj: Square = proj
        self._dom_ce = dom_ce
        self._cod_ce = cod_ce

    def mediate(self, h: Square) -> Square:
        return Square(self.obj, h.target,
                      self._dom_ce.mediate(h.top),
                      self._cod_ce.mediate(h.bottom))


class _ArrChainColimitResult:
    def __init__(self, obj, legs, stable_from):
        self.obj: ArrowObj = obj
        self.legs: tuple[Square, ...] = legs
        self.stable_from = stable_from

    def mediate(self, cocone: Sequence[Square]) -> Square:
        h = cocone[self.stable_from]
        for i, leg in enumerate(self.legs):
            if cocone[i] != compose_squares(h, leg):
                raise DomainMismatch(f"cocone leg {i} does not factor")
        return h


class _ArrPullbackResult:
    def __init__(self, obj, left, right, dom_pb, cod_pb):
        self.obj: ArrowObj = obj
        self.left: Square = left
        self.right: Square = right
        self._dom_pb = dom_pb
        self._cod_pb = cod_pb

    def mediate(self, p: Square, q: Square) -> Square:
        return Square(p.source, self.obj,
                      self._dom_pb.mediate(p.top, q.top),
                      self._cod_pb.mediate(p.bottom, q.bottom))


class ArrowAmbient:
    """The arrow category over an inner ambient, itself an ambient."""

    kind = "arrow"

    def __init__(self, inner):
        self.inner = inner

    def __eq__(self, other):
        return isinstance(other, ArrowAmbient) and self.inner == other.inner

    def __hash__(self):
        return hash((self.kind, self.inner))

    def __repr__(self):
        return f"ArrowAmbient({self.inner!r})"

    def wrap(self, mor) -> ArrowObj:
        return ArrowObj(self.inner, mor)

    def dom(self, s: Square) -> ArrowObj:
        return s.source

    def cod(self, s: Square) -> ArrowObj:
        return s.target

    def identity(self, f: ArrowObj) -> Square:
        return identity_square(f)

    def compose(self, s2: Square, s1: Square) -> Square:
        return compose_squares(s2, s1)

    def inverse(self, s: Square) -> Square:
        return Square(s.target, s.source,
                      self.inner.inverse(s.top), self.inner.inverse(s.bottom))

    def is_mono(self, s: Square) -> bool:
        return self.inner.is_mono(s.top) and self.inner.is_mono(s.bottom)

    def is_epi(self, s: Square) -> bool:
        return self.inner.is_epi(s.top) and self.inner.is_epi(s.bottom)

    def is_iso(self, s: Square) -> bool:
        return self.inner.is_iso(s.top) and self.inner.is_iso(s.bottom)

    def is_identity(self, s: Square) -> bool:
        return self.inner.is_identity(s.top) and self.inner.is_identity(s.bottom)

    def initial(self) -> ArrowObj:
        return self.wrap(self.inner.identity(self.inner.initial()))

    def from_initial(self, f: ArrowObj) -> Square:
        return Square(self.initial(), f,
                      self.inner.from_initial(f.dom),
                      self.inner.from_initial(f.cod))

    def hom(self, a: ArrowObj, b: ArrowObj, cap=None) -> list[Square]:
        out = []
        for top in self.inner.hom(a.dom, b.dom, cap=cap):
            lhs = self.inner.compose(b.mor, top)
            for bottom in self.inner.hom(a.cod, b.cod, cap=cap):
                if lhs == self.inner.compose(bottom, a.mor):
                    out.append(Square(a, b, top, bottom))
        return out

    def isos(self, a: ArrowObj, b: ArrowObj, cap=None) -> list[Square]:
        out = []
        for top in self.inner.isos(a.dom, b.dom, cap=cap):
            lhs = self.inner.compose(b.mor, top)
            for bottom in self.inner.isos(a.cod, b.cod, cap=cap):
                if lhs == self.inner.compose(bottom, a.mor):
                    out.append(Square(a, b, top, bottom))
        return out

    def pushout(self, s: Square, t: Square, tags=("i0", "i1")):
        if s.source != t.source:
            raise DomainMismatch("pushout needs a span with a shared apex")
        dom_po = self.inner.pushout(s.top, t.top, tags=tags)
        cod_po = self.inner.pushout(s.bottom, t.bottom, tags=tags)
        b, c = s.target, t.target
        arrow = self.wrap(dom_po.mediate(
            self.inner.compose(cod_po.left, b.mor),
            self.inner.compose(cod_po.right, c.mor)))
        left = Square(b, arrow, dom_po.left, cod_po.left)
        right = Square(c, arrow, dom_po.right, cod_po.right)
        return _ArrPushoutResult(arrow, left, right, dom_po, cod_po)

    def coproduct(self, parts: Sequence[ArrowObj], tags=None):
        dom_cp = self.inner.coproduct([p.dom for p in parts], tags=tags)
        cod_cp = self.inner.coproduct([p.cod for p in parts], tags=tags)
        arrow = self.wrap(dom_cp.mediate(
            [self.inner.compose(cod_cp.injections[k], parts[k].mor)
             for k in range(len(parts))],
            cod=cod_cp.obj))
        injections = tuple(
            Square(parts[k], arrow, dom_cp.injections[k], cod_cp.injections[k])
            for k in range(len(parts)))
        return _ArrCoproductResult(arrow, injections, dom_cp, cod_cp)

    def coequalizer(self, s: Square, t: Square):
        if s.source != t.source or s.target != t.target:
            raise DomainMismatch("coequalizer needs a parallel pair")
        dom_ce = self.inner.coequalizer(s.top, t.top)
        cod_ce = self.inner.coequalizer(s.bottom, t.bottom)
        arrow = self.wrap(dom_ce.mediate(
            self.inner.compose(cod_ce.proj, s.target.mor)))
        proj = Square(s.target, arrow, dom_ce.proj, cod_ce.proj)
        return _ArrCoequalizerResult(arrow, proj, dom_ce, cod_ce)

    def sequential_colimit(self, maps: Sequence[Square],
                           start: ArrowObj | None = None):
        if not maps:
            assert start is not None
            return _ArrChainColimitResult(start, (identity_square(start),), 0)
        for i in range(len(maps) - 1):
            if maps[i].target != maps[i + 1].source:
                raise DomainMismatch(f"chain breaks between {i} and {i + 1}")
        objects = [maps[0].source] + [m.target for m in maps]
        k = len(maps)
        while k > 0 and self.is_iso(maps[k - 1]):
            k -= 1
        legs = []
        for i in range(len(objects)):
            if i <= k:
                leg = identity_square(objects[i])
                for m in maps[i:k]:
                    leg = compose_squares(m, leg)
            else:
                leg = identity_square(objects[k])
                for m in maps[k:i]:
                    leg = compose_squares(m, leg)
                leg = self.inverse(leg)
            legs.append(leg)
        return _ArrChainColimitResult(objects[k], tuple(legs), k)

    def pullback(self, s: Square, t: Square):
        if s.target != t.target:
            raise DomainMismatch("pullback needs a cospan with a shared foot")
        dom_pb = self.inner.pullback(s.top, t.top)
        cod_pb = self.inner.pullback(s.bottom, t.bottom)
        arrow = self.wrap(cod_pb.mediate(
            self.inner.compose(s.source.mor, dom_pb.left),
            self.inner.compose(t.source.mor, dom_pb.right)))
        left = Square(arrow, s.source, dom_pb.left, cod_pb.left)
        right = Square(arrow, t.source, dom_pb.right, cod_pb.right)
        return _ArrPullbackResult(arrow, left, right, dom_pb, cod_pb)

    def obj_size(self, f: ArrowObj):
        return self.inner.obj_size(f.dom) + self.inner.obj_size(f.cod)

    def obj_to_json(self, f: ArrowObj):
        return self.inner.mor_to_json(f.mor)

    def mor_to_json(self, s: Square):
        return {"top": self.inner.mor_to_json(s.top),
                "bottom": self.inner.mor_to_json(s.bottom)}


# -- functors and transformations as values -----------------------------------

@dataclass
class EndoData:
    """An endofunctor on an ambient, given by callables."""
    ambient: object
    on_obj: object
    on_mor: object


@dataclass
class NatTransData:
    """A natural transformation between EndoData functors."""
    source: EndoData
    target: EndoData
    component: object  # obj -> morphism source.on_obj(x) -> target.on_obj(x)


@dataclass
class LeibnizResult:
    gap: object
    pushout: object


def leibniz_pushout_apply(alpha: NatTransData, f) -> LeibnizResult:
    """Pushout gap map of alpha's naturality square at f.

    The square at f is pushed out along its top-left corner; the returned
    gap map satisfies gap . left = target(f) and gap . right = alpha(cod f).
    """
    amb = alpha.source.ambient
    a, b = amb.dom(f), amb.cod(f)
    ff = alpha.source.on_mor(f)
    gf = alpha.target.on_mor(f)
    alpha_a = alpha.component(a)
    alpha_b = alpha.component(b)
    if amb.compose(alpha_b, ff) != amb.compose(gf, alpha_a):
        raise NaturalityViolation("transformation is not natural at this map")
    po = amb.pushout(alpha_a, ff)
    gap = po.mediate(gf, alpha_b)
    return LeibnizResult(gap=gap, pushout=po)


class PointedEndofunctor:
    """An endofunctor with a unit from the identity."""

    def __init__(self, ambient, on_obj, on_mor, unit):
        self.ambient = ambient
        self.on_obj = on_obj
        self.on_mor = on_mor
        self.unit = unit  # obj -> morphism obj -> on_obj(obj)

    def unit_is_natural_at(self, m) -> bool:
        amb = self.ambient
        lhs = amb.compose(self.unit(amb.cod(m)), m)
        rhs = amb.compose(self.on_mor(m), self.unit(amb.dom(m)))
        return lhs == rhs

    def is_well_pointed_at(self, x) -> bool:
        t_unit = self.on_mor(self.unit(x))
        unit_t = self.unit(self.on_obj(x))
        return t_unit == unit_t


def tgt_endofunctor(inner) -> PointedEndofunctor:
    """The endofunctor of the arrow category collapsing an arrow onto its
    codomain identity; its unit at f is the square (f, id)."""
    arr = ArrowAmbient(inner)

    def on_obj(f: ArrowObj) -> ArrowObj:
        return arr.wrap(inner.identity(f.cod))

    def on_mor(s: Square) -> Square:
        return Square(on_obj(s.source), on_obj(s.target), s.bottom, s.bottom)

    def unit(f: ArrowObj) -> Square:
        return Square(f, on_obj(f), f.mor, inner.identity(f.cod))

    return PointedEndofunctor(arr, on_obj, on_mor, unit)


# -- memoization ---------------------------------------------------------------

class Session:
    """Per-run memo table; values are keyed by the hashable inputs."""

    def __init__(self):
        self._cache: dict = {}

    def memo(self, key, thunk):
        if key not in self._cache:
            self._cache[key] = thunk()
        return self._cache[key]
