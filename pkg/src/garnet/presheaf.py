"""Finite-set-valued presheaves on a finite base category.

Everything is levelwise over the substrate in finset: colimits are computed
object by object and reassembled, with naturality of the induced maps
re-verified afterwards.  The subobject classifier is the full sieve
classifier; on these finite, fully decidable bases it coincides with the
levelwise complemented one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import finset
from .errors import (
    EnumerationCap,
    MalformedInput,
    NaturalityViolation,
    ShapeMismatch,
    UnknownObject,
)
from .fincat import FinCategory, identity_name
from .finset import FinFunction, FinSet, compose, identity


class Presheaf:
    """Contravariant finite-set diagram: restrict(m: x->y) maps at(y) to at(x)."""

    def __init__(self, base: FinCategory, at, restrict):
        self.base = base
        self._at: dict[str, FinSet] = dict(at)
        for x in base.objects:
            if x not in self._at:
                raise ShapeMismatch(f"no value at object {x!r}")
        for x in self._at:
            if x not in base.objects:
                raise UnknownObject(f"value at unknown object {x!r}")
        self._restrict: dict[str, FinFunction] = {}
        given = dict(restrict)
        for m in base.morphisms:
            if base.is_identity(m.name):
                expected = identity(self._at[m.dom])
                if m.name in given and given[m.name] != expected:
                    raise ShapeMismatch(f"restriction along {m.name!r} must be "
                                        f"the identity")
                self._restrict[m.name] = expected
                continue
            if m.name not in given:
                raise ShapeMismatch(f"no restriction along {m.name!r}")
            r = given[m.name]
            if r.dom != self._at[m.cod] or r.cod != self._at[m.dom]:
                raise ShapeMismatch(f"restriction along {m.name!r} has wrong "
                                    f"shape")
            self._restrict[m.name] = r
        for name in given:
            if not base.has_morphism(name):
                raise UnknownObject(f"restriction along unknown {name!r}")

    def at(self, x: str) -> FinSet:
        if x not in self._at:
            raise UnknownObject(f"unknown object {x!r}")
        return self._at[x]

    def restrict(self, name: str) -> FinFunction:
        if name not in self._restrict:
            raise UnknownObject(f"unknown morphism {name!r}")
        return self._restrict[name]

    def _key(self):
        return (self.base,
                tuple((x, self._at[x]) for x in self.base.objects),
                tuple(sorted(self._restrict.items())))

    def __eq__(self, other):
        return isinstance(other, Presheaf) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        sizes = ", ".join(f"{x}:{self._at[x].size}" for x in self.base.objects)
        return f"Presheaf({sizes})"


def validate_presheaf(p: Presheaf) -> list[str]:
    """Functoriality report; empty means valid."""
    report = []
    cat = p.base
    for g in cat.morphisms:
        for f in cat.morphisms:
            if f.cod != g.dom:
                continue
            gf = cat.compose(g.name, f.name)
            if p.restrict(gf) != compose(p.restrict(f.name), p.restrict(g.name)):
                report.append(f"restriction fails functoriality at "
                              f"({g.name!r}, {f.name!r})")
    return report


class PresheafMap:
    def __init__(self, source: Presheaf, target: Presheaf, components):
        if source.base != target.base:
            raise ShapeMismatch("source and target live on different bases")
        self.source = source
        self.target = target
        self.components: dict[str, FinFunction] = dict(components)
        base = source.base
        for x in base.objects:
            if x not in self.components:
                raise ShapeMismatch(f"no component at object {x!r}")
            c = self.components[x]
            if c.dom != source.at(x) or c.cod != target.at(x):
                raise ShapeMismatch(f"component at {x!r} has wrong shape")
        for m in base.morphisms:
            if base.is_identity(m.name):
                continue
            lhs = compose(self.at(m.dom), source.restrict(m.name))
            rhs = compose(target.restrict(m.name), self.at(m.cod))
            if lhs != rhs:
                raise NaturalityViolation(f"naturality fails along {m.name!r}")

    def at(self, x: str) -> FinFunction:
        return self.components[x]

    @property
    def is_mono(self) -> bool:
        return all(c.is_injective for c in self.components.values())

    @property
    def is_epi(self) -> bool:
        return all(c.is_surjective for c in self.components.values())

    @property
    def is_iso(self) -> bool:
        return all(c.is_bijective for c in self.components.values())

    @property
    def is_identity(self) -> bool:
        return all(c.is_identity for c in self.components.values())

    def _key(self):
        return (self.source, self.target,
                tuple((x, self.components[x]) for x in self.source.base.objects))

    def __eq__(self, other):
        return isinstance(other, PresheafMap) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"PresheafMap({self.source!r} -> {self.target!r})"


def presheaf_identity(p: Presheaf) -> PresheafMap:
    return PresheafMap(p, p, {x: identity(p.at(x)) for x in p.base.objects})


def presheaf_compose(g: PresheafMap, f: PresheafMap) -> PresheafMap:
    if f.target != g.source:
        raise ShapeMismatch("presheaf maps do not compose")
    return PresheafMap(f.source, g.target,
                       {x: compose(g.at(x), f.at(x))
                        for x in f.source.base.objects})


def presheaf_inverse(f: PresheafMap) -> PresheafMap:
    assert f.is_iso
    return PresheafMap(f.target, f.source,
                       {x: f.at(x).inverse() for x in f.source.base.objects})


def constant_presheaf(base: FinCategory, value: FinSet) -> Presheaf:
    return Presheaf(base, {x: value for x in base.objects},
                    {m.name: identity(value)
                     for m in base.non_identity_morphisms()})


def terminal_presheaf(base: FinCategory) -> Presheaf:
    return constant_presheaf(base, FinSet(("*",)))


def initial_presheaf(base: FinCategory) -> Presheaf:
    return constant_presheaf(base, finset.EMPTY)


def yoneda(base: FinCategory, c: str) -> Presheaf:
    """Representable presheaf x |-> Hom(x, c), restriction by precomposition."""
    if c not in base.objects:
        raise UnknownObject(f"unknown object {c!r}")
    at = {x: FinSet(tuple(base.hom(x, c))) for x in base.objects}
    restrict = {}
    for m in base.non_identity_morphisms():
        dom_set, cod_set = at[m.cod], at[m.dom]
        table = tuple(cod_set.index_of(base.compose(h, m.name))
                      for h in dom_set.labels)
        restrict[m.name] = FinFunction(dom_set, cod_set, table)
    return Presheaf(base, at, restrict)


def yoneda_map(base: FinCategory, m: str) -> PresheafMap:
    """The representable map y(dom m) -> y(cod m), postcomposition by m."""
    arrow = base.morphism(m)
    src, tgt = yoneda(base, arrow.dom), yoneda(base, arrow.cod)
    comps = {}
    for x in base.objects:
        table = tuple(tgt.at(x).index_of(base.compose(m, h))
                      for h in src.at(x).labels)
        comps[x] = FinFunction(src.at(x), tgt.at(x), table)
    return PresheafMap(src, tgt, comps)


def element_map(p: Presheaf, c: str, i: int) -> PresheafMap:
    """The map y(c) -> p picking out element i of p at c (Yoneda lemma)."""
    src = yoneda(p.base, c)
    comps = {}
    for x in p.base.objects:
        table = tuple(p.restrict(h)(i) for h in src.at(x).labels)
        comps[x] = FinFunction(src.at(x), p.at(x), table)
    return PresheafMap(src, p, comps)


# -- subobject classifier ----------------------------------------------------

def sieve_label(names: Sequence[str]) -> str:
    return "{" + ",".join(names) + "}"


def sieves_on(base: FinCategory, c: str) -> list[tuple[str, ...]]:
    """All sieves on c in deterministic order, as tuples of morphism names."""
    arrows = [m.name for m in base.morphisms if m.cod == c]
    out = []
    for mask in range(1 << len(arrows)):
        chosen = [a for i, a in enumerate(arrows) if mask >> i & 1]
        member = set(chosen)
        closed = True
        for h in chosen:
            for g in base.morphisms:
                if g.cod != base.morphism(h).dom:
                    continue
                if base.compose(h, g.name) not in member:
                    closed = False
                    break
            if not closed:
                break
        if closed:
            out.append(tuple(chosen))
    return out


def subobject_classifier(base: FinCategory) -> tuple[Presheaf, PresheafMap]:
    """Sieve classifier with its truth point from the terminal presheaf."""
    sieves = {c: sieves_on(base, c) for c in base.objects}
    index = {c: {frozenset(s): i for i, s in enumerate(sieves[c])}
             for c in base.objects}
    at = {c: FinSet(tuple(sieve_label(s) for s in sieves[c]))
          for c in base.objects}
    restrict = {}
    for m in base.non_identity_morphisms():
        table = []
        for s in sieves[m.cod]:
            member = set(s)
            pulled = frozenset(h.name for h in base.morphisms
                               if h.cod == m.dom
                               and base.compose(m.name, h.name) in member)
            table.append(index[m.dom][pulled])
        restrict[m.name] = FinFunction(at[m.cod], at[m.dom], tuple(table))
    omega = Presheaf(base, at, restrict)
    one = terminal_presheaf(base)
    maximal = {c: index[c][frozenset(m.name for m in base.morphisms
                                     if m.cod == c)]
               for c in base.objects}
    truth = PresheafMap(one, omega,
                        {c: FinFunction(one.at(c), omega.at(c), (maximal[c],))
                         for c in base.objects})
    return omega, truth


def pullback_classify(t: PresheafMap, a: PresheafMap) -> PresheafMap:
    """Base change of the truth point t along a: the mono classified by a."""
    if a.target != t.target:
        raise ShapeMismatch("classifying map must land in the classifier")
    base = a.source.base
    x = a.source
    truth_at = {c: t.at(c)(0) for c in base.objects}
    kept = {c: [i for i in range(x.at(c).size) if a.at(c)(i) == truth_at[c]]
            for c in base.objects}
    at = {c: FinSet(tuple(x.at(c).labels[i] for i in kept[c]))
          for c in base.objects}
    restrict = {}
    for m in base.non_identity_morphisms():
        r = x.restrict(m.name)
        pos = {i: p for p, i in enumerate(kept[m.dom])}
        restrict[m.name] = FinFunction(
            at[m.cod], at[m.dom], tuple(pos[r(i)] for i in kept[m.cod]))
    dom = Presheaf(base, at, restrict)
    return PresheafMap(dom, x,
                       {c: FinFunction(at[c], x.at(c), tuple(kept[c]))
                        for c in base.objects})


def classify_mono(t: PresheafMap, m: PresheafMap) -> PresheafMap:
    """Classifying map of a levelwise mono into the sieve classifier."""
    if not m.is_mono:
        raise ShapeMismatch("only levelwise monomorphisms are classifiable")
    base = m.source.base
    omega = t.target
    index = {c: {frozenset(_sieve_members(omega, c, i)): i
                 for i in range(omega.at(c).size)}
             for c in base.objects}
    comps = {}
    for c in base.objects:
        image = {c2: set(m.at(c2).table) for c2 in base.objects}
        table = []
        for xi in range(m.target.at(c).size):
            sieve = frozenset(
                h.name for h in base.morphisms
                if h.cod == c and m.target.restrict(h.name)(xi) in image[h.dom])
            table.append(index[c][sieve])
        comps[c] = FinFunction(m.target.at(c), omega.at(c), tuple(table))
    return PresheafMap(m.target, omega, comps)


def _sieve_members(omega: Presheaf, c: str, i: int) -> tuple[str, ...]:
    label = omega.at(c).labels[i]
    assert label.startswith("{") and label.endswith("}")
    inner = label[1:-1]
    return tuple(inner.split(",")) if inner else ()


# -- category of elements ----------------------------------------------------

def element_object_name(c: str, label: str) -> str:
    return f"({c},{label})"


def element_category(p: Presheaf) -> tuple[FinCategory, dict]:
    """Category of elements; objects are (base object, element) pairs."""
    base = p.base
    objects = []
    labels = {}
    for c in base.objects:
        for lbl in p.at(c).labels:
            name = element_object_name(c, lbl)
            objects.append(name)
            labels[name] = (c, lbl)
    morphisms = []
    for m in base.non_identity_morphisms():
        r = p.restrict(m.name)
        for x2 in range(p.at(m.cod).size):
            x1 = r(x2)
            morphisms.append((
                f"{m.name}@{p.at(m.cod).labels[x2]}",
                element_object_name(m.dom, p.at(m.dom).labels[x1]),
                element_object_name(m.cod, p.at(m.cod).labels[x2])))
    compose_table = {}
    for m2 in base.non_identity_morphisms():
        for m1 in base.non_identity_morphisms():
            if m1.cod != m2.dom:
                continue
            mm = base.compose(m2.name, m1.name)
            r2 = p.restrict(m2.name)
            for x3 in range(p.at(m2.cod).size):
                lbl3 = p.at(m2.cod).labels[x3]
                x2 = r2(x3)
                lbl2 = p.at(m2.dom).labels[x2]
                if base.is_identity(mm):
                    value = identity_name(element_object_name(m2.cod, lbl3))
                else:
                    value = f"{mm}@{lbl3}"
                compose_table[(f"{m2.name}@{lbl3}", f"{m1.name}@{lbl2}")] = value
    return FinCategory(objects, morphisms, compose_table), labels


# -- natural transformation enumeration --------------------------------------

def enumerate_maps(source: Presheaf, target: Presheaf,
                   cap: int | None = None) -> list[PresheafMap]:
    """All natural transformations, in levelwise lexicographic order."""
    if source.base != target.base:
        raise ShapeMismatch("presheaves live on different bases")
    base = source.base
    cap = finset.DEFAULT_CAP if cap is None else cap
    total = 1
    for c in base.objects:
        total *= target.at(c).size ** source.at(c).size
        if total > cap:
            raise EnumerationCap(f"{total}+ candidate families exceed cap {cap}")
    per_object = [finset.enumerate_functions(source.at(c), target.at(c), cap=cap)
                  for c in base.objects]
    out = []
    for combo in _product(per_object):
        components = dict(zip(base.objects, combo))
        if _natural(source, target, components):
            out.append(PresheafMap(source, target, components))
    return out


def _product(columns):
    if not columns:
        yield ()
        return
    head, *rest = columns
    for h in head:
        for r in _product(rest):
            yield (h,) + r


def _natural(source, target, components) -> bool:
    base = source.base
    for m in base.non_identity_morphisms():
        lhs = compose(components[m.dom], source.restrict(m.name))
        rhs = compose(target.restrict(m.name), components[m.cod])
        if lhs != rhs:
            return False
    return True


# -- levelwise colimits and limits -------------------------------------------

class PshPushoutResult:
    def __init__(self, obj, left, right, level):
        self.obj: Presheaf = obj
        self.left: PresheafMap = left
        self.right: PresheafMap = right
        self._level = level

    def mediate(self, q: PresheafMap, r: PresheafMap) -> PresheafMap:
        levels = {c: self._level[c].mediate(q.at(c), r.at(c))
                  for c in self.obj.base.objects}
        return PresheafMap(self.obj, q.target, levels)


def presheaf_pushout(f: PresheafMap, g: PresheafMap,
                     tags: tuple[str, str] = ("i0", "i1")) -> PshPushoutResult:
    if f.source != g.source:
        raise ShapeMismatch("pushout needs a span with a shared apex")
    base = f.source.base
    level = {c: finset.pushout(f.at(c), g.at(c), tags=tags)
             for c in base.objects}
    restrict = {}
    for m in base.non_identity_morphisms():
        src, dst = level[m.cod], level[m.dom]
        restrict[m.name] = src.mediate(
            compose(dst.left, f.target.restrict(m.name)),
            compose(dst.right, g.target.restrict(m.name)))
    obj = Presheaf(base, {c: level[c].obj for c in base.objects}, restrict)
    assert validate_presheaf(obj) == [], "pushout restrictions lost functoriality"
    left = PresheafMap(f.target, obj, {c: level[c].left for c in base.objects})
    right = PresheafMap(g.target, obj, {c: level[c].right for c in base.objects})
    return PshPushoutResult(obj, left, right, level)


class PshCoproductResult:
    def __init__(self, obj, injections, level):
        self.obj: Presheaf = obj
        self.injections: tuple[PresheafMap, ...] = injections
        self._level = level

    def mediate(self, legs: Sequence[PresheafMap],
                cod: Presheaf | None = None) -> PresheafMap:
        target = legs[0].target if legs else cod
        assert target is not None
        levels = {c: self._level[c].mediate([leg.at(c) for leg in legs],
                                            cod=target.at(c))
                  for c in self.obj.base.objects}
        return PresheafMap(self.obj, target, levels)


def presheaf_coproduct(parts: Sequence[Presheaf],
                       tags: Sequence[str] | None = None,
                       base: FinCategory | None = None) -> PshCoproductResult:
    if base is None:
        assert parts, "empty coproduct needs an explicit base"
        base = parts[0].base
    if tags is None:
        tags = [f"i{k}" for k in range(len(parts))]
    level = {c: finset.coproduct([p.at(c) for p in parts], tags=tags)
             for c in base.objects}
    restrict = {}
    for m in base.non_identity_morphisms():
        src, dst = level[m.cod], level[m.dom]
        restrict[m.name] = src.mediate(
            [compose(dst.injections[k], parts[k].restrict(m.name))
             for k in range(len(parts))],
            cod=dst.obj)
    obj = Presheaf(base, {c: level[c].obj for c in base.objects}, restrict)
    assert validate_presheaf(obj) == []
    injections = tuple(
        PresheafMap(parts[k], obj,
                    {c: level[c].injections[k] for c in base.objects})
        for k in range(len(parts)))
    return PshCoproductResult(obj, injections, level)


class PshCoequalizerResult:
    def __init__(self, obj, proj, level):
        self.obj: Presheaf = obj
        self.proj: PresheafMap = proj
        self._level = level

    def mediate(self, h: PresheafMap) -> PresheafMap:
        levels = {c: self._level[c].mediate(h.at(c))
                  for c in self.obj.base.objects}
        return PresheafMap(self.obj, h.target, levels)


def presheaf_coequalizer(f: PresheafMap, g: PresheafMap) -> PshCoequalizerResult:
    if f.source != g.source or f.target != g.target:
        raise ShapeMismatch("coequalizer needs a parallel pair")
    base = f.source.base
    level = {c: finset.coequalizer(f.at(c), g.at(c)) for c in base.objects}
    restrict = {}
    for m in base.non_identity_morphisms():
        src, dst = level[m.cod], level[m.dom]
        restrict[m.name] = src.mediate(
            compose(dst.proj, f.target.restrict(m.name)))
    obj = Presheaf(base, {c: level[c].obj for c in base.objects}, restrict)
    assert validate_presheaf(obj) == []
    proj = PresheafMap(f.target, obj, {c: level[c].proj for c in base.objects})
    return PshCoequalizerResult(obj, proj, level)


@dataclass(frozen=True)
class PshChainColimitResult:
    obj: Presheaf
    legs: tuple[PresheafMap, ...]
    stable_from: int

    def mediate(self, cocone: Sequence[PresheafMap]) -> PresheafMap:
        h = cocone[self.stable_from]
        for i, leg in enumerate(self.legs):
            if cocone[i] != presheaf_compose(h, leg):
                raise ShapeMismatch(f"cocone leg {i} does not factor")
        return h


def presheaf_sequential_colimit(maps: Sequence[PresheafMap],
                                start: Presheaf | None = None
                                ) -> PshChainColimitResult:
    if not maps:
        assert start is not None
        return PshChainColimitResult(start, (presheaf_identity(start),), 0)
    for i in range(len(maps) - 1):
        if maps[i].target != maps[i + 1].source:
            raise ShapeMismatch(f"chain breaks between step {i} and {i + 1}")
    objects = [maps[0].source] + [m.target for m in maps]
    k = len(maps)
    while k > 0 and maps[k - 1].is_iso:
        k -= 1
    legs = []
    for i in range(len(objects)):
        if i <= k:
            leg = presheaf_identity(objects[i])
            for m in maps[i:k]:
                leg = presheaf_compose(m, leg)
        else:
            leg = presheaf_identity(objects[k])
            for m in maps[k:i]:
                leg = presheaf_compose(m, leg)
            leg = presheaf_inverse(leg)
        legs.append(leg)
    return PshChainColimitResult(objects[k], tuple(legs), k)


class PshPullbackResult:
    def __init__(self, obj, left, right, level):
        self.obj: Presheaf = obj
        self.left: PresheafMap = left
        self.right: PresheafMap = right
        self._level = level

    def mediate(self, p: PresheafMap, q: PresheafMap) -> PresheafMap:
        levels = {c: self._level[c].mediate(p.at(c), q.at(c))
                  for c in self.obj.base.objects}
        return PresheafMap(p.source, self.obj, levels)


def presheaf_pullback(f: PresheafMap, g: PresheafMap) -> PshPullbackResult:
    if f.target != g.target:
        raise ShapeMismatch("pullback needs a cospan with a shared foot")
    base = f.source.base
    level = {c: finset.pullback(f.at(c), g.at(c)) for c in base.objects}
    restrict = {}
    for m in base.non_identity_morphisms():
        src, dst = level[m.cod], level[m.dom]
        restrict[m.name] = dst.mediate(
            compose(f.source.restrict(m.name), src.left),
            compose(g.source.restrict(m.name), src.right))
    obj = Presheaf(base, {c: level[c].obj for c in base.objects}, restrict)
    assert validate_presheaf(obj) == []
    left = PresheafMap(obj, f.source, {c: level[c].left for c in base.objects})
    right = PresheafMap(obj, g.source, {c: level[c].right for c in base.objects})
    return PshPullbackResult(obj, left, right, level)


# -- serialization ------------------------------------------------------------

def presheaf_to_json(p: Presheaf) -> dict:
    from .fincat import category_to_json
    return {
        "base": category_to_json(p.base),
        "at": {c: finset.finset_to_json(p.at(c)) for c in p.base.objects},
        "restrict": {m.name: list(p.restrict(m.name).table)
                     for m in p.base.non_identity_morphisms()},
    }


def presheaf_from_json(data, base: FinCategory | None = None) -> Presheaf:
    from .fincat import category_from_json
    if not isinstance(data, dict) or "at" not in data:
        raise MalformedInput("presheaf needs an 'at' table")
    if base is None:
        raw = data.get("base")
        if not isinstance(raw, dict):
            raise MalformedInput("presheaf base must be inline or preresolved")
        base = category_from_json(raw)
    at = {c: finset.finset_from_json(v) for c, v in data["at"].items()}
    restrict = {}
    for name, table in data.get("restrict", {}).items():
        if not base.has_morphism(name):
            raise UnknownObject(f"restriction along unknown {name!r}")
        m = base.morphism(name)
        if m.cod not in at or m.dom not in at:
            raise MalformedInput(f"restriction {name!r} lacks endpoints")
        restrict[name] = FinFunction(at[m.cod], at[m.dom], tuple(table))
    return Presheaf(base, at, restrict)


def presheaf_map_to_json(f: PresheafMap) -> dict:
    return {
        "source": presheaf_to_json(f.source),
        "target": presheaf_to_json(f.target),
        "components": {c: list(f.at(c).table)
                       for c in f.source.base.objects},
    }


def presheaf_map_from_json(data, base: FinCategory | None = None) -> PresheafMap:
    if not isinstance(data, dict):
        raise MalformedInput("presheaf map must be an object")
    for key in ("source", "target", "components"):
        if key not in data:
            raise MalformedInput(f"presheaf map is missing field {key!r}")
    source = presheaf_from_json(data["source"], base=base)
    target = presheaf_from_json(data["target"], base=base)
    comps = {}
    for c, table in data["components"].items():
        if c not in source.base.objects:
            raise UnknownObject(f"component at unknown object {c!r}")
        comps[c] = FinFunction(source.at(c), target.at(c), tuple(table))
    return PresheafMap(source, target, comps)
