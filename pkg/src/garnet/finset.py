"""Finite sets, functions, and deterministic colimits.

This is the computational substrate for every ambient category in the
package.  All quotients are built by union-find with minimal-index
representatives, and every colimit labels its elements by provenance
strings derived from the input labels, so running the same construction
twice yields byte-identical results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    CodomainMismatch,
    DomainMismatch,
    EnumerationCap,
    MalformedInput,
)

DEFAULT_CAP = 1_000_000


@dataclass(frozen=True)
class FinSet:
    labels: tuple[str, ...]

    def __post_init__(self):
        assert len(set(self.labels)) == len(self.labels), "labels must be distinct"

    @staticmethod
    def fresh(n: int, prefix: str = "x") -> "FinSet":
        return FinSet(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index_of(self, label: str) -> int:
        return self.labels.index(label)


EMPTY = FinSet(())


@dataclass(frozen=True)
class FinFunction:
    dom: FinSet
    cod: FinSet
    table: tuple[int, ...]

    def __post_init__(self):
        assert len(self.table) == self.dom.size, "table must be total"
        assert all(0 <= v < self.cod.size for v in self.table), "table out of range"

    def __call__(self, i: int) -> int:
        return self.table[i]

    def __matmul__(self, other: "FinFunction") -> "FinFunction":
        # self after other
        return compose(self, other)

    @property
    def is_identity(self) -> bool:
        return self.dom == self.cod and all(v == i for i, v in enumerate(self.table))

    @property
    def is_injective(self) -> bool:
        return len(set(self.table)) == len(self.table)

    @property
    def is_surjective(self) -> bool:
        return len(set(self.table)) == self.cod.size

    @property
    def is_bijective(self) -> bool:
        return self.is_injective and self.is_surjective

    def inverse(self) -> "FinFunction":
        assert self.is_bijective, "only bijections invert"
        inv = [0] * self.cod.size
        for i, v in enumerate(self.table):
            inv[v] = i
        return FinFunction(self.cod, self.dom, tuple(inv))

    def fiber(self, j: int) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.table) if v == j)


def identity(x: FinSet) -> FinFunction:
    return FinFunction(x, x, tuple(range(x.size)))


def compose(g: FinFunction, f: FinFunction) -> FinFunction:
    """g after f."""
    if f.cod != g.dom:
        raise DomainMismatch(f"cannot compose: middle objects differ "
                             f"({f.cod.labels} vs {g.dom.labels})")
    return FinFunction(f.dom, g.cod, tuple(g.table[v] for v in f.table))


def constant(dom: FinSet, cod: FinSet, value: int) -> FinFunction:
    return FinFunction(dom, cod, tuple(value for _ in range(dom.size)))


@dataclass(frozen=True)
class MapClass:
    is_mono: bool
    is_epi: bool
    is_iso: bool
    section_count: int

    @property
    def is_split_epi(self) -> bool:
        return self.section_count > 0


def classify_map(f: FinFunction) -> MapClass:
    """Injectivity, surjectivity, and the number of sections.

    A surjection of finite sets always splits; the section count is the
    product of the fiber sizes, and 0 when some fiber is empty.
    """
    mono = f.is_injective
    epi = f.is_surjective
    count = 1
    for j in range(f.cod.size):
        count *= len(f.fiber(j))
    return MapClass(is_mono=mono, is_epi=epi, is_iso=mono and epi,
                    section_count=count if epi else 0)


def enumerate_functions(a: FinSet, b: FinSet,
                        cap: int | None = None) -> list[FinFunction]:
    """All functions a -> b in lexicographic table order."""
    cap = DEFAULT_CAP if cap is None else cap
    total = b.size ** a.size
    if total > cap:
        raise EnumerationCap(f"{total} functions exceed cap {cap}")
    return [FinFunction(a, b, t)
            for t in itertools.product(range(b.size), repeat=a.size)]


def enumerate_bijections(a: FinSet, b: FinSet,
                         cap: int | None = None) -> list[FinFunction]:
    if a.size != b.size:
        return []
    cap = DEFAULT_CAP if cap is None else cap
    total = 1
    for k in range(2, a.size + 1):
        total *= k
    if total > cap:
        raise EnumerationCap(f"{total} bijections exceed cap {cap}")
    return [FinFunction(a, b, t)
            for t in itertools.permutations(range(b.size))]


class _UnionFind:
    """Union-find whose class representative is the minimal member index."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        lo, hi = min(ri, rj), max(ri, rj)
        self.parent[hi] = lo


def _quotient(labels: Sequence[str],
              pairs: Iterable[tuple[int, int]]) -> tuple[tuple[int, ...], FinSet]:
    """Quotient table and label set for the equivalence closure of pairs.

    Classes are ordered by their minimal member, which also names the class.
    """
    uf = _UnionFind(len(labels))
    for i, j in pairs:
        uf.union(i, j)
    roots: list[int] = []
    index_of_root: dict[int, int] = {}
    table = []
    for i in range(len(labels)):
        r = uf.find(i)
        if r not in index_of_root:
            index_of_root[r] = len(roots)
            roots.append(r)
        table.append(index_of_root[r])
    return tuple(table), FinSet(tuple(labels[r] for r in roots))


@dataclass(frozen=True)
class CoproductResult:
    obj: FinSet
    injections: tuple[FinFunction, ...]

    def mediate(self, legs: Sequence[FinFunction],
                cod: FinSet | None = None) -> FinFunction:
        assert len(legs) == len(self.injections)
        if legs:
            if len({leg.cod for leg in legs}) != 1:
                raise CodomainMismatch("coproduct legs must share a codomain")
            cod = legs[0].cod
        elif cod is None:
            raise CodomainMismatch("empty coproduct mediator needs a codomain")
        table = []
        for inj, leg in zip(self.injections, legs):
            if inj.dom != leg.dom:
                raise DomainMismatch("leg domain differs from summand")
            table.extend(leg.table)
        return FinFunction(self.obj, cod, tuple(table))


def coproduct(parts: Sequence[FinSet],
              tags: Sequence[str] | None = None) -> CoproductResult:
    """Disjoint union with provenance-tagged labels tag.label."""
    if tags is None:
        tags = [f"i{k}" for k in range(len(parts))]
    assert len(tags) == len(parts)
    labels: list[str] = []
    injections = []
    offset = 0
    for part, tag in zip(parts, tags):
        labels.extend(f"{tag}.{lbl}" for lbl in part.labels)
    obj = FinSet(tuple(labels))
    for part in parts:
        injections.append(FinFunction(
            part, obj, tuple(range(offset, offset + part.size))))
        offset += part.size
    return CoproductResult(obj, tuple(injections))


@dataclass(frozen=True)
class CoequalizerResult:
    obj: FinSet
    proj: FinFunction
    _pair: tuple[FinFunction, FinFunction]

    def mediate(self, h: FinFunction) -> FinFunction:
        f, g = self._pair
        if h.dom != f.cod:
            raise DomainMismatch("cocone leg must start at the shared codomain")
        if compose(h, f) != compose(h, g):
            raise DomainMismatch("cocone leg does not coequalize the pair")
        table = [0] * self.obj.size
        seen = [False] * self.obj.size
        for i in range(h.dom.size):
            q = self.proj(i)
            if seen[q]:
                assert table[q] == h(i), "cocone not constant on a class"
            else:
                table[q], seen[q] = h(i), True
        assert all(seen), "projection not surjective"
        return FinFunction(self.obj, h.cod, tuple(table))


def coequalizer(f: FinFunction, g: FinFunction) -> CoequalizerResult:
    if f.dom != g.dom or f.cod != g.cod:
        raise DomainMismatch("coequalizer needs a parallel pair")
    table, obj = _quotient(f.cod.labels,
                           ((f(i), g(i)) for i in range(f.dom.size)))
    return CoequalizerResult(obj, FinFunction(f.cod, obj, table), (f, g))


@dataclass(frozen=True)
class PushoutResult:
    obj: FinSet
    left: FinFunction    # B -> P
    right: FinFunction   # C -> P
    _span: tuple[FinFunction, FinFunction]

    def mediate(self, q: FinFunction, r: FinFunction) -> FinFunction:
        f, g = self._span
        if q.dom != f.cod or r.dom != g.cod:
            raise DomainMismatch("cocone legs must start at the span feet")
        if q.cod != r.cod:
            raise CodomainMismatch("cocone legs must share a codomain")
        if compose(q, f) != compose(r, g):
            raise DomainMismatch("cocone does not commute over the span apex")
        table = [0] * self.obj.size
        seen = [False] * self.obj.size
        for leg, inn in ((q, self.left), (r, self.right)):
            for i in range(leg.dom.size):
                p = inn(i)
                if seen[p]:
                    assert table[p] == leg(i), "cocone not constant on a class"
                else:
                    table[p], seen[p] = leg(i), True
        assert all(seen)
        return FinFunction(self.obj, q.cod, tuple(table))


def pushout(f: FinFunction, g: FinFunction,
            tags: tuple[str, str] = ("i0", "i1")) -> PushoutResult:
    """Pushout of the span f: A -> B, g: A -> C.

    Elements are minimal-index representatives of the equivalence closure
    on B + C generated by f(a) ~ g(a).  The coproduct is the special case
    A empty.
    """
    if f.dom != g.dom:
        raise DomainMismatch("pushout needs a span with a shared apex")
    cp = coproduct([f.cod, g.cod], tags=tags)
    in_b, in_c = cp.injections
    table, obj = _quotient(cp.obj.labels,
                           ((in_b(f(a)), in_c(g(a))) for a in range(f.dom.size)))
    proj = FinFunction(cp.obj, obj, table)
    return PushoutResult(obj, compose(proj, in_b), compose(proj, in_c), (f, g))


@dataclass(frozen=True)
class ChainColimitResult:
    obj: FinSet
    legs: tuple[FinFunction, ...]
    stable_from: int

    def mediate(self, cocone: Sequence[FinFunction]) -> FinFunction:
        assert len(cocone) == len(self.legs)
        h = cocone[self.stable_from]
        for i, leg in enumerate(self.legs):
            if cocone[i] != compose(h, leg):
                raise DomainMismatch(f"cocone leg {i} does not factor through "
                                     f"the stable stage")
        return h


def sequential_colimit(maps: Sequence[FinFunction],
                       start: FinSet | None = None) -> ChainColimitResult:
    """Colimit of a finite chain X0 -> X1 -> ... -> Xn.

    The result is identified with the first stage after which every map is
    a bijection, so labels are stable under extending a converged chain.
    """
    if not maps:
        if start is None:
            raise DomainMismatch("empty chain needs an explicit object")
        return ChainColimitResult(start, (identity(start),), 0)
    objects = [maps[0].dom] + [m.cod for m in maps]
    for i in range(len(maps) - 1):
        if maps[i].cod != maps[i + 1].dom:
            raise DomainMismatch(f"chain breaks between step {i} and {i + 1}")
    if start is not None and start != objects[0]:
        raise DomainMismatch("start object disagrees with the first map")
    k = len(maps)
    while k > 0 and maps[k - 1].is_bijective:
        k -= 1
    legs: list[FinFunction] = []
    # forward composites into stage k, then inverses of the stable tail
    for i in range(len(objects)):
        if i <= k:
            leg = identity(objects[i])
            for m in maps[i:k]:
                leg = compose(m, leg)
        else:
            leg = identity(objects[k])
            for m in maps[k:i]:
                leg = compose(m, leg)
            leg = leg.inverse()
        legs.append(leg)
    return ChainColimitResult(objects[k], tuple(legs), k)


@dataclass(frozen=True)
class PullbackResult:
    obj: FinSet
    left: FinFunction    # P -> A
    right: FinFunction   # P -> B
    _cospan: tuple[FinFunction, FinFunction]

    def mediate(self, p: FinFunction, q: FinFunction) -> FinFunction:
        f, g = self._cospan
        if p.dom != q.dom:
            raise DomainMismatch("cone legs must share a domain")
        if compose(f, p) != compose(g, q):
            raise CodomainMismatch("cone does not commute over the cospan")
        pairs = {(self.left(i), self.right(i)): i for i in range(self.obj.size)}
        return FinFunction(p.dom, self.obj,
                           tuple(pairs[(p(w), q(w))] for w in range(p.dom.size)))


def pullback(f: FinFunction, g: FinFunction) -> PullbackResult:
    """Pullback of the cospan f: A -> C <- B :g, in lexicographic pair order."""
    if f.cod != g.cod:
        raise CodomainMismatch("pullback needs a cospan with a shared foot")
    pairs = [(a, b)
             for a in range(f.dom.size)
             for b in range(g.dom.size)
             if f(a) == g(b)]
    obj = FinSet(tuple(f"({f.dom.labels[a]},{g.dom.labels[b]})" for a, b in pairs))
    return PullbackResult(
        obj,
        FinFunction(obj, f.dom, tuple(a for a, _ in pairs)),
        FinFunction(obj, g.dom, tuple(b for _, b in pairs)),
        (f, g))


def equalizer(f: FinFunction, g: FinFunction) -> tuple[FinSet, FinFunction]:
    if f.dom != g.dom or f.cod != g.cod:
        raise DomainMismatch("equalizer needs a parallel pair")
    kept = [i for i in range(f.dom.size) if f(i) == g(i)]
    obj = FinSet(tuple(f.dom.labels[i] for i in kept))
    return obj, FinFunction(obj, f.dom, tuple(kept))


# -- serialization ----------------------------------------------------------

def finset_to_json(x: FinSet) -> dict:
    return {"size": x.size, "labels": list(x.labels)}


def finset_from_json(data) -> FinSet:
    if not isinstance(data, dict) or "labels" not in data:
        raise MalformedInput("finite set needs a labels list")
    labels = data["labels"]
    if not isinstance(labels, list) or not all(isinstance(l, str) for l in labels):
        raise MalformedInput("labels must be strings")
    if len(set(labels)) != len(labels):
        raise MalformedInput("labels must be distinct")
    if "size" in data and data["size"] != len(labels):
        raise MalformedInput("size field disagrees with labels")
    return FinSet(tuple(labels))


def function_to_json(f: FinFunction) -> dict:
    return {"dom": finset_to_json(f.dom), "cod": finset_to_json(f.cod),
            "table": list(f.table)}


def function_from_json(data) -> FinFunction:
    if not isinstance(data, dict):
        raise MalformedInput("map must be an object")
    for key in ("dom", "cod", "table"):
        if key not in data:
            raise MalformedInput(f"map is missing field {key!r}")
    dom = finset_from_json(data["dom"])
    cod = finset_from_json(data["cod"])
    table = data["table"]
    if not isinstance(table, list) or len(table) != dom.size:
        raise MalformedInput("table must list one entry per domain element")
    if not all(isinstance(v, int) and 0 <= v < cod.size for v in table):
        raise MalformedInput("table entries must index the codomain")
    return FinFunction(dom, cod, tuple(table))
