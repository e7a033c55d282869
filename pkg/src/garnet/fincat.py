"""Finite categories presented by full composition tables.

Index categories for generator diagrams and base categories for presheaves
are tiny, so categories are stored extensionally: every morphism is listed,
identities are explicit under the reserved names ``id_<object>``, and
composition is a total table on composable pairs.  Law checking is
exhaustive and report-valued; constructors only reject dangling references.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedInput


@dataclass(frozen=True)
class Morphism:
    name: str
    dom: str
    cod: str


def identity_name(obj: str) -> str:
    return f"id_{obj}"


class FinCategory:
    """A finite category; identities are auto-inserted when missing."""

    def __init__(self, objects, morphisms, compose):
        self.objects: tuple[str, ...] = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise MalformedInput("duplicate object names")
        listed = [m if isinstance(m, Morphism) else Morphism(*m) for m in morphisms]
        idents = [Morphism(identity_name(x), x, x) for x in self.objects]
        by_name = {m.name: m for m in idents}
        ordered = list(idents)
        for m in listed:
            if m.dom not in self.objects or m.cod not in self.objects:
                raise MalformedInput(f"morphism {m.name!r} has dangling endpoint")
            if m.name in by_name:
                if by_name[m.name] != m:
                    raise MalformedInput(f"conflicting entries for {m.name!r}")
                continue
            by_name[m.name] = m
            ordered.append(m)
        self.morphisms: tuple[Morphism, ...] = tuple(ordered)
        self._by_name = by_name
        self._compose: dict[tuple[str, str], str] = {}
        for (g, f), h in dict(compose).items():
            for name in (g, f, h):
                if name not in by_name:
                    raise MalformedInput(f"compose table references {name!r}")
            self._compose[(g, f)] = h
        # identity composites are forced; fill them in
        for m in self.morphisms:
            self._compose.setdefault((identity_name(m.cod), m.name), m.name)
            self._compose.setdefault((m.name, identity_name(m.dom)), m.name)

    def __eq__(self, other):
        return (isinstance(other, FinCategory)
                and self.objects == other.objects
                and self.morphisms == other.morphisms
                and self._compose == other._compose)

    def __hash__(self):
        return hash((self.objects, self.morphisms,
                     tuple(sorted(self._compose.items()))))

    def __repr__(self):
        return (f"FinCategory({len(self.objects)} objects, "
                f"{len(self.morphisms)} morphisms)")

    def morphism(self, name: str) -> Morphism:
        if name not in self._by_name:
            raise MalformedInput(f"unknown morphism {name!r}")
        return self._by_name[name]

    def has_morphism(self, name: str) -> bool:
        return name in self._by_name

    def composable(self, g: str, f: str) -> bool:
        return self.morphism(f).cod == self.morphism(g).dom

    def compose(self, g: str, f: str) -> str:
        """Name of g after f."""
        if not self.composable(g, f):
            raise MalformedInput(f"{g!r} after {f!r} is not composable")
        if (g, f) not in self._compose:
            raise MalformedInput(f"composition table lacks {g!r} after {f!r}")
        return self._compose[(g, f)]

    def is_identity(self, name: str) -> bool:
        m = self.morphism(name)
        return name == identity_name(m.dom) and m.dom == m.cod

    def hom(self, x: str, y: str) -> list[str]:
        return [m.name for m in self.morphisms if m.dom == x and m.cod == y]

    def non_identity_morphisms(self) -> list[Morphism]:
        return [m for m in self.morphisms if not self.is_identity(m.name)]

    def is_discrete(self) -> bool:
        return not self.non_identity_morphisms()


def discrete_category(objects) -> FinCategory:
    return FinCategory(objects, [], {})


def validate_category(cat: FinCategory) -> list[str]:
    """Every violated axiom instance; empty means valid."""
    report = []
    for x in cat.objects:
        if not cat.has_morphism(identity_name(x)):
            report.append(f"missing identity for object {x!r}")
    for g in cat.morphisms:
        for f in cat.morphisms:
            if f.cod != g.dom:
                if (g.name, f.name) in cat._compose:
                    report.append(f"compose defined for non-composable pair "
                                  f"({g.name!r}, {f.name!r})")
                continue
            if (g.name, f.name) not in cat._compose:
                report.append(f"compose missing for ({g.name!r}, {f.name!r})")
                continue
            h = cat.morphism(cat._compose[(g.name, f.name)])
            if h.dom != f.dom or h.cod != g.cod:
                report.append(f"composite {h.name!r} of ({g.name!r}, {f.name!r}) "
                              f"has wrong endpoints")
    for f in cat.morphisms:
        left = cat._compose.get((identity_name(f.cod), f.name))
        right = cat._compose.get((f.name, identity_name(f.dom)))
        if left is not None and left != f.name:
            report.append(f"left identity law fails at {f.name!r}")
        if right is not None and right != f.name:
            report.append(f"right identity law fails at {f.name!r}")
    for h in cat.morphisms:
        for g in cat.morphisms:
            if g.cod != h.dom:
                continue
            for f in cat.morphisms:
                if f.cod != g.dom:
                    continue
                gf = cat._compose.get((g.name, f.name))
                hg = cat._compose.get((h.name, g.name))
                if gf is None or hg is None:
                    continue  # reported as missing above
                outer_left = cat._compose.get((h.name, gf))
                outer_right = cat._compose.get((hg, f.name))
                if outer_left is None or outer_right is None:
                    continue
                if outer_left != outer_right:
                    report.append(f"associativity fails at "
                                  f"({h.name!r}, {g.name!r}, {f.name!r})")
    return report


class CatFunctor:
    def __init__(self, source: FinCategory, target: FinCategory,
                 on_objects, on_morphisms):
        self.source = source
        self.target = target
        self.on_objects = dict(on_objects)
        self.on_morphisms = dict(on_morphisms)
        for x in source.objects:
            if x not in self.on_objects:
                raise MalformedInput(f"object {x!r} is unmapped")
            if self.on_objects[x] not in target.objects:
                raise MalformedInput(f"object {x!r} maps outside the target")
        for m in source.morphisms:
            if source.is_identity(m.name):
                self.on_morphisms.setdefault(
                    m.name, identity_name(self.on_objects[m.dom]))
            if m.name not in self.on_morphisms:
                raise MalformedInput(f"morphism {m.name!r} is unmapped")
            if not target.has_morphism(self.on_morphisms[m.name]):
                raise MalformedInput(f"morphism {m.name!r} maps outside the target")

    def obj(self, x: str) -> str:
        return self.on_objects[x]

    def mor(self, name: str) -> str:
        return self.on_morphisms[name]


def validate_functor(fun: CatFunctor) -> list[str]:
    report = []
    src, tgt = fun.source, fun.target
    for m in src.morphisms:
        image = tgt.morphism(fun.mor(m.name))
        if image.dom != fun.obj(m.dom) or image.cod != fun.obj(m.cod):
            report.append(f"image of {m.name!r} has wrong endpoints")
    for x in src.objects:
        if fun.mor(identity_name(x)) != identity_name(fun.obj(x)):
            report.append(f"identity of {x!r} is not preserved")
    for g in src.morphisms:
        for f in src.morphisms:
            if f.cod != g.dom:
                continue
            here = fun.mor(src.compose(g.name, f.name))
            if not tgt.composable(fun.mor(g.name), fun.mor(f.name)):
                # already reported as an endpoint violation
                continue
            there = tgt.compose(fun.mor(g.name), fun.mor(f.name))
            if here != there:
                report.append(f"composition of ({g.name!r}, {f.name!r}) "
                              f"is not preserved")
    return report


# -- serialization ----------------------------------------------------------

def category_to_json(cat: FinCategory) -> dict:
    morphisms = [{"name": m.name, "dom": m.dom, "cod": m.cod}
                 for m in cat.non_identity_morphisms()]
    compose = [{"g": g, "f": f, "eq": h}
               for (g, f), h in sorted(cat._compose.items())
               if not (cat.is_identity(g) or cat.is_identity(f))]
    return {"objects": list(cat.objects), "morphisms": morphisms,
            "compose": compose}


def category_from_json(data) -> FinCategory:
    if not isinstance(data, dict):
        raise MalformedInput("category must be an object")
    for key in ("objects", "morphisms"):
        if key not in data:
            raise MalformedInput(f"category is missing field {key!r}")
    morphisms = []
    for entry in data["morphisms"]:
        try:
            morphisms.append(Morphism(entry["name"], entry["dom"], entry["cod"]))
        except (KeyError, TypeError):
            raise MalformedInput(f"bad morphism entry {entry!r}")
    compose = {}
    for entry in data.get("compose", []):
        try:
            compose[(entry["g"], entry["f"])] = entry["eq"]
        except (KeyError, TypeError):
            raise MalformedInput(f"bad compose entry {entry!r}")
    return FinCategory(data["objects"], morphisms, compose)
