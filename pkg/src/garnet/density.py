"""Density comonads of finite generating diagrams of arrows.

A generating diagram indexes a family of arrows; its density comonad at f
is the colimit, over the comma category of all lifting problems into f, of
the generating arrows themselves.  The counit reassembles every problem.
The comma category is materialized as a FinCategory because the morphisms
between lifting problems (the coherences) are what the rest of the build
quotients by.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import presheaf as psh
from .arrows import (
    ArrowAmbient,
    ArrowObj,
    FinSetAmbient,
    PresheafAmbient,
    Square,
    compose_squares,
    identity_square,
)
from .errors import EnumerationCap, MalformedInput, NoIsoFound
from .fincat import FinCategory, category_from_json, category_to_json, \
    discrete_category, identity_name
from .finset import EMPTY, FinFunction, FinSet, function_from_json


class ArrowDiagram:
    """A functor from a finite index category into the arrow category."""

    def __init__(self, ambient, index: FinCategory, on_objects,
                 on_morphisms=None):
        self.ambient = ambient
        self.arr = ArrowAmbient(ambient)
        self.index = index
        self._obj: dict[str, ArrowObj] = dict(on_objects)
        for j in index.objects:
            if j not in self._obj:
                raise MalformedInput(f"no arrow at index object {j!r}")
        for j in self._obj:
            if j not in index.objects:
                raise MalformedInput(f"arrow at unknown index object {j!r}")
        given = dict(on_morphisms or {})
        for name in given:
            if not index.has_morphism(name):
                raise MalformedInput(f"square at unknown morphism {name!r}")
        self._mor: dict[str, Square] = {}
        for m in index.morphisms:
            if index.is_identity(m.name):
                expected = identity_square(self._obj[m.dom])
                if m.name in given and given[m.name] != expected:
                    raise MalformedInput(f"square at {m.name!r} must be the "
                                         f"identity square")
                self._mor[m.name] = expected
                continue
            if m.name not in given:
                raise MalformedInput(f"no square at morphism {m.name!r}")
            s = given[m.name]
            if s.source != self._obj[m.dom] or s.target != self._obj[m.cod]:
                raise MalformedInput(f"square at {m.name!r} has wrong "
                                     f"endpoints")
            self._mor[m.name] = s

    def arrow(self, j: str) -> ArrowObj:
        return self._obj[j]

    def square(self, t: str) -> Square:
        return self._mor[t]


def validate_diagram(u: ArrowDiagram) -> list[str]:
    """Exhaustive functoriality report; empty means the diagram is valid."""
    report = []
    for m2 in u.index.non_identity_morphisms():
        for m1 in u.index.non_identity_morphisms():
            if m1.cod != m2.dom:
                continue
            mm = u.index.compose(m2.name, m1.name)
            if u.square(mm) != compose_squares(u.square(m2.name),
                                               u.square(m1.name)):
                report.append(f"square at composite {mm!r} differs from the "
                              f"composite of squares at ({m2.name!r}, "
                              f"{m1.name!r})")
    return report


def lifting_problems(u: ArrowDiagram, i: str, f: ArrowObj,
                     cap: int | None = None) -> list[Square]:
    """All squares from the generator at i into f, in deterministic order."""
    return u.arr.hom(u.arrow(i), f, cap=cap)


@dataclass
class CommaResult:
    """The comma category of lifting problems, with its labeling."""
    category: FinCategory
    # comma object name -> (index object, problem square), in object order
    problems: dict[str, tuple[str, Square]]
    # (index object, problem square) -> comma object name
    names: dict[tuple[str, Square], str]
    # comma morphism name -> index morphism name
    over: dict[str, str]


def comma_category(u: ArrowDiagram, f: ArrowObj,
                   cap: int | None = None) -> CommaResult:
    problems: dict[str, tuple[str, Square]] = {}
    names: dict[tuple[str, Square], str] = {}
    objects = []
    for j in u.index.objects:
        for k, alpha in enumerate(lifting_problems(u, j, f, cap=cap)):
            name = f"{j}#{k}"
            objects.append(name)
            problems[name] = (j, alpha)
            names[(j, alpha)] = name
    morphisms = []
    over = {}
    for t in u.index.non_identity_morphisms():
        ut = u.square(t.name)
        for name2, (j2, alpha2) in problems.items():
            if j2 != t.cod:
                continue
            alpha1 = compose_squares(alpha2, ut)
            name1 = names[(t.dom, alpha1)]
            mor_name = f"{t.name}@{name2}"
            morphisms.append((mor_name, name1, name2))
            over[mor_name] = t.name
    compose_table = {}
    for t2 in u.index.non_identity_morphisms():
        for t1 in u.index.non_identity_morphisms():
            if t1.cod != t2.dom:
                continue
            tt = u.index.compose(t2.name, t1.name)
            for name3, (j3, alpha3) in problems.items():
                if j3 != t2.cod:
                    continue
                name2 = names[(t2.dom, compose_squares(alpha3,
                                                       u.square(t2.name)))]
                if u.index.is_identity(tt):
                    value = identity_name(name3)
                else:
                    value = f"{tt}@{name3}"
                compose_table[(f"{t2.name}@{name3}",
                               f"{t1.name}@{name2}")] = value
    category = FinCategory(objects, morphisms, compose_table)
    return CommaResult(category, problems, names, over)


@dataclass
class DensityResult:
    """The density value at f: the colimit arrow, its counit, and legs."""
    u: ArrowDiagram
    f: ArrowObj
    comma: CommaResult
    den: ArrowObj
    counit: Square
    legs: dict[str, Square] = field(repr=False)
    # colimit provenance, reused by the functorial action and by replay
    coproduct: object = field(repr=False, default=None)
    coequalizer: object = field(repr=False, default=None)


def density_comonad(u: ArrowDiagram, f: ArrowObj, cap: int | None = None,
                    session=None) -> DensityResult:
    if session is not None:
        return session.memo(("density", f),
                            lambda: _density(u, f, cap))
    return _density(u, f, cap)


def _density(u: ArrowDiagram, f: ArrowObj, cap) -> DensityResult:
    arr = u.arr
    comma = comma_category(u, f, cap=cap)
    obj_names = list(comma.category.objects)
    parts = [u.arrow(comma.problems[n][0]) for n in obj_names]
    cp = arr.coproduct(parts, tags=obj_names)
    rel_names = [m.name for m in comma.category.non_identity_morphisms()]
    rel_parts = [u.arrow(comma.problems[comma.category.morphism(m).dom][0])
                 for m in rel_names]
    rel_cp = arr.coproduct(rel_parts, tags=rel_names)
    idx = {n: k for k, n in enumerate(obj_names)}
    left = rel_cp.mediate(
        [cp.injections[idx[comma.category.morphism(m).dom]]
         for m in rel_names], cod=cp.obj)
    right = rel_cp.mediate(
        [compose_squares(cp.injections[idx[comma.category.morphism(m).cod]],
                         u.square(comma.over[m]))
         for m in rel_names], cod=cp.obj)
    ce = arr.coequalizer(left, right)
    legs = {n: compose_squares(ce.proj, cp.injections[idx[n]])
            for n in obj_names}
    counit = ce.mediate(cp.mediate(
        [comma.problems[n][1] for n in obj_names], cod=f))
    return DensityResult(u, f, comma, ce.obj, counit, legs,
                         coproduct=cp, coequalizer=ce)


def density_action(u: ArrowDiagram, sigma: Square, den_f: DensityResult,
                   den_g: DensityResult) -> Square:
    """The induced square between density values along sigma: f -> g."""
    if sigma.source != den_f.f or sigma.target != den_g.f:
        raise MalformedInput("square endpoints do not match the densities")
    cocone = []
    for n in den_f.comma.category.objects:
        j, alpha = den_f.comma.problems[n]
        target_name = den_g.comma.names[(j, compose_squares(sigma, alpha))]
        cocone.append(den_g.legs[target_name])
    mediated = den_f.coproduct.mediate(cocone, cod=den_g.den)
    return den_f.coequalizer.mediate(mediated)


def is_cartesian(s: Square) -> bool:
    """Whether the commuting square is a pullback in the inner ambient."""
    inner = s.source.ambient
    pb = inner.pullback(s.target.mor, s.bottom)
    mediator = pb.mediate(s.top, s.source.mor)
    return inner.is_iso(mediator)


def check_mono_compatibility(u: ArrowDiagram, probes: list[Square],
                             cap: int | None = None) -> dict:
    """Probe report: density values mono, mono squares preserved, and sent
    to cartesian squares."""
    entries = []
    for k, sigma in enumerate(probes):
        den_f = density_comonad(u, sigma.source, cap=cap)
        den_g = density_comonad(u, sigma.target, cap=cap)
        act = density_action(u, sigma, den_f, den_g)
        entry = {
            "probe": k,
            "probe_is_mono": u.arr.is_mono(sigma),
            "density_of_source_mono": u.ambient.is_mono(den_f.den.mor),
            "density_of_target_mono": u.ambient.is_mono(den_g.den.mor),
            "action_mono": u.arr.is_mono(act),
            "action_cartesian": is_cartesian(act),
        }
        entry["pass"] = all(entry[key] for key in
                            ("density_of_source_mono",
                             "density_of_target_mono",
                             "action_mono", "action_cartesian"))
        entries.append(entry)
    return {"probes": entries, "pass": all(e["pass"] for e in entries)}


# -- subobject-classifier generators -------------------------------------------

def subobject_classifier_diagram(ambient) -> ArrowDiagram:
    """The generating diagram indexed by the elements of the classifier;
    each element contributes the subobject it classifies, included into its
    representable."""
    if isinstance(ambient, FinSetAmbient):
        point = FinSet(("pt",))
        index = discrete_category(("empty", "total"))
        return ArrowDiagram(ambient, index, {
            "empty": ArrowObj(ambient, FinFunction(EMPTY, point, ())),
            "total": ArrowObj(ambient, FinFunction(point, point, (0,))),
        })
    if not isinstance(ambient, PresheafAmbient):
        raise MalformedInput("classifier generators need a finset or "
                             "presheaf ambient")
    base = ambient.base
    omega, truth = psh.subobject_classifier(base)
    elcat, labels = psh.element_category(omega)
    on_objects = {}
    for name in elcat.objects:
        c, lbl = labels[name]
        mono = psh.pullback_classify(
            truth, psh.element_map(omega, c, omega.at(c).index_of(lbl)))
        on_objects[name] = ArrowObj(ambient, mono)
    on_morphisms = {}
    for m in elcat.non_identity_morphisms():
        base_name = m.name.split("@", 1)[0]
        src, tgt = on_objects[m.dom], on_objects[m.cod]
        bottom = psh.yoneda_map(base, base_name)
        comps = {}
        for x in base.objects:
            sub_src, sub_tgt = src.dom.at(x), tgt.dom.at(x)
            table = tuple(
                sub_tgt.index_of(base.compose(base_name, h))
                for h in sub_src.labels)
            comps[x] = FinFunction(sub_src, sub_tgt, table)
        top = psh.PresheafMap(src.dom, tgt.dom, comps)
        on_morphisms[m.name] = Square(src, tgt, top, bottom)
    return ArrowDiagram(ambient, elcat, on_objects, on_morphisms)


@dataclass
class ClosedFormResult:
    closed: ArrowObj
    generic: DensityResult
    iso: Square  # closed -> generic.den


def density_closed_form_subobject(t: psh.PresheafMap, f: ArrowObj,
                                  cap: int | None = None) -> ClosedFormResult:
    """Pointwise computation of the classifier density, cross-checked by an
    exact isomorphism against the generic comma-category colimit."""
    omega = t.target
    base = omega.base
    ambient = PresheafAmbient(base)
    if f.ambient != ambient:
        raise MalformedInput("map does not live over the classifier's base")
    u = subobject_classifier_diagram(ambient)
    elcat, labels = psh.element_category(omega)
    arr = u.arr
    # pointwise values: all squares from the classified subobject into f
    values = {name: lifting_problems(u, name, f, cap=cap)
              for name in elcat.objects}
    # reassemble over the classifier: at c, the disjoint union over Omega(c)
    at = {}
    for c in base.objects:
        lbls = []
        for a_lbl in omega.at(c).labels:
            name = psh.element_object_name(c, a_lbl)
            lbls.extend(f"{a_lbl}#{k}" for k in range(len(values[name])))
        at[c] = FinSet(tuple(lbls))
    restrict = {}
    for m in base.non_identity_morphisms():
        r_omega = omega.restrict(m.name)
        arrow = base.morphism(m.name)
        offsets_dom = {}
        pos = 0
        for a_lbl in omega.at(arrow.dom).labels:
            offsets_dom[a_lbl] = pos
            pos += len(values[psh.element_object_name(arrow.dom, a_lbl)])
        table = []
        for a2 in range(omega.at(arrow.cod).size):
            a2_lbl = omega.at(arrow.cod).labels[a2]
            name2 = psh.element_object_name(arrow.cod, a2_lbl)
            a1_lbl = omega.at(arrow.dom).labels[r_omega(a2)]
            name1 = psh.element_object_name(arrow.dom, a1_lbl)
            step = u.square(f"{m.name}@{a2_lbl}")
            for beta in values[name2]:
                restricted = compose_squares(beta, step)
                table.append(offsets_dom[a1_lbl]
                             + values[name1].index(restricted))
        restrict[m.name] = FinFunction(at[arrow.cod], at[arrow.dom],
                                       tuple(table))
    reassembled = psh.Presheaf(base, at, restrict)
    # the structure map to the classifier remembers which element each
    # block came from
    proj_comps = {}
    for c in base.objects:
        table = []
        for a, a_lbl in enumerate(omega.at(c).labels):
            name = psh.element_object_name(c, a_lbl)
            table.extend([a] * len(values[name]))
        proj_comps[c] = FinFunction(at[c], omega.at(c), tuple(table))
    proj = psh.PresheafMap(reassembled, omega, proj_comps)
    closed = ArrowObj(ambient, psh.pullback_classify(t, proj))
    generic = density_comonad(u, f, cap=cap)
    iso = find_arrow_iso(ambient, closed, generic.den)
    if iso is None:
        raise NoIsoFound("closed form does not match the generic density; "
                         "this is a bug")
    return ClosedFormResult(closed, generic, iso)


# -- iso search between arrows --------------------------------------------------

def _levels(ambient, f: ArrowObj):
    """Flatten an arrow into named levels with unary structure maps."""
    if isinstance(ambient, FinSetAmbient):
        sets = {(0, "*"): f.dom, (1, "*"): f.cod}
        funs = [("arr", (0, "*"), (1, "*"), f.mor)]
        return sets, funs
    assert isinstance(ambient, PresheafAmbient)
    base = ambient.base
    sets = {}
    funs = []
    for c in base.objects:
        sets[(0, c)] = f.dom.at(c)
        sets[(1, c)] = f.cod.at(c)
        funs.append((f"arr@{c}", (0, c), (1, c), f.mor.at(c)))
    for m in base.non_identity_morphisms():
        arrow = base.morphism(m.name)
        funs.append((f"r0@{m.name}", (0, arrow.cod), (0, arrow.dom),
                     f.dom.restrict(m.name)))
        funs.append((f"r1@{m.name}", (1, arrow.cod), (1, arrow.dom),
                     f.cod.restrict(m.name)))
    return sets, funs


def _refine(sets, funs, colors):
    """One round of color refinement over the unary structure maps."""
    out_sig = {n: [] for n in colors}
    in_sig = {n: [] for n in colors}
    for tag, src, dst, fun in funs:
        for i in range(sets[src].size):
            out_sig[(src, i)].append((tag, colors[(dst, fun(i))]))
            in_sig[(dst, fun(i))].append((tag, colors[(src, i)]))
    return {n: (colors[n], tuple(sorted(out_sig[n])),
                tuple(sorted(in_sig[n])))
            for n in colors}


def find_arrow_iso(ambient, a: ArrowObj, b: ArrowObj,
                   max_steps: int = 1_000_000) -> Square | None:
    """Search for an isomorphism a -> b in the arrow category.

    Levels are first partitioned by iterated color refinement over all the
    structure maps; backtracking then only matches nodes of equal color.
    """
    sets_a, funs_a = _levels(ambient, a)
    sets_b, funs_b = _levels(ambient, b)
    if set(sets_a) != set(sets_b):
        return None
    for slot in sets_a:
        if sets_a[slot].size != sets_b[slot].size:
            return None
    nodes_a = [(slot, i) for slot in sorted(sets_a)
               for i in range(sets_a[slot].size)]
    nodes_b = [(slot, i) for slot in sorted(sets_b)
               for i in range(sets_b[slot].size)]
    colors_a = {n: n[0] for n in nodes_a}
    colors_b = {n: n[0] for n in nodes_b}
    for _ in range(len(nodes_a) + 1):
        new_a = _refine(sets_a, funs_a, colors_a)
        new_b = _refine(sets_b, funs_b, colors_b)
        # canonicalize jointly so equal structure gets equal color names
        palette = {}
        for value in sorted(set(new_a.values()) | set(new_b.values()),
                            key=repr):
            palette[value] = len(palette)
        next_a = {n: palette[new_a[n]] for n in nodes_a}
        next_b = {n: palette[new_b[n]] for n in nodes_b}
        if len(set(next_a.values())) == len(set(colors_a.values())) \
                and sorted(next_a.values()) == sorted(next_b.values()):
            colors_a, colors_b = next_a, next_b
            break
        colors_a, colors_b = next_a, next_b
    histogram_a = sorted(colors_a.values())
    histogram_b = sorted(colors_b.values())
    if histogram_a != histogram_b:
        return None
    by_color_b: dict = {}
    for n in nodes_b:
        by_color_b.setdefault((n[0], colors_b[n]), []).append(n)
    order = sorted(nodes_a, key=lambda n: (
        len(by_color_b.get((n[0], colors_a[n]), ())), n))
    assignment: dict = {}
    used: set = set()
    fun_by_src_a: dict = {}
    for tag, src, dst, fun in funs_a:
        fun_by_src_a.setdefault(src, []).append((tag, dst, fun))
    fun_b_lookup = {(tag, src): fun for tag, src, dst, fun in funs_b}
    steps = [0]

    def consistent(n, m):
        # structure maps out of n must agree with maps out of m wherever
        # both ends are already assigned; same for maps into n
        for tag, src, dst, fun in funs_a:
            fun_b = fun_b_lookup[(tag, src)]
            if n[0] == src:
                img_a = (dst, fun(n[1]))
                img_b = (dst, fun_b(m[1]))
                if img_a in assignment and assignment[img_a] != img_b:
                    return False
            if n[0] == dst:
                for i in range(sets_a[src].size):
                    if fun(i) != n[1]:
                        continue
                    pre = (src, i)
                    if pre in assignment and fun_b(assignment[pre][1]) != m[1]:
                        return False
        return True

    def search(k):
        steps[0] += 1
        if steps[0] > max_steps:
            raise EnumerationCap("iso search exceeded the step cap")
        if k == len(order):
            return True
        n = order[k]
        for m in by_color_b.get((n[0], colors_a[n]), ()):
            if m in used:
                continue
            if not consistent(n, m):
                continue
            assignment[n] = m
            used.add(m)
            if search(k + 1):
                return True
            del assignment[n]
            used.discard(m)
        return False

    if not search(0):
        return None
    if isinstance(ambient, FinSetAmbient):
        top = FinFunction(a.dom, b.dom, tuple(
            assignment[((0, "*"), i)][1] for i in range(a.dom.size)))
        bottom = FinFunction(a.cod, b.cod, tuple(
            assignment[((1, "*"), i)][1] for i in range(a.cod.size)))
        return Square(a, b, top, bottom)
    base = ambient.base
    top = psh.PresheafMap(a.dom, b.dom, {
        c: FinFunction(a.dom.at(c), b.dom.at(c), tuple(
            assignment[((0, c), i)][1] for i in range(a.dom.at(c).size)))
        for c in base.objects})
    bottom = psh.PresheafMap(a.cod, b.cod, {
        c: FinFunction(a.cod.at(c), b.cod.at(c), tuple(
            assignment[((1, c), i)][1] for i in range(a.cod.at(c).size)))
        for c in base.objects})
    return Square(a, b, top, bottom)


# -- JSON ------------------------------------------------------------------------

def arrow_diagram_to_json(u: ArrowDiagram) -> dict:
    arr = {j: u.ambient.mor_to_json(u.arrow(j).mor) for j in u.index.objects}
    squares = {}
    for m in u.index.non_identity_morphisms():
        s = u.square(m.name)
        squares[m.name] = {"top": u.ambient.mor_to_json(s.top),
                           "bottom": u.ambient.mor_to_json(s.bottom)}
    return {"index": category_to_json(u.index), "arrows": arr,
            "squares": squares}


def _mor_from_json(ambient, data):
    if isinstance(ambient, FinSetAmbient):
        return function_from_json(data)
    if isinstance(ambient, PresheafAmbient):
        return psh.presheaf_map_from_json(data, base=ambient.base)
    raise MalformedInput("unsupported ambient for diagram files")


def arrow_diagram_from_json(data, ambient) -> ArrowDiagram:
    if data == "subobject_classifier" or (
            isinstance(data, dict)
            and data.get("generators") == "subobject_classifier"):
        return subobject_classifier_diagram(ambient)
    if not isinstance(data, dict) or "index" not in data:
        raise MalformedInput("diagram file needs an 'index' category")
    index = category_from_json(data["index"])
    arrows = data.get("arrows", {})
    on_objects = {j: ArrowObj(ambient, _mor_from_json(ambient, spec))
                  for j, spec in arrows.items()}
    on_morphisms = {}
    for name, spec in data.get("squares", {}).items():
        if not index.has_morphism(name):
            raise MalformedInput(f"square at unknown morphism {name!r}")
        m = index.morphism(name)
        on_morphisms[name] = Square(
            on_objects[m.dom], on_objects[m.cod],
            _mor_from_json(ambient, spec["top"]),
            _mor_from_json(ambient, spec["bottom"]))
    u = ArrowDiagram(ambient, index, on_objects, on_morphisms)
    problems = validate_diagram(u)
    if problems:
        raise MalformedInput("; ".join(problems))
    return u
