"""The algebraic small object argument over a finite ambient.

Given a finite diagram of generating arrows, this module builds the
one-step gluing endofunctor on the arrow category, runs the free-monad
iteration on it, and extracts the two factors of every map together
with their comonad and monad structure, coherent lifting operators,
and a replayable, independently checkable construction trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import density as dn
from .arrows import (ArrowAmbient, ArrowObj, EndoData, PointedEndofunctor,
                     Session, Square, compose_squares, identity_square)
from .density import (ArrowDiagram, arrow_diagram_from_json,
                      arrow_diagram_to_json, density_action, density_comonad,
                      lifting_problems, validate_diagram)
from .errors import (BackdropViolation, BoundaryMismatch, ColimitNotPreserved,
                     DomainMismatch, IterationLimit, MalformedInput,
                     MissingGeneratorWitness, NotAnAlgebra, NotARetract,
                     NotDiscrete)
from .freemonad import (DEFAULT_MAX_STEPS, Backdrop, FreeMonadConfig,
                        algebra_extend, backdrop_from_json, backdrop_to_json,
                        free_algebra)


@dataclass(frozen=True)
class StepData:
    """The one-step gluing at f: its cell, the gluing pushout, the glued
    arrow, and the unit into it."""
    f: ArrowObj
    den: object = field(repr=False)
    po: object = field(repr=False)
    obj: ArrowObj
    unit: Square


class GeneratedAWFS:
    """A factorization session driven by a diagram of generating arrows.

    All heavy values (cells, gluing steps, factorizations) are memoized
    per session, so one instance must not be shared across threads.
    """

    def __init__(self, generators: ArrowDiagram,
                 backdrop: Backdrop = Backdrop("all"),
                 cap: int | None = None,
                 max_steps: int = DEFAULT_MAX_STEPS):
        problems = validate_diagram(generators)
        if problems:
            raise MalformedInput("generator diagram is invalid: "
                                 + "; ".join(problems))
        if backdrop.kind not in ("all", "mono"):
            raise MalformedInput("the backdrop over the base ambient must "
                                 "be 'all' or 'mono'")
        self.generators = generators
        self.ambient = generators.ambient
        self.arr = generators.arr
        self.backdrop = backdrop
        self.cap = cap
        self.max_steps = max_steps
        self.session = Session()
        self.t = _step_endofunctor(self)
        self.cfg = FreeMonadConfig(self.arr, Backdrop("domain", backdrop),
                                   self.t)
        self._factorizations: dict = {}
        self._canonical: dict = {}

    def density(self, f: ArrowObj):
        return density_comonad(self.generators, f, cap=self.cap,
                               session=self.session)

    def one_step(self, f: ArrowObj) -> StepData:
        return self.session.memo(("step", f), lambda: self._one_step(f))

    def _one_step(self, f: ArrowObj) -> StepData:
        inner = self.ambient
        den = self.density(f)
        if not self.backdrop.contains(inner, den.den.mor):
            raise BackdropViolation(
                "the cell arrow at this map left the configured class; "
                "the generators are not compatible with the backdrop")
        po = inner.pushout(den.counit.top, den.den.mor, tags=("mid", "cell"))
        if not self.backdrop.contains(inner, po.left):
            raise BackdropViolation(
                "gluing the cells pushed the unit outside the configured "
                "class")
        mor = po.mediate(f.mor, den.counit.bottom)
        obj = ArrowObj(inner, mor)
        unit = Square(f, obj, po.left, inner.identity(f.cod))
        return StepData(f, den, po, obj, unit)

    def free_on(self, f: ArrowObj):
        return self.session.memo(("free", f),
                                 lambda: free_algebra(self.cfg, f,
                                                      self.max_steps))

    def factorize(self, f: ArrowObj) -> "Factorization":
        if f not in self._factorizations:
            self._factorizations[f] = self._factorize(f)
        return self._factorizations[f]

    def _factorize(self, f: ArrowObj) -> "Factorization":
        inner = self.ambient
        fa = self.free_on(f)
        beta = fa.unit.bottom
        assert inner.is_iso(beta)
        left = ArrowObj(inner, fa.unit.top)
        right = ArrowObj(inner, inner.compose(inner.inverse(beta),
                                              fa.carrier.mor))
        midpoint = left.cod
        assert inner.compose(right.mor, left.mor) == f.mor
        unit = Square(f, right, fa.unit.top, inner.identity(f.cod))
        conj = Square(fa.carrier, right, inner.identity(midpoint),
                      inner.inverse(beta))
        conj_inv = Square(right, fa.carrier, inner.identity(midpoint), beta)
        algebra = compose_squares(
            conj, compose_squares(fa.structure, self.t.on_mor(conj_inv)))
        assert compose_squares(algebra, self.t.unit(right)) \
            == identity_square(right)
        trace = self._build_trace(f, fa)
        return Factorization(f, left, right, midpoint, unit, algebra, fa,
                             trace)

    def _conj_inv(self, fact: "Factorization") -> Square:
        inner = self.ambient
        return Square(fact.right, fact.free.carrier,
                      inner.identity(fact.midpoint), fact.free.unit.bottom)

    def extend(self, fact: "Factorization", target, h: Square) -> Square:
        """The unique structure map out of fact's right factor extending h;
        target is a pair (arrow, algebra square)."""
        raw = algebra_extend(fact.free, target, h)
        return compose_squares(raw, self._conj_inv(fact))

    def _build_trace(self, f: ArrowObj, fa) -> "Trace":
        inner = self.ambient
        recs = fa.trace.stages
        n_star = fa.trace.converged_stage
        stages = []
        composite = identity_square(f)
        for alpha in range(n_star + 1):
            arrow = recs[alpha].x.a
            cell = _cell_record(self.one_step(arrow).den)
            if alpha == 0:
                built = None
            elif alpha == 1:
                base = self.one_step(f)
                built = QuotientRecord(
                    span=(base.den.counit.top, base.den.den.mor),
                    tags=("mid", "cell"),
                    left=base.po.left, right=base.po.right, into="left")
            else:
                step = recs[alpha - 2].step
                built = QuotientRecord(
                    span=(step.gap.top, step.fold.top),
                    tags=("i0", "i1"),
                    left=step.out.left.top, right=step.out.right.top,
                    into="right")
            transition = recs[alpha].step.g
            provenance = "hypothesis" if alpha == 0 else "cobase-change"
            certs = (
                {"morphism": "transition", "provenance": provenance,
                 "in_backdrop": bool(self.backdrop.contains(
                     inner, transition.top))},
                {"morphism": "composite", "provenance": "colimit-closure",
                 "in_backdrop": bool(self.backdrop.contains(
                     inner, composite.top))})
            stages.append(TraceStage(alpha, arrow, cell, built, composite,
                                     transition, certs))
            composite = compose_squares(transition, composite)
        return Trace(f, self.generators, self.backdrop, tuple(stages),
                     n_star)

    # -- induced maps between factorizations ---------------------------------

    def counit(self, f: ArrowObj) -> Square:
        """The square collapsing the left factor back onto f."""
        fact = self.factorize(f)
        return Square(fact.left, f, self.ambient.identity(f.dom),
                      fact.right.mor)

    def right_map(self, sigma: Square) -> Square:
        """The action of the right-factor functor on a square."""
        fs = self.factorize(sigma.source)
        ft = self.factorize(sigma.target)
        h = compose_squares(ft.unit, sigma)
        ext = self.extend(fs, (ft.right, ft.algebra), h)
        assert ext.bottom == sigma.bottom
        return ext

    def left_map(self, sigma: Square) -> Square:
        """The action of the left-factor functor on a square."""
        fs = self.factorize(sigma.source)
        ft = self.factorize(sigma.target)
        return Square(fs.left, ft.left, sigma.top, self.right_map(sigma).top)

    def midpoint_map(self, sigma: Square):
        return self.right_map(sigma).top

    def canonical_structure(self, f: ArrowObj) -> "LiftingStructure":
        """The coherent lifting structure carried by the right factor."""
        if f not in self._canonical:
            fact = self.factorize(f)
            self._canonical[f] = algebra_to_structure(self, fact.right,
                                                      fact.algebra)
        return self._canonical[f]

    def multiplication(self, f: ArrowObj):
        """The flattening of a twice-applied right factor, and its square."""
        fact = self.factorize(f)
        fact2 = self.factorize(fact.right)
        pi = compose_squares(
            algebra_extend(fact2.free, (fact.right, fact.algebra),
                           identity_square(fact.right)),
            self._conj_inv(fact2))
        assert self.ambient.is_identity(pi.bottom)
        return pi.top, pi

    def comultiplication(self, f: ArrowObj):
        """The duplication of the left factor, and its square.

        The midpoint map is forced by freeness against the composed
        lifting structure of the two right factors stacked over f.
        """
        inner = self.ambient
        fact = self.factorize(f)
        fact_l = self.factorize(fact.left)
        composed = compose_structures(self.canonical_structure(f),
                                      self.canonical_structure(fact.left))
        d = structure_to_algebra(self, composed)
        seed = Square(f, composed.f, fact_l.left.mor,
                      inner.identity(f.cod))
        ext = self.extend(fact, (composed.f, d), seed)
        assert inner.is_identity(ext.bottom)
        delta = ext.top
        sigma = Square(fact.left, fact_l.left, inner.identity(f.dom), delta)
        return delta, sigma

    def left_factor_coalgebra(self, f: ArrowObj) -> "Coalgebra":
        delta, _ = self.comultiplication(f)
        fact = self.factorize(f)
        out = Coalgebra(fact.left, delta)
        assert self.coalgebra_holds(out)
        return out

    def coalgebra_holds(self, c: "Coalgebra") -> bool:
        inner = self.ambient
        fact = self.factorize(c.f)
        return (inner.compose(fact.right.mor, c.section)
                == inner.identity(c.f.cod)
                and inner.compose(c.section, c.f.mor) == fact.left.mor)

    def retract_lift(self, c: "Coalgebra", alpha: Square,
                     beta: Square) -> "Coalgebra":
        """Transport a section along a retract with identity domain legs."""
        inner = self.ambient
        if alpha.target != c.f or beta.source != c.f \
                or alpha.source != beta.target:
            raise NotARetract("the retract must pass through the "
                              "structured map")
        if not (inner.is_identity(alpha.top) and inner.is_identity(beta.top)):
            raise NotARetract("both domain components must be identities")
        if compose_squares(beta, alpha) != identity_square(alpha.source):
            raise NotARetract("the two squares do not compose to the "
                              "identity")
        e_beta = self.right_map(beta).top
        section = inner.compose(e_beta,
                                inner.compose(c.section, alpha.bottom))
        out = Coalgebra(alpha.source, section)
        assert self.coalgebra_holds(out)
        return out

    def law_suite(self, f: ArrowObj) -> dict:
        """All factorization, comonad, and monad laws at f, componentwise."""
        inner = self.ambient
        fact = self.factorize(f)
        checks = {}
        checks["factorization"] = \
            inner.compose(fact.right.mor, fact.left.mor) == f.mor \
            and fact.left.dom == f.dom and fact.right.cod == f.cod
        checks["unit_codomain_identity"] = inner.is_identity(fact.unit.bottom)
        delta, sigma = self.comultiplication(f)
        checks["comonad_counit_left"] = \
            compose_squares(self.counit(fact.left), sigma) \
            == identity_square(fact.left)
        checks["comonad_counit_right"] = \
            compose_squares(self.left_map(self.counit(f)), sigma) \
            == identity_square(fact.left)
        sigma_l = self.comultiplication(fact.left)[1]
        checks["comonad_coassociativity"] = \
            compose_squares(self.left_map(sigma), sigma) \
            == compose_squares(sigma_l, sigma)
        mu, pi = self.multiplication(f)
        fact2 = self.factorize(fact.right)
        checks["monad_unit_left"] = \
            compose_squares(pi, fact2.unit) == identity_square(fact.right)
        checks["monad_unit_right"] = \
            compose_squares(pi, self.right_map(fact.unit)) \
            == identity_square(fact.right)
        pi_r = self.multiplication(fact.right)[1]
        checks["monad_associativity"] = \
            compose_squares(pi, self.right_map(pi)) \
            == compose_squares(pi, pi_r)
        return {"checks": checks, "pass": all(checks.values())}

    def quillen_factorize(self, f: ArrowObj,
                          max_steps: int | None = None) -> "QuillenResult":
        """Factor by repeatedly gluing one cell per problem, with no
        quotienting, until the right map has plain fillers everywhere."""
        u = self.generators
        if u.index.non_identity_morphisms():
            raise NotDiscrete("cell attachment without quotienting needs a "
                              "discrete generator shape")
        inner = self.ambient
        limit = self.max_steps if max_steps is None else max_steps
        current = f
        stage_tops: list = []
        while True:
            probs = []
            for i in u.index.objects:
                for a in lifting_problems(u, i, current, cap=self.cap):
                    probs.append((i, a))
            # a first stage is always glued; afterwards stop as soon as
            # every problem has some filler
            if not probs or (stage_tops
                             and has_rlp(current, u, cap=self.cap)):
                left_mor = inner.identity(f.dom)
                for top in stage_tops:
                    left_mor = inner.compose(top, left_mor)
                left = ArrowObj(inner, left_mor)
                assert inner.compose(current.mor, left_mor) == f.mor
                return QuillenResult(f, left, current, tuple(stage_tops),
                                     len(stage_tops))
            if len(stage_tops) == limit:
                break
            names = [f"{i}#{k}" for k, (i, _) in enumerate(probs)]
            doms = inner.coproduct([u.arrow(i).dom for i, _ in probs],
                                   tags=names)
            cods = inner.coproduct([u.arrow(i).cod for i, _ in probs],
                                   tags=names)
            to_x = doms.mediate([a.top for _, a in probs], cod=current.dom)
            gen = doms.mediate(
                [inner.compose(cods.injections[k], u.arrow(probs[k][0]).mor)
                 for k in range(len(probs))], cod=cods.obj)
            po = inner.pushout(to_x, gen, tags=("old", "new"))
            bottoms = cods.mediate([a.bottom for _, a in probs], cod=f.cod)
            current = ArrowObj(inner, po.mediate(current.mor, bottoms))
            stage_tops.append(po.left)
        err = IterationLimit(f"no pointwise fillers within {limit} stages")
        err.stage_tops = tuple(stage_tops)
        raise err


def _step_endofunctor(awfs: GeneratedAWFS) -> PointedEndofunctor:
    inner = awfs.ambient

    def on_obj(f: ArrowObj) -> ArrowObj:
        return awfs.one_step(f).obj

    def on_mor(s: Square) -> Square:
        src = awfs.one_step(s.source)
        tgt = awfs.one_step(s.target)
        act = density_action(awfs.generators, s, src.den, tgt.den)
        top = src.po.mediate(
            inner.compose(tgt.po.left, s.top),
            inner.compose(tgt.po.right, act.bottom))
        out = Square(src.obj, tgt.obj, top, s.bottom)
        if awfs.backdrop.contains(inner, s.top) \
                and awfs.backdrop.contains(inner, s.bottom) \
                and not awfs.backdrop.contains(inner, out.top):
            raise BackdropViolation(
                "gluing mapped a square from the configured class outside "
                "of it; the generators are not compatible with the backdrop")
        return out

    def unit(f: ArrowObj) -> Square:
        return awfs.one_step(f).unit

    return PointedEndofunctor(awfs.arr, on_obj, on_mor, unit)


def split_pointed_endofunctor(awfs: GeneratedAWFS) -> PointedEndofunctor:
    """The one-step gluing endofunctor of the session, with its unit."""
    return awfs.t


@dataclass(frozen=True)
class Factorization:
    f: ArrowObj
    left: ArrowObj
    right: ArrowObj
    midpoint: object
    unit: Square
    algebra: Square = field(repr=False)
    free: object = field(repr=False)
    trace: "Trace" = field(repr=False)

    @property
    def converged_stage(self) -> int:
        return self.trace.converged_stage


def factorize(awfs: GeneratedAWFS, f: ArrowObj) -> Factorization:
    return awfs.factorize(f)


# -- construction traces -------------------------------------------------------

@dataclass(frozen=True)
class TraceCell:
    """The cell glued at one stage: the colimit arrow, the square back onto
    the stage arrow, and the full problem bookkeeping."""
    den: ArrowObj
    counit: Square
    legs: tuple
    problems: tuple


@dataclass(frozen=True)
class QuotientRecord:
    """The base-level pushout that produced a stage's domain; `into` names
    the leg that equals the incoming transition's domain component."""
    span: tuple
    tags: tuple
    left: object
    right: object
    into: str


@dataclass(frozen=True)
class TraceStage:
    index: int
    arrow: ArrowObj
    cell: TraceCell = field(repr=False)
    built_from: QuotientRecord | None
    composite: Square
    transition: Square
    certificates: tuple


@dataclass(frozen=True)
class Trace:
    f: ArrowObj
    generators: ArrowDiagram = field(repr=False, compare=False)
    backdrop: Backdrop
    stages: tuple
    converged_stage: int


def _cell_record(den) -> TraceCell:
    order = den.comma.category.objects
    return TraceCell(
        den.den, den.counit,
        tuple((n, den.legs[n]) for n in order),
        tuple((n,) + den.comma.problems[n] for n in order))


def verify_trace(trace: Trace, fact, cap: int | None = None) -> dict:
    """Recheck a trace against a factorization from scratch.

    Every cell is recomputed, every recorded pushout re-executed, every
    certificate re-evaluated, and the transitions recomposed; the report
    localizes the first discrepancy of each kind by stage and check name.
    """
    u = trace.generators
    inner = u.ambient
    items: list = []

    def item(stage, check, ok, detail):
        items.append({"stage": stage, "check": check, "pass": bool(ok),
                      "detail": detail})

    ok = bool(trace.stages) and trace.f == fact.f \
        and trace.stages[0].arrow == fact.f \
        and trace.stages[0].composite == identity_square(fact.f)
    item(None, "seed", ok, "trace starts at the factorized map")

    for st in trace.stages:
        try:
            fresh = density_comonad(u, st.arrow, cap=cap)
            order = fresh.comma.category.objects
            ok = (fresh.den == st.cell.den
                  and fresh.counit == st.cell.counit
                  and tuple((n, fresh.legs[n]) for n in order)
                  == st.cell.legs
                  and tuple((n,) + fresh.comma.problems[n] for n in order)
                  == st.cell.problems)
        except Exception:
            ok = False
        item(st.index, "cell", ok,
             "recomputed cell matches the recorded one")

        if st.index == 0:
            item(0, "quotient", st.built_from is None,
                 "the seed stage glues nothing")
        elif st.built_from is None:
            item(st.index, "quotient", False, "missing gluing record")
        else:
            rec = st.built_from
            prev = trace.stages[st.index - 1]
            try:
                po = inner.pushout(rec.span[0], rec.span[1],
                                   tags=tuple(rec.tags))
                incoming = rec.left if rec.into == "left" else rec.right
                ok = (po.obj == st.arrow.dom
                      and po.left == rec.left and po.right == rec.right
                      and rec.into in ("left", "right")
                      and incoming == prev.transition.top
                      and prev.transition.target == st.arrow)
            except Exception:
                ok = False
            item(st.index, "quotient", ok,
                 "re-executed pushout reproduces the stage domain and "
                 "its transition")

        kinds = set()
        ok = True
        for cert in st.certificates:
            which = cert.get("morphism")
            kinds.add(which)
            if which == "transition":
                mor = st.transition.top
            elif which == "composite":
                mor = st.composite.top
            else:
                ok = False
                continue
            if cert.get("in_backdrop") is not True \
                    or not trace.backdrop.contains(inner, mor):
                ok = False
        ok = ok and {"transition", "composite"} <= kinds
        item(st.index, "certificate", ok,
             "all recorded class certificates re-verify")

    running = identity_square(trace.f)
    ok = True
    for st in trace.stages:
        if st.composite != running or st.transition.source != st.arrow:
            ok = False
            break
        running = compose_squares(st.transition, running)
    last = trace.stages[-1] if trace.stages else None
    ok = ok and last is not None \
        and last.composite.top == fact.left.mor \
        and inner.is_iso(last.composite.bottom)
    item(None, "recomposition", ok,
         "the composed transitions equal the left factor on the nose")

    try:
        col = inner.sequential_colimit(
            [st.transition.top for st in trace.stages])
        ok = col.obj == fact.midpoint \
            and col.stable_from == trace.converged_stage
    except Exception:
        ok = False
    item(None, "chain", ok,
         "the transition chain stabilizes exactly at the recorded stage "
         "on the midpoint")

    ok = trace.converged_stage == len(trace.stages) - 1 \
        and inner.compose(fact.right.mor, fact.left.mor) == fact.f.mor \
        and fact.left.cod == fact.midpoint
    item(None, "factorization", ok,
         "the two factors compose to the map through the midpoint")

    return {"pass": all(it["pass"] for it in items), "items": items}


# -- coherent lifting structures ------------------------------------------------

@dataclass(frozen=True)
class LiftingStructure:
    """A coherent choice of fillers: one per problem, compatible with every
    generator morphism."""
    f: ArrowObj
    fillers: dict
    awfs: GeneratedAWFS = field(repr=False, compare=False)

    def __hash__(self):
        return hash((self.f, tuple(self.fillers.items())))


def find_lifting_structures(awfs: GeneratedAWFS, f: ArrowObj,
                            mode: str = "all", cap: int | None = None):
    """Backtracking search over coherent filler assignments.

    Problems are visited in generator-object order, then in enumeration
    order; assigning a filler immediately forces the fillers of every
    problem reachable along a generator morphism, which prunes the search
    and keeps the output order deterministic.  mode is "first", "count",
    or "all".
    """
    if mode not in ("first", "count", "all"):
        raise MalformedInput("mode must be first, count, or all")
    u = awfs.generators
    inner = awfs.ambient
    cap = awfs.cap if cap is None else cap
    problems: list = []
    for i in u.index.objects:
        for a in lifting_problems(u, i, f, cap=cap):
            problems.append((i, a))
    candidates = {}
    for i, a in problems:
        gen = u.arrow(i)
        candidates[(i, a)] = [
            s for s in inner.hom(gen.cod, f.dom, cap=cap)
            if inner.compose(s, gen.mor) == a.top
            and inner.compose(f.mor, s) == a.bottom]
    incoming = {i: [m for m in u.index.non_identity_morphisms()
                    if m.cod == i] for i in u.index.objects}
    assignment: dict = {}
    found: list = []
    count = 0

    def propagate(i, a, value, touched):
        for m in incoming[i]:
            square = u.square(m.name)
            key = (m.dom, compose_squares(a, square))
            want = inner.compose(value, square.bottom)
            if key in assignment:
                if assignment[key] != want:
                    return False
            else:
                assignment[key] = want
                touched.append(key)
        return True

    def search(pos):
        nonlocal count
        if pos == len(problems):
            structure = LiftingStructure(
                f, {k: assignment[k] for k in problems}, awfs)
            if mode == "count":
                count += 1
                return False
            found.append(structure)
            return mode == "first"
        key = problems[pos]
        if key in assignment:
            assert assignment[key] in candidates[key]
            return search(pos + 1)
        for value in candidates[key]:
            assignment[key] = value
            touched = [key]
            if propagate(key[0], key[1], value, touched) and search(pos + 1):
                return True
            for k in touched:
                del assignment[k]
        return False

    search(0)
    if mode == "count":
        return count
    return found


def solve_lifting(structure: LiftingStructure, i: str, alpha: Square):
    """The filler the structure assigns to one problem."""
    key = (i, alpha)
    if key not in structure.fillers:
        raise BoundaryMismatch("not a lifting problem of this structure")
    return structure.fillers[key]


def compose_structures(outer: LiftingStructure,
                       inner_structure: LiftingStructure) -> LiftingStructure:
    """The structure on the composite arrow, solving against the outer map
    first and feeding its filler to the inner one."""
    awfs = outer.awfs
    if awfs is not inner_structure.awfs:
        raise BoundaryMismatch("structures come from different sessions")
    if inner_structure.f.cod != outer.f.dom:
        raise BoundaryMismatch("the two structured arrows do not compose")
    amb = awfs.ambient
    u = awfs.generators
    comp = ArrowObj(amb, amb.compose(outer.f.mor, inner_structure.f.mor))
    fillers = {}
    for i in u.index.objects:
        gen = u.arrow(i)
        for a in lifting_problems(u, i, comp, cap=awfs.cap):
            outer_problem = Square(gen, outer.f,
                                   amb.compose(inner_structure.f.mor, a.top),
                                   a.bottom)
            through = solve_lifting(outer, i, outer_problem)
            inner_problem = Square(gen, inner_structure.f, a.top, through)
            fillers[(i, a)] = solve_lifting(inner_structure, i,
                                            inner_problem)
    return LiftingStructure(comp, fillers, awfs)


def structure_to_algebra(awfs: GeneratedAWFS,
                         psi: LiftingStructure) -> Square:
    """Glue a structure's fillers into a retraction of the one-step unit."""
    inner = awfs.ambient
    u = awfs.generators
    f = psi.f
    data = awfs.one_step(f)
    den = data.den
    target = ArrowObj(inner, inner.identity(f.dom))
    legs = []
    for name in den.comma.category.objects:
        j, a = den.comma.problems[name]
        legs.append(Square(u.arrow(j), target, a.top, psi.fillers[(j, a)]))
    glued = den.coequalizer.mediate(
        den.coproduct.mediate(legs, cod=target))
    d_top = data.po.mediate(inner.identity(f.dom), glued.bottom)
    return Square(data.obj, f, d_top, inner.identity(f.cod))


def algebra_to_structure(awfs: GeneratedAWFS, f: ArrowObj,
                         d: Square) -> LiftingStructure:
    """Read the fillers of a one-step retraction back off its cells."""
    inner = awfs.ambient
    data = awfs.one_step(f)
    if d.source != data.obj or d.target != f:
        raise MalformedInput("the structure square must go from the glued "
                             "arrow back onto the map")
    if compose_squares(d, data.unit) != identity_square(f):
        raise NotAnAlgebra("the structure square does not retract the unit")
    fillers = {}
    for name in data.den.comma.category.objects:
        j, a = data.den.comma.problems[name]
        leg = data.den.legs[name]
        fillers[(j, a)] = inner.compose(
            d.top, inner.compose(data.po.right, leg.bottom))
    return LiftingStructure(f, fillers, awfs)


def has_rlp(f: ArrowObj, u: ArrowDiagram, cap: int | None = None) -> bool:
    """True iff every problem against every generator has some filler,
    with no coherence requirement."""
    inner = u.ambient
    for i in u.index.objects:
        gen = u.arrow(i)
        for a in lifting_problems(u, i, f, cap=cap):
            if not any(inner.compose(s, gen.mor) == a.top
                       and inner.compose(f.mor, s) == a.bottom
                       for s in inner.hom(gen.cod, f.dom, cap=cap)):
                return False
    return True


def find_filler(inner, left_mor, right_mor, top, bottom,
                cap: int | None = None):
    """A diagonal for one square from left_mor to right_mor, or None."""
    for s in inner.hom(inner.cod(left_mor), inner.dom(right_mor), cap=cap):
        if inner.compose(s, left_mor) == top \
                and inner.compose(right_mor, s) == bottom:
            return s
    return None


# -- coalgebras on left-class maps ----------------------------------------------

@dataclass(frozen=True)
class Coalgebra:
    """A map together with a section of its right factor that restricts the
    left factor correctly."""
    f: ArrowObj
    section: object


def left_factor_coalgebra(awfs: GeneratedAWFS, f: ArrowObj) -> Coalgebra:
    return awfs.left_factor_coalgebra(f)


def retract_lift(awfs: GeneratedAWFS, c: Coalgebra, alpha: Square,
                 beta: Square) -> Coalgebra:
    return awfs.retract_lift(c, alpha, beta)


def comultiplication(awfs: GeneratedAWFS, f: ArrowObj):
    return awfs.comultiplication(f)


def multiplication(awfs: GeneratedAWFS, f: ArrowObj):
    return awfs.multiplication(f)


@dataclass(frozen=True)
class QuillenResult:
    """A factorization by plain cell attachment: no quotient stages, left
    factor recorded as the chain of stage inclusions."""
    f: ArrowObj
    left: ArrowObj
    right: ArrowObj
    stage_tops: tuple
    steps: int


def quillen_factorize(awfs: GeneratedAWFS, f: ArrowObj,
                      max_steps: int | None = None) -> QuillenResult:
    return awfs.quillen_factorize(f, max_steps)


# -- replaying a trace under a functor ------------------------------------------

def replay(trace: Trace, functor: EndoData, witnesses: dict):
    """Re-run a recorded construction under a functor of the base ambient.

    Every recorded pushout and the final chain are re-executed on the
    functor's images and compared against the image of the recorded
    vertex through the mediator; the output is the image of the left
    factor, recomposed stage by stage, together with a stage-indexed
    structure assembled from the supplied per-generator witnesses.
    """
    inner = trace.f.ambient
    used = sorted({j for st in trace.stages
                   for (_name, j, _a) in st.cell.problems})
    missing = [j for j in used if j not in witnesses]
    if missing:
        raise MissingGeneratorWitness(
            "no witness supplied for generators: " + ", ".join(missing))
    fobj, fmor = functor.on_obj, functor.on_mor
    checks = []

    for st in trace.stages:
        if st.built_from is None:
            continue
        rec = st.built_from
        po = inner.pushout(fmor(rec.span[0]), fmor(rec.span[1]),
                           tags=tuple(rec.tags))
        try:
            med = po.mediate(fmor(rec.left), fmor(rec.right))
        except DomainMismatch as exc:
            err = ColimitNotPreserved(
                f"stage {st.index} gluing: image cocone does not commute")
            err.cocone = {"stage": st.index, "check": "quotient",
                          "legs": (fmor(rec.left), fmor(rec.right))}
            raise err from exc
        if not inner.is_iso(med):
            err = ColimitNotPreserved(
                f"stage {st.index} gluing is not preserved")
            err.cocone = {"stage": st.index, "check": "quotient",
                          "legs": (fmor(rec.left), fmor(rec.right))}
            raise err
        checks.append({"stage": st.index, "check": "quotient",
                       "preserved": True})

    n_star = trace.converged_stage
    rec_legs = [None] * (n_star + 1)
    rec_legs[n_star] = inner.identity(trace.stages[n_star].arrow.dom)
    for alpha in range(n_star - 1, -1, -1):
        rec_legs[alpha] = inner.compose(
            rec_legs[alpha + 1], trace.stages[alpha].transition.top)
    maps = [fmor(st.transition.top) for st in trace.stages]
    col = inner.sequential_colimit(maps)
    cocone = [fmor(leg) for leg in rec_legs]
    cocone.append(inner.compose(cocone[n_star],
                                inner.inverse(maps[n_star]))
                  if inner.is_iso(maps[n_star]) else None)
    try:
        if cocone[-1] is None:
            raise DomainMismatch("stabilization step is not invertible")
        med = col.mediate(cocone)
    except DomainMismatch as exc:
        err = ColimitNotPreserved("the transition chain is not preserved")
        err.cocone = {"stage": None, "check": "chain", "legs": cocone}
        raise err from exc
    if not inner.is_iso(med):
        err = ColimitNotPreserved("the transition chain is not preserved")
        err.cocone = {"stage": None, "check": "chain", "legs": cocone}
        raise err
    checks.append({"stage": None, "check": "chain", "preserved": True})

    comp = inner.identity(fobj(trace.f.dom))
    for st in trace.stages[:-1]:
        comp = inner.compose(fmor(st.transition.top), comp)
    if comp != fmor(trace.stages[-1].composite.top):
        raise MalformedInput("the supplied functor does not preserve "
                             "composition along the trace")
    checks.append({"stage": None, "check": "recomposition",
                   "preserved": True})

    structure = tuple(
        {"stage": st.index,
         "cells": tuple({"cell": name, "generator": j}
                        for (name, j, _a) in st.cell.problems)}
        for st in trace.stages)
    report = {"checks": checks,
              "witnesses": {j: witnesses[j] for j in used},
              "structure": structure}
    return ArrowObj(inner, comp), report


# -- serialization ---------------------------------------------------------------

def _square_to_json(inner, s: Square) -> dict:
    return {"source": inner.mor_to_json(s.source.mor),
            "target": inner.mor_to_json(s.target.mor),
            "top": inner.mor_to_json(s.top),
            "bottom": inner.mor_to_json(s.bottom)}


def _square_from_json(inner, data) -> Square:
    return Square(ArrowObj(inner, dn._mor_from_json(inner, data["source"])),
                  ArrowObj(inner, dn._mor_from_json(inner, data["target"])),
                  dn._mor_from_json(inner, data["top"]),
                  dn._mor_from_json(inner, data["bottom"]))


def trace_to_json(trace: Trace) -> dict:
    inner = trace.generators.ambient
    stages = []
    for st in trace.stages:
        cell = {"den": inner.mor_to_json(st.cell.den.mor),
                "counit": _square_to_json(inner, st.cell.counit),
                "legs": [[n, _square_to_json(inner, sq)]
                         for n, sq in st.cell.legs],
                "problems": [[n, j, _square_to_json(inner, sq)]
                             for n, j, sq in st.cell.problems]}
        built = None
        if st.built_from is not None:
            rec = st.built_from
            built = {"span": [inner.mor_to_json(rec.span[0]),
                              inner.mor_to_json(rec.span[1])],
                     "tags": list(rec.tags),
                     "left": inner.mor_to_json(rec.left),
                     "right": inner.mor_to_json(rec.right),
                     "into": rec.into}
        stages.append({"index": st.index,
                       "arrow": inner.mor_to_json(st.arrow.mor),
                       "cell": cell,
                       "built_from": built,
                       "composite": _square_to_json(inner, st.composite),
                       "transition": _square_to_json(inner, st.transition),
                       "certificates": list(st.certificates)})
    return {"f": inner.mor_to_json(trace.f.mor),
            "generators": arrow_diagram_to_json(trace.generators),
            "backdrop": backdrop_to_json(trace.backdrop),
            "converged_stage": trace.converged_stage,
            "stages": stages}


def trace_from_json(data, ambient) -> Trace:
    u = arrow_diagram_from_json(data["generators"], ambient)
    inner = ambient

    def mor(d):
        return dn._mor_from_json(inner, d)

    stages = []
    for sd in data["stages"]:
        cell = TraceCell(
            ArrowObj(inner, mor(sd["cell"]["den"])),
            _square_from_json(inner, sd["cell"]["counit"]),
            tuple((n, _square_from_json(inner, sq))
                  for n, sq in sd["cell"]["legs"]),
            tuple((n, j, _square_from_json(inner, sq))
                  for n, j, sq in sd["cell"]["problems"]))
        built = None
        if sd["built_from"] is not None:
            bd = sd["built_from"]
            built = QuotientRecord(
                (mor(bd["span"][0]), mor(bd["span"][1])),
                tuple(bd["tags"]), mor(bd["left"]), mor(bd["right"]),
                bd["into"])
        stages.append(TraceStage(
            sd["index"], ArrowObj(inner, mor(sd["arrow"])), cell, built,
            _square_from_json(inner, sd["composite"]),
            _square_from_json(inner, sd["transition"]),
            tuple(sd["certificates"])))
    return Trace(ArrowObj(inner, mor(data["f"])), u,
                 backdrop_from_json(data["backdrop"]),
                 tuple(stages), data["converged_stage"])


def factorization_to_json(fact: Factorization) -> dict:
    inner = fact.f.ambient
    return {"f": inner.mor_to_json(fact.f.mor),
            "left": inner.mor_to_json(fact.left.mor),
            "right": inner.mor_to_json(fact.right.mor),
            "midpoint": inner.obj_to_json(fact.midpoint),
            "midpoint_size": inner.obj_size(fact.midpoint),
            "converged_stage": fact.converged_stage,
            "unit": _square_to_json(inner, fact.unit),
            "algebra": _square_to_json(inner, fact.algebra),
            "trace": trace_to_json(fact.trace)}


def structure_to_json(psi: LiftingStructure) -> dict:
    inner = psi.f.ambient
    return {"f": inner.mor_to_json(psi.f.mor),
            "fillers": [{"index": i,
                         "problem": _square_to_json(inner, a),
                         "filler": inner.mor_to_json(s)}
                        for (i, a), s in psi.fillers.items()]}
