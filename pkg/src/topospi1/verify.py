"""Property suites over exhaustive and seeded corpora.

Each suite yields cases ``(check name, args)``.  A check raises
``CheckFailed`` when the property fails and ``CapExceeded`` when it cannot
be decided within the caps.  The first failing case of a suite is written
to a counterexample file that ``run_replay`` (``topospi1 verify --replay``)
re-runs in isolation.
"""
from __future__ import annotations

import itertools
import json
import os
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .corpus import (
    CatalogSite,
    arrow_into_circle,
    circle_endofunctors,
    group_homs,
    locally_constant_corpus,
    presheaf_corpus,
    random_instances,
    random_relabelling,
    site_catalog,
    square_to_arrow,
    subgroup_inclusions,
)
from .errors import CapExceeded, ToposError
from .finiteness import (
    LATTICE_CAP,
    complemented_subobject_lattice,
    complemented_subobject_lattice_bruteforce,
    connected_components,
    equivalence_relations,
    is_complemented,
    is_decidable,
    is_decidable_via_diagonal,
    is_locally_constant,
    is_locally_constant_definitional,
    is_locally_finite,
    kuratowski_check,
    restrictions_bijective,
    restrictions_injective,
    splitting_object,
    subpresheaves,
)
from .galois import (
    AUT_CAP,
    epi_count,
    fibre,
    galois_covering,
    galois_covering_by_definition,
    monodromy,
    monodromy_iso,
    presheaf_from_monodromy,
    reconstruct_fibre,
)
from .grp import lcm_upto, small_groups
from .homs import HOM_CAP, find_isomorphism, hom_set, iter_homs
from .io import decode, dumps, encode, load_json
from .pi1 import (
    bg_roundtrip,
    conjugate_witness,
    fundamental_group,
    induced_group_hom,
    induced_map,
    route_agreement,
    tower_surjection,
)
from .site import (
    FiniteCategory,
    Presheaf,
    coequalizer,
    epi_mono,
    equalizer,
    identity_map,
    identity_functor,
    image,
    initial,
    product,
    pullback,
    quotient_by_relation,
    relation_from_classes,
    slice_site,
    sum_,
    terminal,
)

SUITES = (
    "decidable",
    "quotient",
    "slice",
    "decomposition",
    "locally-constant",
    "comparison",
    "pretopos",
    "fibre-exactness",
    "roundtrip",
    "functoriality",
    "tower",
)


class CheckFailed(Exception):
    pass


def ensure(cond: bool, msg: str) -> None:
    if not cond:
        raise CheckFailed(msg)


@dataclass
class RunConfig:
    cap_lattice: int = LATTICE_CAP
    cap_hom: int = HOM_CAP
    cap_order: int = AUT_CAP
    bound: int = 6
    seed: int = 0
    format: str = "json"
    route: str = "both"
    max_total: int = 6
    random_count: int = 8
    mutations: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("cap_lattice", "cap_hom", "cap_order", "bound", "max_total"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @staticmethod
    def env_caps() -> dict:
        """Cap defaults from TOPOSPI1_CAPS, e.g. ``lattice=12,hom=50000,order=256,bound=6``."""
        raw = os.environ.get("TOPOSPI1_CAPS", "")
        keys = {"lattice": "cap_lattice", "hom": "cap_hom", "order": "cap_order", "bound": "bound"}
        out = {}
        for item in filter(None, (s.strip() for s in raw.split(","))):
            k, _, v = item.partition("=")
            if k.strip() in keys:
                out[keys[k.strip()]] = int(v)
        return out

    def to_json(self) -> dict:
        d = asdict(self)
        d["mutations"] = list(self.mutations)
        return d


@dataclass
class Context:
    config: RunConfig
    cache: dict = field(default_factory=dict)

    def rng(self, *salt) -> random.Random:
        return random.Random(f"{self.config.seed}:" + ":".join(map(str, salt)))

    def mutated(self, name: str) -> bool:
        return name in self.config.mutations

    def fundamental(self, C: FiniteCategory, m: int):
        key = ("pi1", json.dumps(C.to_json(), sort_keys=True), m)
        if key not in self.cache:
            self.cache[key] = fundamental_group(C, m, cap=max(6, m))
        return self.cache[key]


# --------------------------------------------------------------------------
# checks

CHECKS: dict[str, Callable] = {}


def check(name: str):
    def deco(fn):
        CHECKS[name] = fn
        return fn
    return deco


@check("diagonal_characterization")
def _diag(ctx, X):
    ensure(restrictions_injective(X) == (is_decidable_via_diagonal(X) is not None),
           "injectivity of restrictions disagrees with complementedness of the diagonal")


@check("decidable_closure")
def _dec_closure(ctx, X, Y):
    ensure(is_decidable(product(X, Y).obj) is not None, "product of decidable objects is not decidable")
    ensure(is_decidable(sum_(X, Y).obj) is not None, "sum of decidable objects is not decidable")
    ensure(is_decidable(initial(X.category)) is not None and is_decidable(terminal(X.category)) is not None,
           "initial or terminal object not decidable")
    maps = hom_set(X, Y, ctx.config.cap_hom)
    for f in maps:
        I, _, _ = epi_mono(f)
        ensure(is_decidable(I) is not None, "image in a decidable codomain is not decidable")
    for f, g in itertools.product(maps, repeat=2):
        E, _ = equalizer(f, g)
        ensure(is_decidable(E) is not None, "equalizer of decidable objects is not decidable")


@check("decidable_subobjects")
def _dec_sub(ctx, X):
    for S in subpresheaves(X):
        P, inc = S.to_presheaf()
        ensure(is_decidable(P) is not None, "subobject of a decidable object is not decidable")
        # retract lemma
        for r in iter_homs(X, P):
            if inc.then(r) == identity_map(P):
                ensure(is_complemented(S) is not None, "retract of a decidable object is not complemented")
                break


def _quotient(ctx, X, R):
    if ctx.mutated("quotient"):
        # deliberately wrong: ignore the relation
        return X, identity_map(X)
    return quotient_by_relation(X, R)


@check("quotient_criterion")
def _quot(ctx, X, classes):
    pr = product(X, X)
    R = relation_from_classes(X, classes, pr)
    Q, q = _quotient(ctx, X, R)
    ensure((is_decidable(Q) is not None) == (is_complemented(R) is not None),
           "decidability of X/R disagrees with complementedness of R")


@check("slice_transport")
def _slice(ctx, X, U):
    S = slice_site(X.category, U)
    T = S.transport(X)
    ensure((is_decidable(X) is not None) == (is_decidable(T) is not None),
           "decidability not preserved and reflected by the slice over a globally supported object")


@check("slice_preserves")
def _slice_pres(ctx, X, Y, U):
    S = slice_site(X.category, U)
    tX, tY = S.transport(X), S.transport(Y)
    ensure(find_isomorphism(S.transport(product(X, Y).obj), product(tX, tY).obj) is not None,
           "transport does not preserve products")
    ensure(find_isomorphism(S.transport(sum_(X, Y).obj), sum_(tX, tY).obj) is not None,
           "transport does not preserve sums")
    for f in hom_set(X, Y, ctx.config.cap_hom):
        tf = S.transport_map(f)
        ensure(find_isomorphism(S.transport(epi_mono(f)[0]), epi_mono(tf)[0]) is not None,
               "transport does not preserve images")
        E1, _ = equalizer(f, f)
        ensure(find_isomorphism(S.transport(E1), equalizer(tf, tf)[0]) is not None,
               "transport does not preserve equalizers")


def _partition(X: Presheaf, dec) -> set:
    return {frozenset((c, i) for c in range(X.category.n_objects) for i in part.chosen[c]) for part in dec.parts}


@check("components")
def _components(ctx, X, perms):
    dec = connected_components(X)
    C = X.category
    seen = set()
    for part in dec.parts:
        ensure(not part.is_empty(), "empty component")
        ensure(is_complemented(part) is not None, "component is not complemented")
        for c in range(C.n_objects):
            ensure(not (seen & {(c, i) for i in part.chosen[c]}), "components overlap")
            seen |= {(c, i) for i in part.chosen[c]}
    ensure(len(seen) == X.total_size, "components do not cover")
    # minimal nonempty complemented subobjects, by brute force, are the parts
    atoms = []
    comp_subs = [S for S in subpresheaves(X) if not S.is_empty() and is_complemented(S) is not None]
    for S in comp_subs:
        if not any(T <= S and T != S for T in comp_subs):
            atoms.append(frozenset((c, i) for c in range(C.n_objects) for i in S.chosen[c]))
    ensure(set(atoms) == _partition(X, dec), "components differ from the minimal complemented subobjects")
    Y = X.relabel(perms)
    moved = {frozenset((c, perms[c][i]) for c, i in p) for p in _partition(X, dec)}
    ensure(moved == _partition(Y, connected_components(Y)), "decomposition is not invariant under relabelling")


@check("lc_complemented_parts")
def _lc_parts(ctx, X):
    dec = connected_components(X)
    for mask in range(1 << min(len(dec), 6)):
        S = dec.union_of({j for j in range(len(dec)) if mask >> j & 1})
        P, _ = S.to_presheaf()
        ensure(is_locally_constant(P) is not None, "complemented subobject of a locally constant object is not locally constant")


@check("lc_characterization")
def _lc_char(ctx, X):
    fast = is_locally_constant(X) is not None
    ensure(fast == is_locally_constant_definitional(X), "bijectivity disagrees with constancy over representable slices")
    if fast:
        ensure(is_decidable(X) is not None, "locally constant object is not decidable")


@check("monodromy_roundtrip")
def _mono(ctx, X):
    M = monodromy(X)
    Y = presheaf_from_monodromy(M)
    ensure(monodromy_iso(X, M).is_iso(), "tree transport is not an isomorphism")
    ensure(find_isomorphism(Y, X) is not None, "monodromy presheaf is not isomorphic to X")


@check("splitting_object")
def _split(ctx, X):
    sp = splitting_object(X)
    ensure(all(sp.U.size(c) > 0 for c in range(X.category.n_objects)), "splitting object lacks global support")
    ensure(sp.iso.is_iso(), "evaluation map is not an isomorphism")


@check("comparison")
def _comparison(ctx, X):
    lf = is_locally_finite(X) is not None
    dec = restrictions_injective(X)
    if dec:
        k = kuratowski_check(X, ctx.config.cap_lattice)
        if k.skipped:
            raise CapExceeded("lattice cap")
        rhs = k.finite
    else:
        rhs = False
    ensure(lf == rhs, "locally finite differs from decidable and Kuratowski-finite")


@check("lattice_bruteforce")
def _lattice(ctx, X, c):
    fast = complemented_subobject_lattice(X, c, ctx.config.cap_lattice)
    slow = complemented_subobject_lattice_bruteforce(X, c, ctx.config.cap_lattice)
    ensure([S.chosen for S in fast] == [S.chosen for S in slow], "component lattice differs from brute force")


def _finite(X: Presheaf) -> bool:
    return is_locally_finite(X) is not None


@check("pretopos_object")
def _pre_obj(ctx, X):
    for S in subpresheaves(X):
        fin = _finite(S.to_presheaf()[0])
        comp = is_complemented(S) is not None
        ensure(not fin or comp, "finite subobject of a finite object is not complemented")
        ensure(not comp or fin, "complemented subobject of a finite object is not finite")
    for classes in equivalence_relations(X):
        R = relation_from_classes(X, classes)
        if is_complemented(R) is not None:
            Q, _ = _quotient(ctx, X, R)
            ensure(_finite(Q), "quotient by a complemented relation is not finite")


@check("pretopos_pair")
def _pre_pair(ctx, X, Y):
    ensure(_finite(product(X, Y).obj), "product of finite objects is not finite")
    ensure(_finite(sum_(X, Y).obj), "sum of finite objects is not finite")
    maps = hom_set(X, Y, ctx.config.cap_hom)
    for f in maps:
        S = image(f)
        ensure(is_complemented(S) is not None, "image is not complemented")
        ensure(_finite(S.to_presheaf()[0]), "image is not finite")
    for f, g in itertools.product(maps, repeat=2):
        ensure(_finite(equalizer(f, g)[0]), "equalizer of finite objects is not finite")
        ensure(_finite(pullback(f, g)[0]), "pullback of finite objects is not finite")
        ensure(_finite(coequalizer(f, g)[0]), "coequalizer of finite objects is not finite")


class _Fibre:
    """F(-) = E(A, -) for a fixed Galois object A."""

    def __init__(self, A: Presheaf, cap: int):
        self.A, self.cap = A, cap

    def __call__(self, Z: Presheaf):
        return hom_set(self.A, Z, self.cap)

    def on_map(self, f, FX=None):
        FX = FX if FX is not None else self(f.src)
        FY = {m.comps: i for i, m in enumerate(self(f.tgt))}
        return [FY[m.then(f).comps] for m in FX]


@check("fibre_exact")
def _fibre_exact(ctx, X, Y):
    C = X.category
    cov = galois_covering(sum_(X, Y).obj)
    F = _Fibre(cov.covering, ctx.config.cap_hom)
    FX, FY = F(X), F(Y)
    ensure(len(F(terminal(C))) == 1, "F(1) is not a point")
    ensure(len(F(initial(C))) == 0, "F(0) is not empty")
    pr = product(X, Y)
    pairs = sorted(zip(F.on_map(pr.p1), F.on_map(pr.p2)))
    ensure(pairs == sorted(itertools.product(range(len(FX)), range(len(FY)))), "F does not preserve products")
    sm = sum_(X, Y)
    left, right = F.on_map(sm.i1, FX), F.on_map(sm.i2, FY)
    ensure(sorted(left + right) == list(range(len(F(sm.obj)))), "F does not preserve sums")
    for f in hom_set(X, Y, ctx.config.cap_hom):
        Ff = F.on_map(f, FX)
        I, e, mono = epi_mono(f)
        ensure(sorted(set(F.on_map(mono))) == sorted(set(Ff)) and len(F(I)) == len(set(Ff)),
               "F does not preserve images")
        bij = sorted(Ff) == list(range(len(FY)))
        ensure(not bij or f.is_iso(), "F is not conservative")
        for g in hom_set(X, Y, ctx.config.cap_hom):
            Fg = F.on_map(g, FX)
            E, inc = equalizer(f, g)
            eq = sorted(F.on_map(inc))
            ensure(eq == [i for i in range(len(FX)) if Ff[i] == Fg[i]], "F does not preserve equalizers")
            Q, q = coequalizer(f, g)
            Fq = F.on_map(q, FY)
            # F(Q) is F(Y) modulo the equivalence generated by Ff ~ Fg
            parent = list(range(len(FY)))

            def find(a):
                while parent[a] != a:
                    a = parent[a]
                return a
            for a, b in zip(Ff, Fg):
                parent[find(a)] = find(b)
            classes = {}
            for y in range(len(FY)):
                classes.setdefault(find(y), set()).add(Fq[y])
            ensure(all(len(v) == 1 for v in classes.values())
                   and len({next(iter(v)) for v in classes.values()}) == len(classes)
                   and len(classes) == len(F(Q)), "F does not preserve coequalizers")


@check("fibre_object")
def _fibre_obj(ctx, X):
    fr = fibre(X)
    c0 = X.category.basepoint()
    ensure(fr.size == X.size(c0), "fibre size differs from the basepoint fibre")
    G = fr.aut.group
    for m in range(fr.size):
        ensure(fr.right_action[m][G.identity] == m, "identity does not act trivially")
        for a, b in itertools.product(G, repeat=2):
            # (m . a) . b = m o a o b, and maps[a] o maps[b] = table[a][b]
            ensure(fr.right_action[fr.right_action[m][a]][b] == fr.right_action[m][G.mul(a, b)],
                   "precomposition is not a right action")
    A2, _ = galois_covering_by_definition(X)
    ensure(find_isomorphism(A2, fr.covering.covering) is not None, "the two covering constructions disagree")
    comps = connected_components(X)
    for S, _ in comps.component_presheaves():
        n_epi = epi_count(fr.covering.covering, S)
        ensure(n_epi == S.size(c0), "epis from the covering do not match the component fibre")
    rec = reconstruct_fibre(X, fr)
    ensure(rec.iso is not None, "reconstruction is not isomorphic to X")


@check("bg_roundtrip")
def _roundtrip(ctx, G):
    r = bg_roundtrip(G)
    ensure(r.psi.is_isomorphism(), "generator map onto the limit is not an isomorphism")
    ensure(r.search_iso is not None, "no isomorphism found by search")
    ensure(all(ok for _, ok in r.reconstructions), "a coset object is not reconstructed from its fibre")


@check("induced_identity")
def _ind_id(ctx, C, m):
    im = induced_map(identity_functor(C), m, cap=max(6, m), source=ctx.fundamental(C, m), target=ctx.fundamental(C, m))
    ensure(im.hom.map == tuple(range(im.hom.src.order)), "identity functor does not induce the identity")


@check("induced_composition")
def _ind_comp(ctx, u, v, m):
    fu = induced_map(u, m, source=ctx.fundamental(u.src, m), target=ctx.fundamental(u.tgt, m))
    fv = induced_map(v, m, source=ctx.fundamental(v.src, m), target=ctx.fundamental(v.tgt, m))
    fuv = induced_map(u.then(v), m, source=ctx.fundamental(u.src, m), target=ctx.fundamental(v.tgt, m))
    comp = fu.hom.then(fv.hom)
    ensure(conjugate_witness(fuv.hom.tgt, comp, fuv.hom) is not None,
           "induced map of a composite is not the composite up to an inner automorphism")


@check("induced_group_composition")
def _ind_gcomp(ctx, h1, h2):
    m = max(h1.src.order, h1.tgt.order, h2.tgt.order)
    a, pa, pb = induced_group_hom(h1, m)
    b, _, pc = induced_group_hom(h2, m)
    ab, _, _ = induced_group_hom(h1.then(h2), m)
    ensure(pa.then(a.hom).map == h1.then(pb).map, "induced map differs from the group map")
    ensure(a.hom.then(b.hom).map == ab.hom.map, "induced maps do not compose")


@check("subgroup_inclusion")
def _sub_inc(ctx, inc):
    ind, psi_h, psi_g = induced_group_hom(inc, inc.tgt.order)
    ensure(psi_h.is_isomorphism() and psi_g.is_isomorphism(), "generator maps are not isomorphisms")
    ensure(psi_h.then(ind.hom).map == inc.then(psi_g).map, "induced map is not the inclusion")


@check("tower_monotone")
def _tower(ctx, C, m):
    hi, lo = ctx.fundamental(C, m + 1), ctx.fundamental(C, m)
    h = tower_surjection(hi, lo)
    ensure(h is not None and h.is_homomorphism() and h.is_surjective(),
           "no surjection from the bound m+1 limit onto the bound m limit")


@check("route_agreement")
def _routes(ctx, C, m):
    ra = route_agreement(C, m, cap=max(6, m), fg=ctx.fundamental(C, m))
    ensure(ra.agree, "Galois-system limit differs from the low-index completion")


@check("circle_lcm")
def _circle(ctx, C, m):
    fg = ctx.fundamental(C, m)
    ensure(fg.group.order == lcm_upto(m) and fg.group.is_cyclic(), "truncation is not cyclic of order lcm(1..m)")


# --------------------------------------------------------------------------
# suites

LEMMAS = {
    "decidable": "finite products, sums, subobjects, images and equalizers of decidable objects are decidable; retracts are complemented",
    "quotient": "X/R is decidable iff R is complemented in X x X",
    "slice": "pullback to the slice over a globally supported object preserves and reflects decidability",
    "decomposition": "decompositions into connected components are unique and relabelling-invariant",
    "locally-constant": "locally constant objects: characterization, decidability, monodromy and splitting objects",
    "comparison": "locally finite iff decidable and Kuratowski-finite",
    "pretopos": "finite objects are closed under finite limits, sums, images and complemented quotients; finite subobjects are exactly the complemented ones",
    "fibre-exactness": "the fibre functor is exact and conservative; coverings, epis and reconstruction",
    "roundtrip": "pi-hat of a classifying site recovers the group; objects are recovered from fibres",
    "functoriality": "induced maps respect identities and composition; subgroup inclusions induce inclusions",
    "tower": "bound m limits are quotients of bound m+1 limits and agree with low-index completions",
}


def _catalog(ctx) -> tuple[CatalogSite, ...]:
    return site_catalog()


def _plain_sites(ctx):
    return [e for e in _catalog(ctx) if e.group is None]


def _group_sites(ctx):
    return [e for e in _catalog(ctx) if e.group is not None]


def _corpus(ctx, total: int, random_extra: bool = True) -> Iterator[Presheaf]:
    for e in _catalog(ctx):
        yield from presheaf_corpus(e, total)
        if random_extra and ctx.config.random_count:
            yield from random_instances(e, ctx.rng("random", e.name), ctx.config.random_count,
                                        max_total=total + 4)


def suite_decidable(ctx):
    for X in _corpus(ctx, min(ctx.config.max_total, 5)):
        yield "diagonal_characterization", (X,)
    for e in _catalog(ctx):
        small = [X for X in presheaf_corpus(e, 3) if restrictions_injective(X)]
        for X in small:
            yield "decidable_subobjects", (X,)
        for X, Y in itertools.product(small, repeat=2):
            if X.total_size + Y.total_size <= 5:
                yield "decidable_closure", (X, Y)


def suite_quotient(ctx):
    for e in _catalog(ctx):
        for X in presheaf_corpus(e, min(ctx.config.max_total, 5)):
            for classes in equivalence_relations(X):
                yield "quotient_criterion", (X, classes)


def suite_slice(ctx):
    for e in _catalog(ctx):
        covers = [U for U in presheaf_corpus(e, 2 * e.site.n_objects)
                  if all(U.size(c) for c in range(e.site.n_objects))][:4]
        objs = presheaf_corpus(e, min(ctx.config.max_total, 4))
        for U in covers:
            for X in objs:
                yield "slice_transport", (X, U)
        small = presheaf_corpus(e, 2)
        for U in covers[:2]:
            for X, Y in itertools.product(small, repeat=2):
                yield "slice_preserves", (X, Y, U)


def suite_decomposition(ctx):
    for e in _catalog(ctx):
        for k, X in enumerate(presheaf_corpus(e, min(ctx.config.max_total, 5))):
            _, perms = random_relabelling(X, ctx.rng("relabel", e.name, k))
            yield "components", (X, perms)
            if restrictions_bijective(X):
                yield "lc_complemented_parts", (X,)


def suite_locally_constant(ctx):
    for X in _corpus(ctx, ctx.config.max_total):
        yield "lc_characterization", (X,)
    for e in _catalog(ctx):
        if not e.site.is_connected():
            continue
        for X in locally_constant_corpus(e, 4):
            if X.total_size:
                yield "monodromy_roundtrip", (X,)
                yield "splitting_object", (X,)


def suite_comparison(ctx):
    for X in _corpus(ctx, ctx.config.max_total):
        yield "comparison", (X,)
    for e in _plain_sites(ctx):
        for X in presheaf_corpus(e, 3):
            for c in range(e.site.n_objects):
                yield "lattice_bruteforce", (X, c)


def suite_pretopos(ctx):
    for e in _catalog(ctx):
        fin = [X for X in presheaf_corpus(e, min(ctx.config.max_total, 6)) if _finite(X)]
        for X in fin:
            if X.total_size <= 5:
                yield "pretopos_object", (X,)
        small = [X for X in fin if X.total_size <= 4]
        for X, Y in itertools.product(small, repeat=2):
            if X.total_size + Y.total_size <= 6:
                yield "pretopos_pair", (X, Y)


def _fibre_objects(ctx):
    for e in _catalog(ctx):
        if e.group is not None:
            yield e, [X for X in presheaf_corpus(e, 4)]
        elif e.name == "circle":
            yield e, [X for X in locally_constant_corpus(e, 4)]


def suite_fibre(ctx):
    for e, objs in _fibre_objects(ctx):
        for X in objs:
            yield "fibre_object", (X,)
        small = [X for X in objs if X.size(0) <= 3]
        for X, Y in itertools.product(small, repeat=2):
            yield "fibre_exact", (X, Y)


def suite_roundtrip(ctx):
    for G in small_groups(8):
        yield "bg_roundtrip", (G,)


def suite_functoriality(ctx):
    m = 4
    for e in _catalog(ctx):
        if e.site.is_connected():
            yield "induced_identity", (e.site, e.group.order if e.group else m)
    ends = circle_endofunctors()
    for u, v in itertools.product(ends, repeat=2):
        yield "induced_composition", (u, v, m)
    yield "induced_composition", (square_to_arrow(), arrow_into_circle(), m)
    for G in small_groups(8):
        for inc in subgroup_inclusions(G):
            yield "subgroup_inclusion", (inc,)
    groups = [G for G in small_groups(6)]
    rng = ctx.rng("group-homs")
    triples = []
    for A, B, C in itertools.product(groups, repeat=3):
        triples.append((A, B, C))
    for A, B, C in rng.sample(triples, 12):
        h1s, h2s = group_homs(A, B), group_homs(B, C)
        yield "induced_group_composition", (rng.choice(h1s), rng.choice(h2s))


def suite_tower(ctx):
    for m in range(2, 7):
        yield "circle_lcm", (site_catalog()[2].site, m)
    for e in _catalog(ctx):
        if not e.site.is_connected():
            continue
        top = min(ctx.config.bound, 6)
        for m in range(1, top):
            yield "tower_monotone", (e.site, m)
        for m in range(1, top + 1):
            yield "route_agreement", (e.site, m)


SUITE_CASES: dict[str, Callable] = {
    "decidable": suite_decidable,
    "quotient": suite_quotient,
    "slice": suite_slice,
    "decomposition": suite_decomposition,
    "locally-constant": suite_locally_constant,
    "comparison": suite_comparison,
    "pretopos": suite_pretopos,
    "fibre-exactness": suite_fibre,
    "roundtrip": suite_roundtrip,
    "functoriality": suite_functoriality,
    "tower": suite_tower,
}


# --------------------------------------------------------------------------
# running


@dataclass
class SuiteReport:
    suite: str
    lemma: str
    instances: int = 0
    passed: int = 0
    failed: int = 0
    skipped_cap: int = 0
    counterexample: str | None = None
    message: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "lemma": self.lemma,
            "instances": self.instances,
            "passed": self.passed,
            "failed": self.failed,
            "skipped_cap": self.skipped_cap,
            "status": "pass" if self.ok else "fail",
            "counterexample": self.counterexample,
            "message": self.message,
        }


@dataclass
class VerifyReport:
    config: RunConfig
    suites: list[SuiteReport]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.suites)

    def to_json(self) -> dict:
        return {"seed": self.config.seed, "config": self.config.to_json(),
                "suites": [s.to_json() for s in self.suites], "ok": self.ok}

    def to_text(self) -> str:
        lines = []
        for s in self.suites:
            status = "PASS" if s.ok else "FAIL"
            lines.append(f"{status} {s.suite}: {s.passed}/{s.instances} passed, "
                         f"{s.skipped_cap} skipped(cap)" + (f", counterexample {s.counterexample}" if s.counterexample else ""))
        return "\n".join(lines)


def run_case(ctx: Context, name: str, args: tuple) -> str | None:
    """None if the check holds; the failure message otherwise.  CapExceeded propagates."""
    try:
        CHECKS[name](ctx, *args)
    except CheckFailed as exc:
        return str(exc)
    except CapExceeded:
        raise
    except (ToposError, AssertionError, KeyError, ValueError) as exc:
        return f"{type(exc).__name__}: {exc}"
    return None


def write_counterexample(out_dir: Path, suite: str, name: str, index: int, args: tuple, message: str,
                         config: RunConfig) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{suite}-{name}-{index}.json"
    payload = {
        "suite": suite,
        "check": name,
        "case": index,
        "message": message,
        "mutations": list(config.mutations),
        "args": [encode(a) for a in args],
    }
    path.write_text(dumps(payload), encoding="utf-8")
    return path


def run_suite(suite: str, ctx: Context, out_dir: Path | None = None) -> SuiteReport:
    rep = SuiteReport(suite, LEMMAS[suite])
    for k, (name, args) in enumerate(SUITE_CASES[suite](ctx)):
        rep.instances += 1
        try:
            msg = run_case(ctx, name, args)
        except CapExceeded:
            rep.skipped_cap += 1
            continue
        if msg is None:
            rep.passed += 1
            continue
        rep.failed += 1
        if rep.counterexample is None:
            rep.message = msg
            path = write_counterexample(out_dir or Path("counterexamples"), suite, name, k, args, msg, ctx.config)
            rep.counterexample = path.name if out_dir is None else str(path)
    return rep


def run_verify(suites: Iterable[str], config: RunConfig, out_dir: Path | None = None) -> VerifyReport:
    names = list(SUITES) if "all" in suites else list(suites)
    for s in names:
        if s not in SUITE_CASES:
            raise ValueError(f"unknown suite {s!r}")
    ctx = Context(config)
    return VerifyReport(config, [run_suite(s, ctx, out_dir) for s in names])


def run_replay(path: str | Path, config: RunConfig | None = None) -> str | None:
    """Re-run a stored counterexample; returns the failure message or None."""
    raw = load_json(path)
    cfg = config or RunConfig()
    cfg.mutations = tuple(raw.get("mutations", []))
    args = tuple(decode(a) for a in raw["args"])
    return run_case(Context(cfg), raw["check"], args)
