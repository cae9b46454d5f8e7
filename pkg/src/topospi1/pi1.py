"""Fundamental groups of finite sites, truncated at a fibre bound.

At bound m the system consists of the Galois coverings of the connected
locally constant objects whose fibre has at most m elements, plus the
pointed join of all of them (the component of their product through the
tuple of points).  Every entry A carries a point p_A in A(c0), and each
edge uses the unique epi sending p_A to p_B, so the induced maps
Aut(A) -> Aut(B) compose strictly.  The limit is the quotient of the
presented group by the intersection of the kernels of its transitive
actions of degree <= m, which ``truncated_completion`` computes
independently from coset tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import MathError, SiteNotConnected
from .galois import (
    AutGroup,
    galois_closure,
    is_galois,
    monodromy,
    orbit_component,
    pointed_hom,
    presheaf_from_perms,
    spanning_tree,
    transports,
    SpanningTree,
)
from .grp import (
    DEGREE_CAP,
    FinitePresentation,
    FiniteGroup,
    GroupHom,
    GroupSystem,
    SystemLimit,
    extend_hom,
    is_isomorphic,
    low_index_reps,
    perm_inverse,
    system_limit,
    truncated_completion,
)
from .homs import find_isomorphism
from .site import FiniteCategory, FiniteFunctor, Presheaf, groupoid_site, group_hom_functor, groupoid_morphism, product


@dataclass
class Pi1Presentation:
    site: FiniteCategory
    tree: SpanningTree
    presentation: FinitePresentation
    gen_of: dict[int, int]  # morphism index -> generator index

    @property
    def basepoint(self) -> int:
        return self.tree.basepoint

    def to_json(self) -> dict:
        C = self.site
        return {
            "basepoint": C.objects[self.basepoint],
            "spanning_tree": [C.morphisms[f].name for f in self.tree.edges],
            **self.presentation.to_json(),
        }


def pi1_presentation(C: FiniteCategory, basepoint: int | None = None) -> Pi1Presentation:
    """Generators: non-identity morphisms.  Relators: tree edges and composites."""
    tree = spanning_tree(C, basepoint)
    mors = list(C.non_identity())
    gen_of = {f: k for k, f in enumerate(mors)}
    rels: list[tuple] = []
    for t in tree.edges:
        rels.append(((gen_of[t], 1),))
    for (f, g), h in sorted(C.composable_pairs()):
        if C.is_identity(f) or C.is_identity(g):
            continue
        w = [(gen_of[f], 1), (gen_of[g], 1)]
        if not C.is_identity(h):
            w.append((gen_of[h], -1))
        rels.append(tuple(w))
    seen, uniq = set(), []
    for r in rels:
        if r not in seen:
            seen.add(r)
            uniq.append(r)
    P = FinitePresentation(tuple(C.morphisms[f].name for f in mors), tuple(uniq))
    return Pi1Presentation(C, tree, P, gen_of)


def action_presheaf(pp: Pi1Presentation, perms: Sequence[Sequence[int]]) -> Presheaf:
    """Locally constant presheaf from a right action of the presented group."""
    C = pp.site
    acts = {f: perms[k] for f, k in pp.gen_of.items()}
    return presheaf_from_perms(C, acts, [str(i) for i in range(len(perms[0]) if perms else 1)])


# --------------------------------------------------------------------------
# the Galois system


@dataclass
class GaloisEntry:
    obj: Presheaf
    point: int
    aut: AutGroup
    source_degree: int | None  # fibre of the connected object it covers; None for the join

    @property
    def group(self) -> FiniteGroup:
        return self.aut.group


@dataclass
class GaloisSystem:
    site: FiniteCategory
    bound: int
    entries: list[GaloisEntry]
    epis: dict[tuple[int, int], object]  # (b, a) -> pointed epi entries[a] -> entries[b]
    homs: dict[tuple[int, int], GroupHom]  # (b, a) -> Aut(entries[a]) -> Aut(entries[b])
    top: int

    def group_system(self) -> GroupSystem:
        nodes = tuple(range(len(self.entries)))
        return GroupSystem(nodes, {k: e.group for k, e in enumerate(self.entries)}, dict(self.homs))

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "entries": [{"order": e.group.order, "fibre": e.obj.size(self.site.basepoint()),
                         "covers_degree": e.source_degree} for e in self.entries],
            "edges": [[b, a] for (b, a) in sorted(self.homs)],
            "top": self.top,
        }


def _pointed_join(C: FiniteCategory, A: Presheaf, a: int, B: Presheaf, b: int) -> tuple[Presheaf, int]:
    c0 = C.basepoint()
    pr = product(A, B)
    S, _, p = orbit_component(pr.obj, c0, pr.pair_index(c0, a, b))
    return S, p


def _induced_aut_hom(A: GaloisEntry, B: GaloisEntry, f, c0: int) -> GroupHom:
    """beta with beta(p_B) = f(alpha(p_A)); checked to satisfy f alpha = beta f."""
    images = []
    for alpha in A.aut.maps:
        target = f.comps[c0][alpha.comps[c0][A.point]]
        beta = B.aut.by_value(c0, B.point, target)
        if alpha.then(f) != f.then(B.aut.maps[beta]):
            raise MathError("induced automorphism does not commute with the epi")
        images.append(beta)
    h = GroupHom(A.group, B.group, tuple(images))
    if not (h.is_homomorphism() and h.is_surjective()):
        raise MathError("induced map on automorphisms is not a surjective homomorphism")
    return h


def _entry(obj: Presheaf, point: int, degree: int | None) -> GaloisEntry:
    cert = is_galois(obj)
    if not cert.verdict:
        raise MathError("constructed covering is not Galois")
    return GaloisEntry(obj, point, cert.aut, degree)


def enumerate_galois(C: FiniteCategory, m: int, cap: int = DEGREE_CAP) -> GaloisSystem:
    """The Galois system at fibre bound m (see module docstring)."""
    if not C.is_connected():
        raise SiteNotConnected("site is not connected")
    pp = pi1_presentation(C)
    c0 = pp.basepoint
    reps = low_index_reps(pp.presentation, m, cap)
    entries: list[GaloisEntry] = []
    for rep in reps:
        X = action_presheaf(pp, rep.perms)
        A, a = galois_closure(X, c0)
        if any(find_isomorphism(A, e.obj) is not None for e in entries):
            continue
        entries.append(_entry(A, a, rep.degree))
    J, j = entries[0].obj, entries[0].point
    for e in entries[1:]:
        J, j = _pointed_join(C, J, j, e.obj, e.point)
    top = None
    for k, e in enumerate(entries):
        if find_isomorphism(J, e.obj) is not None:
            top = k
            break
    if top is None:
        entries.append(_entry(J, j, None))
        top = len(entries) - 1
    epis, homs = {}, {}
    for ia, A in enumerate(entries):
        for ib, B in enumerate(entries):
            if ia == ib or A.obj.size(c0) < B.obj.size(c0):
                continue
            f = pointed_hom(A.obj, A.point, B.obj, B.point, c0)
            if f is None:
                continue
            epis[(ib, ia)] = f
            homs[(ib, ia)] = _induced_aut_hom(A, B, f, c0)
    S = GaloisSystem(C, m, entries, epis, homs, top)
    S.group_system().validate(require_codirected=True)
    return S


# --------------------------------------------------------------------------
# fundamental group


@dataclass
class FundamentalGroup:
    site: FiniteCategory
    bound: int
    system: GaloisSystem
    limit: SystemLimit
    generator_images: dict[int, int]  # morphism index -> element of the limit

    @property
    def group(self) -> FiniteGroup:
        return self.limit.group

    def image_of_word(self, word: Sequence[int]) -> int:
        G = self.group
        x = G.identity
        for f in word:
            x = G.mul(x, self.generator_images[f] if not self.site.is_identity(f) else G.identity)
        return x

    def to_json(self) -> dict:
        C = self.site
        return {
            "bound": self.bound,
            "order": self.group.order,
            "limit": self.group.to_json(),
            "generator_images": {C.morphisms[f].name: x for f, x in sorted(self.generator_images.items())},
            "system": self.system.to_json(),
        }


def fundamental_group(C: FiniteCategory, m: int, cap: int = DEGREE_CAP) -> FundamentalGroup:
    """Limit of Aut over the Galois system at bound m, with generator images."""
    S = enumerate_galois(C, m, cap)
    L = system_limit(S.group_system())
    c0 = C.basepoint()
    mono = [monodromy(e.obj, c0) for e in S.entries]
    gen_images = {}
    for f in C.non_identity():
        fam = []
        for e, M in zip(S.entries, mono):
            fam.append(e.aut.by_value(c0, e.point, M.action[f][e.point]))
        gen_images[f] = L.element_of(fam)
    return FundamentalGroup(C, m, S, L, gen_images)


def _generated_hom(src: FiniteGroup, gens: Sequence[int], tgt: FiniteGroup, images: Sequence[int]) -> GroupHom | None:
    return extend_hom(src, tgt, list(gens), list(images))


@dataclass
class RouteAgreement:
    bound: int
    galois_order: int
    cores_order: int
    iso: GroupHom | None
    search_iso: GroupHom | None

    @property
    def agree(self) -> bool:
        return self.iso is not None and self.iso.is_isomorphism()

    def to_json(self) -> dict:
        return {"bound": self.bound, "galois_order": self.galois_order, "cores_order": self.cores_order,
                "agreement": self.agree,
                "witness": list(self.iso.map) if self.iso is not None else None}


def route_agreement(C: FiniteCategory, m: int, cap: int = DEGREE_CAP,
                    fg: FundamentalGroup | None = None) -> RouteAgreement:
    """Compare the Galois-system limit with the low-index completion at bound m."""
    fg = fg or fundamental_group(C, m, cap)
    pp = pi1_presentation(C)
    comp = truncated_completion(pp.presentation, m, cap)
    mors = list(C.non_identity())
    src = [comp.generator_images[pp.gen_of[f]] for f in mors]
    dst = [fg.generator_images[f] for f in mors]
    if not mors:
        iso = GroupHom(comp.group, fg.group, (fg.group.identity,)) if comp.group.order == fg.group.order == 1 else None
    else:
        iso = _generated_hom(comp.group, src, fg.group, dst)
    search = is_isomorphic(comp.group, fg.group) if max(comp.group.order, fg.group.order) <= 256 else None
    return RouteAgreement(m, fg.group.order, comp.group.order, iso, search)


def tower_surjection(hi: FundamentalGroup, lo: FundamentalGroup) -> GroupHom | None:
    """The map from the bound-(m+1) limit onto the bound-m limit on generators."""
    mors = list(hi.site.non_identity())
    if not mors:
        return GroupHom(hi.group, lo.group, tuple([lo.group.identity] * hi.group.order))
    h = extend_hom(hi.group, lo.group, [hi.generator_images[f] for f in mors],
                   [lo.generator_images[f] for f in mors])
    if h is None or not h.is_surjective():
        return None
    return h


# --------------------------------------------------------------------------
# classifying sites


@dataclass
class BGRoundtrip:
    group: FiniteGroup
    fundamental: FundamentalGroup
    psi: GroupHom  # G -> limit, g |-> generator image
    search_iso: GroupHom | None
    reconstructions: list[tuple[tuple[int, ...], bool]]

    @property
    def ok(self) -> bool:
        return self.psi.is_isomorphism() and self.search_iso is not None and all(r for _, r in self.reconstructions)

    def to_json(self) -> dict:
        return {
            "order": self.group.order,
            "limit_order": self.fundamental.group.order,
            "isomorphism": list(self.psi.map),
            "isomorphism_found_by_search": self.search_iso is not None,
            "reconstructions": [{"subgroup": list(k), "ok": ok} for k, ok in self.reconstructions],
            "ok": self.ok,
        }


def generator_map(G: FiniteGroup, fg: FundamentalGroup) -> GroupHom:
    """g |-> the limit element of the morphism g of the groupoid site."""
    C = fg.site
    images = [fg.group.identity if g == G.identity else fg.generator_images[groupoid_morphism(C, G, g)] for g in G]
    return GroupHom(G, fg.group, tuple(images))


def bg_fundamental_group(G: FiniteGroup, m: int | None = None, C: FiniteCategory | None = None) -> tuple[FundamentalGroup, GroupHom]:
    C = C or groupoid_site(G)
    m = G.order if m is None else m
    fg = fundamental_group(C, m, cap=max(DEGREE_CAP, m))
    return fg, generator_map(G, fg)


def bg_roundtrip(G: FiniteGroup, reconstruct_all: bool = True) -> BGRoundtrip:
    """pi-hat of the classifying site of G, and reconstruction of coset objects."""
    from .galois import fibre, reconstruct_fibre
    from .grp import subgroups
    from .site import coset_presheaf

    C = groupoid_site(G)
    fg, psi = bg_fundamental_group(G, C=C)
    if not psi.is_homomorphism():
        raise MathError("generator map is not a homomorphism")
    search = is_isomorphic(G, fg.group)
    recs = []
    if reconstruct_all:
        for K in subgroups(G):
            X = coset_presheaf(C, G, K)
            r = reconstruct_fibre(X, fibre(X))
            recs.append((K.elements, r.iso is not None))
    return BGRoundtrip(G, fg, psi, search, recs)


# --------------------------------------------------------------------------
# functoriality


@dataclass
class InducedMap:
    functor: FiniteFunctor
    bound: int
    source: FundamentalGroup
    target: FundamentalGroup
    hom: GroupHom

    def to_json(self) -> dict:
        return {"bound": self.bound, "source_order": self.source.group.order,
                "target_order": self.target.group.order, "map": list(self.hom.map)}


def induced_map(u: FiniteFunctor, m: int, cap: int = DEGREE_CAP,
                source: FundamentalGroup | None = None, target: FundamentalGroup | None = None) -> InducedMap:
    """pi-hat(C) -> pi-hat(D) at bound m for a functor u: C -> D.

    For each Galois entry B over D, u*B is locally constant over C; the
    monodromy of a generator f of C on u*B, carried back to the basepoint of
    D by D's tree transport, is realized by a unique automorphism of B.  The
    resulting compatible family is the image of f.
    """
    C, D = u.src, u.tgt
    if not C.is_connected() or not D.is_connected():
        raise SiteNotConnected("induced maps need connected sites")
    src = source or fundamental_group(C, m, cap)
    tgt = target or fundamental_group(D, m, cap)
    c0, d0 = C.basepoint(), D.basepoint()
    dtree = spanning_tree(D, d0)
    fams = {f: [] for f in C.non_identity()}
    for e in tgt.system.entries:
        B = e.obj
        tau = transports(B, dtree)[u.on_obj[c0]]  # B(d0) -> B(u c0)
        tinv = perm_inverse(tau)
        M = monodromy(u.restrict(B), c0)
        for f in C.non_identity():
            sigma = tinv[M.action[f][tau[e.point]]]
            fams[f].append(e.aut.by_value(d0, e.point, sigma))
    mors = list(C.non_identity())
    images = [tgt.limit.element_of(fams[f]) for f in mors]
    if not mors:
        h = GroupHom(src.group, tgt.group, tuple([tgt.group.identity] * src.group.order))
    else:
        h = extend_hom(src.group, tgt.group, [src.generator_images[f] for f in mors], images)
    if h is None:
        raise MathError("generator assignment does not extend to a homomorphism")
    return InducedMap(u, m, src, tgt, h)


def conjugate_witness(G: FiniteGroup, h1: GroupHom, h2: GroupHom) -> int | None:
    """Some z with h2(x) = z h1(x) z^-1 for all x, or None."""
    gens = h1.src.generating_set()
    for z in G:
        if all(h2.map[x] == G.conjugate(z, h1.map[x]) for x in gens):
            return z
    return None


def induced_group_hom(h: GroupHom, m: int | None = None) -> tuple[InducedMap, GroupHom, GroupHom]:
    """Induced map for a group hom H -> G, with the generator isos of both sides."""
    H, G = h.src, h.tgt
    m = max(H.order, G.order) if m is None else m
    CH, CG = groupoid_site(H), groupoid_site(G)
    fh, psi_h = bg_fundamental_group(H, m, CH)
    fg, psi_g = bg_fundamental_group(G, m, CG)
    u = group_hom_functor(h, CH, CG)
    ind = induced_map(u, m, cap=max(DEGREE_CAP, m), source=fh, target=fg)
    return ind, psi_h, psi_g
