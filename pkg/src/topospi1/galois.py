"""Galois objects, coverings, monodromy and the fibre functor.

Monodromy conventions.  The basepoint is the lexicographically least object
c0.  A spanning tree is grown breadth-first from c0 over the non-identity
morphisms in input order, and each object c gets a transport bijection
``tau_c: X(c0) -> X(c)``: crossing f: c -> c' forwards applies X(f)^-1,
crossing it backwards applies X(f).  The monodromy of f: s -> t is the
permutation ``tau_t^-1 . X(f)^-1 . tau_s`` of X(c0), read as a *right*
action p |-> p.f, so a composite h = (f then g) acts as f then g.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    CapExceeded,
    NotFinite,
    NotGalois,
    NotLocallyConstant,
    SiteNotConnected,
)
from .finiteness import (
    connected_components,
    has_global_support,
    is_locally_finite,
    restrictions_bijective,
)
from .grp import (
    FiniteGroup,
    make_subgroup,
    normal_core,
    perm_inverse,
    permutation_group,
)
from .homs import HOM_CAP, find_isomorphism, hom_set, iter_homs
from .site import (
    FiniteCategory,
    Presheaf,
    PresheafMap,
    SubPresheaf,
    _levelwise_quotient,
    constant,
    product,
    terminal,
)

AUT_CAP = 5040


# --------------------------------------------------------------------------
# automorphism groups


@dataclass
class AutGroup:
    """Aut(X) as a table group; ``table[i][j]`` is maps[i] o maps[j]."""

    obj: Presheaf
    group: FiniteGroup
    maps: list[PresheafMap]

    def __post_init__(self):
        self._index = {m.comps: i for i, m in enumerate(self.maps)}

    def index_of(self, alpha: PresheafMap) -> int:
        return self._index[alpha.comps]

    def by_value(self, c: int, a: int, b: int) -> int:
        """The unique automorphism sending element a of X(c) to b (free actions only)."""
        hits = [i for i, m in enumerate(self.maps) if m.comps[c][a] == b]
        if len(hits) != 1:
            raise NotGalois(f"{len(hits)} automorphisms send {a} to {b}")
        return hits[0]


def _flat(X: Presheaf, alpha: PresheafMap) -> list[int]:
    out: list[int] = []
    off = 0
    for comp in alpha.comps:
        out.extend(off + v for v in comp)
        off += len(comp)
    return out


def aut_group(X: Presheaf, cap: int = AUT_CAP) -> AutGroup:
    """All natural automorphisms of X under composition."""
    maps = []
    for a in iter_homs(X, X, injective=True):
        maps.append(a)
        if len(maps) > cap:
            raise CapExceeded(f"automorphism group larger than cap {cap}")
    P = np.array([_flat(X, a) for a in maps], dtype=np.int64).reshape(len(maps), -1)
    keys = {P[i].tobytes(): i for i in range(len(maps))}
    table = np.empty((len(maps), len(maps)), dtype=np.int64)
    for j in range(len(maps)):
        comp = P[:, P[j]]  # row i: maps[i] o maps[j]
        for i in range(len(maps)):
            table[i, j] = keys[comp[i].tobytes()]
    ident = next(i for i, a in enumerate(maps) if all(list(c) == list(range(len(c))) for c in a.comps))
    return AutGroup(X, FiniteGroup(table, ident, name="Aut"), maps)


# --------------------------------------------------------------------------
# monodromy


@dataclass
class SpanningTree:
    basepoint: int
    edges: tuple[int, ...]
    # object -> (parent object, morphism, forward?) in discovery order
    steps: tuple[tuple[int, int, int, bool], ...]


def spanning_tree(C: FiniteCategory, basepoint: int | None = None) -> SpanningTree:
    c0 = C.basepoint() if basepoint is None else basepoint
    seen = {c0}
    queue = deque([c0])
    steps = []
    while queue:
        c = queue.popleft()
        for f in C.non_identity():
            s, t = C.src(f), C.tgt(f)
            if s == c and t not in seen:
                seen.add(t)
                steps.append((t, c, f, True))
                queue.append(t)
            elif t == c and s not in seen:
                seen.add(s)
                steps.append((s, c, f, False))
                queue.append(s)
    if len(seen) != C.n_objects:
        raise SiteNotConnected("site is not connected")
    return SpanningTree(c0, tuple(f for _, _, f, _ in steps), tuple(steps))


@dataclass
class MonodromyAction:
    site: FiniteCategory
    tree: SpanningTree
    fibre: tuple[str, ...]
    action: dict[int, tuple[int, ...]]
    transport: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def basepoint(self) -> int:
        return self.tree.basepoint

    def perm(self, f: int) -> tuple[int, ...]:
        if self.site.is_identity(f):
            return tuple(range(len(self.fibre)))
        return self.action[f]

    def check(self) -> None:
        C = self.site
        ident = tuple(range(len(self.fibre)))
        for t in self.tree.edges:
            if self.action[t] != ident:
                raise AssertionError(f"tree edge {C.morphisms[t].name} acts nontrivially")
        for (f, g), h in C.composable_pairs():
            pf, pg, ph = self.perm(f), self.perm(g), self.perm(h)
            if tuple(pg[pf[p]] for p in ident) != ph:
                raise AssertionError(
                    f"relation {C.morphisms[f].name} {C.morphisms[g].name} = {C.morphisms[h].name} fails")

    def to_json(self) -> dict:
        C = self.site
        return {
            "basepoint": C.objects[self.basepoint],
            "spanning_tree": [C.morphisms[f].name for f in self.tree.edges],
            "fibre": list(self.fibre),
            "action": {C.morphisms[f].name: list(p) for f, p in sorted(self.action.items())},
        }


def transports(X: Presheaf, tree: SpanningTree) -> list[tuple[int, ...]]:
    C = X.category
    n = X.size(tree.basepoint)
    tau: list = [None] * C.n_objects
    tau[tree.basepoint] = tuple(range(n))
    for child, parent, f, forward in tree.steps:
        r = X.restr[f]
        if forward:
            inv = perm_inverse(r)
            tau[child] = tuple(inv[x] for x in tau[parent])
        else:
            tau[child] = tuple(r[x] for x in tau[parent])
    return tau


def monodromy(X: Presheaf, basepoint: int | None = None) -> MonodromyAction:
    """Monodromy of a locally constant X on a connected site."""
    C = X.category
    tree = spanning_tree(C, basepoint)
    if not restrictions_bijective(X):
        raise NotLocallyConstant("some restriction map is not a bijection")
    tau = transports(X, tree)
    action = {}
    for f in C.non_identity():
        s, t = C.src(f), C.tgt(f)
        rinv = perm_inverse(X.restr[f])
        tinv = perm_inverse(tau[t])
        action[f] = tuple(tinv[rinv[tau[s][p]]] for p in range(X.size(tree.basepoint)))
    M = MonodromyAction(C, tree, X.sets[tree.basepoint], action, tau)
    M.check()
    return M


def presheaf_from_perms(C: FiniteCategory, perms: dict[int, Sequence[int]], names: Sequence[str]) -> Presheaf:
    """Every level is ``names``; restriction along f inverts the right action of f."""
    restr: list = [None] * len(C.morphisms)
    for f in C.non_identity():
        restr[f] = perm_inverse(perms[f])
    return Presheaf(C, [list(names)] * C.n_objects, restr)


def presheaf_from_monodromy(M: MonodromyAction) -> Presheaf:
    return presheaf_from_perms(M.site, M.action, M.fibre)


def monodromy_iso(X: Presheaf, M: MonodromyAction) -> PresheafMap:
    """The tree-transport isomorphism presheaf_from_monodromy(M) -> X."""
    Y = presheaf_from_monodromy(M)
    return PresheafMap(Y, X, [list(t) for t in M.transport])


# --------------------------------------------------------------------------
# Galois objects


@dataclass
class GaloisCertificate:
    obj: Presheaf
    aut: AutGroup | None
    verdict: bool
    failure_witness: tuple[int, int] | None = None
    reason: str = ""

    def to_json(self) -> dict:
        C = self.obj.category
        out = {"verdict": self.verdict, "reason": self.reason}
        if self.aut is not None:
            out["aut_order"] = self.aut.group.order
            out["aut_table"] = self.aut.group.rows
        if self.failure_witness is not None:
            c, a = self.failure_witness
            out["failure_witness"] = {"object": C.objects[c], "element": self.obj.sets[c][a]}
        return out


def is_galois(X: Presheaf, cap: int = AUT_CAP) -> GaloisCertificate:
    """Connected, globally supported, and Aut(X) acts simply transitively on each X(c)."""
    C = X.category
    if not has_global_support(X):
        c = next(c for c in range(C.n_objects) if X.size(c) == 0)
        return GaloisCertificate(X, None, False, None, f"empty at {C.objects[c]}")
    if len(connected_components(X)) != 1:
        return GaloisCertificate(X, None, False, None, "not connected")
    aut = aut_group(X, cap)
    k = aut.group.order
    for c in range(C.n_objects):
        for a in range(X.size(c)):
            images = {m.comps[c][a] for m in aut.maps}
            if len(images) != k or k != X.size(c):
                return GaloisCertificate(X, aut, False, (c, a), "evaluation at this element is not bijective")
    return GaloisCertificate(X, aut, True, None, "ok")


def _component_containing(X: Presheaf, c: int, i: int) -> tuple[Presheaf, PresheafMap]:
    comps = connected_components(X)
    return comps.parts[comps.assignment[c][i]].to_presheaf()


def orbit_component(X: Presheaf, c: int, i: int) -> tuple[Presheaf, PresheafMap, int]:
    """Component of a locally constant X through element i of X(c), found by search."""
    C = X.category
    seen = [set() for _ in range(C.n_objects)]
    seen[c].add(i)
    queue = deque([(c, i)])
    inv = {f: None for f in C.non_identity()}
    while queue:
        d, x = queue.popleft()
        for f in C.into(d):
            s = C.src(f)
            y = X.restr[f][x]
            if y not in seen[s]:
                seen[s].add(y)
                queue.append((s, y))
        for f in C.outof(d):
            if inv[f] is None:
                inv[f] = perm_inverse(X.restr[f])
            t = C.tgt(f)
            y = inv[f][x]
            if y not in seen[t]:
                seen[t].add(y)
                queue.append((t, y))
    S, inc = SubPresheaf(X, seen, check=False).to_presheaf()
    return S, inc, inc.comps[c].index(i)


def galois_closure(X: Presheaf, basepoint: int | None = None) -> tuple[Presheaf, int]:
    """Galois covering of a connected locally finite X via its splitting object.

    Returns the component of the object of injective n-tuples containing the
    enumeration of X(c0), together with the index of that tuple.
    """
    C = X.category
    c0 = C.basepoint() if basepoint is None else basepoint
    if not restrictions_bijective(X):
        raise NotFinite("Galois closure needs a locally finite object")
    n = X.size(c0)
    start = tuple(range(n))
    tuples: list[list[tuple]] = [[] for _ in range(C.n_objects)]
    index: list[dict] = [{} for _ in range(C.n_objects)]
    inv = {f: perm_inverse(X.restr[f]) for f in C.non_identity()}

    def visit(d, t):
        if t not in index[d]:
            index[d][t] = len(tuples[d])
            tuples[d].append(t)
            queue.append((d, t))

    queue: deque = deque()
    visit(c0, start)
    while queue:
        d, t = queue.popleft()
        for f in C.into(d):
            r = X.restr[f]
            visit(C.src(f), tuple(r[x] for x in t))
        for f in C.outof(d):
            visit(C.tgt(f), tuple(inv[f][x] for x in t))
    for d in range(C.n_objects):
        order = sorted(range(len(tuples[d])), key=lambda k: tuples[d][k])
        tuples[d] = [tuples[d][k] for k in order]
        index[d] = {t: k for k, t in enumerate(tuples[d])}
    sets = [["[" + ",".join(X.sets[d][x] for x in t) + "]" for t in ts] for d, ts in enumerate(tuples)]
    restr = []
    for f, m in enumerate(C.morphisms):
        r = X.restr[f]
        restr.append([index[m.src][tuple(r[x] for x in t)] for t in tuples[m.tgt]])
    A = Presheaf(C, sets, restr, check=False)
    return A, index[c0][start]


@dataclass
class GaloisCovering:
    """A Galois covering A of X with a point and epis onto each component."""

    covering: Presheaf
    point: int
    group: FiniteGroup  # monodromy image Q, elements as permutations of X(c0)
    elements: list[tuple[int, ...]]
    rho: dict[int, int]
    epis: list[PresheafMap]
    component_points: list[int]

    def to_json(self) -> dict:
        return {
            "covering": self.covering.to_json(inline_site=False),
            "point": self.covering.sets[self.covering.category.basepoint()][self.point],
            "order": self.group.order,
            "epis": [m.comps for m in self.epis],
        }


def galois_covering(X: Presheaf, cap: int = AUT_CAP) -> GaloisCovering:
    """Galois covering via the monodromy image on the basepoint fibre.

    The covering is the regular right Q-set, q.f = q * rho(f), where Q is
    generated by the monodromy permutations of X.  It is checked to be
    Galois, to map onto every component, and that the intersection of the
    component stabilizers has trivial core.
    """
    C = X.category
    if not C.is_connected():
        raise SiteNotConnected("Galois coverings need a connected site")
    if is_locally_finite(X) is None:
        raise NotFinite("object is not locally finite")
    c0 = C.basepoint()
    M = monodromy(X, c0)
    n = X.size(c0)
    gens = [M.action[f] for f in C.non_identity()]
    Q, elements = permutation_group(gens or [tuple(range(n))], n, cap=cap)
    idx = {p: i for i, p in enumerate(elements)}
    rho = {f: idx[M.action[f]] for f in C.non_identity()}
    names = [f"q{i}" for i in range(Q.order)]
    A = presheaf_from_perms(C, {f: tuple(Q.mul(q, rho[f]) for q in Q) for f in C.non_identity()}, names)
    cert = is_galois(A, cap)
    if not cert.verdict:
        raise AssertionError("regular monodromy object is not Galois")
    comps = connected_components(X)
    points, epis, stabs = [], [], []
    for k in range(len(comps)):
        x = min(i for i in range(n) if comps.assignment[c0][i] == k)
        points.append(x)
        comp = [[M.transport[c][elements[q][x]] for q in Q] for c in range(C.n_objects)]
        e = PresheafMap(A, X, comp)
        epis.append(e)
        stabs.append({q for q in Q if elements[q][x] == x})
    inter = set(Q)
    for s in stabs:
        inter &= s
    core = normal_core(Q, make_subgroup(Q, inter))
    if core.order != 1:
        raise AssertionError("stabilizers have a nontrivial common core")
    return GaloisCovering(A, Q.identity, Q, elements, rho, epis, points)


def galois_covering_by_definition(X: Presheaf) -> tuple[Presheaf, int]:
    """Component of the product of the component closures through the basepoint tuple."""
    C = X.category
    c0 = C.basepoint()
    comps = connected_components(X)
    if len(comps) == 0:
        return terminal(C), 0
    P, pt = None, None
    for S, _ in comps.component_presheaves():
        A, a = galois_closure(S, c0)
        if P is None:
            P, pt = A, a
        else:
            pr = product(P, A)
            P, pt = pr.obj, pr.pair_index(c0, pt, a)
        P, _, pt = orbit_component(P, c0, pt)
    return P, pt


def pointed_hom(A: Presheaf, a: int, X: Presheaf, x: int, c: int | None = None) -> PresheafMap | None:
    """The map A -> X sending a to x at the basepoint (unique when A is connected)."""
    c0 = A.category.basepoint() if c is None else c
    return next(iter_homs(A, X, fixed={(c0, a): x}), None)


# --------------------------------------------------------------------------
# fibre functor


@dataclass
class FibreResult:
    covering: GaloisCovering
    aut: AutGroup
    fibre_set: list[PresheafMap]
    right_action: list[list[int]]  # right_action[m][alpha] = index of m o alpha
    by_component: list[list[int]]

    @property
    def size(self) -> int:
        return len(self.fibre_set)

    def is_transitive(self) -> bool:
        if not self.fibre_set:
            return True
        orbit = {self.right_action[0][a] for a in range(self.aut.group.order)}
        return len(orbit) == len(self.fibre_set)

    def to_json(self) -> dict:
        return {
            "covering": self.covering.covering.to_json(inline_site=False),
            "aut_table": self.aut.group.rows,
            "fibre_size": self.size,
            "fibre": [m.comps for m in self.fibre_set],
            "right_action": self.right_action,
            "components": self.by_component,
        }


def fibre(X: Presheaf, cover: GaloisCovering | None = None, cap: int = HOM_CAP) -> FibreResult:
    """F(X) = E(A, X) with Aut(A) acting by precomposition."""
    cov = cover or galois_covering(X)
    A = cov.covering
    aut = aut_group(A)
    fs = hom_set(A, X, cap)
    index = {m.comps: i for i, m in enumerate(fs)}
    action = [[index[alpha.then(m).comps] for alpha in aut.maps] for m in fs]
    comps = connected_components(X)
    c0 = X.category.basepoint()
    by_comp = [[] for _ in range(len(comps))]
    for i, m in enumerate(fs):
        by_comp[comps.assignment[c0][m.comps[c0][cov.point]]].append(i)
    # each component of X receives exactly the maps from A to that component
    for k, part in enumerate(comps.parts):
        S, _ = part.to_presheaf()
        if len(hom_set(A, S, cap)) != len(by_comp[k]):
            raise AssertionError("fibre does not split over the components")
    return FibreResult(cov, aut, fs, action, by_comp)


@dataclass
class Reconstruction:
    obj: Presheaf
    iso: PresheafMap | None


def reconstruct(A: Presheaf, aut: AutGroup, m_names: Sequence[str], right_action: Sequence[Sequence[int]]) -> Presheaf:
    """A x_{Aut A} M: orbits of (a, m) ~ (alpha(a), m . alpha^-1) on A x constant(M)."""
    cert_ok = has_global_support(A) and len(connected_components(A)) == 1
    if not cert_ok or any(aut.group.order != A.size(c) for c in range(A.category.n_objects)):
        raise NotGalois("reconstruction needs a Galois object")
    C = A.category
    pr = product(A, constant(C, m_names))
    G = aut.group
    pairs = []
    for c in range(C.n_objects):
        pc = []
        for alpha in G:
            amap = aut.maps[alpha].comps[c]
            ainv = G.inv(alpha)
            for a in range(A.size(c)):
                for m in range(len(m_names)):
                    pc.append((pr.pair_index(c, a, m), pr.pair_index(c, amap[a], right_action[m][ainv])))
        pairs.append(pc)
    Q, _ = _levelwise_quotient(pr.obj, pairs)
    return Q


def reconstruct_fibre(X: Presheaf, fr: FibreResult | None = None) -> Reconstruction:
    """Rebuild X from its fibre and return an isomorphism found by search."""
    fr = fr or fibre(X)
    names = [f"m{i}" for i in range(fr.size)]
    R = reconstruct(fr.covering.covering, fr.aut, names, fr.right_action)
    return Reconstruction(R, find_isomorphism(R, X))


def epi_count(A: Presheaf, X: Presheaf) -> int:
    return sum(1 for m in iter_homs(A, X) if m.is_epi())
