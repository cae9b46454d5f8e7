"""Connectedness, decidability, local constancy and Kuratowski-finiteness.

On a presheaf topos the definitional notions reduce to levelwise checks:

* a subobject is complemented iff its levelwise complement is closed under
  restriction;
* X is decidable iff every restriction map is injective;
* X is locally constant iff every restriction map is bijective.

Each characterization has a definitional cross-check here
(``is_decidable_via_diagonal``, ``is_locally_constant_definitional``,
``complemented_subobject_lattice_bruteforce``) used by the tests.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import CapExceeded, NotDecidable, NotLocallyFinite, SiteNotConnected
from .homs import find_isomorphism
from .site import (
    Presheaf,
    PresheafMap,
    Product,
    SubPresheaf,
    constant,
    diagonal,
    empty_subobject,
    product,
    representable,
    slice_site,
)

LATTICE_CAP = 10


@dataclass
class ComponentDecomposition:
    parent: Presheaf
    parts: list[SubPresheaf]
    assignment: list[list[int]]

    def __len__(self) -> int:
        return len(self.parts)

    def union_of(self, idxs) -> SubPresheaf:
        X = self.parent
        chosen = [{i for i in range(X.size(c)) if self.assignment[c][i] in idxs}
                  for c in range(X.category.n_objects)]
        return SubPresheaf(X, chosen, check=False)

    def component_presheaves(self) -> list[tuple[Presheaf, PresheafMap]]:
        return [p.to_presheaf() for p in self.parts]


def connected_components(X: Presheaf) -> ComponentDecomposition:
    """Components of the category of elements, ordered by least element name."""
    C = X.category
    offsets = np.cumsum([0] + [X.size(c) for c in range(C.n_objects)])
    total = int(offsets[-1])
    rows, cols = [], []
    for f in C.non_identity():
        s, t = C.src(f), C.tgt(f)
        for x, y in enumerate(X.restr[f]):
            rows.append(offsets[t] + x)
            cols.append(offsets[s] + y)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(total, total))
    _, labels = _cc(graph, directed=True, connection="weak")
    keys: dict[int, tuple] = {}
    for c in range(C.n_objects):
        for i, name in enumerate(X.sets[c]):
            lab = int(labels[offsets[c] + i])
            key = (name, c, i)
            if lab not in keys or key < keys[lab]:
                keys[lab] = key
    ordered = sorted(keys, key=lambda lab: keys[lab])
    rank = {lab: k for k, lab in enumerate(ordered)}
    assignment = [[rank[int(labels[offsets[c] + i])] for i in range(X.size(c))] for c in range(C.n_objects)]
    parts = []
    for k in range(len(ordered)):
        parts.append(SubPresheaf(X, [{i for i, a in enumerate(assignment[c]) if a == k}
                                     for c in range(C.n_objects)], check=False))
    return ComponentDecomposition(X, parts, assignment)


def is_connected(X: Presheaf) -> bool:
    return len(connected_components(X)) == 1


def has_global_support(X: Presheaf) -> bool:
    return all(X.size(c) > 0 for c in range(X.category.n_objects))


def is_complemented(Y: SubPresheaf) -> SubPresheaf | None:
    """The complement of Y if it is a subobject, else None."""
    comp = Y.levelwise_complement()
    X, C = Y.parent, Y.parent.category
    for f in C.non_identity():
        r = X.restr[f]
        src_comp = comp[C.src(f)]
        if any(r[x] not in src_comp for x in comp[C.tgt(f)]):
            return None
    return SubPresheaf(X, comp, check=False)


def restrictions_injective(X: Presheaf) -> bool:
    return all(len(set(X.restr[f])) == len(X.restr[f]) for f in X.category.non_identity())


def restrictions_bijective(X: Presheaf) -> bool:
    C = X.category
    return all(X.size(C.src(f)) == X.size(C.tgt(f)) for f in C.non_identity()) and restrictions_injective(X)


def is_decidable_via_diagonal(X: Presheaf) -> SubPresheaf | None:
    """Complement of the diagonal in X x X, if the diagonal is complemented."""
    return is_complemented(diagonal(X))


def is_decidable(X: Presheaf) -> SubPresheaf | None:
    """Witness of decidability (complement of the diagonal) or None."""
    if not restrictions_injective(X):
        return None
    comp = is_decidable_via_diagonal(X)
    assert comp is not None, "injective restrictions must give a complemented diagonal"
    return comp


# --------------------------------------------------------------------------
# local constancy


@dataclass
class Trivialization:
    """X x y(c) ~= constant(X(c)) x y(c) over y(c), for one representable y(c)."""

    obj: int
    cover: Presheaf
    iso: PresheafMap


@dataclass
class LocallyConstantWitness:
    trivializations: list[Trivialization]


def trivialization(X: Presheaf, c: int) -> Trivialization:
    """The evaluation iso (x, g) |-> (X(g)^-1 x, g) over the representable at c.

    Requires every restriction along a morphism into ``c`` to be bijective.
    """
    C = X.category
    y = representable(C, c)
    left = product(X, y)
    right = product(constant(C, X.sets[c]), y)
    homs = [C.hom(d, c) for d in range(C.n_objects)]
    comps = []
    for d in range(C.n_objects):
        comp = []
        for x in range(X.size(d)):
            for k, g in enumerate(homs[d]):
                inv = X.restr[g].index(x)
                comp.append(right.pair_index(d, inv, k))
        comps.append(comp)
    iso = PresheafMap(left.obj, right.obj, comps)
    return Trivialization(c, y, iso)


def is_locally_constant(X: Presheaf) -> LocallyConstantWitness | None:
    """Witness cover by representables with trivializing isos, or None."""
    if not restrictions_bijective(X):
        return None
    triv = [trivialization(X, c) for c in range(X.category.n_objects)]
    for t in triv:
        assert t.iso.is_iso()
    return LocallyConstantWitness(triv)


def is_locally_constant_definitional(X: Presheaf) -> bool:
    """Check constancy of X over every representable slice by iso search.

    The slice over y(c) is presheaves on C/c, which has a terminal object,
    so constancy there means isomorphic to the constant presheaf on X(c).
    """
    C = X.category
    for c in range(C.n_objects):
        S = slice_site(C, representable(C, c))
        T = S.transport(X)
        K = constant(S.category, X.sets[c])
        if find_isomorphism(T, K) is None:
            return False
    return True


@dataclass
class LocallyFinite:
    fibres: list[int]
    witness: LocallyConstantWitness

    @property
    def n(self) -> int:
        if len(self.fibres) != 1:
            raise SiteNotConnected("fibre size is per site component on a disconnected site")
        return self.fibres[0]


def is_locally_finite(X: Presheaf) -> LocallyFinite | None:
    """Fibre size per site component if X is locally finite."""
    w = is_locally_constant(X)
    if w is None:
        return None
    fibres = [X.size(comp[0]) for comp in X.category.object_components()]
    return LocallyFinite(fibres, w)


# --------------------------------------------------------------------------
# Kuratowski-finiteness


def _component_lattice(P: Presheaf, cap: int) -> list[SubPresheaf]:
    comps = connected_components(P)
    k = len(comps)
    if k > cap:
        raise CapExceeded(f"{k} components exceed lattice cap {cap}")
    out = []
    for mask in range(1 << k):
        out.append(comps.union_of({j for j in range(k) if mask >> j & 1}))
    return sorted(out, key=_sub_key)


def _sub_key(S: SubPresheaf):
    return (S.size(), tuple(tuple(sorted(s)) for s in S.chosen))


def complemented_subobject_lattice(X: Presheaf, c: int, cap: int = LATTICE_CAP) -> list[SubPresheaf]:
    """Complemented subobjects of X x y(c).

    These are exactly the unions of connected components, so the search is
    over subsets of components; ``cap`` bounds the number of components.
    """
    P = product(X, representable(X.category, c)).obj
    return _component_lattice(P, cap)


def complemented_subobject_lattice_bruteforce(X: Presheaf, c: int, cap: int = LATTICE_CAP) -> list[SubPresheaf]:
    """Same lattice by testing every levelwise subset (at most ``cap`` elements)."""
    P = product(X, representable(X.category, c)).obj
    elems = list(P.elements())
    if len(elems) > cap:
        raise CapExceeded(f"{len(elems)} elements exceed lattice cap {cap}")
    out = []
    for mask in range(1 << len(elems)):
        chosen = [set() for _ in range(P.category.n_objects)]
        for j, (d, i) in enumerate(elems):
            if mask >> j & 1:
                chosen[d].add(i)
        S = SubPresheaf(P, chosen, check=False)
        if _closed(S) and is_complemented(S) is not None:
            out.append(S)
    return sorted(out, key=_sub_key)


def _closed(S: SubPresheaf) -> bool:
    X, C = S.parent, S.parent.category
    return all(X.restr[f][x] in S.chosen[C.src(f)] for f in C.non_identity() for x in S.chosen[C.tgt(f)])


def tracked_singleton(X: Presheaf, c: int, a: int, pr: Product) -> SubPresheaf:
    """The graph {(X(f)(a), f) : f: d -> c} inside X x y(c)."""
    C = X.category
    chosen = [set() for _ in range(C.n_objects)]
    for d in range(C.n_objects):
        for k, f in enumerate(C.hom(d, c)):
            chosen[d].add(pr.pair_index(d, X.restr[f][a], k))
    return SubPresheaf(pr.obj, chosen, check=False)


def join_closure(P: Presheaf, gens: list[SubPresheaf]) -> set[tuple[frozenset, ...]]:
    bottom = empty_subobject(P).chosen
    found = {bottom}
    frontier = [bottom]
    gen_sets = [g.chosen for g in gens]
    while frontier:
        nxt = []
        for s in frontier:
            for g in gen_sets:
                u = tuple(a | b for a, b in zip(s, g))
                if u not in found:
                    found.add(u)
                    nxt.append(u)
        frontier = nxt
    return found


@dataclass
class KuratowskiResult:
    finite: bool | None
    skipped: bool = False
    failing_object: int | None = None

    def to_json(self):
        if self.skipped:
            return "skipped(cap)"
        return self.finite


def kuratowski_check(X: Presheaf, cap: int = LATTICE_CAP) -> KuratowskiResult:
    """Whether the joins of tracked singletons exhaust the complemented lattice at every object."""
    if not restrictions_injective(X):
        raise NotDecidable("Kuratowski check is only defined here for decidable objects")
    C = X.category
    for c in range(C.n_objects):
        pr = product(X, representable(C, c))
        try:
            lattice = _component_lattice(pr.obj, cap)
        except CapExceeded:
            return KuratowskiResult(None, skipped=True, failing_object=c)
        singles = [tracked_singleton(X, c, a, pr) for a in range(X.size(c))]
        joins = join_closure(pr.obj, singles)
        if joins != {S.chosen for S in lattice}:
            return KuratowskiResult(False, failing_object=c)
    return KuratowskiResult(True)


# --------------------------------------------------------------------------
# splitting object


@dataclass
class SplittingObject:
    n: int
    U: Presheaf
    iso: PresheafMap  # X x U -> constant({0..n-1}) x U
    over_U: tuple[PresheafMap, PresheafMap]


def injective_tuples(X: Presheaf, n: int) -> Presheaf:
    """Levelwise injective n-tuples with componentwise restriction."""
    C = X.category
    tuples = [list(itertools.permutations(range(X.size(c)), n)) for c in range(C.n_objects)]
    pos = [{t: k for k, t in enumerate(ts)} for ts in tuples]
    sets = [["[" + ",".join(X.sets[c][i] for i in t) + "]" for t in ts] for c, ts in enumerate(tuples)]
    restr = []
    for f, m in enumerate(C.morphisms):
        r = X.restr[f]
        restr.append([pos[m.src][tuple(r[i] for i in t)] for t in tuples[m.tgt]])
    U = Presheaf(C, sets, restr, check=False)
    U._tuples = tuples
    return U


def splitting_object(X: Presheaf) -> SplittingObject:
    """U of injective n-tuples with the evaluation iso X x U ~= [n] x U over U."""
    lf = is_locally_finite(X)
    if lf is None:
        raise NotLocallyFinite("splitting object needs a locally finite object")
    n = lf.n
    C = X.category
    U = injective_tuples(X, n)
    left = product(X, U)
    right = product(constant(C, range(n)), U)
    comps = []
    for c in range(C.n_objects):
        comp = []
        for x in range(X.size(c)):
            for k, t in enumerate(U._tuples[c]):
                comp.append(right.pair_index(c, t.index(x), k))
        comps.append(comp)
    iso = PresheafMap(left.obj, right.obj, comps)
    if not iso.is_iso() or left.p2 != iso.then(right.p2):
        raise AssertionError("evaluation map is not an isomorphism over U")
    return SplittingObject(n, U, iso, (left.p2, right.p2))


# --------------------------------------------------------------------------
# enumerators used by the property suites


def subpresheaves(X: Presheaf) -> Iterator[SubPresheaf]:
    """Every subpresheaf of X, each exactly once.

    Elements are decided in order; putting x in forces its restrictions in,
    leaving x out forces everything restricting to x out.
    """
    C = X.category
    order = list(X.elements())
    state = [[0] * X.size(c) for c in range(C.n_objects)]  # 0 undecided, 1 in, -1 out
    up = [[[] for _ in range(X.size(c))] for c in range(C.n_objects)]
    for f in C.non_identity():
        for y, x in enumerate(X.restr[f]):
            up[C.src(f)][x].append((C.tgt(f), y))

    def setv(c, i, v, trail) -> bool:
        stack = [(c, i)]
        while stack:
            c, i = stack.pop()
            if state[c][i] == v:
                continue
            if state[c][i] != 0:
                return False
            state[c][i] = v
            trail.append((c, i))
            if v == 1:
                stack.extend((C.src(f), X.restr[f][i]) for f in C.into(c))
            else:
                stack.extend(up[c][i])
        return True

    def search(k):
        while k < len(order) and state[order[k][0]][order[k][1]] != 0:
            k += 1
        if k == len(order):
            yield SubPresheaf(X, [{i for i, v in enumerate(st) if v == 1} for st in state], check=False)
            return
        c, i = order[k]
        for v in (-1, 1):
            trail: list = []
            if setv(c, i, v, trail):
                yield from search(k + 1)
            for a, b in trail:
                state[a][b] = 0

    yield from search(0)


def set_partitions(n: int) -> Iterator[list[int]]:
    """Restricted growth strings of length n."""
    if n == 0:
        yield []
        return

    def rec(prefix, mx):
        if len(prefix) == n:
            yield list(prefix)
            return
        for v in range(mx + 2):
            prefix.append(v)
            yield from rec(prefix, max(mx, v))
            prefix.pop()

    yield from rec([0], 0)


def equivalence_relations(X: Presheaf) -> Iterator[list[list[int]]]:
    """Levelwise partitions (as class labels) compatible with restriction."""
    C = X.category
    n = C.n_objects
    parts = [list(set_partitions(X.size(c))) for c in range(n)]
    cur: list = [None] * n

    def compatible(k) -> bool:
        for f in C.non_identity():
            s, t = C.src(f), C.tgt(f)
            if max(s, t) != k:
                continue
            ps, pt = cur[s], cur[t]
            r = X.restr[f]
            m = X.size(t)
            for a in range(m):
                for b in range(a + 1, m):
                    if pt[a] == pt[b] and ps[r[a]] != ps[r[b]]:
                        return False
        return True

    def search(k):
        if k == n:
            yield [list(p) for p in cur]
            return
        for p in parts[k]:
            cur[k] = p
            if compatible(k):
                yield from search(k + 1)
        cur[k] = None

    yield from search(0)


# --------------------------------------------------------------------------
# report


@dataclass
class FinitenessReport:
    connected: bool
    component_count: int
    decidable: bool
    locally_constant: bool
    locally_finite: bool
    n: int | list[int] | None
    kuratowski_finite: bool | str
    finite: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def fully_decided(self) -> bool:
        return self.kuratowski_finite != "skipped(cap)"

    def to_json(self) -> dict:
        return {
            "connected": self.connected,
            "component_count": self.component_count,
            "decidable": self.decidable,
            "locally_constant": self.locally_constant,
            "locally_finite": self.locally_finite,
            "n": self.n,
            "kuratowski_finite": self.kuratowski_finite,
            "finite": self.finite,
            "witnesses": self.witnesses,
        }

    def to_text(self) -> str:
        lines = [f"{k}: {v}" for k, v in self.to_json().items() if k != "witnesses"]
        return "\n".join(lines)


def analyze(X: Presheaf, cap: int = LATTICE_CAP, with_witnesses: bool = False) -> FinitenessReport:
    comps = connected_components(X)
    dec = restrictions_injective(X)
    lf = is_locally_finite(X)
    if dec:
        kur = kuratowski_check(X, cap).to_json()
    else:
        kur = "n/a"
    n = None
    if lf is not None:
        n = lf.fibres[0] if len(lf.fibres) == 1 else lf.fibres
    witnesses: dict = {}
    if with_witnesses:
        if dec:
            comp = is_decidable(X)
            witnesses["diagonal_complement"] = [sorted(s) for s in comp.chosen]
        if lf is not None:
            witnesses["trivializing_cover"] = [X.category.objects[t.obj] for t in lf.witness.trivializations]
            if len(lf.fibres) == 1 and math.factorial(lf.n) <= 720:
                sp = splitting_object(X)
                witnesses["splitting_object"] = sp.U.to_json(inline_site=False)
    return FinitenessReport(
        connected=len(comps) == 1,
        component_count=len(comps),
        decidable=dec,
        locally_constant=lf is not None,
        locally_finite=lf is not None,
        n=n,
        kuratowski_finite=kur,
        finite=lf is not None,
        witnesses=witnesses,
    )
