"""Test corpora: a fixed site catalog and presheaves on it up to isomorphism.

The catalog is the trivial site, the arrow, the circle, the commuting
square and the one-object groupoids of all groups of order at most 8.
Presheaves on the first four are enumerated exhaustively by total size.
On a groupoid site every presheaf is a sum of coset objects G/K, so those
are generated as multisets of transitive ones.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .grp import FiniteGroup, GroupHom, extend_hom, small_groups, subgroups
from .homs import find_isomorphism
from .site import (
    FiniteCategory,
    FiniteFunctor,
    Presheaf,
    arrow_site,
    circle_site,
    coset_presheaf,
    enumerate_presheaves,
    groupoid_site,
    identity_functor,
    initial,
    square_site,
    sum_all,
    trivial_site,
)


@dataclass(frozen=True)
class CatalogSite:
    name: str
    site: FiniteCategory
    group: FiniteGroup | None = None


@lru_cache(maxsize=None)
def site_catalog(max_group_order: int = 8) -> tuple[CatalogSite, ...]:
    out = [
        CatalogSite("trivial", trivial_site()),
        CatalogSite("arrow", arrow_site()),
        CatalogSite("circle", circle_site()),
        CatalogSite("square", square_site()),
    ]
    for G in small_groups(max_group_order):
        out.append(CatalogSite(f"B{G.name}", groupoid_site(G, name=f"B{G.name}"), G))
    return tuple(out)


@lru_cache(maxsize=None)
def transitive_gsets(entry: CatalogSite) -> tuple[Presheaf, ...]:
    """One coset object per conjugacy class of subgroups, largest subgroup first."""
    G, C = entry.group, entry.site
    reps: list[Presheaf] = []
    for K in sorted(subgroups(G), key=lambda K: (-K.order, K.elements)):
        X = coset_presheaf(C, G, K)
        if not any(Y.size(0) == X.size(0) and find_isomorphism(X, Y) is not None for Y in reps):
            reps.append(X)
    return tuple(reps)


def _multisets(sizes: list[int], budget: int, start: int = 0) -> Iterator[list[int]]:
    yield []
    for k in range(start, len(sizes)):
        if sizes[k] <= budget:
            for rest in _multisets(sizes, budget - sizes[k], k):
                yield [k] + rest


@lru_cache(maxsize=None)
def presheaf_corpus(entry: CatalogSite, max_total: int) -> tuple[Presheaf, ...]:
    """All presheaves on the site with total size <= max_total, up to isomorphism."""
    if entry.group is None:
        return tuple(enumerate_presheaves(entry.site, max_total))
    trans = transitive_gsets(entry)
    sizes = [X.size(0) for X in trans]
    out = []
    for ms in _multisets(sizes, max_total):
        if not ms:
            out.append(initial(entry.site))
        elif len(ms) == 1:
            out.append(trans[ms[0]])
        else:
            out.append(sum_all([trans[k] for k in ms])[0])
    return tuple(sorted(out, key=lambda X: X.total_size))


@lru_cache(maxsize=None)
def connected_locally_constant(entry: CatalogSite, max_fibre: int) -> tuple[Presheaf, ...]:
    """Connected locally constant presheaves with fibre <= max_fibre, up to isomorphism.

    These are the transitive actions of the presented fundamental group.
    """
    from .grp import low_index_reps
    from .pi1 import action_presheaf, pi1_presentation

    pp = pi1_presentation(entry.site)
    reps: list[Presheaf] = []
    for act in low_index_reps(pp.presentation, max_fibre, cap=max(6, max_fibre)):
        X = action_presheaf(pp, act.perms)
        if not any(Y.size(0) == X.size(0) and find_isomorphism(X, Y) is not None for Y in reps):
            reps.append(X)
    return tuple(reps)


@lru_cache(maxsize=None)
def locally_constant_corpus(entry: CatalogSite, max_fibre: int) -> tuple[Presheaf, ...]:
    """Locally constant presheaves with fibre <= max_fibre, as sums of connected ones."""
    if not entry.site.is_connected():
        from .finiteness import restrictions_bijective

        return tuple(X for X in presheaf_corpus(entry, max_fibre) if restrictions_bijective(X))
    conn = connected_locally_constant(entry, max_fibre)
    out = []
    for ms in _multisets([X.size(0) for X in conn], max_fibre):
        if not ms:
            out.append(initial(entry.site))
        elif len(ms) == 1:
            out.append(conn[ms[0]])
        else:
            out.append(sum_all([conn[k] for k in ms])[0])
    return tuple(out)


def random_relabelling(X: Presheaf, rng: random.Random) -> tuple[Presheaf, list[list[int]]]:
    perms = []
    for c in range(X.category.n_objects):
        p = list(range(X.size(c)))
        rng.shuffle(p)
        perms.append(p)
    return X.relabel(perms), perms


def random_instances(entry: CatalogSite, rng: random.Random, count: int, max_total: int,
                     base_total: int = 3) -> list[Presheaf]:
    """Seeded larger instances: sums and products of small corpus members."""
    from .site import product

    base = [X for X in presheaf_corpus(entry, base_total) if X.total_size > 0]
    out = []
    for _ in range(count):
        X = rng.choice(base)
        Y = rng.choice(base)
        Z = product(X, Y).obj if rng.random() < 0.5 else sum_all([X, Y])[0]
        if Z.total_size <= max_total:
            out.append(Z)
    return out


# --------------------------------------------------------------------------
# functor corpus


def circle_endofunctors() -> list[FiniteFunctor]:
    C = circle_site()
    out = []
    for ia in ("a", "b"):
        for ib in ("a", "b"):
            out.append(FiniteFunctor(C, C, {"x": "x", "y": "y"}, {"a": ia, "b": ib}))
    return out


def square_to_arrow() -> FiniteFunctor:
    """Collapse the square onto its diagonal: a |-> x, everything else |-> y."""
    S, A = square_site(), arrow_site()
    return FiniteFunctor(S, A, {"a": "x", "b": "y", "c": "y", "d": "y"},
                         {"f": "f", "g": "f", "h": None, "k": None, "s": "f"})


def arrow_into_circle() -> FiniteFunctor:
    return FiniteFunctor(arrow_site(), circle_site(), {"x": "x", "y": "y"}, {"f": "b"})


def group_homs(H: FiniteGroup, G: FiniteGroup) -> list[GroupHom]:
    """All homomorphisms H -> G, by extending images of a generating set."""
    import itertools

    gens = H.generating_set()
    out = []
    seen = set()
    for images in itertools.product(range(G.order), repeat=len(gens)):
        h = extend_hom(H, G, gens, images)
        if h is not None and h.map not in seen:
            seen.add(h.map)
            out.append(h)
    return out


def subgroup_inclusions(G: FiniteGroup) -> list[GroupHom]:
    """Inclusions H -> G of every subgroup, H given its own table."""
    out = []
    for K in subgroups(G):
        els = list(K.elements)
        idx = {e: i for i, e in enumerate(els)}
        H = FiniteGroup([[idx[G.mul(a, b)] for b in els] for a in els], idx[G.identity], name=f"{G.name}_sub{len(els)}")
        out.append(GroupHom(H, G, tuple(els)))
    return out


def identity_functors() -> list[FiniteFunctor]:
    return [identity_functor(e.site) for e in site_catalog() if e.site.is_connected()]
