"""Finite categories and finite-valued presheaves on them.

A presheaf ``X`` on a finite category assigns to each object ``c`` a finite
list of named elements ``X(c)`` and to each morphism ``f: c -> c'`` a
restriction ``X(f): X(c') -> X(c)``.  Elements are addressed by their index
in the level; ``restr[f][i]`` is the index of ``X(f)(i)``.

Composition is written diagrammatically: ``C.then(f, g)`` is ``g o f``.
Identities occupy morphism indices ``0..len(objects)-1`` and are named
``id_<object>``.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    BadComposition,
    BadNaturality,
    CapExceeded,
    CategoryMismatch,
    DanglingName,
    NotAFunctor,
    NotAPresheaf,
    NotASubobject,
    NotEquivalence,
)


@dataclass(frozen=True)
class Morphism:
    name: str
    src: int
    tgt: int


class FiniteCategory:
    """A finite category with implicit identities.

    ``composition`` maps ``(first, second)`` names to the name of
    ``second o first``; ``None`` or an ``id_<object>`` name stands for an
    identity.  Every composable pair of non-identity morphisms must appear.
    """

    def __init__(self, objects: Sequence[str], morphisms: Sequence[tuple[str, str, str]],
                 composition: Mapping[tuple[str, str], str | None] = (), name: str | None = None):
        self.name = name
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise DanglingName("duplicate object names")
        self.obj_index = {c: i for i, c in enumerate(self.objects)}
        mors = [Morphism(f"id_{c}", i, i) for i, c in enumerate(self.objects)]
        for entry in morphisms:
            fname, s, t = entry
            if s not in self.obj_index or t not in self.obj_index:
                raise DanglingName(f"morphism {fname!r} has unknown endpoint")
            mors.append(Morphism(fname, self.obj_index[s], self.obj_index[t]))
        self.morphisms = tuple(mors)
        self.mor_index: dict[str, int] = {}
        for i, m in enumerate(mors):
            if m.name in self.mor_index:
                raise DanglingName(f"duplicate morphism name {m.name!r}")
            self.mor_index[m.name] = i
        n_obj = len(self.objects)
        then: dict[tuple[int, int], int] = {}
        comp = dict(composition)
        for (a, b), r in comp.items():
            for x in (a, b):
                if x not in self.mor_index:
                    raise DanglingName(f"composition mentions unknown morphism {x!r}")
            fa, fb = self.mor_index[a], self.mor_index[b]
            if mors[fa].tgt != mors[fb].src:
                raise BadComposition(f"{a!r} then {b!r} is not composable")
            if r is None:
                if mors[fa].src != mors[fb].tgt:
                    raise BadComposition(f"{a!r} then {b!r} cannot compose to an identity")
                fr = mors[fa].src
            else:
                if r not in self.mor_index:
                    raise DanglingName(f"composition result {r!r} is unknown")
                fr = self.mor_index[r]
            if (mors[fr].src, mors[fr].tgt) != (mors[fa].src, mors[fb].tgt):
                raise BadComposition(f"{a!r} then {b!r} = {r!r} has wrong endpoints")
            then[(fa, fb)] = fr
        for f, m in enumerate(mors):
            then[(m.src, f)] = f
            then[(f, m.tgt)] = f
        for f in range(n_obj, len(mors)):
            for g in range(n_obj, len(mors)):
                if mors[f].tgt == mors[g].src and (f, g) not in then:
                    raise BadComposition(
                        f"missing composite of {mors[f].name!r} then {mors[g].name!r}")
        self._then = then
        for (f, g), h in then.items():
            for k in range(len(mors)):
                if mors[g].tgt == mors[k].src:
                    if then[(h, k)] != then[(f, then[(g, k)])]:
                        raise BadComposition(
                            "composition is not associative at "
                            f"({mors[f].name}, {mors[g].name}, {mors[k].name})")
        self._into = [tuple(f for f in range(n_obj, len(mors)) if mors[f].tgt == c) for c in range(n_obj)]
        self._outof = [tuple(f for f in range(n_obj, len(mors)) if mors[f].src == c) for c in range(n_obj)]

    def __repr__(self):
        label = self.name or "FiniteCategory"
        return f"<{label}: {len(self.objects)} objects, {len(self.morphisms)} morphisms>"

    def __eq__(self, other):
        return self is other or (
            isinstance(other, FiniteCategory)
            and self.objects == other.objects
            and self.morphisms == other.morphisms
            and self._then == other._then
        )

    def __hash__(self):
        return hash((self.objects, self.morphisms))

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    def non_identity(self) -> range:
        return range(len(self.objects), len(self.morphisms))

    def is_identity(self, f: int) -> bool:
        return f < len(self.objects)

    def src(self, f: int) -> int:
        return self.morphisms[f].src

    def tgt(self, f: int) -> int:
        return self.morphisms[f].tgt

    def then(self, f: int, g: int) -> int:
        return self._then[(f, g)]

    def composable_pairs(self):
        return self._then.items()

    def hom(self, c: int, d: int) -> list[int]:
        return [f for f, m in enumerate(self.morphisms) if m.src == c and m.tgt == d]

    def into(self, c: int) -> tuple[int, ...]:
        """Non-identity morphisms with target ``c``."""
        return self._into[c]

    def outof(self, c: int) -> tuple[int, ...]:
        return self._outof[c]

    def object_components(self) -> list[list[int]]:
        """Connected components of the underlying graph, in object order."""
        comp = [-1] * self.n_objects
        out: list[list[int]] = []
        for start in range(self.n_objects):
            if comp[start] >= 0:
                continue
            comp[start] = len(out)
            members = [start]
            queue = deque([start])
            while queue:
                c = queue.popleft()
                for f in self.into(c) + self.outof(c):
                    for d in (self.src(f), self.tgt(f)):
                        if comp[d] < 0:
                            comp[d] = len(out)
                            members.append(d)
                            queue.append(d)
            out.append(sorted(members))
        return out

    def is_connected(self) -> bool:
        return self.n_objects > 0 and len(self.object_components()) == 1

    def basepoint(self) -> int:
        """The lexicographically least object."""
        return min(range(self.n_objects), key=lambda c: self.objects[c])

    def to_json(self) -> dict:
        n = self.n_objects
        comp = []
        for (f, g), h in sorted(self._then.items()):
            if f >= n and g >= n:
                comp.append({"first": self.morphisms[f].name, "second": self.morphisms[g].name,
                             "result": None if h < n else self.morphisms[h].name})
        return {
            "objects": list(self.objects),
            "morphisms": [{"name": m.name, "src": self.objects[m.src], "tgt": self.objects[m.tgt]}
                          for m in self.morphisms[n:]],
            "composition": comp,
        }


def validate_category(raw: Mapping) -> FiniteCategory:
    """Build a category from its JSON form (see docs/formats.md)."""
    try:
        objects = list(raw["objects"])
        morphisms = [(m["name"], m["src"], m["tgt"]) for m in raw.get("morphisms", [])]
        comp = {}
        for entry in raw.get("composition", []):
            r = entry.get("result")
            if isinstance(r, str) and r.startswith("id_") and r[3:] in objects and r not in {m[0] for m in morphisms}:
                r = None
            comp[(entry["first"], entry["second"])] = r
    except (KeyError, TypeError) as exc:
        raise DanglingName(f"malformed site description: {exc!r}") from None
    return FiniteCategory(objects, morphisms, comp, name=raw.get("name"))


# --------------------------------------------------------------------------
# standard sites


def trivial_site() -> FiniteCategory:
    """One object, no other morphisms: presheaves are sets."""
    return FiniteCategory(["*"], [], name="trivial")


def arrow_site() -> FiniteCategory:
    return FiniteCategory(["x", "y"], [("f", "x", "y")], name="arrow")


def circle_site() -> FiniteCategory:
    """Two objects with two parallel arrows; its presheaf topos sees a circle."""
    return FiniteCategory(["x", "y"], [("a", "x", "y"), ("b", "x", "y")], name="circle")


def square_site() -> FiniteCategory:
    """A commuting square a -> b -> d, a -> c -> d with diagonal s."""
    return FiniteCategory(
        ["a", "b", "c", "d"],
        [("f", "a", "b"), ("g", "a", "c"), ("h", "b", "d"), ("k", "c", "d"), ("s", "a", "d")],
        {("f", "h"): "s", ("g", "k"): "s"},
        name="square",
    )


def element_label(i: int) -> str:
    return f"g{i}"


def groupoid_site(G, name: str | None = None) -> FiniteCategory:
    """One-object category on the elements of G.

    The morphism for element ``i`` is ``g<i>``; "first a then b" composes to
    the element ``a*b``, so presheaves are left G-sets.
    """
    e = G.identity
    mors = [(element_label(i), "*", "*") for i in G if i != e]
    comp = {}
    for a in G:
        for b in G:
            if a != e and b != e:
                ab = G.mul(a, b)
                comp[(element_label(a), element_label(b))] = None if ab == e else element_label(ab)
    return FiniteCategory(["*"], mors, comp, name=name or f"B{G.name or G.order}")


def groupoid_morphism(C: FiniteCategory, G, g: int) -> int:
    """Morphism index of element ``g`` in ``groupoid_site(G)``."""
    return 0 if g == G.identity else C.mor_index[element_label(g)]


# --------------------------------------------------------------------------
# presheaves


class Presheaf:
    """A finite-valued presheaf; see the module docstring for conventions."""

    def __init__(self, category: FiniteCategory, sets: Sequence[Sequence[str]],
                 restr: Sequence[Sequence[int] | None], check: bool = True):
        C = category
        self.category = C
        self.sets = tuple(tuple(str(x) for x in level) for level in sets)
        if len(self.sets) != C.n_objects:
            raise NotAPresheaf("one element list per object is required")
        rs = []
        for f, m in enumerate(C.morphisms):
            r = restr[f] if f < len(restr) else None
            if C.is_identity(f):
                r = tuple(range(len(self.sets[f])))
            elif r is None:
                raise NotAPresheaf(f"missing restriction along {m.name!r}")
            rs.append(tuple(int(v) for v in r))
        self.restr = tuple(rs)
        self._index: list[dict[str, int]] | None = None
        if check:
            self.check()

    def check(self) -> None:
        C = self.category
        for level in self.sets:
            if len(set(level)) != len(level):
                raise NotAPresheaf("duplicate element names within a level")
        for f, m in enumerate(C.morphisms):
            r = self.restr[f]
            n_src = len(self.sets[m.src])
            if len(r) != len(self.sets[m.tgt]) or any(not 0 <= v < n_src for v in r):
                raise NotAPresheaf(
                    f"restriction along {m.name!r} is not a function "
                    f"{C.objects[m.tgt]} -> {C.objects[m.src]}")
        for (f, g), h in C.composable_pairs():
            rf, rg, rh = self.restr[f], self.restr[g], self.restr[h]
            for x in range(len(rh)):
                if rh[x] != rf[rg[x]]:
                    raise BadNaturality(
                        f"functoriality fails: restriction along {C.morphisms[h].name!r} differs from "
                        f"restricting along {C.morphisms[g].name!r} then {C.morphisms[f].name!r} "
                        f"at element {self.sets[C.tgt(g)][x]!r}")

    def __repr__(self):
        sizes = ",".join(str(len(s)) for s in self.sets)
        return f"<Presheaf [{sizes}] on {self.category!r}>"

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Presheaf)
            and self.category == other.category
            and self.sets == other.sets
            and self.restr == other.restr
        )

    def __hash__(self):
        return hash((self.sets, self.restr))

    def size(self, c: int) -> int:
        return len(self.sets[c])

    @property
    def total_size(self) -> int:
        return sum(len(s) for s in self.sets)

    def elements(self):
        for c, level in enumerate(self.sets):
            for i in range(len(level)):
                yield c, i

    def index_of(self, c: int, name: str) -> int:
        if self._index is None:
            self._index = [{x: i for i, x in enumerate(level)} for level in self.sets]
        return self._index[c][name]

    def is_empty(self) -> bool:
        return self.total_size == 0

    def restrict(self, f: int, i: int) -> int:
        return self.restr[f][i]

    def relabel(self, perms: Sequence[Sequence[int]]) -> "Presheaf":
        """Move element ``i`` of level ``c`` to position ``perms[c][i]``."""
        C = self.category
        sets = []
        for c, level in enumerate(self.sets):
            new = [""] * len(level)
            for i, x in enumerate(level):
                new[perms[c][i]] = x
            sets.append(new)
        restr = []
        for f, m in enumerate(C.morphisms):
            r = self.restr[f]
            new_r = [0] * len(r)
            for x, y in enumerate(r):
                new_r[perms[m.tgt][x]] = perms[m.src][y]
            restr.append(new_r)
        return Presheaf(C, sets, restr, check=False)

    def renamed(self, names: Sequence[Sequence[str]]) -> "Presheaf":
        return Presheaf(self.category, names, self.restr, check=False)

    def with_plain_names(self) -> "Presheaf":
        """Same presheaf with elements named ``<object>.<index>``."""
        C = self.category
        return self.renamed([[f"{C.objects[c]}.{i}" for i in range(len(s))] for c, s in enumerate(self.sets)])

    def to_json(self, inline_site: bool = True) -> dict:
        C = self.category
        restrictions = {}
        for f in C.non_identity():
            m = C.morphisms[f]
            restrictions[m.name] = {self.sets[m.tgt][x]: self.sets[m.src][y] for x, y in enumerate(self.restr[f])}
        out = {"sets": {C.objects[c]: list(s) for c, s in enumerate(self.sets)}, "restrictions": restrictions}
        if inline_site:
            out = {"site": C.to_json(), **out}
        return out


def validate_presheaf(raw: Mapping, C: FiniteCategory) -> Presheaf:
    """Build a presheaf from its JSON form over the site ``C``."""
    sets_raw = raw.get("sets", {})
    for obj in sets_raw:
        if obj not in C.obj_index:
            raise DanglingName(f"unknown object {obj!r} in presheaf sets")
    sets = [[str(x) for x in sets_raw.get(c, [])] for c in C.objects]
    index = [{x: i for i, x in enumerate(level)} for level in sets]
    rraw = raw.get("restrictions", {})
    for name in rraw:
        if name not in C.mor_index:
            raise DanglingName(f"unknown morphism {name!r} in restrictions")
    restr: list[list[int] | None] = []
    for f, m in enumerate(C.morphisms):
        if C.is_identity(f):
            restr.append(None)
            continue
        table = rraw.get(m.name, {})
        r = []
        for x in sets[m.tgt]:
            if x not in table:
                raise NotAPresheaf(f"restriction along {m.name!r} undefined at {x!r}")
            y = str(table[x])
            if y not in index[m.src]:
                raise NotAPresheaf(
                    f"restriction along {m.name!r} sends {x!r} to {y!r}, not an element of {C.objects[m.src]!r}")
            r.append(index[m.src][y])
        restr.append(r)
    return Presheaf(C, sets, restr)


def _same_category(*objs) -> FiniteCategory:
    C = objs[0].category
    for X in objs[1:]:
        if X.category != C:
            raise CategoryMismatch("objects live over different sites")
    return C


class PresheafMap:
    """A natural transformation; ``comps[c][i]`` is the image of element i of X(c)."""

    def __init__(self, src: Presheaf, tgt: Presheaf, comps: Sequence[Sequence[int]], check: bool = True):
        _same_category(src, tgt)
        self.src = src
        self.tgt = tgt
        self.comps = tuple(tuple(int(v) for v in comp) for comp in comps)
        if check:
            self.check()

    def check(self) -> None:
        X, Y, C = self.src, self.tgt, self.src.category
        for c in range(C.n_objects):
            if len(self.comps[c]) != X.size(c) or any(not 0 <= v < Y.size(c) for v in self.comps[c]):
                raise BadNaturality(f"component at {C.objects[c]!r} is not a function")
        for f in C.non_identity():
            m = C.morphisms[f]
            a_s, a_t = self.comps[m.src], self.comps[m.tgt]
            rx, ry = X.restr[f], Y.restr[f]
            for x in range(X.size(m.tgt)):
                if a_s[rx[x]] != ry[a_t[x]]:
                    raise BadNaturality(
                        f"naturality square for {m.name!r} fails at {X.sets[m.tgt][x]!r}")

    def __eq__(self, other):
        return isinstance(other, PresheafMap) and self.src == other.src and self.tgt == other.tgt \
            and self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def __repr__(self):
        return f"<PresheafMap {self.comps}>"

    def __call__(self, c: int, i: int) -> int:
        return self.comps[c][i]

    def then(self, other: "PresheafMap") -> "PresheafMap":
        """Composite ``other o self``."""
        comps = [[other.comps[c][y] for y in comp] for c, comp in enumerate(self.comps)]
        return PresheafMap(self.src, other.tgt, comps, check=False)

    def is_mono(self) -> bool:
        return all(len(set(comp)) == len(comp) for comp in self.comps)

    def is_epi(self) -> bool:
        return all(len(set(comp)) == self.tgt.size(c) for c, comp in enumerate(self.comps))

    def is_iso(self) -> bool:
        return self.is_mono() and self.is_epi()

    def inverse(self) -> "PresheafMap":
        comps = []
        for c, comp in enumerate(self.comps):
            inv = [0] * len(comp)
            for x, y in enumerate(comp):
                inv[y] = x
            comps.append(inv)
        return PresheafMap(self.tgt, self.src, comps, check=False)


def identity_map(X: Presheaf) -> PresheafMap:
    return PresheafMap(X, X, [range(X.size(c)) for c in range(X.category.n_objects)], check=False)


class SubPresheaf:
    """A restriction-closed choice of elements of ``parent``."""

    def __init__(self, parent: Presheaf, chosen: Sequence[Iterable[int]], check: bool = True):
        self.parent = parent
        self.chosen = tuple(frozenset(int(i) for i in s) for s in chosen)
        if check:
            self.check()

    def check(self) -> None:
        X, C = self.parent, self.parent.category
        if len(self.chosen) != C.n_objects:
            raise NotASubobject("one subset per object is required")
        for c, s in enumerate(self.chosen):
            if any(not 0 <= i < X.size(c) for i in s):
                raise NotASubobject(f"index out of range at {C.objects[c]!r}")
        for f in C.non_identity():
            m = C.morphisms[f]
            for x in self.chosen[m.tgt]:
                if X.restr[f][x] not in self.chosen[m.src]:
                    raise NotASubobject(
                        f"not closed under restriction along {m.name!r} at {X.sets[m.tgt][x]!r}")

    def __eq__(self, other):
        return isinstance(other, SubPresheaf) and self.parent == other.parent and self.chosen == other.chosen

    def __hash__(self):
        return hash(self.chosen)

    def __repr__(self):
        return f"<SubPresheaf {[sorted(s) for s in self.chosen]}>"

    def __le__(self, other: "SubPresheaf") -> bool:
        return all(a <= b for a, b in zip(self.chosen, other.chosen))

    def size(self) -> int:
        return sum(len(s) for s in self.chosen)

    def is_empty(self) -> bool:
        return self.size() == 0

    def is_full(self) -> bool:
        return all(len(s) == self.parent.size(c) for c, s in enumerate(self.chosen))

    def union(self, other: "SubPresheaf") -> "SubPresheaf":
        return SubPresheaf(self.parent, [a | b for a, b in zip(self.chosen, other.chosen)], check=False)

    def intersection(self, other: "SubPresheaf") -> "SubPresheaf":
        return SubPresheaf(self.parent, [a & b for a, b in zip(self.chosen, other.chosen)], check=False)

    def levelwise_complement(self) -> list[frozenset[int]]:
        return [frozenset(range(self.parent.size(c))) - s for c, s in enumerate(self.chosen)]

    def to_presheaf(self) -> tuple[Presheaf, PresheafMap]:
        """The subobject as a presheaf together with its inclusion."""
        X, C = self.parent, self.parent.category
        keep = [sorted(s) for s in self.chosen]
        pos = [{x: i for i, x in enumerate(k)} for k in keep]
        sets = [[X.sets[c][x] for x in k] for c, k in enumerate(keep)]
        restr = []
        for f, m in enumerate(C.morphisms):
            restr.append([pos[m.src][X.restr[f][x]] for x in keep[m.tgt]])
        S = Presheaf(C, sets, restr, check=False)
        return S, PresheafMap(S, X, keep, check=False)


def full_subobject(X: Presheaf) -> SubPresheaf:
    return SubPresheaf(X, [range(X.size(c)) for c in range(X.category.n_objects)], check=False)


def empty_subobject(X: Presheaf) -> SubPresheaf:
    return SubPresheaf(X, [()] * X.category.n_objects, check=False)


def closure(X: Presheaf, seeds: Iterable[tuple[int, int]]) -> SubPresheaf:
    """Smallest subpresheaf containing the given (object, index) elements."""
    C = X.category
    chosen = [set() for _ in range(C.n_objects)]
    stack = list(seeds)
    while stack:
        c, i = stack.pop()
        if i in chosen[c]:
            continue
        chosen[c].add(i)
        for f in C.into(c):
            stack.append((C.src(f), X.restr[f][i]))
    return SubPresheaf(X, chosen, check=False)


# --------------------------------------------------------------------------
# constructions


def terminal(C: FiniteCategory) -> Presheaf:
    return Presheaf(C, [["*"]] * C.n_objects, [[0] for _ in C.morphisms], check=False)


def initial(C: FiniteCategory) -> Presheaf:
    return Presheaf(C, [[]] * C.n_objects, [[] for _ in C.morphisms], check=False)


def constant(C: FiniteCategory, S: Iterable) -> Presheaf:
    """The constant presheaf on S (identity restrictions)."""
    names = [str(s) for s in S]
    return Presheaf(C, [names] * C.n_objects, [range(len(names)) for _ in C.morphisms])


def representable(C: FiniteCategory, c: int) -> Presheaf:
    """Hom(-, c); elements are morphism names."""
    homs = [C.hom(d, c) for d in range(C.n_objects)]
    pos = [{g: i for i, g in enumerate(h)} for h in homs]
    sets = [[C.morphisms[g].name for g in h] for h in homs]
    restr = []
    for f, m in enumerate(C.morphisms):
        restr.append([pos[m.src][C.then(f, g)] for g in homs[m.tgt]])
    return Presheaf(C, sets, restr, check=False)


def global_sections(X: Presheaf) -> list[tuple[int, ...]]:
    """Compatible families (x_c), one element index per object."""
    C = X.category
    n = C.n_objects
    out: list[tuple[int, ...]] = []
    cur = [0] * n

    def ok(k: int) -> bool:
        for f in range(len(C.morphisms)):
            m = C.morphisms[f]
            if max(m.src, m.tgt) == k and X.restr[f][cur[m.tgt]] != cur[m.src]:
                return False
        return True

    def search(k: int):
        if k == n:
            out.append(tuple(cur))
            return
        for i in range(X.size(k)):
            cur[k] = i
            if ok(k):
                search(k + 1)

    search(0)
    return out


def global_section_names(X: Presheaf) -> list[tuple[str, ...]]:
    return [tuple(X.sets[c][i] for c, i in enumerate(s)) for s in global_sections(X)]


def support(X: Presheaf) -> SubPresheaf:
    """Subterminal marking the objects where X is nonempty."""
    C = X.category
    S = SubPresheaf(terminal(C), [{0} if X.size(c) else set() for c in range(C.n_objects)])
    return S


@dataclass
class Product:
    obj: Presheaf
    p1: PresheafMap
    p2: PresheafMap

    def pair_index(self, c: int, i: int, j: int) -> int:
        return i * self.p2.tgt.size(c) + j

    def pair(self, f: PresheafMap, g: PresheafMap) -> PresheafMap:
        """Mediating map Z -> X x Y."""
        comps = [[self.pair_index(c, a, b) for a, b in zip(fc, gc)] for c, (fc, gc) in enumerate(zip(f.comps, g.comps))]
        return PresheafMap(f.src, self.obj, comps)


def product(X: Presheaf, Y: Presheaf) -> Product:
    C = _same_category(X, Y)
    sets, restr = [], []
    for c in range(C.n_objects):
        sets.append([f"({x},{y})" for x in X.sets[c] for y in Y.sets[c]])
    for f, m in enumerate(C.morphisms):
        ny_src = Y.size(m.src)
        rx, ry = X.restr[f], Y.restr[f]
        restr.append([rx[i] * ny_src + ry[j] for i in range(X.size(m.tgt)) for j in range(Y.size(m.tgt))])
    P = Presheaf(C, sets, restr, check=False)
    p1 = PresheafMap(P, X, [[i for i in range(X.size(c)) for _ in range(Y.size(c))] for c in range(C.n_objects)], check=False)
    p2 = PresheafMap(P, Y, [[j for _ in range(X.size(c)) for j in range(Y.size(c))] for c in range(C.n_objects)], check=False)
    return Product(P, p1, p2)


@dataclass
class Sum:
    obj: Presheaf
    i1: PresheafMap
    i2: PresheafMap

    def copair(self, f: PresheafMap, g: PresheafMap) -> PresheafMap:
        """Mediating map X + Y -> Z."""
        return PresheafMap(self.obj, f.tgt, [list(a) + list(b) for a, b in zip(f.comps, g.comps)])


def sum_(X: Presheaf, Y: Presheaf) -> Sum:
    """Levelwise disjoint union; elements are tagged ``0:`` and ``1:``."""
    C = _same_category(X, Y)
    sets = [[f"0:{x}" for x in X.sets[c]] + [f"1:{y}" for y in Y.sets[c]] for c in range(C.n_objects)]
    restr = []
    for f, m in enumerate(C.morphisms):
        off = X.size(m.src)
        restr.append(list(X.restr[f]) + [off + y for y in Y.restr[f]])
    S = Presheaf(C, sets, restr, check=False)
    i1 = PresheafMap(X, S, [range(X.size(c)) for c in range(C.n_objects)], check=False)
    i2 = PresheafMap(Y, S, [[X.size(c) + j for j in range(Y.size(c))] for c in range(C.n_objects)], check=False)
    return Sum(S, i1, i2)


def sum_all(objs: Sequence[Presheaf], C: FiniteCategory | None = None) -> tuple[Presheaf, list[PresheafMap]]:
    """Finite sum of a list of presheaves with the coprojections."""
    if not objs:
        return initial(C), []
    C = _same_category(*objs)
    sets = [[] for _ in range(C.n_objects)]
    offsets = []
    for k, X in enumerate(objs):
        offsets.append([len(s) for s in sets])
        for c in range(C.n_objects):
            sets[c].extend(f"{k}:{x}" for x in X.sets[c])
    restr = []
    for f, m in enumerate(C.morphisms):
        r = []
        for k, X in enumerate(objs):
            r.extend(offsets[k][m.src] + y for y in X.restr[f])
        restr.append(r)
    S = Presheaf(C, sets, restr, check=False)
    incs = [PresheafMap(X, S, [[offsets[k][c] + i for i in range(X.size(c))] for c in range(C.n_objects)], check=False)
            for k, X in enumerate(objs)]
    return S, incs


def equalizer(f: PresheafMap, g: PresheafMap) -> tuple[Presheaf, PresheafMap]:
    if f.src != g.src or f.tgt != g.tgt:
        raise CategoryMismatch("equalizer needs a parallel pair")
    X = f.src
    sub = SubPresheaf(X, [[i for i in range(X.size(c)) if f.comps[c][i] == g.comps[c][i]]
                          for c in range(X.category.n_objects)], check=False)
    return sub.to_presheaf()


def equalizer_lift(inc: PresheafMap, h: PresheafMap) -> PresheafMap:
    """Factor h: Z -> X through the equalizer inclusion ``inc``."""
    pos = [{x: i for i, x in enumerate(comp)} for comp in inc.comps]
    return PresheafMap(h.src, inc.src, [[pos[c][y] for y in comp] for c, comp in enumerate(h.comps)])


def pullback(f: PresheafMap, g: PresheafMap) -> tuple[Presheaf, PresheafMap, PresheafMap]:
    """Pullback of X -f-> Z <-g- Y as a subobject of X x Y."""
    if f.tgt != g.tgt:
        raise CategoryMismatch("pullback needs a common codomain")
    pr = product(f.src, g.src)
    P = pr.obj
    sub = SubPresheaf(P, [[i for i in range(P.size(c))
                           if f.comps[c][pr.p1.comps[c][i]] == g.comps[c][pr.p2.comps[c][i]]]
                          for c in range(P.category.n_objects)], check=False)
    Q, inc = sub.to_presheaf()
    return Q, inc.then(pr.p1), inc.then(pr.p2)


def _union_find_classes(n: int, pairs: Iterable[tuple[int, int]], names: Sequence[str]) -> list[int]:
    """Class id per element; classes numbered by lexicographically least name."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    roots = [find(x) for x in range(n)]
    rep: dict[int, str] = {}
    for x in range(n):
        r = roots[x]
        if r not in rep or names[x] < rep[r]:
            rep[r] = names[x]
    ordered = sorted(set(roots), key=lambda r: rep[r])
    cid = {r: k for k, r in enumerate(ordered)}
    return [cid[r] for r in roots]


def _levelwise_quotient(X: Presheaf, pairs_at: Sequence[Iterable[tuple[int, int]]]) -> tuple[Presheaf, PresheafMap]:
    C = X.category
    cls = [_union_find_classes(X.size(c), pairs_at[c], X.sets[c]) for c in range(C.n_objects)]
    sets = []
    for c in range(C.n_objects):
        k = max(cls[c], default=-1) + 1
        names = [None] * k
        for x, q in enumerate(cls[c]):
            if names[q] is None or X.sets[c][x] < names[q]:
                names[q] = X.sets[c][x]
        sets.append(names)
    restr = []
    for f, m in enumerate(C.morphisms):
        r = [None] * len(sets[m.tgt])
        for x, q in enumerate(cls[m.tgt]):
            v = cls[m.src][X.restr[f][x]]
            if r[q] is None:
                r[q] = v
            elif r[q] != v:
                raise NotEquivalence(f"relation is not compatible with restriction along {m.name!r}")
        restr.append(r)
    Q = Presheaf(C, sets, restr, check=False)
    return Q, PresheafMap(X, Q, cls, check=False)


def coequalizer(f: PresheafMap, g: PresheafMap) -> tuple[Presheaf, PresheafMap]:
    """Levelwise quotient of the codomain by the equivalence generated by f ~ g."""
    if f.src != g.src or f.tgt != g.tgt:
        raise CategoryMismatch("coequalizer needs a parallel pair")
    X = f.src
    pairs = [list(zip(f.comps[c], g.comps[c])) for c in range(X.category.n_objects)]
    return _levelwise_quotient(f.tgt, pairs)


def coequalizer_desc(q: PresheafMap, h: PresheafMap) -> PresheafMap:
    """Factor h: Y -> Z (which coequalizes the pair) through q: Y -> Q."""
    comps = []
    for c, comp in enumerate(q.comps):
        out = [None] * q.tgt.size(c)
        for y, k in enumerate(comp):
            if out[k] is not None and out[k] != h.comps[c][y]:
                raise BadNaturality("map does not coequalize the pair")
            out[k] = h.comps[c][y]
        comps.append(out)
    return PresheafMap(q.tgt, h.tgt, comps)


def image(f: PresheafMap) -> SubPresheaf:
    return SubPresheaf(f.tgt, [set(comp) for comp in f.comps], check=False)


def epi_mono(f: PresheafMap) -> tuple[Presheaf, PresheafMap, PresheafMap]:
    """Factor f as a levelwise surjection followed by a levelwise injection."""
    I, m = image(f).to_presheaf()
    pos = [{x: i for i, x in enumerate(comp)} for comp in m.comps]
    e = PresheafMap(f.src, I, [[pos[c][y] for y in comp] for c, comp in enumerate(f.comps)], check=False)
    return I, e, m


# --------------------------------------------------------------------------
# relations


def diagonal(X: Presheaf, pr: Product | None = None) -> SubPresheaf:
    pr = pr or product(X, X)
    return SubPresheaf(pr.obj, [{pr.pair_index(c, i, i) for i in range(X.size(c))}
                                for c in range(X.category.n_objects)], check=False)


def relation_from_classes(X: Presheaf, classes: Sequence[Sequence[int]], pr: Product | None = None) -> SubPresheaf:
    """Relation on X with ``x ~ y`` iff ``classes[c][x] == classes[c][y]``."""
    pr = pr or product(X, X)
    chosen = []
    for c in range(X.category.n_objects):
        cl = classes[c]
        chosen.append({pr.pair_index(c, i, j) for i in range(X.size(c)) for j in range(X.size(c)) if cl[i] == cl[j]})
    return SubPresheaf(pr.obj, chosen)


def quotient_by_relation(X: Presheaf, R: SubPresheaf) -> tuple[Presheaf, PresheafMap]:
    """Levelwise quotient by an equivalence relation R on X (a subobject of X x X)."""
    C = X.category
    if R.parent.category != C or any(R.parent.size(c) != X.size(c) ** 2 for c in range(C.n_objects)):
        raise CategoryMismatch("relation must be a subobject of X x X")
    pairs = []
    for c in range(C.n_objects):
        n = X.size(c)
        rel = R.chosen[c]
        for i in range(n):
            if i * n + i not in rel:
                raise NotEquivalence(f"not reflexive at {X.sets[c][i]!r}")
        for p in rel:
            i, j = divmod(p, n)
            if j * n + i not in rel:
                raise NotEquivalence(f"not symmetric at ({X.sets[c][i]!r}, {X.sets[c][j]!r})")
        for p in rel:
            i, j = divmod(p, n)
            for k in range(n):
                if j * n + k in rel and i * n + k not in rel:
                    raise NotEquivalence(f"not transitive at {X.sets[c][i]!r}")
        pairs.append([divmod(p, n) for p in rel])
    return _levelwise_quotient(X, pairs)


# --------------------------------------------------------------------------
# functors, slices


class FiniteFunctor:
    """A functor between finite categories given on objects and morphisms."""

    def __init__(self, src: FiniteCategory, tgt: FiniteCategory,
                 obj_map: Mapping[str, str], mor_map: Mapping[str, str | None]):
        self.src, self.tgt = src, tgt
        try:
            self.on_obj = tuple(tgt.obj_index[obj_map[c]] for c in src.objects)
        except KeyError as exc:
            raise NotAFunctor(f"object map incomplete or dangling: {exc}") from None
        mm = []
        for f, m in enumerate(src.morphisms):
            if src.is_identity(f):
                mm.append(self.on_obj[f])
                continue
            if m.name not in mor_map:
                raise NotAFunctor(f"morphism {m.name!r} has no image")
            r = mor_map[m.name]
            if r is None or (r.startswith("id_") and r not in tgt.mor_index):
                img = self.on_obj[m.src]
                if self.on_obj[m.src] != self.on_obj[m.tgt]:
                    raise NotAFunctor(f"{m.name!r} cannot map to an identity")
            elif r in tgt.mor_index:
                img = tgt.mor_index[r]
            else:
                raise NotAFunctor(f"image {r!r} of {m.name!r} is not a morphism")
            if (tgt.src(img), tgt.tgt(img)) != (self.on_obj[m.src], self.on_obj[m.tgt]):
                raise NotAFunctor(f"image of {m.name!r} has the wrong endpoints")
            mm.append(img)
        self.on_mor = tuple(mm)
        for (f, g), h in src.composable_pairs():
            if tgt.then(self.on_mor[f], self.on_mor[g]) != self.on_mor[h]:
                raise NotAFunctor(
                    f"composite of {src.morphisms[f].name!r} then {src.morphisms[g].name!r} is not preserved")

    @classmethod
    def from_indices(cls, src, tgt, on_obj, on_mor) -> "FiniteFunctor":
        obj_map = {src.objects[c]: tgt.objects[d] for c, d in enumerate(on_obj)}
        mor_map = {src.morphisms[f].name: (None if tgt.is_identity(g) else tgt.morphisms[g].name)
                   for f, g in enumerate(on_mor) if not src.is_identity(f)}
        return cls(src, tgt, obj_map, mor_map)

    def then(self, other: "FiniteFunctor") -> "FiniteFunctor":
        return FiniteFunctor.from_indices(
            self.src, other.tgt,
            [other.on_obj[d] for d in self.on_obj], [other.on_mor[g] for g in self.on_mor])

    def restrict(self, Y: Presheaf) -> Presheaf:
        """Precomposition ``Y o u`` (inverse image along the functor)."""
        if Y.category != self.tgt:
            raise CategoryMismatch("presheaf is not over the functor's target")
        sets = [Y.sets[d] for d in self.on_obj]
        restr = [Y.restr[g] for g in self.on_mor]
        return Presheaf(self.src, sets, restr, check=False)

    def restrict_map(self, a: PresheafMap) -> PresheafMap:
        return PresheafMap(self.restrict(a.src), self.restrict(a.tgt), [a.comps[d] for d in self.on_obj], check=False)

    def to_json(self) -> dict:
        return {
            "source": self.src.to_json(),
            "target": self.tgt.to_json(),
            "objects": {c: self.tgt.objects[d] for c, d in zip(self.src.objects, self.on_obj)},
            "morphisms": {self.src.morphisms[f].name: (None if self.tgt.is_identity(g) else self.tgt.morphisms[g].name)
                          for f, g in enumerate(self.on_mor) if not self.src.is_identity(f)},
        }


def identity_functor(C: FiniteCategory) -> FiniteFunctor:
    return FiniteFunctor.from_indices(C, C, range(C.n_objects), range(len(C.morphisms)))


def group_hom_functor(h, CH: FiniteCategory | None = None, CG: FiniteCategory | None = None) -> FiniteFunctor:
    """The functor between one-object groupoid sites induced by a group hom."""
    H, G = h.src, h.tgt
    CH = CH or groupoid_site(H)
    CG = CG or groupoid_site(G)
    on_mor = [0] + [groupoid_morphism(CG, G, h(a)) for a in H if a != H.identity]
    # morphisms of CH are listed in element order, skipping the identity
    order = [0] + [CH.mor_index[element_label(a)] for a in H if a != H.identity]
    full = [0] * len(CH.morphisms)
    for idx, img in zip(order, on_mor):
        full[idx] = img
    return FiniteFunctor.from_indices(CH, CG, [0], full)


@dataclass
class SliceSite:
    """Category of elements of U, with transport of presheaves along it."""

    category: FiniteCategory
    base: FiniteCategory
    U: Presheaf
    points: list[tuple[int, int]]

    def transport(self, X: Presheaf) -> Presheaf:
        """The presheaf (c, u) |-> X(c) on the category of elements."""
        if X.category != self.base:
            raise CategoryMismatch("presheaf is not over the base site")
        E = self.category
        sets = [X.sets[c] for c, _ in self.points]
        restr = [X.restr[self._base_mor[f]] for f in range(len(E.morphisms))]
        return Presheaf(E, sets, restr, check=False)

    def transport_map(self, a: PresheafMap) -> PresheafMap:
        return PresheafMap(self.transport(a.src), self.transport(a.tgt),
                           [a.comps[c] for c, _ in self.points], check=False)


def slice_site(C: FiniteCategory, U: Presheaf) -> SliceSite:
    """Category of elements of U: objects (c, u), morphisms f with U(f)(u') = u."""
    if U.category != C:
        raise CategoryMismatch("U is not over C")
    points = [(c, u) for c in range(C.n_objects) for u in range(U.size(c))]
    pid = {p: k for k, p in enumerate(points)}
    names = [f"({C.objects[c]},{U.sets[c][u]})" for c, u in points]
    mors, base_of = [], {}
    for f in C.non_identity():
        m = C.morphisms[f]
        for u2 in range(U.size(m.tgt)):
            u = U.restr[f][u2]
            nm = f"{m.name}@{U.sets[m.tgt][u2]}"
            mors.append((nm, names[pid[(m.src, u)]], names[pid[(m.tgt, u2)]]))
            base_of[nm] = (f, u2)
    comp = {}
    for (a, b, _), (fa, ua2) in [(x, base_of[x[0]]) for x in mors]:
        for (b2, _, _), (fb, ub2) in [(y, base_of[y[0]]) for y in mors]:
            if C.tgt(fa) == C.src(fb) and U.restr[fb][ub2] == ua2:
                h = C.then(fa, fb)
                comp[(a, b2)] = None if C.is_identity(h) else f"{C.morphisms[h].name}@{U.sets[C.tgt(fb)][ub2]}"
    E = FiniteCategory(names, mors, comp, name="elements")
    S = SliceSite(E, C, U, points)
    S._base_mor = [c for c, _ in points] + [base_of[m.name][0] for m in E.morphisms[len(points):]]
    return S


# --------------------------------------------------------------------------
# canonical forms


def canonical_form(X: Presheaf, cap: int = 100000) -> tuple:
    """Isomorphism invariant: the least relabelled restriction data."""
    C = X.category
    sizes = tuple(X.size(c) for c in range(C.n_objects))
    if math.prod(math.factorial(n) for n in sizes) > cap:
        raise CapExceeded("canonical form relabelling space exceeds cap")
    best = None
    for perms in itertools.product(*(itertools.permutations(range(n)) for n in sizes)):
        key = []
        for f in C.non_identity():
            m = C.morphisms[f]
            r = X.restr[f]
            new = [0] * len(r)
            ps, pt = perms[m.src], perms[m.tgt]
            for x, y in enumerate(r):
                new[pt[x]] = ps[y]
            key.append(tuple(new))
        key = tuple(key)
        if best is None or key < best:
            best = key
    return sizes, best


def presheaf_from_canonical(C: FiniteCategory, form: tuple) -> Presheaf:
    sizes, restr = form
    sets = [[f"{C.objects[c]}{i}" for i in range(n)] for c, n in enumerate(sizes)]
    full = [None] * C.n_objects + list(restr)
    return Presheaf(C, sets, full)


def enumerate_presheaves(C: FiniteCategory, max_total: int, min_total: int = 0,
                         keep: Callable[[Presheaf], bool] | None = None) -> list[Presheaf]:
    """All presheaves with total size in range, up to isomorphism.

    Restriction functions are chosen morphism by morphism with functoriality
    checked as soon as a composable triple is assigned; survivors are
    deduplicated by ``canonical_form``.
    """
    n = C.n_objects
    mors = list(C.non_identity())
    checks: dict[int, list[tuple[int, int, int]]] = {f: [] for f in mors}
    for (f, g), h in C.composable_pairs():
        if C.is_identity(f) or C.is_identity(g):
            continue
        last = max(f, g, h) if not C.is_identity(h) else max(f, g)
        checks[last].append((f, g, h))
    seen: dict[tuple, Presheaf] = {}
    for total in range(min_total, max_total + 1):
        for sizes in _compositions(total, n):
            restr: list = [tuple(range(sizes[c])) for c in range(n)] + [None] * len(mors)

            def search(k: int):
                if k == len(mors):
                    X = Presheaf(C, [[f"{C.objects[c]}{i}" for i in range(sizes[c])] for c in range(n)],
                                 restr, check=False)
                    form = canonical_form(X)
                    if form not in seen:
                        seen[form] = presheaf_from_canonical(C, form)
                    return
                f = mors[k]
                m = C.morphisms[f]
                for r in itertools.product(range(sizes[m.src]), repeat=sizes[m.tgt]):
                    restr[f] = r
                    good = True
                    for (a, b, h) in checks[f]:
                        ra, rb, rh = restr[a], restr[b], restr[h]
                        if any(rh[x] != ra[rb[x]] for x in range(len(rh))):
                            good = False
                            break
                    if good:
                        search(k + 1)
                restr[f] = None

            search(0)
    out = sorted(seen.items(), key=lambda kv: kv[0])
    objs = [X for _, X in out]
    if keep is not None:
        objs = [X for X in objs if keep(X)]
    return objs


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# --------------------------------------------------------------------------
# G-sets on one-object groupoid sites


def gset_presheaf(C: FiniteCategory, G, points: Sequence[str], act: Callable[[int, int], int]) -> Presheaf:
    """Presheaf on ``groupoid_site(G)`` from a left action ``act(g, p)``."""
    restr = [None] * len(C.morphisms)
    restr[0] = list(range(len(points)))
    for g in G:
        if g != G.identity:
            restr[groupoid_morphism(C, G, g)] = [act(g, p) for p in range(len(points))]
    return Presheaf(C, [list(points)], restr)


def regular_presheaf(C: FiniteCategory, G) -> Presheaf:
    """G acting on itself by left multiplication."""
    return gset_presheaf(C, G, [element_label(g) for g in G], lambda g, p: G.mul(g, p))


def coset_presheaf(C: FiniteCategory, G, K) -> Presheaf:
    """Left cosets gK with the left action of G."""
    cosets: list[frozenset[int]] = []
    which: dict[int, int] = {}
    for g in G:
        if g not in which:
            cos = frozenset(G.mul(g, k) for k in K.elements)
            for x in cos:
                which[x] = len(cosets)
            cosets.append(cos)
    names = ["{" + ",".join(element_label(x) for x in sorted(cos)) + "}" for cos in cosets]
    reps = [min(cos) for cos in cosets]
    return gset_presheaf(C, G, names, lambda g, p: which[G.mul(g, reps[p])])
