"""Exact finite group theory on multiplication tables.

Elements of a group of order n are the integers 0..n-1 and the group law is
``table[a, b]``.  Permutations are tuples of images (0-based).  Permutation
groups and presented groups act on the *right*: ``p . (g h) = (p . g) . h``,
so the product of two permutations ``g * h`` means "first g, then h".
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CapExceeded,
    DanglingName,
    IncompatibleSystem,
    NoIdentity,
    NoInverse,
    NotASubgroup,
    NotAssociative,
    NotLatinSquare,
    NotNormal,
)

SUBGROUP_CAP = 64
ISO_CAP = 256
DEGREE_CAP = 6
LIMIT_CAP = 10**6
PERM_GROUP_CAP = 20000


class FiniteGroup:
    """A finite group on ``range(order)`` given by its multiplication table."""

    def __init__(self, table, identity: int = 0, name: str | None = None):
        t = np.array(table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise NotLatinSquare("table must be a non-empty square array")
        t.setflags(write=False)
        self.table = t
        self.rows: list[list[int]] = t.tolist()
        self.identity = int(identity)
        self.name = name
        self._inverse: list[int] | None = None
        self._gens: tuple[int, ...] | None = None

    @property
    def order(self) -> int:
        return len(self.rows)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(range(len(self.rows)))

    def __eq__(self, other):
        return (
            isinstance(other, FiniteGroup)
            and self.identity == other.identity
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.identity, self.table.tobytes()))

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<FiniteGroup{label} of order {self.order}>"

    def mul(self, a: int, b: int) -> int:
        return self.rows[a][b]

    def inv(self, a: int) -> int:
        if self._inverse is None:
            e = self.identity
            self._inverse = [row.index(e) for row in self.rows]
        return self._inverse[a]

    def product(self, elements: Iterable[int]) -> int:
        x = self.identity
        for g in elements:
            x = self.rows[x][g]
        return x

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        x = self.identity
        for _ in range(k):
            x = self.rows[x][a]
        return x

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.rows[x][a]
            k += 1
        return k

    def conjugate(self, g: int, a: int) -> int:
        """Return ``g a g^-1``."""
        return self.rows[self.rows[g][a]][self.inv(g)]

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def generated(self, gens: Iterable[int]) -> frozenset[int]:
        """The subgroup generated by ``gens`` as a set of elements."""
        gens = list(dict.fromkeys(gens))
        seen = {self.identity}
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            row = self.rows[x]
            for g in gens:
                y = row[g]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return frozenset(seen)

    def generating_set(self) -> list[int]:
        """A small deterministic generating set, elements of large order first."""
        if self._gens is not None:
            return list(self._gens)
        order = sorted(self, key=lambda a: (-self.element_order(a), a))
        gens: list[int] = []
        closure = frozenset({self.identity})
        for a in order:
            if a not in closure:
                gens.append(a)
                closure = self.generated(gens)
                if len(closure) == self.order:
                    break
        self._gens = tuple(gens)
        return gens

    def is_cyclic(self) -> bool:
        return any(self.element_order(a) == self.order for a in self)

    def to_json(self) -> dict:
        return {"table": self.rows}


def validate_group(table, name: str | None = None) -> FiniteGroup:
    """Check the group axioms on a raw square table and build the group.

    Raises the error naming the first violated axiom, in the order
    Latin square, identity, inverses, associativity.
    """
    try:
        t = np.array(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise NotLatinSquare(f"table is not a square integer array: {exc}") from None
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
        raise NotLatinSquare("table must be a non-empty square array")
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        raise NotLatinSquare(f"entries must lie in 0..{n - 1}")
    full = np.arange(n)
    for a in range(n):
        if not np.array_equal(np.sort(t[a]), full):
            raise NotLatinSquare(f"row {a} is not a permutation")
        if not np.array_equal(np.sort(t[:, a]), full):
            raise NotLatinSquare(f"column {a} is not a permutation")
    identity = None
    for e in range(n):
        if np.array_equal(t[e], full) and np.array_equal(t[:, e], full):
            identity = e
            break
    if identity is None:
        raise NoIdentity("no two-sided identity element")
    for a in range(n):
        b = int(np.nonzero(t[a] == identity)[0][0])
        if t[b, a] != identity:
            raise NoInverse(f"element {a} has right inverse {b} which is not a left inverse")
    left = t[t[:, :, None], full[None, None, :]]
    right = t[full[:, None, None], t[None, :, :]]
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = (int(v) for v in bad[0])
        raise NotAssociative(f"(a*b)*c != a*(b*c) for (a, b, c) = ({a}, {b}, {c})", triple=[a, b, c])
    return FiniteGroup(t, identity, name=name)


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup = field(compare=False, repr=False)
    elements: tuple[int, ...]

    def __len__(self):
        return len(self.elements)

    def __contains__(self, a):
        return a in self.elementset

    @property
    def elementset(self) -> frozenset[int]:
        return frozenset(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self) -> int:
        return self.parent.order // len(self.elements)

    def is_normal(self) -> bool:
        G, S = self.parent, self.elementset
        return all(G.conjugate(g, k) in S for g in G.generating_set() for k in self.elements)


def make_subgroup(G: FiniteGroup, elements: Iterable[int]) -> Subgroup:
    """Wrap a set of elements as a Subgroup after checking closure."""
    S = frozenset(int(x) for x in elements)
    if G.identity not in S:
        raise NotASubgroup("subset does not contain the identity")
    for a in S:
        if G.inv(a) not in S:
            raise NotASubgroup(f"not closed under inverse at {a}")
        for b in S:
            if G.mul(a, b) not in S:
                raise NotASubgroup(f"not closed under product at ({a}, {b})")
    return Subgroup(G, tuple(sorted(S)))


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (G.identity,))


def whole_group(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, tuple(range(G.order)))


def subgroups(G: FiniteGroup, cap: int = SUBGROUP_CAP) -> list[Subgroup]:
    """All subgroups of G, sorted by size then lexicographically."""
    if G.order > cap:
        raise CapExceeded(f"group order {G.order} exceeds subgroup cap {cap}")
    cyclic = {G.generated([g]) for g in G}
    found = set(cyclic)
    frontier = list(found)
    while frontier:
        fresh = []
        for S in frontier:
            for C in cyclic:
                if not C <= S:
                    J = G.generated(S | C)
                    if J not in found:
                        found.add(J)
                        fresh.append(J)
        frontier = fresh
    return sorted((Subgroup(G, tuple(sorted(S))) for S in found), key=lambda s: (len(s), s.elements))


def normal_subgroups(G: FiniteGroup, cap: int = SUBGROUP_CAP) -> list[Subgroup]:
    return [S for S in subgroups(G, cap) if S.is_normal()]


def normal_core(G: FiniteGroup, K: Subgroup) -> Subgroup:
    """Largest normal subgroup of G inside K: the intersection of all conjugates."""
    K = make_subgroup(G, K.elements)
    core = K.elementset
    for g in G:
        core = core & {G.conjugate(g, k) for k in K.elements}
    return Subgroup(G, tuple(sorted(core)))


@dataclass(frozen=True)
class GroupHom:
    src: FiniteGroup = field(repr=False)
    tgt: FiniteGroup = field(repr=False)
    map: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.map[a]

    def is_homomorphism(self) -> bool:
        G, H, f = self.src, self.tgt, self.map
        if f[G.identity] != H.identity:
            return False
        gens = G.generating_set()
        return all(f[G.mul(x, s)] == H.mul(f[x], f[s]) for x in G for s in gens)

    def image(self) -> Subgroup:
        return Subgroup(self.tgt, tuple(sorted(set(self.map))))

    def kernel(self) -> Subgroup:
        e = self.tgt.identity
        return Subgroup(self.src, tuple(x for x in self.src if self.map[x] == e))

    def is_surjective(self) -> bool:
        return len(set(self.map)) == self.tgt.order

    def is_injective(self) -> bool:
        return len(set(self.map)) == self.src.order

    def is_isomorphism(self) -> bool:
        return self.src.order == self.tgt.order and self.is_injective()

    def then(self, other: "GroupHom") -> "GroupHom":
        """Composite ``other o self``."""
        return GroupHom(self.src, other.tgt, tuple(other.map[y] for y in self.map))

    def inverse(self) -> "GroupHom":
        inv = [0] * len(self.map)
        for x, y in enumerate(self.map):
            inv[y] = x
        return GroupHom(self.tgt, self.src, tuple(inv))


def identity_hom(G: FiniteGroup) -> GroupHom:
    return GroupHom(G, G, tuple(range(G.order)))


def quotient(G: FiniteGroup, N: Subgroup) -> tuple[FiniteGroup, GroupHom]:
    """The quotient G/N on cosets ordered by least representative."""
    N = make_subgroup(G, N.elements)
    if not N.is_normal():
        raise NotNormal("subgroup is not normal")
    coset_of: dict[int, int] = {}
    reps: list[int] = []
    for g in G:
        if g not in coset_of:
            idx = len(reps)
            reps.append(g)
            for n in N.elements:
                coset_of[G.mul(g, n)] = idx
    table = [[coset_of[G.mul(a, b)] for b in reps] for a in reps]
    Q = FiniteGroup(table, coset_of[G.identity])
    hom = GroupHom(G, Q, tuple(coset_of[g] for g in G))
    assert hom.is_surjective() and hom.kernel().elements == N.elements
    return Q, hom


def _cayley_extend(G: FiniteGroup, H: FiniteGroup, gens, images, injective: bool):
    """Extend gens -> images along the Cayley graph of <gens>.

    Returns a dict on the generated subgroup or None when the assignment
    is not a well-defined (injective, if asked) homomorphism.
    """
    img = {G.identity: H.identity}
    used = {H.identity}
    queue = deque([G.identity])
    while queue:
        x = queue.popleft()
        for g, h in zip(gens, images):
            y = G.mul(x, g)
            z = H.mul(img[x], h)
            if y in img:
                if img[y] != z:
                    return None
            else:
                if injective and z in used:
                    return None
                img[y] = z
                used.add(z)
                queue.append(y)
    return img


def extend_hom(G: FiniteGroup, H: FiniteGroup, gens, images) -> GroupHom | None:
    """The homomorphism G -> H sending gens to images, if it exists.

    ``gens`` must generate G.
    """
    img = _cayley_extend(G, H, list(gens), list(images), injective=False)
    if img is None or len(img) != G.order:
        return None
    return GroupHom(G, H, tuple(img[x] for x in G))


def is_isomorphic(G: FiniteGroup, H: FiniteGroup, cap: int = ISO_CAP) -> GroupHom | None:
    """Search for an isomorphism G -> H by backtracking on generator images."""
    if max(G.order, H.order) > cap:
        raise CapExceeded(f"isomorphism search above order cap {cap}")
    if G.order != H.order:
        return None
    ordG = [G.element_order(a) for a in G]
    ordH = [H.element_order(a) for a in H]
    if sorted(ordG) != sorted(ordH):
        return None
    gens = G.generating_set()
    by_order: dict[int, list[int]] = {}
    for b in H:
        by_order.setdefault(ordH[b], []).append(b)

    def search(k: int, chosen: list[int]):
        if k == len(gens):
            img = _cayley_extend(G, H, gens, chosen, injective=True)
            if img is not None and len(img) == G.order:
                return GroupHom(G, H, tuple(img[x] for x in G))
            return None
        for b in by_order.get(ordG[gens[k]], []):
            trial = chosen + [b]
            if _cayley_extend(G, H, gens[: k + 1], trial, injective=True) is None:
                continue
            found = search(k + 1, trial)
            if found is not None:
                return found
        return None

    return search(0, [])


# --------------------------------------------------------------------------
# permutation groups


def perm_then(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """First p, then q."""
    return tuple(q[x] for x in p)


def perm_inverse(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return tuple(inv)


def permutation_group(gens: Sequence[Sequence[int]], degree: int | None = None,
                      cap: int = PERM_GROUP_CAP) -> tuple[FiniteGroup, list[tuple[int, ...]]]:
    """Closure of permutation generators, as a table group plus its elements.

    Element 0 is the identity, the rest follow breadth-first order from the
    generators.  The group law is ``perm_then``.
    """
    gens = [tuple(g) for g in gens]
    if degree is None:
        degree = len(gens[0]) if gens else 0
    e = tuple(range(degree))
    elements = [e]
    index = {e: 0}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = perm_then(x, g)
            if y not in index:
                if len(elements) >= cap:
                    raise CapExceeded(f"permutation group larger than cap {cap}")
                index[y] = len(elements)
                elements.append(y)
                queue.append(y)
    table = [[index[perm_then(a, b)] for b in elements] for a in elements]
    return FiniteGroup(table, 0), elements


def regular_permutations(G: FiniteGroup) -> list[tuple[int, ...]]:
    """Right regular representation: g acts by x -> x g."""
    return [tuple(G.mul(x, g) for x in G) for g in G]


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], 0, name=f"C{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    m = H.order
    table = [[G.mul(a // m, b // m) * m + H.mul(a % m, b % m) for b in range(G.order * m)]
             for a in range(G.order * m)]
    name = f"{G.name}x{H.name}" if G.name and H.name else None
    return FiniteGroup(table, G.identity * m + H.identity, name=name)


def symmetric_group(n: int) -> FiniteGroup:
    if n <= 1:
        return FiniteGroup([[0]], 0, name=f"S{n}")
    gens = [tuple([1, 0] + list(range(2, n))), tuple(list(range(1, n)) + [0])]
    G, _ = permutation_group(gens, n)
    G.name = f"S{n}"
    return G


def dihedral_group(n: int) -> FiniteGroup:
    """Symmetries of the n-gon (order 2n)."""
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    G, _ = permutation_group([rot, ref], n)
    G.name = f"D{n}"
    return G


def quaternion_group() -> FiniteGroup:
    # regular representation of Q8 on {1,-1,i,-i,j,-j,k,-k}
    i = (2, 3, 1, 0, 7, 6, 4, 5)
    j = (4, 5, 6, 7, 1, 0, 3, 2)
    G, _ = permutation_group([i, j], 8)
    G.name = "Q8"
    return G


_SMALL_GROUP_COUNTS = {1: 1, 2: 1, 3: 1, 4: 2, 5: 1, 6: 2, 7: 1, 8: 5}


def small_groups(max_order: int = 8) -> list[FiniteGroup]:
    """All groups of order <= max_order (at most 8) up to isomorphism.

    Candidates come from closures of permutation generators (cyclic groups,
    products, dihedral groups, Q8); duplicates are removed with
    ``is_isomorphic``.  The result is checked against the known counts.
    """
    if max_order > 8:
        raise CapExceeded("small group catalogue only covers orders <= 8")
    candidates: list[FiniteGroup] = [FiniteGroup([[0]], 0, name="C1")]
    for n in range(2, 9):
        candidates.append(cyclic_group(n))
    c2, c3, c4 = cyclic_group(2), cyclic_group(3), cyclic_group(4)
    candidates += [
        direct_product(c2, c2),
        direct_product(c2, c3),
        dihedral_group(3),
        symmetric_group(3),
        direct_product(c4, c2),
        direct_product(direct_product(c2, c2), c2),
        dihedral_group(4),
        quaternion_group(),
    ]
    groups: list[FiniteGroup] = []
    for G in sorted(candidates, key=lambda g: g.order):
        if G.order > max_order:
            continue
        if any(H.order == G.order and is_isomorphic(G, H) for H in groups):
            continue
        groups.append(G)
    for n in range(1, max_order + 1):
        found = sum(1 for G in groups if G.order == n)
        assert found == _SMALL_GROUP_COUNTS[n], (n, found)
    return groups


# --------------------------------------------------------------------------
# finitely presented groups and low-index enumeration

Word = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FinitePresentation:
    """Generators plus relators; a letter is ``(generator index, +1 | -1)``."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()

    @classmethod
    def parse(cls, generators: Sequence[str], relators: Sequence[str] = ()) -> "FinitePresentation":
        gens = tuple(generators)
        if len(set(gens)) != len(gens):
            raise DanglingName("duplicate generator names")
        index = {g: i for i, g in enumerate(gens)}
        return cls(gens, tuple(parse_word(r, index) for r in relators))

    def word_str(self, w: Word) -> str:
        return " ".join(("~" if e < 0 else "") + self.generators[g] for g, e in w)

    def to_json(self) -> dict:
        return {"generators": list(self.generators), "relators": [self.word_str(r) for r in self.relators]}


def parse_word(text: str, index: dict[str, int]) -> Word:
    letters = []
    for tok in text.split():
        inverse = tok.startswith("~")
        name = tok[1:] if inverse else tok
        if name not in index:
            raise DanglingName(f"letter {tok!r} names no declared generator")
        letters.append((index[name], -1 if inverse else 1))
    return tuple(letters)


def evaluate_word(G: FiniteGroup, images: Sequence[int], w: Word) -> int:
    x = G.identity
    for g, e in w:
        x = G.mul(x, images[g] if e > 0 else G.inv(images[g]))
    return x


@dataclass(frozen=True)
class PermAction:
    """A transitive right action of a presented group on ``range(degree)``.

    ``perms[i][p]`` is ``p . generator_i``; point 0 is the basepoint.
    """

    degree: int
    perms: tuple[tuple[int, ...], ...]

    def act(self, p: int, w: Word) -> int:
        for g, e in w:
            p = self.perms[g][p] if e > 0 else self.perms[g].index(p)
        return p


def standardize(perms: Sequence[Sequence[int]], base: int = 0) -> tuple[tuple[int, ...], ...]:
    """Breadth-first relabelling from ``base`` (coset-table standard form).

    Two transitive actions are conjugate by a basepoint-preserving bijection
    iff their standard forms coincide.
    """
    inverses = [perm_inverse(p) for p in perms]
    label = {base: 0}
    order = [base]
    k = 0
    while k < len(order):
        x = order[k]
        k += 1
        for p, q in zip(perms, inverses):
            for y in (p[x], q[x]):
                if y not in label:
                    label[y] = len(order)
                    order.append(y)
    n = len(order)
    return tuple(tuple(label[p[order[i]]] for i in range(n)) for p in perms)


def _scan_close(table: list[list[int]], rels: list[list[int]]) -> bool:
    """Apply relator deductions until stable; False on a contradiction."""
    changed = True
    while changed:
        changed = False
        for r in rels:
            L = len(r)
            for c in range(len(table)):
                f, i = c, 0
                while i < L and table[f][r[i]] >= 0:
                    f = table[f][r[i]]
                    i += 1
                if i == L:
                    if f != c:
                        return False
                    continue
                b, j = c, L - 1
                while j >= i and table[b][r[j] ^ 1] >= 0:
                    b = table[b][r[j] ^ 1]
                    j -= 1
                if j < i:
                    if f != b:
                        return False
                elif j == i:
                    table[f][r[i]] = b
                    table[b][r[i] ^ 1] = f
                    changed = True
    return True


def low_index_reps(P: FinitePresentation, d: int, cap: int = DEGREE_CAP) -> list[PermAction]:
    """All transitive actions of degree <= d up to basepoint-preserving conjugacy.

    Coset tables are filled in scan order, new points are numbered in order of
    definition and relators are enforced by scanning, so each complete table
    is in standard form and each class appears exactly once.  Output is sorted
    by degree, then by the permutation tuples.
    """
    if d > cap:
        raise CapExceeded(f"degree bound {d} exceeds cap {cap}")
    if d < 1:
        return []
    ngen = len(P.generators)
    ncols = 2 * ngen
    rels = [[2 * g + (0 if e > 0 else 1) for g, e in r] for r in P.relators if r]
    found: dict[tuple, PermAction] = {}

    def search(table: list[list[int]]):
        if not _scan_close(table, rels):
            return
        for c, row in enumerate(table):
            if -1 in row:
                col = row.index(-1)
                break
        else:
            perms = tuple(tuple(table[c][2 * g] for c in range(len(table))) for g in range(ngen))
            key = standardize(perms)
            found.setdefault((len(table), key), PermAction(len(table), key))
            return
        n = len(table)
        for j in range(n):
            if table[j][col ^ 1] < 0:
                t2 = [r[:] for r in table]
                t2[c][col] = j
                t2[j][col ^ 1] = c
                search(t2)
        if n < d:
            t2 = [r[:] for r in table] + [[-1] * ncols]
            t2[c][col] = n
            t2[n][col ^ 1] = c
            search(t2)

    search([[-1] * ncols])
    return [found[k] for k in sorted(found)]


@dataclass
class Completion:
    """Quotient of a presented group by the kernels of all degree <= bound actions."""

    group: FiniteGroup
    generator_images: tuple[int, ...]
    bound: int
    actions: list[PermAction]
    elements: list[tuple[int, ...]]

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "order": self.group.order,
            "group": self.group.to_json(),
            "generator_images": list(self.generator_images),
            "action_degrees": [a.degree for a in self.actions],
        }


def truncated_completion(P: FinitePresentation, d: int, cap: int = DEGREE_CAP) -> Completion:
    """Image of the presented group acting on all its coset spaces of index <= d."""
    reps = low_index_reps(P, d, cap)
    total = sum(a.degree for a in reps)
    combined = []
    for g in range(len(P.generators)):
        perm: list[int] = []
        offset = 0
        for a in reps:
            perm.extend(offset + x for x in a.perms[g])
            offset += a.degree
        combined.append(tuple(perm))
    G, elements = permutation_group(combined, total)
    index = {p: i for i, p in enumerate(elements)}
    gen_images = tuple(index[p] for p in combined)
    return Completion(G, gen_images, d, reps, elements)


# --------------------------------------------------------------------------
# inverse systems


@dataclass
class GroupSystem:
    """A finite diagram of finite groups over a poset, with surjective edges.

    ``edges[(a, b)]`` is the epimorphism ``group_at[b] -> group_at[a]`` for
    each relation ``a <= b`` with ``a != b``.
    """

    nodes: tuple
    group_at: dict
    edges: dict

    def uppers(self, a) -> list:
        return [b for (x, b) in self.edges if x == a]

    def is_codirected(self) -> bool:
        above = {a: {a} | set(self.uppers(a)) for a in self.nodes}
        return all(above[a] & above[b] for a in self.nodes for b in self.nodes)

    def validate(self, require_codirected: bool = False) -> None:
        nodeset = set(self.nodes)
        for (a, b), h in self.edges.items():
            if a not in nodeset or b not in nodeset:
                raise IncompatibleSystem(f"edge ({a}, {b}) mentions an unknown node")
            if h.src is not self.group_at[b] and h.src != self.group_at[b]:
                raise IncompatibleSystem(f"edge ({a}, {b}) has the wrong source")
            if h.tgt is not self.group_at[a] and h.tgt != self.group_at[a]:
                raise IncompatibleSystem(f"edge ({a}, {b}) has the wrong target")
            if not h.is_surjective():
                raise IncompatibleSystem(f"edge ({a}, {b}) is not surjective")
            if not h.is_homomorphism():
                raise IncompatibleSystem(f"edge ({a}, {b}) is not a homomorphism")
        for (a, b), h in self.edges.items():
            for (b2, c), k in self.edges.items():
                if b2 != b:
                    continue
                if a == c:
                    raise IncompatibleSystem(f"relation between {a} and {b} is not antisymmetric")
                if (a, c) not in self.edges:
                    raise IncompatibleSystem(f"missing transitive edge ({a}, {c})")
                if k.then(h).map != self.edges[(a, c)].map:
                    raise IncompatibleSystem(f"edges fail functoriality along {a} <= {b} <= {c}")
        if require_codirected and not self.is_codirected():
            raise IncompatibleSystem("system is not codirected")


@dataclass
class SystemLimit:
    group: FiniteGroup
    nodes: tuple
    families: list[tuple[int, ...]]
    projections: dict

    def element_of(self, family: Sequence[int]) -> int:
        return self._index[tuple(family)]

    def __post_init__(self):
        self._index = {f: i for i, f in enumerate(self.families)}


def system_limit(S: GroupSystem, cap: int = LIMIT_CAP) -> SystemLimit:
    """Compatible families of the system, as a group with projections.

    Nodes are visited from the top down; a node below an assigned node takes
    the forced value, so only maximal nodes are branched on.  ``cap`` bounds
    the number of compatible families.
    """
    S.validate()
    nodes = list(S.nodes)
    depth = {a: len(S.uppers(a)) for a in nodes}
    order = sorted(range(len(nodes)), key=lambda i: (depth[nodes[i]], i))
    pos = {nodes[i]: k for k, i in enumerate(order)}
    ups = [[(pos[b], S.edges[(nodes[i], b)]) for b in S.uppers(nodes[i])] for i in order]
    groups = [S.group_at[nodes[i]] for i in order]
    families: list[tuple[int, ...]] = []
    current = [0] * len(order)

    def search(k: int):
        if k == len(order):
            if len(families) >= cap:
                raise CapExceeded(f"inverse limit larger than cap {cap}")
            families.append(tuple(current))
            return
        forced = None
        for j, h in ups[k]:
            v = h.map[current[j]]
            if forced is None:
                forced = v
            elif forced != v:
                return
        choices = range(groups[k].order) if forced is None else (forced,)
        for x in choices:
            current[k] = x
            search(k + 1)

    search(0)
    # reorder family coordinates back to node order
    back = [pos[a] for a in nodes]
    fams = sorted(tuple(f[back[i]] for i in range(len(nodes))) for f in families)
    node_groups = [S.group_at[a] for a in nodes]
    index = {f: i for i, f in enumerate(fams)}
    table = [[index[tuple(G.mul(x, y) for G, x, y in zip(node_groups, f, g))] for g in fams] for f in fams]
    ident = index[tuple(G.identity for G in node_groups)]
    L = FiniteGroup(table, ident)
    projections = {a: GroupHom(L, S.group_at[a], tuple(f[i] for f in fams)) for i, a in enumerate(nodes)}
    return SystemLimit(L, tuple(nodes), fams, projections)


def lcm_upto(m: int) -> int:
    return math.lcm(*range(1, m + 1)) if m >= 1 else 1
