"""Natural transformation search between finite presheaves.

Components are chosen one element at a time; each choice is pushed along
every restriction (naturality forces the image of ``X(f)(x)``), so a
conflict is detected as soon as it arises.
"""
from __future__ import annotations

from typing import Iterator, Mapping

from .errors import CapExceeded, CategoryMismatch
from .site import Presheaf, PresheafMap

HOM_CAP = 100000


def _search_order(X: Presheaf) -> list[tuple[int, int]]:
    C = X.category
    objs = sorted(range(C.n_objects), key=lambda c: (-len(C.into(c)), c))
    return [(c, i) for c in objs for i in range(X.size(c))]


def iter_homs(X: Presheaf, Y: Presheaf, injective: bool = False,
              fixed: Mapping[tuple[int, int], int] | None = None) -> Iterator[PresheafMap]:
    """Yield every natural transformation X -> Y in a deterministic order.

    ``fixed`` pre-assigns images of chosen elements ``(object, index)``.
    """
    C = X.category
    if Y.category != C:
        raise CategoryMismatch("hom search needs presheaves over one site")
    n = C.n_objects
    if injective and any(X.size(c) > Y.size(c) for c in range(n)):
        return
    if any(X.size(c) and not Y.size(c) for c in range(n)):
        return
    val = [[-1] * X.size(c) for c in range(n)]
    used = [[False] * Y.size(c) for c in range(n)]
    into = [C.into(c) for c in range(n)]
    xr, yr = X.restr, Y.restr
    # where Y(f) is injective, the value at x' is forced by the value at X(f)(x')
    up: list[list[tuple[int, list[list[int]], dict[int, int]]]] = [[] for _ in range(n)]
    for f in C.non_identity():
        if len(set(yr[f])) == len(yr[f]):
            s, t = C.src(f), C.tgt(f)
            pre = [[] for _ in range(X.size(s))]
            for x2, x in enumerate(xr[f]):
                pre[x].append(x2)
            up[s].append((t, pre, {y: y2 for y2, y in enumerate(yr[f])}))

    def assign(c: int, i: int, j: int, trail: list) -> bool:
        stack = [(c, i, j)]
        while stack:
            c, i, j = stack.pop()
            cur = val[c][i]
            if cur == j:
                continue
            if cur != -1:
                return False
            if injective and used[c][j]:
                return False
            val[c][i] = j
            used[c][j] = True
            trail.append((c, i, j))
            for f in into[c]:
                stack.append((C.src(f), xr[f][i], yr[f][j]))
            for t, pre, yinv in up[c]:
                if pre[i]:
                    j2 = yinv.get(j)
                    if j2 is None:
                        return False
                    stack.extend((t, i2, j2) for i2 in pre[i])
        return True

    def undo(trail: list) -> None:
        for c, i, j in trail:
            val[c][i] = -1
            used[c][j] = False

    base: list = []
    for (c, i), j in (fixed or {}).items():
        if not assign(c, i, j, base):
            return
    order = _search_order(X)

    def search(k: int):
        while k < len(order) and val[order[k][0]][order[k][1]] != -1:
            k += 1
        if k == len(order):
            yield PresheafMap(X, Y, [list(v) for v in val], check=False)
            return
        c, i = order[k]
        for j in range(Y.size(c)):
            trail: list = []
            if assign(c, i, j, trail):
                yield from search(k + 1)
            undo(trail)

    yield from search(0)


def hom_set(X: Presheaf, Y: Presheaf, cap: int = HOM_CAP) -> list[PresheafMap]:
    """All natural transformations X -> Y; CapExceeded beyond ``cap``."""
    out = []
    for a in iter_homs(X, Y):
        out.append(a)
        if len(out) > cap:
            raise CapExceeded(f"more than {cap} maps")
    return out


def find_isomorphism(X: Presheaf, Y: Presheaf) -> PresheafMap | None:
    """Some isomorphism X -> Y, or None."""
    if X.category != Y.category:
        return None
    if any(X.size(c) != Y.size(c) for c in range(X.category.n_objects)):
        return None
    return next(iter_homs(X, Y, injective=True), None)


def is_isomorphic_presheaf(X: Presheaf, Y: Presheaf) -> bool:
    return find_isomorphism(X, Y) is not None


def find_epi(X: Presheaf, Y: Presheaf, fixed=None) -> PresheafMap | None:
    """Some levelwise surjective map X -> Y, or None."""
    for a in iter_homs(X, Y, fixed=fixed):
        if a.is_epi():
            return a
    return None
