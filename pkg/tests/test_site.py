import itertools

import pytest
from hypothesis import given, settings, strategies as st

from topospi1.errors import BadComposition, BadNaturality, CategoryMismatch, DanglingName, NotAPresheaf, NotEquivalence
from topospi1.finiteness import connected_components
from topospi1.grp import cyclic_group, symmetric_group
from topospi1.homs import find_isomorphism, hom_set
from topospi1.site import (
    FiniteCategory,
    FiniteFunctor,
    Presheaf,
    PresheafMap,
    arrow_site,
    circle_site,
    coequalizer,
    constant,
    diagonal,
    enumerate_presheaves,
    equalizer,
    global_sections,
    groupoid_site,
    identity_functor,
    identity_map,
    image,
    initial,
    product,
    pullback,
    quotient_by_relation,
    regular_presheaf,
    relation_from_classes,
    representable,
    slice_site,
    square_site,
    sum_,
    support,
    terminal,
    trivial_site,
    validate_category,
    validate_presheaf,
)


def circle_perm(perm_b, names=None):
    """Circle-site presheaf with X(a) = id and X(b) = perm_b on a common fibre."""
    C = circle_site()
    n = len(perm_b)
    names = names or [str(i) for i in range(n)]
    return Presheaf(C, [names, names], [None, None, list(range(n)), list(perm_b)])


def brute_homs(X, Y):
    """All natural families, by trying every tuple of functions."""
    C = X.category
    levels = [list(itertools.product(range(Y.size(c)), repeat=X.size(c))) for c in range(C.n_objects)]
    out = []
    for comps in itertools.product(*levels):
        if all(comps[C.src(f)][X.restr[f][x]] == Y.restr[f][comps[C.tgt(f)][x]]
               for f in C.non_identity() for x in range(X.size(C.tgt(f)))):
            out.append(tuple(tuple(c) for c in comps))
    return out


# --------------------------------------------------------------------------
# categories


def test_standard_sites_validate():
    assert trivial_site().n_objects == 1 and len(trivial_site().morphisms) == 1
    C = circle_site()
    assert [m.name for m in C.morphisms] == ["id_x", "id_y", "a", "b"]
    assert C.is_connected()
    S = square_site()
    f, h, s = (S.mor_index[n] for n in "fhs")
    assert S.then(f, h) == s


def test_json_roundtrip_of_sites():
    for C in (trivial_site(), arrow_site(), circle_site(), square_site(), groupoid_site(symmetric_group(3))):
        D = validate_category(C.to_json())
        assert D == C


def test_missing_composite_is_rejected():
    with pytest.raises(BadComposition):
        FiniteCategory(["x", "y", "z"], [("f", "x", "y"), ("g", "y", "z")])


def test_non_associative_composition_is_rejected():
    # one object, e with e.e = e is fine; e.e = id would make e invertible and e idempotent clash
    with pytest.raises(BadComposition):
        FiniteCategory(["*"], [("e", "*", "*"), ("u", "*", "*")],
                       {("e", "e"): "e", ("e", "u"): "u", ("u", "e"): "e", ("u", "u"): None})


def test_dangling_names():
    with pytest.raises(DanglingName):
        FiniteCategory(["x"], [("f", "x", "q")])
    with pytest.raises(DanglingName):
        validate_category({"objects": ["x"], "morphisms": [{"name": "f", "src": "x"}]})


def test_involution_needs_invertible_restriction():
    C = groupoid_site(cyclic_group(2))
    with pytest.raises(BadNaturality):
        Presheaf(C, [["p", "q"]], [None, [0, 0]])


def test_presheaf_validation_errors():
    C = circle_site()
    with pytest.raises(NotAPresheaf):
        validate_presheaf({"sets": {"x": [], "y": ["u"]}, "restrictions": {"a": {"u": "v"}, "b": {"u": "v"}}}, C)
    with pytest.raises(NotAPresheaf):
        validate_presheaf({"sets": {"x": ["p"], "y": ["u"]}, "restrictions": {"a": {"u": "p"}}}, C)
    with pytest.raises(DanglingName):
        validate_presheaf({"sets": {"z": []}}, C)


# --------------------------------------------------------------------------
# limits and colimits


def test_product_with_terminal_and_self_equalizer():
    X = circle_perm([1, 2, 0])
    P = product(X, terminal(X.category))
    assert find_isomorphism(P.obj, X) is not None
    f = identity_map(X)
    E, inc = equalizer(f, f)
    assert inc.is_iso()


def test_product_of_two_circle_objects_splits():
    swap, ident = circle_perm([1, 0]), circle_perm([0, 1])
    P = product(swap, ident).obj
    assert P.total_size == 8 and P.size(0) == 4
    dec = connected_components(P)
    assert len(dec) == 2
    assert all(part.size() == 4 for part in dec.parts)


def test_sum_with_initial_and_codiagonal_coequalizer():
    X = circle_perm([1, 0])
    S = sum_(X, initial(X.category))
    assert find_isomorphism(S.obj, X) is not None
    XX = sum_(X, X)
    Q, q = coequalizer(XX.i1, XX.i2)
    assert find_isomorphism(Q, X) is not None
    assert q.is_epi()


def test_image_of_constant_map():
    C = trivial_site()
    A, B = constant(C, ["1", "2", "3"]), constant(C, ["p", "q"])
    f = PresheafMap(A, B, [[1, 1, 1]])
    S = image(f)
    assert S.chosen == (frozenset({1}),)


def test_constants_and_global_sections():
    C = circle_site()
    assert initial(C) == constant(C, [])
    assert len(global_sections(terminal(C))) == 1
    assert global_sections(circle_perm([1, 0])) == []
    assert len(global_sections(circle_perm([0, 1]))) == 2


def test_support():
    C = arrow_site()
    assert all(not s for s in support(initial(C)).chosen)
    assert support(terminal(C)).is_full()


def test_pullback_over_terminal_is_product():
    X, Y = circle_perm([1, 0]), circle_perm([1, 2, 0])
    T = terminal(X.category)
    to_t = lambda Z: PresheafMap(Z, T, [[0] * Z.size(c) for c in range(2)])
    Pb, p1, p2 = pullback(to_t(X), to_t(Y))
    assert find_isomorphism(Pb, product(X, Y).obj) is not None


# --------------------------------------------------------------------------
# relations and quotients


def test_quotients_by_extreme_relations():
    X = circle_perm([1, 2, 0])
    Q, q = quotient_by_relation(X, diagonal(X))
    assert q.is_iso()
    Q, q = quotient_by_relation(X, relation_from_classes(X, [[0, 0, 0], [0, 0, 0]]))
    assert [Q.size(c) for c in range(2)] == [1, 1]


def test_arrow_quotient_collapsing_one_pair():
    C = arrow_site()
    X = validate_presheaf({"sets": {"x": ["a", "b"], "y": ["c", "d"]},
                           "restrictions": {"f": {"c": "a", "d": "b"}}}, C)
    # identify a ~ b at x only
    R = relation_from_classes(X, [[0, 0], [0, 1]])
    Q, q = quotient_by_relation(X, R)
    assert [Q.size(c) for c in range(2)] == [1, 2]
    assert list(Q.sets[0]) == ["a"]


def test_non_equivalence_rejected():
    X = constant(trivial_site(), ["a", "b"])
    pr = product(X, X)
    from topospi1.site import SubPresheaf

    R = SubPresheaf(pr.obj, [{pr.pair_index(0, 0, 1)}])
    with pytest.raises(NotEquivalence):
        quotient_by_relation(X, R)


# --------------------------------------------------------------------------
# slices


def test_slice_examples():
    C = square_site()
    S = slice_site(C, terminal(C))
    assert S.category.n_objects == C.n_objects
    assert len(S.category.morphisms) == len(C.morphisms)
    d = C.obj_index["d"]
    R = slice_site(C, representable(C, d))
    E = R.category
    # (d, id_d) is terminal: exactly one morphism into it from every object
    top = next(k for k, (c, u) in enumerate(R.points) if c == d and R.U.sets[c][u] == "id_d")
    assert all(len(E.hom(k, top)) == 1 for k in range(E.n_objects))
    two = slice_site(C, constant(C, ["0", "1"]))
    assert len(two.category.object_components()) == 2


def test_transport_is_levelwise():
    C = circle_site()
    X = circle_perm([1, 2, 0])
    U = circle_perm([1, 0])
    S = slice_site(C, U)
    T = S.transport(X)
    assert T.total_size == 2 * X.total_size
    with pytest.raises(CategoryMismatch):
        S.transport(terminal(arrow_site()))


# --------------------------------------------------------------------------
# functors


def test_functor_restriction():
    C = circle_site()
    u = FiniteFunctor(C, C, {"x": "x", "y": "y"}, {"a": "a", "b": "a"})
    X = circle_perm([1, 2, 0])
    Y = u.restrict(X)
    assert Y.restr[3] == Y.restr[2]
    assert identity_functor(C).restrict(X) == X


def test_bad_functor_rejected():
    from topospi1.errors import NotAFunctor

    with pytest.raises((NotAFunctor, DanglingName)):
        FiniteFunctor(arrow_site(), circle_site(), {"x": "y", "y": "x"}, {"f": "a"})


# --------------------------------------------------------------------------
# enumeration and hom search against brute force


def _p(n, k, largest):
    """Partitions of n into at most k parts, each at most largest."""
    if n == 0:
        return 1
    if k == 0:
        return 0
    return sum(_p(n - part, k - 1, part) for part in range(1, min(n, largest) + 1))


@pytest.mark.parametrize("total", [0, 1, 2, 3, 4, 5, 6])
def test_arrow_enumeration_counts(total):
    # iso classes of maps B -> A: multisets of fibre sizes = partitions of |B| into <= |A| parts
    expected = sum(_p(b, a, b) for a in range(total + 1) for b in range(total + 1 - a) if a or not b)
    assert len(enumerate_presheaves(arrow_site(), total)) == expected


def _brute_classes(C, total):
    forms = set()
    n = C.n_objects
    mors = list(C.non_identity())
    for sizes in itertools.product(range(total + 1), repeat=n):
        if sum(sizes) > total:
            continue
        choices = [list(itertools.product(range(sizes[C.src(f)]), repeat=sizes[C.tgt(f)])) for f in mors]
        for rs in itertools.product(*choices):
            restr = [None] * n + [list(r) for r in rs]
            try:
                X = Presheaf(C, [[str(i) for i in range(s)] for s in sizes], restr)
            except BadNaturality:
                continue
            best = None
            for perms in itertools.product(*(itertools.permutations(range(s)) for s in sizes)):
                key = tuple(tuple(perms[C.src(f)][X.restr[f][perms[C.tgt(f)].index(x)]] for x in range(sizes[C.tgt(f)]))
                            for f in mors)
                best = key if best is None or key < best else best
            forms.add((sizes, best))
    return forms


@pytest.mark.parametrize("site,total", [(circle_site, 4), (square_site, 3), (lambda: groupoid_site(cyclic_group(2)), 4)])
def test_enumeration_matches_brute_force(site, total):
    C = site()
    assert len(enumerate_presheaves(C, total)) == len(_brute_classes(C, total))


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(3)), st.permutations(range(2)), st.integers(0, 3))
def test_hom_search_matches_brute_force(p, q, k):
    X = circle_perm(p)
    Y = circle_perm(list(q) + list(range(2, 2 + k)))
    fast = sorted(tuple(tuple(c) for c in m.comps) for m in hom_set(X, Y))
    assert fast == sorted(brute_homs(X, Y))


def test_hom_set_examples():
    C = trivial_site()
    assert len(hom_set(constant(C, "ab"), constant(C, "pqr"))) == 9
    X = circle_perm([1, 2, 0])
    assert len(hom_set(X, terminal(X.category))) == 1
    assert len(hom_set(initial(X.category), X)) == 1


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([cyclic_group(3), symmetric_group(3)]), st.data())
def test_relabelling_gives_isomorphic_presheaf(G, data):
    C = groupoid_site(G)
    X = regular_presheaf(C, G)
    perm = data.draw(st.permutations(range(X.size(0))))
    Y = X.relabel([list(perm)])
    iso = find_isomorphism(X, Y)
    assert iso is not None and iso.is_iso()


def test_sum_and_product_sizes():
    C = square_site()
    X, Y = representable(C, 3), terminal(C)
    for c in range(C.n_objects):
        assert product(X, Y).obj.size(c) == X.size(c) * Y.size(c)
        assert sum_(X, Y).obj.size(c) == X.size(c) + Y.size(c)
