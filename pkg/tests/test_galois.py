import pytest
from hypothesis import given, settings, strategies as st

from topospi1.errors import NotLocallyConstant, SiteNotConnected
from topospi1.finiteness import connected_components
from topospi1.galois import (
    aut_group,
    epi_count,
    fibre,
    galois_covering,
    galois_covering_by_definition,
    is_galois,
    monodromy,
    monodromy_iso,
    presheaf_from_monodromy,
    reconstruct,
    reconstruct_fibre,
    spanning_tree,
)
from topospi1.grp import cyclic_group, small_groups, subgroups, symmetric_group
from topospi1.homs import find_isomorphism, hom_set
from topospi1.site import (
    FiniteCategory,
    Presheaf,
    arrow_site,
    circle_site,
    constant,
    coset_presheaf,
    groupoid_site,
    terminal,
    regular_presheaf,
    square_site,
    sum_,
    trivial_site,
)


def circle_perm(perm_b):
    C = circle_site()
    n = len(perm_b)
    names = [str(i) for i in range(n)]
    return Presheaf(C, [names, names], [None, None, list(range(n)), list(perm_b)])


def s3_coset():
    G = symmetric_group(3)
    C = groupoid_site(G)
    K = next(K for K in subgroups(G) if K.order == 2)
    return G, C, coset_presheaf(C, G, K)


# --------------------------------------------------------------------------
# automorphisms


def test_aut_examples():
    assert aut_group(terminal(circle_site())).group.order == 1
    A = aut_group(constant(trivial_site(), "ab"))
    assert A.group.order == 2
    Z3 = aut_group(circle_perm([1, 2, 0]))
    assert Z3.group.order == 3 and Z3.group.is_cyclic()


@settings(max_examples=25, deadline=None)
@given(st.permutations(range(4)))
def test_aut_group_is_the_centralizer(p):
    # equivariant bijections of a Z-set = permutations commuting with the generator
    import itertools

    X = circle_perm(p)
    brute = [q for q in itertools.permutations(range(4)) if all(q[p[i]] == p[q[i]] for i in range(4))]
    A = aut_group(X)
    assert A.group.order == len(brute)
    for i, a in enumerate(A.maps):
        for j, b in enumerate(A.maps):
            composite = b.then(a)  # a o b
            assert A.maps[A.group.mul(i, j)] == composite


# --------------------------------------------------------------------------
# monodromy


def test_monodromy_examples():
    C = circle_site()
    M = monodromy(constant(C, "abc"))
    assert all(M.perm(f) == (0, 1, 2) for f in C.non_identity())
    tree = spanning_tree(C)
    assert [C.morphisms[f].name for f in tree.edges] == ["a"]
    p_a, p_b = [2, 0, 1], [1, 0, 2]
    X = Presheaf(C, [list("pqr"), list("uvw")], [None, None, p_a, p_b])
    inv_b = [p_b.index(i) for i in range(3)]
    assert list(monodromy(X).perm(3)) == [p_a[inv_b[i]] for i in range(3)]


def test_monodromy_needs_connected_site_and_local_constancy():
    with pytest.raises(SiteNotConnected):
        spanning_tree(FiniteCategory(["p", "q"], []))
    with pytest.raises(NotLocallyConstant):
        monodromy(Presheaf(arrow_site(), [["a", "b"], ["c"]], [None, None, [0]]))


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(4)), st.permutations(range(4)), st.permutations(range(4)))
def test_monodromy_roundtrip_on_square(p, q, r):
    # a locally constant presheaf on the square: choose bijections along f, g, h and force k, s
    C = square_site()
    f, g, h, k, s = (C.mor_index[n] for n in "fghks")
    names = [str(i) for i in range(4)]
    restr = [None] * 4 + [None] * 5
    restr[f], restr[g], restr[h] = list(p), list(q), list(r)
    # s = f then h, so X(s) = X(f) o X(h); k chosen so that g then k = s
    Xs = [p[r[i]] for i in range(4)]
    qinv = [list(q).index(i) for i in range(4)]
    restr[s] = Xs
    restr[k] = [qinv[Xs[i]] for i in range(4)]
    X = Presheaf(C, [names] * 4, restr)
    M = monodromy(X)
    M.check()
    Y = presheaf_from_monodromy(M)
    assert find_isomorphism(Y, X) is not None
    assert monodromy_iso(X, M).is_iso()


# --------------------------------------------------------------------------
# Galois objects and coverings


def test_galois_examples():
    assert is_galois(terminal(circle_site())).verdict
    cert = is_galois(circle_perm([1, 2, 0]))
    assert cert.verdict and cert.aut.group.order == 3
    G, C, X = s3_coset()
    cert = is_galois(X)
    assert not cert.verdict and cert.aut.group.order == 1


def test_covering_examples():
    X = circle_perm([1, 2, 0])
    cov = galois_covering(X)
    assert find_isomorphism(cov.covering, X) is not None
    G, C, Y = s3_coset()
    cov = galois_covering(Y)
    assert cov.covering.size(0) == 6 and cov.group.order == 6
    assert find_isomorphism(cov.covering, regular_presheaf(C, G)) is not None
    two = sum_(terminal(circle_site()), terminal(circle_site())).obj
    assert galois_covering(two).covering.total_size == 2


@settings(max_examples=30, deadline=None)
@given(st.permutations(range(5)))
def test_covering_routes_agree_and_cover_every_component(p):
    X = circle_perm(p)
    cov = galois_covering(X)
    assert is_galois(cov.covering).verdict
    P, _ = galois_covering_by_definition(X)
    assert find_isomorphism(P, cov.covering) is not None
    for S, _ in connected_components(X).component_presheaves():
        assert epi_count(cov.covering, S) == S.size(0) > 0


# --------------------------------------------------------------------------
# fibres and reconstruction


def test_fibre_examples():
    fr = fibre(terminal(circle_site()))
    assert fr.size == 1
    G, C, X = s3_coset()
    fr = fibre(X)
    assert fr.size == 3 and fr.is_transitive()
    assert fr.aut.group.order == 6


def test_hom_set_counts():
    C = trivial_site()
    assert len(hom_set(constant(C, "ab"), constant(C, "xyz"))) == 9


def test_reconstruct_examples():
    G, C, X = s3_coset()
    rec = reconstruct_fibre(X)
    assert rec.iso is not None
    A = regular_presheaf(C, G)
    aut = aut_group(A)
    regular_action = [[aut.group.mul(m, a) for a in range(aut.group.order)] for m in range(aut.group.order)]
    R = reconstruct(A, aut, [f"m{i}" for i in range(6)], regular_action)
    assert find_isomorphism(R, A) is not None
    R1 = reconstruct(A, aut, ["pt"], [[0] * 6])
    assert find_isomorphism(R1, terminal(C)) is not None


@pytest.mark.parametrize("G", small_groups(8), ids=lambda G: G.name)
def test_fibre_and_reconstruction_for_all_coset_objects(G):
    C = groupoid_site(G)
    for K in subgroups(G):
        X = coset_presheaf(C, G, K)
        fr = fibre(X)
        assert fr.size == X.size(0) == G.order // K.order
        assert fr.is_transitive()
        assert reconstruct_fibre(X, fr).iso is not None


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from([1, 2, 3]), min_size=1, max_size=3))
def test_fibre_of_sums_is_disjoint_union(sizes):
    C = groupoid_site(cyclic_group(6))
    G = cyclic_group(6)
    objs = []
    for n in sizes:
        K = next(K for K in subgroups(G) if K.order == 6 // n)
        objs.append(coset_presheaf(C, G, K))
    from topospi1.site import sum_all

    X, _ = sum_all(objs)
    fr = fibre(X)
    assert fr.size == sum(sizes)
    assert sorted(len(b) for b in fr.by_component) == sorted(sizes)
    assert reconstruct_fibre(X, fr).iso is not None
