import itertools

import pytest
from hypothesis import given, settings, strategies as st

from topospi1.errors import NotDecidable, SiteNotConnected
from topospi1.finiteness import (
    analyze,
    complemented_subobject_lattice,
    complemented_subobject_lattice_bruteforce,
    connected_components,
    equivalence_relations,
    has_global_support,
    is_complemented,
    is_connected,
    is_decidable,
    is_decidable_via_diagonal,
    is_locally_constant,
    is_locally_constant_definitional,
    is_locally_finite,
    kuratowski_check,
    restrictions_injective,
    splitting_object,
    subpresheaves,
)
from topospi1.galois import monodromy
from topospi1.site import (
    Presheaf,
    SubPresheaf,
    arrow_site,
    circle_site,
    constant,
    initial,
    product,
    representable,
    square_site,
    terminal,
    trivial_site,
    validate_presheaf,
)


def circle_perm(perm_b):
    C = circle_site()
    n = len(perm_b)
    names = [str(i) for i in range(n)]
    return Presheaf(C, [names, names], [None, None, list(range(n)), list(perm_b)])


def arrow(nx, restriction):
    """Arrow-site presheaf X(y) -> X(x) given by ``restriction``."""
    C = arrow_site()
    return Presheaf(C, [[f"x{i}" for i in range(nx)], [f"y{i}" for i in range(len(restriction))]],
                    [None, None, list(restriction)])


@st.composite
def small_presheaves(draw, max_level=3):
    """Random presheaves on the arrow or circle site (no composites to check)."""
    C = draw(st.sampled_from([arrow_site(), circle_site()]))
    nx = draw(st.integers(0, max_level))
    ny = draw(st.integers(0, max_level)) if nx else 0
    restr = [None, None]
    for _ in C.non_identity():
        restr.append([draw(st.integers(0, nx - 1)) for _ in range(ny)] if nx else [])
    return Presheaf(C, [[f"x{i}" for i in range(nx)], [f"y{i}" for i in range(ny)]], restr)


# --------------------------------------------------------------------------
# components


def test_component_examples():
    C = square_site()
    for c in range(C.n_objects):
        assert len(connected_components(representable(C, c))) == 1
    assert len(connected_components(constant(C, "abc"))) == 3
    X = circle_perm([1, 0, 3, 2])
    assert len(connected_components(X)) == 2
    assert len(connected_components(circle_perm([0, 1, 2, 3]))) == 4


def test_union_of_parts_is_complemented_by_the_rest():
    X = circle_perm([1, 0, 2, 4, 3])
    dec = connected_components(X)
    for k in range(len(dec)):
        S = dec.union_of({k})
        comp = is_complemented(S)
        rest = dec.union_of(set(range(len(dec))) - {k})
        assert comp == rest


def _brute_atoms(X):
    subs = [S for S in subpresheaves(X) if not S.is_empty() and is_complemented(S) is not None]
    return {S for S in subs if not any(T <= S and T != S for T in subs)}


@settings(max_examples=60, deadline=None)
@given(small_presheaves(), st.randoms(use_true_random=False))
def test_components_are_minimal_complemented_and_relabelling_invariant(X, rnd):
    dec = connected_components(X)
    assert set(dec.parts) == _brute_atoms(X)
    perms = []
    for c in range(2):
        p = list(range(X.size(c)))
        rnd.shuffle(p)
        perms.append(p)
    Y = X.relabel(perms)
    moved = {frozenset((c, perms[c][i]) for c in range(2) for i in part.chosen[c]) for part in dec.parts}
    assert moved == {frozenset((c, i) for c in range(2) for i in part.chosen[c]) for part in connected_components(Y).parts}


def test_connectedness_and_support():
    C = circle_site()
    assert is_connected(terminal(C)) and has_global_support(terminal(C))
    assert not is_connected(initial(C))
    assert not has_global_support(arrow(1, []))


# --------------------------------------------------------------------------
# complemented, decidable, locally constant


def test_complement_examples():
    X = circle_perm([1, 2, 0])
    full = SubPresheaf(X, [set(range(3)), set(range(3))])
    assert is_complemented(full).is_empty()
    # arrow: X(y) = {c0} -> X(x) = {a, b}, c0 |-> a; Y = {a} at x only
    A = arrow(2, [0])
    Y = SubPresheaf(A, [{0}, set()])
    assert is_complemented(Y) is None
    Y2 = SubPresheaf(A, [{1}, set()])
    assert is_complemented(Y2) is not None


def test_decidability_examples():
    assert is_decidable(constant(square_site(), "abcd")) is not None
    with_collision = arrow(1, [0, 0])
    assert is_decidable(with_collision) is None
    assert is_decidable(circle_perm([2, 0, 1])) is not None


def test_local_constancy_examples():
    X = constant(circle_site(), "abc")
    assert is_locally_constant(X) is not None
    assert is_locally_finite(X).n == 3
    assert is_locally_constant(circle_perm([3, 1, 0, 2])) is not None
    inj = arrow(3, [0, 2])
    assert is_decidable(inj) is not None and is_locally_constant(inj) is None


def test_not_connected_site_has_no_single_n():
    from topospi1.site import FiniteCategory

    C = FiniteCategory(["p", "q"], [])
    X = Presheaf(C, [["a"], ["b", "c"]], [None, None])
    lf = is_locally_finite(X)
    assert lf is not None
    with pytest.raises(SiteNotConnected):
        lf.n


@settings(max_examples=80, deadline=None)
@given(small_presheaves())
def test_characterizations_match_definitions(X):
    assert restrictions_injective(X) == (is_decidable_via_diagonal(X) is not None)
    assert (is_locally_constant(X) is not None) == is_locally_constant_definitional(X)
    if is_locally_constant(X) is not None:
        assert is_decidable(X) is not None


@settings(max_examples=40, deadline=None)
@given(small_presheaves(max_level=2))
def test_quotient_criterion_on_random_objects(X):
    from topospi1.site import quotient_by_relation, relation_from_classes

    for classes in equivalence_relations(X):
        R = relation_from_classes(X, classes)
        Q, _ = quotient_by_relation(X, R)
        assert (is_decidable(Q) is not None) == (is_complemented(R) is not None)


def test_equivalence_relations_count_brute_force():
    X = circle_perm([1, 0, 2])
    # brute force: pairs of partitions of the two levels compatible with both restrictions
    def partitions(n):
        for labels in itertools.product(range(n), repeat=n):
            if all(labels[i] <= max(labels[:i], default=-1) + 1 for i in range(n)):
                yield labels
    count = 0
    for px, py in itertools.product(partitions(3), repeat=2):
        ok = all((py[i] == py[j]) <= (px[X.restr[f][i]] == px[X.restr[f][j]])
                 for f in (2, 3) for i in range(3) for j in range(3))
        count += ok
    assert len(list(equivalence_relations(X))) == count


# --------------------------------------------------------------------------
# lattices and Kuratowski-finiteness


def test_lattice_examples():
    C = trivial_site()
    assert len(complemented_subobject_lattice(initial(C), 0)) == 1
    assert len(complemented_subobject_lattice(terminal(C), 0)) == 2
    assert len(complemented_subobject_lattice(constant(C, "ab"), 0)) == 4


@settings(max_examples=40, deadline=None)
@given(small_presheaves(max_level=2), st.integers(0, 1))
def test_lattice_matches_brute_force(X, c):
    fast = complemented_subobject_lattice(X, c)
    slow = complemented_subobject_lattice_bruteforce(X, c)
    assert [S.chosen for S in fast] == [S.chosen for S in slow]


def test_kuratowski_examples():
    C = trivial_site()
    for n in range(4):
        assert kuratowski_check(constant(C, [str(i) for i in range(n)])).finite is True
    assert kuratowski_check(initial(circle_site())).finite is True
    assert kuratowski_check(arrow(2, [1])).finite is False
    with pytest.raises(NotDecidable):
        kuratowski_check(arrow(1, [0, 0]))


def test_kuratowski_cap_reports_skip():
    X = Presheaf(circle_site(), [list("abcdef"), []], [None, None, [], []])
    r = kuratowski_check(X, cap=10)
    assert r.skipped and r.to_json() == "skipped(cap)"
    assert kuratowski_check(X, cap=12).finite is False


@settings(max_examples=80, deadline=None)
@given(small_presheaves())
def test_comparison_theorem_on_random_objects(X):
    lf = is_locally_finite(X) is not None
    if restrictions_injective(X):
        k = kuratowski_check(X, cap=16)
        assert lf == k.finite
    else:
        assert not lf


# --------------------------------------------------------------------------
# splitting objects


def test_splitting_examples():
    sp = splitting_object(terminal(circle_site()))
    assert sp.n == 1 and sp.U.total_size == 2
    sp = splitting_object(constant(trivial_site(), "ab"))
    assert sp.U.size(0) == 2
    sp = splitting_object(circle_perm([1, 2, 0]))
    assert [sp.U.size(c) for c in range(2)] == [6, 6]
    M = monodromy(sp.U)
    perm = M.perm(3)
    assert all(perm[i] != i for i in range(6))
    assert sp.iso.is_iso()


def test_analyze_constant_two_points():
    rep = analyze(constant(trivial_site(), ["p", "q"]))
    out = rep.to_json()
    expected = {"connected": False, "component_count": 2, "decidable": True, "locally_finite": True,
                "n": 2, "kuratowski_finite": True, "finite": True}
    assert {k: out[k] for k in expected} == expected
    assert rep.fully_decided


def test_analyze_reports_not_applicable_for_non_decidable():
    rep = analyze(arrow(1, [0, 0]))
    assert rep.kuratowski_finite == "n/a" and not rep.finite


def test_analyze_witnesses():
    X = circle_perm([1, 0])
    rep = analyze(X, with_witnesses=True)
    assert "diagonal_complement" in rep.witnesses and "splitting_object" in rep.witnesses


def test_validate_then_analyze_roundtrip():
    raw = {"sets": {"x": ["a", "b"], "y": ["c", "d"]}, "restrictions": {"a": {"c": "a", "d": "b"}, "b": {"c": "b", "d": "a"}}}
    X = validate_presheaf(raw, circle_site())
    rep = analyze(X)
    assert rep.connected and rep.n == 2 and rep.finite
    pr = product(X, X)
    assert analyze(pr.obj).component_count == 2
