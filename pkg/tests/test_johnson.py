from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from torelli_lab import (
    BoundingPairDatum,
    JohnsonTarget,
    LatticeSubgroup,
    PreconditionError,
    decompose_into_fixed_family,
    fixed_space_of_transvection,
    johnson_of_bp,
    transvection_action,
)
from torelli_lab.generators import random_mixing, rng_for
from torelli_lab.johnson import fixed_space_of_action, other_side, perp_image
from torelli_lab.lattice import perp, span, transvect
from torelli_lab.suites import _independent_primitive, _primitive_vector


def fixed_dims_oracle(g, w):
    """(dim of the T_w-fixed space of ∧³H/H, dim of the image of ∧³w^⊥), by sympy."""
    n = 2 * g
    J = oracles.standard_form(g)
    T = [[x + oracles.pair(J, w, oracles_e(n, i)) * y for x, y in zip(oracles_e(n, i), w)] for i in range(n)]
    A = oracles.compound3(T)
    N = len(A)
    H = oracles.h1_rows(g)
    # x (A - I) = c H
    stacked = [[A[i][j] - int(i == j) for j in range(N)] for i in range(N)] + [[-x for x in r] for r in H]
    K = oracles.nullspace(oracles.transpose(stacked, N), len(stacked))
    fixed = oracles.rank([k[:N] for k in K], N) - n
    P = oracles.perp_rows(J, [w])
    image = oracles.rank(oracles.wedge_rows(P, 3, n) + H, N) - n
    return fixed, image


def oracles_e(n, i):
    return [int(j == i) for j in range(n)]


def test_johnson_of_bp_examples():
    t = JohnsonTarget(3)
    L = t.lattice
    a1 = L.alpha(1)
    bp = BoundingPairDatum(a1, span(L, [L.alpha(2), L.beta(2)]))
    val = johnson_of_bp(t, bp)
    assert val == t.quotient_project(t.wedge3(a1, L.alpha(2), L.beta(2)))
    assert oracles.equal_mod_h1(val, oracles.wedge([a1, L.alpha(2), L.beta(2)], 6), 3)
    empty = BoundingPairDatum(a1, LatticeSubgroup(L, []))
    assert not any(johnson_of_bp(t, empty))
    big = BoundingPairDatum(a1, span(L, [L.alpha(2), L.beta(2), L.alpha(3), L.beta(3)]))
    assert not any(johnson_of_bp(t, big))


def test_bounding_pair_preconditions():
    L = JohnsonTarget(3).lattice
    with pytest.raises(PreconditionError):
        BoundingPairDatum([2, 0, 0, 0, 0, 0], span(L, [L.alpha(2), L.beta(2)]))
    with pytest.raises(PreconditionError):
        BoundingPairDatum(L.alpha(1), span(L, [L.beta(1), L.alpha(2)]))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 4))
def test_johnson_of_bp_two_sides_and_basis(seed, g):
    t = JohnsonTarget(g)
    L = t.lattice
    rng = rng_for(seed, "bp")
    M = random_mixing(L, rng, 4)
    h = rng.randint(1, g - 2)
    c = M(L.alpha(1))
    side = LatticeSubgroup(L, [M(v) for j in range(2, 2 + h) for v in (L.alpha(j), L.beta(j))])
    val = johnson_of_bp(t, BoundingPairDatum(c, side))
    # the same subgroup through another basis
    B = [list(r) for r in side.basis]
    B[0] = [x + 2 * y for x, y in zip(B[0], B[1])]
    assert johnson_of_bp(t, BoundingPairDatum(c, LatticeSubgroup(L, B))) == val
    # the other component sees the class with the opposite orientation
    rest = other_side(L, c, side)
    assert rest.genus == g - 1 - h
    assert johnson_of_bp(t, BoundingPairDatum([-x for x in c], rest)) == val
    J = oracles.standard_form(g)
    om = oracles.omega(J, side.rows())
    assert oracles.equal_mod_h1(val, oracles.two_form_wedge(c, om, 2 * g), g)


def test_transvection_action_examples():
    t = JohnsonTarget(3)
    L = t.lattice
    a1, b1 = L.alpha(1), L.beta(1)
    act = transvection_action(t, a1)
    x = t.wedge3(b1, L.alpha(2), L.beta(3))
    want = [p + q for p, q in zip(x, t.wedge3(a1, L.alpha(2), L.beta(3)))]
    assert act.apply(x) == t.quotient_project(want)
    y = t.wedge3(L.alpha(2), L.beta(2), L.alpha(3))
    assert act.apply(y) == t.quotient_project(y)
    inv = transvection_action(t, a1, power=-1)
    assert act.compose(inv).is_identity()
    assert act.determinant() == 1
    with pytest.raises(PreconditionError):
        transvection_action(t, [2, 0, 0, 0, 0, 0])


def test_transvection_action_matches_compound_oracle():
    g = 3
    t = JohnsonTarget(g)
    w = [1, 0, -1, 2, 0, 1]
    act = transvection_action(t, w)
    J = oracles.standard_form(g)
    T = [transvect(t.lattice, w, oracles_e(6, i)) for i in range(6)]
    A = oracles.compound3(T)
    for I in range(20):
        e = oracles_e(20, I)
        assert oracles.equal_mod_h1(act.apply(e), A[I], g)
    assert all(oracles.pair(J, T[i], T[j]) == J[i][j] for i in range(6) for j in range(6))


def test_fixed_space_dimensions():
    t = JohnsonTarget(3)
    w = t.lattice.alpha(1)
    K = fixed_space_of_transvection(t, w)
    # frozen from fixed_dims_oracle: the image of ∧³w^⊥ loses w∧ω
    assert K.dim == 9
    assert fixed_dims_oracle(3, w) == (9, 9)
    assert t.dimension == 14
    assert fixed_space_of_transvection(JohnsonTarget(2), [1, 0, 0, 0]).dim == 0
    assert fixed_dims_oracle(2, [1, 0, 0, 0]) == (0, 0)
    assert not transvection_action(t, w).is_identity()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 5))
def test_fixed_space_is_perp_image(seed, g):
    t = JohnsonTarget(g)
    w = _primitive_vector(rng_for(seed, "fixed"), 2 * g)
    K = fixed_space_of_action(transvection_action(t, w))
    assert K == perp_image(t, [w])
    assert K.dim == comb(2 * g - 1, 3) - 1


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 4), st.integers(2, 3))
def test_family_fixed_space_contains_perp_image(seed, g, size):
    t = JohnsonTarget(g)
    L = t.lattice
    W = _independent_primitive(L, rng_for(seed, "family"), size)
    spaces = [fixed_space_of_action(transvection_action(t, w)) for w in W]
    inter = spaces[0]
    for S in spaces[1:]:
        inter = inter.intersect(S)
    assert inter.contains_subspace(perp_image(t, W))
    # before the quotient the intersection is exactly ∧³ of the common perp
    from torelli_lab.exterior import wedge_of_lattice

    raw = wedge_of_lattice(perp(L, [W[0]]), 3)
    for w in W[1:]:
        raw = raw.intersect(wedge_of_lattice(perp(L, [w]), 3))
    assert raw == wedge_of_lattice(perp(L, W), 3)


def test_family_fixed_space_can_exceed_perp_image():
    t = JohnsonTarget(3)
    W = [[2, 1, -1, 0, 0, 0], [1, 1, 0, 1, 0, 0]]
    assert t.lattice.pair(*W) == 0
    inter = fixed_space_of_action(transvection_action(t, W[0])).intersect(fixed_space_of_action(transvection_action(t, W[1])))
    # frozen from the sympy computation below
    assert (inter.dim, perp_image(t, W).dim) == (6, 4)
    J = oracles.standard_form(3)
    H = oracles.h1_rows(3)
    A = oracles.wedge_rows(oracles.perp_rows(J, [W[0]]), 3, 6) + H
    B = oracles.wedge_rows(oracles.perp_rows(J, [W[1]]), 3, 6) + H
    assert len(oracles.intersection(A, B, 20)) - 6 == 6
    assert oracles.rank(oracles.wedge_rows(oracles.perp_rows(J, W), 3, 6) + H, 20) - 6 == 4


def test_decompose_examples():
    t = JohnsonTarget(4)
    L = t.lattice
    W = [L.alpha(1), L.beta(2), L.alpha(3), L.beta(4)]
    x = t.quotient_project(t.wedge3(L.alpha(1), L.beta(2), L.alpha(3)))
    assert perp_image(t, W).contains(x)
    comps = decompose_into_fixed_family(t, x, W, 1)
    assert len(comps) == 1 and comps[0][1] == x
    rng = rng_for(0, "decompose")
    y = [rng.randint(-2, 2) for _ in range(t.total.dimension)]
    comps = decompose_into_fixed_family(t, y, W, 1)
    total = [Fraction(0)] * t.total.dimension
    for sub, c in comps:
        assert perp_image(t, [list(v) for v in sub]).contains(c)
        total = [a + b for a, b in zip(total, c)]
    assert total == t.quotient_project(y)
    assert oracles.equal_mod_h1(total, y, 4)


def test_decompose_seven_vectors_in_fours():
    t = JohnsonTarget(5)
    L = t.lattice
    W = [L.alpha(1), L.alpha(2), L.alpha(3), L.alpha(4), L.alpha(5), L.beta(1), L.beta(2)]
    y = [((7 * i) % 5) - 2 for i in range(t.total.dimension)]
    comps = decompose_into_fixed_family(t, y, W, 4)
    total = [Fraction(0)] * t.total.dimension
    for sub, c in comps:
        assert len(sub) == 4
        total = [a + b for a, b in zip(total, c)]
    assert total == t.quotient_project(y)


def test_decompose_reports_deficit():
    t = JohnsonTarget(3)
    L = t.lattice
    y = t.wedge3(L.beta(1), L.alpha(2), L.alpha(3))
    with pytest.raises(PreconditionError, match="deficit"):
        decompose_into_fixed_family(t, y, [L.alpha(1)], 1)
