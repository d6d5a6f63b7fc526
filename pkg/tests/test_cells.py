from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from torelli_lab import (
    BMTorus,
    Cell,
    Chain,
    H1Model,
    InvariantError,
    PreconditionError,
    SymplecticLattice,
    bm_class,
    bm_sum_certificate,
    boundary,
    boundary_chain,
    canonical_key,
    compatible_with,
    compose_edges,
    h1_chain_value,
    h1_edge_class,
    three_cell_chain,
)
from torelli_lab.cells import a_perp, dual, merge, unimodular_part
from torelli_lab.exterior import WedgeSpace
from torelli_lab.generators import block_pieces, random_cell, random_genera, rng_for
from torelli_lab.lattice import LatticeSubgroup, intersect, perp, span


def pieces_rows(cell):
    return [H.rows() for H in cell.pieces]


def oracle_chain(ch, n):
    return oracles.chain_of([([H.rows() for H in c.pieces], v) for c, v in ch.items()], n)


def test_piece_invariants_enforced():
    L = SymplecticLattice.standard(3)
    P = block_pieces(L, [1, 1])
    assert Cell(L, P).genera() == (1, 1)
    with pytest.raises(InvariantError):
        Cell(L, [P[0], P[0]])
    with pytest.raises(InvariantError):
        Cell(L, [span(L, [L.alpha(2), L.beta(2)]), P[1]])
    L4 = SymplecticLattice.standard(4)
    Q = block_pieces(L4, [1, 2])
    # genera must add up to g - 1
    with pytest.raises(InvariantError):
        Cell(L4, [Q[0], span(L4, [L4.alpha(1), L4.alpha(3), L4.beta(3)])])


def test_canonical_key_examples():
    L = SymplecticLattice.standard(4)
    P = block_pieces(L, [1, 1, 1])
    c = Cell(L, P)
    assert canonical_key(Cell(L, P[1:] + P[:1])) == canonical_key(c)
    assert canonical_key(Cell(L, [P[0], P[2], P[1]])) != canonical_key(c)
    assert canonical_key(dual(c)) != canonical_key(c)
    # merging the standard blocks gives the standard blocks
    Q = block_pieces(L, [1, 2])
    assert canonical_key(Cell(L, Q)) == canonical_key(Cell(L, [P[0], merge(L, P[1], P[2])]))


def test_three_cell_boundary_expansion():
    L = SymplecticLattice.standard(5)
    H0, H1, H2, H3 = block_pieces(L, [1, 1, 1, 1])
    m = lambda A, B: merge(L, A, B)
    want = Chain(2)
    want.add_oriented(L, (m(H0, H1), H2, H3), 1)
    want.add_oriented(L, (H0, m(H1, H2), H3), -1)
    want.add_oriented(L, (H0, H1, m(H2, H3)), 1)
    want.add_oriented(L, (m(H0, H3), H1, H2), -1)
    got = Chain.of(L, (H0, H1, H2, H3))
    assert boundary_chain(got) == want
    assert oracle_chain(boundary_chain(got), 10) == oracles.boundary([H.rows() for H in (H0, H1, H2, H3)], 10)


def test_edge_boundary_is_zero():
    L = SymplecticLattice.standard(4)
    assert boundary(Cell(L, block_pieces(L, [1, 2]))).is_zero()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_boundary_squares_to_zero(seed):
    rng = rng_for(seed, "dd")
    L = SymplecticLattice.standard(6)
    cell, _ = random_cell(L, random_genera(rng, 5, 4), rng)
    bd = boundary(cell)
    assert boundary_chain(bd).is_zero()
    for c, _ in bd.items():
        assert c.dim == 2 and sum(c.genera()) == 5
    assert oracle_chain(bd, 12) == oracles.boundary(pieces_rows(cell), 12)


def test_chain_drops_zero_coefficients():
    L = SymplecticLattice.standard(4)
    c = Cell(L, block_pieces(L, [1, 1, 1]))
    ch = Chain(2).add_cell(c, 2)
    ch.add_cell(c, -2)
    assert ch.is_zero() and len(ch) == 0
    with pytest.raises(PreconditionError):
        Chain(1).add_cell(c, 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_bm_class(seed):
    rng = rng_for(seed, "bm")
    L = SymplecticLattice.standard(5)
    cell, _ = random_cell(L, random_genera(rng, 4, 3), rng)
    ch = bm_class(cell)
    assert sorted(abs(v) for _, v in ch.items()) == [1, 1]
    assert boundary_chain(ch).is_zero()
    assert bm_class(dual(cell)) == ch
    assert BMTorus(L, cell.pieces).fundamental_class() == ch
    # oracle: the cycle condition for σ - dual(σ) with independent boundaries
    P = pieces_rows(cell)
    acc = oracles.boundary(P, 10)
    oracles.boundary([P[0], P[2], P[1]], 10, -1, acc)
    assert acc == {}


def test_bm_torus_equality_is_unordered():
    L = SymplecticLattice.standard(4)
    P = block_pieces(L, [1, 1, 1])
    assert BMTorus(L, P) == BMTorus(L, [P[2], P[0], P[1]])
    assert BMTorus(L, P).fundamental_class() == BMTorus(L, [P[1], P[0], P[2]]).fundamental_class()


def test_compose_edges_examples():
    L = SymplecticLattice.standard(5)
    a = L.alpha(1)
    H1 = span(L, [a, L.alpha(2), L.beta(2)])
    H1p = span(L, [a, L.alpha(3), L.beta(3), L.alpha(4), L.beta(4)])
    rest = lambda H: intersect(perp(L, list(H.basis)), a_perp(L))
    y = Cell(L, [H1, merge(L, rest(H1), span(L, [a]))])
    z = Cell(L, [H1p, rest(H1p)])
    iy = [k for k, H in enumerate(y.pieces) if H == H1][0]
    iz = [k for k, H in enumerate(z.pieces) if H == H1p][0]
    yz = compose_edges(y, z, iy, iz)
    assert sorted(yz.genera()) == [1, 3]
    J = oracles.standard_form(5)
    big = [H for H in yz.pieces if H.genus == 3][0]
    assert oracles.restricted_rank(J, big.rows()) == 6
    with pytest.raises(PreconditionError):
        compose_edges(y, y, iy, 1 - iy)


def test_compose_edges_three_subgroup_configuration():
    L = SymplecticLattice.standard(5)
    H0, H1, H1p, H3 = block_pieces(L, [1, 1, 1, 1])
    x = (H0, H1, merge(L, H1p, H3))
    y = Cell(L, [H1, merge(L, merge(L, H0, H1p), H3)])
    z = Cell(L, [H1p, merge(L, merge(L, H0, H1), H3)])
    iy = list(y.pieces).index(H1)
    iz = list(z.pieces).index(H1p)
    yz = compose_edges(y, z, iy, iz)
    assert set(yz.pieces) == {merge(L, H1, H1p), merge(L, H0, H3)}
    assert x[0] == H0


def test_compose_edges_associative():
    L = SymplecticLattice.standard(5)
    H = block_pieces(L, [1, 1, 1, 1])
    def rest(i):
        out = [h for k, h in enumerate(H) if k != i]
        return merge(L, merge(L, out[0], out[1]), out[2])

    e = [Cell(L, [H[i], rest(i)]) for i in range(3)]
    idx = lambda c, P: list(c.pieces).index(P)
    ab = compose_edges(e[0], e[1], idx(e[0], H[0]), idx(e[1], H[1]))
    left = compose_edges(ab, e[2], idx(ab, merge(L, H[0], H[1])), idx(e[2], H[2]))
    bc = compose_edges(e[1], e[2], idx(e[1], H[1]), idx(e[2], H[2]))
    right = compose_edges(e[0], bc, idx(e[0], H[0]), idx(bc, merge(L, H[1], H[2])))
    assert left == right


def test_bm_sum_certificate_minimal_genus():
    L = SymplecticLattice.standard(5)
    H = block_pieces(L, [1, 1, 1, 1])
    rep = bm_sum_certificate(L, *H)
    assert rep["verified"] and rep["expansions_verified"]
    swapped = bm_sum_certificate(L, H[0], H[2], H[1], H[3])
    assert swapped["verified"]
    with pytest.raises(InvariantError):
        three_cell_chain(L, H[0], H[0], H[2], H[3])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_bm_sum_certificate_oracle(seed):
    rng = rng_for(seed, "bm-sum")
    L = SymplecticLattice.standard(6)
    cell, _ = random_cell(L, random_genera(rng, 5, 4), rng)
    H0, H1, H2, H3 = cell.pieces
    rep = bm_sum_certificate(L, H0, H1, H2, H3)
    assert rep["verified"]
    R = [H.rows() for H in (H0, H1, H2, H3)]
    lhs = oracles.boundary(R, 12)
    oracles.boundary([R[1], R[0], R[2], R[3]], 12, -1, lhs)
    oracles.boundary([R[1], R[2], R[0], R[3]], 12, 1, lhs)
    assert oracle_chain(rep["lhs"], 12) == lhs


def test_compatible_with_examples():
    L = SymplecticLattice.standard(4)
    c = Cell(L, block_pieces(L, [1, 2]))
    assert compatible_with(c, L.alpha(1))
    assert compatible_with(c, [L.alpha(2), L.beta(3)])
    w = [x + y for x, y in zip(L.alpha(2), L.alpha(3))]
    assert not compatible_with(c, w)
    with pytest.raises(PreconditionError):
        compatible_with(c, L.beta(1))


def test_h1_edge_class_examples():
    L = SymplecticLattice.standard(4)
    model = H1Model(L)
    e = Cell(L, block_pieces(L, [1, 2]))
    small = [k for k, H in enumerate(e.pieces) if H.genus == 1][0]
    val = h1_edge_class(model, e, small)
    W2 = WedgeSpace(8, 2)
    assert val == model.reduce(W2.wedge(L.alpha(2), L.beta(2)))
    both = [x + y for x, y in zip(h1_edge_class(model, e, 0), h1_edge_class(model, e, 1))]
    assert not any(model.reduce(both))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_h1_two_cell_boundary_vanishes(seed):
    rng = rng_for(seed, "h1")
    L = SymplecticLattice.standard(5)
    cell, _ = random_cell(L, random_genera(rng, 4, 3), rng)
    model = H1Model(L)
    assert not any(h1_chain_value(model, boundary(cell)))
    # oracle: ω of each face's first piece from Gram inverses, modulo ω'
    J = oracles.standard_form(5)
    b = L.beta(1)
    total = [Fraction(0)] * 45
    for k, c in oracles.boundary(pieces_rows(cell), 10).items():
        U = oracles.intersection([list(r) for r in k[0]], oracles.perp_rows(J, [b]), 10)
        total = [x + c * y for x, y in zip(total, oracles.omega(J, U))]
    U = oracles.intersection(oracles.perp_rows(J, [L.alpha(1)]), oracles.perp_rows(J, [b]), 10)
    assert oracles.in_span(total, [oracles.omega(J, U)], 45)
