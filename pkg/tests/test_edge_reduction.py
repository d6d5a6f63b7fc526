from math import comb

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from torelli_lab import Cell, CertificateError, PreconditionError, SymplecticLattice, ThresholdError
from torelli_lab.edge_reduction import (
    EdgeClass,
    a_space,
    a_space_restricted,
    edge_measure,
    edge_rank_reduce,
    edge_theta_reduce,
    replay_edge_certificate,
    terms_value,
    verify_edge_certificate,
)
from torelli_lab.cells import boundary
from torelli_lab.exterior import JohnsonTarget, wedge_of_lattice
from torelli_lab.generators import block_pieces, family_instance, random_edge_instance, rng_for
from torelli_lab.reduction import Thresholds


def oracle_a_dim(L, pieces):
    g = L.rank // 2
    rows = [r for H in pieces for r in oracles.wedge_rows(H.rows(), 3, L.rank)]
    H1 = oracles.h1_rows(g)
    return oracles.rank(rows + H1, comb(L.rank, 3)) - L.rank


def test_a_space_dimension_examples():
    L = SymplecticLattice.standard(4)
    e = Cell(L, block_pieces(L, [1, 2]))
    # frozen from oracle_a_dim: a∧α2∧β2 already lies in the image of ∧³ of the genus-2 piece
    assert oracle_a_dim(L, e.pieces) == 10
    assert a_space(e).dim == 10


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10**6))
def test_a_space_matches_oracle(seed):
    rng = rng_for(seed, "a-space")
    L = SymplecticLattice.standard(5)
    P, fam = family_instance(L, [2, 2], [[1, 1]], rng=rng)
    e = Cell(L, P)
    A = a_space(e)
    assert A.dim == oracle_a_dim(L, P)
    R = a_space_restricted(e, fam)
    assert A.contains_subspace(R)


def test_a_sigma_inside_a_edge():
    L = SymplecticLattice.standard(5)
    P = block_pieces(L, [1, 1, 2])
    S = wedge_of_lattice(P[0], 3)
    for H in P[1:]:
        S = S.sum(wedge_of_lattice(H, 3))
    img = JohnsonTarget(5).project_subspace(S)
    for e, _ in boundary(Cell(L, P)).items():
        assert a_space(e).contains_subspace(img)


def test_edge_class_preconditions():
    L = SymplecticLattice.standard(4)
    e = Cell(L, block_pieces(L, [1, 2]))
    a, a2, b2, a3 = L.alpha(1), L.alpha(2), L.beta(2), L.alpha(3)
    ec = EdgeClass(e, terms=[(1, (a, a2, b2))])
    assert not ec.is_zero()
    assert EdgeClass(e, coeff=ec.coeff).coeff == ec.coeff
    with pytest.raises(PreconditionError):
        EdgeClass(e, terms=[(1, (a2, b2, a3))])
    t = JohnsonTarget(4)
    outside = t.quotient_project(t.wedge3(a2, b2, a3))
    with pytest.raises(PreconditionError, match="outside"):
        EdgeClass(e, coeff=outside)
    with pytest.raises(PreconditionError):
        EdgeClass(Cell(L, block_pieces(L, [1, 1, 1])), terms=[])


def test_edge_reduce_already_fixed():
    L = SymplecticLattice.standard(10)
    P, fam = family_instance(L, [4, 5], [[1, 0]], rng=rng_for(0, "fixed-edge"))
    e = Cell(L, P)
    ec = EdgeClass(e, terms=[(2, tuple(P[0].basis[:3]))])
    out, cert = edge_rank_reduce(ec, fam)
    assert len(cert) == 0
    assert [o.coeff for o in out] == [ec.coeff]
    assert verify_edge_certificate([ec], out, cert, fam)


def test_edge_rank_reduce_example():
    L = SymplecticLattice.standard(10)
    P, fam = family_instance(L, [4, 5], [[2, 1]], rng=rng_for(1, "edge-rank"))
    e = Cell(L, P)
    terms = [(1, tuple(P[0].basis[:3])), (-1, tuple(P[1].basis[1:4]))]
    ec = EdgeClass(e, terms=terms)
    assert edge_measure(e, fam, "rank") == (2, 1)
    out, cert = edge_rank_reduce(ec, fam, seed=1)
    assert len(cert) >= 1
    assert verify_edge_certificate([ec], out, cert, fam)
    for o in out:
        assert edge_measure(o.edge, fam, "rank") == (0, 0)


def test_edge_theta_reduce_example():
    L = SymplecticLattice.standard(12)
    P, fam = family_instance(L, [5, 6], [[1, 1], [1, 1]], {(0, 1): [2, -2]}, rng_for(2, "edge-theta"))
    e = Cell(L, P)
    ec = EdgeClass(e, terms=[(1, tuple(P[1].basis[:3]))])
    out, cert = edge_theta_reduce(ec, fam, seed=2)
    assert verify_edge_certificate([ec], out, cert, fam)
    for o in out:
        assert edge_measure(o.edge, fam, "theta") == (0, 0)


def test_edge_reduce_threshold_and_tamper():
    L = SymplecticLattice.standard(9)
    P, fam = family_instance(L, [4, 4], [[2, 1]])
    ec = EdgeClass(Cell(L, P), terms=[(1, tuple(P[0].basis[:3]))])
    with pytest.raises(ThresholdError):
        edge_rank_reduce(ec, fam)
    L = SymplecticLattice.standard(10)
    P, fam = family_instance(L, [4, 5], [[2, 1]], rng=rng_for(3, "tamper"))
    ec = EdgeClass(Cell(L, P), terms=[(1, tuple(P[0].basis[:3]))])
    out, cert = edge_rank_reduce(ec, fam, seed=3)
    step = cert.steps[0]
    step.terms = [(c * 2, tr) for c, tr in step.terms]
    with pytest.raises(CertificateError):
        verify_edge_certificate([ec], out, cert, fam)


@settings(max_examples=4, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["rank", "theta"]))
def test_edge_reduce_random(seed, kind):
    n = 1 if kind == "rank" else 2
    th = Thresholds.scaled(n)
    L = SymplecticLattice.standard(th.edge_min_g)
    P, fam, terms = random_edge_instance(L, n, rng_for(seed, "edge-random"), kind)
    ec = EdgeClass(Cell(L, P), terms=terms)
    f = edge_rank_reduce if kind == "rank" else edge_theta_reduce
    out, cert = f(ec, fam, th=th, seed=seed)
    assert verify_edge_certificate([ec], out, cert, fam)
    got = replay_edge_certificate([ec], cert)
    assert sorted(got) == sorted(o.edge.key() for o in out)
    total_in = terms_value(L, ec.terms)
    assert any(total_in)
