"""Johnson values of bounding pairs, the transvection action on ∧³H/H, fixed spaces."""

from fractions import Fraction
from itertools import combinations

import flint

from . import intlin
from .errors import PreconditionError
from .exterior import (
    JohnsonTarget,
    RationalSubspace,
    compound,
    symplectic_omega,
    wedge_of_lattice,
    wedge_vec_with_two_form,
)
from .lattice import LatticeSubgroup, perp, span, split_radical, symplectic_basis, transvection_matrix


class BoundingPairDatum:
    """A bounding pair seen through homology: its class and one side's subgroup."""

    __slots__ = ("cls", "side")

    def __init__(self, cls, side):
        L = side.ambient
        cls = list(cls)
        L.check_vector(cls)
        if intlin.content(cls) != 1:
            raise PreconditionError("bounding pair class must be primitive and nonzero")
        for b in side.basis:
            if L.pair(cls, b):
                raise PreconditionError("side must be orthogonal to the class")
        if side.basis and not side.is_unimodular():
            raise PreconditionError("side must have a unimodular restricted form")
        self.cls = cls
        self.side = side


def side_omega(side):
    if not side.basis:
        return None
    return symplectic_omega(symplectic_basis(side), side.ambient.rank)


def johnson_of_bp(t, bp):
    """Canonical representative of [c] ∧ ω_side in ∧³H/H."""
    om = side_omega(bp.side)
    if om is None:
        return [Fraction(0)] * t.total.dimension
    return t.quotient_project(wedge_vec_with_two_form(bp.cls, om, t.lattice.rank))


def wedge3_action_matrix(M):
    """Matrix of ∧³M acting on row vectors (row I is the image of e_I)."""
    return compound(M, 3)


class QuotientAction:
    """A linear endomorphism of ∧³H/H in canonical coordinates."""

    __slots__ = ("target", "columns", "matrix")

    def __init__(self, target, columns, matrix):
        self.target = target
        self.columns = columns
        self.matrix = matrix

    def apply(self, x):
        t = self.target
        x = t.quotient_project(x)
        out = [Fraction(0)] * t.total.dimension
        for r, c in enumerate(self.columns):
            if x[c]:
                for k, v in enumerate(self.matrix[r]):
                    if v:
                        out[self.columns[k]] += x[c] * v
        return out

    def compose(self, other):
        A = flint.fmpq_mat(self.matrix_q()) * flint.fmpq_mat(other.matrix_q())
        return QuotientAction(self.target, self.columns, [[Fraction(int(x.p), int(x.q)) for x in row] for row in A.tolist()])

    def matrix_q(self):
        return [[flint.fmpq(x.numerator, x.denominator) for x in row] for row in self.matrix]

    def is_identity(self):
        return all(v == (1 if i == j else 0) for i, row in enumerate(self.matrix) for j, v in enumerate(row))

    def determinant(self):
        return flint.fmpq_mat(self.matrix_q()).det()


def transvection_action(t, w, power=1):
    """The map induced by T_w^power on ∧³H/H (row-vector convention)."""
    L = t.lattice
    w = list(w)
    L.check_vector(w)
    if intlin.content(w) != 1:
        raise PreconditionError("transvection vector must be primitive")
    M = transvection_matrix(L, w, power)
    return _quotient_action(t, M)


def _quotient_action(t, M):
    A3 = wedge3_action_matrix(M)
    cols = t.free_columns()
    pos = {c: i for i, c in enumerate(cols)}
    mat = []
    for c in cols:
        img = t.quotient_project(A3[c])
        row = [Fraction(0)] * len(cols)
        for j, v in enumerate(img):
            if v:
                row[pos[j]] = v
        mat.append(row)
    return QuotientAction(t, cols, mat)


def fixed_space_of_action(act):
    t = act.target
    d = len(act.columns)
    rows = [[act.matrix[i][j] - (1 if i == j else 0) for j in range(d)] for i in range(d)]
    K = intlin.q_left_kernel(rows, d)
    full = []
    for k in K:
        v = [0] * t.total.dimension
        for i, c in enumerate(act.columns):
            v[c] = k[i]
        full.append(v)
    return RationalSubspace.from_rows(full, t.total.dimension)


def perp_image(t, W):
    """Image of ∧³(W^⊥ ⊗ Q) in the canonical complement of the target."""
    P = perp(t.lattice, [list(w) for w in W])
    return t.project_subspace(wedge_of_lattice(P, 3))


def fixed_space_of_transvection(t, w):
    """Kernel of (T_w - 1) on ∧³H/H, checked against the image of ∧³w^⊥."""
    act = transvection_action(t, w)
    K = fixed_space_of_action(act)
    img = perp_image(t, [w])
    if K != img:
        raise AssertionError("fixed space differs from the image of ∧³w^⊥")
    return K


def decompose_into_fixed_family(t, x, W, m):
    """Write x as a sum of components, one in the image of ∧³(W')^⊥ per m-subset W'."""
    x = t.quotient_project(x)
    W = [list(w) for w in W]
    subsets = list(combinations(range(len(W)), m))
    gens = []
    owner = []
    spaces = []
    for si, sub in enumerate(subsets):
        S = perp_image(t, [W[i] for i in sub])
        spaces.append(S)
        for r in S.rows():
            gens.append(r)
            owner.append(si)
    total = RationalSubspace.from_rows(gens, t.total.dimension) if gens else RationalSubspace.zero(t.total.dimension)
    coeffs = intlin.q_solve_left(gens, x) if gens else None
    if coeffs is None:
        if not any(x):
            return [(tuple(W[i] for i in subsets[0]) if subsets else (), x)]
        full = t.project_subspace(RationalSubspace.full(t.total.dimension))
        raise PreconditionError(f"family does not cover the element: dimension deficit {full.dim - total.dim}")
    comps = [[Fraction(0)] * t.total.dimension for _ in subsets]
    for c, r, si in zip(coeffs, gens, owner):
        if c:
            comp = comps[si]
            for j, v in enumerate(r):
                if v:
                    comp[j] += c * v
    out = []
    acc = [Fraction(0)] * t.total.dimension
    for si, comp in enumerate(comps):
        if not any(comp):
            continue
        if not spaces[si].contains(comp):
            raise AssertionError("component escaped its fixed space")
        out.append((tuple(tuple(W[i]) for i in subsets[si]), comp))
        acc = [a + b for a, b in zip(acc, comp)]
    if acc != x:
        raise AssertionError("components do not sum to the element")
    if not out:
        out.append((tuple(tuple(W[i]) for i in subsets[0]), x))
    return out


def other_side(L, cls, side):
    """A unimodular complement of [cls] inside (side + cls)^⊥.

    Seen from the other component the class is -cls, so johnson_of_bp with
    BoundingPairDatum(-cls, other_side(...)) matches the original value.
    """
    _, C = split_radical(perp(L, list(side.basis) + [list(cls)]))
    return LatticeSubgroup(L, C)


__all__ = [
    "BoundingPairDatum",
    "JohnsonTarget",
    "QuotientAction",
    "decompose_into_fixed_family",
    "fixed_space_of_action",
    "fixed_space_of_transvection",
    "h1_intersection_dim",
    "johnson_of_bp",
    "perp_image",
    "span",
    "transvection_action",
]


def h1_intersection_dim(t, S):
    """dim(∧³(S ⊗ Q) ∩ embedded H_1); zero means ∧³S injects into the target."""
    return wedge_of_lattice(S, 3).intersect(t.embedded_H1).dim
