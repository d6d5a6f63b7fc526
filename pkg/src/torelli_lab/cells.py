"""Cells of the quotient complex as cyclic decompositions of [a]^⊥.

A k-cell is a cyclically ordered tuple (H_0, ..., H_k) of pieces: saturated
subgroups of [a]^⊥ containing [a], with radical Z[a].  Cells are stored in
the rotation whose first piece has the smallest HNF key; rotating a k-cell
by one position multiplies its orientation by (-1)^k.
"""

from fractions import Fraction

from . import intlin
from .errors import InvariantError, PreconditionError
from .exterior import WedgeSpace, RationalSubspace, symplectic_omega
from .lattice import LatticeSubgroup, intersect, perp, project, span, subgroup_sum, symplectic_basis


def a_vector(L):
    return L.basis_vector(0)


def b_vector(L):
    return L.basis_vector(1)


_APERP = {}


def a_perp(L):
    if L not in _APERP:
        _APERP[L] = perp(L, [a_vector(L)])
    return _APERP[L]


_CHECKED = set()


def _remember(key):
    if len(_CHECKED) > 50000:
        _CHECKED.clear()
    _CHECKED.add(key)


def check_piece(L, H):
    if (L, H.basis) in _CHECKED:
        return
    _check_piece(L, H)
    _remember((L, H.basis))


def _check_piece(L, H):
    a = a_vector(L)
    if not H.contains(a):
        raise InvariantError("piece must contain [a]")
    if not a_perp(L).contains_subgroup(H):
        raise InvariantError("piece must lie in [a]^⊥")
    if H.radical() != span(L, [a]):
        raise InvariantError("piece must have radical exactly Z[a]")
    if H.rank != 2 * H.genus + 1:
        raise InvariantError("piece rank must be 2*genus + 1")
    if H.genus < 1:
        raise InvariantError("piece must have genus at least 1")


def check_decomposition(L, pieces):
    """Validate the invariants of a cyclic decomposition of [a]^⊥."""
    key = (L, tuple(sorted(H.basis for H in pieces)))
    if key in _CHECKED:
        return
    _check_decomposition(L, pieces)
    _remember(key)


def _check_decomposition(L, pieces):
    g = L.rank // 2
    a = a_vector(L)
    Za = span(L, [a])
    for H in pieces:
        check_piece(L, H)
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            A, B = pieces[i], pieces[j]
            if intersect(A, B) != Za:
                raise InvariantError("distinct pieces must meet exactly in Z[a]")
            for x in A.basis:
                for y in B.basis:
                    if L.pair(x, y):
                        raise InvariantError("distinct pieces must be orthogonal")
    if len(pieces) > 1 and subgroup_sum(L, *pieces) != a_perp(L):
        raise InvariantError("pieces must sum (saturated) to [a]^⊥")
    if len(pieces) == 1 and pieces[0] != a_perp(L):
        raise InvariantError("a 0-cell is the single piece [a]^⊥")
    total = sum(H.genus for H in pieces)
    if total != g - 1:
        raise InvariantError(f"piece genera must sum to g - 1 = {g - 1}, got {total}")


def _canonical_rotation(pieces):
    k1 = len(pieces)
    best = min(range(k1), key=lambda r: tuple(pieces[(r + i) % k1].basis for i in range(k1)))
    return best


class Cell:
    """A k-cell in canonical rotation."""

    __slots__ = ("ambient", "pieces", "_key")

    def __init__(self, L, pieces, check=True):
        pieces = tuple(pieces)
        if check:
            check_decomposition(L, pieces)
        r = _canonical_rotation(pieces)
        self.ambient = L
        self.pieces = pieces[r:] + pieces[:r]
        self._key = tuple(H.basis for H in self.pieces)

    @property
    def dim(self):
        return len(self.pieces) - 1

    def key(self):
        return self._key

    def genera(self):
        return tuple(H.genus for H in self.pieces)

    def __eq__(self, other):
        return isinstance(other, Cell) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Cell(dim={self.dim}, genera={self.genera()})"


def oriented(L, pieces, check=True):
    """(cell, sign) for the tuple in the given cyclic order."""
    pieces = tuple(pieces)
    c = Cell(L, pieces, check=check)
    r = _canonical_rotation(pieces)
    k = len(pieces) - 1
    return c, (-1) ** (k * r)


def canonical_key(cell):
    return cell.key()


class Chain:
    """Formal rational combination of cells of one dimension."""

    __slots__ = ("dim", "terms", "cells")

    def __init__(self, dim):
        self.dim = dim
        self.terms = {}
        self.cells = {}

    @classmethod
    def of(cls, L, pieces, coeff=1, check=True):
        c, s = oriented(L, pieces, check=check)
        ch = cls(c.dim)
        ch.add_cell(c, s * coeff)
        return ch

    def add_cell(self, cell, coeff):
        if cell.dim != self.dim:
            raise PreconditionError("cell dimension does not match chain dimension")
        coeff = Fraction(coeff)
        if not coeff:
            return self
        k = cell.key()
        v = self.terms.get(k, 0) + coeff
        if v:
            self.terms[k] = v
            self.cells[k] = cell
        else:
            self.terms.pop(k, None)
            self.cells.pop(k, None)
        return self

    def add_oriented(self, L, pieces, coeff, check=True):
        c, s = oriented(L, pieces, check=check)
        return self.add_cell(c, s * coeff)

    def copy(self):
        ch = Chain(self.dim)
        ch.terms = dict(self.terms)
        ch.cells = dict(self.cells)
        return ch

    def __iadd__(self, other):
        for k, v in other.terms.items():
            self.add_cell(other.cells[k], v)
        return self

    def __add__(self, other):
        out = self.copy()
        out += other
        return out

    def scaled(self, s):
        out = Chain(self.dim)
        s = Fraction(s)
        if s:
            out.terms = {k: v * s for k, v in self.terms.items()}
            out.cells = dict(self.cells)
        return out

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Chain) and self.dim == other.dim and self.terms == other.terms

    def items(self):
        for k in sorted(self.terms):
            yield self.cells[k], self.terms[k]

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"Chain(dim={self.dim}, terms={len(self.terms)})"


def merge(L, A, B):
    return subgroup_sum(L, A, B)


def boundary(cell):
    """Σ_{i<k} (-1)^i σ_i - σ_k, σ_i merging H_i, H_{i+1} and σ_k merging H_k, H_0."""
    L = cell.ambient
    P = cell.pieces
    k = cell.dim
    out = Chain(k - 1)
    if k < 1:
        raise PreconditionError("boundary needs k >= 1")
    for i in range(k):
        tup = P[:i] + (merge(L, P[i], P[i + 1]),) + P[i + 2 :]
        out.add_oriented(L, tup, (-1) ** i, check=False)
    tup = P[1:k] + (merge(L, P[k], P[0]),)
    out.add_oriented(L, tup, -1, check=False)
    return out


def boundary_chain(ch):
    out = Chain(ch.dim - 1)
    for c, v in ch.items():
        out += boundary(c).scaled(v)
    return out


def dual(cell):
    if cell.dim != 2:
        raise PreconditionError("dual cells are defined for 2-cells")
    H0, H1, H2 = cell.pieces
    return Cell(cell.ambient, (H0, H2, H1), check=False)


_BM = {}


def bm_class(cell2):
    """σ - dual(σ), signed so the cell with the smaller key has coefficient +1."""
    if cell2.dim != 2:
        raise PreconditionError("bm_class needs a 2-cell")
    k = (cell2.ambient, frozenset(cell2.key()))
    if k not in _BM:
        if len(_BM) > 20000:
            _BM.clear()
        _BM[k] = _bm_class(cell2)
    return _BM[k].copy()


def _bm_class(cell2):
    d = dual(cell2)
    ch = Chain(2)
    ch.add_cell(cell2, 1)
    ch.add_cell(d, -1)
    first = min(ch.terms)
    if ch.terms[first] < 0:
        ch = -ch
    if not boundary_chain(ch).is_zero():
        raise AssertionError("Bestvina–Margalit class is not a cycle")
    return ch


class BMTorus:
    """The unordered piece set of a 2-cell and its dual."""

    __slots__ = ("ambient", "pieces", "_key")

    def __init__(self, L, pieces, check=True):
        pieces = tuple(sorted(pieces, key=lambda H: H.basis))
        if len(pieces) != 3:
            raise PreconditionError("a torus has three pieces")
        if check:
            check_decomposition(L, pieces)
        self.ambient = L
        self.pieces = pieces
        self._key = tuple(H.basis for H in pieces)

    def key(self):
        return self._key

    def cell(self):
        return Cell(self.ambient, self.pieces, check=False)

    def fundamental_class(self):
        return bm_class(self.cell())

    def genera(self):
        return tuple(H.genus for H in self.pieces)

    def __eq__(self, other):
        return isinstance(other, BMTorus) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"BMTorus(genera={self.genera()})"


def torus_of(cell2):
    return BMTorus(cell2.ambient, cell2.pieces, check=False)


def oriented_bm(L, pieces):
    """The 2-chain (X, Y, Z) - (Y, X, Z) for the given order."""
    X, Y, Z = pieces
    ch = Chain(2)
    ch.add_oriented(L, (X, Y, Z), 1, check=False)
    ch.add_oriented(L, (Y, X, Z), -1, check=False)
    return ch


def torus_sign(L, pieces):
    """s with oriented_bm(pieces) = s * fundamental class of the torus."""
    T = BMTorus(L, pieces, check=False)
    F = T.fundamental_class()
    O = oriented_bm(L, pieces)
    if O == F:
        return 1
    if O == -F:
        return -1
    raise AssertionError("ordered torus chain is not ± its fundamental class")


def compose_edges(y, z, i=0, j=0):
    """Edge yz with pieces saturate(H + H') and the complement H^⊥ ∩ H'^⊥ ∩ [a]^⊥."""
    L = y.ambient
    if y.dim != 1 or z.dim != 1:
        raise PreconditionError("compose_edges needs edges")
    H = y.pieces[i]
    Hp = z.pieces[j]
    Za = span(L, [a_vector(L)])
    if intersect(H, Hp) != Za:
        raise PreconditionError("designated pieces must meet exactly in Z[a]")
    S = merge(L, H, Hp)
    C = intersect(perp(L, list(H.basis) + list(Hp.basis)), a_perp(L))
    try:
        return Cell(L, (S, C))
    except InvariantError as e:
        raise PreconditionError(f"composed pieces do not form an edge: {e}") from e


def three_cell_chain(L, H0, H1, H2, H3):
    """τ_0 - τ_1 + τ_2 with τ_1 = (H1,H0,H2,H3), τ_2 = (H1,H2,H0,H3)."""
    ch = Chain(3)
    ch.add_oriented(L, (H0, H1, H2, H3), 1)
    ch.add_oriented(L, (H1, H0, H2, H3), -1, check=False)
    ch.add_oriented(L, (H1, H2, H0, H3), 1, check=False)
    return ch


def _formal(L, terms):
    ch = Chain(2)
    for c, tup in terms:
        ch.add_oriented(L, tup, c, check=False)
    return ch


def bm_sum_certificate(L, H0, H1, H2, H3):
    """Boundary certificate for the torus addition relation on a 4-piece configuration."""
    m = lambda A, B: merge(L, A, B)
    chain3 = three_cell_chain(L, H0, H1, H2, H3)
    t0 = Chain.of(L, (H0, H1, H2, H3), check=False)
    t1 = Chain.of(L, (H1, H0, H2, H3), check=False)
    t2 = Chain.of(L, (H1, H2, H0, H3), check=False)
    displayed = [
        (boundary_chain(t0), [(1, (m(H0, H1), H2, H3)), (-1, (H0, m(H1, H2), H3)), (1, (H0, H1, m(H2, H3))), (-1, (m(H0, H3), H1, H2))]),
        (-boundary_chain(t1), [(-1, (m(H0, H1), H2, H3)), (1, (H1, m(H0, H2), H3)), (-1, (H1, H0, m(H2, H3))), (1, (m(H1, H3), H0, H2))]),
        (boundary_chain(t2), [(1, (m(H1, H2), H0, H3)), (-1, (H1, m(H2, H0), H3)), (1, (H1, H2, m(H0, H3))), (-1, (m(H1, H3), H2, H0))]),
    ]
    expansions_ok = all(b == _formal(L, terms) for b, terms in displayed)
    lhs = boundary_chain(chain3)
    x_yz = (H0, m(H1, H2), H3)
    x_y = (H0, H1, m(H2, H3))
    x_z = (m(H1, H3), H0, H2)
    rhs = -oriented_bm(L, x_yz) + oriented_bm(L, x_y) + oriented_bm(L, x_z)
    tori = {
        "x,yz": BMTorus(L, x_yz, check=False),
        "x,y": BMTorus(L, x_y, check=False),
        "x,z": BMTorus(L, x_z, check=False),
    }
    signs = {"x,yz": -torus_sign(L, x_yz), "x,y": torus_sign(L, x_y), "x,z": torus_sign(L, x_z)}
    return {
        "chain3": chain3,
        "lhs": lhs,
        "rhs": rhs,
        "tori": tori,
        "signs": signs,
        "expansions_verified": expansions_ok,
        "verified": expansions_ok and lhs == rhs,
    }


def compatible_with(cell, V):
    """True iff every given class lies in some piece."""
    L = cell.ambient
    if V and isinstance(V[0], int):
        V = [V]
    for w in V:
        w = list(w)
        if L.pair(w, a_vector(L)):
            raise PreconditionError("class must lie in [a]^⊥")
        if not any(H.contains(w) for H in cell.pieces):
            return False
    return True


def unimodular_part(H, b):
    """H ∩ b^⊥, the canonical unimodular complement of Z[a] in a piece."""
    return intersect(H, perp(H.ambient, [b]))


def omega_prime(L, b=None):
    """ω of [a]^⊥ ∩ b^⊥ in ∧²Q^{2g}."""
    b = b if b is not None else b_vector(L)
    return symplectic_omega(symplectic_basis(unimodular_part(a_perp(L), b)), L.rank)


class H1Model:
    """∧²([a]^⊥ ⊗ Q) / Q ω'_a, with canonical representatives."""

    def __init__(self, L, b=None):
        self.ambient = L
        self.b = b if b is not None else b_vector(L)
        self.space = WedgeSpace(L.rank, 2)
        self.omega = omega_prime(L, self.b)
        self.kernel = RationalSubspace.from_rows([self.omega], self.space.dimension)

    def reduce(self, x):
        return self.kernel.reduce(x)


def h1_edge_class(model, edge, piece=0):
    """ω of the designated piece's unimodular part, modulo ω'_a."""
    if edge.dim != 1:
        raise PreconditionError("h1_edge_class needs an edge")
    L = edge.ambient
    U = unimodular_part(edge.pieces[piece], model.b)
    om = symplectic_omega(symplectic_basis(U), L.rank)
    return model.reduce(om)


def h1_chain_value(model, ch):
    """Σ coeff * class over a 1-chain, each edge read from its first piece."""
    out = [Fraction(0)] * model.space.dimension
    for c, v in ch.items():
        x = h1_edge_class(model, c, 0)
        out = [p + v * q for p, q in zip(out, x)]
    return model.reduce(out)


def vertex_cell(L):
    return Cell(L, (a_perp(L),))


__all__ = [name for name in dir() if not name.startswith("_")]
