"""Exact rational subspace arithmetic inside ∧²Q^n and ∧³Q^n."""

from fractions import Fraction
from itertools import combinations
from math import comb

import flint
import numpy as np

from . import intlin
from .errors import PreconditionError
from .lattice import LatticeSubgroup, SymplecticLattice, split_radical, symplectic_basis

_INT64_SAFE = 2**62


class WedgeSpace:
    """∧^degree Q^n with lexicographically ordered index tuples."""

    _cache = {}

    def __new__(cls, n, degree):
        key = (n, degree)
        if key not in cls._cache:
            self = object.__new__(cls)
            self.n = n
            self.degree = degree
            self.indices = list(combinations(range(n), degree))
            self.index = {t: i for i, t in enumerate(self.indices)}
            self._cols = np.array(self.indices, dtype=np.int64).reshape(len(self.indices), degree)
            cls._cache[key] = self
        return cls._cache[key]

    @property
    def dimension(self):
        return len(self.indices)

    def basis_element(self, idx):
        v = [0] * self.dimension
        sign, t = _sort_sign(idx)
        if sign:
            v[self.index[t]] = sign
        return v

    def wedge(self, *vecs):
        if len(vecs) != self.degree:
            raise PreconditionError("wrong number of factors")
        return compound([list(v) for v in vecs], self.degree)[0]

    def __repr__(self):
        return f"WedgeSpace(n={self.n}, degree={self.degree})"


def _sort_sign(idx):
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


def compound(rows, degree):
    """Rows of all degree-fold wedges of the given integer rows."""
    m = len(rows)
    if m < degree:
        return []
    n = len(rows[0])
    W = WedgeSpace(n, degree)
    big = max((abs(x) for r in rows for x in r), default=0)
    safe = (big**degree) * 6 < _INT64_SAFE
    B = np.array(rows, dtype=np.int64 if safe else object)
    R = np.array(list(combinations(range(m), degree)), dtype=np.int64)
    C = W._cols
    out = []
    step = max(1, 200000 // max(1, len(C)))
    for s in range(0, len(R), step):
        X = B[R[s : s + step]]  # (k, degree, n)
        G = X[:, :, C]  # (k, degree, N, degree)
        if degree == 2:
            D = G[:, 0, :, 0] * G[:, 1, :, 1] - G[:, 0, :, 1] * G[:, 1, :, 0]
        elif degree == 3:
            D = (
                G[:, 0, :, 0] * (G[:, 1, :, 1] * G[:, 2, :, 2] - G[:, 1, :, 2] * G[:, 2, :, 1])
                - G[:, 0, :, 1] * (G[:, 1, :, 0] * G[:, 2, :, 2] - G[:, 1, :, 2] * G[:, 2, :, 0])
                + G[:, 0, :, 2] * (G[:, 1, :, 0] * G[:, 2, :, 1] - G[:, 1, :, 1] * G[:, 2, :, 0])
            )
        elif degree == 1:
            D = G[:, 0, :, 0]
        else:
            raise PreconditionError("degree must be 1, 2 or 3")
        out.extend([int(x) for x in row] for row in D.tolist())
    return out


def _fmpq_rows(rows, ncols):
    if not rows:
        return flint.fmpq_mat(0, ncols)
    flat = []
    for r in rows:
        for x in r:
            flat.append(flint.fmpq(x.numerator, x.denominator) if isinstance(x, Fraction) else x)
    return flint.fmpq_mat(len(rows), ncols, flat)


def _fmpz_rows(rows, ncols):
    """Integer matrix with the same row space, or None if that needs rationals."""
    try:
        return flint.fmpz_mat(len(rows), ncols, [x for r in rows for x in r])
    except TypeError:
        return None


def _rref_z(Mz):
    """Canonical RREF (nonzero rows, fmpq) and rank of an integer matrix."""
    R, den, rk = Mz.rref()
    if rk < R.nrows():
        n = R.ncols()
        R = flint.fmpz_mat(rk, n, list(R.entries())[: rk * n])
    return flint.fmpq_mat(R) / den, rk


def _numer(M):
    return M.numer_denom()[0]


def _to_fraction(x):
    return Fraction(int(x.p), int(x.q))


class RationalSubspace:
    """A subspace of Q^ncols stored by its reduced row echelon form."""

    __slots__ = ("ncols", "mat", "dim", "_pivots", "_key", "_sparse")

    def __init__(self, ncols, mat, dim):
        self.ncols = ncols
        self.mat = mat
        self.dim = dim
        self._pivots = None
        self._key = None
        self._sparse = None

    @classmethod
    def from_rows(cls, rows, ncols):
        rows = [r for r in rows if any(r)]
        if not rows:
            return cls(ncols, flint.fmpq_mat(0, ncols), 0)
        Mz = _fmpz_rows(rows, ncols)
        if Mz is not None:
            R, rk = _rref_z(Mz)
            return cls(ncols, R, rk)
        R, rk = _fmpq_rows(rows, ncols).rref()
        if rk < R.nrows():
            R = _slice_rows(R, rk)
        return cls(ncols, R, rk)

    @classmethod
    def zero(cls, ncols):
        return cls(ncols, flint.fmpq_mat(0, ncols), 0)

    @classmethod
    def full(cls, ncols):
        return cls.from_rows([[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)], ncols)

    def rows(self):
        return [[_to_fraction(x) for x in row] for row in self.mat.tolist()]

    def sparse_rows(self):
        if self._sparse is None:
            out = []
            for row in self.mat.tolist():
                nz = [(j, _to_fraction(x)) for j, x in enumerate(row) if x != 0]
                out.append((nz[0][0], nz))
            self._sparse = out
        return self._sparse

    @property
    def pivots(self):
        if self._pivots is None:
            ent = self.mat.entries()
            n = self.ncols
            piv = []
            j = 0
            for i in range(self.dim):
                while ent[i * n + j] == 0:
                    j += 1
                piv.append(j)
                j += 1
            self._pivots = piv
        return self._pivots

    def reduce(self, v):
        """Canonical representative of v modulo this subspace."""
        v = [Fraction(x) for x in v]
        for p, row in self.sparse_rows():
            c = v[p]
            if c:
                for j, m in row:
                    v[j] -= c * m
        return v

    def contains(self, v):
        return not any(self.reduce(v))

    def contains_subspace(self, other):
        if other.dim > self.dim:
            return False
        if other.dim == 0 or self.dim == self.ncols:
            return True
        # other ⊆ self iff each row equals its pivot-column coordinates times our RREF
        Zo, do = other.mat.numer_denom()
        Zs, ds = self.mat.numer_denom()
        return Zo * _selector(self.ncols, self.pivots) * Zs == Zo * ds

    def sum_dim(self, other):
        # rank [A; B] = rank(A^T A + B^T B) over Q
        A, B = _numer(self.mat), _numer(other.mat)
        return (A.transpose() * A + B.transpose() * B).rank()

    def sum(self, other):
        if other.dim == 0:
            return self
        if self.dim == 0:
            return other
        ent = list(_numer(self.mat).entries()) + list(_numer(other.mat).entries())
        R, rk = _rref_z(flint.fmpz_mat(self.dim + other.dim, self.ncols, ent))
        return RationalSubspace(self.ncols, R, rk)

    def intersect(self, other):
        if self.dim == 0 or other.dim == 0:
            return RationalSubspace.zero(self.ncols)
        # x A lies in B iff its residue modulo the RREF of B vanishes
        A, B = self.mat, other.mat
        piv = other.pivots
        ent = A.entries()
        n = self.ncols
        Ap = flint.fmpq_mat(self.dim, len(piv), [ent[i * n + p] for i in range(self.dim) for p in piv])
        R = A - Ap * B
        Rz, _ = R.transpose().numer_denom()
        X, nul = Rz.nullspace()
        if nul == 0:
            return RationalSubspace.zero(n)
        Xe = X.entries()
        cols = X.ncols()
        K = flint.fmpq_mat(nul, self.dim, [Xe[i * cols + j] for j in range(nul) for i in range(self.dim)])
        M, rk = (K * A).rref()
        return RationalSubspace(n, _slice_rows(M, rk), rk)

    def annihilator(self):
        """Integer matrix N (ncols x codim) with this subspace = {x : x N = 0}."""
        n = self.ncols
        piv = self.pivots
        pset = set(piv)
        free = [j for j in range(n) if j not in pset]
        if not free:
            return flint.fmpz_mat(n, 0)
        if not self.dim:
            return _selector(n, free)
        Z, den = self.mat.numer_denom()
        # column j: den e_j - Σ_i Z[i][j] e_{p_i}
        Sf = _selector(n, free)
        Sp = flint.fmpz_mat(n, self.dim, [1 if r == p else 0 for r in range(n) for p in piv])
        return Sf * den - Sp * (Z * Sf)

    def key(self):
        if self._key is None:
            self._key = (self.ncols, tuple(str(x) for x in self.mat.entries()))
        return self._key

    def __eq__(self, other):
        return isinstance(other, RationalSubspace) and self.ncols == other.ncols and self.dim == other.dim and self.mat == other.mat

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"RationalSubspace(dim={self.dim}, ambient={self.ncols})"


def _slice_rows(M, k):
    n = M.ncols()
    ent = list(M.entries())[: k * n]
    return flint.fmpq_mat(k, n, ent)


def _int_rows(M):
    out = []
    for row in M.tolist():
        out.append(intlin.clear_denominators([_to_fraction(x) for x in row]))
    return out


def subspace_of(S, n=None):
    """Rational span of a LatticeSubgroup, list of vectors, or RationalSubspace."""
    if isinstance(S, RationalSubspace):
        return S
    if isinstance(S, LatticeSubgroup):
        return RationalSubspace.from_rows(S.rows(), S.ambient.rank)
    if isinstance(S, SymplecticLattice):
        return RationalSubspace.full(S.rank)
    rows = [list(v) for v in S]
    return RationalSubspace.from_rows(rows, n if n is not None else len(rows[0]))


def wedge_power_of_subspace(S, degree, n=None):
    S = subspace_of(S, n)
    if degree not in (2, 3):
        raise PreconditionError("degree must be 2 or 3")
    W = WedgeSpace(S.ncols, degree)
    if S.dim < degree:
        return RationalSubspace.zero(W.dimension)
    return RationalSubspace.from_rows(compound(_int_rows(S.mat), degree), W.dimension)


def wedge_of_lattice(S, degree):
    """∧^degree of the rational span of an integer subgroup."""
    rows = S.rows() if isinstance(S, LatticeSubgroup) else [list(v) for v in S]
    n = S.ambient.rank if isinstance(S, LatticeSubgroup) else len(rows[0])
    W = WedgeSpace(n, degree)
    return RationalSubspace.from_rows(compound(rows, degree), W.dimension)


def symplectic_omega(pairs, n, degree_two=True):
    """Σ a_i ∧ b_i as a vector of ∧²Q^n."""
    W = WedgeSpace(n, 2)
    out = [0] * W.dimension
    for a, b in pairs:
        w = W.wedge(a, b)
        for i, x in enumerate(w):
            if x:
                out[i] += x
    return out


def wedge_vec_with_two_form(v, two, n):
    """v ∧ (two-form) in ∧³Q^n."""
    W2 = WedgeSpace(n, 2)
    W3 = WedgeSpace(n, 3)
    out = [0] * W3.dimension
    nz = [(i, x) for i, x in enumerate(v) if x]
    for k, c in enumerate(two):
        if not c:
            continue
        p, q = W2.indices[k]
        for i, x in nz:
            if i == p or i == q:
                continue
            sign, t = _sort_sign((i, p, q))
            out[W3.index[t]] += sign * x * c
    return out


class JohnsonTarget:
    """∧³Q^{2g} modulo the embedded copy {c ∧ ω} of H_1."""

    _cache = {}

    def __new__(cls, g):
        if g in cls._cache:
            return cls._cache[g]
        self = object.__new__(cls)
        self.g = g
        self.lattice = SymplecticLattice.standard(g)
        n = 2 * g
        self.total = WedgeSpace(n, 3)
        self.omega = symplectic_omega([(self.lattice.alpha(i), self.lattice.beta(i)) for i in range(1, g + 1)], n)
        rows = [wedge_vec_with_two_form(self.lattice.basis_vector(c), self.omega, n) for c in range(n)]
        self.embedded_H1 = RationalSubspace.from_rows(rows, self.total.dimension)
        cls._cache[g] = self
        return self

    @property
    def dimension(self):
        return self.total.dimension - self.embedded_H1.dim

    def quotient_project(self, x):
        v = [Fraction(c) for c in x]
        if len(v) != self.total.dimension:
            raise PreconditionError("element has the wrong dimension")
        for p, row in self.embedded_H1.sparse_rows():
            c = v[p]
            if c:
                for j, m in row:
                    v[j] -= c * m
        return v

    def free_columns(self):
        piv = set(self.embedded_H1.pivots)
        return [j for j in range(self.total.dimension) if j not in piv]

    def project_subspace(self, S):
        """Image of a subspace of ∧³ in the canonical complement."""
        return RationalSubspace.from_rows([self.quotient_project(r) for r in S.rows()], self.total.dimension)

    def wedge3(self, u, v, w):
        return self.total.wedge(u, v, w)


def quotient_project(t, x):
    return t.quotient_project(x)


def spanning_pairs(S):
    """Pairs (γ, δ), primitive with <γ, δ> = 1, whose wedges span ∧²(S ⊗ Q)."""
    if isinstance(S, SymplecticLattice):
        S = LatticeSubgroup.whole(S)
    L = S.ambient
    if S.genus < 1:
        raise PreconditionError("spanning pairs need genus at least 1")
    R, C = split_radical(S)
    W = LatticeSubgroup(L, C)
    sp = symplectic_basis(W)
    rad = R.rows()
    add = intlin.vec_add
    pairs = []
    for a, b in sp:
        pairs.append((a, b))
    # x ∧ b_i from (a_i + x, b_i) and a_i ∧ x from (a_i, b_i + x)
    for i, (a, b) in enumerate(sp):
        others = [v for j, pr in enumerate(sp) if j != i for v in pr] + rad
        for x in others:
            pairs.append((add(a, x), b))
            pairs.append((a, add(b, x)))
    # radical ∧ radical from (a_1 + r, b_1 + s)
    a1, b1 = sp[0]
    for r, s in combinations(rad, 2):
        pairs.append((add(a1, r), add(b1, s)))
    for g_, d_ in pairs:
        if L.pair(g_, d_) != 1 or intlin.content(g_) != 1 or intlin.content(d_) != 1:
            raise AssertionError("spanning pair construction failed")
    return _dedupe_pairs(pairs)


def _dedupe_pairs(pairs):
    seen = set()
    out = []
    for g_, d_ in pairs:
        k = (tuple(g_), tuple(d_))
        if k not in seen:
            seen.add(k)
            out.append((g_, d_))
    return out


def pairs_span(pairs, n):
    W = WedgeSpace(n, 2)
    return RationalSubspace.from_rows([W.wedge(g_, d_) for g_, d_ in pairs], W.dimension)


_SELECT = {}


def _selector(n, cols):
    key = (n, tuple(cols))
    if key not in _SELECT:
        if len(_SELECT) > 256:
            _SELECT.clear()
        pos = {c: j for j, c in enumerate(cols)}
        _SELECT[key] = flint.fmpz_mat(n, len(cols), [1 if pos.get(i) == j else 0 for i in range(n) for j in range(len(cols))])
    return _SELECT[key]


def _restrict_columns(S, cols):
    if not S.dim:
        return RationalSubspace(len(cols), flint.fmpq_mat(0, len(cols)), 0)
    if len(cols) == S.ncols and list(cols) == list(range(S.ncols)):
        return S
    Z, den = S.mat.numer_denom()
    return RationalSubspace(len(cols), flint.fmpq_mat(Z * _selector(S.ncols, cols)) / den, S.dim)


def inclusion_exclusion_dims(V, parts):
    """Dimensions d_k of k-fold intersections and the alternating-sum identity.

    d_0 = dim V.  The report flags unequal same-size intersection dimensions.
    """
    n = len(parts)
    for P in parts:
        if not V.contains_subspace(P):
            raise PreconditionError("each part must lie in V")
    # the pivot columns of V restrict injectively on V, so work in dim V coordinates;
    # (P_1 ∩ ... ∩ P_k)^⊥ = P_1^⊥ + ... + P_k^⊥, so each level is a rank computation
    cols = V.pivots
    ann = []
    for P in parts:
        Q = _restrict_columns(P, cols)
        Q = RationalSubspace(Q.ncols, *_rref_z(_numer(Q.mat))) if Q.dim else Q
        ann.append(Q.annihilator())
    grams = [N * N.transpose() for N in ann]
    d = [V.dim]
    uniform = True
    for k in range(1, n + 1):
        dims = set()
        for sub in combinations(range(n), k):
            # rank [N_1 ... N_k] = rank Σ N_i N_i^T over Q
            G = grams[sub[0]]
            for i in sub[1:]:
                G = G + grams[i]
            dims.add(V.dim - G.rank())
        if len(dims) > 1:
            uniform = False
        d.append(min(dims))
    G = None
    for P in parts:
        Z = _numer(P.mat) if P.dim else flint.fmpz_mat(0, V.ncols)
        G = Z.transpose() * Z if G is None else G + Z.transpose() * Z
    total = G.rank() if G is not None else 0
    surjective = total == V.dim
    alt = sum((-1) ** k * comb(n, k) * d[k] for k in range(n + 1)) if uniform else None
    image_formula = sum((-1) ** (k + 1) * comb(n, k) * d[k] for k in range(1, n + 1)) if uniform else None
    return {
        "d": d,
        "uniform": uniform,
        "alternating_sum": alt,
        "image_dim_formula": image_formula,
        "image_dim": total,
        "surjective": surjective,
        "identity_holds": (alt == 0) if (uniform and surjective) else None,
        "hypothesis_violated": not uniform,
    }


def _adjoint_rank(L, W, within):
    rows = [L.adjoint(w) for w in W]
    if within is None:
        return intlin.rank(rows)
    # functionals restricted to the subgroup
    return intlin.rank([[intlin.dot(r, b) for b in within.basis] for r in rows])


def perp_family_report(L, W, degree, m, within=None):
    """Compare Σ over m-subsets W' of ∧^degree((W')^⊥) with the whole ∧^degree."""
    W = [list(w) for w in W]
    if isinstance(L, LatticeSubgroup):
        within, L = L, L.ambient
    for w in W:
        if intlin.content(w) != 1:
            raise PreconditionError("family vectors must be primitive")
    if _adjoint_rank(L, W, within) != len(W):
        raise PreconditionError("adjoint images of the family are dependent")
    from .lattice import perp, intersect

    base = within if within is not None else LatticeSubgroup.whole(L)
    target = wedge_of_lattice(base, degree)
    total = RationalSubspace.zero(target.ncols)
    for sub in combinations(range(len(W)), m):
        P = intersect(perp(L, [W[i] for i in sub]), base)
        total = total.sum(wedge_of_lattice(P, degree))
    return {"target_dim": target.dim, "sum_dim": total.dim, "deficit": target.dim - total.dim, "surjective": total.dim == target.dim}


def perp_family_cover(L, W, degree, m, within=None):
    return perp_family_report(L, W, degree, m, within)["surjective"]
