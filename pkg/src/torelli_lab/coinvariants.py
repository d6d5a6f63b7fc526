"""Finite-dimensional actions: fixed spaces, coinvariants, fixed-sum cokernels.

Groups are given only by generator matrices acting on column vectors of
Q^d.  Normal generation and generation by conjugates cannot be decided from
matrices alone and are not checked.
"""

from fractions import Fraction

import flint

from . import intlin
from .errors import PreconditionError
from .exterior import RationalSubspace


def _qmat(M):
    return flint.fmpq_mat([[intlin._q(x) for x in row] for row in M])


def _fr(M):
    return [[Fraction(int(x.p), int(x.q)) for x in row] for row in M.tolist()]


def _identity(d):
    return [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]


def _columns(M):
    d = len(M)
    return [[M[i][j] for i in range(d)] for j in range(len(M[0]) if M else 0)]


class MatrixAction:
    """Labelled invertible rational d x d generator matrices."""

    def __init__(self, dim, generators):
        self.dim = dim
        self.generators = {}
        for label, M in dict(generators).items():
            M = [[Fraction(x) for x in row] for row in M]
            if len(M) != dim or any(len(r) != dim for r in M):
                raise PreconditionError(f"generator {label!r} is not {dim} x {dim}")
            if dim and _qmat(M).det() == 0:
                raise PreconditionError(f"generator {label!r} is not invertible")
            self.generators[label] = M

    def matrix(self, label):
        if label not in self.generators:
            raise PreconditionError(f"unknown generator {label!r}")
        return self.generators[label]

    def inverse(self, label):
        return _fr(_qmat(self.matrix(label)).inv())

    def word(self, word):
        """Product of generators; a label prefixed with '-' is its inverse."""
        M = _qmat(_identity(self.dim)) if self.dim else None
        for w in word:
            A = self.inverse(w[1:]) if w.startswith("-") else self.matrix(w)
            M = M * _qmat(A)
        return _fr(M) if self.dim else []

    def labels(self):
        return list(self.generators)


class TransvectiveData:
    """An action with a designated family F of pairwise commuting generators."""

    def __init__(self, action, F):
        self.action = action
        self.F = list(F)
        for f in self.F:
            action.matrix(f)
        for i, f in enumerate(self.F):
            for h in self.F[i + 1 :]:
                A, B = _qmat(action.matrix(f)), _qmat(action.matrix(h))
                if A * B != B * A:
                    raise PreconditionError(f"designated generators {f!r} and {h!r} do not commute")


def _kernel_minus_identity(M):
    d = len(M)
    D = [[M[i][j] - (1 if i == j else 0) for j in range(d)] for i in range(d)]
    # x with (M - I) x = 0: left kernel of the transpose
    K = intlin.q_left_kernel(_columns(D), d) if d else []
    return RationalSubspace.from_rows(K, d)


def fixed_space_of(M):
    return _kernel_minus_identity([[Fraction(x) for x in r] for r in M])


def fixed_space(action, label):
    """ker(M_label - I)."""
    return _kernel_minus_identity(action.matrix(label))


def _image_minus_identity(M):
    d = len(M)
    D = [[M[i][j] - (1 if i == j else 0) for j in range(d)] for i in range(d)]
    return RationalSubspace.from_rows(_columns(D), d)


def _complement_basis(S):
    """Standard basis vectors at the non-pivot columns of S."""
    piv = set(S.pivots)
    return [[Fraction(int(i == j)) for i in range(S.ncols)] for j in range(S.ncols) if j not in piv]


def coinvariants(action):
    """V / span{g v - v}: dimension and basis vectors of a complement."""
    d = action.dim
    S = RationalSubspace.zero(d)
    for label in action.labels():
        S = S.sum(_image_minus_identity(action.matrix(label)))
    basis = _complement_basis(S)
    return {"dimension": d - S.dim, "basis": basis, "relations": S}


def cokernel_of_fixed_sum(data):
    """V / Σ_{f ∈ F} V^f."""
    d = data.action.dim
    S = RationalSubspace.zero(d)
    for f in data.F:
        S = S.sum(fixed_space(data.action, f))
    return {"dimension": d - S.dim, "basis": _complement_basis(S), "fixed_sum": S}


def transport(M, S):
    """Image of the subspace S under the matrix M."""
    rows = []
    for v in S.rows():
        rows.append([sum(M[i][j] * v[j] for j in range(len(v))) for i in range(len(M))])
    return RationalSubspace.from_rows(rows, S.ncols)


def base_case_decomposition(data, conjugators):
    """φ: V → ⊕_{g ∈ H} V / V^g for H = {h f h^{-1}} with the single designated f.

    ker φ = ⋂ V^g; every vector of ker φ is checked to be fixed by every g.
    """
    if len(data.F) != 1:
        raise PreconditionError("the base case needs exactly one designated generator")
    if not conjugators:
        raise PreconditionError("the base case needs at least one conjugator word")
    A = data.action
    d = A.dim
    f = data.F[0]
    F = A.matrix(f)
    conj = []
    for word in conjugators:
        Hm = _qmat(A.word(word)) if word else _qmat(_identity(d))
        conj.append(_fr(Hm * _qmat(F) * Hm.inv()))
    fixed = [_kernel_minus_identity(M) for M in conj]
    ker = fixed[0]
    for S in fixed[1:]:
        ker = ker.intersect(S)
    for M in conj:
        for v in ker.rows():
            if [sum(M[i][j] * v[j] for j in range(d)) for i in range(d)] != v:
                raise AssertionError("a kernel vector is moved by a conjugate")
    # im φ has dimension rank of v -> (v mod V^g)_g, i.e. d - dim ker
    quot = []
    for S in fixed:
        quot.append(d - S.dim)
    rows = []
    for j in range(d):
        e = [Fraction(int(i == j)) for i in range(d)]
        rows.append([x for S in fixed for x in S.reduce(e)])
    image_dim = intlin.qrank(rows) if rows else 0
    return {
        "dim_V": d,
        "kernel": ker,
        "kernel_dim": ker.dim,
        "image_dim": image_dim,
        "quotient_dims": quot,
        "rank_nullity": ker.dim + image_dim == d,
        "conjugates": conj,
    }
