"""Exact integer and rational linear algebra on row-vector matrices.

Integer matrices are lists of lists of Python ints; rows are vectors.
Heavy lifting (Hermite normal form, rank, rational row reduction) is
delegated to python-flint.
"""

from fractions import Fraction
from math import gcd

import flint


def _zmat(rows, ncols=None):
    if not rows:
        return flint.fmpz_mat(0, ncols or 0)
    return flint.fmpz_mat([list(r) for r in rows])


def _tolist(m):
    return [[int(x) for x in row] for row in m.tolist()]


def content(v):
    g = 0
    for x in v:
        g = gcd(g, x)
    return g


def primitive_part(v):
    c = content(v)
    if c == 0:
        raise ValueError("zero vector has no primitive part")
    return [x // c for x in v]


def dot(v, w):
    return sum(x * y for x, y in zip(v, w))


def vec_add(v, w, s=1):
    return [x + s * y for x, y in zip(v, w)]


def vec_scale(v, s):
    return [s * x for x in v]


def combo(coeffs, rows, n):
    out = [0] * n
    for c, r in zip(coeffs, rows):
        if c:
            for i, x in enumerate(r):
                if x:
                    out[i] += c * x
    return out


def mat_mul(A, B):
    if not A:
        return []
    if not B:
        return [[] for _ in A]
    return _tolist(_zmat(A) * _zmat(B))


def transpose(A, ncols=None):
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(c) for c in zip(*A)]


def hnf(rows, ncols=None):
    """Nonzero rows of the Hermite normal form of the row span."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return []
    H = _tolist(_zmat(rows).hnf())
    return [r for r in H if any(r)]


def lll(rows):
    """LLL-reduced basis of the row lattice (rows independent)."""
    rows = [list(r) for r in rows]
    if len(rows) < 2:
        return rows
    return _tolist(_zmat(rows).lll())


def rank(rows):
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    return _zmat(rows).rank()


def left_kernel(A, nrows=None):
    """LLL-reduced Z-basis of {x : x A = 0} for an r x c integer matrix A."""
    r = len(A) if A else (nrows or 0)
    if r == 0:
        return []
    c = len(A[0]) if A else 0
    aug = [list(A[i]) + [1 if j == i else 0 for j in range(r)] for i in range(r)]
    H = _tolist(_zmat(aug).hnf())
    ker = [row[c:] for row in H if not any(row[:c]) and any(row[c:])]
    return lll(ker)


def right_kernel(A, ncols):
    """Z-basis of {x : A x^T = 0}, as rows."""
    if not A:
        return [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    return left_kernel(transpose(A))


def saturate(rows, n):
    """HNF basis of the saturation of the row span inside Z^n."""
    rows = [list(r) for r in rows if any(r)]
    if not rows:
        return []
    # saturation = integer vectors killed by every rational relation
    rel = right_kernel(rows, n)
    if not rel:
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return hnf(left_kernel(transpose(rel), nrows=n))


def is_saturated_basis(rows, n):
    return hnf(rows) == saturate(rows, n)


def solve_left(M, t):
    """One integer x with x M = t, or None.  M is r x c."""
    r = len(M)
    c = len(t)
    if r == 0:
        return [] if not any(t) else None
    x = _solve_independent(M, t)
    if x is not False:
        return x
    return _solve_hnf(M, t)


def _solve_independent(M, t):
    """Unique solution via x (M M^T) = t M^T; False when the rows are dependent."""
    A = _zmat(M)
    G = A * A.transpose()
    rhs = A * flint.fmpz_mat([[v] for v in t])
    try:
        sol = G.solve(rhs)
    except ZeroDivisionError:
        return False
    x = []
    for v in sol.entries():
        if v.q != 1:
            return None
        x.append(int(v.p))
    if combo(x, M, len(t)) != list(t):
        return None
    return x


def _solve_hnf(M, t):
    r = len(M)
    c = len(t)
    aug = [list(M[i]) + [1 if j == i else 0 for j in range(r)] for i in range(r)]
    H = _tolist(_zmat(aug).hnf())
    top = [row for row in H if any(row[:c])]
    y_rem = list(t)
    x = [0] * r
    for row in top:
        p = next(j for j in range(c) if row[j])
        q, rem = divmod(y_rem[p], row[p])
        if rem:
            return None
        if q:
            for j in range(c):
                y_rem[j] -= q * row[j]
            for j in range(r):
                x[j] += q * row[c + j]
    if any(y_rem):
        return None
    return x


def solve_left_all(M, t):
    """Short particular solution and LLL-reduced kernel basis of x M = t."""
    x = solve_left(M, t)
    if x is None:
        return None, []
    K = left_kernel(M, nrows=len(M))
    return reduce_mod(x, K), K


def reduce_mod(x, K):
    """A short vector of x + span_Z(K), by LLL on the embedding [[K, 0], [x, B]]."""
    if not K or not any(x):
        return list(x)
    B = 1 + max(abs(v) for row in K for v in row)
    rows = [list(k) + [0] for k in K] + [list(x) + [B]]
    for row in _tolist(_zmat(rows).lll()):
        if row[-1] == B:
            return row[:-1]
        if row[-1] == -B:
            return [-v for v in row[:-1]]
    return list(x)


def coords_in(basis, v):
    """Integer coordinates of v in the given row basis, or None."""
    return solve_left(basis, v)


def contains(basis, v):
    if not any(v):
        return True
    return solve_left(basis, v) is not None


def intersect(A, B, n):
    """HNF basis of rowspan(A) ∩ rowspan(B)."""
    if not A or not B:
        return []
    K = left_kernel([list(r) for r in A] + [[-x for x in r] for r in B])
    rows = [combo(k[: len(A)], A, n) for k in K]
    return hnf(rows)


def unimodular_complement(sub, basis):
    """Rows C with sub ⊕ C = basis-span, for a saturated sub-lattice.

    sub and basis are row matrices; sub must be saturated in basis.
    """
    r = len(basis)
    if not sub:
        return [list(b) for b in basis]
    S = [coords_in(basis, s) for s in sub]
    if any(s is None for s in S):
        raise ValueError("sub-lattice is not contained in the basis span")
    s = len(S)
    # U S^T = [H; 0] with U unimodular, so S U^T = [H^T | 0]
    aug = [[S[k][i] for k in range(s)] + [1 if j == i else 0 for j in range(r)] for i in range(r)]
    H = _tolist(_zmat(aug).hnf())
    U = [row[s:] for row in H]
    top = [row[:s] for row in H[:s]]
    d = _zmat(top).det() if top else 1
    if abs(int(d)) != 1:
        raise ValueError("sub-lattice is not saturated")
    Winv = flint.fmpz_mat(U).transpose().inv()
    W = [[Fraction(int(x.p), int(x.q)) for x in row] for row in Winv.tolist()]
    n = len(basis[0])
    out = []
    for row in W[s:]:
        if any(x.denominator != 1 for x in row):
            raise ArithmeticError("non-integral complement")
        out.append(combo([int(x) for x in row], basis, n))
    return out


def snf_diagonal(rows):
    if not rows:
        return []
    D = _tolist(_zmat(rows).snf())
    k = min(len(D), len(D[0]))
    return [abs(D[i][i]) for i in range(k)]


def det(rows):
    if not rows:
        return 1
    return int(_zmat(rows).det())


# rational helpers


def qmat(rows, ncols=None):
    if not rows:
        return flint.fmpq_mat(0, ncols or 0)
    return flint.fmpq_mat([[_q(x) for x in r] for r in rows])


def _q(x):
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    return flint.fmpq(x)


def qrows(m):
    return [[Fraction(int(x.p), int(x.q)) for x in row] for row in m.tolist()]


def rref(rows, ncols):
    """Canonical reduced row echelon form (nonzero rows only), Fractions."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return []
    R, rk = qmat(rows).rref()
    return qrows(R)[:rk]


def qrank(rows):
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    return qmat(rows).rank()


def clear_denominators(v):
    d = 1
    for x in v:
        if isinstance(x, Fraction):
            d = d * x.denominator // gcd(d, x.denominator)
    return [int(x * d) for x in v]


def q_left_kernel(rows, ncols):
    """Rational basis (integer rows) of {x : x A = 0}."""
    r = len(rows)
    if r == 0:
        return []
    A = [clear_denominators(row) for row in rows]
    At = flint.fmpz_mat(transpose(A))
    X, nul = At.nullspace()
    X = _tolist(X)
    return [[X[i][j] for i in range(r)] for j in range(nul)]


def q_solve_left(rows, t):
    """Rational x with x A = t, free variables zero, or None."""
    r = len(rows)
    c = len(t)
    if r == 0:
        return [] if not any(t) else None
    # columns of A^T augmented with t^T; reduce the system A^T x^T = t^T
    aug = [[rows[i][j] for i in range(r)] + [t[j]] for j in range(c)]
    R = rref(aug, r + 1)
    x = [Fraction(0)] * r
    for row in R:
        p = next(j for j in range(r + 1) if row[j])
        if p == r:
            return None
        x[p] = row[r]
    return x
