"""Integer symplectic lattices: forms, transvections, perps, projections.

The ambient group is Z^n with an integer alternating form.  Subgroups are
always stored saturated, by the Hermite normal form of their basis, so
equality of subgroups is equality of basis tuples.
"""

import random

import flint

from . import intlin
from .errors import PreconditionError, ThresholdError


class SymplecticLattice:
    __slots__ = ("rank", "form", "_terms", "_key")

    def __init__(self, form):
        n = len(form)
        for i in range(n):
            if len(form[i]) != n:
                raise PreconditionError("form must be square")
            if form[i][i] != 0:
                raise PreconditionError("form must have zero diagonal")
            for j in range(i):
                if form[i][j] != -form[j][i]:
                    raise PreconditionError("form must be skew-symmetric")
        self.rank = n
        self.form = tuple(tuple(int(x) for x in row) for row in form)
        self._terms = [(i, j, self.form[i][j]) for i in range(n) for j in range(n) if self.form[i][j]]
        self._key = self.form

    @classmethod
    def standard(cls, g):
        """Z^{2g} with alpha_i = e_{2i-2}, beta_i = e_{2i-1}, <alpha_i, beta_i> = 1."""
        n = 2 * g
        F = [[0] * n for _ in range(n)]
        for i in range(g):
            F[2 * i][2 * i + 1] = 1
            F[2 * i + 1][2 * i] = -1
        return cls(F)

    @property
    def genus(self):
        return intlin.qrank(self.form) // 2

    def pair(self, v, w):
        return sum(c * v[i] * w[j] for i, j, c in self._terms)

    def adjoint(self, v):
        """The row u with <v, w> = u . w for all w."""
        n = self.rank
        out = [0] * n
        for i, j, c in self._terms:
            if v[i]:
                out[j] += c * v[i]
        return out

    def check_vector(self, v):
        if len(v) != self.rank:
            raise PreconditionError(f"vector has length {len(v)}, ambient rank is {self.rank}")

    def basis_vector(self, i):
        v = [0] * self.rank
        v[i] = 1
        return v

    def alpha(self, i):
        return self.basis_vector(2 * i - 2)

    def beta(self, i):
        return self.basis_vector(2 * i - 1)

    def __eq__(self, other):
        return isinstance(other, SymplecticLattice) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"SymplecticLattice(rank={self.rank})"


class LatticeSubgroup:
    """A saturated subgroup, stored by the LLL reduction of its HNF basis.

    Both steps are deterministic, so the basis is canonical; the reduction
    keeps entries small through long chains of constructions.
    """

    __slots__ = ("ambient", "basis", "_gram", "_genus", "_radical")

    def __init__(self, ambient, rows, saturated=False):
        n = ambient.rank
        rows = [list(r) for r in rows]
        for r in rows:
            ambient.check_vector(r)
        basis = intlin.hnf(rows) if saturated else intlin.saturate(rows, n)
        basis = intlin.lll(basis)
        self.ambient = ambient
        self.basis = tuple(tuple(r) for r in basis)
        self._gram = None
        self._genus = None
        self._radical = None

    @classmethod
    def whole(cls, L):
        return cls(L, [L.basis_vector(i) for i in range(L.rank)], saturated=True)

    @property
    def rank(self):
        return len(self.basis)

    @property
    def gram(self):
        if self._gram is None:
            L = self.ambient
            adj = [L.adjoint(b) for b in self.basis]
            self._gram = [[intlin.dot(a, b) for b in self.basis] for a in adj]
        return self._gram

    @property
    def genus(self):
        if self._genus is None:
            self._genus = intlin.rank(self.gram) // 2 if self.basis else 0
        return self._genus

    def radical(self):
        """The degenerate part S ∩ S^⊥ (saturated)."""
        if self._radical is None:
            if not self.basis:
                self._radical = self
            else:
                K = intlin.left_kernel(self.gram, nrows=self.rank)
                rows = [intlin.combo(k, self.basis, self.ambient.rank) for k in K]
                self._radical = LatticeSubgroup(self.ambient, rows)
        return self._radical

    def is_unimodular(self):
        return self.rank == 2 * self.genus and abs(intlin.det(self.gram)) == 1

    def contains(self, v):
        if not any(v):
            return True
        if not self.basis:
            return False
        return intlin.solve_left([list(b) for b in self.basis], list(v)) is not None

    def contains_subgroup(self, other):
        return all(self.contains(b) for b in other.basis)

    def coords(self, v):
        x = intlin.solve_left([list(b) for b in self.basis], list(v))
        if x is None:
            raise PreconditionError("vector is not in the subgroup")
        return x

    def rows(self):
        return [list(b) for b in self.basis]

    def key(self):
        return self.basis

    def __eq__(self, other):
        return isinstance(other, LatticeSubgroup) and self.basis == other.basis and self.ambient == other.ambient

    def __hash__(self):
        return hash(self.basis)

    def __lt__(self, other):
        return self.basis < other.basis

    def __repr__(self):
        return f"LatticeSubgroup(rank={self.rank}, genus={self.genus})"


def _rows_of(L, S):
    if isinstance(S, LatticeSubgroup):
        return S.rows()
    rows = [list(v) for v in S]
    for v in rows:
        L.check_vector(v)
    return rows


def span(L, vectors):
    """Saturated span of a set of vectors."""
    return LatticeSubgroup(L, _rows_of(L, vectors))


def form_eval(L, v, w):
    L.check_vector(v)
    L.check_vector(w)
    return L.pair(v, w)


def transvect(L, v, w, power=1):
    """T_v^power(w) = w + power * <v, w> v.

    T_v is even in v, so the inverse is power=-1 rather than T_{-v}.
    """
    c = power * form_eval(L, v, w)
    return [x + c * y for x, y in zip(w, v)]


def transvection_matrix(L, v, power=1):
    """Matrix M with T_v^power(w) = w M (row convention)."""
    return [transvect(L, v, L.basis_vector(i), power) for i in range(L.rank)]


def is_primitive(L, v):
    L.check_vector(v)
    c = intlin.content(v)
    if c == 0:
        raise PreconditionError("primitivity is undefined for the zero vector")
    return c == 1


def genus(S):
    return S.genus


def perp(L, S):
    """Saturated subgroup {w : <w, v> = 0 for all v in S}."""
    rows = _rows_of(L, S)
    rows = [r for r in rows if any(r)]
    if not rows:
        return LatticeSubgroup.whole(L)
    cols = [L.adjoint(v) for v in rows]
    # <w, v> = -adjoint(v) . w, the sign does not change the kernel
    K = intlin.left_kernel(intlin.transpose(cols), nrows=L.rank)
    return LatticeSubgroup(L, K, saturated=True)


def intersect(A, B):
    L = A.ambient
    return LatticeSubgroup(L, intlin.intersect(A.rows(), B.rows(), L.rank), saturated=True)


def perp_within(L, S, within):
    return intersect(perp(L, S), within)


_SUMS = {}


def subgroup_sum(L, *subs):
    """Saturation of the sum; memoized when all arguments are subgroups."""
    key = None
    if all(isinstance(s, LatticeSubgroup) for s in subs):
        key = (L, tuple(sorted(s.basis for s in subs)))
        hit = _SUMS.get(key)
        if hit is not None:
            return hit
    rows = []
    for s in subs:
        rows.extend(_rows_of(L, s))
    out = LatticeSubgroup(L, rows)
    if key is not None:
        if len(_SUMS) > 50000:
            _SUMS.clear()
        _SUMS[key] = out
    return out


def project(L, Lp, v):
    """The unique p in Lp with <p, w> = <v, w> for every w in Lp."""
    L.check_vector(v)
    if not Lp.basis:
        return [0] * L.rank
    if not Lp.is_unimodular():
        raise PreconditionError("projection needs a unimodular target subgroup")
    r = [L.pair(v, b) for b in Lp.basis]
    G = flint.fmpz_mat(Lp.gram)
    # c G = r  <=>  G^T c^T = r^T
    c = G.transpose().solve(flint.fmpz_mat([[x] for x in r]))
    coeffs = []
    for x in c.entries():
        if x.q != 1:
            raise PreconditionError("projection is not integral")
        coeffs.append(int(x.p))
    return intlin.combo(coeffs, Lp.basis, L.rank)


def hyperbolic_reduce(L, x, e, f):
    """Remove the span{e, f} component of x, for <e, f> = 1."""
    cf = L.pair(x, f)
    ce = L.pair(x, e)
    return [xi - cf * ei + ce * fi for xi, ei, fi in zip(x, e, f)]


def symplectic_basis(S):
    """Pairs (a_i, b_i) with <a_i, b_j> = delta_ij spanning a unimodular S."""
    L = S.ambient
    if S.rank % 2:
        raise PreconditionError(f"rank {S.rank} is odd, so the form cannot be unimodular")
    d = intlin.snf_diagonal(S.gram) if S.basis else []
    bad = [x for x in d if x != 1]
    if bad:
        raise PreconditionError(f"restricted form is not unimodular: elementary divisor {bad[0]}")
    vecs = S.rows()
    pairs = []
    while vecs:
        e = vecs[0]
        adj = L.adjoint(e)
        vals = [intlin.dot(adj, w) for w in vecs]
        coeffs = intlin.solve_left([[x] for x in vals], [1])
        if coeffs is None:
            raise PreconditionError("restricted form is not unimodular")
        f = intlin.combo(coeffs, vecs, L.rank)
        pairs.append((e, f))
        rest = [hyperbolic_reduce(L, w, e, f) for w in vecs]
        vecs = intlin.hnf(rest)
    return pairs


def omega_pairs_check(L, pairs):
    for i, (a, b) in enumerate(pairs):
        for j, (c, d) in enumerate(pairs):
            if L.pair(a, d) != (1 if i == j else 0):
                return False
            if L.pair(a, c) or L.pair(b, d):
                return False
    return True


def split_radical(S):
    """(radical, unimodular complement rows) for a quasi-unimodular S."""
    R = S.radical()
    C = intlin.unimodular_complement(R.rows(), S.rows())
    return R, C


def eichler(L, h, y, x):
    """x + <x, h> y + <x, y> h, a symplectic map when h ⊥ y."""
    xh = L.pair(x, h)
    xy = L.pair(x, y)
    return [xi + xh * yi + xy * hi for xi, yi, hi in zip(x, y, h)]


def extend_to_symplectic_subgroup(L, contain=(), within=None, perp_to=(), genus=0, seed=0, perturb=True):
    """Saturated H ⊆ within, containing `contain`, orthogonal to `perp_to`, of genus `genus`.

    `within` must split as radical ⊕ unimodular.  The radical parts of the
    contained vectors become degenerate generators of H.
    """
    rng = random.Random(seed)
    n = L.rank
    if within is None:
        within = LatticeSubgroup.whole(L)
    contain = [list(v) for v in contain]
    perp_to = [list(v) for v in perp_to]
    h = genus
    minimal = h is None
    if minimal:
        h = within.genus
    if h < 0:
        raise PreconditionError("genus must be nonnegative")
    if h > within.genus:
        raise ThresholdError(f"genus bound violated: requested genus {h} exceeds available genus {within.genus}")
    R, C = split_radical(within)
    Wp = LatticeSubgroup(L, C, saturated=False) if C else LatticeSubgroup(L, [])
    if C and not Wp.is_unimodular():
        raise PreconditionError("within is not radical ⊕ unimodular")
    Rrows = R.rows()
    rad_parts = []
    sym_parts = []
    for k in contain:
        if not within.contains(k):
            raise PreconditionError("contained vector is not in `within`")
        w = project(L, Wp, k) if C else [0] * n
        rpart = [a - b for a, b in zip(k, w)]
        rad_parts.append(rpart)
        sym_parts.append(w)
    for rp in rad_parts:
        for p in perp_to:
            if L.pair(rp, p):
                raise ThresholdError("constraint violated: a degenerate generator pairs with a perp_to vector")
    pbar = [project(L, Wp, p) for p in perp_to] if C else []
    pbar = [p for p in pbar if any(p)]
    for w in sym_parts:
        for p in pbar:
            if L.pair(w, p):
                raise ThresholdError("constraint violated: a contained vector pairs with a perp_to vector")
    pairs = []

    def free_space():
        cons = pbar + [v for pr in pairs for v in pr]
        if not cons:
            return Wp
        return intersect(perp(L, cons), Wp)

    def partner(e):
        Y = free_space()
        if not Y.basis:
            return None
        vals = [L.pair(e, y) for y in Y.basis]
        sol, ker = intlin.solve_left_all([[v] for v in vals], [1])
        if sol is None:
            return None
        if perturb and ker:
            for kv in ker:
                c = rng.choice((-1, 0, 1))
                if c:
                    sol = [s + c * t for s, t in zip(sol, kv)]
        return intlin.combo(sol, Y.basis, n)

    for w in sym_parts:
        if not pairs:
            res = list(w)
        else:
            U = LatticeSubgroup(L, [v for pr in pairs for v in pr])
            pu = project(L, U, w)
            res = [a - b for a, b in zip(w, pu)]
        if not any(res):
            continue
        if len(pairs) >= h:
            raise ThresholdError(f"genus bound violated: contained vectors need genus > {h}")
        e = intlin.primitive_part(res)
        f = partner(e)
        if f is None:
            raise ThresholdError(
                f"genus bound violated: no symplectic partner for a contained vector (free genus {free_space().genus})"
            )
        pairs.append((e, f))
    if minimal:
        h = len(pairs)
    while len(pairs) < h:
        Y = free_space()
        if Y.genus == 0:
            raise ThresholdError(
                f"genus bound violated: requested genus {h}, only {len(pairs)} available under the constraints"
            )
        e = _unit_pairing_vector(L, Y, rng)
        if e is None:
            raise ThresholdError("genus bound violated: remaining free part has no unimodular pair")
        f = partner(e)
        if f is None:
            raise ThresholdError("genus bound violated: remaining free part has no unimodular pair")
        pairs.append((e, f))
    rows = [r for r in rad_parts if any(r)] + [v for pr in pairs for v in pr]
    H = LatticeSubgroup(L, rows)
    _check_extension(L, H, contain, perp_to, h, within)
    return H


def symplectic_hull(L, vectors, within=None, perp_to=(), seed=0, perturb=False):
    """Smallest-genus output of the greedy extension containing `vectors`."""
    return extend_to_symplectic_subgroup(L, vectors, within, perp_to, None, seed, perturb)


def _unit_pairing_vector(L, Y, rng):
    """A vector x of Y whose pairing functional on Y has content 1."""
    G = Y.gram
    r = Y.rank
    cands = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    for i in range(r):
        for j in range(r):
            if i != j:
                v = [0] * r
                v[i] = 1
                v[j] = 1
                cands.append(v)
    for _ in range(200):
        cands.append([rng.randint(-2, 2) for _ in range(r)])
    for c in cands:
        if not any(c):
            continue
        row = [sum(c[i] * G[i][j] for i in range(r)) for j in range(r)]
        if intlin.content(row) == 1 and intlin.content(c) == 1:
            return intlin.combo(c, Y.basis, L.rank)
    return None


def _check_extension(L, H, contain, perp_to, h, within):
    for k in contain:
        if not H.contains(k):
            raise AssertionError("extension lost a contained vector")
    for p in perp_to:
        for b in H.basis:
            if L.pair(b, p):
                raise AssertionError("extension is not orthogonal to perp_to")
    if H.genus != h:
        raise AssertionError("extension has the wrong genus")
    if not within.contains_subgroup(H):
        raise AssertionError("extension escaped `within`")
