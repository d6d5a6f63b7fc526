"""Certificate-producing rewriting of Bestvina–Margalit chains and edge classes.

Every torus rewrite is one split relation: for pieces (A, X, C) with
X = Y + Y' and Y ∩ Y' = Z[a], the 3-chain on (A, Y, Y', C) has boundary

    -O(A, X, C) + O(A, Y, Y' + C) + O(Y + C, A, Y'),

with O(P, Q, R) = (P, Q, R) - (Q, P, R).  Replacing a torus by the two new
ones adds a rational multiple of that boundary to the expanded 2-chain, so
replaying a certificate needs only `boundary`.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from . import intlin
from .cells import (
    BMTorus,
    Chain,
    a_vector,
    boundary_chain,
    merge,
    three_cell_chain,
    torus_sign,
)
from .errors import CertificateError, InvariantError, MeasureError, PreconditionError, ThresholdError
from .invariants import _upart, tables
from .lattice import (
    LatticeSubgroup,
    eichler,
    extend_to_symplectic_subgroup,
    intersect,
    perp_within,
    project,
    span,
    symplectic_basis,
    symplectic_hull,
)


# ---------------------------------------------------------------- thresholds


@dataclass(frozen=True)
class Thresholds:
    """Genus bounds used by the constructions, for family size n.

    split: genus a middle piece needs before it can be split;
    gi_genus: genus of the subgroup split off by a genus increase;
    gi_source: genus the donor piece of a genus increase needs;
    min_g: ambient genus guaranteeing a donor exists.
    """

    preset: str
    n: int
    split: int
    gi_genus: int
    gi_source: int
    theta_split: int
    theta_gi_genus: int
    theta_gi_source: int
    min_g: int
    edge_split: int
    edge_theta_split: int
    edge_min_g: int

    @classmethod
    def scaled(cls, n):
        if n < 1:
            raise PreconditionError("family size must be positive")
        # hull of the family projections has genus <= n; one more pair to split
        split = n + 1
        gi_genus = n
        gi_source = 2 * n
        return cls(
            preset="scaled",
            n=n,
            split=split,
            gi_genus=gi_genus,
            gi_source=gi_source,
            theta_split=n + 1,
            theta_gi_genus=n,
            theta_gi_source=2 * n,
            min_g=2 * gi_source + split - 1,
            # edge steps: hull of the family plus one wedge term, one pair left
            edge_split=n + 4,
            edge_theta_split=n + 4,
            edge_min_g=2 * n + 8,
        )

    @classmethod
    def paper(cls, n=9):
        if n not in (8, 9):
            raise ThresholdError("the paper preset needs family size 8 or 9")
        return cls(
            preset="paper",
            n=n,
            split=10,
            gi_genus=9,
            gi_source=19,
            theta_split=11,
            theta_gi_genus=11,
            theta_gi_source=21,
            min_g=51,
            edge_split=12,
            edge_theta_split=13,
            edge_min_g=51,
        )

    @classmethod
    def named(cls, preset, n):
        if preset == "scaled":
            return cls.scaled(n)
        if preset == "paper":
            return cls.paper(n)
        raise PreconditionError(f"unknown preset {preset!r}")

    def check_ambient(self, g, edges=False):
        need = self.edge_min_g if edges else self.min_g
        if g < need:
            raise ThresholdError(f"genus bound violated: g = {g} < {need} required by the {self.preset} preset for n = {self.n}")

    def as_dict(self):
        return dict(self.__dict__)


# ---------------------------------------------------------------- chains


class BMChain:
    """Σ c_T [BM_T] over tori T, with no zero coefficients."""

    __slots__ = ("ambient", "terms", "tori")

    def __init__(self, L, items=()):
        self.ambient = L
        self.terms = {}
        self.tori = {}
        for T, c in items:
            self.add(T, c)

    def add(self, T, coeff):
        coeff = Fraction(coeff)
        k = T.key()
        v = self.terms.get(k, 0) + coeff
        if v:
            self.terms[k] = v
            self.tori[k] = T
        else:
            self.terms.pop(k, None)
            self.tori.pop(k, None)
        return self

    def copy(self):
        out = BMChain(self.ambient)
        out.terms = dict(self.terms)
        out.tori = dict(self.tori)
        return out

    def items(self):
        for k in sorted(self.terms):
            yield self.tori[k], self.terms[k]

    def expand(self):
        ch = Chain(2)
        for T, c in self.items():
            ch += T.fundamental_class().scaled(c)
        return ch

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return isinstance(other, BMChain) and self.terms == other.terms

    def __repr__(self):
        return f"BMChain(terms={len(self.terms)})"


# ---------------------------------------------------------------- measures


def _first_bad_rank(rk):
    for m, row in enumerate(rk):
        if max(row) > 1:
            return m
    return None


def rank_measure(rk):
    """(n - m + 1, maxrk_m, nummaxrk_m) at the first index m with an entry > 1, else (0, 0, 0)."""
    m = _first_bad_rank(rk)
    if m is None:
        return (0, 0, 0)
    row = rk[m]
    top = max(row)
    return (len(rk) - m, top, row.count(top))


def _pairs(n):
    return list(combinations(range(n), 2))


def _first_bad_pair(th):
    for q, (i, j) in enumerate(_pairs(len(th))):
        if max(abs(x) for x in th[i][j]) > 1:
            return q, (i, j)
    return None, None


def theta_measure(th):
    """(#pairs - q, maxalg, nummaxalg) at the first pair q with some |θ| > 1, else (0, 0, 0)."""
    q, ij = _first_bad_pair(th)
    if q is None:
        return (0, 0, 0)
    i, j = ij
    vals = [abs(x) for x in th[i][j]]
    top = max(vals)
    return (len(_pairs(len(th))) - q, top, vals.count(top))


def torus_tables(T, fam):
    return tables(T.pieces, fam)


def torus_measure(T, fam, kind):
    _, rk, th = torus_tables(T, fam)
    return rank_measure(rk) if kind == "rank" else theta_measure(th)


# ---------------------------------------------------------------- split relation


@dataclass
class SplitStep:
    """One split relation applied to a torus with the given coefficient.

    pieces = (A, Y, Y', C); the input torus is {A, Y + Y', C}.
    """

    kind: str
    pieces: tuple
    coefficient: Fraction
    input: BMTorus
    input_coeff: Fraction
    outputs: list
    before: tuple = ()
    after: tuple = ()
    strict: bool = True
    macro: int = 0
    data: dict = None

    def chain3(self):
        L = self.pieces[0].ambient
        return three_cell_chain(L, *self.pieces)

    def verify(self):
        """The boundary identity of this step, from the stored cell data alone."""
        L = self.pieces[0].ambient
        lhs = boundary_chain(self.chain3()).scaled(self.coefficient)
        rhs = Chain(2)
        for T, c in self.outputs:
            rhs += T.fundamental_class().scaled(c)
        rhs -= self.input.fundamental_class().scaled(self.input_coeff)
        if lhs != rhs:
            return False
        A, Y, Yp, C = self.pieces
        return BMTorus(L, (A, merge(L, Y, Yp), C), check=False) == self.input


def split_relation(L, A, Y, Yp, C, coeff, kind="split", check=True):
    """Rewrite coeff·[BM_{A, Y+Y', C}] as a combination of {A, Y, Y'+C} and {A, Y', Y+C}."""
    X = merge(L, Y, Yp)
    if check:
        Za = span(L, [a_vector(L)])
        if intersect(Y, Yp) != Za:
            raise InvariantError("split pieces must meet exactly in Z[a]")
        for u in Y.basis:
            for w in Yp.basis:
                if L.pair(u, w):
                    raise InvariantError("split pieces must be orthogonal")
    T_in = BMTorus(L, (A, X, C), check=check)
    Ty = (A, Y, merge(L, Yp, C))
    Tz = (merge(L, Y, C), A, Yp)
    s_in = torus_sign(L, (A, X, C))
    s_y = torus_sign(L, Ty)
    s_z = torus_sign(L, Tz)
    coeff = Fraction(coeff)
    lam = coeff / s_in
    outs = [
        (BMTorus(L, Ty, check=check), coeff * s_y / s_in),
        (BMTorus(L, Tz, check=check), coeff * s_z / s_in),
    ]
    return SplitStep(kind, (A, Y, Yp, C), lam, T_in, coeff, outs)


# ---------------------------------------------------------------- constructions


def _member_projections(P, fam):
    U = _upart(P, fam.b)
    L = P.ambient
    return U, [project(L, U, v) for v in fam.members]


def _hull_and_complement(L, U, vecs, need):
    """Symplectic hull M of the nonzero vecs inside U and its complement in U."""
    W = [intlin.primitive_part(x) for x in vecs if any(x)]
    M = symplectic_hull(L, W, within=U) if W else LatticeSubgroup(L, [])
    if U.genus - M.genus < need:
        raise ThresholdError(
            f"genus bound violated: piece genus {U.genus} leaves {U.genus - M.genus} < {need} outside the family hull"
        )
    Cp = perp_within(L, M, U) if M.basis else U
    return M, Cp


def _solve_pairings(L, basis, vecs, targets):
    """Integer combination y of basis with <vecs[k], y> = targets[k], or None."""
    if not vecs:
        return [0] * L.rank
    M = [[L.pair(v, b) for v in vecs] for b in basis]
    c = intlin.solve_left(M, list(targets))
    if c is None:
        return None
    return intlin.combo(c, basis, L.rank)


def _with_a(L, U):
    return span(L, [a_vector(L)] + list(U.basis))


def _split_by(L, P, U):
    """(H, H') with H = Z[a] ⊕ U and H' = H^⊥ ∩ P."""
    H = _with_a(L, U)
    Hp = perp_within(L, H, P)
    if merge(L, H, Hp) != P:
        raise InvariantError("split subgroups do not span the piece")
    return H, Hp


def rank_split(L, fam, A, P1, P2, m, coeff, th):
    """Split the middle piece P1 by an Eichler image of the family hull (index m)."""
    U1, xs = _member_projections(P1, fam)
    if U1.genus < th.split:
        raise ThresholdError(f"genus bound violated: middle piece genus {U1.genus} < {th.split}")
    M, Cp = _hull_and_complement(L, U1, xs, 1)
    h = symplectic_basis(Cp)[0][0]
    live = [i for i, x in enumerate(xs) if any(x)]
    if m not in live:
        raise PreconditionError("rank split needs a nonzero projection at the current index")
    ws = {i: intlin.primitive_part(xs[i]) for i in live}
    others = [i for i in live if i != m]
    y = None
    patterns = sorted(product((0, -1, 1), repeat=len(others)), key=lambda p: sum(1 for x in p if x))
    for pat in patterns:
        vecs = [ws[m]] + [ws[i] for i in others]
        y = _solve_pairings(L, M.basis, vecs, [-1] + list(pat))
        if y is not None:
            break
    if y is None:
        raise InvariantError("no hull vector pairs to -1 with the current projection")
    U = LatticeSubgroup(L, [eichler(L, h, y, v) for v in M.basis])
    H, Hp = _split_by(L, P1, U)
    step = split_relation(L, A, H, Hp, P2, coeff)
    step.data = {"h": h, "y": y, "index": m}
    return step


def piece_is_good(P, fam):
    """Nonzero family projections onto P are independent and span a saturated subgroup."""
    L = P.ambient
    _, xs = _member_projections(P, fam)
    live = [x for x in xs if any(x)]
    if not live:
        return True
    if intlin.rank(live) != len(live):
        return False
    return intlin.hnf(live) == intlin.saturate(live, L.rank)


def torus_is_good(T, fam):
    return all(piece_is_good(P, fam) for P in T.pieces)


def _random_hyperbolic_pair(L, Cp, rng):
    """A pair (p, q) in Cp with <p, q> = 1, randomized when rng is given."""
    if rng is None:
        return symplectic_basis(Cp)[0]
    G = Cp.gram
    r = Cp.rank
    for _ in range(100):
        c = [rng.randint(-1, 1) for _ in range(r)]
        row = [sum(c[i] * G[i][j] for i in range(r)) for j in range(r)]
        if not any(c) or intlin.content(row) != 1:
            continue
        p = intlin.combo(c, Cp.basis, L.rank)
        sol, ker = intlin.solve_left_all([[x] for x in row], [1])
        for kv in ker:
            k = rng.randint(-1, 1)
            sol = [a + k * b for a, b in zip(sol, kv)]
        return p, intlin.combo(sol, Cp.basis, L.rank)
    return symplectic_basis(Cp)[0]


def _solve_pairings_all(L, basis, vecs, targets, rng):
    if not vecs:
        return [0] * L.rank
    M = [[L.pair(v, b) for v in vecs] for b in basis]
    c, ker = intlin.solve_left_all(M, list(targets))
    if c is None:
        return None
    if rng is not None:
        for kv in ker:
            k = rng.randint(-1, 1)
            c = [a + k * b for a, b in zip(c, kv)]
    return intlin.combo(c, basis, L.rank)


def theta_split(L, fam, A, P1, P2, i, j, coeff, th, attempts=24, seed=0):
    """Split P1 into H'' = Z[a] ⊕ span{u1, u2} and H' = H''^⊥ ∩ P1 for the pair (i, j).

    The split vectors are free up to kernel shifts and the choice of the
    hyperbolic pair; the first choice whose output tori keep every piece
    good (see piece_is_good) is used.
    """
    import random

    U1, xs = _member_projections(P1, fam)
    if U1.genus < th.theta_split:
        raise ThresholdError(f"genus bound violated: middle piece genus {U1.genus} < {th.theta_split}")
    theta = L.pair(xs[i], xs[j])
    if abs(theta) < 2:
        raise PreconditionError("θ split needs |θ| >= 2 on the middle piece")
    if not piece_is_good(P1, fam):
        raise InvariantError("family projections on the middle piece do not span a saturated subgroup; no split vectors exist")
    s = 1 if theta > 0 else -1
    M, Cp = _hull_and_complement(L, U1, xs, 1)
    live = [k for k, x in enumerate(xs) if any(x)]
    rest = [k for k in live if k not in (i, j)]
    step = None
    for t in range(attempts):
        rng = random.Random(f"{seed}:{t}") if t else None
        p0, q0 = _random_hyperbolic_pair(L, Cp, rng)
        e = _solve_pairings_all(L, M.basis, [xs[k] for k in live], [-s if k == j else 0 for k in live], rng)
        f = _solve_pairings_all(L, M.basis, [xs[k] for k in live], [s if k == i else 0 for k in live], rng)
        if e is None or f is None:
            raise InvariantError("no split vectors with the required pairings exist")
        c = s - L.pair(e, f)
        u1 = [x + y for x, y in zip(e, p0)]
        u2 = [x + y + c * z for x, y, z in zip(f, p0, q0)]
        vp_i = [x - y for x, y in zip(xs[i], u1)]
        vp_j = [x - y for x, y in zip(xs[j], u2)]
        cons = {
            1: True,
            2: True,
            3: all(L.pair(vp_i, xs[k]) == L.pair(xs[i], xs[k]) and L.pair(xs[k], vp_j) == L.pair(xs[k], xs[j]) for k in rest),
            4: abs(L.pair(vp_i, vp_j)) == abs(theta) - 1,
            5: L.pair(u1, vp_j) == 0 and L.pair(u2, vp_i) == 0 and L.pair(u1, vp_i) == 0 and L.pair(u2, vp_j) == 0,
            6: all(L.pair(u1, xs[k]) == 0 and L.pair(u2, xs[k]) == 0 for k in rest),
            7: abs(L.pair(u1, u2)) == 1,
        }
        if not all(cons.values()):
            raise InvariantError(f"θ split constraints failed: {sorted(k for k, ok in cons.items() if not ok)}")
        for v in (vp_i, vp_j, u1, u2):
            if any(v) and intlin.content(v) != 1:
                raise InvariantError("θ split produced a non-primitive projection")
        Hpp, Hp = _split_by(L, P1, LatticeSubgroup(L, [u1, u2]))
        step = split_relation(L, A, Hpp, Hp, P2, coeff)
        step.data = {"pair": (i, j), "sign": s, "u1": u1, "u2": u2, "constraints": cons, "attempt": t}
        if all(torus_is_good(U, fam) for U, _ in step.outputs):
            break
    return step


def genus_increase_relation(L, fam, A, Pk, P1, h, coeff, seed=0, attempts=1):
    """Split off H ⊆ Pk (a ∈ H, genus h, H ⊥ all family projections onto Pk).

    With attempts > 1, seeds are tried until the output tori are good.
    """
    Uk, xs = _member_projections(Pk, fam)
    M, _ = _hull_and_complement(L, Uk, xs, h)
    step = None
    for t in range(attempts):
        Hu = extend_to_symplectic_subgroup(L, (), within=Uk, perp_to=M.basis, genus=h, seed=f"{seed}:{t}")
        H, Hp = _split_by(L, Pk, Hu)
        step = split_relation(L, A, H, Hp, P1, coeff, kind="genus-increase")
        step.data = {"genus": h, "attempt": t}
        if attempts == 1 or all(torus_is_good(U, fam) for U, _ in step.outputs):
            break
    return step


# ---------------------------------------------------------------- roles


def _index_of(T, P):
    return T.pieces.index(P)


def _containing(L, T, P):
    for k, Q in enumerate(T.pieces):
        if Q.contains_subgroup(P):
            return k
    raise InvariantError("no output piece contains the middle piece")


def _rank_roles(T, fam, m):
    """(middle candidates, maximizer) at index m, by table position."""
    genera, rk, _ = torus_tables(T, fam)
    row = rk[m]
    top = max(row)
    mids = [k for k in range(3) if 0 < row[k] < top]
    mx = [k for k in range(3) if row[k] == top]
    return genera, mids, mx


def rank_conclusions(parent_rk, m, child_T, mid, fam, th):
    """Conclusions (1)-(5) of the rank genus increase for one output torus."""
    genera, rk, _ = torus_tables(child_T, fam)
    old = parent_rk[m]
    top = max(old)
    new = rk[m]
    newtop = max(new)
    return {
        1: all(x <= 1 for row in rk[:m] for x in row),
        2: newtop <= top,
        3: new.count(top) <= old.count(top),
        4: newtop != top or 0 < new[mid] < newtop,
        5: genera[mid] >= th.split,
    }


def theta_conclusions(parent_th, ij, child_T, mid, fam, th):
    genera, rk, tt = torus_tables(child_T, fam)
    i, j = ij
    old = [abs(x) for x in parent_th[i][j]]
    top = max(old)
    new = [abs(x) for x in tt[i][j]]
    small = [(p, q) for p, q in _pairs(len(tt)) if max(abs(x) for x in parent_th[p][q]) <= 1]
    return {
        1: all(x <= 1 for row in rk for x in row),
        2: max(new) <= top and new.count(top) <= old.count(top),
        3: new.count(top) != old.count(top) or new[mid] == top,
        4: all(abs(x) <= 1 for p, q in small for x in tt[p][q]),
        5: genera[mid] >= th.theta_split,
    }


# ---------------------------------------------------------------- engines


@dataclass
class ReductionCertificate:
    kind: str
    steps: list

    def __len__(self):
        return len(self.steps)


def genus_increase_step(L, T, fam, kind, th, coeff=1, target=None, seed=0):
    """Make the middle piece of T large enough to split.

    target is (index m,) for rank or the pair (i, j) for θ; middle is chosen
    among the admissible pieces.  Returns {relation, terms, middle}: relation
    is None when the middle piece already meets the split bound.
    """
    genera, rk, tt = torus_tables(T, fam)
    if kind == "rank":
        m = target if target is not None else _first_bad_rank(rk)
        if m is None:
            raise PreconditionError("torus already has all rk <= 1")
        _, mids, mx = _rank_roles(T, fam, m)
        need, h, source = th.split, th.gi_genus, th.gi_source
    else:
        if any(x > 1 for row in rk for x in row):
            raise PreconditionError("θ genus increase needs all rk <= 1")
        ij = target if target is not None else _first_bad_pair(tt)[1]
        if ij is None:
            raise PreconditionError("torus already has all |θ| <= 1")
        i, j = ij
        vals = [abs(x) for x in tt[i][j]]
        mids = [k for k in range(3) if vals[k] == max(vals)]
        mx = []
        need, h, source = th.theta_split, th.theta_gi_genus, th.theta_gi_source
    if not mids:
        raise PreconditionError("no admissible middle piece")
    big = [k for k in mids if genera[k] >= need]
    if big:
        mid = big[0]
        return {"relation": None, "terms": [(T, Fraction(coeff), mid)], "middle": mid}
    mid = max(mids, key=lambda k: (genera[k], -k))
    rest = [k for k in range(3) if k != mid]
    donors = [k for k in rest if genera[k] >= source]
    if not donors:
        raise ThresholdError(
            f"genus bound violated: no donor piece with genus >= {source} (genera {list(genera)}, middle {mid})"
        )
    # prefer donating from a maximizer, then the larger piece
    kappa = sorted(donors, key=lambda k: (k not in mx, -genera[k], k))[0]
    other = [k for k in rest if k != kappa][0]
    P = T.pieces
    step = genus_increase_relation(
        L, fam, P[other], P[kappa], P[mid], h, coeff, seed=seed, attempts=1 if kind == "rank" else 24
    )
    terms = []
    for U, c in step.outputs:
        terms.append((U, c, _containing(L, U, P[mid])))
    if kind == "rank":
        concl = [rank_conclusions(rk, m, U, k, fam, th) for U, _, k in terms]
    else:
        concl = [theta_conclusions(tt, ij, U, k, fam, th) for U, _, k in terms]
    bad = [(t, c) for t, cs in enumerate(concl) for c, ok in cs.items() if not ok]
    if bad:
        raise InvariantError(f"genus increase conclusions failed: {bad}")
    step.data["conclusions"] = concl
    return {"relation": step, "terms": terms, "middle": mid}


def _split_torus(L, T, fam, kind, th, coeff, mid, seed=0):
    """The split relation for T with the given middle piece position."""
    genera, rk, tt = torus_tables(T, fam)
    P = T.pieces
    rest = [k for k in range(3) if k != mid]
    if kind == "rank":
        m = _first_bad_rank(rk)
        row = rk[m]
        top = max(row[k] for k in rest)
        merged = [k for k in rest if row[k] == top][0]
        kept = [k for k in rest if k != merged][0]
        return rank_split(L, fam, P[kept], P[mid], P[merged], m, coeff, th)
    _, (i, j) = _first_bad_pair(tt)
    kept, merged = rest
    return theta_split(L, fam, P[kept], P[mid], P[merged], i, j, coeff, th, seed=seed)


def _reduce_torus(L, T, coeff, fam, kind, th, macro, seed):
    """Steps rewriting coeff·[BM_T] into tori of strictly smaller measure."""
    mu = torus_measure(T, fam, kind)
    steps = []
    gi = genus_increase_step(L, T, fam, kind, th, coeff, seed=seed)
    final = []
    if gi["relation"] is not None:
        st = gi["relation"]
        st.before = mu
        st.after = tuple(torus_measure(U, fam, kind) for U, _ in st.outputs)
        st.strict = False
        st.macro = macro
        steps.append(st)
    for U, c, mid in gi["terms"]:
        nu = torus_measure(U, fam, kind)
        if nu < mu and gi["relation"] is not None:
            final.append((U, c))
            continue
        if nu > mu:
            raise MeasureError(f"genus increase raised the measure {mu} -> {nu}")
        st = _split_torus(L, U, fam, kind, th, c, mid, seed)
        st.before = nu
        st.after = tuple(torus_measure(V, fam, kind) for V, _ in st.outputs)
        st.macro = macro
        if not all(a < mu for a in st.after):
            raise MeasureError(f"split did not decrease the measure: {mu} -> {list(st.after)}")
        steps.append(st)
        final.extend(st.outputs)
    return steps, final


def _check_rank_bounded(T, fam):
    _, rk, _ = torus_tables(T, fam)
    if any(x > 1 for row in rk for x in row):
        raise InvariantError("θ reduction needs all rk <= 1")


def _reduce_chain(chain, fam, kind, th, seed, max_steps):
    L = chain.ambient
    th.check_ambient(L.genus)
    cur = chain.copy()
    steps = []
    macro = 0
    while True:
        scored = [(torus_measure(T, fam, kind), k) for k, T in cur.tori.items()]
        scored = [(mu, k) for mu, k in scored if mu != (0, 0, 0)]
        if not scored:
            break
        if len(steps) > max_steps:
            raise MeasureError(f"step budget {max_steps} exhausted")
        mu, k = max(scored)
        T = cur.tori[k]
        c = cur.terms[k]
        new_steps, final = _reduce_torus(L, T, c, fam, kind, th, macro, f"{seed}:{macro}")
        cur.add(T, -c)
        for U, d in final:
            cur.add(U, d)
        steps.extend(new_steps)
        macro += 1
    return cur, ReductionCertificate(kind, steps)


def rank_reduce(chain, fam, th=None, seed=0, max_steps=10000):
    """Rewrite the chain so every torus has all rk <= 1."""
    th = th or Thresholds.scaled(len(fam))
    return _reduce_chain(chain, fam, "rank", th, seed, max_steps)


def theta_reduce(chain, fam, th=None, seed=0, max_steps=10000):
    """Rewrite a chain with all rk <= 1 so every torus also has all |θ| <= 1."""
    th = th or Thresholds.scaled(len(fam))
    for T in chain.tori.values():
        _check_rank_bounded(T, fam)
    out, cert = _reduce_chain(chain, fam, "theta", th, seed, max_steps)
    for T in out.tori.values():
        _check_rank_bounded(T, fam)
    return out, cert


def replay_certificate(chain, cert):
    """The expanded input plus every step's boundary, using only `boundary`."""
    acc = chain.expand()
    for st in cert.steps:
        acc += boundary_chain(st.chain3()).scaled(st.coefficient)
    return acc


def verify_certificate(chain_in, chain_out, cert, fam=None):
    """Replay, per-step identities and the measure order; raises CertificateError."""
    for t, st in enumerate(cert.steps):
        if not st.verify():
            raise CertificateError(f"step {t}: boundary identity fails")
    if replay_certificate(chain_in, cert) != chain_out.expand():
        raise CertificateError("replayed certificate does not reproduce the output chain")
    pending = set()
    for t, st in enumerate(cert.steps):
        if st.input.key() in pending:
            pending.discard(st.input.key())
        elif pending:
            raise CertificateError(f"step {t}: a non-decreased genus-increase output was left unsplit")
        for a, (U, _) in zip(st.after, st.outputs):
            if st.strict and not a < st.before:
                raise CertificateError(f"step {t}: measure {st.before} did not decrease to {a}")
            if not st.strict:
                if a > st.before:
                    raise CertificateError(f"step {t}: genus increase raised the measure")
                if a == st.before:
                    pending.add(U.key())
        if fam is not None:
            if torus_measure(st.input, fam, cert.kind) != st.before:
                raise CertificateError(f"step {t}: recorded measure does not match the recomputed one")
    if pending:
        raise CertificateError("certificate ends with an unsplit genus-increase output")
    return True
