"""Seeded random instances: cells, families, configurations.

Cells start as disjoint symplectic blocks in standard coordinates and are
mixed by a product of transvections T_v with v ∈ [a]^⊥, so [a] is fixed
and every instance is realizable.
"""

import random

from . import intlin
from .cells import Cell, a_vector, b_vector
from .lattice import LatticeSubgroup, SymplecticLattice, span, transvect


class SymplecticMap:
    """A product of transvection powers, applied left to right."""

    __slots__ = ("ambient", "ops")

    def __init__(self, L, ops=()):
        self.ambient = L
        self.ops = list(ops)

    def __call__(self, v):
        v = list(v)
        for w, k in self.ops:
            v = transvect(self.ambient, w, v, k)
        return v

    def inverse(self):
        return SymplecticMap(self.ambient, [(w, -k) for w, k in reversed(self.ops)])

    def then(self, other):
        return SymplecticMap(self.ambient, self.ops + other.ops)

    def subgroup(self, H):
        return LatticeSubgroup(self.ambient, [self(b) for b in H.basis])


def small_vector(rng, n, support=3, bound=1, zero=()):
    v = [0] * n
    idx = [i for i in range(n) if i not in zero]
    for i in rng.sample(idx, min(support, len(idx))):
        v[i] = rng.choice([x for x in range(-bound, bound + 1) if x])
    return v


def random_mixing(L, rng, length=3, support=3, fixed=()):
    """Transvections along vectors of [a]^⊥ orthogonal to every vector in `fixed`."""
    from .lattice import perp

    cons = [a_vector(L)] + [list(f) for f in fixed]
    P = perp(L, cons)
    ops = []
    while len(ops) < length:
        c = [rng.choice((-1, 0, 0, 1)) for _ in range(P.rank)]
        v = intlin.combo(c, P.basis, L.rank)
        if not any(v):
            continue
        cnt = intlin.content(v)
        v = [x // cnt for x in v]
        if max(abs(x) for x in v) > 2:
            continue
        ops.append((v, rng.choice((-1, 1))))
    return SymplecticMap(L, ops)


def block_pieces(L, genera):
    """Standard pieces Z[a] ⊕ span{α_j, β_j : j in block_i}."""
    a = a_vector(L)
    pieces = []
    j = 2
    for h in genera:
        rows = [a]
        for _ in range(h):
            rows.append(L.alpha(j))
            rows.append(L.beta(j))
            j += 1
        pieces.append(span(L, rows))
    if j != L.rank // 2 + 1:
        raise ValueError("genera must sum to g - 1")
    return pieces


def random_pieces(L, genera, rng, length=3):
    M = random_mixing(L, rng, length)
    return [M.subgroup(H) for H in block_pieces(L, genera)], M


def random_cell(L, genera, rng, length=3, check=True):
    pieces, M = random_pieces(L, genera, rng, length)
    return Cell(L, pieces, check=check), M


def random_genera(rng, total, parts, minimum=1):
    """A random composition of total into parts >= minimum."""
    if total < parts * minimum:
        raise ValueError("not enough genus")
    sizes = [minimum] * parts
    for _ in range(total - parts * minimum):
        sizes[rng.randrange(parts)] += 1
    return sizes


def rng_for(seed, *salt):
    return random.Random(":".join(str(x) for x in (seed,) + salt))


def standard(g):
    return SymplecticLattice.standard(g)


def ambient_b(L):
    return b_vector(L)


def family_instance(L, genera, rk, theta=None, rng=None, length=3):
    """Pieces and a family whose rk/θ tables are exactly the given ones.

    rk[i][k] is the content of member i on piece k; theta maps (i, j) with
    i < j to per-piece pairings, which must sum to zero and vanish where
    either member is absent.  Member i on piece k is
    rk[i][k] * (α_{p_i} + Σ_{j<i} c β_{p_j}) inside the k-th block.
    """
    from .invariants import ClassFamily

    theta = theta or {}
    n = len(rk)
    K = len(genera)
    for i in range(n):
        if intlin.content(list(rk[i])) != 1:
            raise ValueError("each member needs coprime contents")
    for (i, j), vals in theta.items():
        if sum(vals) or not i < j:
            raise ValueError("θ entries must sum to zero over pieces, keyed by i < j")
    members = [[0] * L.rank for _ in range(n)]
    start = 2
    for k in range(K):
        present = [i for i in range(n) if rk[i][k]]
        if len(present) > genera[k]:
            raise ValueError("piece genus too small for the members present")
        slot = {i: start + t for t, i in enumerate(present)}
        for i in present:
            x = list(L.alpha(slot[i]))
            for j in present:
                if j < i:
                    t = theta.get((j, i), [0] * K)[k]
                    if t % (rk[i][k] * rk[j][k]):
                        raise ValueError("θ must be divisible by the contents")
                    c = t // (rk[i][k] * rk[j][k])
                    x = [u + c * w for u, w in zip(x, L.beta(slot[j]))]
            members[i] = [u + rk[i][k] * w for u, w in zip(members[i], x)]
        for (i, j), vals in theta.items():
            if vals[k] and not (rk[i][k] and rk[j][k]):
                raise ValueError("θ must vanish where a member is absent")
        start += genera[k]
    pieces = block_pieces(L, genera)
    fam = ClassFamily(L, b_vector(L), members)
    if rng is None or not length:
        return pieces, fam
    M = random_mixing(L, rng, length)
    return [M.subgroup(H) for H in pieces], fam.mapped(M)


def random_rank_table(rng, n, pieces=3, maxrk=4):
    """Coprime content rows with at least one entry > 1."""
    while True:
        rows = []
        for _ in range(n):
            while True:
                r = [rng.randint(0, maxrk) for _ in range(pieces)]
                if intlin.content(r) == 1:
                    rows.append(r)
                    break
        if any(x > 1 for r in rows for x in r):
            return rows


def random_theta_table(rng, n, pieces=3, maxtheta=3):
    """All contents 1 and zero-sum pairings with some |θ| > 1."""
    rk = [[1] * pieces for _ in range(n)]
    while True:
        theta = {}
        for i in range(n):
            for j in range(i + 1, n):
                vals = [rng.randint(-maxtheta, maxtheta) for _ in range(pieces - 1)]
                last = -sum(vals)
                if abs(last) > maxtheta:
                    vals = [0] * (pieces - 1)
                    last = 0
                theta[(i, j)] = vals + [last]
        if any(abs(x) > 1 for v in theta.values() for x in v):
            return rk, theta


def random_instance(L, n, rng, kind="rank", bound=None, length=3):
    """Seeded (pieces, family) with a random rk or θ table and random genera."""
    g = L.rank // 2
    if kind == "rank":
        rk = random_rank_table(rng, n, maxrk=bound or 4)
        theta = None
    else:
        rk, theta = random_theta_table(rng, n, maxtheta=bound or 3)
    need = [max(1, sum(1 for i in range(n) if rk[i][k])) for k in range(3)]
    if sum(need) > g - 1:
        raise ValueError("ambient genus too small for the table")
    genera = list(need)
    for _ in range(g - 1 - sum(need)):
        genera[rng.randrange(3)] += 1
    pieces, fam = family_instance(L, genera, rk, theta, rng, length)
    return pieces, fam


def random_edge_instance(L, n, rng, kind="rank", bound=None, length=3, terms=3):
    """Seeded (edge pieces, family, wedge terms) with a random rk or θ table on two pieces."""
    g = L.rank // 2
    if kind == "rank":
        rk = random_rank_table(rng, n, pieces=2, maxrk=bound or 4)
        theta = None
    else:
        rk, theta = random_theta_table(rng, n, pieces=2, maxtheta=bound or 3)
    need = [max(3, sum(1 for i in range(n) if rk[i][k])) for k in range(2)]
    if sum(need) > g - 1:
        raise ValueError("ambient genus too small for the table")
    genera = list(need)
    for _ in range(g - 1 - sum(need)):
        genera[rng.randrange(2)] += 1
    pieces, fam = family_instance(L, genera, rk, theta, rng, length)
    out = []
    for _ in range(rng.randint(1, terms)):
        H = pieces[rng.randrange(2)]
        out.append((rng.choice((1, -1, 2)), tuple(tuple(r) for r in rng.sample(H.basis, 3))))
    return pieces, fam, out
