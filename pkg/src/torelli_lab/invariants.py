"""rk and θ invariants of edges and tori relative to a class family."""

from itertools import combinations, permutations, product

from . import intlin
from .cells import BMTorus, Cell, a_vector, merge, unimodular_part
from .errors import PreconditionError
from .lattice import project


class ClassFamily:
    """b with <[a], b> = 1 and pairwise orthogonal primitive v_i ∈ [a]^⊥ ∩ b^⊥."""

    __slots__ = ("ambient", "b", "members")

    def __init__(self, L, b, members, check=True):
        self.ambient = L
        self.b = list(b)
        self.members = [list(v) for v in members]
        if check:
            self.validate()

    def validate(self):
        L = self.ambient
        a = a_vector(L)
        if L.pair(a, self.b) != 1:
            raise PreconditionError("family needs <[a], b> = 1")
        for v in self.members:
            if intlin.content(v) != 1:
                raise PreconditionError("family members must be primitive")
            if L.pair(v, a) or L.pair(v, self.b):
                raise PreconditionError("family members must lie in [a]^⊥ ∩ b^⊥")
        for v, w in combinations(self.members, 2):
            if L.pair(v, w):
                raise PreconditionError("family members must be pairwise orthogonal")
        if intlin.rank(self.members) != len(self.members):
            raise PreconditionError("family members must be independent")

    def __len__(self):
        return len(self.members)

    def mapped(self, M):
        return ClassFamily(self.ambient, M(self.b), [M(v) for v in self.members])


_UPART = {}


def _upart(H, b):
    key = (H.basis, tuple(b))
    if key not in _UPART:
        if len(_UPART) > 20000:
            _UPART.clear()
        _UPART[key] = unimodular_part(H, b)
    return _UPART[key]


def piece_projection(H, b, v):
    """proj onto H ∩ b^⊥ of v."""
    return project(H.ambient, _upart(H, b), v)


def _pieces(cell):
    if isinstance(cell, (Cell, BMTorus)):
        return cell.pieces
    return tuple(cell)


def projections(cell, fam):
    """Table p[i][k] = proj_{H_k ∩ b^⊥}(v_i)."""
    P = _pieces(cell)
    return [[piece_projection(H, fam.b, v) for H in P] for v in fam.members]


def _check_index(cell, fam, i, k):
    if not (0 <= i < len(fam.members)):
        raise PreconditionError("family index out of range")
    if not (0 <= k < len(_pieces(cell))):
        raise PreconditionError("piece index out of range")


def rk_invariant(cell, fam, i, k):
    _check_index(cell, fam, i, k)
    return intlin.content(piece_projection(_pieces(cell)[k], fam.b, fam.members[i]))


def theta_invariant(cell, fam, i, j, k):
    _check_index(cell, fam, i, k)
    _check_index(cell, fam, j, k)
    H = _pieces(cell)[k]
    L = H.ambient
    return L.pair(piece_projection(H, fam.b, fam.members[i]), piece_projection(H, fam.b, fam.members[j]))


def tables(cell, fam):
    """(genera, rk table n x K, θ table n x n x K) in the given piece order."""
    P = _pieces(cell)
    L = P[0].ambient
    pr = projections(cell, fam)
    n = len(fam.members)
    rk = tuple(tuple(intlin.content(pr[i][k]) for k in range(len(P))) for i in range(n))
    th = tuple(
        tuple(tuple(L.pair(pr[i][k], pr[j][k]) for k in range(len(P))) for j in range(n)) for i in range(n)
    )
    return tuple(H.genus for H in P), rk, th


def _permute(genera, rk, th, perm):
    g2 = tuple(genera[p] for p in perm)
    rk2 = tuple(tuple(row[p] for p in perm) for row in rk)
    th2 = tuple(tuple(tuple(cell[p] for p in perm) for cell in row) for row in th)
    return g2, rk2, th2


def canonical_from_tables(genera, rk, th, kind):
    K = len(genera)
    if kind == "edge":
        perms = [(0, 1), (1, 0)]
    else:
        perms = list(permutations(range(K)))
    return (kind,) + min(_permute(genera, rk, th, p) for p in perms)


def cell_kind(cell):
    P = _pieces(cell)
    if len(P) == 2:
        return "edge"
    if len(P) == 3:
        return "torus"
    raise PreconditionError("orbit keys are defined for edges and tori")


def orbit_key(cell, fam):
    """Canonical (kind, genera, rk, θ) over the piece reindexings allowed for the cell type."""
    g, rk, th = tables(cell, fam)
    return canonical_from_tables(g, rk, th, cell_kind(cell))


def maxrk(rk):
    return max((x for row in rk for x in row), default=0)


def nummaxrk(rk):
    m = maxrk(rk)
    return sum(1 for row in rk for x in row if x == m)


def update_configuration(L, H0, H1, H2, H3):
    """Tori y, z, yz of the torus-addition configuration, pieces ordered (shared, middle, rest)."""
    y = (H0, H1, merge(L, H2, H3))
    z = (H0, H2, merge(L, H1, H3))
    yz = (H0, merge(L, H1, H2), H3)
    return y, z, yz


def verify_update_relations(L, H0, H1, H2, H3, fam, projector=None):
    """Evaluate the eight rk/θ update relations for all family indices.

    `projector(H, b, v)` may replace the built-in projection (used by oracles).
    """
    from math import gcd

    proj = projector or piece_projection
    y, z, yz = update_configuration(L, H0, H1, H2, H3)

    def table(t):
        pr = [[proj(H, fam.b, v) for H in t] for v in fam.members]
        rk = [[intlin.content(p) for p in row] for row in pr]
        return pr, rk

    (py, ry), (pz, rz), (pyz, ryz) = table(y), table(z), table(yz)
    n = len(fam.members)

    def th(pr, i, j, k):
        return L.pair(pr[i][k], pr[j][k])

    rel = {r: [] for r in range(1, 9)}
    for i in range(n):
        rel[1].append((i, ry[i][0] == rz[i][0] == ryz[i][0]))
        rel[2].append((i, ryz[i][1] == gcd(ry[i][1], rz[i][1])))
        rel[3].append((i, ry[i][2] == gcd(rz[i][1], ryz[i][2])))
        rel[4].append((i, rz[i][2] == gcd(ry[i][1], ryz[i][2])))
    for i in range(n):
        for j in range(n):
            rel[5].append(((i, j), th(py, i, j, 0) == th(pz, i, j, 0) == th(pyz, i, j, 0)))
            rel[6].append(((i, j), th(py, i, j, 1) + th(pz, i, j, 1) == th(pyz, i, j, 1)))
            rel[7].append(((i, j), th(pz, i, j, 1) + th(pyz, i, j, 2) == th(py, i, j, 2)))
            rel[8].append(((i, j), th(py, i, j, 1) + th(pyz, i, j, 2) == th(pz, i, j, 2)))
    report = {}
    for r, items in rel.items():
        bad = [w for w, ok in items if not ok]
        report[r] = {"pass": not bad, "witnesses": bad}
    report["tables"] = {"y": ry, "z": rz, "yz": ryz}
    return report


def _theta_choices(s):
    """Vectors in {-1,0,1}^s with zero sum."""
    return [c for c in product((-1, 0, 1), repeat=s) if sum(c) == 0]


def enumerate_bounded_keys(genus_partitions, n, kind="torus"):
    """All canonical keys with rk ∈ {0,1}, |θ| ≤ 1, θ antisymmetric with zero piece-sum.

    A family member must have a nonzero projection somewhere, and θ vanishes
    on pieces where either projection vanishes.
    """
    keys = set()
    seen_parts = set()
    for part in genus_partitions:
        part = tuple(sorted(part))
        if part in seen_parts:
            continue
        seen_parts.add(part)
        K = len(part)
        if kind == "edge" and K != 2 or kind == "torus" and K != 3:
            raise PreconditionError("genus partition length does not match the cell kind")
        perms = [p for p in (permutations(range(K)) if kind == "torus" else [(0, 1), (1, 0)]) if tuple(part[i] for i in p) == part]
        rows = [r for r in product((0, 1), repeat=K) if any(r)]
        for rk in product(rows, repeat=n):
            pairs = list(combinations(range(n), 2))
            choice_lists = []
            for i, j in pairs:
                sup = [k for k in range(K) if rk[i][k] and rk[j][k]]
                choice_lists.append([(sup, c) for c in _theta_choices(len(sup))])
            for combo_ in product(*choice_lists):
                th = [[[0] * K for _ in range(n)] for _ in range(n)]
                for (i, j), (sup, c) in zip(pairs, combo_):
                    for k, x in zip(sup, c):
                        th[i][j][k] = x
                        th[j][i][k] = -x
                tht = tuple(tuple(tuple(c) for c in row) for row in th)
                keys.add((kind,) + min(_permute(part, rk, tht, p) for p in perms))
    return keys


def genus_partitions(total, parts, minimum=1):
    """Sorted partitions of total into `parts` parts, each >= minimum."""
    out = []

    def rec(prefix, remaining, k, lo):
        if k == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for x in range(lo, remaining - minimum * (k - 1) + 1):
            rec(prefix + [x], remaining - x, k - 1, x)

    rec([], total, parts, minimum)
    return out
