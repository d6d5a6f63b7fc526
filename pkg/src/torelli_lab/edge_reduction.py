"""Edge classes (x, f), f ∈ A_x, and their certificate-producing reduction.

A_x is the image of ∧³H_0 + ∧³H_1 in the Johnson target.  A class is kept
as a combination of pure wedges r_1 ∧ r_2 ∧ r_3 with all r_s in one piece,
which is an exact witness for membership in A_x.

Every step is a pair (σ, f) with σ a 2-cell and f ∈ A_σ; adding the
boundary of σ tensored with f moves f from the edge being rewritten onto
the other two edges of σ.  Replaying a certificate needs only `boundary`.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import intlin
from .cells import Cell, boundary, oriented
from .errors import CertificateError, InvariantError, MeasureError, PreconditionError, ThresholdError
from .exterior import JohnsonTarget, RationalSubspace, wedge_of_lattice
from .invariants import tables
from .lattice import LatticeSubgroup, perp_within, project, symplectic_hull
from .reduction import (
    Thresholds,
    _member_projections,
    _random_hyperbolic_pair,
    _solve_pairings_all,
    _split_by,
    piece_is_good,
)


# ---------------------------------------------------------------- A spaces


def _target(L):
    return JohnsonTarget(L.rank // 2)


def a_space(edge):
    """Image of ∧³H_0 + ∧³H_1 in the Johnson target."""
    L = edge.ambient
    t = _target(L)
    S = RationalSubspace.zero(t.total.dimension)
    for H in edge.pieces:
        S = S.sum(wedge_of_lattice(H, 3))
    return t.project_subspace(S)


def family_perp_image(L, fam):
    """Image of ∧³ of the common perp of the family members."""
    from .lattice import perp

    t = _target(L)
    return t.project_subspace(wedge_of_lattice(perp(L, fam.members), 3))


def a_space_restricted(edge, fam):
    return a_space(edge).intersect(family_perp_image(edge.ambient, fam))


_WEDGE = {}


def wedge_image(L, triple):
    """Johnson-target image of r_1 ∧ r_2 ∧ r_3."""
    key = (L.rank, triple)
    if key not in _WEDGE:
        if len(_WEDGE) > 50000:
            _WEDGE.clear()
        t = _target(L)
        _WEDGE[key] = t.quotient_project(t.wedge3(*triple))
    return _WEDGE[key]


def terms_value(L, terms):
    t = _target(L)
    out = [Fraction(0)] * t.total.dimension
    for c, tr in terms:
        for j, x in enumerate(wedge_image(L, tr)):
            if x:
                out[j] += c * x
    return out


def _triple(vs):
    return tuple(tuple(int(x) for x in v) for v in vs)


def _scale_terms(terms, s):
    s = Fraction(s)
    return [(c * s, tr) for c, tr in terms if c * s]


def _piece_of(pieces, tr):
    for k, H in enumerate(pieces):
        if all(H.contains(list(r)) for r in tr):
            return k
    return None


def _pieces_cover(pieces, terms):
    return all(_piece_of(pieces, tr) is not None for _, tr in terms)


def expand_in_pieces(edge, f):
    """Pure-wedge terms over the piece bases with value f, or None if f ∉ A_edge."""
    L = edge.ambient
    gens = []
    for H in edge.pieces:
        B = H.basis
        for i in range(len(B)):
            for j in range(i + 1, len(B)):
                for k in range(j + 1, len(B)):
                    gens.append(_triple((B[i], B[j], B[k])))
    rows = [wedge_image(L, tr) for tr in gens]
    x = intlin.q_solve_left(rows, [Fraction(v) for v in f])
    if x is None:
        return None
    return [(c, tr) for c, tr in zip(x, gens) if c]


class EdgeClass:
    """(edge, f) with f ∈ A_edge, attached to the edge in canonical orientation."""

    __slots__ = ("edge", "terms", "_coeff")

    def __init__(self, edge, coeff=None, terms=None):
        if edge.dim != 1:
            raise PreconditionError("edge classes live on 1-cells")
        self.edge = edge
        self._coeff = None
        if terms is not None:
            terms = [(Fraction(c), _triple(tr)) for c, tr in terms if c]
            if not _pieces_cover(edge.pieces, terms):
                raise PreconditionError("coefficient outside A_edge: a wedge term is not inside one piece")
            self.terms = terms
        elif coeff is not None:
            found = expand_in_pieces(edge, coeff)
            if found is None:
                raise PreconditionError("coefficient outside A_edge")
            self.terms = found
            self._coeff = [Fraction(x) for x in coeff]
        else:
            raise PreconditionError("an edge class needs a coefficient or wedge terms")

    @property
    def coeff(self):
        if self._coeff is None:
            self._coeff = terms_value(self.edge.ambient, self.terms)
        return self._coeff

    def is_zero(self):
        return not any(self.coeff)

    def __repr__(self):
        return f"EdgeClass(genera={self.edge.genera()}, terms={len(self.terms)})"


def class_sum(classes):
    """Per-edge sum of coefficient vectors, zero entries dropped."""
    out = {}
    cells = {}
    for ec in classes:
        k = ec.edge.key()
        v = ec.coeff
        if k in out:
            out[k] = [x + y for x, y in zip(out[k], v)]
        else:
            out[k] = list(v)
            cells[k] = ec.edge
    return {k: v for k, v in out.items() if any(v)}


# ---------------------------------------------------------------- measures


def edge_rank_measure(edge, fam):
    _, rk, _ = tables(edge, fam)
    vals = [x for row in rk for x in row]
    m = max(vals, default=0)
    if m <= 1:
        return (0, 0)
    return (m, vals.count(m))


def edge_theta_measure(edge, fam):
    _, _, th = tables(edge, fam)
    n = len(th)
    vals = [max(abs(x) for x in th[i][j]) for i in range(n) for j in range(i + 1, n)]
    m = max(vals, default=0)
    if m <= 1:
        return (0, 0)
    return (m, vals.count(m))


def edge_measure(edge, fam, kind):
    return edge_rank_measure(edge, fam) if kind == "rank" else edge_theta_measure(edge, fam)


# ---------------------------------------------------------------- steps


@dataclass
class EdgeStep:
    """Add boundary(cell) ⊗ f, f given by wedge terms inside pieces of cell."""

    kind: str
    cell: Cell
    terms: list
    input: Cell
    outputs: list
    before: tuple = ()
    after: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def in_a_sigma(self):
        return _pieces_cover(self.cell.pieces, self.terms)

    def apply(self, acc):
        L = self.cell.ambient
        val = terms_value(L, self.terms)
        for e, s in boundary(self.cell).items():
            k = e.key()
            cur = acc.get(k)
            if cur is None:
                cur = [Fraction(0)] * len(val)
            acc[k] = [x + s * y for x, y in zip(cur, val)]
        return acc


def _apply_cell(L, sigma, E, terms, kind):
    """Move `terms` off the canonical edge E through the oriented 2-cell tuple sigma."""
    cell, s = oriented(L, sigma)
    bd = boundary(cell)
    beta = bd.terms.get(E.key())
    if beta is None:
        raise InvariantError("the rewritten edge is not on the boundary of the 2-cell")
    lam = Fraction(-1) / beta
    f = _scale_terms(terms, lam)
    children = []
    for e, c in bd.items():
        if e.key() == E.key():
            continue
        ch = _scale_terms(f, c)
        if not _pieces_cover(e.pieces, ch):
            raise InvariantError("a moved wedge term does not lie in a piece of the new edge")
        children.append((e, ch))
    step = EdgeStep(kind=kind, cell=cell, terms=f, input=E, outputs=[e for e, _ in children])
    if not step.in_a_sigma():
        raise InvariantError("coefficient is not in A_σ")
    return step, children


def _u_part(L, P, fam, r):
    U, _ = _member_projections(P, fam)
    return project(L, U, list(r))


def _hull(L, U, vecs):
    W = [intlin.primitive_part(x) for x in vecs if any(x)]
    M = symplectic_hull(L, W, within=U) if W else LatticeSubgroup(L, [])
    Cp = perp_within(L, M, U) if M.basis else U
    return M, Cp


def _perturbed(L, P, term, rng, feasible):
    """c r1∧r2∧r3 = c (r1+z)∧r2∧r3 - c z∧r2∧r3 for a random z in P, shifting
    the first factor (after a cyclic rotation) that makes both terms feasible."""
    c, tr = term
    z = [0] * L.rank
    while not any(z):
        z = intlin.combo([rng.choice((-1, 0, 1)) for _ in P.basis], P.basis, L.rank)
    options = []
    for t in range(3):
        r1, r2, r3 = tr[t:] + tr[:t]
        r1z = [x + y for x, y in zip(r1, z)]
        out = [(c, _triple((r1z, r2, r3))), (-c, _triple((z, r2, r3)))]
        if all(feasible(list(o[1])) is not None for o in out):
            return out
        options.append(out)
    return rng.choice(options)


def _rank_split_vectors(L, P, fam, i1, rs, rng):
    """(u, u*) in the unimodular part of P with <u, u*> = 1, both orthogonal to
    the rs and to the projections other than i1, u orthogonal to every
    projection and <proj_i1, u*> = 1.  None if the constraints are unsolvable."""
    U, xs = _member_projections(P, fam)
    live = [i for i, x in enumerate(xs) if any(x)]
    ws = [intlin.primitive_part(xs[i]) for i in live]
    rus = [_u_part(L, P, fam, r) for r in rs]
    try:
        M, Cp = _hull(L, U, ws + rus)
    except ThresholdError:
        return None
    if Cp.genus < 1:
        return None
    vecs = ws + [r for r in rus if any(r)]
    targets = [1 if i == i1 else 0 for i in live] + [0] * (len(vecs) - len(ws))
    m = _solve_pairings_all(L, M.basis, vecs, targets, rng)
    if m is None:
        return None
    u, c0 = _random_hyperbolic_pair(L, Cp, rng)
    return u, [x + y for x, y in zip(c0, m)]


def _theta_split_vectors(L, P, fam, i, j, rs, rng):
    """(u1, u2) with <u1, u2> = s = sign θ_ij, projections of i, j onto span{u1, u2}
    equal to u1, u2, all other projections and the rs orthogonal to both."""
    U, xs = _member_projections(P, fam)
    theta = L.pair(xs[i], xs[j])
    s = 1 if theta > 0 else -1
    live = [k for k, x in enumerate(xs) if any(x)]
    rus = [_u_part(L, P, fam, r) for r in rs]
    try:
        M, Cp = _hull(L, U, [xs[k] for k in live] + rus)
    except ThresholdError:
        return None
    if Cp.genus < 1:
        return None
    vecs = [xs[k] for k in live] + [r for r in rus if any(r)]
    extra = [0] * (len(vecs) - len(live))
    e = _solve_pairings_all(L, M.basis, vecs, [-s if k == j else 0 for k in live] + extra, rng)
    f = _solve_pairings_all(L, M.basis, vecs, [s if k == i else 0 for k in live] + extra, rng)
    if e is None or f is None:
        return None
    p0, q0 = _random_hyperbolic_pair(L, Cp, rng)
    c = s - L.pair(e, f)
    u1 = [x + y for x, y in zip(e, p0)]
    u2 = [x + y + c * z for x, y, z in zip(f, p0, q0)]
    return u1, u2, s, theta


def _check_theta_vectors(L, xs, i, j, u1, u2, s, theta):
    rest = [k for k, x in enumerate(xs) if any(x) and k not in (i, j)]
    hi = [x - y for x, y in zip(xs[i], u1)]
    hj = [x - y for x, y in zip(xs[j], u2)]
    cons = {
        "u_perp_rest": all(L.pair(u, xs[k]) == 0 for u in (u1, u2) for k in rest),
        "u_pair": L.pair(u1, u2) == s,
        "h_perp_u": all(L.pair(h, u) == 0 for h in (hi, hj) for u in (u1, u2)),
        "theta_drop": L.pair(hi, hj) == theta - s,
    }
    if not all(cons.values()):
        raise InvariantError(f"θ split constraints failed: {sorted(k for k, ok in cons.items() if not ok)}")
    return cons


# ---------------------------------------------------------------- engine


def _first_max_rank(rk):
    m = max(x for row in rk for x in row)
    for i, row in enumerate(rk):
        for k, x in enumerate(row):
            if x == m:
                return i, k


def _first_max_pair(th):
    n = len(th)
    best = None
    for i in range(n):
        for j in range(i + 1, n):
            v = abs(th[i][j][0])
            if best is None or v > best[0]:
                best = (v, i, j)
    return best[1], best[2]


def _group(L, P, terms, feasible, rng):
    """Greedy group of terms over P with a feasible construction; infeasible
    single terms are rewritten by a random shift of their first factor."""
    group, rest = [], []
    built = None
    queue = list(terms)
    tries = 0
    while queue:
        term = queue.pop(0)
        rs = [r for _, tr in group + [term] for r in tr]
        got = feasible(rs)
        if got is not None:
            group.append(term)
            built = got
            continue
        if group:
            rest.append(term)
            continue
        tries += 1
        if tries > 50:
            raise InvariantError("no split vectors compatible with a wedge term")
        queue = _perturbed(L, P, term, rng, feasible) + queue
    if built is None:
        built = feasible([])
        if built is None:
            raise InvariantError("no split vectors with the required pairings exist")
    return group, rest, built


def _edge_rank_step(L, E, terms, fam, th, rng):
    """One shrink or genus increase step; returns (step, children, leftover terms)."""
    _, rk, _ = tables(E, fam)
    i1, k = _first_max_rank(rk)
    c = 1 - k
    Pc, Pk = E.pieces[c], E.pieces[k]
    mine = [t for t in terms if _piece_of((Pk,), t[1]) is None]
    free = [t for t in terms if _piece_of((Pk,), t[1]) is not None]
    if Pc.genus < th.edge_split:
        return _edge_genus_increase(L, E, c, k, mine, free, fam, th, rng)
    group, rest, (u, us) = _group(L, Pc, mine, lambda rs: _rank_split_vectors(L, Pc, fam, i1, rs, rng), rng)
    Y, Yp = _split_by(L, Pc, LatticeSubgroup(L, [u, us]))
    step, children = _apply_cell(L, (Y, Yp, Pk), E, group + free, "rank-shrink")
    step.data = {"index": i1, "piece": k, "u": u, "u_star": us}
    return step, children, rest


def _edge_genus_increase(L, E, c, k, mine, free, fam, th, rng):
    """Split H off the donor piece so the other piece reaches the split bound.

    Terms inside the donor must lie in H^⊥; terms in the receiving piece are free.
    """
    from .lattice import extend_to_symplectic_subgroup

    Pc, Pk = E.pieces[c], E.pieces[k]
    h = th.edge_split - Pc.genus
    Uk, xs = _member_projections(Pk, fam)
    donor = [t for t in free]

    def feasible(rs):
        cons = [x for x in xs if any(x)] + [v for v in (_u_part(L, Pk, fam, r) for r in rs) if any(v)]
        try:
            M, _ = _hull(L, Uk, cons)
            if Uk.genus - M.genus < h:
                return None
            return extend_to_symplectic_subgroup(L, (), within=Uk, perp_to=M.basis, genus=h, seed=rng.random())
        except ThresholdError:
            return None

    if Uk.genus < h + 1:
        raise ThresholdError(f"genus bound violated: donor piece genus {Uk.genus} cannot give genus {h}")
    group, rest, Hu = _group(L, Pk, donor, feasible, rng)
    H, Hp = _split_by(L, Pk, Hu)
    step, children = _apply_cell(L, (Pc, H, Hp), E, group + mine, "genus-increase")
    step.data = {"genus": h, "donor": k}
    return step, children, rest


def _edge_theta_step(L, E, terms, fam, th, rng, attempts=24):
    _, _, tab = tables(E, fam)
    i, j = _first_max_pair(tab)
    c = 0 if E.pieces[0].genus >= E.pieces[1].genus else 1
    k = 1 - c
    Pc, Pk = E.pieces[c], E.pieces[k]
    if Pc.genus < th.edge_theta_split:
        raise ThresholdError(f"genus bound violated: largest piece genus {Pc.genus} < {th.edge_theta_split}")
    if not piece_is_good(Pc, fam):
        raise InvariantError("family projections on the split piece do not span a saturated subgroup")
    mine = [t for t in terms if _piece_of((Pk,), t[1]) is None]
    free = [t for t in terms if _piece_of((Pk,), t[1]) is not None]
    _, xs = _member_projections(Pc, fam)
    # the split vectors are free up to kernel shifts and the hyperbolic pair;
    # keep the first choice whose output edges stay good
    for attempt in range(attempts):
        group, rest, (u1, u2, s, theta) = _group(L, Pc, mine, lambda rs: _theta_split_vectors(L, Pc, fam, i, j, rs, rng), rng)
        cons = _check_theta_vectors(L, xs, i, j, u1, u2, s, theta)
        Hpp, Hp = _split_by(L, Pc, LatticeSubgroup(L, [u1, u2]))
        step, children = _apply_cell(L, (Hp, Hpp, Pk), E, group + free, "theta-shrink")
        if all(piece_is_good(P, fam) for e in step.outputs for P in e.pieces):
            break
    step.data = {"pair": (i, j), "sign": s, "u1": u1, "u2": u2, "constraints": cons, "attempt": attempt}
    return step, children, rest


@dataclass
class EdgeCertificate:
    kind: str
    steps: list

    def __len__(self):
        return len(self.steps)


def _check_input(ec, fam, th):
    L = ec.edge.ambient
    th.check_ambient(L.rank // 2, edges=True)
    if len(fam) > th.n:
        raise ThresholdError(f"family size {len(fam)} exceeds the preset size {th.n}")


def _edge_reduce(classes, fam, kind, th, seed, max_steps):
    if isinstance(classes, EdgeClass):
        classes = [classes]
    classes = list(classes)
    for ec in classes:
        _check_input(ec, fam, th)
    rng = random.Random(f"edge:{kind}:{seed}")
    work = {}
    cells = {}

    def push(e, terms):
        if not terms:
            return
        key = e.key()
        cells[key] = e
        work.setdefault(key, []).extend(terms)

    for ec in classes:
        push(ec.edge, ec.terms)
    steps = []
    done = {}
    stepper = _edge_rank_step if kind == "rank" else _edge_theta_step
    while work:
        key = max(work, key=lambda k: (edge_measure(cells[k], fam, kind), k))
        E = cells[key]
        terms = work.pop(key)
        before = edge_measure(E, fam, kind)
        if before == (0, 0):
            done.setdefault(key, []).extend(terms)
            continue
        if len(steps) >= max_steps:
            raise MeasureError("edge reduction exceeded its step budget")
        step, children, rest = stepper(E.ambient, E, terms, fam, th, rng)
        step.before = before
        step.after = [edge_measure(e, fam, kind) for e, _ in children]
        if step.kind != "genus-increase" and not all(a < before for a in step.after):
            raise MeasureError(f"edge step did not decrease the measure: {before} -> {step.after}")
        if step.kind == "genus-increase" and not all(a <= before for a in step.after):
            raise MeasureError(f"genus increase raised the measure: {before} -> {step.after}")
        steps.append(step)
        for e, ch in children:
            push(e, ch)
        if rest:
            push(E, rest)
    out = [EdgeClass(cells[k], terms=t) for k, t in sorted(done.items())]
    out = [ec for ec in out if not ec.is_zero()]
    return out, EdgeCertificate(kind, steps)


def edge_rank_reduce(classes, fam, th=None, seed=0, max_steps=10000):
    """Rewrite edge classes into classes whose edges have every rk <= 1."""
    th = th or Thresholds.scaled(len(fam))
    return _edge_reduce(classes, fam, "rank", th, seed, max_steps)


def edge_theta_reduce(classes, fam, th=None, seed=0, max_steps=10000):
    """Rewrite edge classes with rk <= 1 into classes with every |θ| <= 1 as well."""
    th = th or Thresholds.scaled(len(fam))
    classes = [classes] if isinstance(classes, EdgeClass) else list(classes)
    for ec in classes:
        if edge_rank_measure(ec.edge, fam) != (0, 0):
            raise PreconditionError("θ reduction needs every rk <= 1")
    out, cert = _edge_reduce(classes, fam, "theta", th, seed, max_steps)
    for ec in out:
        if edge_rank_measure(ec.edge, fam) != (0, 0):
            raise InvariantError("θ reduction raised an rk value above 1")
    return out, cert


def replay_edge_certificate(classes, cert):
    classes = [classes] if isinstance(classes, EdgeClass) else list(classes)
    acc = class_sum(classes)
    for step in cert.steps:
        step.apply(acc)
    return {k: v for k, v in acc.items() if any(v)}


def verify_edge_certificate(classes_in, classes_out, cert, fam=None):
    """Check A_σ membership per step, the replayed identity and the measures."""
    for n, step in enumerate(cert.steps):
        if not step.in_a_sigma():
            raise CertificateError(f"step {n}: coefficient is not in A_σ")
        if step.input.key() not in {e.key() for e, _ in boundary(step.cell).items()}:
            raise CertificateError(f"step {n}: rewritten edge is not a face of the 2-cell")
        if fam is not None:
            after = [edge_measure(e, fam, cert.kind) for e in step.outputs]
            before = edge_measure(step.input, fam, cert.kind)
            if tuple(before) != tuple(step.before) or after != list(step.after):
                raise CertificateError(f"step {n}: recorded measures do not match")
    got = replay_edge_certificate(classes_in, cert)
    want = class_sum(classes_out)
    if got != want:
        raise CertificateError("replayed certificate does not reproduce the output classes")
    if fam is not None:
        for ec in classes_out:
            if edge_measure(ec.edge, fam, cert.kind) != (0, 0):
                raise CertificateError("an output edge is not reduced")
    return True
