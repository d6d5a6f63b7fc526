"""Seeded verification suites driven by the CLI.

Each suite returns a report {"suite", "config", "checks", "pass"}; a check is
{"check", "pass", "count", "failures"} with counterexample data on failure.
Cross-checks here use a second internal route (a different formula or
algorithm); the test suite adds independent sympy oracles.
"""

import time
from fractions import Fraction
from itertools import combinations
from math import comb

from . import intlin
from .cells import (
    BMTorus,
    Cell,
    H1Model,
    a_vector,
    boundary,
    bm_sum_certificate,
    h1_chain_value,
    unimodular_part,
)
from .coinvariants import MatrixAction, TransvectiveData, base_case_decomposition, coinvariants, fixed_space_of
from .edge_reduction import EdgeClass, edge_measure, edge_rank_reduce, edge_theta_reduce, verify_edge_certificate
from .errors import PreconditionError
from .exterior import JohnsonTarget, RationalSubspace, inclusion_exclusion_dims, pairs_span, perp_family_report, spanning_pairs, wedge_of_lattice
from .generators import (
    block_pieces,
    family_instance,
    random_cell,
    random_edge_instance,
    random_genera,
    random_instance,
    random_mixing,
    rng_for,
    small_vector,
    standard,
)
from .invariants import enumerate_bounded_keys, genus_partitions, orbit_key, tables, verify_update_relations
from .johnson import fixed_space_of_action, h1_intersection_dim, perp_image, transvection_action
from .lattice import LatticeSubgroup, intersect, perp, span, symplectic_basis, transvect
from .reduction import BMChain, Thresholds, rank_reduce, theta_reduce, torus_tables, verify_certificate


class _Check:
    def __init__(self, name):
        self.name = name
        self.count = 0
        self.failures = []

    def record(self, ok, data=None):
        self.count += 1
        if not ok and len(self.failures) < 5:
            self.failures.append(data)
        elif not ok:
            self.failures.append(None)

    def report(self):
        bad = len(self.failures)
        return {"check": self.name, "pass": bad == 0 and self.count > 0, "count": self.count, "failed": bad, "failures": [f for f in self.failures if f is not None]}


def _report(name, config, checks, t0):
    out = [c.report() for c in checks]
    return {"suite": name, "config": config, "checks": out, "pass": all(c["pass"] for c in out), "seconds": round(time.time() - t0, 3)}


def _primitive_vector(rng, n, support=3):
    while True:
        v = small_vector(rng, n, support=support, bound=2)
        if any(v) and intlin.content(v) == 1:
            return v


def _independent_primitive(L, rng, count, within=None, support=3):
    while True:
        W = [_primitive_vector(rng, L.rank, support) for _ in range(count)]
        rows = [L.adjoint(w) for w in W]
        if within is not None:
            rows = [[intlin.dot(r, b) for b in within.basis] for r in rows]
        if intlin.rank(rows) == count:
            return W


# ---------------------------------------------------------------- lattice and exterior


def suite_transvection(g=5, seed=0, trials=500, **_):
    t0 = time.time()
    form, fix, inv = _Check("form preserved"), _Check("perp fixed"), _Check("inverse power")
    for s in range(trials):
        rng = rng_for(seed, "transvection", s)
        h = rng.randint(1, max(1, g))
        L = standard(h)
        v = _primitive_vector(rng, L.rank)
        w, x = small_vector(rng, L.rank, 4, 3), small_vector(rng, L.rank, 4, 3)
        Tw, Tx = transvect(L, v, w), transvect(L, v, x)
        form.record(L.pair(Tw, Tx) == L.pair(w, x), {"g": h, "v": v, "w": w, "x": x})
        P = perp(L, [v])
        y = intlin.combo([rng.randint(-2, 2) for _ in P.basis], P.basis, L.rank)
        fix.record(transvect(L, v, y) == y, {"g": h, "v": v, "y": y})
        k = rng.choice((1, 2, 3))
        inv.record(transvect(L, v, transvect(L, v, w, k), -k) == w, {"g": h, "v": v, "w": w, "k": k})
    return _report("transvection", {"g": g, "seed": seed, "trials": trials}, [form, fix, inv], t0)


def suite_inclusion_exclusion(seed=0, trials=20, sizes=range(8, 13), **_):
    t0 = time.time()
    img, levels, alt = _Check("image dimension C(n,3)"), _Check("level dimensions C(n-k,3)"), _Check("alternating sum")
    L = standard(6)
    for n in sizes:
        within = span(L, [L.basis_vector(i) for i in range(n)])
        V = wedge_of_lattice(within, 3)
        for s in range(trials):
            rng = rng_for(seed, "inclusion-exclusion", n, s)
            W = _independent_primitive(L, rng, 4, within)
            parts = [wedge_of_lattice(intersect(perp(L, [w]), within), 3) for w in W]
            rep = inclusion_exclusion_dims(V, parts)
            data = {"n": n, "W": W, "d": rep["d"]}
            img.record(rep["image_dim"] == comb(n, 3), data)
            levels.record(rep["d"] == [comb(n - k, 3) for k in range(5)], data)
            formula = sum((-1) ** (k + 1) * comb(4, k) * comb(n - k, 3) for k in range(1, 5))
            alt.record(rep["image_dim_formula"] == formula == comb(n, 3) and rep["identity_holds"], data)
    return _report("inclusion-exclusion", {"seed": seed, "trials": trials, "sizes": list(sizes)}, [img, levels, alt], t0)


def _quasi_unimodular(L, rng, r):
    """A random subgroup of rank r <= 8 with genus >= 1: h pairs plus an isotropic radical."""
    g = L.rank // 2
    h = rng.randint(max(1, r - g), r // 2)
    k = r - 2 * h
    rows = []
    for j in range(1, h + 1):
        rows += [L.alpha(j), L.beta(j)]
    for j in range(h + 1, h + 1 + k):
        rows.append(L.alpha(j))
    if h + k > g:
        raise PreconditionError("ambient genus too small")
    M = random_mixing(L, rng, 4, fixed=())
    return LatticeSubgroup(L, [M(v) for v in rows])


def suite_wedge(g=6, seed=0, trials=50, **_):
    """∧² perp families and spanning pairs."""
    t0 = time.time()
    g = max(g, 3)
    L = standard(g)
    three, many, two = _Check("|W|=3, m=1 surjective"), _Check("m <= |W|-2 surjective"), _Check("|W|=2 has a deficit")
    pairs = _Check("spanning pairs reach C(r,2)")
    for s in range(trials):
        rng = rng_for(seed, "wedge", s)
        W = _independent_primitive(L, rng, 3)
        rep = perp_family_report(L, W, 2, 1)
        three.record(rep["surjective"], {"W": W, "report": rep})
        size = rng.choice((4, 5))
        if size <= L.rank:
            W = _independent_primitive(L, rng, size)
            for m in range(1, size - 1):
                rep = perp_family_report(L, W, 2, m)
                many.record(rep["surjective"], {"W": W, "m": m, "report": rep})
        W = _independent_primitive(L, rng, 2)
        rep = perp_family_report(L, W, 2, 1)
        two.record(rep["deficit"] > 0, {"W": W, "report": rep})
        r = rng.randint(2, min(8, 2 * g - 2))
        S = _quasi_unimodular(L, rng, r)
        P = spanning_pairs(S)
        got = pairs_span(P, L.rank)
        pairs.record(got.dim == comb(r, 2) and wedge_of_lattice(S, 2).contains_subspace(got), {"basis": S.basis, "dim": got.dim})
    return _report("wedge", {"g": g, "seed": seed, "trials": trials}, [three, many, two, pairs], t0)


def suite_fixed_space(seed=0, trials=50, genera=(2, 3, 4, 5), **_):
    t0 = time.time()
    eq, dims = _Check("kernel equals the image of ∧³w^⊥"), _Check("dimension C(2g-1,3) - 1")
    for s in range(trials):
        rng = rng_for(seed, "fixed-space", s)
        g = genera[s % len(genera)]
        t = JohnsonTarget(g)
        w = _primitive_vector(rng, 2 * g)
        K = fixed_space_of_action(transvection_action(t, w))
        img = perp_image(t, [w])
        eq.record(K == img, {"g": g, "w": w, "kernel": K.dim, "image": img.dim})
        want = comb(2 * g - 1, 3) - 1
        dims.record(K.dim == want, {"g": g, "w": w, "dim": K.dim, "want": want})
    return _report("fixed-space", {"seed": seed, "trials": trials}, [eq, dims], t0)


def suite_injectivity(seed=0, trials=50, **_):
    t0 = time.time()
    chk = _Check("∧³S meets H_1 trivially")
    for s in range(trials):
        rng = rng_for(seed, "injectivity", s)
        g = rng.randint(2, 5)
        L = standard(g)
        h = rng.randint(1, g - 1)
        rows = [v for j in range(1, h + 1) for v in (L.alpha(j), L.beta(j))]
        M = random_mixing(L, rng, 4)
        S = LatticeSubgroup(L, [M(v) for v in rows])
        d = h1_intersection_dim(JohnsonTarget(g), S)
        chk.record(d == 0, {"g": g, "basis": S.basis, "dim": d})
    return _report("injectivity", {"seed": seed, "trials": trials}, [chk], t0)


# ---------------------------------------------------------------- cells and invariants


def suite_bm_relations(seed=0, trials=50, **_):
    """4-piece configurations at the minimal genus g = 5."""
    t0 = time.time()
    L = standard(5)
    ident, expand = _Check("boundary identity"), _Check("displayed boundary expansions")
    for s in range(trials):
        rng = rng_for(seed, "bm-relations", s)
        cell, _ = random_cell(L, [1, 1, 1, 1], rng)
        H = cell.pieces
        rep = bm_sum_certificate(L, *H)
        data = {"pieces": [p.basis for p in H]}
        ident.record(rep["lhs"] == rep["rhs"], data)
        expand.record(rep["expansions_verified"], data)
    return _report("bm-relations", {"seed": seed, "trials": trials}, [ident, expand], t0)


def symplectic_basis_projection(H, b, v):
    """Projection onto H ∩ b^⊥ through a symplectic basis: Σ <v,β_i> α_i - <v,α_i> β_i."""
    L = H.ambient
    U = unimodular_part(H, b)
    out = [0] * L.rank
    for x, y in symplectic_basis(U) if U.basis else []:
        out = intlin.vec_add(out, x, L.pair(v, y))
        out = intlin.vec_add(out, y, -L.pair(v, x))
    return out


def _update_instance(L, rng, n):
    genera = random_genera(rng, L.rank // 2 - 1, 4, minimum=max(1, n))
    while True:
        rk = [[rng.randint(0, 2) for _ in range(4)] for _ in range(n)]
        if all(intlin.content(r) == 1 for r in rk):
            break
    return family_instance(L, genera, rk, None, rng)


def suite_update_rules(seed=0, trials=100, n=2, g=None, **_):
    t0 = time.time()
    g = g or 4 * max(1, n) + 1
    L = standard(g)
    checks = {r: _Check(f"relation {r}") for r in range(1, 9)}
    agree = _Check("built-in and symplectic-basis projections agree")
    for s in range(trials):
        rng = rng_for(seed, "update-rules", s)
        P, fam = _update_instance(L, rng, n)
        rep = verify_update_relations(L, *P, fam)
        oracle = verify_update_relations(L, *P, fam, projector=symplectic_basis_projection)
        data = {"pieces": [p.basis for p in P], "members": fam.members}
        for r in range(1, 9):
            checks[r].record(rep[r]["pass"] and oracle[r]["pass"], dict(data, witnesses=rep[r]["witnesses"]))
        agree.record(rep["tables"] == oracle["tables"], data)
    return _report("update-rules", {"g": g, "n": n, "seed": seed, "trials": trials}, list(checks.values()) + [agree], t0)


def suite_bounded_keys(seed=0, trials=200, n=3, g=12, **_):
    t0 = time.time()
    fin, member = _Check("enumeration terminates"), _Check("sampled admissible keys enumerated")
    keys = {}
    for kind, parts in (("torus", 3), ("edge", 2)):
        ps = [p for h in range(parts + 1, g + 1) for p in genus_partitions(h - 1, parts)]
        for m in range(1, n + 1):
            keys[kind, m] = enumerate_bounded_keys(ps, m, kind)
            fin.record(len(keys[kind, m]) > 0, {"kind": kind, "n": m})
    for s in range(trials):
        rng = rng_for(seed, "bounded-keys", s)
        kind = rng.choice(("torus", "edge"))
        parts = 3 if kind == "torus" else 2
        m = rng.randint(1, n)
        h = rng.randint(parts + m, g)
        L = standard(h)
        rk, theta = _admissible_tables(rng, m, parts)
        need = [max(1, sum(1 for i in range(m) if rk[i][k])) for k in range(parts)]
        if sum(need) > h - 1:
            h = sum(need) + 1
            L = standard(h)
        genera = list(need)
        for _ in range(h - 1 - sum(need)):
            genera[rng.randrange(parts)] += 1
        P, fam = family_instance(L, genera, rk, theta, rng)
        cell = Cell(L, P) if kind == "edge" else BMTorus(L, P)
        key = orbit_key(cell, fam)
        member.record(key in keys[kind, m], {"kind": kind, "genera": genera, "rk": rk, "key": repr(key)})
    return _report("bounded-keys", {"g": g, "n": n, "seed": seed, "trials": trials}, [fin, member], t0)


def _admissible_tables(rng, m, parts):
    while True:
        rk = [[rng.randint(0, 1) for _ in range(parts)] for _ in range(m)]
        if all(any(r) for r in rk):
            break
    theta = {}
    for i in range(m):
        for j in range(i + 1, m):
            sup = [k for k in range(parts) if rk[i][k] and rk[j][k]]
            vals = [0] * parts
            if len(sup) >= 2 and rng.random() < 0.7:
                p, q = rng.sample(sup, 2)
                vals[p], vals[q] = 1, -1
            theta[(i, j)] = vals
    return rk, theta


def suite_h1_model(seed=0, trials=50, g=4, **_):
    t0 = time.time()
    chk = _Check("boundary of a 2-cell vanishes in the H_1 model")
    g = max(g, 4)
    L = standard(g)
    model = H1Model(L)
    for s in range(trials):
        rng = rng_for(seed, "h1-model", s)
        cell, _ = random_cell(L, random_genera(rng, g - 1, 3), rng)
        val = h1_chain_value(model, boundary(cell))
        chk.record(not any(val), {"genera": cell.genera(), "pieces": [p.basis for p in cell.pieces]})
    return _report("h1-model", {"g": g, "seed": seed, "trials": trials}, [chk], t0)


# ---------------------------------------------------------------- reductions


def _torus_campaign(kind, n, seed, trials, preset, g):
    th = Thresholds.named(preset, n)
    g = g or th.min_g
    th.check_ambient(g)
    L = standard(g)
    ok, red, dec = _Check("certificate replays"), _Check("outputs reduced"), _Check("measures decrease")
    for s in range(trials):
        rng = rng_for(seed, kind + "-reduction", s)
        P, fam = random_instance(L, n, rng, kind)
        ch = BMChain(L, [(BMTorus(L, P), 1)])
        data = {"pieces": [p.basis for p in P], "members": fam.members}
        f = rank_reduce if kind == "rank" else theta_reduce
        out, cert = f(ch, fam, th=th, seed=s)
        try:
            verify_certificate(ch, out, cert, fam)
            ok.record(True)
            dec.record(True)
        except Exception as e:
            ok.record(False, dict(data, error=str(e)))
            dec.record(False, dict(data, error=str(e)))
        good = True
        for T, _ in out.items():
            _, rk, tht = torus_tables(T, fam)
            good &= all(x <= 1 for r in rk for x in r)
            if kind == "theta":
                good &= all(abs(x) <= 1 for a in tht for b in a for x in b)
        red.record(good, data)
    return ok, red, dec


def suite_rank_reduction(seed=0, trials=20, n=2, preset="scaled", g=None, **_):
    t0 = time.time()
    checks = _torus_campaign("rank", n, seed, trials, preset, g)
    return _report("rank-reduction", {"n": n, "g": g, "preset": preset, "seed": seed, "trials": trials}, list(checks), t0)


def suite_theta_reduction(seed=0, trials=20, n=2, preset="scaled", g=None, **_):
    t0 = time.time()
    checks = _torus_campaign("theta", n, seed, trials, preset, g)
    return _report("theta-reduction", {"n": n, "g": g, "preset": preset, "seed": seed, "trials": trials}, list(checks), t0)


def suite_edge_reduction(seed=0, trials=20, n=2, preset="scaled", g=None, **_):
    t0 = time.time()
    th = Thresholds.named(preset, n)
    g = g or th.edge_min_g
    th.check_ambient(g, edges=True)
    L = standard(g)
    ok, red = _Check("certificate replays"), _Check("outputs reduced")
    for s in range(trials):
        kind = ("rank", "theta")[s % 2]
        rng = rng_for(seed, "edge-reduction", s)
        P, fam, terms = random_edge_instance(L, n, rng, kind)
        ec = EdgeClass(Cell(L, P), terms=terms)
        f = edge_rank_reduce if kind == "rank" else edge_theta_reduce
        out, cert = f(ec, fam, th=th, seed=s)
        data = {"kind": kind, "pieces": [p.basis for p in P], "members": fam.members}
        try:
            verify_edge_certificate([ec], out, cert, fam)
            ok.record(True)
        except Exception as e:
            ok.record(False, dict(data, error=str(e)))
        good = all(edge_measure(o.edge, fam, "rank") == (0, 0) for o in out)
        if kind == "theta":
            good &= all(edge_measure(o.edge, fam, "theta") == (0, 0) for o in out)
        red.record(good, data)
    return _report("edge-reduction", {"n": n, "g": g, "preset": preset, "seed": seed, "trials": trials}, [ok, red], t0)


# ---------------------------------------------------------------- coinvariants


def _random_unimodular(rng, d, steps=6):
    M = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
    for _ in range(steps):
        i, j = rng.sample(range(d), 2)
        c = rng.choice((-1, 1, 2))
        for k in range(d):
            M[i][k] += c * M[j][k]
    return M


def suite_coinvariants(seed=0, trials=20, **_):
    t0 = time.time()
    triv, sign, rn, kern = _Check("trivial action keeps V"), _Check("sign action kills V"), _Check("rank-nullity"), _Check("kernel is the common fixed space")
    for d in range(1, 5):
        I = [[int(i == j) for j in range(d)] for i in range(d)]
        triv.record(coinvariants(MatrixAction(d, {"e": I}))["dimension"] == d, {"d": d})
        neg = [[-x for x in r] for r in I]
        sign.record(coinvariants(MatrixAction(d, {"s": neg}))["dimension"] == 0, {"d": d})
    for s in range(trials):
        rng = rng_for(seed, "coinvariants", s)
        d = rng.randint(2, 5)
        f = [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]
        f[0][d - 1] += rng.choice((1, 2))
        gens = {"f": f, "h1": _random_unimodular(rng, d), "h2": _random_unimodular(rng, d)}
        data = TransvectiveData(MatrixAction(d, gens), ["f"])
        words = [[], ["h1"], ["h2"], ["h1", "-h2"]][: rng.randint(1, 4)]
        rep = base_case_decomposition(data, words)
        rn.record(rep["rank_nullity"], {"d": d, "words": words})
        common = RationalSubspace.full(d)
        for M in rep["conjugates"]:
            common = common.intersect(fixed_space_of(M))
        kern.record(common == rep["kernel"], {"d": d, "words": words})
    return _report("coinvariants", {"seed": seed, "trials": trials}, [triv, sign, rn, kern], t0)


SUITES = {
    "transvection": suite_transvection,
    "inclusion-exclusion": suite_inclusion_exclusion,
    "wedge": suite_wedge,
    "fixed-space": suite_fixed_space,
    "injectivity": suite_injectivity,
    "bm-relations": suite_bm_relations,
    "update-rules": suite_update_rules,
    "rank-reduction": suite_rank_reduction,
    "theta-reduction": suite_theta_reduction,
    "edge-reduction": suite_edge_reduction,
    "bounded-keys": suite_bounded_keys,
    "coinvariants": suite_coinvariants,
    "h1-model": suite_h1_model,
}


def run_suite(name, **config):
    """Run a named suite; None-valued config entries fall back to the suite defaults."""
    config = {k: v for k, v in config.items() if v is not None}
    if name == "all":
        reports = [f(**config) for f in SUITES.values()]
        return {"suite": "all", "config": config, "reports": reports, "pass": all(r["pass"] for r in reports)}
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](**config)
