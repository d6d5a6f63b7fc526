"""JSON encodings of lattices, cells, families, chains, edge classes and certificates.

Rationals are strings "p/q" (or "p"); wedge elements are sparse maps from
index tuples "i,j,k" to rationals; subspaces are their RREF rows.
"""

import json
from fractions import Fraction

from . import intlin
from .cells import BMTorus, Cell, Chain
from .errors import PreconditionError
from .exterior import RationalSubspace, WedgeSpace
from .invariants import ClassFamily
from .lattice import LatticeSubgroup, SymplecticLattice


def q_str(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def q_parse(s):
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise PreconditionError(f"bad rational {s!r}") from e


def _vec(v):
    return [int(x) for x in v]


def lattice_from_genus(g):
    return SymplecticLattice.standard(int(g))


def lattice_to_json(L):
    return {"rank": L.rank, "form": [list(r) for r in L.form]}


def lattice_from_json(d):
    return SymplecticLattice([[int(x) for x in r] for r in d["form"]])


def subgroup_to_json(H):
    """Hermite normal form rows, the canonical basis on output."""
    return [_vec(b) for b in intlin.hnf([list(r) for r in H.basis])] if H.basis else []


def subgroup_from_json(L, rows):
    for r in rows:
        if len(r) != L.rank:
            raise PreconditionError("vector length does not match the ambient rank")
    return LatticeSubgroup(L, [[int(x) for x in r] for r in rows])


def cell_to_json(cell):
    return {"g": cell.ambient.rank // 2, "pieces": [subgroup_to_json(H) for H in cell.pieces]}


def cell_from_json(d):
    L = lattice_from_genus(d["g"])
    return Cell(L, [subgroup_from_json(L, p) for p in d["pieces"]])


def family_to_json(fam):
    return {"g": fam.ambient.rank // 2, "b": _vec(fam.b), "members": [_vec(v) for v in fam.members]}


def family_from_json(d, L=None):
    L = L or lattice_from_genus(d["g"])
    return ClassFamily(L, [int(x) for x in d["b"]], [[int(x) for x in v] for v in d["members"]])


def torus_to_json(T):
    return [subgroup_to_json(H) for H in T.pieces]


def torus_from_json(L, d):
    return BMTorus(L, [subgroup_from_json(L, p) for p in d])


def bm_chain_to_json(chain):
    return {
        "type": "bm-chain",
        "g": chain.ambient.rank // 2,
        "terms": [{"cell": {"pieces": torus_to_json(T)}, "coeff": q_str(c)} for T, c in chain.items()],
    }


def bm_chain_from_json(d):
    from .reduction import BMChain

    L = lattice_from_genus(d["g"])
    return BMChain(L, [(torus_from_json(L, t["cell"]["pieces"]), q_parse(t["coeff"])) for t in d["terms"]])


def chain_to_json(ch):
    return [{"cell": {"pieces": [subgroup_to_json(H) for H in c.pieces]}, "coeff": q_str(v)} for c, v in ch.items()]


def chain_from_json(L, d):
    items = d if isinstance(d, list) else d["terms"]
    if not items:
        return Chain(0)
    ch = None
    for t in items:
        c = Cell(L, [subgroup_from_json(L, p) for p in t["cell"]["pieces"]])
        ch = ch or Chain(c.dim)
        ch.add_cell(c, q_parse(t["coeff"]))
    return ch


def bm_certificate_to_json(rep):
    return {
        "chain3": chain_to_json(rep["chain3"]),
        "lhs": chain_to_json(rep["lhs"]),
        "rhs": chain_to_json(rep["rhs"]),
        "verified": bool(rep["verified"]),
    }


def bounding_pair_to_json(bp):
    return {"cls": _vec(bp.cls), "side": subgroup_to_json(bp.side)}


def bounding_pair_from_json(L, d):
    from .johnson import BoundingPairDatum

    return BoundingPairDatum([int(x) for x in d["cls"]], subgroup_from_json(L, d["side"]))


def terms_to_json(terms):
    return [{"coeff": q_str(c), "wedge": [_vec(r) for r in tr]} for c, tr in terms]


def terms_from_json(d):
    return [(q_parse(t["coeff"]), tuple(tuple(int(x) for x in r) for r in t["wedge"])) for t in d]


def edge_class_to_json(ec):
    return {"edge": cell_to_json(ec.edge), "terms": terms_to_json(ec.terms)}


def edge_class_from_json(d):
    from .edge_reduction import EdgeClass

    edge = cell_from_json(d["edge"])
    if "terms" in d:
        return EdgeClass(edge, terms=terms_from_json(d["terms"]))
    W = WedgeSpace(edge.ambient.rank, 3)
    return EdgeClass(edge, coeff=wedge_from_json(W, d["coeff"]))


def edge_classes_to_json(classes):
    return {"type": "edge-classes", "classes": [edge_class_to_json(ec) for ec in classes]}


def edge_classes_from_json(d):
    return [edge_class_from_json(c) for c in d["classes"]]


def wedge_to_json(W, v):
    return {",".join(map(str, W.indices[i])): q_str(x) for i, x in enumerate(v) if x}


def wedge_from_json(W, d):
    v = [Fraction(0)] * W.dimension
    for k, x in d.items():
        idx = tuple(int(i) for i in k.split(","))
        if idx not in W.index:
            raise PreconditionError(f"bad wedge index {k!r}")
        v[W.index[idx]] = q_parse(x)
    return v


def subspace_to_json(S):
    return {"ncols": S.ncols, "rref": [[q_str(x) for x in r] for r in S.rows()]}


def subspace_from_json(d):
    return RationalSubspace.from_rows([[q_parse(x) for x in r] for r in d["rref"]], d["ncols"])


def action_to_json(action):
    return {
        "dim": action.dim,
        "generators": [{"label": k, "matrix": [[q_str(x) for x in r] for r in M]} for k, M in action.generators.items()],
    }


def action_from_json(d):
    from .coinvariants import MatrixAction

    return MatrixAction(d["dim"], {g["label"]: [[q_parse(x) for x in r] for r in g["matrix"]] for g in d["generators"]})


def torus_certificate_to_json(cert):
    steps = []
    for s in cert.steps:
        steps.append(
            {
                "kind": s.kind,
                "pieces": [subgroup_to_json(H) for H in s.pieces],
                "coefficient": q_str(s.coefficient),
                "input": torus_to_json(s.input),
                "input_coeff": q_str(s.input_coeff),
                "outputs": [{"pieces": torus_to_json(T), "coeff": q_str(c)} for T, c in s.outputs],
                "before": list(s.before),
                "after": [list(a) for a in s.after],
                "strict": s.strict,
            }
        )
    return {"type": "bm-certificate", "kind": cert.kind, "steps": steps}


def edge_certificate_to_json(cert):
    steps = []
    for s in cert.steps:
        steps.append(
            {
                "kind": s.kind,
                "cell": cell_to_json(s.cell),
                "terms": terms_to_json(s.terms),
                "input": cell_to_json(s.input),
                "outputs": [cell_to_json(e) for e in s.outputs],
                "before": list(s.before),
                "after": [list(a) for a in s.after],
            }
        )
    return {"type": "edge-certificate", "kind": cert.kind, "steps": steps}


def edge_certificate_from_json(d):
    from .edge_reduction import EdgeCertificate, EdgeStep

    steps = []
    for s in d["steps"]:
        steps.append(
            EdgeStep(
                kind=s["kind"],
                cell=cell_from_json(s["cell"]),
                terms=terms_from_json(s["terms"]),
                input=cell_from_json(s["input"]),
                outputs=[cell_from_json(e) for e in s["outputs"]],
                before=tuple(s["before"]),
                after=[tuple(a) for a in s["after"]],
            )
        )
    return EdgeCertificate(d["kind"], steps)


def dumps(obj):
    return json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n"


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise PreconditionError(f"cannot read {path}: {e}") from e
