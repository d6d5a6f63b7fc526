"""torelli-lab command line: verification suites, reductions, orbit keys.

Exit codes: 0 pass, 1 check failure, 2 usage or parse error, 3 invariant
violation, 4 threshold infeasible, 5 measure failure.
"""

import json
import sys

import click

from . import serialize as ser
from .cells import BMTorus, Cell
from .edge_reduction import edge_rank_reduce, edge_theta_reduce, verify_edge_certificate
from .errors import PreconditionError, TorelliLabError
from .generators import random_edge_instance, random_instance, rng_for, standard
from .invariants import orbit_key
from .reduction import BMChain, Thresholds, rank_reduce, theta_reduce, verify_certificate
from .suites import SUITES, run_suite


def _emit(obj, out):
    text = ser.dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise click.UsageError(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise click.UsageError(f"{path} is not valid JSON: {e}")


def _parse(fn, d, what):
    try:
        return fn(d)
    except (KeyError, TypeError, AttributeError) as e:
        raise click.UsageError(f"malformed {what}: missing or bad field {e}")


def _thresholds(preset, n, g, edges=False):
    th = Thresholds.named(preset, n)
    if g is not None:
        th.check_ambient(g, edges=edges)
    return th


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except TorelliLabError as e:
            click.echo(f"error: {e}", err=True)
            ctx.exit(e.exit_code)


@click.group(cls=_Group)
def main():
    """Exact toolkit for cell complexes of a symplectic lattice and their reductions."""


_common = [
    click.option("--g", "g", type=int, default=None, help="Ambient genus."),
    click.option("--n", "n", type=int, default=None, help="Family size."),
    click.option("--preset", type=click.Choice(["scaled", "paper"]), default="scaled", show_default=True),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--trials", type=int, default=None, help="Trial count (suite default if omitted)."),
    click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write JSON here instead of stdout."),
]


def common(f):
    for opt in reversed(_common):
        f = opt(f)
    return f


@main.command()
@click.argument("suite")
@common
def verify(suite, g, n, preset, seed, trials, out):
    """Run a seeded verification SUITE ('all' runs every suite)."""
    if suite != "all" and suite not in SUITES:
        raise click.UsageError(f"unknown suite {suite!r}; choose from: all, {', '.join(SUITES)}")
    if preset == "paper":
        Thresholds.paper(n if n is not None else 9).check_ambient(g or 0)
    report = run_suite(suite, g=g, n=n, seed=seed, trials=trials, preset=preset)
    report["config"] = {"suite": suite, "g": g, "n": n, "preset": preset, "seed": seed, "trials": trials}
    _emit(report, out)
    if not report["pass"]:
        sys.exit(1)


@main.command()
@click.argument("input", type=click.Path(dir_okay=False))
@click.option("--kind", type=click.Choice(["rank", "theta", "full"]), default="rank", show_default=True)
@common
def reduce(input, kind, g, n, preset, seed, trials, out):
    """Reduce a BM chain or edge classes from INPUT; writes {chain, certificate}."""
    d = _read_json(input)
    if not isinstance(d, dict) or "family" not in d:
        raise click.UsageError("input needs a 'family' entry and a 'chain' or 'edges' entry")
    fam = _parse(ser.family_from_json, d["family"], "family")
    n = n if n is not None else len(fam)
    if "edges" in d:
        classes = _parse(ser.edge_classes_from_json, d["edges"], "edge classes")
        genus = classes[0].edge.ambient.rank // 2 if classes else fam.ambient.rank // 2
        th = _thresholds(preset, n, genus, edges=True)
        result = {"type": "edge-reduction", "config": {"kind": kind, "preset": preset, "n": n, "seed": seed}, "certificates": []}
        cur = classes
        for k in (("rank", "theta") if kind == "full" else (kind,)):
            f = edge_rank_reduce if k == "rank" else edge_theta_reduce
            nxt, cert = f(cur, fam, th=th, seed=seed)
            verify_edge_certificate(cur, nxt, cert, fam)
            result["certificates"].append(ser.edge_certificate_to_json(cert))
            cur = nxt
        result["edges"] = ser.edge_classes_to_json(cur)
        _emit(result, out)
        return
    chain = _parse(ser.bm_chain_from_json, d["chain"], "chain")
    th = _thresholds(preset, n, chain.ambient.rank // 2)
    result = {"type": "bm-reduction", "config": {"kind": kind, "preset": preset, "n": n, "seed": seed}, "certificates": []}
    cur = chain
    for k in (("rank", "theta") if kind == "full" else (kind,)):
        f = rank_reduce if k == "rank" else theta_reduce
        nxt, cert = f(cur, fam, th=th, seed=seed)
        verify_certificate(cur, nxt, cert, fam)
        result["certificates"].append(ser.torus_certificate_to_json(cert))
        cur = nxt
    result["chain"] = ser.bm_chain_to_json(cur)
    _emit(result, out)


@main.command("orbit-key")
@click.argument("cell", type=click.Path(dir_okay=False))
@click.argument("family", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def orbit_key_cmd(cell, family, out):
    """Canonical orbit key of CELL (2 or 3 pieces) relative to FAMILY."""
    c = _parse(ser.cell_from_json, _read_json(cell), "cell")
    fam = _parse(ser.family_from_json, _read_json(family), "family")
    if c.ambient != fam.ambient:
        raise PreconditionError("cell and family live in different lattices")
    key = orbit_key(c, fam)
    _emit({"key": json.loads(json.dumps(key))}, out)


@main.command()
@click.option("--kind", type=click.Choice(["rank", "theta", "edge-rank", "edge-theta"]), default="rank", show_default=True)
@click.option("--bound", type=int, default=None, help="Largest rk (or |θ|) in the random table.")
@common
def sample(kind, bound, g, n, preset, seed, trials, out):
    """Write a seeded reduction input (chain or edge classes plus family)."""
    n = n if n is not None else 2
    th = Thresholds.named(preset, n)
    edges = kind.startswith("edge")
    g = g if g is not None else (th.edge_min_g if edges else th.min_g)
    L = standard(g)
    rng = rng_for(seed, "sample", kind)
    try:
        if edges:
            from .edge_reduction import EdgeClass

            P, fam, terms = random_edge_instance(L, n, rng, kind.split("-")[1], bound)
            d = {"edges": ser.edge_classes_to_json([EdgeClass(Cell(L, P), terms=terms)])}
        else:
            P, fam = random_instance(L, n, rng, kind, bound)
            d = {"chain": ser.bm_chain_to_json(BMChain(L, [(BMTorus(L, P), 1)]))}
    except ValueError as e:
        raise PreconditionError(str(e)) from e
    d["family"] = ser.family_to_json(fam)
    _emit(d, out)


if __name__ == "__main__":
    main()
