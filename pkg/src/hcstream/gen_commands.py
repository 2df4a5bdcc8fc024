"""Instance generation commands for the hc CLI."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Any, Optional

import typer

from hcstream.config import get_settings
from hcstream.errors import HCError, InvalidArgumentError, ParseError
from hcstream.graph import save_graph
from hcstream.instances import Family, InstanceSpec, generate
from hcstream.output import abort, emit_json

gen_app = typer.Typer(
    name="gen",
    help="Generate graph instances",
    no_args_is_help=True,
)

OutPath = Annotated[Path, typer.Argument(help="Graph file to write", dir_okay=False)]
HiddenPath = Annotated[
    Optional[Path],
    typer.Option("--hidden", "-H", help="Write the ground truth as JSON to this file"),
]
SeedOption = Annotated[
    Optional[int],
    typer.Option("--seed", help="Random seed (defaults to HC_SEED or the configured seed)"),
]


def _write(family: Family, params: dict[str, Any], seed: Optional[int], out: Path, hidden: Optional[Path]) -> None:
    try:
        chosen = seed if seed is not None else get_settings().seed
        instance = generate(InstanceSpec(family, params, chosen))
    except HCError as e:
        abort(e)
    save_graph(instance.graph, out)
    if hidden is not None:
        hidden.write_text(json.dumps(instance.hidden, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    emit_json({"family": family.value, "n": instance.graph.n, "m": instance.graph.m, "output": str(out)})


@gen_app.command("path")
def gen_path(
    size: Annotated[int, typer.Option("--n", "-n", help="Number of vertices")],
    out: OutPath,
    weight: Annotated[float, typer.Option("--weight", "-w", help="Edge weight")] = 1.0,
) -> None:
    """Path through n vertices."""
    _write(Family.PATH, {"size": size, "weight": weight}, 0, out, None)


@gen_app.command("cycle")
def gen_cycle(
    size: Annotated[int, typer.Option("--n", "-n", help="Number of vertices")],
    out: OutPath,
    weight: Annotated[float, typer.Option("--weight", "-w", help="Edge weight")] = 1.0,
) -> None:
    """Cycle on n vertices."""
    _write(Family.CYCLE, {"size": size, "weight": weight}, 0, out, None)


@gen_app.command("clique")
def gen_clique(
    size: Annotated[int, typer.Option("--n", "-n", help="Number of vertices")],
    out: OutPath,
    weight: Annotated[float, typer.Option("--weight", "-w", help="Edge weight")] = 1.0,
) -> None:
    """Complete graph on n vertices."""
    _write(Family.CLIQUE, {"size": size, "weight": weight}, 0, out, None)


@gen_app.command("union")
def gen_union(
    parts: Annotated[
        list[str],
        typer.Option("--part", "-p", help="FAMILY:SIZE, repeatable (e.g. clique:3)"),
    ],
    out: OutPath,
) -> None:
    """Disjoint union of classic graphs, ids shifted in the given order."""
    specs = []
    for part in parts:
        family, _, size = part.partition(":")
        if not size.isdigit():
            abort(InvalidArgumentError(f"Invalid part '{part}', expected FAMILY:SIZE"))
        specs.append({"family": family, "size": int(size)})
    _write(Family.DISJOINT_UNION, {"parts": specs}, 0, out, None)


@gen_app.command("random")
def gen_random_graph(
    n: Annotated[int, typer.Option("--n", "-n", help="Number of vertices")],
    p: Annotated[float, typer.Option("--p", help="Edge probability")],
    out: OutPath,
    seed: SeedOption = None,
) -> None:
    """Unit-weight random graph G(n, p)."""
    _write(Family.RANDOM, {"n": n, "p": p}, seed, out, None)


@gen_app.command("noc")
def gen_noc_graph(
    n: Annotated[int, typer.Option("--n", "-n", help="Target vertex count (rounded down)")],
    k: Annotated[int, typer.Option("--k", "-k", help="Path length in vertices")],
    case: Annotated[int, typer.Option("--case", "-c", help="1: two long cycles, 2: many short ones")],
    out: OutPath,
    hidden: HiddenPath = None,
) -> None:
    """Noisy cycle-counting instance."""
    _write(Family.NOC, {"n": n, "k": k, "case": case}, 0, out, hidden)


@gen_app.command("ovme")
def gen_ovme_graph(
    n: Annotated[int, typer.Option("--n", "-n", help="Number of vertices")],
    k: Annotated[int, typer.Option("--k", "-k", help="Number of matchings")],
    t: Annotated[int, typer.Option("--t", "-t", help="Number of hidden classes")],
    case: Annotated[str, typer.Option("--case", "-c", help="yes: one expander, no: t expanders")],
    out: OutPath,
    seed: SeedOption = None,
    hidden: HiddenPath = None,
) -> None:
    """One-vs-many-expanders instance."""
    _write(Family.OVME, {"n": n, "k": k, "t": t, "case": case}, seed, out, hidden)


@gen_app.command("two-clique")
def gen_two_clique(
    s: Annotated[int, typer.Option("--s", "-s", help="Clique size")],
    cross: Annotated[int, typer.Option("--cross", help="Number of random cross edges")],
    out: OutPath,
    seed: SeedOption = None,
    hidden: HiddenPath = None,
) -> None:
    """Two cliques joined by random cross edges."""
    _write(Family.TWO_CLIQUE_GADGET, {"s": s, "cross": cross}, seed, out, hidden)


@gen_app.command("four-clique")
def gen_four_clique(
    big_n: Annotated[int, typer.Option("--N", help="Gadget scale; the graph has 16N vertices")],
    out: OutPath,
    seed: SeedOption = None,
    hidden: HiddenPath = None,
) -> None:
    """Four-clique gadget over random bits and a random queried pair."""
    _write(Family.FOUR_CLIQUE_GADGET, {"N": big_n}, seed, out, hidden)


@gen_app.command("index")
def gen_index(
    big_n: Annotated[int, typer.Option("--N", help="Gadget scale; the graph has 16N vertices")],
    out: OutPath,
    bits: Annotated[
        Optional[Path],
        typer.Option("--bits", help="JSON file with the N x N 0/1 matrix (random if omitted)"),
    ] = None,
    i: Annotated[int, typer.Option("--i", help="Row of the queried pair")] = 0,
    j: Annotated[int, typer.Option("--j", help="Column of the queried pair")] = 0,
    seed: SeedOption = None,
    hidden: HiddenPath = None,
) -> None:
    """Four-clique gadget for given bits and queried pair."""
    params: dict[str, Any] = {"N": big_n, "i": i, "j": j}
    if bits is not None:
        try:
            params["x"] = json.loads(bits.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
            abort(ParseError(f"cannot read bit matrix {bits}: {e}"))
    _write(Family.INDEX_GADGET, params, seed, out, hidden)

