"""hc CLI - hierarchical clustering of graph streams under Dasgupta's cost."""

from pathlib import Path
from typing import Annotated, Optional

import typer

from hcstream import __version__
from hcstream.config import Settings, get_settings
from hcstream.config_commands import config_app
from hcstream.errors import HCError, InvalidArgumentError, ParseError
from hcstream.experiment import load_experiment, run_experiment
from hcstream.gen_commands import gen_app
from hcstream.graph import (
    EXPANSION_CAP,
    approx_expansion,
    exact_expansion,
    iter_edge_file,
    load_graph,
    save_graph,
)
from hcstream.oracle import brute_force_opt
from hcstream.output import (
    abort,
    configure_logging,
    create_experiment_progress_callback,
    emit_json,
    emit_value,
    print_suite_table,
    print_warning,
)
from hcstream.pipeline import stream_hc
from hcstream.solver import CutFinder, solve
from hcstream.sparsifier import offline_sparsify, stream_sparsify
from hcstream.stream import ArrivalOrder, EdgeStream
from hcstream.suites import run_suites
from hcstream.tree import HCTree, cost_lca, parse_tree

app = typer.Typer(
    name="hc",
    help="Hierarchical clustering of graph streams under Dasgupta's cost",
    no_args_is_help=True,
)

# Register subcommands
app.add_typer(gen_app, name="gen")
app.add_typer(config_app, name="config")

GraphPath = Annotated[Path, typer.Argument(help="Graph file ('<n> <m>' header, then '<u> <v> <w>' lines)")]
TreeOut = Annotated[
    Optional[Path],
    typer.Option("--tree-out", "-o", help="Also write the tree in text form to this file"),
]


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(f"hc {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Show debug logging on stderr")] = False,
    version: Annotated[
        Optional[bool],
        typer.Option("--version", callback=_version_callback, is_eager=True, help="Show the version and exit"),
    ] = None,
) -> None:
    """Hierarchical clustering of graph streams under Dasgupta's cost."""
    configure_logging(verbose)


def _settings() -> Settings:
    try:
        return get_settings()
    except HCError as e:
        abort(e)


def _read_tree(path: Path) -> HCTree:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read tree file {path}: {e}") from e
    return parse_tree(text)


def _write_tree(tree: HCTree, path: Optional[Path]) -> None:
    if path is not None:
        path.write_text(str(tree) + "\n", encoding="utf-8")


def _finder(name: Optional[str], seed: int, settings: Settings) -> CutFinder:
    return CutFinder.named(name or settings.finder, seed=seed, exact_cap=settings.exact_cap)


def _parse_side(side: Optional[str], n: int) -> list[int]:
    """Vertex ids of one side for the adversarial order; the first half by default."""
    if side is None:
        return list(range(n // 2))
    try:
        return [int(x) for x in side.split(",") if x.strip()]
    except ValueError as e:
        raise InvalidArgumentError(f"--side must be comma-separated vertex ids, got {side!r}") from e


def _open_stream(graph: Path, order: ArrivalOrder, seed: int, side: Optional[str]) -> EdgeStream:
    (n, _), _ = iter_edge_file(graph)
    bipartition = _parse_side(side, n) if order is ArrivalOrder.ADVERSARIAL else None
    return EdgeStream.from_file(graph, order=order, seed=seed, bipartition=bipartition)


# =============================================================================
# Cost and exact optimum
# =============================================================================


@app.command()
def cost(
    graph: GraphPath,
    tree: Annotated[Path, typer.Argument(help="Tree file, e.g. ((0,1),(2,3))")],
) -> None:
    """Print the Dasgupta cost of a tree on a graph."""
    try:
        g = load_graph(graph)
        t = _read_tree(tree)
        value = cost_lca(g, t)
    except HCError as e:
        abort(e)
    emit_value(value)


@app.command()
def opt(
    graph: GraphPath,
    cap: Annotated[
        Optional[int],
        typer.Option("--cap", help="Largest n the subset DP accepts (default: configured oracle_cap)"),
    ] = None,
) -> None:
    """Exact optimum with one optimal tree and every optimal root split."""
    settings = _settings()
    try:
        g = load_graph(graph)
        result = brute_force_opt(g, cap if cap is not None else settings.oracle_cap)
    except HCError as e:
        abort(e)
    emit_json(result.to_dict())


# =============================================================================
# Solvers
# =============================================================================


@app.command("solve")
def solve_cmd(
    graph: GraphPath,
    beta: Annotated[Optional[float], typer.Option("--beta", "-b", help="Balance parameter in (0, 1/2]")] = None,
    finder: Annotated[
        Optional[str],
        typer.Option("--finder", "-f", help="Cut finder: exact, spectral or random"),
    ] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Random seed")] = None,
    tree_out: TreeOut = None,
    timing: Annotated[bool, typer.Option("--timing", help="Include wall time in the report")] = False,
) -> None:
    """Cluster a graph offline by recursive balanced cuts."""
    settings = _settings()
    chosen_seed = settings.seed if seed is None else seed
    try:
        g = load_graph(graph)
        report = solve(g, settings.beta if beta is None else beta, _finder(finder, chosen_seed, settings))
    except HCError as e:
        abort(e)
    _write_tree(report.tree, tree_out)
    emit_json(report.to_dict(include_timing=timing))


@app.command()
def sparsify(
    graph: GraphPath,
    out: Annotated[Path, typer.Argument(help="Sparsifier graph file to write", dir_okay=False)],
    eps: Annotated[Optional[float], typer.Option("--eps", "-e", help="Cut error tolerance")] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Random seed")] = None,
    budget_c: Annotated[Optional[float], typer.Option("--budget-c", help="Sampling constant C")] = None,
    target: Annotated[
        Optional[int],
        typer.Option("--target", help="Edge count that triggers sampling (overrides the C budget)"),
    ] = None,
    stream: Annotated[
        bool,
        typer.Option("--stream", help="Read the file once as an edge stream with merge-and-reduce"),
    ] = False,
    order: Annotated[ArrivalOrder, typer.Option("--order", help="Edge arrival order for --stream")] = ArrivalOrder.NATURAL,
    side: Annotated[
        Optional[str],
        typer.Option("--side", help="Comma-separated side for the adversarial order"),
    ] = None,
) -> None:
    """Write a (1±ε) cut sparsifier of a graph."""
    settings = _settings()
    epsilon = settings.epsilon if eps is None else eps
    chosen_seed = settings.seed if seed is None else seed
    constant = settings.budget_c if budget_c is None else budget_c
    try:
        if stream:
            edges = _open_stream(graph, order, chosen_seed, side)
            h, state = stream_sparsify(edges, edges.n, epsilon, chosen_seed, budget_c=constant, target=target)
            summary = state.to_dict()
            summary["passes"] = state.meter.passes
        else:
            g = load_graph(graph)
            h = offline_sparsify(g, epsilon, chosen_seed, budget_c=constant, target=target)
            summary = {"epsilon": epsilon, "edges_in": g.m}
    except HCError as e:
        abort(e)
    save_graph(h, out)
    summary.update(n=h.n, m=h.m, output=str(out))
    emit_json(summary)


@app.command("stream-solve")
def stream_solve(
    graph: GraphPath,
    eps: Annotated[Optional[float], typer.Option("--eps", "-e", help="Cut error tolerance")] = None,
    beta: Annotated[Optional[float], typer.Option("--beta", "-b", help="Balance parameter in (0, 1/2]")] = None,
    finder: Annotated[
        Optional[str],
        typer.Option("--finder", "-f", help="Cut finder: exact, spectral or random"),
    ] = None,
    order: Annotated[ArrivalOrder, typer.Option("--order", help="Edge arrival order")] = ArrivalOrder.NATURAL,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Random seed")] = None,
    budget_c: Annotated[Optional[float], typer.Option("--budget-c", help="Sampling constant C")] = None,
    target: Annotated[
        Optional[int],
        typer.Option("--target", help="Edge count that triggers sampling (overrides the C budget)"),
    ] = None,
    side: Annotated[
        Optional[str],
        typer.Option("--side", help="Comma-separated side for the adversarial order"),
    ] = None,
    with_graph: Annotated[
        bool,
        typer.Option("--with-graph", help="Also load the full graph and report the tree's cost on it"),
    ] = False,
    tree_out: TreeOut = None,
    timing: Annotated[bool, typer.Option("--timing", help="Include wall time in the report")] = False,
) -> None:
    """Cluster a graph read once as an edge stream."""
    settings = _settings()
    chosen_seed = settings.seed if seed is None else seed
    try:
        edges = _open_stream(graph, order, chosen_seed, side)
        reference = load_graph(graph) if with_graph else None
        report = stream_hc(
            edges,
            edges.n,
            settings.epsilon if eps is None else eps,
            settings.beta if beta is None else beta,
            _finder(finder, chosen_seed, settings),
            seed=chosen_seed,
            budget_c=settings.budget_c if budget_c is None else budget_c,
            target=target,
            reference=reference,
        )
    except HCError as e:
        abort(e)
    _write_tree(report.tree, tree_out)
    emit_json(report.to_dict(include_timing=timing))


@app.command()
def expansion(
    graph: GraphPath,
    exact: Annotated[
        Optional[bool],
        typer.Option("--exact/--approx", help=f"Exhaustive search (default when n <= {EXPANSION_CAP})"),
    ] = None,
    rounds: Annotated[int, typer.Option("--rounds", help="Random balanced cuts tried by --approx")] = 32,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Random seed")] = None,
) -> None:
    """Edge expansion of a graph with a witness cut."""
    settings = _settings()
    try:
        g = load_graph(graph)
        use_exact = g.n <= EXPANSION_CAP if exact is None else exact
        if use_exact:
            estimate = exact_expansion(g)
        else:
            estimate = approx_expansion(g, sweep_rounds=rounds, seed=settings.seed if seed is None else seed)
    except HCError as e:
        abort(e)
    emit_json(estimate.to_dict())


# =============================================================================
# Verification and experiments
# =============================================================================


@app.command()
def verify(
    suite: Annotated[str, typer.Argument(help="Suite name, or 'all'")],
    quick: Annotated[bool, typer.Option("--quick", "-q", help="Run the reduced sizes")] = False,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Random seed")] = None,
    table: Annotated[bool, typer.Option("--table", help="Also print a summary table on stderr")] = False,
) -> None:
    """Run a property suite; exits 1 if any check fails beyond its allowance."""
    settings = _settings()
    try:
        results = run_suites(suite, quick=quick, seed=settings.seed if seed is None else seed)
    except HCError as e:
        abort(e)
    if table:
        print_suite_table(results)
    passed = all(result.passed for result in results)
    emit_json({"passed": passed, "suites": [result.to_dict() for result in results]})
    if not passed:
        raise typer.Exit(1)


@app.command()
def experiment(
    config: Annotated[Path, typer.Argument(help="Experiment TOML file")],
    workers: Annotated[int, typer.Option("--workers", "-w", help="Worker processes for rows")] = 1,
) -> None:
    """Run an experiment batch and write its CSV."""
    try:
        experiment_config = load_experiment(config)
    except HCError as e:
        abort(e)

    progress_callback = create_experiment_progress_callback(experiment_config.name)
    try:
        rows = run_experiment(experiment_config, workers=workers, on_row=progress_callback)
    except HCError as e:
        progress_callback.stop()
        abort(e)
    progress_callback.stop()

    failed = sum(1 for row in rows if row["status"] != "ok")
    if failed:
        print_warning(f"{failed} of {len(rows)} rows recorded an error status")
    emit_json(
        {
            "name": experiment_config.name,
            "output": str(experiment_config.output),
            "rows": len(rows),
            "failed": failed,
        }
    )


if __name__ == "__main__":
    app()
