"""Command-line entry point: ``submax run|solve|solvers|verify|gen|scale``."""

import json
import logging
import sys
from pathlib import Path

import click
from dotenv import load_dotenv

from submax.core.config import get_settings
from submax.core.oracle import OracleContractError, Subset
from submax.services.bench import BenchConfigError, emit, load_config, run, scaling_experiment
from submax.services.exact import ExactSolverError, brute_force_opt
from submax.services.instances import (
    InstanceParseError,
    InstanceValidationError,
    build_oracle,
    check_submodular,
    random_instance,
    read_instance,
    serialize,
    write_instance,
)
from submax.services.recursive import (
    AlgConfig,
    alg,
    check_query_recursion,
    node_optima,
    verify_trace,
)
from submax.solvers import SolverRegistry, register_default_solvers

logger = logging.getLogger(__name__)

load_dotenv()

EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2


def _fail(message: str, code: int = EXIT_CONFIG_ERROR) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path: str):
    try:
        return read_instance(path)
    except InstanceParseError as exc:
        where = (
            f" (line {exc.line}, column {exc.column})"
            if exc.line is not None
            else f" (at {exc.location})" if exc.location else ""
        )
        _fail(f"{path}{where}: {exc}")
    except (OSError, InstanceValidationError) as exc:
        _fail(f"{path}: {exc}")


def _parse_params(items: tuple[str, ...]) -> dict[str, float]:
    params = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise click.BadParameter(f"expected key=value, got {item!r}", param_hint="--param")
        try:
            params[key] = float(value)
        except ValueError as exc:
            raise click.BadParameter(f"{key} must be numeric", param_hint="--param") from exc
    return params


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose: bool) -> None:
    """Approximate unconstrained submodular maximization."""
    settings = get_settings()
    level = "DEBUG" if verbose or settings.debug else settings.log_level
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    register_default_solvers()


@cli.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Bench config JSON.")
@click.option("--format", "fmt", type=click.Choice(["csv", "markdown", "json"]), default=None,
              help="Override the config's output format.")
@click.option("--timing", is_flag=True, help="Append the wall_time_s column.")
@click.option("-o", "--out", type=click.Path(dir_okay=False), help="Write the report here instead of stdout.")
def run_command(config_path: str, fmt: str | None, timing: bool, out: str | None) -> None:
    """Run a bench suite and print its report."""
    try:
        cfg, base_dir = load_config(config_path)
        report = run(cfg, base_dir)
    except BenchConfigError as exc:
        _fail(str(exc))

    text = emit(report, fmt or cfg.format, timing=timing, include_traces=cfg.include_traces)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)

    for row in report.errors:
        logger.warning("cell %s/%s/eps=%g failed: %s", row.instance, row.algorithm, row.epsilon, row.error)
    if report.verification_failed or report.errors:
        sys.exit(EXIT_VERIFICATION_FAILED)


@cli.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(dir_okay=False))
@click.option("--algo", default="alg", type=click.Choice(["alg", "ls", "dg-det", "dg-rand", "brute"]))
@click.option("--depth", type=int, default=None, help="Recursion depth of alg (default from settings).")
@click.option("--epsilon", type=float, default=None)
@click.option("--trials", type=int, default=1, help="Seeded trials for dg-rand.")
@click.option("--seed", type=int, default=0)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), help="Export the recursion trace as JSON.")
def solve(instance_path, algo, depth, epsilon, trials, seed, trace_path) -> None:
    """Solve one instance and print the result as JSON."""
    settings = get_settings()
    inst = _load(instance_path)
    epsilon = settings.default_epsilon if epsilon is None else epsilon
    if epsilon <= 0:
        _fail("epsilon must be positive")
    name = f"alg@{settings.default_nrounds if depth is None else depth}" if algo == "alg" else algo
    solver = SolverRegistry.get(name)
    if solver is None:
        _fail(f"unknown algorithm {name}")
    oracle = build_oracle(inst)
    try:
        result = solver.solve(oracle, epsilon, trials=trials, base_seed=seed)
    except (ExactSolverError, OracleContractError, ValueError) as exc:
        _fail(str(exc))
    if inst.labels is not None:
        ground = oracle.ground_set()
        result.labels = ground.label(Subset.from_indices(result.subset, ground.m))

    if trace_path:
        if result.trace is None:
            _fail(f"{name} produces no trace")
        Path(trace_path).write_text(result.trace.model_dump_json(indent=2) + "\n", encoding="utf-8")
    click.echo(result.model_dump_json(exclude={"trace"}, exclude_none=True))


@cli.command("solvers")
def solvers_command() -> None:
    """List the registered algorithms; ``alg@<depth>`` also accepts any other depth."""
    for solver in sorted(SolverRegistry.all(), key=lambda s: s.name):
        depth = "-" if solver.depth is None else str(solver.depth)
        doc = type(solver).__doc__
        summary = doc.strip().splitlines()[0] if doc else ""
        click.echo(f"{solver.name:<8} {depth:>5}  {summary}".rstrip())


@cli.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(dir_okay=False))
@click.option("--epsilon", type=float, default=None)
@click.option("--depth", type=int, default=2)
def verify(instance_path: str, epsilon: float | None, depth: int) -> None:
    """Check submodularity, brute-force the optimum and verify the trace of alg."""
    settings = get_settings()
    inst = _load(instance_path)
    epsilon = settings.default_epsilon if epsilon is None else epsilon
    if inst.m > settings.verify_max_m:
        _fail(f"verification is limited to m <= {settings.verify_max_m}, got m = {inst.m}")

    verdict = check_submodular(build_oracle(inst))
    exact = brute_force_opt(build_oracle(inst))
    outcome = alg(build_oracle(inst), AlgConfig(epsilon=epsilon, nrounds=depth))
    report = verify_trace(outcome.trace, node_optima(build_oracle(inst), outcome.trace), epsilon)
    report.checks.extend(check_query_recursion(outcome.trace, epsilon))

    click.echo(f"submodular:   {'yes' if verdict.passed else 'no'} ({verdict.checked} checks)")
    if verdict.witness is not None:
        w = verdict.witness
        click.echo(f"  witness S={w.s} j={w.j} k={w.k}: {w.lhs:.6g} < {w.rhs:.6g}")
    if verdict.negative_set is not None:
        click.echo(f"  negative value {verdict.negative_value:.6g} at {verdict.negative_set}")
    click.echo(f"optimum:      {exact.opt_value:.6g} at {exact.opt_set}")
    click.echo(f"alg@{depth}:        {outcome.value:.6g} at {outcome.subset}")
    click.echo(f"trace checks: {len(report.checks)} run, {len(report.failures)} failed")
    for check in report.failures:
        click.echo(f"  FAIL {check.node_id} {check.name}: {check.lhs} < {check.rhs} {check.detail}".rstrip())

    if not verdict.passed or not report.passed:
        sys.exit(EXIT_VERIFICATION_FAILED)


@cli.command()
@click.option("--kind", required=True, type=click.Choice(["random-cut", "random-coverage"]))
@click.option("--m", "m", required=True, type=int)
@click.option("--seed", type=int, default=0)
@click.option("--param", "params", multiple=True, help="Generator parameter key=value (p, weight_low, ...).")
@click.option("--out", type=click.Path(dir_okay=False), help="Output file (default: stdout).")
def gen(kind: str, m: int, seed: int, params: tuple[str, ...], out: str | None) -> None:
    """Generate a seeded random instance."""
    try:
        inst = random_instance(kind, m, seed, _parse_params(params))
    except InstanceValidationError as exc:
        _fail(str(exc))
    if out:
        write_instance(inst, out)
        logger.info("Wrote %s m=%d seed=%d to %s", kind, m, seed, out)
    else:
        click.echo(serialize(inst))


@cli.command()
@click.option("--family", required=True, type=click.Choice(["random-cut", "random-coverage", "zero"]))
@click.option("--sizes", required=True, help="Comma-separated ascending sizes, e.g. 8,16,32,64.")
@click.option("--epsilon", type=float, default=None)
@click.option("--depth", type=int, default=None)
@click.option("--seed", type=int, default=0)
def scale(family: str, sizes: str, epsilon: float | None, depth: int | None, seed: int) -> None:
    """Fit the query-count exponent of alg on a seeded family."""
    try:
        parsed = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError:
        _fail(f"sizes must be integers, got {sizes!r}")
    epsilon = get_settings().default_epsilon if epsilon is None else epsilon
    try:
        fit = scaling_experiment(family, parsed, epsilon, nrounds=depth, seed=seed)
    except BenchConfigError as exc:
        _fail(str(exc))
    click.echo(json.dumps(fit.model_dump(), indent=2))


if __name__ == "__main__":
    cli()
