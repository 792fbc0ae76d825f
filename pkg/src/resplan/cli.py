"""Command-line surface.

Exit codes: 0 success, 1 parse/validation failure, 2 no plan achieves the
mission goals within the horizon, 3 node budget exceeded. Diagnostics go to
stderr; results to stdout.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import click

from . import assess, domain, planner, prefs as prefs_mod, scenarios, service
from .assess import ComparisonRow, render_comparison
from .planner import BudgetExceededError, SearchConfig, UnsolvableError

EXIT_INVALID = 1
EXIT_UNSOLVABLE = 2
EXIT_BUDGET = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_scenario(ref: str) -> scenarios.Scenario:
    try:
        if ref in scenarios.BUNDLED_NAMES:
            return scenarios.bundled(ref)
        if Path(ref).exists():
            return scenarios.load(ref)
    except (scenarios.ScenarioFormatError, domain.WorldValidationError,
            prefs_mod.ConstraintError, assess.ModelError) as exc:
        _fail(EXIT_INVALID, str(exc))
    _fail(EXIT_INVALID,
          f"unknown scenario {ref!r} (bundled: "
          f"{', '.join(scenarios.BUNDLED_NAMES)}, or give a file path)")


def _read_constraints(path: Optional[str]) -> Optional[str]:
    if path is None:
        return None
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(EXIT_INVALID, f"cannot read constraints file: {exc}")


@click.group()
def main():
    """Surveillance planning with operator resilience constraints."""


@main.command("scenarios")
def list_scenarios():
    """List the bundled scenarios."""
    svc = service.ScenarioService()
    for name in svc.names():
        s = svc.get(name)
        grid = s.world.grid
        click.echo(f"{name}: {s.title} ({grid.width}x{grid.height}, "
                   f"{len(s.world.uavs)} uav(s), horizon {s.world.horizon})")


@main.command()
@click.argument("scenario")
@click.option("--constraints", type=str, default=None,
              help="Constraint file applied on top of operator preferences.")
@click.option("--horizon", type=int, default=None,
              help="Override the scenario's planning horizon.")
@click.option("--out", type=str, default=None,
              help="Also write the plan text to this path.")
def plan(scenario: str, constraints: Optional[str], horizon: Optional[int],
         out: Optional[str]):
    """Plan a scenario and score the plan against the assessment model."""
    s = _load_scenario(scenario)
    text = _read_constraints(constraints)
    svc = service.ScenarioService()
    svc.add(s)
    try:
        if horizon is not None:
            constraint_set = svc.parse_constraints(s.name, text or "")
            objective = s.planning_preferences(constraint_set)
            p = planner.plan_with_preferences(
                s.world, objective, SearchConfig(horizon=horizon))
            report = planner.explain(p, objective, s.world)
            returns = assess.expected_return(p, s.assessment_model(),
                                             s.assessment_preferences)
        else:
            sub = svc.submit(s.name, text)
            p, report, returns = sub.plan, sub.report, sub.returns
    except prefs_mod.ConstraintError as exc:
        _fail(EXIT_INVALID, str(exc))
    except UnsolvableError as exc:
        _fail(EXIT_UNSOLVABLE, str(exc))
    except BudgetExceededError as exc:
        _fail(EXIT_BUDGET, str(exc))
    plan_text = planner.render_plan(p)
    click.echo(plan_text, nl=False)
    click.echo(report.render_text())
    click.echo(service.render_return_report(returns))
    if out:
        Path(out).write_text(plan_text, encoding="utf-8")


@main.command()
@click.argument("scenario", required=False)
@click.option("--constraints", type=str, default=None,
              help="Constraint file for the scenario.")
@click.option("--all", "all_bundled", is_flag=True,
              help="Compare every bundled scenario using its reference "
                   "constraints; appends a mean row.")
def compare(scenario: Optional[str], constraints: Optional[str],
            all_bundled: bool):
    """Baseline / optimal / constrained returns with improvement and
    optimality percentages."""
    svc = service.ScenarioService()
    try:
        if all_bundled:
            rows = [svc.reference_submission(name).comparison
                    for name in scenarios.BUNDLED_NAMES]
            click.echo(render_comparison(rows, mean_row=True), nl=False)
            return
        if not scenario:
            _fail(EXIT_INVALID, "give a scenario or --all")
        s = _load_scenario(scenario)
        svc.add(s)
        sub = svc.submit(s.name, _read_constraints(constraints))
        click.echo(render_comparison([sub.comparison]), nl=False)
    except prefs_mod.ConstraintError as exc:
        _fail(EXIT_INVALID, str(exc))
    except UnsolvableError as exc:
        _fail(EXIT_UNSOLVABLE, str(exc))
    except BudgetExceededError as exc:
        _fail(EXIT_BUDGET, str(exc))


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", type=str, default="127.0.0.1")
@click.option("--sessions-root", type=str, default=None,
              help="Session storage directory (default: $RESPLAN_SESSIONS "
                   "or ./sessions).")
def serve(port: int, host: str, sessions_root: Optional[str]):
    """Run the HTTP service for the operator console."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(session_root=sessions_root), host=host, port=port)


if __name__ == "__main__":
    main()
