"""Shared evaluation core behind the CLI and the HTTP service.

Both surfaces funnel through ScenarioService so that identical scenario +
constraint inputs produce identical plans, reports and numbers everywhere.
Baseline plans and optimal returns are deterministic per scenario and are
computed once and cached.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

from . import assess, domain, planner, prefs as prefs_mod, scenarios
from .assess import ComparisonRow, ReturnReport
from .planner import Plan, SatisfactionReport
from .prefs import PreferenceSet
from .scenarios import Scenario

FORMAT_VERSION = "v1"


@dataclass(frozen=True)
class Submission:
    """Everything one constraint submission produces."""

    scenario: str
    constraints_text: str
    plan: Plan
    report: SatisfactionReport
    returns: ReturnReport
    baseline_returns: ReturnReport
    optimal_value: float
    comparison: ComparisonRow


class ScenarioService:
    """Loads scenarios, evaluates constraint submissions, caches the
    deterministic per-scenario artifacts (baseline plan, optimal return)."""

    def __init__(self):
        self._scenarios: dict[str, Scenario] = {}
        self._baseline: dict[str, tuple[Plan, ReturnReport]] = {}
        self._optimal: dict[str, float] = {}
        self._lock = threading.Lock()

    # -- scenario registry ---------------------------------------------------

    def names(self) -> list[str]:
        self._ensure_bundled()
        return sorted(self._scenarios)

    def get(self, name: str) -> Scenario:
        self._ensure_bundled()
        if name not in self._scenarios:
            raise KeyError(name)
        return self._scenarios[name]

    def add(self, scenario: Scenario) -> None:
        with self._lock:
            self._scenarios[scenario.name] = scenario

    def _ensure_bundled(self) -> None:
        with self._lock:
            if not self._scenarios:
                for s in scenarios.bundled():
                    self._scenarios[s.name] = s

    # -- cached per-scenario artifacts ----------------------------------

    def baseline(self, name: str) -> tuple[Plan, ReturnReport]:
        s = self.get(name)
        with self._lock:
            if name not in self._baseline:
                plan = planner.plan_with_preferences(s.world,
                                                     s.operator_preferences)
                returns = assess.expected_return(plan, s.assessment_model(),
                                                 s.assessment_preferences)
                self._baseline[name] = (plan, returns)
            return self._baseline[name]

    def optimal_value(self, name: str) -> float:
        s = self.get(name)
        with self._lock:
            if name not in self._optimal:
                opt = assess.optimal_return(s.assessment_model(),
                                            s.assessment_preferences)
                self._optimal[name] = opt.plan_value
            return self._optimal[name]

    # -- submissions ---------------------------------------------------------

    def parse_constraints(self, name: str, text: str) -> PreferenceSet:
        return prefs_mod.parse(text, self.get(name).world)

    def submit(self, name: str, constraints_text: Optional[str]) -> Submission:
        """Plan under the scenario's operator preferences plus the submitted
        constraints, then score everything against the assessment model."""
        s = self.get(name)
        text = constraints_text or ""
        constraints = self.parse_constraints(name, text)
        objective = s.planning_preferences(constraints)
        plan = planner.plan_with_preferences(s.world, objective)
        report = planner.explain(plan, objective, s.world)
        returns = assess.expected_return(plan, s.assessment_model(),
                                         s.assessment_preferences)
        _, baseline_returns = self.baseline(name)
        optimal = self.optimal_value(name)
        comparison = ComparisonRow(
            scenario=name,
            base_return=baseline_returns.expected_return,
            optimal_return=optimal,
            constrained_return=returns.expected_return,
        )
        return Submission(
            scenario=name,
            constraints_text=text,
            plan=plan,
            report=report,
            returns=returns,
            baseline_returns=baseline_returns,
            optimal_value=optimal,
            comparison=comparison,
        )

    def reference_submission(self, name: str) -> Submission:
        s = self.get(name)
        return self.submit(name, prefs_mod.render(s.reference_constraints))


def render_return_report(r: ReturnReport) -> str:
    lines = [f"expected return: {round(r.expected_return, 1):.1f} "
             f"({len(r.outcomes)} outcomes)"]
    lines.append(f"  goals {r.goal_component:g} + preferences "
                 f"{r.preference_component:g} + orderings "
                 f"{r.ordering_component:g} - actions "
                 f"{r.action_cost_component:g}")
    return "\n".join(lines)


# -- structured documents for the HTTP service and session files -------------

def plan_document(plan: Plan) -> dict:
    return {
        "provenance": plan.provenance,
        "score": plan.score,
        "flags": list(plan.flags),
        "actions": [
            {"t": k, "by": {u: domain.render_action(a)
                            for u, a in zip(plan.uav_ids, joint)}}
            for k, joint in enumerate(plan.actions)
        ],
        "trace": [
            {"t": s.t, "uav_at": {u: list(c)
                                  for u, c in zip(plan.uav_ids, s.uav_at)}}
            for s in plan.trace
        ],
        "text": planner.render_plan(plan),
        "goals_satisfied": sorted(plan.goals_satisfied),
    }


def report_document(report: SatisfactionReport) -> dict:
    return {
        "goals": [{"id": g, "satisfied": sat, "time": t}
                  for g, sat, t in report.goals],
        "preferences": [
            {"name": p.name, "satisfied": p.satisfied,
             "first_time": p.first_time, "weight": p.weight, "kind": p.kind}
            for p in report.preferences
        ],
        "orderings": [
            {"earlier": o.earlier, "later": o.later,
             "preserved": o.preserved, "weight": o.weight}
            for o in report.orderings
        ],
        "totals": {
            "goals": report.goal_total,
            "preferences": report.preference_total,
            "orderings": report.ordering_total,
            "action_cost": report.action_cost_total,
            "net": report.net_score,
        },
        "text": report.render_text(),
    }


def returns_document(r: ReturnReport) -> dict:
    return {
        "expected_return": r.expected_return,
        "outcome_count": len(r.outcomes),
        "probability_total": r.probability_total,
        "components": {
            "goals": r.goal_component,
            "preferences": r.preference_component,
            "orderings": r.ordering_component,
            "action_cost": r.action_cost_component,
        },
    }


def comparison_document(row: ComparisonRow) -> dict:
    return {
        "base_return": row.base_return,
        "optimal_return": row.optimal_return,
        "constrained_return": row.constrained_return,
        "improvement_pct": round(row.improvement_pct, 1),
        "optimality_pct": round(row.optimality_pct, 1),
        "cells": list(row.cells()),
    }


def submission_document(sub: Submission) -> dict:
    return {
        "format": FORMAT_VERSION,
        "scenario": sub.scenario,
        "constraints": sub.constraints_text,
        "plan": plan_document(sub.plan),
        "report": report_document(sub.report),
        "returns": returns_document(sub.returns),
        "baseline_returns": returns_document(sub.baseline_returns),
        "optimal_value": sub.optimal_value,
        "comparison": comparison_document(sub.comparison),
        "improvement": round(sub.comparison.improvement_pct, 1),
    }


def scenario_summary(s: Scenario) -> dict:
    return {
        "name": s.name,
        "title": s.title,
        "grid": {"width": s.world.grid.width, "height": s.world.grid.height},
        "horizon": s.world.horizon,
        "uavs": len(s.world.uavs),
        "targets": len(s.world.targets),
        "assets": len(s.world.assets),
        "pallets": len(s.world.pallets),
        "goals": [g.id for g in s.world.mission_goals],
    }


def scenario_document(s: Scenario, baseline_plan: Plan,
                      baseline_returns: ReturnReport) -> dict:
    world = s.world
    hazard_cells = sorted({c for r in s.rules for c in (r.cells or ())})
    return {
        "format": FORMAT_VERSION,
        **scenario_summary(s),
        "world": {
            "uavs": [{"id": u.id, "start": list(u.start),
                      "can_carry": u.can_carry, "operational": u.operational}
                     for u in world.uavs],
            "targets": [{"id": t.id, "status": t.status,
                         "trajectory": [list(c) for c in t.trajectory]}
                        for t in world.targets],
            "assets": [{"id": a.id, "location": list(a.location),
                        "needs": a.needs_pallet} for a in world.assets],
            "pallets": [{"id": p.id, "location": list(p.location)}
                        for p in world.pallets],
        },
        "hazard_cells": [list(c) for c in hazard_cells],
        "intelligence_update": s.intelligence_update,
        "operator_preferences": prefs_mod.render(s.operator_preferences),
        "reference_constraints": prefs_mod.render(s.reference_constraints),
        "baseline_plan": plan_document(baseline_plan),
        "baseline_returns": returns_document(baseline_returns),
    }
