"""A-posteriori solution quality: V(x) over a scenario set, mitigation
statistics, and cost breakdowns.

V(x) = f(x) + mean of g(x, w) over the evaluation scenarios. Wind spill
percentages use available wind as denominator; shed percentages use
total electric / gas load. The gas cost column is net of the GFPP fuel
credit, so the three cost components sum to each scenario's
contribution to V.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .builders import first_stage_cost
from .network import Instance
from .scenarios import ScenarioSet
from .slp import SlpConfig
from .subproblem import SubproblemSolver

__all__ = ["ScenarioOutcome", "EvaluationReport", "evaluate", "compare",
           "comparison_table"]


@dataclass
class ScenarioOutcome:
    index: int
    objective: float
    elec_cost: float            # h_elec
    gas_cost: float             # h_gas - fuel credit
    spill_pct: float
    elec_shed_pct: float
    gas_shed_pct: float
    converged: bool


def _stats(values: list[float]) -> dict:
    if not values:
        return {"mean": float("nan"), "max": float("nan"), "min": float("nan")}
    return {"mean": float(np.mean(values)), "max": float(np.max(values)),
            "min": float(np.min(values))}


@dataclass
class EvaluationReport:
    label: str
    currency: str
    first_stage_cost: float
    mean_recourse: float
    v: float
    outcomes: list[ScenarioOutcome]
    flagged: list[int] = field(default_factory=list)

    @property
    def spill(self) -> dict:
        return _stats([o.spill_pct for o in self.outcomes if o.converged])

    @property
    def elec_shed(self) -> dict:
        return _stats([o.elec_shed_pct for o in self.outcomes if o.converged])

    @property
    def gas_shed(self) -> dict:
        return _stats([o.gas_shed_pct for o in self.outcomes if o.converged])

    @property
    def elec_cost(self) -> dict:
        return _stats([o.elec_cost for o in self.outcomes if o.converged])

    @property
    def gas_cost(self) -> dict:
        return _stats([o.gas_cost for o in self.outcomes if o.converged])

    def rows(self) -> list[dict]:
        return [{"scenario": o.index, "objective": o.objective,
                 "elec_cost": o.elec_cost, "gas_cost": o.gas_cost,
                 "spill_pct": o.spill_pct, "elec_shed_pct": o.elec_shed_pct,
                 "gas_shed_pct": o.gas_shed_pct, "converged": o.converged}
                for o in self.outcomes]

    def to_text(self) -> str:
        lines = [f"evaluation: {self.label} ({len(self.outcomes)} scenarios, "
                 f"{self.currency})",
                 f"  V(x)              {self.v:15.2f}",
                 f"  1st stage elec.   {self.first_stage_cost:15.2f}",
                 f"  mean recourse     {self.mean_recourse:15.2f}"]
        for name, st in (("wind spill %", self.spill),
                         ("elec shed %", self.elec_shed),
                         ("gas shed %", self.gas_shed),
                         ("2nd stage elec.", self.elec_cost),
                         ("2nd stage gas", self.gas_cost)):
            lines.append(f"  {name:<17} mean {st['mean']:12.4f}  "
                         f"max {st['max']:12.4f}  min {st['min']:12.4f}")
        if self.flagged:
            lines.append(f"  non-converged scenarios excluded from means: "
                         f"{self.flagged}")
        return "\n".join(lines)


def _pct(num: float, den: float) -> float:
    return 100.0 * num / den if den > 1e-12 else 0.0


def evaluate(x: np.ndarray, instance: Instance, scenarios: ScenarioSet,
             which: str = "test", slp: SlpConfig | None = None,
             backend: str = "highs", workers: int = 1,
             label: str | None = None) -> EvaluationReport:
    """Fix the dispatch and solve every scenario in the chosen set
    ('train', 'test', or an explicit index list), reducing in scenario
    order regardless of the degree of parallelism."""
    if isinstance(which, str):
        idx = scenarios.train if which == "train" else scenarios.test
        label = label or ("training" if which == "train" else "testing")
    else:
        idx = np.asarray(which, dtype=int)
        label = label or f"{len(idx)} scenarios"
    idx = [int(k) for k in idx]
    elec_load = float(instance.electric.load.sum()) * 1.0
    gas_load = float(instance.gas.load.sum()) if instance.gas is not None else 0.0

    def outcome(k: int, solver: SubproblemSolver, warm: str) -> ScenarioOutcome:
        wind = scenarios.farm_output(instance.electric, scenarios.profile(k))
        sub = solver.solve(x, wind, warm=warm)
        rec = sub.recourse
        gshed = float(rec.d_shed.sum()) if rec.d_shed is not None else 0.0
        return ScenarioOutcome(
            index=k, objective=sub.objective, elec_cost=rec.h_elec,
            gas_cost=rec.h_gas - rec.gas_credit,
            spill_pct=_pct(float(rec.w_spill.sum()), float(wind.sum())),
            elec_shed_pct=_pct(float(rec.l_shed.sum()), elec_load),
            gas_shed_pct=_pct(gshed, gas_load),
            converged=sub.converged)

    if workers <= 1:
        solver = SubproblemSolver(instance, slp, backend)
        outcomes = [outcome(k, solver, "chain") for k in idx]
    else:
        from concurrent.futures import ThreadPoolExecutor
        local = threading.local()

        def job(k: int) -> ScenarioOutcome:
            if not hasattr(local, "solver"):
                local.solver = SubproblemSolver(instance, slp, backend)
            return outcome(k, local.solver, "steady")

        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, idx))

    flagged = [o.index for o in outcomes if not o.converged]
    good = [o.objective for o in outcomes if o.converged]
    mean_g = float(np.mean(good)) if good else float("nan")
    f_x = first_stage_cost(instance, x)
    return EvaluationReport(label=label, currency=instance.currency,
                            first_stage_cost=f_x, mean_recourse=mean_g,
                            v=f_x + mean_g, outcomes=outcomes, flagged=flagged)


def compare(candidates: dict[str, np.ndarray], instance: Instance,
            scenarios: ScenarioSet, which: str = "test",
            slp: SlpConfig | None = None, backend: str = "highs",
            workers: int = 1) -> dict[str, EvaluationReport]:
    """Side-by-side evaluation of several dispatches on one scenario set."""
    return {name: evaluate(x, instance, scenarios, which, slp, backend,
                           workers, label=f"{name}/{which}")
            for name, x in candidates.items()}


def comparison_table(reports: dict[str, EvaluationReport]) -> str:
    names = list(reports)
    head = f"{'quantity':<22}" + "".join(f"{n:>16}" for n in names)
    lines = [head, "-" * len(head)]

    def row(label, getter):
        lines.append(f"{label:<22}" + "".join(
            f"{getter(reports[n]):>16.4f}" for n in names))

    row("V(x)", lambda r: r.v)
    row("1st stage elec.", lambda r: r.first_stage_cost)
    for part, attr in (("spill % ", "spill"), ("elec shed % ", "elec_shed"),
                      ("gas shed % ", "gas_shed"),
                      ("2nd elec. ", "elec_cost"), ("2nd gas ", "gas_cost")):
        for m in ("mean", "max", "min"):
            row(part + m, lambda r, a=attr, m=m: getattr(r, a)[m])
    return "\n".join(lines)
