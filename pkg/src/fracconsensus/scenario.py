"""Scenario configuration, convergence classification, and orchestration.

A scenario file is UTF-8 JSON with exactly these keys:

    n       int, number of agents
    edges   list of [i, k, w]: 1-based ids, agent i weights agent k by w
    agents  list of {"id", "order", "delay"}, one per agent
    gain    positive number
    init    list of n numbers, the initial states
    solver  {"h": step, "horizon": seconds, "memory": "full" | int}
            ("memory" may be omitted and defaults to "full")

Unknown keys are rejected. Delays are snapped to the step grid on parse,
with a warning when snapping moves a delay by more than 1e-9 s.
"""

from __future__ import annotations

import enum
import json
import math
import os
import tempfile
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .fracsolve import AgentModel, SolverParams, Trajectory, simulate
from .graph import Digraph

DELAY_SNAP_WARN = 1e-9


class ScenarioFormatError(ValueError):
    """A scenario file is malformed; the message names the offending key."""


class BisectionBracketError(ValueError):
    """The bisection bracket endpoints do not straddle the stability edge."""


class ConvergenceVerdict(enum.Enum):
    CONVERGED = "Converged"
    NOT_CONVERGED = "NotConverged"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class Scenario:
    """A validated simulation setup: graph, agents, gain, initial state, solver."""

    graph: Digraph
    agents: tuple[AgentModel, ...]
    gain: float
    initial: tuple[float, ...]
    solver: SolverParams

    def __post_init__(self):
        agents = tuple(sorted(self.agents, key=lambda a: a.id))
        object.__setattr__(self, "agents", agents)
        n = self.graph.n
        if [a.id for a in agents] != list(range(1, n + 1)):
            raise ValueError(f"agent ids must be exactly 1..{n}, each once")
        if not (math.isfinite(self.gain) and self.gain > 0.0):
            raise ValueError(f"gain must be positive, got {self.gain}")
        initial = tuple(float(v) for v in self.initial)
        if len(initial) != n:
            raise ValueError(f"need {n} initial states, got {len(initial)}")
        if not all(math.isfinite(v) for v in initial):
            raise ValueError("initial states must be finite")
        object.__setattr__(self, "initial", initial)


@dataclass(frozen=True, eq=False)
class Classification:
    """Convergence verdict for a trajectory.

    ``final_spread`` is ``max_i x_i(T) - min_i x_i(T)``. A run is Converged
    when the spread stays below ``converged_tol`` over the final fifth of
    the horizon and its envelope does not grow there (the later half's peak
    exceeds the earlier half's by at most ``monotone_slack``). Diverged
    means a non-finite state, an early solver abort, or a final spread more
    than ten times the initial one.
    """

    verdict: ConvergenceVerdict
    final_spread: float
    consensus_value: float | None
    spread_times: np.ndarray
    spread_values: np.ndarray


def snap_delay(delay: float, step: float) -> float:
    """Nearest grid multiple of ``step``; the value the solver actually uses."""
    return round(delay / step) * step


def _require(mapping, key, context):
    if key not in mapping:
        raise ScenarioFormatError(f"missing key '{key}' in {context}")
    return mapping[key]


def _as_number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"key '{key}' must be a number, got {value!r}")
    return float(value)


def _as_int(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioFormatError(f"key '{key}' must be an integer, got {value!r}")
    return value


def _check_keys(mapping, allowed, context):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ScenarioFormatError(f"unknown key '{unknown[0]}' in {context}")


def parse_scenario(path) -> Scenario:
    """Read, validate, and normalize a scenario file."""
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioFormatError("scenario file must hold a JSON object")
    _check_keys(raw, {"n", "edges", "agents", "gain", "init", "solver"}, "scenario")

    n = _as_int(_require(raw, "n", "scenario"), "n")
    if n < 1:
        raise ScenarioFormatError(f"key 'n' must be >= 1, got {n}")

    edges_raw = _require(raw, "edges", "scenario")
    if not isinstance(edges_raw, list):
        raise ScenarioFormatError("key 'edges' must be a list of [i, k, w] triples")
    edges = []
    for idx, entry in enumerate(edges_raw):
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ScenarioFormatError(f"key 'edges[{idx}]' must be a [i, k, w] triple")
        i = _as_int(entry[0], f"edges[{idx}][0]")
        k = _as_int(entry[1], f"edges[{idx}][1]")
        weight = _as_number(entry[2], f"edges[{idx}][2]")
        edges.append((i, k, weight))
    try:
        graph = Digraph.from_edges(n, edges)
    except ValueError as exc:
        raise ScenarioFormatError(f"key 'edges' is invalid: {exc}") from exc

    solver_raw = _require(raw, "solver", "scenario")
    if not isinstance(solver_raw, dict):
        raise ScenarioFormatError("key 'solver' must be an object")
    _check_keys(solver_raw, {"h", "horizon", "memory"}, "solver")
    step = _as_number(_require(solver_raw, "h", "solver"), "solver.h")
    horizon = _as_number(_require(solver_raw, "horizon", "solver"), "solver.horizon")
    memory = solver_raw.get("memory", "full")
    if memory != "full":
        memory = _as_int(memory, "solver.memory")
    try:
        solver = SolverParams(step=step, horizon=horizon, memory=memory)
    except ValueError as exc:
        raise ScenarioFormatError(f"key 'solver' is invalid: {exc}") from exc

    agents_raw = _require(raw, "agents", "scenario")
    if not isinstance(agents_raw, list):
        raise ScenarioFormatError("key 'agents' must be a list")
    agents = []
    for idx, entry in enumerate(agents_raw):
        context = f"agents[{idx}]"
        if not isinstance(entry, dict):
            raise ScenarioFormatError(f"key '{context}' must be an object")
        _check_keys(entry, {"id", "order", "delay"}, context)
        agent_id = _as_int(_require(entry, "id", context), f"{context}.id")
        order = _as_number(_require(entry, "order", context), f"{context}.order")
        delay = _as_number(_require(entry, "delay", context), f"{context}.delay")
        snapped = snap_delay(delay, solver.step)
        if abs(snapped - delay) > DELAY_SNAP_WARN:
            warnings.warn(
                f"agent {agent_id}: delay {delay!r} is off the step grid, using {snapped!r}",
                stacklevel=2,
            )
        try:
            agents.append(AgentModel(id=agent_id, order=order, delay=snapped))
        except ValueError as exc:
            raise ScenarioFormatError(f"key '{context}' is invalid: {exc}") from exc

    gain = _as_number(_require(raw, "gain", "scenario"), "gain")
    init_raw = _require(raw, "init", "scenario")
    if not isinstance(init_raw, list):
        raise ScenarioFormatError("key 'init' must be a list of numbers")
    initial = tuple(_as_number(v, f"init[{idx}]") for idx, v in enumerate(init_raw))
    if len(initial) != n:
        raise ScenarioFormatError(f"key 'init' must hold {n} values, got {len(initial)}")

    try:
        return Scenario(graph=graph, agents=tuple(agents), gain=gain, initial=initial, solver=solver)
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc


def scenario_to_dict(scenario: Scenario) -> dict:
    """JSON-ready mapping; ``parse_scenario`` of its dump reproduces the input."""
    w = scenario.graph.weights
    edges = [
        [i + 1, k + 1, float(w[i, k])]
        for i in range(scenario.graph.n)
        for k in range(scenario.graph.n)
        if w[i, k] != 0.0
    ]
    return {
        "n": scenario.graph.n,
        "edges": edges,
        "agents": [
            {"id": a.id, "order": a.order, "delay": a.delay} for a in scenario.agents
        ],
        "gain": scenario.gain,
        "init": list(scenario.initial),
        "solver": {
            "h": scenario.solver.step,
            "horizon": scenario.solver.horizon,
            "memory": scenario.solver.memory,
        },
    }


def atomic_write_text(path, text: str) -> None:
    """Whole-file write via a temp file and rename in the target directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_scenario(scenario: Scenario, path) -> None:
    """Serialize a scenario to JSON on disk (atomic)."""
    atomic_write_text(path, json.dumps(scenario_to_dict(scenario), indent=2) + "\n")


def classify(
    traj: Trajectory,
    converged_tol: float = 1e-2,
    monotone_slack: float = 1e-3,
) -> Classification:
    """Judge a trajectory Converged, NotConverged, or Diverged.

    The spread ``max_i x_i - min_i x_i`` is evaluated at every stored step.
    Convergence requires the spread to stay below ``converged_tol``
    throughout the final fifth of the horizon with a non-growing envelope
    there; comparing window peaks rather than consecutive samples keeps the
    test robust to the sign-change dips of an oscillatory approach.
    """
    states = traj.states
    spreads = states.max(axis=0) - states.min(axis=0)
    final_spread = float(spreads[-1])
    initial_spread = float(spreads[0])

    diverged = traj.diverged_at is not None or not np.all(np.isfinite(states))
    if not diverged and initial_spread > 0.0 and final_spread > 10.0 * initial_spread:
        diverged = True

    tail = spreads[int(0.8 * (spreads.size - 1)):]
    if tail.size < 2:
        tail = spreads[-2:] if spreads.size >= 2 else spreads
    half = tail.size // 2
    peak_early = float(tail[:half].max()) if half else float(tail.max())
    peak_late = float(tail[half:].max())

    if diverged:
        verdict = ConvergenceVerdict.DIVERGED
    elif tail.max() < converged_tol and peak_late <= peak_early + monotone_slack:
        verdict = ConvergenceVerdict.CONVERGED
    else:
        verdict = ConvergenceVerdict.NOT_CONVERGED

    consensus = float(states[:, -1].mean()) if verdict is ConvergenceVerdict.CONVERGED else None
    return Classification(
        verdict=verdict,
        final_spread=final_spread,
        consensus_value=consensus,
        spread_times=traj.times,
        spread_values=spreads,
    )


def run_scenario(
    scenario: Scenario,
    converged_tol: float = 1e-2,
    monotone_slack: float = 1e-3,
) -> tuple[Trajectory, Classification]:
    """Simulate and classify; a converged trajectory gets its consensus value."""
    traj = simulate(scenario)
    result = classify(traj, converged_tol, monotone_slack)
    if result.verdict is ConvergenceVerdict.CONVERGED:
        traj = replace(traj, consensus_value=result.consensus_value)
    return traj, result


def with_uniform_delay(scenario: Scenario, delay: float) -> Scenario:
    """Copy of the scenario with every agent's delay replaced by ``delay``."""
    agents = tuple(replace(a, delay=snap_delay(delay, scenario.solver.step)) for a in scenario.agents)
    return replace(scenario, agents=agents)


def bisect_critical_delay(
    template: Scenario,
    tau_lo: float,
    tau_hi: float,
    tol: float,
    converged_tol: float = 1e-2,
    monotone_slack: float = 1e-3,
) -> float:
    """Bisect the largest uniform delay still classified Converged.

    ``template`` supplies graph, agents, gain, initial states, and solver
    settings; its delays are overridden by the bisection variable. The
    bracket must satisfy Converged at ``tau_lo`` and not Converged at
    ``tau_hi``. Returns the midpoint of the final bracket, deterministic
    for fixed solver parameters.
    """
    if not 0.0 <= tau_lo < tau_hi:
        raise ValueError(f"need 0 <= tau_lo < tau_hi, got ({tau_lo}, {tau_hi})")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")

    def verdict_at(tau):
        traj = simulate(with_uniform_delay(template, tau))
        return classify(traj, converged_tol, monotone_slack).verdict

    lo_verdict = verdict_at(tau_lo)
    hi_verdict = verdict_at(tau_hi)
    if lo_verdict is not ConvergenceVerdict.CONVERGED or hi_verdict is ConvergenceVerdict.CONVERGED:
        raise BisectionBracketError(
            f"bracket does not straddle the stability edge: "
            f"tau={tau_lo} -> {lo_verdict.value}, tau={tau_hi} -> {hi_verdict.value}"
        )

    lo, hi = tau_lo, tau_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if verdict_at(mid) is ConvergenceVerdict.CONVERGED:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def write_trajectory_csv(traj: Trajectory, stream, stride: int = 10) -> None:
    """Write ``t,x1,...,xn`` rows at every ``stride``-th step."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    n = traj.states.shape[0]
    stream.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
    for k in range(0, traj.times.size, stride):
        row = [f"{traj.times[k]:.10g}"] + [f"{traj.states[i, k]:.10g}" for i in range(n)]
        stream.write(",".join(row) + "\n")


def write_curve_csv(pairs, stream) -> None:
    """Write ``gamma,tau_bound`` rows for a gain sweep."""
    stream.write("gamma,tau_bound\n")
    for gamma, tau in pairs:
        stream.write(f"{gamma:.10g},{tau:.10g}\n")
