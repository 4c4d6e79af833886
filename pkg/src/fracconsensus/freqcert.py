"""Frequency-domain stability evidence for the delayed consensus loop.

The open-loop frequency response of the closed loop is

    G(jw) = gain * diag(w**(-a_i) * exp(-j*(a_i*pi/2 + w*tau_i))) * L,

with ``a_i`` the agent order ``((jw)**a`` on the principal branch is
``w**a * exp(j*a*pi/2)``) and ``L`` the graph Laplacian. Three kinds of
evidence are computed:

* the critical-frequency criterion ``2*gain*d_i*(pi/(2*tau_i))**(-a_i) < 1``,
  which places the point ``-1+j0`` outside agent i's Gerschgorin disc at the
  frequency where the disc centre points along the negative real axis;
* the Gerschgorin disc margin over a whole frequency grid (diagnostic: the
  margin is negative as w -> 0 even for comfortably stable systems, the
  verdict therefore never keys on it);
* the eigenvalue loci of G(jw) with real-axis crossings, flagging crossings
  left of -1 as practical evidence of an encirclement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import MAX_DENSE_NODES, Digraph, degree_vector, laplacian

NEGLIGIBLE_LOCUS = 1e-9


class Verdict(enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class OmegaGrid:
    """Strictly increasing positive frequencies (rad/s)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("grid must be a nonempty 1-d array")
        if not np.all(v > 0.0):
            raise ValueError("grid frequencies must be positive")
        if not np.all(np.diff(v) > 0.0):
            raise ValueError("grid frequencies must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class DiscMargin:
    """Grid minimum of one agent's disc margin and where it occurs."""

    agent_id: int
    min_margin: float
    omega_at_min: float


@dataclass(frozen=True)
class CrossingEvent:
    """A locus crossing the real axis at ``value`` near frequency ``omega``."""

    omega: float
    value: float
    beyond_minus_one: bool


@dataclass(frozen=True, eq=False)
class LociResult:
    """Branch-matched eigenvalue loci and their real-axis crossings."""

    omegas: np.ndarray
    loci: np.ndarray
    crossings: tuple[CrossingEvent, ...]


@dataclass(frozen=True, eq=False)
class CertificateResult:
    """Aggregate stability evidence; ``criterion_pass`` iff max value < 1."""

    criterion_values: np.ndarray
    criterion_pass: bool
    disc_margins: tuple[DiscMargin, ...]
    loci_crossings: tuple[CrossingEvent, ...]
    verdict: Verdict


def omega_grid(agents=(), low: float = 1e-3, high: float = 1e3, points: int = 2000) -> OmegaGrid:
    """Log-spaced grid plus each delayed agent's critical frequencies.

    For every agent with delay ``tau > 0`` the frequencies ``pi/(2*tau)``
    and ``(2 - order)*pi/(2*tau)`` are inserted exactly.
    """
    if not 0.0 < low < high:
        raise ValueError(f"need 0 < low < high, got ({low}, {high})")
    if points < 2:
        raise ValueError(f"need at least 2 points, got {points}")
    values = np.geomspace(low, high, points)
    extra = []
    for agent in agents:
        if agent.delay > 0.0:
            critical = math.pi / (2.0 * agent.delay)
            extra.extend([critical, (2.0 - agent.order) * critical])
    if extra:
        values = np.unique(np.concatenate([values, np.asarray(extra)]))
    return OmegaGrid(values=values)


def critical_frequency_criterion(g: Digraph, agents, gain: float) -> tuple[np.ndarray, bool]:
    """Disc test at each agent's critical frequency with test point -1.

    Returns per-agent values ``v_i = 2*gain*d_i*(pi/(2*tau_i))**(-order_i)``
    and the overall pass flag ``max(v) < 1``. Agents with zero delay have no
    critical frequency and contribute 0 (a system with no delays passes
    trivially).
    """
    degrees = degree_vector(g)
    values = np.zeros(g.n)
    for i, agent in enumerate(agents):
        if agent.delay > 0.0:
            critical = math.pi / (2.0 * agent.delay)
            values[i] = 2.0 * gain * degrees[i] * critical ** (-agent.order)
    return values, bool(values.max() < 1.0)


def disc_margin_values(omegas, degree: float, gain: float, order: float, delay: float) -> np.ndarray:
    """Disc margin 1 + 2*gain*degree*w**(-order)*cos(w*delay + order*pi/2).

    Positive margin means -1 lies outside the agent's Gerschgorin disc at
    that frequency.
    """
    w = np.asarray(omegas, dtype=float)
    return 1.0 + 2.0 * gain * degree * w ** (-order) * np.cos(w * delay + order * math.pi / 2.0)


def disc_margin(g: Digraph, agents, gain: float, grid: OmegaGrid) -> tuple[DiscMargin, ...]:
    """Grid minimum of every agent's disc margin.

    Diagnostic only: for any delayed agent the margin tends to
    ``1 - 2*gain*d_i*tau_i`` as w -> 0, which is commonly negative for
    systems the critical-frequency criterion certifies; verdicts are keyed
    on the criterion, not on this minimum.
    """
    degrees = degree_vector(g)
    results = []
    for i, agent in enumerate(agents):
        margins = disc_margin_values(grid.values, float(degrees[i]), gain, agent.order, agent.delay)
        idx = int(np.argmin(margins))
        results.append(
            DiscMargin(
                agent_id=agent.id,
                min_margin=float(margins[idx]),
                omega_at_min=float(grid.values[idx]),
            )
        )
    return tuple(results)


def _diagonal_scaling(omega: float, agents) -> np.ndarray:
    orders = np.array([a.order for a in agents])
    delays = np.array([a.delay for a in agents])
    return omega ** (-orders) * np.exp(-1j * (orders * math.pi / 2.0 + omega * delays))


def characteristic_value(omega: float, g: Digraph, agents, gain: float) -> complex:
    """Characteristic determinant det(diag((jw)**a_i) + gain*E(jw)*L) at s = jw.

    ``E(jw) = diag(exp(-j*w*tau_i))`` and ``(jw)**a`` uses the principal
    branch ``w**a * exp(j*a*pi/2)``. A nonzero modulus certifies that jw is
    not a characteristic root.
    """
    if not omega > 0.0:
        raise ValueError(f"omega must be positive, got {omega}")
    orders = np.array([a.order for a in agents])
    delays = np.array([a.delay for a in agents])
    diag = omega ** orders * np.exp(1j * orders * math.pi / 2.0)
    lag = np.exp(-1j * omega * delays)
    matrix = np.diag(diag) + gain * (lag[:, None] * laplacian(g).matrix)
    return complex(np.linalg.det(matrix))


def eigen_loci(g: Digraph, agents, gain: float, grid: OmegaGrid) -> LociResult:
    """Eigenvalues of G(jw) over the grid, branch-matched across frequencies.

    Crossings of the real axis are located by sign changes of the imaginary
    part along each matched branch (linear interpolation between grid
    points); a crossing left of -1 is flagged. Branches of negligible
    modulus (the Laplacian zero direction) are ignored.
    """
    if g.n > MAX_DENSE_NODES:
        raise ValueError(f"eigen loci limited to {MAX_DENSE_NODES} nodes, got {g.n}")
    lap = laplacian(g).matrix
    omegas = grid.values
    loci = np.empty((omegas.size, g.n), dtype=complex)
    for k, omega in enumerate(omegas):
        matrix = gain * (_diagonal_scaling(float(omega), agents)[:, None] * lap)
        values = np.linalg.eigvals(matrix)
        if k == 0:
            loci[0] = values[np.lexsort((values.imag, values.real))]
        else:
            cost = np.abs(loci[k - 1][:, None] - values[None, :])
            rows, cols = linear_sum_assignment(cost)
            loci[k, rows] = values[cols]

    crossings = []
    for trace in loci.T:
        im = trace.imag
        re = trace.real
        mag = np.abs(trace)
        for k in range(omegas.size - 1):
            if mag[k] < NEGLIGIBLE_LOCUS or mag[k + 1] < NEGLIGIBLE_LOCUS:
                continue
            a, b = im[k], im[k + 1]
            if a == 0.0:
                value = float(re[k])
                crossings.append(CrossingEvent(float(omegas[k]), value, value < -1.0))
            elif a * b < 0.0:
                frac = a / (a - b)
                omega_cross = float(omegas[k] + frac * (omegas[k + 1] - omegas[k]))
                value = float(re[k] + frac * (re[k + 1] - re[k]))
                crossings.append(CrossingEvent(omega_cross, value, value < -1.0))
    crossings.sort(key=lambda ev: ev.omega)
    loci.setflags(write=False)
    return LociResult(omegas=omegas, loci=loci, crossings=tuple(crossings))


def crossing_scale(order: float, delay: float) -> float:
    """Scale ((2 - order)*pi/(2*delay))**order taking a diagonal locus
    through -1 + j0; reduces to pi/(2*delay) at order 1."""
    if not 0.0 < order <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {order}")
    if not delay > 0.0:
        raise ValueError(f"delay must be positive, got {delay}")
    return ((2.0 - order) * math.pi / (2.0 * delay)) ** order


def certify(g: Digraph, agents, gain: float, grid: OmegaGrid | None = None) -> CertificateResult:
    """Run all three evidence channels and combine them into a verdict.

    Pass when the critical-frequency criterion holds; otherwise Fail when
    some locus crosses the real axis left of -1; otherwise Inconclusive
    (the criterion is sufficient only, so its failure alone decides
    nothing).
    """
    if grid is None:
        grid = omega_grid(agents)
    values, passed = critical_frequency_criterion(g, agents, gain)
    margins = disc_margin(g, agents, gain, grid)
    loci = eigen_loci(g, agents, gain, grid)
    if passed:
        verdict = Verdict.PASS
    elif any(ev.beyond_minus_one for ev in loci.crossings):
        verdict = Verdict.FAIL
    else:
        verdict = Verdict.INCONCLUSIVE
    values.setflags(write=False)
    return CertificateResult(
        criterion_values=values,
        criterion_pass=passed,
        disc_margins=margins,
        loci_crossings=loci.crossings,
        verdict=verdict,
    )
