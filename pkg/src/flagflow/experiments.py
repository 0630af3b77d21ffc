"""Runnable reproductions of the qualitative results for the SU(3)/T flow.

* ``no_interior_equilibria_scan``: certifies numerically that the
  quadratic field has no zero on the closed first-octant unit sphere, so
  by homogeneity the origin is its only zero in the octant cone.
* ``cylinder_basin``: samples a tube of initial conditions around one of
  the four invariant rays and reports which fraction of the compactified
  trajectories terminates at the ray's equilibrium at infinity.
* ``lyapunov_exponent_table``: Benettin spectra for the four rays in a
  fixed affine chart.
* ``classify_limit``: runs one metric to its limit direction and labels
  the limit (normal Einstein / Einstein / neither).

Sampling streams are derived from (seed, line, sample index), so reports
are independent of execution order and reproducible byte for byte.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dataclass_field
from typing import NamedTuple, Sequence

import numpy as np

from . import compactify as cpt
from .dynamics import (
    IntegratorConfig,
    distance_to_line_ball,
    integrate_compactified,
    lyapunov_spectrum,
)
from .model import (
    MetricParams,
    einstein_residual,
    line_direction,
    poly_jacobian,
    poly_rhs,
)

__all__ = [
    "no_interior_equilibria_scan",
    "cylinder_basin",
    "lyapunov_exponent_table",
    "classify_limit",
    "BasinReport",
    "BasinSample",
    "LyapunovTable",
    "LyapunovTableRow",
    "LimitClassification",
]

# ball radius below which a terminal point counts as "at" an equilibrium
# direction when reporting convergence
CONVERGED_DISTANCE = 1e-3

# the integration itself stops deeper inside the convergence funnel, so the
# terminal direction is accurate enough for Einstein-residual checks
_STOP_RADIUS = 1e-7

_RUN_CFG = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-11, max_step=0.25, t_end=200.0)


@functools.lru_cache(maxsize=1)
def _equilibrium_targets() -> tuple[np.ndarray, ...]:
    """Directions of all equilibria at infinity, as run-termination targets.

    Trajectories that leave a ray's neighbourhood settle at equilibria
    outside the first octant; terminating there (instead of timing out)
    keeps the experiments honest about the limit and fast.
    """
    eqs = cpt.find_infinity_equilibria(cpt.model_poly_field())
    return tuple(e.direction for e in eqs)


def _octant_grid(resolution: int) -> np.ndarray:
    """Geodesic grid of the closed first-octant unit sphere (projected lattice)."""
    n = resolution
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    mask = i + j <= n
    pts = np.column_stack([i[mask], j[mask], (n - i - j)[mask]]).astype(float)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _polish_octant_minimum(d: np.ndarray) -> float:
    """Projected-gradient descent of |poly_rhs|^2 on the octant sphere patch."""
    d = d / np.linalg.norm(d)
    f = float(poly_rhs(d) @ poly_rhs(d))
    for _ in range(200):
        p = poly_rhs(d)
        g = 2.0 * poly_jacobian(d).T @ p
        g_t = g - (g @ d) * d
        gnorm = float(np.linalg.norm(g_t))
        if gnorm < 1e-12:
            break
        alpha = 0.1 / (1.0 + gnorm)
        improved = False
        for _ in range(40):
            cand = np.clip(d - alpha * g_t, 0.0, None)
            norm = float(np.linalg.norm(cand))
            if norm > 0.0:
                cand = cand / norm
                fc = float(poly_rhs(cand) @ poly_rhs(cand))
                if fc < f - 1e-18:
                    d, f = cand, fc
                    improved = True
                    break
            alpha *= 0.5
        if not improved:
            break
    return math.sqrt(f)


def no_interior_equilibria_scan(resolution: int) -> float:
    """Minimum of |poly_rhs| over the closed first-octant unit sphere.

    Evaluates the field norm on a geodesic grid at the given resolution and
    polishes the best candidates by projected descent.  A strictly positive
    result certifies (numerically) that the origin is the only zero of the
    quadratic system in the closed octant cone, hence the metric flow has
    no fixed point on the open cone.
    """
    if resolution < 50:
        raise ValueError("resolution must be at least 50")
    dirs = _octant_grid(resolution)
    norms = np.linalg.norm(poly_rhs(dirs), axis=1)
    best = float(np.min(norms))
    order = np.argsort(norms, kind="stable")[:40]
    for idx in order:
        best = min(best, _polish_octant_minimum(dirs[idx]))
    return best


class BasinSample(NamedTuple):
    """One tube sample: seed index, launch point, terminal ball point, outcome."""

    index: int
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    termination: str
    converged: bool
    max_deviation: float


@dataclass
class BasinReport:
    """Outcome of a cylinder-of-initial-conditions experiment around one ray."""

    line: int
    epsilon: float
    delta: float
    samples: int
    seed: int
    converged_fraction: float
    max_line_deviation: float
    records: list[BasinSample] = dataclass_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "line": self.line,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "samples": self.samples,
            "seed": self.seed,
            "converged_fraction": self.converged_fraction,
            "max_line_deviation": self.max_line_deviation,
            "records": [
                {
                    "index": r.index,
                    "start": list(r.start),
                    "end": list(r.end),
                    "termination": r.termination,
                    "converged": r.converged,
                    "max_deviation": r.max_deviation,
                }
                for r in self.records
            ],
        }


# transverse reference axis per line, chosen equivariantly under the
# coordinate permutations relating lines 1, 3 and 4 (the axis of the
# dominant component; the diagonal line uses the third axis)
_FRAME_AXIS = {1: 1, 2: 2, 3: 2, 4: 0}


def _tube_frame(line: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = line_direction(line)
    axis = np.zeros(3)
    axis[_FRAME_AXIS[line]] = 1.0
    e1 = axis - (axis @ d) * d
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return d, e1, e2


def cylinder_basin(line: int, epsilon: float, delta: float, n: int, seed: int,
                   cfg: IntegratorConfig | None = None) -> BasinReport:
    """Sample the radius-``epsilon`` tube around an invariant ray and integrate.

    Launch points sit on the lateral surface of the tube (ball picture),
    uniform in height along the ray and in angle; heights range from the
    ball image of the ambient sphere |x| = delta up to ball radius 0.98.
    Each sample is integrated with the compactified field until it settles
    at one of the four equilibrium directions at infinity (or times out);
    a sample counts as converged when it terminates within 1e-3 of the
    ray's own direction.  ``max_deviation`` tracks the ball-coordinate
    distance to the ray over the trajectory after launch.
    """
    if not (0.0 < epsilon <= 0.1):
        raise ValueError("epsilon must lie in (0, 0.1]")
    if delta < 0.5:
        raise ValueError("delta must be at least 0.5")
    if n < 1:
        raise ValueError("sample count must be at least 1")
    cfg = cfg or _RUN_CFG
    field = cpt.model_poly_field()
    d, e1, e2 = _tube_frame(line)
    targets = _equilibrium_targets()
    target = line_direction(line)
    r_lo = delta / math.sqrt(1.0 + delta * delta)
    r_hi = 0.98

    records: list[BasinSample] = []
    n_conv = 0
    overall_dev = 0.0
    for idx in range(n):
        rng = np.random.default_rng([seed, line, idx])
        height = rng.uniform(r_lo, r_hi)
        angle = rng.uniform(0.0, 2.0 * math.pi)
        u0 = height * d + epsilon * (math.cos(angle) * e1 + math.sin(angle) * e2)
        x0 = cpt.ball_unprojection(u0)
        traj = integrate_compactified(field, x0, cfg, targets=targets,
                                      convergence_radius=_STOP_RADIUS)
        end = traj.final_state
        converged = (traj.termination == "converged_to_point"
                     and float(np.linalg.norm(end - target)) <= CONVERGED_DISTANCE)
        devs = [distance_to_line_ball(u, line) for u in traj.states[1:]]
        dev = max(devs) if devs else 0.0
        n_conv += converged
        overall_dev = max(overall_dev, dev)
        records.append(BasinSample(
            index=idx,
            start=tuple(float(v) for v in u0),
            end=tuple(float(v) for v in end),
            termination=traj.termination,
            converged=converged,
            max_deviation=dev,
        ))
    return BasinReport(
        line=line,
        epsilon=epsilon,
        delta=delta,
        samples=n,
        seed=seed,
        converged_fraction=n_conv / n,
        max_line_deviation=overall_dev,
        records=records,
    )


class LyapunovTableRow(NamedTuple):
    line: int
    chart: int
    exponents: tuple[float, float, float]  # sorted descending
    t_used: float
    converged: bool
    note: str


@dataclass
class LyapunovTable:
    rows: list[LyapunovTableRow]

    def row(self, line: int, chart: int = 1) -> LyapunovTableRow:
        for r in self.rows:
            if r.line == line and r.chart == chart:
                return r
        raise KeyError((line, chart))


def lyapunov_exponent_table(lines: Sequence[int] = (1, 2, 3, 4),
                            charts: Sequence[int] = (1,),
                            renorm_dt: float = 0.1,
                            t_max: float = 500.0,
                            base_radius: float = 2.0,
                            cfg: IntegratorConfig | None = None) -> LyapunovTable:
    """Benettin spectra along the invariant rays, one row per (line, chart).

    The base trajectory starts at the chart image of the ambient point
    ``base_radius`` times the ray direction (outside the numerically
    unstable ball around the origin) and follows the compactified field of
    the chart, with the analytic chart Jacobian driving the tangent flow.
    Non-convergent rows (including base trajectories that leave the chart)
    are reported with their partial averages and ``converged=False``.
    """
    field = cpt.model_poly_field()
    # exponents are compared at the 1e-3 level, so 1e-7 local tolerance is ample
    base_cfg = cfg or IntegratorConfig(rel_tol=1e-7, abs_tol=1e-10, max_step=0.1, t_end=t_max)
    rows = []
    for line in lines:
        x0 = base_radius * line_direction(line)
        y = cpt.sphere_from_ambient(x0)
        for chart in charts:
            z0 = np.array(cpt.chart_coords(y, chart)[1:], dtype=float)
            rhs = lambda z, c=chart: cpt.compactified_field_array(field, c, z)
            jac = lambda z, c=chart: cpt.compactified_jacobian(field, c, z)
            spec = lyapunov_spectrum(rhs, z0, base_cfg, renorm_dt, jacobian=jac)
            rows.append(LyapunovTableRow(
                line=line,
                chart=chart,
                exponents=tuple(float(v) for v in spec.exponents),
                t_used=spec.t_used,
                converged=spec.converged,
                note=spec.note,
            ))
    return LyapunovTable(rows=rows)


@dataclass
class LimitClassification:
    """Limit direction of one compactified run and its geometric label."""

    limit_direction: np.ndarray
    einstein_residual_at_limit: float
    kind: str  # normal_einstein | einstein | non_einstein
    termination: str


def classify_limit(x0, cfg: IntegratorConfig | None = None) -> LimitClassification:
    """Run a metric to its limit direction and label the limit metric.

    ``normal_einstein`` when the limit direction is the diagonal (within
    1e-6), ``einstein`` when the Einstein residual of the limit direction
    is below 1e-8, otherwise ``non_einstein``.  A run that does not settle
    at an equilibrium direction is labelled ``non_einstein`` and carries
    its termination reason as the diagnostic.
    """
    m = MetricParams.of(np.asarray(x0, dtype=float))
    cfg = cfg or _RUN_CFG
    field = cpt.model_poly_field()
    traj = integrate_compactified(field, m.as_array(), cfg,
                                  targets=_equilibrium_targets(),
                                  convergence_radius=_STOP_RADIUS)
    u = traj.final_state
    direction = u / float(np.linalg.norm(u))
    if np.all(direction > 0.0):
        _, residual = einstein_residual(direction)
    else:
        residual = math.inf
    diag = line_direction(2)
    if traj.termination != "converged_to_point":
        kind = "non_einstein"
    elif float(np.linalg.norm(direction - diag)) <= 1e-6:
        kind = "normal_einstein"
    elif residual < 1e-8:
        kind = "einstein"
    else:
        kind = "non_einstein"
    return LimitClassification(
        limit_direction=direction,
        einstein_residual_at_limit=float(residual),
        kind=kind,
        termination=traj.termination,
    )
