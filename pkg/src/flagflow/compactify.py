"""Poincare compactification of polynomial vector fields on R^3.

R^3 is identified with the open northern hemisphere of S^3 through the
central projection x -> (x, 1)/sqrt(1 + |x|^2); the equator y4 = 0 is the
sphere of directions at infinity.  Orthogonal projection of the hemisphere
onto its equatorial ball gives the "ball picture" used for reporting.

Three affine charts cover the sphere away from y1 = y2 = y3 = 0:

* chart 1:  z = (y2/y1, y3/y1, y4/y1)
* chart 2:  z = (y1/y2, y3/y2, y4/y2)
* chart 3:  z = (y1/y3, y2/y3, y4/y3)

In each chart the compactified field of a degree-d polynomial field
(P1, P2, P3) is, after clearing the z3^d denominator and dropping a
positive conformal factor,

    chart 1:  (-z1*Q1 + Q2, -z2*Q1 + Q3, -z3*Q1),

with cyclic analogues, where Q(z) = z3^d * P(w/z3) and w carries 1 in the
chart slot.  Q extends polynomially to the equator z3 = 0, where it equals
the top-degree homogeneous part of P; the z3 component vanishes there, so
the equator is invariant.  Equilibria on the equator, their Jacobians and
their stability types are found by a seeded Newton search per chart.

Points on the equator are recorded as *signed* ambient directions, one per
covering chart (the chart-slot component positive).  A direction pair
{d, -d} therefore contributes one point per sign that is visible in some
chart; for the quadratic flag-manifold system this census has exactly ten
members, seven per chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .model import poly_jacobian, poly_rhs

__all__ = [
    "PolyField3",
    "model_poly_field",
    "ChartPoint",
    "CHART_NAMES",
    "ball_projection",
    "ball_unprojection",
    "sphere_from_ambient",
    "chart_coords",
    "chart_point_to_sphere",
    "ball_from_chart",
    "best_chart",
    "compactified_field",
    "compactified_field_array",
    "compactified_jacobian",
    "equator_field",
    "chart_equator_roots",
    "classify_equilibrium",
    "find_infinity_equilibria",
    "InfinityEquilibrium",
    "SearchConfig",
]

CHART_NAMES = {1: "U1", 2: "U2", 3: "U3"}

# ambient coordinate bookkeeping per chart: (slot, a, b) with slot the
# ambient index fixed to 1 in w, and (a, b) the ambient indices driving
# the first two chart velocities
_CHART_IDX = {1: (0, 1, 2), 2: (1, 0, 2), 3: (2, 0, 1)}

# below this |z3| the direct w/z3 substitution risks overflow; switch to
# the homogeneous-part expansion (exact for polynomial fields)
_Z3_DIRECT_FLOOR = 1e-120


@dataclass(frozen=True)
class PolyField3:
    """Polynomial vector field on R^3: point evaluator, Jacobian, degree.

    ``homogeneous=True`` asserts that every component is homogeneous of
    exactly the stated degree; chart algebra then simplifies to exact
    closed forms (z3^d * P(w/z3) == P(w)) with no extraction step.
    """

    func: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    degree: int
    homogeneous: bool = False

    def __post_init__(self):
        if int(self.degree) < 1:
            raise ValueError("polynomial degree must be a positive integer")


def model_poly_field() -> PolyField3:
    """The quadratic flag-manifold system as a :class:`PolyField3`."""
    return PolyField3(func=poly_rhs, jac=poly_jacobian, degree=2, homogeneous=True)


class ChartPoint(NamedTuple):
    """Point (z1, z2, z3) of one of the three affine charts (1, 2 or 3)."""

    chart: int
    z1: float
    z2: float
    z3: float


def ball_projection(x) -> np.ndarray:
    """Shrink R^3 onto the open unit ball: x / sqrt(1 + |x|^2)."""
    x = np.asarray(x, dtype=float)
    delta = np.sqrt(1.0 + np.sum(x * x, axis=-1, keepdims=True))
    return x / delta


def ball_unprojection(u) -> np.ndarray:
    """Inverse of :func:`ball_projection`; requires |u| < 1 - 1e-12."""
    u = np.asarray(u, dtype=float)
    n2 = float(u @ u)
    if n2 >= (1.0 - 1e-12) ** 2:
        raise ValueError("ball_unprojection requires a point strictly inside the unit ball")
    return u / math.sqrt(1.0 - n2)


def sphere_from_ambient(x) -> np.ndarray:
    """Northern-hemisphere representative (x, 1)/sqrt(1 + |x|^2) on S^3."""
    x = np.asarray(x, dtype=float)
    delta = math.sqrt(1.0 + float(x @ x))
    return np.array([x[0] / delta, x[1] / delta, x[2] / delta, 1.0 / delta])


def chart_coords(y, chart: int) -> ChartPoint:
    """Chart coordinates of a point of S^3; the dividing coordinate must be nonzero.

    Antipodal points share chart coordinates, so the result encodes the
    representative whose chart-slot component is positive.
    """
    y = np.asarray(y, dtype=float)
    slot, a, b = _chart_idx(chart)
    pivot = float(y[slot])
    if abs(pivot) <= 1e-12:
        raise ValueError(f"point is outside the domain of chart {CHART_NAMES[chart]}")
    return ChartPoint(chart, float(y[a] / pivot), float(y[b] / pivot), float(y[3] / pivot))


def chart_point_to_sphere(p: ChartPoint) -> np.ndarray:
    """Unit S^3 point of a chart point (chart-slot component positive)."""
    w = _chart_w(p.chart, p.z1, p.z2)
    v = np.array([w[0], w[1], w[2], p.z3])
    return v / float(np.linalg.norm(v))


def ball_from_chart(chart: int, z) -> np.ndarray:
    """Ball-picture coordinates (first three sphere components) of a chart point."""
    z1, z2, z3 = (float(v) for v in z)
    w = _chart_w(chart, z1, z2)
    scale = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + z3 * z3)
    return np.array([w[0] / scale, w[1] / scale, w[2] / scale])


def best_chart(y) -> int:
    """Chart whose dividing coordinate is largest in magnitude at y."""
    y = np.asarray(y, dtype=float)
    return int(np.argmax(np.abs(y[:3]))) + 1


def _chart_idx(chart: int) -> tuple[int, int, int]:
    try:
        return _CHART_IDX[int(chart)]
    except KeyError:
        raise ValueError(f"chart must be 1, 2 or 3, got {chart!r}") from None


def _chart_w(chart: int, z1: float, z2: float) -> np.ndarray:
    if chart == 1:
        return np.array([1.0, z1, z2])
    if chart == 2:
        return np.array([z1, 1.0, z2])
    if chart == 3:
        return np.array([z1, z2, 1.0])
    _chart_idx(chart)
    raise AssertionError


_VANDER_INV_CACHE: dict[int, np.ndarray] = {}


def _vander_inv(n: int) -> np.ndarray:
    inv = _VANDER_INV_CACHE.get(n)
    if inv is None:
        inv = np.linalg.inv(np.vander(_sym_nodes(n), n, increasing=True))
        _VANDER_INV_CACHE[n] = inv
    return inv


def _hom_value_parts(f: PolyField3, w: np.ndarray) -> np.ndarray:
    """Homogeneous parts H_0..H_d of f at w, each a 3-vector, via scaling nodes.

    Exact (up to rounding) for genuine polynomial fields: f(t*w) is a
    degree-d polynomial in t with vector coefficients H_k(w).
    """
    d = f.degree
    nodes = _sym_nodes(d + 1)
    vals = np.array([f.func(t * w) for t in nodes], dtype=float)
    return _vander_inv(d + 1) @ vals  # row k = H_k(w)


def _hom_jac_parts(f: PolyField3, w: np.ndarray) -> np.ndarray:
    """Jacobians of the homogeneous parts H_1..H_d of f at w (stacked)."""
    d = f.degree
    nodes = _sym_nodes(d)
    jacs = np.array([f.jac(t * w) for t in nodes], dtype=float).reshape(len(nodes), 9)
    sol = _vander_inv(d) @ jacs
    return sol.reshape(d, 3, 3)  # index k-1 -> Jacobian of H_k


def _sym_nodes(n: int) -> np.ndarray:
    # 0, 1, -1, 2, -2, ... for value parts; 1, -1, 2, -2, ... for Jacobians
    out = []
    k = 1
    if n % 2 == 1:
        out.append(0.0)
    while len(out) < n:
        out.extend([float(k), float(-k)])
        k += 1
    return np.array(out[:n])


def _cleared_rhs(f: PolyField3, chart: int, z1: float, z2: float, z3: float) -> np.ndarray:
    """Q(z) = z3^d * P(w/z3), extended polynomially through z3 = 0."""
    w = _chart_w(chart, z1, z2)
    if f.homogeneous:
        return np.asarray(f.func(w), dtype=float)
    d = f.degree
    if abs(z3) > _Z3_DIRECT_FLOOR:
        return (z3**d) * np.asarray(f.func(w / z3), dtype=float)
    parts = _hom_value_parts(f, w)
    q = parts[d].copy()
    if z3 != 0.0:
        for k in range(d - 1, -1, -1):
            q += z3 ** (d - k) * parts[k]
    return q


def compactified_field_array(f: PolyField3, chart: int, z) -> np.ndarray:
    """Compactified field in a chart, as a function of z = (z1, z2, z3).

    Polynomial in z (conformal factor dropped); the third component
    vanishes identically at z3 = 0, so the equator is invariant.  The
    formula describes the motion of the representative whose chart-slot
    coordinate is positive; at z3 < 0 that representative lies on the
    southern hemisphere, and tracking a northern point there instead
    requires the antipodal sign (-1)^(d+1) (see dynamics).
    """
    z1, z2, z3 = np.asarray(z, dtype=float).tolist()
    slot, a, b = _chart_idx(chart)
    q = _cleared_rhs(f, chart, z1, z2, z3).tolist()
    qs = q[slot]
    return np.array([-z1 * qs + q[a], -z2 * qs + q[b], -z3 * qs])


def compactified_field(f: PolyField3, p: ChartPoint) -> np.ndarray:
    """Compactified field at a :class:`ChartPoint`."""
    return compactified_field_array(f, p.chart, (p.z1, p.z2, p.z3))


def compactified_jacobian(f: PolyField3, chart: int, z) -> np.ndarray:
    """Analytic 3x3 Jacobian of :func:`compactified_field_array` in z.

    Assembled from the homogeneous parts of the field, which stays exact
    down to (and through) the equator; the direct w/z3 substitution would
    cancel catastrophically in the z3 derivative at small z3.
    """
    z1, z2, z3 = np.asarray(z, dtype=float).tolist()
    slot, a, b = _chart_idx(chart)
    w = _chart_w(chart, z1, z2)
    d = f.degree

    if f.homogeneous:
        q = np.asarray(f.func(w), dtype=float)
        pj = np.asarray(f.jac(w), dtype=float)
        dq1 = pj[:, a]
        dq2 = pj[:, b]
        dq3 = np.zeros(3)
    else:
        parts = _hom_value_parts(f, w)
        jparts = _hom_jac_parts(f, w)
        powers = np.array([z3 ** (d - k) for k in range(d + 1)])
        q = powers @ parts
        dq1 = np.zeros(3)
        dq2 = np.zeros(3)
        dq3 = np.zeros(3)
        for k in range(1, d + 1):
            dq1 += powers[k] * jparts[k - 1][:, a]
            dq2 += powers[k] * jparts[k - 1][:, b]
        for k in range(d):
            dq3 += (d - k) * (z3 ** (d - k - 1)) * parts[k]

    return np.array(
        [
            [-q[slot] - z1 * dq1[slot] + dq1[a], -z1 * dq2[slot] + dq2[a], -z1 * dq3[slot] + dq3[a]],
            [-z2 * dq1[slot] + dq1[b], -q[slot] - z2 * dq2[slot] + dq2[b], -z2 * dq3[slot] + dq3[b]],
            [-z3 * dq1[slot], -z3 * dq2[slot], -q[slot] - z3 * dq3[slot]],
        ]
    )


def equator_field(f: PolyField3, chart: int, z1: float, z2: float) -> np.ndarray:
    """Restriction of the compactified field to the equator (first two components)."""
    g = compactified_field_array(f, chart, (z1, z2, 0.0))
    return g[:2]


def _equator_jacobian(f: PolyField3, chart: int, z1: float, z2: float) -> np.ndarray:
    return compactified_jacobian(f, chart, (z1, z2, 0.0))[:2, :2]


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of the seeded Newton search for equator equilibria."""

    grid_resolution: int = 48
    seed_box: float = 8.0
    newton_tol: float = 1e-12
    dedupe_radius: float = 1e-6
    max_newton_iter: int = 40

    def __post_init__(self):
        if self.grid_resolution < 32:
            raise ValueError("grid_resolution must be at least 32")
        if not (self.seed_box > 0 and self.newton_tol > 0 and self.dedupe_radius > 0):
            raise ValueError("seed_box, newton_tol and dedupe_radius must be positive")


@dataclass(frozen=True)
class InfinityEquilibrium:
    """Equilibrium of the compactified field on the equator of S^3."""

    chart: int
    z: np.ndarray  # (z1, z2, 0)
    direction: np.ndarray  # signed ambient unit direction, chart slot positive
    eigenvalues: np.ndarray  # Jacobian spectrum, sorted by descending real part
    stability: str  # attractor | repeller | saddle | nonhyperbolic
    first_octant: bool

    def residual(self, f: PolyField3) -> float:
        return float(np.linalg.norm(equator_field(f, self.chart, self.z[0], self.z[1])))


def _newton_root(f: PolyField3, chart: int, seed, cfg: SearchConfig):
    z = np.array(seed, dtype=float)
    escape = 10.0 * cfg.seed_box
    for _ in range(cfg.max_newton_iter):
        F = equator_field(f, chart, z[0], z[1])
        if not np.all(np.isfinite(F)):
            return None
        J = _equator_jacobian(f, chart, z[0], z[1])
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        z = z + step
        if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > escape:
            return None
        if np.linalg.norm(step) < 1e-14 * (1.0 + np.linalg.norm(z)):
            break
    if np.linalg.norm(equator_field(f, chart, z[0], z[1])) < cfg.newton_tol:
        return z
    return None


def _supports_batch(f: PolyField3) -> bool:
    """True when f.func evaluates (N, 3) arrays row-wise."""
    probe = np.array([[0.3, -1.2, 2.1], [1.7, 0.4, -0.9]])
    try:
        out = np.asarray(f.func(probe), dtype=float)
    except Exception:
        return False
    if out.shape != (2, 3):
        return False
    rows = np.array([f.func(probe[0]), f.func(probe[1])], dtype=float)
    return bool(np.allclose(out, rows, rtol=1e-12, atol=1e-12))


def _batch_equator_field(f: PolyField3, chart: int, pts: np.ndarray) -> np.ndarray:
    """Equator system at many (z1, z2) points at once (broadcasting fields only)."""
    slot, a, b = _chart_idx(chart)
    d = f.degree
    w = np.empty((pts.shape[0], 3))
    w[:, slot] = 1.0
    w[:, a] = pts[:, 0]
    w[:, b] = pts[:, 1]
    if f.homogeneous:
        q = np.asarray(f.func(w), dtype=float)
    else:
        top_coeff = _vander_inv(d + 1)[d]
        q = np.zeros_like(w)
        for t, c in zip(_sym_nodes(d + 1), top_coeff):
            if c != 0.0:
                q += c * np.asarray(f.func(t * w), dtype=float)
    return np.stack(
        [-pts[:, 0] * q[:, slot] + q[:, a], -pts[:, 1] * q[:, slot] + q[:, b]],
        axis=-1,
    )


def _batch_newton_roots(f: PolyField3, chart: int, seeds: np.ndarray,
                        cfg: SearchConfig) -> list[np.ndarray]:
    """Simultaneous damped Newton iteration over all grid seeds."""
    pts = seeds.copy()
    alive = np.arange(len(pts))
    escape = 10.0 * cfg.seed_box
    roots: list[np.ndarray] = []
    fd_h = 1e-6

    def collect(candidates: np.ndarray) -> None:
        for z in candidates:
            res = float(np.linalg.norm(_batch_equator_field(f, chart, z[None, :])[0]))
            if res < cfg.newton_tol:
                if not any(np.linalg.norm(z - r) < max(cfg.dedupe_radius, 1e-9) for r in roots):
                    roots.append(z)

    for _ in range(cfg.max_newton_iter):
        if len(alive) == 0:
            break
        cur = pts[alive]
        F = _batch_equator_field(f, chart, cur)
        Fp1 = _batch_equator_field(f, chart, cur + [fd_h, 0.0])
        Fm1 = _batch_equator_field(f, chart, cur - [fd_h, 0.0])
        Fp2 = _batch_equator_field(f, chart, cur + [0.0, fd_h])
        Fm2 = _batch_equator_field(f, chart, cur - [0.0, fd_h])
        j11 = (Fp1[:, 0] - Fm1[:, 0]) / (2 * fd_h)
        j21 = (Fp1[:, 1] - Fm1[:, 1]) / (2 * fd_h)
        j12 = (Fp2[:, 0] - Fm2[:, 0]) / (2 * fd_h)
        j22 = (Fp2[:, 1] - Fm2[:, 1]) / (2 * fd_h)
        det = j11 * j22 - j12 * j21
        with np.errstate(all="ignore"):
            s1 = (-F[:, 0] * j22 + F[:, 1] * j12) / det
            s2 = (-F[:, 1] * j11 + F[:, 0] * j21) / det
        new = cur + np.stack([s1, s2], axis=-1)
        step = np.hypot(s1, s2)
        finite = np.all(np.isfinite(new), axis=1) & (np.max(np.abs(new), axis=1) <= escape)
        settled = finite & (step < 1e-12 * (1.0 + np.linalg.norm(cur, axis=1)))
        pts[alive[finite]] = new[finite]
        collect(new[settled])
        alive = alive[finite & ~settled]
    return roots


def chart_equator_roots(f: PolyField3, chart: int, cfg: SearchConfig | None = None) -> list[np.ndarray]:
    """Distinct equator roots (z1, z2) of one chart, from a seeded grid search.

    Non-convergent seeds are discarded silently; an empty list signals a
    grid too coarse for the field at hand.  Fields whose evaluator
    broadcasts over (N, 3) arrays are searched with a vectorized Newton
    iteration; others fall back to a per-seed loop.
    """
    cfg = cfg or SearchConfig()
    lin = np.linspace(-cfg.seed_box, cfg.seed_box, cfg.grid_resolution)
    if _supports_batch(f):
        g1, g2 = np.meshgrid(lin, lin, indexing="ij")
        seeds = np.column_stack([g1.ravel(), g2.ravel()])
        roots = _batch_newton_roots(f, chart, seeds, cfg)
    else:
        roots = []
        for s1 in lin:
            for s2 in lin:
                z = _newton_root(f, chart, (s1, s2), cfg)
                if z is None:
                    continue
                if not any(np.linalg.norm(z - r) < max(cfg.dedupe_radius, 1e-9) for r in roots):
                    roots.append(z)
    roots.sort(key=lambda r: (round(r[0], 9), round(r[1], 9)))
    return roots


def classify_equilibrium(f: PolyField3, chart: int, z1: float, z2: float,
                         hyper_tol: float = 1e-9) -> InfinityEquilibrium:
    """Classify a converged equator root by its chart-field Jacobian spectrum."""
    jac = compactified_jacobian(f, chart, (z1, z2, 0.0))
    eig = np.linalg.eigvals(jac)
    eig = eig[np.lexsort((-eig.imag, -eig.real))]
    re = eig.real
    if np.any(np.abs(re) <= hyper_tol):
        stability = "nonhyperbolic"
    elif np.all(re < 0.0):
        stability = "attractor"
    elif np.all(re > 0.0):
        stability = "repeller"
    else:
        stability = "saddle"
    w = _chart_w(chart, z1, z2)
    direction = w / np.linalg.norm(w)
    return InfinityEquilibrium(
        chart=chart,
        z=np.array([z1, z2, 0.0]),
        direction=direction,
        eigenvalues=eig,
        stability=stability,
        first_octant=bool(np.all(direction > 0.0)),
    )


def find_infinity_equilibria(f: PolyField3, cfg: SearchConfig | None = None) -> list[InfinityEquilibrium]:
    """All equator equilibria of the compactified field, across the three charts.

    Each equilibrium is reported once per *signed* ambient direction (the
    representative a covering chart sees, slot component positive); merging
    across charts keeps the first covering chart.  Sorted deterministically
    by (chart, z1, z2).
    """
    cfg = cfg or SearchConfig()
    found: list[InfinityEquilibrium] = []
    for chart in (1, 2, 3):
        for root in chart_equator_roots(f, chart, cfg):
            eq = classify_equilibrium(f, chart, root[0], root[1])
            if not any(np.linalg.norm(eq.direction - other.direction) < cfg.dedupe_radius
                       for other in found):
                found.append(eq)
    found.sort(key=lambda e: (e.chart, round(e.z[0], 9), round(e.z[1], 9)))
    return found
