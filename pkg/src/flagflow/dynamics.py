"""Adaptive ODE integration for the ambient and compactified flows.

The workhorse is an embedded Dormand-Prince 4(5) pair with proportional
step control on a mixed absolute/relative error norm and cubic Hermite
dense output.  On top of it:

* plain integration to a final time,
* event-terminated integration (sup-norm blow-up radius, localized by
  bisection; convergence to a point held for one full step),
* integration of the compactified field in the affine charts with
  automatic chart switching and ball-picture reporting,
* Lyapunov spectra by co-integrating a tangent frame under the
  variational equations and re-orthonormalizing it on a fixed cadence,
* distance from a state to one of the four invariant rays, measured in
  ball coordinates.

All routines are deterministic for fixed inputs and configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Sequence

import numpy as np

from . import compactify as cpt
from .model import line_direction, poly_rhs

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "LyapunovSpectrum",
    "integrate",
    "integrate_with_events",
    "integrate_compactified",
    "lyapunov_spectrum",
    "distance_to_line",
    "distance_to_line_ball",
    "ricci_field",
    "poly_field",
    "TERMINATIONS",
]

TERMINATIONS = ("reached_t_end", "blow_up_event", "converged_to_point", "step_size_collapse")


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits of the adaptive integrator."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 0.5
    t_end: float = 10.0
    min_step: float = 1e-12

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.min_step < self.max_step):
            raise ValueError("min_step must be positive and smaller than max_step")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")


@dataclass
class Trajectory:
    """Time-stamped solution samples plus the reason integration stopped."""

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    termination: str
    chart_ids: list[int] | None = None
    chart_states: np.ndarray | None = None
    chart_log: list[tuple[float, int, int]] | None = None

    def __post_init__(self):
        if self.termination not in TERMINATIONS:
            raise ValueError(f"unknown termination {self.termination!r}")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory states must be finite")

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def interpolate(self, t: float) -> np.ndarray:
        """Cubic Hermite dense output between accepted steps."""
        ts = self.times
        if not (ts[0] <= t <= ts[-1]):
            raise ValueError(f"t={t} outside trajectory range [{ts[0]}, {ts[-1]}]")
        i = int(np.searchsorted(ts, t, side="right") - 1)
        i = min(max(i, 0), len(ts) - 2)
        return _hermite(ts[i], self.states[i], self.derivs[i],
                        ts[i + 1], self.states[i + 1], self.derivs[i + 1], t)


# Dormand-Prince 4(5) tableau; the fifth-order solution propagates and the
# difference to the embedded fourth-order one estimates the local error.
_DP_A = (
    np.array(()),
    np.array((1 / 5,)),
    np.array((3 / 40, 9 / 40)),
    np.array((44 / 45, -56 / 15, 32 / 9)),
    np.array((19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)),
    np.array((9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)),
    np.array((35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)),
)
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    if h <= 0:
        return y0.copy()
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * f1)


class _StepCollapse(Exception):
    pass


class _Stepper:
    """One-step adaptive Dormand-Prince driver (FSAL)."""

    def __init__(self, func, t0: float, y0: np.ndarray, cfg: IntegratorConfig):
        self.func = func
        self.cfg = cfg
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        with np.errstate(all="ignore"):
            self.f = np.asarray(func(self.y), dtype=float)
        if not np.all(np.isfinite(self.f)):
            raise _StepCollapse("vector field not finite at the initial state")
        # modest first step from plain magnitudes; the controller adapts fast
        y_rms = float(np.linalg.norm(self.y)) / math.sqrt(self.y.size)
        f_rms = float(np.linalg.norm(self.f)) / math.sqrt(self.y.size)
        self.h = min(cfg.max_step, max(0.01 * (1.0 + y_rms) / (1.0 + f_rms), 2.0 * cfg.min_step))

    def step(self, t_limit: float):
        """Advance one accepted step, not beyond t_limit.

        Returns (t_old, y_old, f_old, t_new, y_new, f_new).
        Raises _StepCollapse when the controller drives h below min_step.
        """
        cfg = self.cfg
        n = self.y.size
        kmat = np.empty((7, n))
        while True:
            h = min(self.h, t_limit - self.t)
            if h < cfg.min_step:
                raise _StepCollapse(f"step size {h:.3e} fell below min_step at t={self.t:.6g}")
            kmat[0] = self.f
            ok = True
            with np.errstate(all="ignore"):
                for stage in range(1, 7):
                    yi = self.y + h * (_DP_A[stage] @ kmat[:stage])
                    fi = np.asarray(self.func(yi), dtype=float)
                    kmat[stage] = fi
                    if not np.all(np.isfinite(fi)):
                        ok = False
                        break
            if ok:
                y_new = yi  # stage 6 evaluates at the fifth-order solution (FSAL)
                f_new = fi
                err = h * (_DP_E @ kmat)
                scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(self.y), np.abs(y_new))
                with np.errstate(all="ignore"):
                    err_norm = float(np.linalg.norm(err / scale) / math.sqrt(err.size))
            if not ok or not math.isfinite(err_norm):
                self.h = max(h * 0.2, cfg.min_step * 0.5)
                if self.h < cfg.min_step:
                    raise _StepCollapse(f"repeated rejected steps at t={self.t:.6g}")
                continue
            if err_norm <= 1.0:
                out = (self.t, self.y, self.f, self.t + h, y_new, f_new)
                self.t += h
                self.y = y_new
                self.f = f_new
                factor = 0.9 * err_norm ** -0.2 if err_norm > 0.0 else 5.0
                self.h = min(h * min(5.0, max(0.2, factor)), cfg.max_step)
                return out
            self.h = h * min(1.0, max(0.2, 0.9 * err_norm ** -0.2))


def ricci_field() -> Callable[[np.ndarray], np.ndarray]:
    """Raw Ricci flow velocity l' = -2 r(l) as an unchecked formula.

    Unlike :func:`flagflow.model.flow_rhs` this performs no domain
    validation; outside the open first octant it returns inf/nan, which the
    step controller treats as a rejected step.  That lets the integrator
    degrade gracefully (step_size_collapse) at the finite-time collapse.
    """
    def rhs(x: np.ndarray) -> np.ndarray:
        a, b, c = x
        return np.array([
            -2.0 * (1.0 / (2.0 * a) + (a / (b * c) - b / (a * c) - c / (a * b)) / 12.0),
            -2.0 * (1.0 / (2.0 * b) + (b / (a * c) - a / (b * c) - c / (a * b)) / 12.0),
            -2.0 * (1.0 / (2.0 * c) + (c / (a * b) - a / (c * b) - b / (c * a)) / 12.0),
        ])
    return rhs


def poly_field() -> Callable[[np.ndarray], np.ndarray]:
    """The quadratic polynomial system as an integrable field."""
    return poly_rhs


def integrate(field, x0, cfg: IntegratorConfig) -> Trajectory:
    """Integrate an autonomous field from x0 to cfg.t_end, no events."""
    return integrate_with_events(field, x0, cfg)


def integrate_with_events(field, x0, cfg: IntegratorConfig, *,
                          blow_up_radius: float | None = None,
                          convergence_point=None,
                          convergence_radius: float = 1e-6) -> Trajectory:
    """Integrate with optional terminal events.

    blow_up_radius: stop with ``blow_up_event`` once the state sup-norm
    reaches the radius; the event time is localized by bisection on the
    dense output to 1e-9.  convergence_point: stop with
    ``converged_to_point`` after a full accepted step inside the
    convergence ball.  Step-size collapse terminates gracefully.
    """
    x0 = np.asarray(x0, dtype=float)
    q = None if convergence_point is None else np.asarray(convergence_point, dtype=float)
    times = [0.0]
    states = [x0.copy()]
    derivs = []
    termination = "reached_t_end"
    try:
        stepper = _Stepper(field, 0.0, x0, cfg)
        derivs.append(stepper.f.copy())
        if blow_up_radius is not None and float(np.max(np.abs(x0))) >= blow_up_radius:
            return Trajectory(np.array(times), np.array(states), np.array(derivs), "blow_up_event")
        while stepper.t < cfg.t_end:
            t0, y0, f0, t1, y1, f1 = stepper.step(cfg.t_end)
            if blow_up_radius is not None and float(np.max(np.abs(y1))) >= blow_up_radius:
                te, ye = _bisect_blow_up(t0, y0, f0, t1, y1, f1, blow_up_radius)
                times.append(te)
                states.append(ye)
                derivs.append(np.asarray(field(ye), dtype=float))
                termination = "blow_up_event"
                break
            times.append(t1)
            states.append(y1)
            derivs.append(f1)
            if q is not None and (np.linalg.norm(y0 - q) <= convergence_radius
                                  and np.linalg.norm(y1 - q) <= convergence_radius):
                termination = "converged_to_point"
                break
    except _StepCollapse:
        termination = "step_size_collapse"
    return Trajectory(np.array(times), np.array(states), np.array(derivs), termination)


def _bisect_blow_up(t0, y0, f0, t1, y1, f1, radius):
    lo, hi = t0, t1
    for _ in range(80):
        if hi - lo <= 1e-9:
            break
        mid = 0.5 * (lo + hi)
        ymid = _hermite(t0, y0, f0, t1, y1, f1, mid)
        if float(np.max(np.abs(ymid))) >= radius:
            hi = mid
        else:
            lo = mid
    te = 0.5 * (lo + hi)
    return te, _hermite(t0, y0, f0, t1, y1, f1, te)


def _north_ball(chart: int, z: np.ndarray) -> np.ndarray:
    """Ball coordinates of the northern-hemisphere point a chart state tracks."""
    u = cpt.ball_from_chart(chart, z)
    return -u if z[2] < 0 else u


def integrate_compactified(f: cpt.PolyField3, x0, cfg: IntegratorConfig, *,
                           targets: Sequence[np.ndarray] | None = None,
                           convergence_radius: float = 1e-3,
                           switch_threshold: float = 0.3,
                           switch_hysteresis: float = 0.05) -> Trajectory:
    """Integrate the compactified field from an ambient point x0.

    The state lives in one affine chart at a time; the chart is switched
    whenever the magnitude of the current dividing sphere coordinate drops
    below ``switch_threshold`` and another chart clears the threshold plus
    hysteresis.  The trajectory is reported in ball coordinates, with the
    chart bookkeeping kept alongside.  When ``targets`` (ball points) are
    given, the run stops with ``converged_to_point`` once a full step stays
    within ``convergence_radius`` of one of them.
    """
    y = cpt.sphere_from_ambient(np.asarray(x0, dtype=float))
    chart = cpt.best_chart(y)
    z = np.array(cpt.chart_coords(y, chart)[1:], dtype=float)
    tgt = None if targets is None else [np.asarray(q, dtype=float) for q in targets]

    times = [0.0]
    chart_ids = [chart]
    chart_states = [z.copy()]
    ball_states = [_north_ball(chart, z)]
    derivs = [cpt.compactified_field_array(f, chart, z)]
    chart_log: list[tuple[float, int, int]] = []
    termination = "reached_t_end"

    # the chart formula moves the slot-positive representative; tracking the
    # northern point at z3 < 0 needs the antipodal sign (-1)^(d+1)
    flip_south = f.degree % 2 == 0

    def make_rhs(c):
        def rhs(state):
            g = cpt.compactified_field_array(f, c, state)
            if flip_south and state[2] < 0.0:
                return -g
            return g
        return rhs

    try:
        stepper = _Stepper(make_rhs(chart), 0.0, z, cfg)
        prev_ball = ball_states[0]
        while stepper.t < cfg.t_end:
            t0, z0, g0, t1, z1, g1 = stepper.step(cfg.t_end)
            u1 = _north_ball(chart, z1)
            times.append(t1)
            chart_ids.append(chart)
            chart_states.append(z1.copy())
            ball_states.append(u1)
            derivs.append(g1)
            if tgt is not None:
                done = False
                for q in tgt:
                    if (np.linalg.norm(prev_ball - q) <= convergence_radius
                            and np.linalg.norm(u1 - q) <= convergence_radius):
                        termination = "converged_to_point"
                        done = True
                        break
                if done:
                    break
            prev_ball = u1
            ysph = cpt.chart_point_to_sphere(cpt.ChartPoint(chart, *z1))
            if z1[2] < 0:
                ysph = -ysph
            pivot = abs(float(ysph[chart - 1]))
            if pivot < switch_threshold:
                cand = cpt.best_chart(ysph)
                if cand != chart and abs(float(ysph[cand - 1])) >= switch_threshold + switch_hysteresis:
                    chart_log.append((t1, chart, cand))
                    chart = cand
                    z1 = np.array(cpt.chart_coords(ysph, chart)[1:], dtype=float)
                    stepper = _Stepper(make_rhs(chart), t1, z1, cfg)
    except _StepCollapse:
        termination = "step_size_collapse"

    return Trajectory(
        times=np.array(times),
        states=np.array(ball_states),
        derivs=np.array(derivs),
        termination=termination,
        chart_ids=chart_ids,
        chart_states=np.array(chart_states),
        chart_log=chart_log,
    )


@dataclass
class LyapunovSpectrum:
    """Benettin estimate of the three Lyapunov exponents of a trajectory."""

    exponents: np.ndarray  # sorted descending
    t_used: float
    converged: bool
    history: list[tuple[float, np.ndarray]] = dataclass_field(default_factory=list)
    max_gram_defect: float = 0.0
    note: str = ""

    def __post_init__(self):
        if np.any(np.diff(self.exponents) > 1e-12):
            raise ValueError("exponents must be sorted in descending order")


def _fd_jacobian(field, x: np.ndarray) -> np.ndarray:
    h = 1e-6 * (1.0 + float(np.max(np.abs(x))))
    cols = []
    for j in range(x.size):
        xp = x.copy(); xp[j] += h
        xm = x.copy(); xm[j] -= h
        cols.append((np.asarray(field(xp), float) - np.asarray(field(xm), float)) / (2 * h))
    return np.column_stack(cols)


def lyapunov_spectrum(field, x0, cfg: IntegratorConfig, renorm_dt: float, *,
                      jacobian=None,
                      convergence_tol: float = 1e-3,
                      min_time: float = 10.0,
                      divergence_guard: float = 1e3) -> LyapunovSpectrum:
    """Lyapunov spectrum of the trajectory of ``field`` through x0.

    Co-integrates the base state with three tangent vectors under
    v' = J(x) v, orthonormalizes the frame every ``renorm_dt`` by modified
    Gram-Schmidt and averages the accumulated log stretch factors over
    elapsed time.  Convergence is declared once the running averages move
    less than ``convergence_tol`` componentwise between 0.75*t and t.

    If the base trajectory diverges (leaves the ``divergence_guard``
    sup-norm ball, or collapses the step size) before convergence, the
    partial averages are returned with ``converged=False``.
    """
    if renorm_dt <= 0:
        raise ValueError("renorm_dt must be positive")
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    jac = jacobian if jacobian is not None else (lambda x: _fd_jacobian(field, x))

    def ext_rhs(yext: np.ndarray) -> np.ndarray:
        x = yext[:n]
        frame = yext[n:].reshape(3, n)
        J = np.asarray(jac(x), dtype=float)
        out = np.empty_like(yext)
        out[:n] = np.asarray(field(x), dtype=float)
        out[n:] = (frame @ J.T).ravel()
        return out

    frame = np.eye(3, n)
    state = np.concatenate([x0, frame.ravel()])
    sums = np.zeros(3)
    t_acc = 0.0
    history: list[tuple[float, np.ndarray]] = []
    max_defect = 0.0
    converged = False
    note = ""

    seg_cfg = IntegratorConfig(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                               max_step=min(cfg.max_step, renorm_dt),
                               t_end=renorm_dt, min_step=cfg.min_step)
    n_segments = int(math.ceil(cfg.t_end / renorm_dt))
    try:
        for _ in range(n_segments):
            stepper = _Stepper(ext_rhs, 0.0, state, seg_cfg)
            while stepper.t < renorm_dt:
                stepper.step(renorm_dt)
            state = stepper.y
            base = state[:n]
            if float(np.max(np.abs(base))) > divergence_guard:
                note = "base trajectory left the divergence guard ball"
                break
            frame = state[n:].reshape(3, n)
            # modified Gram-Schmidt with log-stretch accounting
            for i in range(3):
                for j in range(i):
                    frame[i] -= (frame[i] @ frame[j]) * frame[j]
                r = float(np.linalg.norm(frame[i]))
                if r == 0.0 or not math.isfinite(r):
                    raise _StepCollapse("tangent frame degenerated")
                sums[i] += math.log(r)
                frame[i] /= r
            gram = frame @ frame.T
            max_defect = max(max_defect, float(np.max(np.abs(gram - np.eye(3)))))
            state[n:] = frame.ravel()
            t_acc += renorm_dt
            running = np.sort(sums / t_acc)[::-1]
            history.append((t_acc, running))
            if t_acc >= min_time:
                cutoff = 0.75 * t_acc
                past = [h for h in history if h[0] <= cutoff]
                if past and float(np.max(np.abs(past[-1][1] - running))) < convergence_tol:
                    converged = True
                    break
    except _StepCollapse as exc:
        note = f"base trajectory diverged: {exc}"

    exponents = np.sort(sums / t_acc)[::-1] if t_acc > 0 else np.full(3, np.nan)
    return LyapunovSpectrum(
        exponents=exponents,
        t_used=t_acc,
        converged=converged,
        history=history,
        max_gram_defect=max_defect,
        note=note,
    )


def distance_to_line_ball(u, line: int) -> float:
    """Distance from a ball point to the ray spanned by an invariant direction."""
    u = np.asarray(u, dtype=float)
    d = line_direction(line)
    s = max(float(u @ d), 0.0)
    return float(np.linalg.norm(u - s * d))


def distance_to_line(x, line: int) -> float:
    """Distance from an ambient state to invariant ray ``line``, in ball coordinates."""
    return distance_to_line_ball(cpt.ball_projection(np.asarray(x, dtype=float)), line)
