"""Adaptive explicit integration with an embedded Dormand-Prince 5(4) pair.

Characteristics
    * Error control per step: the embedded 4th-order estimate must satisfy
      ||err|| <= atol + rtol ||y_new||; otherwise the step is rejected.
    * Step update factor 0.9 (tol/err)^(1/5), clamped to [0.2, 5].
    * First-same-as-last: the 7th stage of an accepted step seeds the next.
    * Stops with a recorded event when the state leaves the field's domain;
      the exit time is localized by bisection on the step interpolant.
    * Fields that expose a region signature (piecewise-linear ramps) get
      their kink crossings localized: a step that changes the signature is
      re-tried at half length until the crossing step is below a floor, and
      the step after a crossing restarts small.
    * Raises StepUnderflow when h < 1e-12 T, NonFiniteState on nan/inf at
      an accepted node.

Between accepted nodes the trajectory interpolates with a cubic Hermite
polynomial through the stored states and right-hand-side values, which is
why a Trajectory keeps the derivative array alongside the states.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    BadParameter,
    DomainViolation,
    NonFiniteState,
    StepUnderflow,
)
from .fields import VectorField

# Dormand-Prince RK5(4)7M tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# b5 - b4: weights of the embedded error estimate.
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
UNDERFLOW_FRACTION = 1e-12
# Step length below which a region-signature crossing is accepted as-is.
KINK_FLOOR = 1e-6
# Fresh step length right after crossing a ramp kink.
KINK_RESTART = 1e-2


@dataclass(eq=False)
class Trajectory:
    """Accepted nodes of one integration run, with Hermite sampling."""

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    rtol: float
    atol: float
    max_step: float
    events: list[tuple[float, str]] = dc_field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def span(self) -> float:
        return self.t_end - self.t0

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def extent(self) -> float:
        """Diameter of the axis-aligned bounding box of the visited states."""
        return float(np.linalg.norm(self.states.max(axis=0) - self.states.min(axis=0)))

    def sample(self, t) -> np.ndarray:
        """Cubic Hermite interpolation at scalar or array times."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if t_arr.min() < self.t0 - 1e-12 or t_arr.max() > self.t_end + 1e-12:
            raise BadParameter(
                f"sample time outside [{self.t0}, {self.t_end}]"
            )
        t_arr = np.clip(t_arr, self.t0, self.t_end)
        idx = np.searchsorted(self.times, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.times) - 2)
        h = self.times[idx + 1] - self.times[idx]
        s = (t_arr - self.times[idx]) / h
        s = s[:, None]
        h = h[:, None]
        y0 = self.states[idx]
        y1 = self.states[idx + 1]
        f0 = self.derivs[idx]
        f1 = self.derivs[idx + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
        return out[0] if np.isscalar(t) or np.ndim(t) == 0 else out


def _hermite(y0, f0, y1, f1, h, s):
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _initial_step(f0, y0, T, max_step, rtol, atol):
    scale = atol + rtol * float(np.linalg.norm(y0))
    speed = float(np.linalg.norm(f0))
    if speed > 0.0:
        h = 0.01 * max(scale, 1e-6) / speed
    else:
        h = T / 100.0
    return min(h, T / 10.0, max_step)


def integrate(
    field: VectorField,
    x0,
    T: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate x' = F(x) from x0 over [0, T].

    Returns the accepted nodes; stops early with a ("domain_exit") event if
    the state leaves the field's domain, the event time bisected onto the
    boundary crossing.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (field.dim,):
        raise BadParameter(f"x0 must have length {field.dim}")
    if not (T > 0.0 and np.isfinite(T)):
        raise BadParameter("T must be positive and finite")
    if not (rtol > 0.0 and atol > 0.0):
        raise BadParameter("tolerances must be positive")
    if not bool(field.domain.contains(x0, pad=1e-12 * max(1.0, float(np.abs(x0).max())))):
        raise DomainViolation("x0 lies outside the field domain")

    region = field.region_index
    f0 = np.asarray(field(x0), dtype=float)
    if not np.all(np.isfinite(f0)):
        raise NonFiniteState("right-hand side not finite at x0")

    ts = [0.0]
    ys = [x0.copy()]
    fs = [f0.copy()]
    events: list[tuple[float, str]] = []

    t = 0.0
    y = x0.copy()
    f = f0
    h = _initial_step(f0, x0, T, max_step, rtol, atol)
    cur_region = region(y) if region is not None else None
    just_crossed = False

    K = np.empty((7, field.dim))
    while t < T:
        h = min(h, T - t, max_step)
        if just_crossed:
            h = min(h, KINK_RESTART)
            just_crossed = False
        if h < UNDERFLOW_FRACTION * T:
            raise StepUnderflow(f"step {h:.3e} below {UNDERFLOW_FRACTION:.0e} T")

        K[0] = f
        bad = False
        for i in range(1, 7):
            yi = y + h * (K[:i].T @ _A[i])
            K[i] = field(yi)
            if not np.all(np.isfinite(K[i])):
                bad = True
                break
        if bad:
            # Overshot into non-finite territory; treat as a hard rejection.
            h *= 0.5
            continue
        y_new = y + h * (K[:6].T @ _A[6])
        err_vec = h * (K.T @ _E)
        err = float(np.linalg.norm(err_vec))
        tol = atol + rtol * float(np.linalg.norm(y_new))

        if not np.isfinite(err):
            h *= 0.5
            continue
        if err > tol:
            factor = max(MIN_FACTOR, SAFETY * (tol / err) ** 0.2)
            h *= factor
            continue

        # Kink localization: shrink steps that jump a ramp-region boundary.
        if region is not None and h > KINK_FLOOR:
            new_region = region(y_new)
            if new_region != cur_region:
                h = max(0.5 * h, KINK_FLOOR)
                continue

        f_new = K[6].copy()  # FSAL: the 7th stage argument is exactly y_new
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))):
            raise NonFiniteState(f"state not finite after t = {t:.6g}")

        inside = bool(field.domain.contains(y_new))
        if not inside:
            # Bisect the Hermite interpolant for the last inside point.
            lo_s, hi_s = 0.0, 1.0
            for _ in range(80):
                mid = 0.5 * (lo_s + hi_s)
                y_mid = _hermite(y, f, y_new, f_new, h, mid)
                if bool(field.domain.contains(y_mid)):
                    lo_s = mid
                else:
                    hi_s = mid
                if (hi_s - lo_s) * h < 1e-14 * max(1.0, abs(t)):
                    break
            t_exit = t + lo_s * h
            y_exit = _hermite(y, f, y_new, f_new, h, lo_s)
            if lo_s > 0.0:
                ts.append(t_exit)
                ys.append(y_exit)
                fs.append(np.asarray(field(y_exit), dtype=float))
            events.append((t_exit, "domain_exit"))
            break

        t += h
        y = y_new
        f = f_new
        ts.append(t)
        ys.append(y.copy())
        fs.append(f.copy())
        if region is not None:
            new_region = region(y)
            if new_region != cur_region:
                cur_region = new_region
                just_crossed = True

        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * (tol / err) ** 0.2))
        h *= factor

    return Trajectory(
        times=np.asarray(ts),
        states=np.asarray(ys),
        derivs=np.asarray(fs),
        rtol=rtol,
        atol=atol,
        max_step=max_step,
        events=events,
    )


def integrate_backward(
    field: VectorField,
    x0,
    T: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_step: float = np.inf,
) -> Trajectory:
    """Negative semi-orbit through x0: times in [-T, 0], ascending.

    Runs the reversed field forward and flips the result, so the returned
    states satisfy x'(t) = F(x(t)) on [-T, 0] with x(0) = x0, and sample()
    works unchanged. A domain exit shows up as a ("domain_exit") event at
    its (negative) time and truncates the reachable window.
    """
    reversed_field = VectorField(
        dim=field.dim,
        rhs=lambda x: -np.asarray(field.rhs(x)),
        domain=field.domain,
        family=field.family,
        region_index=field.region_index,
    )
    back = integrate(reversed_field, x0, T, rtol=rtol, atol=atol, max_step=max_step)
    return Trajectory(
        times=-back.times[::-1],
        states=back.states[::-1].copy(),
        derivs=-back.derivs[::-1],
        rtol=rtol,
        atol=atol,
        max_step=max_step,
        events=[(-t, kind) for (t, kind) in reversed(back.events)],
    )


def flow(field: VectorField, x0, t: float, rtol: float = 1e-8, atol: float = 1e-10,
         max_step: float = np.inf) -> np.ndarray:
    """End state of the (forward or backward) flow through x0 for time t."""
    if t == 0.0:
        return np.asarray(x0, dtype=float).copy()
    if t > 0:
        return integrate(field, x0, t, rtol=rtol, atol=atol, max_step=max_step).final_state
    traj = integrate_backward(field, x0, -t, rtol=rtol, atol=atol, max_step=max_step)
    return traj.states[0]
