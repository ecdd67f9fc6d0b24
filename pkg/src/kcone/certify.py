"""Sampled strong-monotonicity certificates and trajectory decay audits.

The central object is the pairwise margin

    margin(x, y) = (x - y)^T P [F(x) - F(y) + lam (x - y)] / |x - y|^2

for a quadratic cone with form P. A field on whose domain this margin is
negative for every pair of distinct points transports the cone order: the
weighted quadratic form e^{2 lam t} (x(t) - y(t))^T P (x(t) - y(t)) then
falls strictly along any two trajectories, so a difference that starts in
the cone is driven into its interior. The checks here sample that margin;
a Pass is evidence at the sampled resolution, never a proof.

Four conditions:
  * pairwise_lambda: margin < 0 over sampled pairs (certify_sampled).
  * smith_epsilon:   margin <= -epsilon over sampled pairs (certify_smith).
  * linear_lmi:      for F(x) = A x, max eigenvalue of P A + A^T P + lam P
                     is negative (certify_linear).
  * cyclic_feedback: declared coupling signs hold at sampled points
                     (check_cyclic_feedback).

decay_audit complements the sampling: it integrates one pair and verifies
the weighted form actually falls step by step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import DISTINCTNESS_RTOL, OrderClass, QuadraticCone, relate
from .domains import Domain
from .errors import (
    AllPairsDegenerate,
    BadParameter,
    DomainExit,
    DomainViolation,
    IdenticalPoints,
    NonFiniteDerivative,
)
from .fields import VectorField
from .integrators import integrate
from .linalg import sym_eig

# Pairs closer than this fraction of the domain diameter are skipped.
DEGENERATE_PAIR_RTOL = 1e-10
# Roundoff allowance for the decreasing audit sequence: a step may rise by
# at most this fraction of |g| before the audit fails.
DECAY_SLACK_RTOL = 1e-8
# Relative step for the coupling-sign finite differences.
FEEDBACK_FD_RTOL = 1e-5


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one certificate check."""

    condition: str
    lam: float
    n_samples: int
    worst_margin: float
    passed: bool
    epsilon: float | None = None
    epsilon_star: float | None = None
    worst_pair: tuple[np.ndarray, np.ndarray] | None = None
    worst_point: np.ndarray | None = None
    feedback_type: str | None = None
    boundary_band: float = 0.0

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def pair_margin(field: VectorField, cone: QuadraticCone, lam: float, x, y) -> float:
    """Normalized pairwise decay margin for one pair of domain points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (bool(field.domain.contains(x)) and bool(field.domain.contains(y))):
        raise DomainViolation("pair_margin needs both points inside the domain")
    d = x - y
    gap = float(np.linalg.norm(d))
    if gap <= DISTINCTNESS_RTOL * max(float(np.linalg.norm(x)), float(np.linalg.norm(y)), 1.0):
        raise IdenticalPoints("points coincide within the distinctness cutoff")
    drift = np.asarray(field(x)) - np.asarray(field(y)) + lam * d
    return float(d @ (cone.p_matrix @ drift)) / (gap * gap)


def _pair_margins_batch(field, cone, lam, X, Y) -> np.ndarray:
    D = X - Y
    drift = np.asarray(field(X)) - np.asarray(field(Y)) + lam * D
    num = np.einsum("ij,jk,ik->i", D, cone.p_matrix, drift)
    den = np.einsum("ij,ij->i", D, D)
    return num / den


def certify_sampled(
    field: VectorField,
    cone: QuadraticCone,
    lam: float,
    domain: Domain | None = None,
    n_pairs: int = 10_000,
    seed: int = 0,
) -> ConditionReport:
    """Sample the pairwise margin over uniform domain pairs.

    Pairs closer than 1e-10 of the domain diameter are skipped; if every
    pair degenerates the sample is void (AllPairsDegenerate). Pass means
    the worst margin sits strictly below the cone's boundary band.
    """
    if n_pairs < 1:
        raise BadParameter("n_pairs must be at least 1")
    dom = domain if domain is not None else field.domain
    rng = np.random.default_rng(seed)
    X = dom.sample(rng, n_pairs)
    Y = dom.sample(rng, n_pairs)
    gaps = np.linalg.norm(X - Y, axis=1)
    keep = gaps >= DEGENERATE_PAIR_RTOL * dom.diameter()
    if not np.any(keep):
        raise AllPairsDegenerate("all sampled pairs collapsed below the cutoff")
    X, Y = X[keep], Y[keep]
    margins = _pair_margins_batch(field, cone, lam, X, Y)
    if not np.all(np.isfinite(margins)):
        raise NonFiniteDerivative("margin not finite at some sampled pair")
    worst = int(np.argmax(margins))
    worst_margin = float(margins[worst])
    return ConditionReport(
        condition="pairwise_lambda",
        lam=float(lam),
        n_samples=int(X.shape[0]),
        worst_margin=worst_margin,
        passed=worst_margin < -cone.boundary_band,
        worst_pair=(X[worst].copy(), Y[worst].copy()),
        boundary_band=cone.boundary_band,
    )


def certify_smith(
    field: VectorField,
    cone: QuadraticCone,
    lam: float,
    epsilon: float,
    domain: Domain | None = None,
    n_pairs: int = 10_000,
    seed: int = 0,
) -> ConditionReport:
    """Uniform-gap variant: every sampled margin must be <= -epsilon.

    epsilon_star reports the largest epsilon the sample would support.
    """
    if epsilon <= 0.0:
        raise BadParameter("epsilon must be positive")
    base = certify_sampled(field, cone, lam, domain=domain, n_pairs=n_pairs, seed=seed)
    return ConditionReport(
        condition="smith_epsilon",
        lam=base.lam,
        n_samples=base.n_samples,
        worst_margin=base.worst_margin,
        passed=base.worst_margin <= -epsilon,
        epsilon=float(epsilon),
        epsilon_star=-base.worst_margin,
        worst_pair=base.worst_pair,
        boundary_band=cone.boundary_band,
    )


def certify_linear(A, cone: QuadraticCone, lam: float) -> ConditionReport:
    """Exact check for linear fields: max eig(P A + A^T P + lam P) < 0."""
    A = np.asarray(A, dtype=float)
    n = cone.dim
    if A.shape != (n, n):
        raise BadParameter(f"matrix must be {n} x {n}")
    P = cone.p_matrix
    M = P @ A + A.T @ P + lam * P
    w, _ = sym_eig(0.5 * (M + M.T))
    worst = float(w[-1])
    return ConditionReport(
        condition="linear_lmi",
        lam=float(lam),
        n_samples=0,
        worst_margin=worst,
        passed=worst < 0.0,
        boundary_band=cone.boundary_band,
    )


def check_cyclic_feedback(
    components,
    deltas,
    domain: Domain,
    n_samples: int = 1000,
    seed: int = 0,
    fd_step_rel: float = FEEDBACK_FD_RTOL,
) -> ConditionReport:
    """Verify declared coupling signs of a feedback ring by sampling.

    components[i](x_i, x_prev) is the i-th coordinate function of the ring
    (prev meaning i - 1 cyclically); deltas[i] its declared coupling sign.
    At n_samples points, the partial derivative in the coupling slot is
    estimated by central differences with step 1e-5 of the coordinate's
    range; Pass iff delta_i times the estimate is positive everywhere.
    The margin convention matches the other checks: negative is good, so
    worst_margin is the largest value of -delta_i * estimate.
    """
    n = len(components)
    if len(deltas) != n:
        raise BadParameter("one declared sign per component")
    if any(d not in (-1, 1) for d in deltas):
        raise BadParameter("declared signs must be -1 or +1")
    if n_samples < 1:
        raise BadParameter("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    X = domain.sample(rng, n_samples)
    widths = domain.widths()
    worst_margin = -np.inf
    worst_point = None
    for i in range(n):
        prev = (i - 1) % n
        h = fd_step_rel * float(widths[prev])
        xi = X[:, i]
        xp = X[:, prev]
        est = (np.asarray(components[i](xi, xp + h)) - np.asarray(components[i](xi, xp - h))) / (2.0 * h)
        if not np.all(np.isfinite(est)):
            raise NonFiniteDerivative(f"coupling derivative of component {i} not finite")
        margins = -deltas[i] * est
        j = int(np.argmax(margins))
        if float(margins[j]) > worst_margin:
            worst_margin = float(margins[j])
            worst_point = X[j].copy()
    sign = int(np.prod(np.asarray(deltas)))
    return ConditionReport(
        condition="cyclic_feedback",
        lam=0.0,
        n_samples=int(n_samples),
        worst_margin=worst_margin,
        passed=worst_margin < 0.0,
        worst_point=worst_point,
        feedback_type="negative" if sign < 0 else "positive",
    )


def lambda_grid_search(
    field: VectorField,
    cone: QuadraticCone,
    grid,
    domain: Domain | None = None,
    n_pairs: int = 10_000,
    seed: int = 0,
) -> list[ConditionReport]:
    """certify_sampled at each rate in grid; one report per value."""
    return [
        certify_sampled(field, cone, lam=float(lam), domain=domain, n_pairs=n_pairs, seed=seed)
        for lam in grid
    ]


# ---- decay audit ----


class _ProductDomain:
    """Two stacked copies of one domain, for the coupled pair system."""

    def __init__(self, inner: Domain):
        self.inner = inner
        self.dim = 2 * inner.dim

    def contains(self, z, pad: float = 0.0):
        n = self.inner.dim
        return self.inner.contains(z[..., :n], pad=pad) & self.inner.contains(
            z[..., n:], pad=pad
        )

    def diameter(self) -> float:
        return float(np.sqrt(2.0)) * self.inner.diameter()

    def widths(self) -> np.ndarray:
        w = self.inner.widths()
        return np.concatenate([w, w])

    def center(self) -> np.ndarray:
        c = self.inner.center()
        return np.concatenate([c, c])

    def sample(self, rng, m):
        a = self.inner.sample(rng, m)
        b = self.inner.sample(rng, m)
        return np.concatenate([a, b], axis=1)


def _coupled_field(field: VectorField) -> VectorField:
    n = field.dim

    def rhs(z):
        out = np.empty_like(z)
        out[..., :n] = field.rhs(z[..., :n])
        out[..., n:] = field.rhs(z[..., n:])
        return out

    region = None
    if field.region_index is not None:
        region = lambda z: (field.region_index(z[:n]), field.region_index(z[n:]))

    return VectorField(
        dim=2 * n,
        rhs=rhs,
        domain=_ProductDomain(field.domain),
        family=field.family,
        region_index=region,
    )


@dataclass(frozen=True)
class DecayAudit:
    """Step-by-step record of the weighted quadratic form along one pair."""

    times: np.ndarray
    values: np.ndarray
    lam: float
    monotone_ok: bool
    worst_step_slack: float
    started_ordered: bool
    interior_after_start: bool | None
    passed: bool
    slack_rtol: float = DECAY_SLACK_RTOL


def decay_audit(
    field: VectorField,
    cone: QuadraticCone,
    lam: float,
    x0,
    y0,
    T: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_step: float = np.inf,
) -> DecayAudit:
    """Integrate the pair (x0, y0) and track g(t) = e^{2 lam t} V(x - y).

    The two trajectories run as one coupled system, so they share accepted
    steps exactly. Pass requires g to fall: no step may rise by more than
    the roundoff allowance 1e-8 * |g| (a tiny step's true decrease can sit
    below roundoff, so the allowance is a noise band, not a minimum drop),
    the run as a whole must end strictly below its start, and, when the
    pair starts ordered (V <= 0), the difference must sit strictly inside
    the cone (V < 0) at every later node. Raises DomainExit if either
    trajectory leaves the domain before T.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if x0.shape != (field.dim,) or y0.shape != (field.dim,):
        raise BadParameter(f"states must have length {field.dim}")
    gap = float(np.linalg.norm(x0 - y0))
    if gap <= DISTINCTNESS_RTOL * max(float(np.linalg.norm(x0)), float(np.linalg.norm(y0)), 1.0):
        raise IdenticalPoints("audit pair coincides within the distinctness cutoff")
    coupled = _coupled_field(field)
    traj = integrate(coupled, np.concatenate([x0, y0]), T, rtol=rtol, atol=atol, max_step=max_step)
    if traj.events:
        t_ev, kind = traj.events[0]
        raise DomainExit(f"pair left the domain at t = {t_ev:.6g} ({kind})")

    n = field.dim
    diffs = traj.states[:, :n] - traj.states[:, n:]
    V = np.einsum("ij,jk,ik->i", diffs, cone.p_matrix, diffs)
    g = np.exp(2.0 * lam * traj.times) * V

    rises = g[1:] - g[:-1]
    allowance = DECAY_SLACK_RTOL * np.abs(g[:-1])
    scale = np.maximum(np.abs(g[:-1]), np.finfo(float).tiny)
    monotone_ok = bool(np.all(rises <= allowance)) and bool(g[-1] < g[0])
    # Most positive relative rise; anything above slack_rtol fails.
    worst = float(np.max(rises / scale)) if len(rises) else 0.0

    started_ordered = V[0] <= 0.0
    interior_after = None
    if started_ordered:
        interior_after = bool(np.all(V[1:] < 0.0))
    passed = monotone_ok and (interior_after if started_ordered else True)

    return DecayAudit(
        times=traj.times.copy(),
        values=g,
        lam=float(lam),
        monotone_ok=monotone_ok,
        worst_step_slack=worst,
        started_ordered=bool(started_ordered),
        interior_after_start=interior_after,
        passed=bool(passed),
    )


def ordered_pair_transport(
    field: VectorField,
    cone: QuadraticCone,
    x0,
    y0,
    T: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> list[OrderClass]:
    """Order classes of (x(t), y(t)) at every accepted node after t = 0."""
    coupled = _coupled_field(field)
    traj = integrate(coupled, np.concatenate([np.asarray(x0, float), np.asarray(y0, float)]), T,
                     rtol=rtol, atol=atol)
    if traj.events:
        raise DomainExit("pair left the domain during transport check")
    n = field.dim
    out = []
    for k in range(1, len(traj.times)):
        out.append(relate(cone, traj.states[k, :n], traj.states[k, n:]).order)
    return out
