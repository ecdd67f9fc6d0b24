"""Limit-set estimation, orbit classification, and recurrence analytics.

Everything here works on finite data: a long trajectory stands in for the
flow, its tail stands in for the omega-limit set, and each conclusion is a
verdict at a stated resolution. The classification surrogates mirror the
structure theory for flows monotone with respect to a rank-k cone: a tail
whose points are pairwise ordered, a tail collapsed onto equilibria, or a
mixed tail whose ordered core the rest may connect to.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cones import (
    Cone,
    OrderClass,
    Projector,
    QuadraticCone,
    make_projector,
    relate,
)
from .errors import (
    BadParameter,
    NotConverged,
    PreconditionOrdered,
    PreconditionUnordered,
    RankNotTwo,
    TooFewPoints,
    TrajectoryTooShort,
)
from .fields import Equilibrium, VectorField
from .integrators import Trajectory, integrate, integrate_backward

# Two states closer than this (absolute, relative to max(1, scale)) are one
# point for pair scans.
PAIR_DISTINCT_TOL = 1e-12
# Default relative tolerance of the tail-convergence test.
OMEGA_TOL_RTOL = 1e-4
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


# ---- omega-limit estimate ----


@dataclass(frozen=True, eq=False)
class OmegaEstimate:
    points: np.ndarray
    times: np.ndarray
    window: tuple[float, float]
    spacing: float
    hausdorff_gap: float
    converged: bool
    tol: float


def hausdorff_distance(A, B) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# Dense samples per half-window for the curve-to-curve gap.
_GAP_SAMPLES = 2048
_GAP_CHUNK = 256
# Candidate nodes per query for segment refinement. A curve that passes
# the same region several times needs more than the single nearest node:
# the best segment may hang off a node from another pass.
_GAP_NEIGHBORS = 8


def _directed_curve_gap(A: np.ndarray, B: np.ndarray) -> float:
    """max over a in A of the distance from a to the polyline through B."""
    worst = 0.0
    m = B.shape[0]
    k = min(_GAP_NEIGHBORS, m)
    for lo in range(0, A.shape[0], _GAP_CHUNK):
        Q = A[lo:lo + _GAP_CHUNK]
        d2 = ((Q[:, None, :] - B[None, :, :]) ** 2).sum(axis=2)
        near = np.argpartition(d2, k - 1, axis=1)[:, :k]
        best = np.sqrt(np.take_along_axis(d2, near, axis=1).min(axis=1))
        # Project onto the polyline segments adjacent to each candidate
        # node; on a smooth curve this removes the node-spacing artifact.
        for j0, j1 in (
            (np.maximum(near - 1, 0), near),
            (near, np.minimum(near + 1, m - 1)),
        ):
            p = B[j0]
            w = B[j1] - p
            ww = (w * w).sum(axis=2)
            ww[ww == 0.0] = 1.0
            t = np.clip(((Q[:, None, :] - p) * w).sum(axis=2) / ww, 0.0, 1.0)
            foot = p + t[:, :, None] * w
            gap = np.linalg.norm(Q[:, None, :] - foot, axis=2).min(axis=1)
            best = np.minimum(best, gap)
        worst = max(worst, float(best.max()))
    return worst


def _half_window_gap(traj: Trajectory, t_start: float, mid: float) -> float:
    """Hausdorff distance between the curve segments [t_start, mid] and
    [mid, t_end], each sampled densely through the stored interpolant."""
    ta = np.linspace(t_start, mid, _GAP_SAMPLES)
    tb = np.linspace(mid, traj.t_end, _GAP_SAMPLES)
    A = traj.sample(ta)
    B = traj.sample(tb)
    return max(_directed_curve_gap(A, B), _directed_curve_gap(B, A))


def estimate_omega(
    traj: Trajectory,
    window_fraction: float = 0.5,
    spacing: float = 0.1,
    tol_rel: float = OMEGA_TOL_RTOL,
) -> OmegaEstimate:
    """Tail sample of a trajectory as a stand-in for its omega-limit set.

    The last window_fraction of the run is sampled at (approximately)
    uniform spacing; each sample is the nearest stored state, so the
    estimate is a subset of the trajectory's accepted nodes. Convergence
    is declared when the Hausdorff distance between the window's two
    half-curves (sampled densely through the interpolant, with a polyline
    projection so the measure is of the curves rather than of any finite
    sampling of them) is at most tol_rel times the trajectory extent: a
    tail that has stopped moving traces the same set in both halves.
    Raises TrajectoryTooShort unless the run covers two windows.
    """
    if not (0.0 < window_fraction <= 0.5):
        raise BadParameter("window_fraction must lie in (0, 0.5]")
    span = traj.span()
    window = window_fraction * span
    if span < 2.0 * window - 1e-12 or window <= 0.0:
        raise TrajectoryTooShort("trajectory does not cover two analysis windows")
    if not (0.0 < spacing <= window):
        raise BadParameter("spacing must be positive and at most the window")

    t_start = traj.t_end - window
    n_grid = int(np.floor(window / spacing)) + 1
    grid = t_start + spacing * np.arange(n_grid)
    idx = np.searchsorted(traj.times, grid)
    idx = np.clip(idx, 0, len(traj.times) - 1)
    left = np.clip(idx - 1, 0, len(traj.times) - 1)
    use_left = np.abs(traj.times[left] - grid) < np.abs(traj.times[idx] - grid)
    idx = np.where(use_left, left, idx)
    idx = np.unique(idx)

    points = traj.states[idx].copy()
    times = traj.times[idx].copy()
    mid = traj.t_end - 0.5 * window
    gap = _half_window_gap(traj, t_start, mid)
    tol = tol_rel * traj.extent()
    return OmegaEstimate(
        points=points,
        times=times,
        window=(float(t_start), float(traj.t_end)),
        spacing=float(spacing),
        hausdorff_gap=gap,
        converged=bool(gap <= tol),
        tol=float(tol),
    )


# ---- orbit classification ----


class OrbitClass(str, Enum):
    TRIVIAL = "trivial"
    PSEUDO_ORDERED = "pseudo_ordered"  # some pair along the orbit is ordered
    UNORDERED = "unordered"  # every sampled pair is unordered


@dataclass(frozen=True)
class OrbitClassification:
    kind: OrbitClass
    witness_times: tuple[float, float] | None
    witness_margin: float | None
    n_states: int


def classify_orbit(traj: Trajectory, cone: Cone, max_states: int = 512) -> OrbitClassification:
    """Scan pairs of sampled orbit states for an ordered pair.

    The first pair (in time order) whose difference lies in the cone, the
    boundary band included, makes the orbit pseudo-ordered and is reported
    as the witness. If every distinct pair is unordered the orbit counts as
    unordered; if all states coincide the orbit is trivial.
    """
    m_all = len(traj.times)
    if m_all < 10:
        raise TooFewPoints("need at least 10 stored states to classify")
    take = np.unique(np.linspace(0, m_all - 1, min(max_states, m_all)).astype(int))
    S = traj.states[take]
    ts = traj.times[take]
    m = len(take)

    scale = max(1.0, float(np.abs(S).max()))
    span = float(np.linalg.norm(S.max(axis=0) - S.min(axis=0)))
    if span <= PAIR_DISTINCT_TOL * scale:
        return OrbitClassification(
            kind=OrbitClass.TRIVIAL, witness_times=None, witness_margin=None, n_states=m
        )

    iu, ju = np.triu_indices(m, k=1)
    D = S[iu] - S[ju]
    gaps = np.linalg.norm(D, axis=1)
    distinct = gaps > PAIR_DISTINCT_TOL * scale
    margins = np.full(len(iu), np.inf)
    margins[distinct] = cone.margin_many(D[distinct])
    ordered = margins <= cone.boundary_band
    if np.any(ordered):
        flat = int(np.argmax(ordered))  # first in (i, j) time order
        return OrbitClassification(
            kind=OrbitClass.PSEUDO_ORDERED,
            witness_times=(float(ts[iu[flat]]), float(ts[ju[flat]])),
            witness_margin=float(margins[flat]),
            n_states=m,
        )
    return OrbitClassification(
        kind=OrbitClass.UNORDERED, witness_times=None, witness_margin=None, n_states=m
    )


# ---- ordering audit ----


@dataclass(frozen=True, eq=False)
class OrderingAudit:
    n_points: int
    n_pairs: int
    ordered_fraction: float
    min_margin: float | None
    max_margin: float | None
    worst_unordered: tuple[int, int, float] | None
    ordered: bool
    trivial: bool


def audit_ordering(points, cone: Cone) -> OrderingAudit:
    """Pairwise order census of a finite point set.

    Verdict ordered means every distinct pair is ordered, boundary band
    included. Fewer than two distinct points make the audit trivially
    ordered (flag trivial); an empty set raises TooFewPoints.
    """
    if isinstance(points, OmegaEstimate):
        points = points.points
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] == 0:
        raise TooFewPoints("cannot audit an empty point set")
    m = P.shape[0]
    if m < 2:
        return OrderingAudit(
            n_points=m, n_pairs=0, ordered_fraction=1.0, min_margin=None,
            max_margin=None, worst_unordered=None, ordered=True, trivial=True,
        )
    scale = max(1.0, float(np.abs(P).max()))
    iu, ju = np.triu_indices(m, k=1)
    D = P[iu] - P[ju]
    gaps = np.linalg.norm(D, axis=1)
    distinct = gaps > PAIR_DISTINCT_TOL * scale
    if not np.any(distinct):
        return OrderingAudit(
            n_points=m, n_pairs=0, ordered_fraction=1.0, min_margin=None,
            max_margin=None, worst_unordered=None, ordered=True, trivial=True,
        )
    margins = cone.margin_many(D[distinct])
    ii = iu[distinct]
    jj = ju[distinct]
    ordered_mask = margins <= cone.boundary_band
    frac = float(np.mean(ordered_mask))
    worst = None
    if not np.all(ordered_mask):
        w = int(np.argmax(margins))
        worst = (int(ii[w]), int(jj[w]), float(margins[w]))
    return OrderingAudit(
        n_points=m,
        n_pairs=int(len(margins)),
        ordered_fraction=frac,
        min_margin=float(margins.min()),
        max_margin=float(margins.max()),
        worst_unordered=worst,
        ordered=bool(np.all(ordered_mask)),
        trivial=False,
    )


def ordered_pair_matrix(points, cone: Cone) -> np.ndarray:
    """Boolean matrix: entry (i, j) true when points i and j are ordered.

    Coincident points count as ordered (a point is ordered with itself).
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m = P.shape[0]
    scale = max(1.0, float(np.abs(P).max()))
    M = np.eye(m, dtype=bool)
    iu, ju = np.triu_indices(m, k=1)
    D = P[iu] - P[ju]
    gaps = np.linalg.norm(D, axis=1)
    ordered = np.ones(len(iu), dtype=bool)
    distinct = gaps > PAIR_DISTINCT_TOL * scale
    ordered[distinct] = cone.margin_many(D[distinct]) <= cone.boundary_band
    M[iu, ju] = ordered
    M[ju, iu] = ordered
    return M


# ---- trichotomy ----


class LimitSetBranch(str, Enum):
    ORDERED = "ordered"
    UNORDERED_EQUILIBRIA = "unordered_equilibria"
    ORDERED_HOMOCLINIC_SUSPECTED = "ordered_homoclinic_suspected"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True, eq=False)
class TrichotomyReport:
    branch: LimitSetBranch
    ordered_fraction: float
    equilibria_hits: int
    n_points: int
    core_size: int
    dist_eq: float
    flagged_not_converged: bool
    backward_surrogate_used: bool
    degenerate: bool
    audit: OrderingAudit


def _equilibrium_points(equilibria) -> np.ndarray:
    pts = []
    for e in equilibria:
        pts.append(e.point if isinstance(e, Equilibrium) else np.asarray(e, dtype=float))
    return np.array(pts) if pts else np.empty((0, 0))


def trichotomy_report(
    omega: OmegaEstimate,
    equilibria,
    cone: Cone,
    field: VectorField | None = None,
    dist_eq: float = 1e-6,
    backward_T: float = 5.0,
    approach_tol: float | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> TrichotomyReport:
    """Sort an omega-limit estimate into one of three structural branches.

    ordered: every pair of estimate points is ordered. unordered_equilibria:
    no pair is ordered and every point sits within dist_eq of a found
    equilibrium. ordered_homoclinic_suspected: the audit is mixed, but the
    points ordered against the whole estimate form a nonempty core and
    every non-core point flows backward (over backward_T) to within
    approach_tol of an equilibrium near that core; this is only ever a
    suspicion at finite resolution. Everything else is undetermined. A
    non-converged estimate never raises; the report carries a flag.
    """
    pts = omega.points
    n_pts = pts.shape[0]
    if n_pts == 0:
        raise TooFewPoints("empty limit-set estimate")
    eq_pts = _equilibrium_points(equilibria)

    def near_equilibrium(p, tol):
        if eq_pts.shape[0] == 0:
            return False
        return bool(np.min(np.linalg.norm(eq_pts - p, axis=1)) <= tol)

    hits = sum(1 for p in pts if near_equilibrium(p, dist_eq))
    audit = audit_ordering(pts, cone)
    flagged = not omega.converged
    backward_used = False

    if audit.trivial:
        branch = (
            LimitSetBranch.UNORDERED_EQUILIBRIA
            if hits == n_pts
            else LimitSetBranch.ORDERED
        )
        return TrichotomyReport(
            branch=branch, ordered_fraction=audit.ordered_fraction,
            equilibria_hits=hits, n_points=n_pts, core_size=n_pts,
            dist_eq=dist_eq, flagged_not_converged=flagged,
            backward_surrogate_used=False, degenerate=True, audit=audit,
        )

    if audit.ordered:
        branch = LimitSetBranch.ORDERED
        core_size = n_pts
    elif audit.ordered_fraction == 0.0 and hits == n_pts:
        branch = LimitSetBranch.UNORDERED_EQUILIBRIA
        core_size = 0
    else:
        # Mixed audit. Look for an ordered core and backward connections.
        M = ordered_pair_matrix(pts, cone)
        core_mask = M.all(axis=1)
        core_size = int(np.count_nonzero(core_mask))
        branch = LimitSetBranch.UNDETERMINED
        if 0 < core_size < n_pts and field is not None and eq_pts.shape[0] > 0:
            backward_used = True
            tol = approach_tol if approach_tol is not None else 1e-2 * max(
                1.0, float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
            )
            core_pts = pts[core_mask]
            # Equilibria that sit inside (near) the ordered core.
            core_eqs = [
                q for q in eq_pts
                if np.min(np.linalg.norm(core_pts - q, axis=1)) <= tol
            ]
            if core_eqs:
                all_connect = True
                for p in pts[~core_mask]:
                    try:
                        back = integrate_backward(field, p, backward_T, rtol=rtol, atol=atol)
                    except Exception:
                        all_connect = False
                        break
                    endpoint = back.states[0]
                    if not any(
                        float(np.linalg.norm(endpoint - q)) <= tol for q in core_eqs
                    ):
                        all_connect = False
                        break
                if all_connect:
                    branch = LimitSetBranch.ORDERED_HOMOCLINIC_SUSPECTED

    return TrichotomyReport(
        branch=branch,
        ordered_fraction=audit.ordered_fraction,
        equilibria_hits=hits,
        n_points=n_pts,
        core_size=core_size,
        dist_eq=dist_eq,
        flagged_not_converged=flagged,
        backward_surrogate_used=backward_used,
        degenerate=False,
        audit=audit,
    )


# ---- periodic orbit detection (rank 2) ----


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    period: float
    times: np.ndarray
    states: np.ndarray
    closure_gap: float
    representative: np.ndarray

    def loop_diameter(self) -> float:
        return float(np.linalg.norm(self.states.max(axis=0) - self.states.min(axis=0)))


def projection_separation(points, projector: Projector) -> float:
    """min |proj(p) - proj(q)| / |p - q| over distinct pairs; 1.0 if none."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m = P.shape[0]
    if m < 2:
        return 1.0
    scale = max(1.0, float(np.abs(P).max()))
    iu, ju = np.triu_indices(m, k=1)
    D = P[iu] - P[ju]
    gaps = np.linalg.norm(D, axis=1)
    distinct = gaps > PAIR_DISTINCT_TOL * scale
    if not np.any(distinct):
        return 1.0
    proj_gaps = np.linalg.norm(D[distinct] @ projector.matrix.T, axis=1)
    return float(np.min(proj_gaps / gaps[distinct]))


def _golden_min(fn, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    t = 0.5 * (a + b)
    return t, fn(t)


def detect_periodic(
    omega: OmegaEstimate,
    traj: Trajectory,
    cone: QuadraticCone,
    field: VectorField,
    tol_per: float = 1e-3,
    representative_index: int = -1,
    n_loop_points: int = 256,
) -> PeriodicOrbit | None:
    """Look for a closed loop in a converged rank-2 tail.

    The tail is projected onto the cone's 2-dimensional inner plane, where
    ordered sets embed injectively. Walking backward from the newest tail
    point, the previous pass of the projected curve through a detection
    disk around it (with matching direction of travel) gives a coarse
    return time; a golden-section refinement of the full-space return
    distance then pins the period. Returns None when the tail has no
    detectable excursion-and-return structure; a closure gap above
    tol_per times the loop diameter also returns None.
    """
    if not isinstance(cone, QuadraticCone) or cone.rank_k != 2:
        raise RankNotTwo("periodic detection needs a rank-2 quadratic cone")
    if not omega.converged:
        raise NotConverged("omega estimate failed its convergence test")
    proj = make_projector(cone)
    pts = omega.points
    m = pts.shape[0]
    if m < 4:
        return None
    rep = int(representative_index if representative_index >= 0 else m + representative_index)
    if not (0 <= rep < m):
        raise BadParameter("representative index outside the tail")

    U = proj.coords(pts)
    diam = float(np.linalg.norm(U.max(axis=0) - U.min(axis=0)))
    scale = max(1.0, float(np.abs(pts).max()))
    if diam <= 1e-8 * scale:
        return None  # tail collapsed to a point; nothing to close

    p = pts[rep]
    t_p = float(omega.times[rep])
    u_p = U[rep]
    spacings = np.linalg.norm(np.diff(U, axis=0), axis=1)
    r_detect = max(2.0 * float(spacings.max()), tol_per * diam)
    if r_detect >= 0.45 * diam:
        r_detect = 0.45 * diam

    v_p = proj.coords(np.asarray(field(p)))
    dist = np.linalg.norm(U[: rep + 1] - u_p, axis=1)
    inside = dist < r_detect
    # Skip the pass containing the representative itself, then find the
    # nearest earlier pass through the disk with matching travel direction.
    j = rep
    while j >= 0 and inside[j]:
        j -= 1
    candidate = None
    while j >= 0:
        if inside[j]:
            best, best_d = j, dist[j]
            while j >= 0 and inside[j]:
                if dist[j] < best_d:
                    best, best_d = j, dist[j]
                j -= 1
            v_j = proj.coords(np.asarray(field(pts[best])))
            if float(v_j @ v_p) > 0.0:
                candidate = best
                break
        else:
            j -= 1
    if candidate is None:
        return None

    T_coarse = t_p - float(omega.times[candidate])
    if T_coarse <= 0.0:
        return None

    # Refine on a fresh integration from the representative.
    speed = max(float(np.linalg.norm(np.asarray(field(p)))), 1e-12)
    bracket = max(2.0 * omega.spacing, 2.0 * r_detect / speed)
    T_hi = T_coarse + bracket
    fresh = integrate(field, p, T_hi, rtol=traj.rtol, atol=traj.atol, max_step=traj.max_step)
    if fresh.events:
        return None

    def gap_at(T):
        return float(np.linalg.norm(fresh.sample(T) - p))

    lo = max(T_coarse - bracket, 0.5 * T_coarse)
    T_star, gap = _golden_min(gap_at, lo, T_hi, tol=1e-10 * max(1.0, T_coarse))

    loop_times = np.linspace(0.0, T_star, n_loop_points)
    loop_states = fresh.sample(loop_times)
    loop_diam = float(np.linalg.norm(loop_states.max(axis=0) - loop_states.min(axis=0)))
    if not (gap <= tol_per * max(loop_diam, 1e-300)):
        return None
    return PeriodicOrbit(
        period=float(T_star),
        times=loop_times,
        states=loop_states,
        closure_gap=float(gap),
        representative=p.copy(),
    )


# ---- chain recurrence ----


@dataclass(frozen=True)
class ChainResult:
    index: int
    success: bool
    hops: tuple[tuple[float, float], ...]  # (duration, landing gap)


def chain_check(
    points,
    field: VectorField,
    eps: float,
    r: float,
    t_max: float | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    max_hops: int | None = None,
) -> list[ChainResult]:
    """Try to close an (eps, r)-chain from each point back to itself.

    A chain hop flows for at least r and must land within eps of the next
    chain point. The search is modest by design: first a single hop back
    to the start (scanning flow times in [r, t_max] for a return), then a
    greedy multi-hop walk that after each r-length hop jumps to the nearest
    supplied point within eps. Failure means this search failed, not that
    no chain exists.
    """
    if eps <= 0 or r <= 0:
        raise BadParameter("eps and r must be positive")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m = P.shape[0]
    horizon = t_max if t_max is not None else 10.0 * r
    if horizon < r:
        raise BadParameter("t_max must be at least r")
    cap = max_hops if max_hops is not None else m + 2
    results: list[ChainResult] = []

    for i in range(m):
        y = P[i]
        traj = integrate(field, y, horizon, rtol=rtol, atol=atol)
        ts = traj.times
        mask = ts >= r
        success = False
        hops: tuple[tuple[float, float], ...] = ()
        if np.any(mask):
            d = np.linalg.norm(traj.states[mask] - y, axis=1)
            k = int(np.argmin(d))
            t_cand = float(ts[mask][k])
            # Polish the return time on the interpolant.
            lo = max(r, t_cand - 0.5)
            hi = min(float(ts[-1]), t_cand + 0.5)
            if hi > lo:
                t_ref, d_ref = _golden_min(
                    lambda t: float(np.linalg.norm(traj.sample(t) - y)), lo, hi, tol=1e-9
                )
            else:
                t_ref, d_ref = t_cand, float(d[k])
            if d_ref < eps:
                success = True
                hops = ((float(t_ref), float(d_ref)),)
        if not success and m > 1:
            cur = y
            walked: list[tuple[float, float]] = []
            for _ in range(cap):
                z = integrate(field, cur, r, rtol=rtol, atol=atol).final_state
                back_gap = float(np.linalg.norm(z - y))
                if back_gap < eps and walked:
                    walked.append((r, back_gap))
                    success = True
                    hops = tuple(walked)
                    break
                gaps = np.linalg.norm(P - z, axis=1)
                j = int(np.argmin(gaps))
                if float(gaps[j]) >= eps:
                    break
                walked.append((r, float(gaps[j])))
                cur = P[j]
        results.append(ChainResult(index=i, success=success, hops=hops))
    return results


# ---- persistence windows ----


@dataclass(frozen=True)
class WindowResult:
    value: float
    truncated: bool
    backward_exit: bool
    series: tuple[tuple[float, float], ...] | None = None


def _window_scan(field, moving, fixed, cone, t_max, dt, want_unordered, rtol, atol):
    """Largest t with the required relation on the grid s in [-t, t]."""
    fwd = integrate(field, moving, t_max, rtol=rtol, atol=atol)
    bwd = integrate_backward(field, moving, t_max, rtol=rtol, atol=atol)
    fwd_reach = fwd.t_end
    bwd_reach = -bwd.t0
    backward_exit = bool(bwd.events)
    reach = min(fwd_reach, bwd_reach, t_max)

    k = 1
    value = 0.0
    while k * dt <= reach + 1e-12:
        s = min(k * dt, reach)
        ok = True
        for state in (fwd.sample(min(s, fwd_reach)), bwd.sample(max(-s, bwd.t0))):
            rel = relate(cone, state, fixed)
            is_unordered = rel.order is OrderClass.UNORDERED
            if is_unordered != want_unordered:
                ok = False
                break
        if not ok:
            break
        value = s
        k += 1
    truncated = value >= reach - 1e-12 and reach >= t_max - 1e-12
    return WindowResult(value=value, truncated=bool(truncated), backward_exit=backward_exit)


def unordered_window(
    field: VectorField,
    a,
    b,
    cone: Cone,
    t_max: float,
    dt: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> WindowResult:
    """How long the pair (flow(a, s), b) stays unordered for s in [-t, t].

    Scans the grid s = +-dt, +-2 dt, ... and returns the largest covered t,
    truncated at t_max (flag truncated). A backward domain exit limits the
    reachable window and is flagged. Requires the pair to start unordered.
    """
    if not (dt > 0.0 and dt <= t_max):
        raise BadParameter("need 0 < dt <= t_max")
    if relate(cone, np.asarray(a, float), np.asarray(b, float)).is_ordered:
        raise PreconditionOrdered("pair starts ordered; unordered window undefined")
    return _window_scan(field, np.asarray(a, float), np.asarray(b, float), cone,
                        t_max, dt, want_unordered=True, rtol=rtol, atol=atol)


def ordered_window(
    field: VectorField,
    a,
    b,
    cone: Cone,
    t_max: float,
    dt: float,
    push_times=None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> WindowResult:
    """How long the pair (a, flow(b, s)) stays ordered for s in [-t, t].

    Same grid scan as unordered_window with the roles flipped: the second
    point flows, the first stays put, and the relation must stay ordered.
    When push_times is given, the window is re-evaluated after pushing both
    points forward by each listed time; along a trajectory pair this series
    should never decrease, which makes it a useful monotonicity diagnostic.
    """
    if not (dt > 0.0 and dt <= t_max):
        raise BadParameter("need 0 < dt <= t_max")
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if not relate(cone, a, b).is_ordered:
        raise PreconditionUnordered("pair starts unordered; ordered window undefined")
    base = _window_scan(field, b, a, cone, t_max, dt, want_unordered=False,
                        rtol=rtol, atol=atol)
    series = None
    if push_times is not None:
        rows = []
        for tau in push_times:
            tau = float(tau)
            if tau == 0.0:
                rows.append((0.0, base.value))
                continue
            a_t = integrate(field, a, tau, rtol=rtol, atol=atol).final_state
            b_t = integrate(field, b, tau, rtol=rtol, atol=atol).final_state
            pushed = _window_scan(field, b_t, a_t, cone, t_max, dt,
                                  want_unordered=False, rtol=rtol, atol=atol)
            rows.append((tau, pushed.value))
        series = tuple(rows)
    return WindowResult(
        value=base.value, truncated=base.truncated,
        backward_exit=base.backward_exit, series=series,
    )
