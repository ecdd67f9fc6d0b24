"""Deterministic run reports and plot-data CSV sidecars.

A report file holds two top-level objects: "report", which depends only on
the scenario content, seed, and tool version, and "meta", which carries the
timestamp and wall time. Byte-for-byte reproducibility of the "report"
object for a fixed scenario and seed is a contract; everything that varies
run to run stays in "meta". CSV numbers are written with 17 significant
digits so a round-trip through text is exact for doubles.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np

from ._version import __version__
from .certify import (
    certify_linear,
    certify_sampled,
    certify_smith,
    check_cyclic_feedback,
    lambda_grid_search,
)
from .cones import QuadraticCone, make_projector
from .errors import KconeError
from .fields import default_equilibrium_seeds, find_equilibria
from .integrators import integrate
from .limitsets import (
    LimitSetBranch,
    OrbitClass,
    chain_check,
    classify_orbit,
    detect_periodic,
    estimate_omega,
    projection_separation,
    trichotomy_report,
)
from .scenario import Scenario, scenario_digest

REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "kcone run report",
    "type": "object",
    "required": ["report", "meta"],
    "properties": {
        "report": {
            "type": "object",
            "required": ["tool", "scenario_digest", "seed"],
            "properties": {
                "tool": {
                    "type": "object",
                    "required": ["name", "version"],
                    "properties": {
                        "name": {"type": "string"},
                        "version": {"type": "string"},
                    },
                },
                "scenario_digest": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                "seed": {"type": "integer"},
                "certificates": {"type": "array", "items": {"type": "object"}},
                "orbits": {"type": "array", "items": {"type": "object"}},
                "incomplete": {"type": "boolean"},
            },
        },
        "meta": {
            "type": "object",
            "required": ["timestamp"],
            "properties": {
                "timestamp": {"type": "string"},
                "wall_time_s": {"type": "number"},
            },
        },
    },
}


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def worker_count() -> int:
    """Worker cap from KCONE_THREADS; 1 (serial) when unset or invalid."""
    raw = os.environ.get("KCONE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _condition_dict(rep) -> dict:
    out = {
        "condition": rep.condition,
        "lambda": rep.lam,
        "n_samples": rep.n_samples,
        "worst_margin": rep.worst_margin,
        "verdict": rep.verdict,
        "tolerances": {"boundary_band": rep.boundary_band},
    }
    if rep.epsilon is not None:
        out["epsilon"] = rep.epsilon
    if rep.epsilon_star is not None:
        out["epsilon_star"] = rep.epsilon_star
    if rep.worst_pair is not None:
        out["worst_pair"] = [_jsonable(rep.worst_pair[0]), _jsonable(rep.worst_pair[1])]
    if rep.worst_point is not None:
        out["worst_point"] = _jsonable(rep.worst_point)
    if rep.feedback_type is not None:
        out["feedback_type"] = rep.feedback_type
    return out


def run_certify(scn: Scenario) -> dict:
    """Run every certificate check the scenario supports; collect reports."""
    reports = []
    quadratic = isinstance(scn.cone, QuadraticCone)
    if quadratic and scn.lambda_grid is not None:
        lo, hi, step = scn.lambda_grid
        grid = np.arange(lo, hi + 0.5 * step, step)
        reports.extend(
            lambda_grid_search(
                scn.field, scn.cone, grid, n_pairs=scn.pairs, seed=scn.seed
            )
        )
    elif quadratic and scn.lam is not None:
        reports.append(
            certify_sampled(
                scn.field, scn.cone, scn.lam, n_pairs=scn.pairs, seed=scn.seed
            )
        )
    if quadratic and scn.lam is not None and scn.field.family == "linear":
        A = scn.field.jacobian(np.zeros(scn.field.dim))
        reports.append(certify_linear(A, scn.cone, scn.lam))
    if quadratic and scn.lam is not None and scn.epsilon is not None:
        reports.append(
            certify_smith(
                scn.field, scn.cone, scn.lam, scn.epsilon, n_pairs=scn.pairs, seed=scn.seed
            )
        )
    if scn.field.components is not None and scn.field.deltas is not None:
        reports.append(
            check_cyclic_feedback(
                scn.field.components, scn.field.deltas, scn.field.domain, seed=scn.seed
            )
        )
    passing = [r.lam for r in reports if r.condition == "pairwise_lambda" and r.passed]
    return {
        "checks": [_condition_dict(r) for r in reports],
        "passing_lambdas": passing,
    }


def _analyze_orbit(scn: Scenario, index: int, x0) -> tuple[dict, dict]:
    """Full per-orbit analysis. Returns (report section, artifacts)."""
    a = scn.analysis
    traj = integrate(
        scn.field, x0, scn.T, rtol=scn.rtol, atol=scn.atol, max_step=scn.max_step
    )
    section: dict[str, Any] = {
        "index": index,
        "x0": _jsonable(np.asarray(x0, float)),
        "integration": {
            "T": scn.T,
            "rtol": scn.rtol,
            "atol": scn.atol,
            "max_step": None if np.isinf(scn.max_step) else scn.max_step,
            "n_steps": int(len(traj.times) - 1),
            "reached_t": traj.t_end,
            "events": [[t, kind] for (t, kind) in traj.events],
        },
    }
    artifacts: dict[str, Any] = {"trajectory": traj}
    incomplete = bool(traj.events)

    cls = classify_orbit(traj, scn.cone)
    section["orbit_class"] = {
        "kind": cls.kind.value,
        "witness_times": list(cls.witness_times) if cls.witness_times else None,
        "witness_margin": cls.witness_margin,
        "n_states": cls.n_states,
    }

    omega = estimate_omega(
        traj,
        window_fraction=a["window_fraction"],
        spacing=a["spacing"],
        tol_rel=a["tol_omega_rel"],
    )
    artifacts["omega"] = omega
    section["omega"] = {
        "n_points": int(omega.points.shape[0]),
        "window": [omega.window[0], omega.window[1]],
        "spacing": omega.spacing,
        "hausdorff_gap": omega.hausdorff_gap,
        "converged": omega.converged,
        "tolerances": {"tol_omega": omega.tol},
    }
    incomplete = incomplete or not omega.converged

    seeds = default_equilibrium_seeds(scn.domain, extra=[x0])
    eq_result = find_equilibria(scn.field, seeds)
    eqs = eq_result.equilibria
    section["equilibria"] = {
        "count": len(eqs),
        "dropped_seeds": eq_result.dropped,
        "points": [_jsonable(e.point) for e in eqs],
        "residuals": [e.residual for e in eqs],
    }

    dist_eq = a["dist_eq_rel"] * scn.domain.diameter()
    tri = trichotomy_report(
        omega, eqs, scn.cone, field=scn.field, dist_eq=dist_eq,
        rtol=scn.rtol, atol=scn.atol,
    )
    section["trichotomy"] = {
        "branch": tri.branch.value,
        "ordered_fraction": tri.ordered_fraction,
        "equilibria_hits": tri.equilibria_hits,
        "core_size": tri.core_size,
        "degenerate": tri.degenerate,
        "flagged_not_converged": tri.flagged_not_converged,
        "backward_surrogate_used": tri.backward_surrogate_used,
        "tolerances": {"dist_eq": dist_eq},
    }
    audit = tri.audit
    section["ordering_audit"] = {
        "n_points": audit.n_points,
        "n_pairs": audit.n_pairs,
        "ordered_fraction": audit.ordered_fraction,
        "min_margin": audit.min_margin,
        "max_margin": audit.max_margin,
        "ordered": audit.ordered,
        "trivial": audit.trivial,
        "worst_unordered": list(audit.worst_unordered) if audit.worst_unordered else None,
    }

    loop = None
    if (
        isinstance(scn.cone, QuadraticCone)
        and scn.cone.rank_k == 2
        and omega.converged
    ):
        loop = detect_periodic(
            omega, traj, scn.cone, scn.field, tol_per=a["tol_period"]
        )
    artifacts["loop"] = loop
    if loop is not None:
        proj = make_projector(scn.cone)
        section["periodic_orbit"] = {
            "period": loop.period,
            "closure_gap": loop.closure_gap,
            "n_loop_points": int(loop.states.shape[0]),
            "separation_ratio": projection_separation(omega.points, proj),
            "tolerances": {"tol_period": a["tol_period"]},
        }
        eps = a["eps_chain"] if a["eps_chain"] is not None else 10.0 * max(
            loop.closure_gap, 1e-12
        )
        r = a["r_chain"] if a["r_chain"] is not None else 0.25 * loop.period
        horizon = a["t_max_chain"] if a["t_max_chain"] is not None else 1.5 * loop.period
        k = max(2, int(a["chain_points"]))
        pick = np.linspace(0, loop.states.shape[0] - 1, k).astype(int)
        chain = chain_check(
            loop.states[pick], scn.field, eps=eps, r=r, t_max=horizon,
            rtol=scn.rtol, atol=scn.atol,
        )
        section["chain_check"] = {
            "n_points": len(chain),
            "n_success": sum(1 for c in chain if c.success),
            "all_recurrent": all(c.success for c in chain),
            "eps": eps,
            "r": r,
            "t_max": horizon,
        }
    else:
        section["periodic_orbit"] = None
        section["chain_check"] = None

    section["incomplete"] = incomplete
    return section, artifacts


def run_classify(scn: Scenario) -> tuple[dict, list[dict]]:
    """Analyze every initial condition; deterministic merge by index.

    Returns (report object, artifact list). Orbits run in a thread pool
    capped by KCONE_THREADS; results are merged in index order, so the
    report content does not depend on the worker count.
    """
    if not scn.x0s:
        raise KconeError("scenario has no initial conditions to classify")
    workers = min(worker_count(), len(scn.x0s))
    sections: list[dict | None] = [None] * len(scn.x0s)
    artifacts: list[dict | None] = [None] * len(scn.x0s)
    if workers <= 1:
        for i, x0 in enumerate(scn.x0s):
            sections[i], artifacts[i] = _analyze_orbit(scn, i, x0)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_analyze_orbit, scn, i, x0): i
                for i, x0 in enumerate(scn.x0s)
            }
            for fut, i in futures.items():
                sections[i], artifacts[i] = fut.result()
    report = {
        "tool": {"name": "kcone", "version": __version__},
        "scenario_digest": scenario_digest(scn.raw),
        "seed": scn.seed,
        "orbits": sections,
        "incomplete": any(s["incomplete"] for s in sections),
    }
    return report, artifacts


def build_full_report(scn: Scenario) -> tuple[dict, list[dict]]:
    """Certificates plus per-orbit analyses in one report object."""
    cert = run_certify(scn)
    report: dict[str, Any] = {
        "tool": {"name": "kcone", "version": __version__},
        "scenario_digest": scenario_digest(scn.raw),
        "seed": scn.seed,
        "certificates": cert["checks"],
        "passing_lambdas": cert["passing_lambdas"],
    }
    artifacts: list[dict] = []
    if scn.x0s:
        classify, artifacts = run_classify(scn)
        report["orbits"] = classify["orbits"]
        report["incomplete"] = classify["incomplete"]
    else:
        report["orbits"] = []
        report["incomplete"] = False
    return report, artifacts


def wrap_report(report: dict, wall_time_s: float) -> dict:
    return {
        "report": _jsonable(report),
        "meta": {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "wall_time_s": float(wall_time_s),
        },
    }


def dump_report(wrapped: dict) -> str:
    return json.dumps(wrapped, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(path, report: dict, wall_time_s: float) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_report(wrap_report(report, wall_time_s)))


# ---- CSV sidecars ----


class _open_out:
    """Context manager over a path or an already-open text stream."""

    def __init__(self, target):
        self.target = target
        self.fh = None

    def __enter__(self):
        if hasattr(self.target, "write"):
            return self.target
        self.fh = open(self.target, "w", encoding="utf-8", newline="\n")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()
        return False


def write_trajectory_csv(path, traj) -> None:
    n = traj.states.shape[1]
    with _open_out(path) as fh:
        fh.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
        for t, row in zip(traj.times, traj.states):
            fh.write(_fmt(t) + "," + ",".join(_fmt(v) for v in row) + "\n")


def write_omega_csv(path, omega, projector=None) -> None:
    n = omega.points.shape[1]
    header = [f"x{i + 1}" for i in range(n)]
    U = None
    if projector is not None:
        U = projector.coords(omega.points)
        header += [f"u{i + 1}" for i in range(U.shape[1])]
    with _open_out(path) as fh:
        fh.write(",".join(header) + "\n")
        for i, row in enumerate(omega.points):
            cells = [_fmt(v) for v in row]
            if U is not None:
                cells += [_fmt(v) for v in U[i]]
            fh.write(",".join(cells) + "\n")


def write_loop_csv(path, loop, projector=None) -> None:
    n = loop.states.shape[1]
    header = ["t"] + [f"x{i + 1}" for i in range(n)]
    U = None
    if projector is not None:
        U = projector.coords(loop.states)
        header += [f"u{i + 1}" for i in range(U.shape[1])]
    with _open_out(path) as fh:
        fh.write(",".join(header) + "\n")
        for i, (t, row) in enumerate(zip(loop.times, loop.states)):
            cells = [_fmt(t)] + [_fmt(v) for v in row]
            if U is not None:
                cells += [_fmt(v) for v in U[i]]
            fh.write(",".join(cells) + "\n")


def write_margins_csv(path, points, cone, cap: int = 400) -> None:
    """Sorted pairwise margins of (at most cap) points, one per line."""
    P = np.atleast_2d(np.asarray(points, float))
    if P.shape[0] > cap:
        pick = np.linspace(0, P.shape[0] - 1, cap).astype(int)
        P = P[pick]
    iu, ju = np.triu_indices(P.shape[0], k=1)
    D = P[iu] - P[ju]
    gaps = np.linalg.norm(D, axis=1)
    scale = max(1.0, float(np.abs(P).max()))
    distinct = gaps > 1e-12 * scale
    margins = np.sort(cone.margin_many(D[distinct]))
    with _open_out(path) as fh:
        fh.write("margin\n")
        for v in margins:
            fh.write(_fmt(v) + "\n")


def emit_plotdata(outdir, scn: Scenario, artifacts: list[dict]) -> list[str]:
    """Write omega_points.csv, loop.csv, margins.csv, trajectory_*.csv."""
    os.makedirs(outdir, exist_ok=True)
    written: list[str] = []
    proj = None
    if isinstance(scn.cone, QuadraticCone):
        proj = make_projector(scn.cone)
    for i, art in enumerate(artifacts):
        suffix = "" if len(artifacts) == 1 else f"_{i}"
        traj_path = os.path.join(outdir, f"trajectory{suffix}.csv")
        write_trajectory_csv(traj_path, art["trajectory"])
        written.append(traj_path)
        omega = art.get("omega")
        if omega is not None:
            omega_path = os.path.join(outdir, f"omega_points{suffix}.csv")
            write_omega_csv(omega_path, omega, projector=proj)
            written.append(omega_path)
            margins_path = os.path.join(outdir, f"margins{suffix}.csv")
            write_margins_csv(margins_path, omega.points, scn.cone)
            written.append(margins_path)
        loop = art.get("loop")
        if loop is not None:
            loop_path = os.path.join(outdir, f"loop{suffix}.csv")
            write_loop_csv(loop_path, loop, projector=proj)
            written.append(loop_path)
    return written
