"""Parameter sweeps, gain flattening and bandwidth maximisation.

All searches are deterministic: Nelder-Mead starts from a fixed simplex
with edges of 10 % of each parameter's bounded span, and one-parameter
problems use a coarse scan followed by golden-section refinement.
Every candidate is built through the normal constructors, so an
invariant-violating configuration can never become the optimum.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .design import PumpParams, bounds_for
from .errors import DomainError, InfeasibleError, MejpaError
from .junction_lab import plasma_frequency
from .pump_gain import gain_profile, max_pump_depth, center_gain_db, retune

log = logging.getLogger(__name__)

MAX_EVALS = 500
OBJECTIVE_TOL = 1e-4
G0_WINDOW_DB = 0.5
SIMPLEX_FRACTION = 0.1
#: objective value assigned to failed or constraint-violating candidates
PENALTY = 1e3


@dataclass
class SweepResult:
    """One profile per swept value; failed points are ``None`` with a message in ``errors``."""

    path: str
    values: list
    profiles: list
    summary: list
    errors: list


@dataclass
class OptimizationReport:
    best_config: object
    objective: float
    initial_objective: float
    iterations: int
    converged: bool
    best_params: dict
    constraint_slacks: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    seed: int = None


def _summarize(value, profile, config):
    return {
        "value": value,
        "f_center_hz": config.f_center,
        "f_plasma_hz": plasma_frequency(config.squid, config.constants) / (2 * np.pi),
        "pump_depth": config.pump.pump_depth,
        "center_gain_db": profile.center_gain_db,
        "g2": profile.g2,
        "bw_hz": profile.bw_at_threshold,
        "bw_3db_hz": profile.bw_3db,
        "ripple_db": profile.ripple_db,
    }


def _sweep_point(base, path, value, retune_to, threshold_db):
    cfg = base.set(path, value)
    if retune_to is not None:
        if path == "pump.f_pump":
            f_center = value / 2
        else:
            # keep the pump at the same place relative to the bare resonance
            ratio = (plasma_frequency(cfg.squid, cfg.constants)
                     / plasma_frequency(base.squid, base.constants))
            f_center = base.f_center * ratio
        cfg = retune(cfg, retune_to, f_center)
    return cfg, gain_profile(cfg, threshold_db=threshold_db)


def sweep_parameter(base, path, values, retune=False, target_g0_db=None,
                    threshold_db=15.0, map_fn=map):
    """Evaluate the gain profile for each value of one parameter.

    With ``retune`` the pump is re-solved at every point to the base
    centre gain (or ``target_g0_db``), centred on a frequency that follows
    the bare plasma frequency. Points that fail (invariant violation,
    threshold, unreachable gain) are reported as gaps. ``map_fn`` may be
    an executor's ``map`` for concurrent evaluation.
    """
    values = list(values)
    if not values:
        raise DomainError("sweep needs at least one value")
    base.get(path)
    if retune and path == "pump.pump_depth":
        raise DomainError("cannot retune the pump while sweeping its depth")
    target = None
    if retune:
        target = center_gain_db(base) if target_g0_db is None else target_g0_db

    def run(value):
        try:
            cfg, prof = _sweep_point(base, path, value, target, threshold_db)
            return prof, _summarize(value, prof, cfg), None
        except (MejpaError, ValueError) as exc:
            return None, {"value": value}, f"{type(exc).__name__}: {exc}"

    results = list(map_fn(run, values))
    return SweepResult(
        path=path,
        values=values,
        profiles=[r[0] for r in results],
        summary=[r[1] for r in results],
        errors=[r[2] for r in results],
    )


class _Problem:
    """Maps normalised coordinates in [0, 1]^n to configurations."""

    def __init__(self, base, free_params, bounds=None):
        free_params = list(free_params)
        if not free_params:
            raise DomainError("need at least one free parameter")
        self.base = base
        self.paths = free_params
        self.bounds = []
        for p in free_params:
            b = (bounds or {}).get(p) or bounds_for(p)
            if b is None:
                raise DomainError(f"no bounds known for {p!r}; pass them explicitly")
            self.bounds.append(tuple(float(v) for v in b))
        self.lo = np.array([b[0] for b in self.bounds])
        self.span = np.array([b[1] - b[0] for b in self.bounds])
        x0 = np.array([float(base.get(p)) for p in free_params])
        if np.any(x0 < self.lo) or np.any(x0 > self.lo + self.span):
            raise InfeasibleError("start point lies outside the parameter bounds")
        self.u0 = (x0 - self.lo) / self.span
        self.evals = 0

    def values(self, u):
        return self.lo + np.asarray(u, dtype=float) * self.span

    def config(self, u):
        cfg = self.base
        for p, v in zip(self.paths, self.values(u)):
            cfg = cfg.set(p, float(v))
        return cfg

    def outside(self, u):
        u = np.asarray(u, dtype=float)
        return float(np.sum(np.clip(-u, 0, None) + np.clip(u - 1, 0, None)))


def _run_search(problem, objective, max_evals, tol):
    """Minimise ``objective(u)``; returns (u_best, f_best, converged)."""
    n = len(problem.paths)
    if n == 1:
        return _golden(objective, problem.u0[0], max_evals, tol)
    simplex = [problem.u0]
    for k in range(n):
        vertex = problem.u0.copy()
        vertex[k] += SIMPLEX_FRACTION if vertex[k] + SIMPLEX_FRACTION <= 1 else -SIMPLEX_FRACTION
        simplex.append(vertex)
    res = minimize(
        objective, problem.u0, method="Nelder-Mead",
        options={"initial_simplex": np.array(simplex), "maxfev": max_evals,
                 "fatol": tol, "xatol": 1e-7},
    )
    return np.atleast_1d(res.x), float(res.fun), bool(res.success)


def _golden(objective, u0, max_evals, tol, points=11):
    # coarse scan of +-SIMPLEX_FRACTION around the start, widened while the
    # minimum sits on the scan edge, then golden section inside the bracket
    half = SIMPLEX_FRACTION
    while True:
        lo, hi = max(0.0, u0 - half), min(1.0, u0 + half)
        grid = np.linspace(lo, hi, points)
        vals = [objective(np.array([u])) for u in grid]
        k = int(np.argmin(vals))
        at_edge = (k == 0 and lo > 0) or (k == points - 1 and hi < 1)
        if not at_edge or half >= 1:
            break
        u0, half = grid[k], 2 * half
    if k == 0 or k == points - 1:
        return np.array([grid[k]]), float(vals[k]), True
    res = minimize_scalar(
        lambda u: objective(np.array([u])), method="golden",
        bracket=(grid[k - 1], grid[k], grid[k + 1]),
        tol=1e-8, options={"maxiter": max_evals},
    )
    if res.fun <= vals[k]:
        return np.array([res.x]), float(res.fun), bool(res.success)
    return np.array([grid[k]]), float(vals[k]), bool(res.success)


def _report(problem, u_best, f_best, f_init, converged, seed, sign=1.0, **extras):
    # never hand back something worse than the start
    if f_best > f_init:
        u_best, f_best = problem.u0, f_init
    cfg = problem.config(u_best)
    return OptimizationReport(
        best_config=cfg,
        objective=sign * f_best,
        initial_objective=sign * f_init,
        iterations=problem.evals,
        converged=converged,
        best_params=dict(zip(problem.paths, map(float, problem.values(u_best)))),
        extras=extras,
        seed=seed,
    )


def flatten_gain(base, free_params, target_g0_db, max_evals=MAX_EVALS,
                 tol=OBJECTIVE_TOL, fit_points=41, bounds=None, seed=None):
    """Null the quadratic gain coefficient at fixed centre gain.

    The objective is |G2| w^2 / G0 with w the fit half-width of the base
    design, i.e. |G2| on a fixed dimensionless scale. The pump is re-solved
    for ``target_g0_db`` at every candidate.
    """
    problem = _Problem(base, free_params, bounds)
    f_center = base.f_center
    try:
        start = retune(base, target_g0_db, f_center)
    except MejpaError as exc:
        raise InfeasibleError(f"start point cannot reach {target_g0_db} dB: {exc}") from exc
    p0 = gain_profile(start, fit_points=fit_points)
    scale = p0.fit_half_width**2 / p0.g0

    def evaluate(u):
        problem.evals += 1
        out = problem.outside(u)
        if out > 0:
            return PENALTY * (1 + out), None
        try:
            cfg = retune(problem.config(u), target_g0_db, f_center)
            prof = gain_profile(cfg, fit_points=fit_points)
        except (MejpaError, ValueError):
            return PENALTY, None
        if abs(prof.g0_db - target_g0_db) > G0_WINDOW_DB:
            return PENALTY, None
        return abs(prof.g2) * scale, prof

    def objective(u):
        return evaluate(u)[0]

    f_init = abs(p0.g2) * scale
    if f_init <= tol:
        u_best, f_best, converged = problem.u0, f_init, True
    else:
        u_best, f_best, converged = _run_search(problem, objective, max_evals, tol)
        converged = converged and problem.evals <= max_evals
    best = retune(problem.config(u_best if f_best <= f_init else problem.u0), target_g0_db, f_center)
    p1 = gain_profile(best, fit_points=fit_points)
    report = _report(
        problem, u_best, f_best, f_init, converged, seed,
        g2_initial=p0.g2, g2_final=p1.g2,
        g2_reduction=abs(p0.g2) / abs(p1.g2) if p1.g2 != 0 else np.inf,
        bw_initial_hz=p0.bw_at_threshold, bw_final_hz=p1.bw_at_threshold,
    )
    report.best_config = best
    report.constraint_slacks = {"g0_db": G0_WINDOW_DB - abs(p1.g0_db - target_g0_db)}
    log.debug("flatten_gain: %d evaluations, |G2| x%.3g", problem.evals, report.extras["g2_reduction"])
    return report


def maximize_bandwidth(base, free_params, g_floor_db, ripple_cap_db,
                       target_g0_db=None, bounds=None, max_evals=MAX_EVALS,
                       tol=OBJECTIVE_TOL, seed=None):
    """Widest contiguous band above ``g_floor_db`` with ripple below the cap.

    The pump is kept as given unless ``target_g0_db`` is set, in which case
    it is re-solved at every candidate. ``pump.pump_depth`` may itself be a
    free parameter.

    Raises
    ------
    InfeasibleError
        If the start point misses the floor or the ripple cap, or if the
        floor exceeds the largest gain attainable below threshold.
    """
    f_center = base.f_center
    d_max = max_pump_depth(base)
    g_limit = center_gain_db(base, PumpParams(base.pump.f_pump, d_max, base.pump.pump_phase))
    if g_floor_db > g_limit:
        raise InfeasibleError(
            f"g_floor {g_floor_db} dB exceeds the threshold-limited gain {g_limit:.2f} dB"
        )
    problem = _Problem(base, free_params, bounds)

    def build(u):
        cfg = problem.config(u)
        if target_g0_db is not None:
            cfg = retune(cfg, target_g0_db, f_center)
        return cfg

    start = build(problem.u0)
    p0 = gain_profile(start, threshold_db=g_floor_db)
    if p0.bw_at_threshold is None:
        raise InfeasibleError(
            f"start violates g_floor: centre gain {p0.center_gain_db:.2f} dB < {g_floor_db} dB"
        )
    if p0.ripple_db > ripple_cap_db:
        raise InfeasibleError(
            f"start violates ripple_cap: {p0.ripple_db:.2f} dB > {ripple_cap_db} dB"
        )

    def objective(u):
        problem.evals += 1
        out = problem.outside(u)
        if out > 0:
            return PENALTY * (1 + out)
        try:
            prof = gain_profile(build(u), threshold_db=g_floor_db)
        except (MejpaError, ValueError):
            return PENALTY
        if prof.bw_at_threshold is None:
            return PENALTY
        excess = max(0.0, prof.ripple_db - ripple_cap_db)
        return -prof.bw_at_threshold / 1e9 + 10.0 * excess

    f_init = -p0.bw_at_threshold / 1e9
    u_best, f_best, converged = _run_search(problem, objective, max_evals, tol)
    converged = converged and problem.evals <= max_evals
    if f_best > f_init:
        u_best, f_best = problem.u0, f_init
    best = build(u_best)
    p1 = gain_profile(best, threshold_db=g_floor_db)
    if p1.ripple_db > ripple_cap_db:
        # penalised optimum still infeasible; fall back to the start
        best, p1, u_best, f_best = start, p0, problem.u0, f_init
    report = _report(
        problem, u_best, f_best, f_init, converged, seed, sign=-1e9,
        bw_hz=p1.bw_at_threshold, ripple_db=p1.ripple_db,
        center_gain_db=p1.center_gain_db,
    )
    report.best_config = best
    report.constraint_slacks = {
        "ripple_db": ripple_cap_db - p1.ripple_db,
        "g_floor_db": p1.center_gain_db - g_floor_db,
    }
    return report


@dataclass
class ScalingResult:
    g0_db: list
    bandwidth_hz: list
    slope: float
    configs: list


def gbw_scaling_study(config, g0_list_db, null_params=None, max_evals=MAX_EVALS):
    """Half-power bandwidth against centre gain and the log-log slope.

    With ``null_params`` the quadratic gain term is re-nulled with those
    parameters at every gain before the bandwidth is taken.
    """
    g0_list_db = list(g0_list_db)
    if len(g0_list_db) < 2:
        raise DomainError("slope needs at least two gain values")
    bws, cfgs = [], []
    for g in g0_list_db:
        if null_params:
            cfg = flatten_gain(config, null_params, g, max_evals=max_evals).best_config
        else:
            cfg = retune(config, g)
        prof = gain_profile(cfg)
        if prof.bw_3db is None:
            raise DomainError(f"no half-power band at {g} dB")
        bws.append(prof.bw_3db)
        cfgs.append(cfg)
    x = np.log(10 ** (np.asarray(g0_list_db) / 10))
    slope = float(np.polyfit(x, np.log(bws), 1)[0])
    return ScalingResult(g0_list_db, bws, slope, cfgs)
