"""Independent numerical solvers used to validate the closed forms.

Nothing in this module knows about regimes, boundary formulas, or the derived
K constants. Everything is built from the definition layer only — interim
beliefs and latency functions — so agreement between these solvers and the
closed-form equilibrium is genuine two-sided evidence:

- ``solve_fixed_point``: damped simultaneous best-response iteration over the
  three split fractions.
- ``grid_scan``: exhaustive epsilon-equilibrium scan of the unit cube of
  profiles, with connected-cluster labeling as uniqueness evidence.
- ``brute_force_socopt``: direct scan of the one-dimensional social-cost
  objective per state.

Expected route costs are affine in each type's own split fraction, which the
solvers exploit: two evaluations pin down the whole best-response line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .beliefs import belief_uninformative, expected_route_cost, marginal_type_dist
from .equilibrium import (
    UTILIZED_SHARE_EPS,
    StrategyProfile,
    _require_uninformative,
    wardrop_residual,
)
from .model import (
    EQUILIBRIUM_TYPES,
    InfoEnvironment,
    NetworkParams,
    PlayerType,
    State,
    ValidationError,
    latency,
    validate,
)

#: Below this own-split sensitivity the responder's costs do not depend on its
#: own choice (an empty population); the best response falls back to the sign
#: convention documented on ``best_response``.
DEGENERATE_SLOPE_EPS = 1e-15

#: Grid scans allocate a resolution**3 boolean volume; this cap keeps a
#: single scan under ~64 MB and a few minutes of residual evaluations.
MAX_SCAN_RESOLUTION = 400


@dataclass(frozen=True)
class OracleConfig:
    """Knobs shared by the numerical solvers.

    ``grid_resolution`` is points per scanned axis, ``damping`` the step
    fraction toward the best response, ``tolerance`` the residual (minutes)
    at which the fixed-point iteration stops.
    """

    grid_resolution: int = 2001
    damping: float = 0.5
    max_iters: int = 10_000
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.grid_resolution < 3:
            raise ValidationError(
                "config_out_of_range",
                f"grid_resolution must be >= 3, got {self.grid_resolution}",
            )
        if not 0 < self.damping <= 1:
            raise ValidationError(
                "config_out_of_range",
                f"damping must lie in (0, 1], got {self.damping}",
            )
        if self.max_iters < 1:
            raise ValidationError(
                "config_out_of_range",
                f"max_iters must be >= 1, got {self.max_iters}",
            )
        if not self.tolerance > 0:
            raise ValidationError(
                "config_out_of_range",
                f"tolerance must be positive, got {self.tolerance}",
            )


class OracleConvergenceError(RuntimeError):
    """Fixed-point iteration hit max_iters; carries the last iterate."""

    def __init__(self, message: str, last_profile: StrategyProfile, residual):
        super().__init__(message)
        self.last_profile = last_profile
        self.residual = residual


def _gap_line(params, env, table, responder, profile):
    """Route-1-minus-route-2 expected cost as a line in the own split.

    Returns (gap at own split 0, slope), exact because the gap is affine in
    the responder's split fraction with the opponent profile held fixed.
    """
    fields = {
        "rho_L": profile.rho_L,
        "rho_Hn": profile.rho_Hn,
        "rho_Ha": profile.rho_Ha,
    }
    own_field = {
        PlayerType.L: "rho_L",
        PlayerType.HN: "rho_Hn",
        PlayerType.HA: "rho_Ha",
    }[responder]

    def gap(own_value):
        probe = StrategyProfile(**{**fields, own_field: own_value})
        c1 = expected_route_cost(params, env, table, responder, 1, probe)
        c2 = expected_route_cost(params, env, table, responder, 2, probe)
        return c1 - c2

    g0 = gap(0.0)
    return g0, gap(1.0) - g0


def _br_from_line(g0, slope):
    """Clamped equalizer of an affine cost gap, with the degenerate fallback."""
    g0 = np.asarray(g0, dtype=float)
    slope = np.asarray(slope, dtype=float)
    degenerate = np.abs(slope) < DEGENERATE_SLOPE_EPS
    interior = -g0 / np.where(degenerate, 1.0, slope)
    br = np.clip(interior, 0.0, 1.0)
    preferred = np.where(g0 > 0, 0.0, np.where(g0 < 0, 1.0, 0.5))
    return np.where(degenerate, preferred, br)


#: Relative tolerance for recognizing the translation-mode update pattern.
_DRIFT_PATTERN_RTOL = 1e-2


def _drift_multiplier(lam, rho, delta):
    """Fast-forward factor for the simultaneous map's translation mode.

    While all three components sit strictly inside (0, 1), shifting the
    profile along (-lam, 1-lam, 1-lam) leaves every realized route load —
    hence every cost gap — unchanged, so each type's equalizer moves with
    its own coordinate and the damped sweep translates the iterate by a
    constant vector instead of contracting it. No equilibrium keeps all
    three components interior, so the crawl always ends at a box face;
    when an update matches the translation pattern, the largest
    box-feasible multiple of it covers that distance in one sweep. The
    stopping rule is untouched: a jump changes how fast the iteration
    travels, never what it accepts.
    """
    d = {t: np.asarray(delta[t], dtype=float) for t in EQUILIBRIUM_TYPES}
    d_l, d_n, d_a = (d[t] for t in EQUILIBRIUM_TYPES)
    scale = np.maximum(np.abs(d_l), np.maximum(np.abs(d_n), np.abs(d_a)))
    aligned = (
        (scale > 0)
        & (np.abs(d_n - d_a) <= _DRIFT_PATTERN_RTOL * scale)
        & (np.abs((1 - lam) * d_l + lam * d_n) <= _DRIFT_PATTERN_RTOL * scale)
    )
    room = np.full(np.shape(scale), np.inf)
    for t in EQUILIBRIUM_TYPES:
        wall = np.where(d[t] > 0, 1.0 - np.asarray(rho[t]), np.asarray(rho[t]))
        step = np.where(d[t] == 0, np.inf, wall / np.abs(np.where(d[t] == 0, 1.0, d[t])))
        room = np.minimum(room, step)
    return np.where(aligned, np.maximum(room, 1.0), 1.0)


def _type_defect(g0, slope, rho, mass):
    """One type's contribution to the Wardrop residual, from its gap line.

    A route counts as utilized only above UTILIZED_SHARE_EPS, mirroring
    wardrop_residual, and zero-mass types contribute nothing.
    """
    g = g0 + slope * rho
    gap1 = np.where(rho > UTILIZED_SHARE_EPS, np.maximum(g, 0.0), 0.0)
    gap2 = np.where(1 - rho > UTILIZED_SHARE_EPS, np.maximum(-g, 0.0), 0.0)
    return np.where(mass > 0, np.maximum(gap1, gap2), 0.0)


def best_response(
    params: NetworkParams,
    env: InfoEnvironment,
    profile: StrategyProfile,
    responder: PlayerType,
):
    """Cost-minimizing split for ``responder`` against a fixed profile.

    Solves expected_cost_route1(rho) = expected_cost_route2(rho) for the
    responder's own split and clamps to [0, 1]. If the responder's population
    is empty its costs do not depend on rho at all; by convention the
    preferred corner is returned (0 when route 1 is dearer, 1 when cheaper,
    0.5 at exact indifference).
    """
    validate(params, env)
    _require_uninformative(env)
    table = belief_uninformative(env, responder)
    g0, slope = _gap_line(params, env, table, responder, profile)
    br = _br_from_line(g0, slope)
    if np.ndim(br) == 0:
        return float(br)
    return br


def solve_fixed_point(
    params: NetworkParams,
    env: InfoEnvironment,
    config: OracleConfig = OracleConfig(),
) -> StrategyProfile:
    """Damped simultaneous best-response iteration from (0.5, 0.5, 0.5).

    Stops once no positive-mass type can gain more than ``config.tolerance``
    minutes by rerouting utilized demand — i.e. the current iterate's Wardrop
    residual (up to rounding) is below tolerance — and returns that iterate,
    so converged output satisfies wardrop_residual <= 10 * tolerance with
    room to spare. Environment fields may be equal-shape arrays; instances
    then iterate in lockstep until the slowest converges. Sweeps that match
    the all-interior translation mode (see _drift_multiplier) are
    fast-forwarded to the nearest box face; they would otherwise crawl
    there over thousands of iterations.

    Raises OracleConvergenceError after ``config.max_iters`` sweeps, carrying
    the last iterate and its residual.
    """
    validate(params, env)
    _require_uninformative(env)
    tables = {t: belief_uninformative(env, t) for t in EQUILIBRIUM_TYPES}
    lam = env.frac_informed
    dist = marginal_type_dist(env)
    masses = {
        PlayerType.L: 1 - lam,
        PlayerType.HN: lam * dist.p_Hn,
        PlayerType.HA: lam * dist.p_Ha,
    }
    shape = np.broadcast_shapes(
        *(
            np.shape(x)
            for x in (
                params.slope1_normal,
                params.slope1_incident,
                params.slope2,
                params.intercept1,
                params.intercept2,
                params.demand,
                env.p_incident,
                env.frac_informed,
                env.accuracy_high,
                env.accuracy_low,
            )
        )
    )
    rho = {t: np.full(shape, 0.5) for t in EQUILIBRIUM_TYPES}

    def as_profile(r) -> StrategyProfile:
        vals = [r[t] for t in EQUILIBRIUM_TYPES]
        if shape == ():
            vals = [float(v) for v in vals]
        empty = bool(np.ndim(lam) == 0 and lam == 1)
        return StrategyProfile(*vals, l_population_empty=empty)

    for _ in range(config.max_iters):
        probe = StrategyProfile(rho[PlayerType.L], rho[PlayerType.HN], rho[PlayerType.HA])
        lines = {
            t: _gap_line(params, env, tables[t], t, probe)
            for t in EQUILIBRIUM_TYPES
        }
        defect = 0.0
        for t in EQUILIBRIUM_TYPES:
            g0, slope = lines[t]
            defect = np.maximum(defect, _type_defect(g0, slope, rho[t], masses[t]))
        if np.all(defect < config.tolerance):
            return as_profile(rho)
        delta = {}
        for t in EQUILIBRIUM_TYPES:
            g0, slope = lines[t]
            br = _br_from_line(g0, slope)
            delta[t] = config.damping * (br - rho[t])
        boost = _drift_multiplier(lam, rho, delta)
        for t in EQUILIBRIUM_TYPES:
            rho[t] = np.clip(rho[t] + boost * delta[t], 0.0, 1.0)

    last = as_profile(rho)
    raise OracleConvergenceError(
        f"no fixed point within {config.max_iters} iterations "
        f"(worst residual {np.max(defect):.3e})",
        last_profile=last,
        residual=wardrop_residual(params, env, last),
    )


@dataclass(frozen=True)
class GridScanResult:
    """Cells of the profile cube whose Wardrop residual is below epsilon.

    ``cell_indices`` holds one (i, j, k) row per accepted cell, indexing
    ``axis_values`` along (rho_L, rho_Hn, rho_Ha); ``cell_residuals`` aligns
    with the rows. ``n_clusters`` counts 26-connected components of the
    accepted set.
    """

    resolution: int
    epsilon: float
    axis_values: np.ndarray
    cell_indices: np.ndarray
    cell_residuals: np.ndarray
    n_clusters: int

    @property
    def cell_width(self) -> float:
        return 1.0 / (self.resolution - 1)

    def nearest_cell(self, profile: StrategyProfile) -> tuple:
        scale = self.resolution - 1
        return tuple(
            int(np.rint(np.clip(v, 0.0, 1.0) * scale))
            for v in (profile.rho_L, profile.rho_Hn, profile.rho_Ha)
        )

    def contains(self, profile: StrategyProfile) -> bool:
        """Whether the accepted set covers the cell nearest to ``profile``."""
        target = self.nearest_cell(profile)
        return any(tuple(row) == target for row in self.cell_indices)


def grid_scan(
    params: NetworkParams,
    env: InfoEnvironment,
    config: OracleConfig,
) -> GridScanResult:
    """Exhaustive epsilon-equilibrium scan of the (rho_L, rho_Hn, rho_Ha) cube.

    epsilon = 10 * (cell diagonal) * (max latency slope) * demand, so the
    accepted set scales with the grid and always covers the cells around a
    true equilibrium. Scalar parameters and environment only.
    """
    validate(params, env)
    _require_uninformative(env)
    res = config.grid_resolution
    if res > MAX_SCAN_RESOLUTION:
        raise ValidationError(
            "config_out_of_range",
            f"grid_scan allocates resolution**3 cells; keep grid_resolution "
            f"<= {MAX_SCAN_RESOLUTION}, got {res}",
        )
    axis = np.linspace(0.0, 1.0, res)
    h = 1.0 / (res - 1)
    max_slope = max(params.slope1_incident, params.slope1_normal, params.slope2)
    epsilon = 10.0 * (h * np.sqrt(3.0)) * max_slope * params.demand

    accepted = np.empty((res, res, res), dtype=bool)
    residuals = np.empty((res, res, res))
    grid_hn, grid_ha = np.meshgrid(axis, axis, indexing="ij")
    for i, rho_l in enumerate(axis):
        slab = StrategyProfile(rho_l, grid_hn, grid_ha)
        r = wardrop_residual(params, env, slab)
        residuals[i] = r
        accepted[i] = r <= epsilon

    structure = np.ones((3, 3, 3), dtype=bool)
    _, n_clusters = ndimage.label(accepted, structure=structure)
    idx = np.argwhere(accepted)
    return GridScanResult(
        resolution=res,
        epsilon=float(epsilon),
        axis_values=axis,
        cell_indices=idx,
        cell_residuals=residuals[accepted],
        n_clusters=int(n_clusters),
    )


def brute_force_socopt(
    params: NetworkParams,
    state: State,
    config: OracleConfig,
) -> np.ndarray:
    """Load vector minimizing total travel cost in ``state`` by direct scan.

    Scans route-1 load over [0, D] at ``grid_resolution`` points, then
    refines once at 10x resolution inside the winning cell's neighborhood.
    """
    d = params.demand

    def total_cost(q1):
        q2 = d - q1
        return q1 * latency(params, 1, state, q1) + q2 * latency(params, 2, state, q2)

    coarse = np.linspace(0.0, d, config.grid_resolution)
    best = int(np.argmin(total_cost(coarse)))
    step = d / (config.grid_resolution - 1)
    lo = max(0.0, coarse[best] - step)
    hi = min(d, coarse[best] + step)
    fine = np.linspace(lo, hi, 21)
    q1 = float(fine[int(np.argmin(total_cost(fine)))])
    return np.array([q1, d - q1])
