"""Regime classification and the closed-form equilibrium.

With the low-accuracy service fixed at a coin flip, the game has three
positive-mass types (L, Hn, Ha) and its equilibria fall into four regimes of
the informed fraction lambda, separated by boundaries lambda_bar_1 <=
lambda_bar_2 <= lambda_bar_3. Qualitatively:

- R1 (lambda < lb1): informed players track their signal exactly (route 1 on
  the normal signal, route 2 on the incident signal); the uninformed split.
- R2 (lb1 <= lambda <= lb2): the informed population is too large to fit on
  route 2 after an incident signal, so it splits there ("concentration").
- R3 (lb2 < lambda < lb3): the uninformed abandon route 1 entirely.
- R4 (lb3 <= lambda): the informed split on both signals; route loads hit the
  per-state equalizing values and everyone faces the same costs.

``solve_bwe`` returns the closed form for the classified regime;
``wardrop_residual`` checks any profile against the equilibrium definition
(equal costs across co-utilized routes, no cheaper unused route, each type
judged under its own belief); ``enumerate_profiles`` rebuilds the full
27-pattern feasibility table from scratch as structural evidence that only
the four closed-form patterns survive.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .beliefs import belief_uninformative, expected_route_cost, marginal_type_dist
from .model import (
    EQUILIBRIUM_TYPES,
    InfoEnvironment,
    NetworkParams,
    PlayerType,
    ValidationError,
    derived_constants,
    validate,
)

#: Ties against a regime boundary within this tolerance resolve to the
#: lower-indexed closed regime (R2 at both of its ends, R4 at lambda_bar_3).
BOUNDARY_TOL = 1e-12

#: A route carrying less than this share of a type's demand is treated as
#: unutilized by the residual check. Numerically converged iterates approach
#: corners geometrically and may hold ~1e-9 of residual mass on a route whose
#: cost is far from minimal; that mass is an artifact, not a utilization.
UTILIZED_SHARE_EPS = 1e-8


@dataclass(frozen=True)
class StrategyProfile:
    """Split fractions of each type's demand routed onto route 1.

    ``l_population_empty`` marks profiles produced for lambda = 1, where no
    uninformed players exist and ``rho_L`` is a 0.0 placeholder rather than
    an equilibrium quantity.
    """

    rho_L: float
    rho_Hn: float
    rho_Ha: float
    l_population_empty: bool = False

    def split(self, t: PlayerType):
        if t in (PlayerType.L, PlayerType.LN, PlayerType.LA):
            return self.rho_L
        if t == PlayerType.HN:
            return self.rho_Hn
        if t == PlayerType.HA:
            return self.rho_Ha
        raise ValueError(f"no split fraction for type {t}")


@dataclass(frozen=True)
class Regime:
    """Regime label (R1..R4) with the boundaries it was classified against."""

    label: str
    lambda_bar_1: float
    lambda_bar_2: float
    lambda_bar_3: float

    @property
    def bounds(self) -> tuple:
        return (self.lambda_bar_1, self.lambda_bar_2, self.lambda_bar_3)


@dataclass(frozen=True)
class ProfileVerdict:
    """One qualitative pattern from the 27-cell table with its verdict.

    ``pattern`` gives each component of (rho_L, rho_Hn, rho_Ha) as one of
    "0", "int", "1". For equilibrium patterns ``profile`` carries the solved
    split fractions.
    """

    pattern: tuple
    is_equilibrium: bool
    profile: StrategyProfile | None = None
    note: str = ""


def _require_uninformative(env: InfoEnvironment) -> None:
    if np.any(np.asarray(env.accuracy_low) != 0.5):
        raise ValidationError(
            "unsupported_treatment",
            f"equilibrium analysis requires accuracy_low == 0.5, "
            f"got {env.accuracy_low}",
        )


def regime_boundaries(params: NetworkParams, env: InfoEnvironment) -> tuple:
    """The three lambda thresholds separating the four regimes."""
    validate(params, env)
    _require_uninformative(env)
    k = derived_constants(params, env)
    dist = marginal_type_dist(env)
    d, a2 = params.demand, params.slope2
    lb1 = (
        k.k1
        * (k.a1_hat - k.a1_bar * dist.p_Ha)
        / (d * dist.p_Hn * (k.a1_hat + a2 * dist.p_Ha))
    )
    lb2 = (k.k1 - dist.p_Ha * k.k2) / (d * dist.p_Hn)
    lb3 = k.k3 / d
    return (lb1, lb2, lb3)


def classify(params: NetworkParams, env: InfoEnvironment) -> Regime:
    """The regime containing ``env.frac_informed``.

    Membership follows the half-open set definitions (R2 closed on both
    ends, R3 open, R4 closed at lambda_bar_3); ties within BOUNDARY_TOL go
    to the lower-indexed closed regime so the choice is deterministic. The
    split fractions are continuous across the boundaries, so the tie rule is
    cost-free.
    """
    lb1, lb2, lb3 = regime_boundaries(params, env)
    lam = env.frac_informed
    if lam < lb1 - BOUNDARY_TOL:
        label = "R1"
    elif lam <= lb2 + BOUNDARY_TOL:
        label = "R2"
    elif lam < lb3 - BOUNDARY_TOL:
        label = "R3"
    else:
        label = "R4"
    return Regime(label, lb1, lb2, lb3)


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def solve_bwe(params: NetworkParams, env: InfoEnvironment) -> StrategyProfile:
    """Closed-form Bayesian Wardrop equilibrium for the classified regime.

    At lambda = 1 the uninformed population is empty; rho_L is reported as
    0.0 with ``l_population_empty`` set, so downstream cost formulas never
    silently multiply an undefined fraction by zero demand.
    """
    validate(params, env)
    _require_uninformative(env)
    k = derived_constants(params, env)
    dist = marginal_type_dist(env)
    p_hn, p_ha = dist.p_Hn, dist.p_Ha
    lam, d = env.frac_informed, params.demand
    regime = classify(params, env)

    if regime.label == "R1":
        rho_l = k.k1 / ((1 - lam) * d) - p_hn * lam / (1 - lam)
        return StrategyProfile(_clamp01(rho_l), 1.0, 0.0)

    # The remaining regimes all have lambda >= lambda_bar_1 > 0, so the
    # divisions below cannot hit zero for validated inputs.
    if not np.all(lam > 0):
        raise ValidationError(
            "internal_error", "lambda = 0 classified outside the first regime"
        )

    if regime.label == "R2":
        rho_l = (k.k1 - lam * d * p_hn - p_ha * k.k2) / ((1 - lam) * d * p_hn)
        rho_ha = (lam * d * p_hn + k.k2 - k.k1) / (lam * d * p_hn)
        return StrategyProfile(_clamp01(rho_l), 1.0, _clamp01(rho_ha))

    if regime.label == "R3":
        return StrategyProfile(0.0, 1.0, _clamp01(k.k2 / (lam * d)))

    rho_hn = _clamp01(k.k3 / (lam * d))
    rho_ha = _clamp01(k.k2 / (lam * d))
    return StrategyProfile(0.0, rho_hn, rho_ha, l_population_empty=bool(lam == 1))


def wardrop_residual(params: NetworkParams, env: InfoEnvironment, profile):
    """Worst equilibrium violation of a profile, in cost units (minutes).

    For each positive-mass type: the gap between the costliest route it
    actually uses (share above UTILIZED_SHARE_EPS) and the cheapest route
    available, with costs taken in expectation under that type's belief. A
    profile is an epsilon-equilibrium exactly when the residual is <=
    epsilon.
    """
    validate(params, env)
    _require_uninformative(env)
    lam = env.frac_informed
    dist = marginal_type_dist(env)
    masses = {
        PlayerType.L: 1 - lam,
        PlayerType.HN: lam * dist.p_Hn,
        PlayerType.HA: lam * dist.p_Ha,
    }
    residual = 0.0
    for t in EQUILIBRIUM_TYPES:
        table = belief_uninformative(env, t)
        c1 = expected_route_cost(params, env, table, t, 1, profile)
        c2 = expected_route_cost(params, env, table, t, 2, profile)
        rho = profile.rho_L if t == PlayerType.L else (
            profile.rho_Hn if t == PlayerType.HN else profile.rho_Ha
        )
        cheapest = np.minimum(c1, c2)
        gap1 = np.where(rho > UTILIZED_SHARE_EPS, c1 - cheapest, 0.0)
        gap2 = np.where((1 - rho) > UTILIZED_SHARE_EPS, c2 - cheapest, 0.0)
        type_residual = np.where(masses[t] > 0, np.maximum(gap1, gap2), 0.0)
        residual = np.maximum(residual, type_residual)
    if np.ndim(residual) == 0:
        return float(residual)
    return residual


#: Component order used by the qualitative patterns.
_COMPONENTS = (PlayerType.L, PlayerType.HN, PlayerType.HA)

#: Tolerance for the weak inequalities of fixed (0 or 1) components, and the
#: strictness margin demanded of interior solutions.
_PATTERN_TOL = 1e-9

#: Condition-number ceiling above which a pattern's equalization system is
#: treated as degenerate rather than solved. Genuine systems stay many orders
#: of magnitude below this; rank-deficient ones sit at 1e15 or worse.
_MAX_SYSTEM_COND = 1e12


def enumerate_profiles(params: NetworkParams, env: InfoEnvironment) -> list:
    """Feasibility verdicts for all 27 qualitative patterns {0, int, 1}^3.

    Each type's route-cost gap is affine in the profile, so a pattern pins
    down a linear system: interior components must equalize their owner's
    two routes, components fixed at 0 (resp. 1) must make route 2 (resp. 1)
    weakly cheapest for their owner. The pattern is marked an equilibrium
    only if the system solves with every interior component strictly inside
    (0, 1) and every fixed component's inequality satisfied.
    """
    validate(params, env)
    _require_uninformative(env)
    tables = {t: belief_uninformative(env, t) for t in EQUILIBRIUM_TYPES}

    def cost_gap(t: PlayerType, rho: tuple):
        prof = StrategyProfile(*rho)
        c1 = expected_route_cost(params, env, tables[t], t, 1, prof)
        c2 = expected_route_cost(params, env, tables[t], t, 2, prof)
        return c1 - c2

    # Affine decomposition: gap_t(rho) = g0[t] + sum_j coef[t][j] * rho[j],
    # with coefficients extracted exactly from evaluations at unit points.
    origin = (0.0, 0.0, 0.0)
    g0 = {t: cost_gap(t, origin) for t in _COMPONENTS}
    coef = {}
    for t in _COMPONENTS:
        row = []
        for j in range(3):
            unit = tuple(1.0 if i == j else 0.0 for i in range(3))
            row.append(cost_gap(t, unit) - g0[t])
        coef[t] = row

    def gap_at(t: PlayerType, rho: list) -> float:
        return g0[t] + sum(coef[t][j] * rho[j] for j in range(3))

    verdicts = []
    for pattern in itertools.product(("0", "int", "1"), repeat=3):
        fixed_value = {"0": 0.0, "1": 1.0}
        unknowns = [j for j, sym in enumerate(pattern) if sym == "int"]
        rho = [fixed_value.get(sym, 0.0) for sym in pattern]

        solvable = True
        if unknowns:
            a = np.array(
                [[coef[_COMPONENTS[j]][u] for u in unknowns] for j in unknowns]
            )
            b = np.array(
                [
                    -g0[_COMPONENTS[j]]
                    - sum(
                        coef[_COMPONENTS[j]][i] * rho[i]
                        for i in range(3)
                        if i not in unknowns
                    )
                    for j in unknowns
                ]
            )
            # np.linalg.solve returns rounding noise, not an error, for a
            # system that is singular up to float dust (the all-interior
            # pattern always is), so screen conditioning before solving.
            if not np.all(np.isfinite(a)) or np.linalg.cond(a) > _MAX_SYSTEM_COND:
                solvable = False
            else:
                x = np.linalg.solve(a, b)
                if not np.all(np.isfinite(x)):
                    solvable = False
            if solvable:
                for u, val in zip(unknowns, x):
                    rho[u] = float(val)

        if not solvable:
            verdicts.append(
                ProfileVerdict(pattern, False, note="degenerate equalization system")
            )
            continue

        ok = True
        note = ""
        for j, sym in enumerate(pattern):
            t = _COMPONENTS[j]
            if sym == "int":
                if not (_PATTERN_TOL < rho[j] < 1 - _PATTERN_TOL):
                    ok, note = False, f"{t.value} split leaves (0, 1)"
                    break
            elif sym == "0":
                if gap_at(t, rho) < -_PATTERN_TOL:
                    ok, note = False, f"{t.value} strictly prefers route 1"
                    break
            else:
                if gap_at(t, rho) > _PATTERN_TOL:
                    ok, note = False, f"{t.value} strictly prefers route 2"
                    break

        profile = StrategyProfile(rho[0], rho[1], rho[2]) if ok else None
        verdicts.append(ProfileVerdict(pattern, ok, profile=profile, note=note))
    return verdicts
