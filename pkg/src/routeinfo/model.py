"""Domain types, parameter validation, latencies, and derived scalar constants.

The physical model is a two-route network where route 1 is incident-prone:
its latency slope jumps from ``slope1_normal`` to ``slope1_incident`` when an
incident occurs. Route 2 is state-independent. Both latencies are affine in
the route load. Demand is carried in thousands of vehicles per hour, so the
default network reads ``demand=5`` with slopes in minutes per 10^3 veh/hr.

All values are immutable after construction and every operation is a pure
function, so everything here is safe for unrestricted concurrent use. The
arithmetic is written so that scalar fields may be swapped for equal-shape
numpy arrays (the numerical oracle exploits this to solve many environments
in lockstep).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class State(str, Enum):
    """Network state: route 1 is either normal or carrying an incident."""

    NORMAL = "n"
    INCIDENT = "a"


class PlayerType(str, Enum):
    """Signal-conditioned player types.

    ``L`` is the uninformed population collapsed to a single type, which is
    how it enters every equilibrium-facing computation (its signal carries no
    information at accuracy 0.5). ``LN``/``LA`` keep the uninformed signal
    distinguished and appear only in the general belief tables, where the
    low-accuracy service may be better than a coin flip.
    """

    L = "L"
    HN = "Hn"
    HA = "Ha"
    LN = "Ln"
    LA = "La"


#: Types with positive mass in the equilibrium model (low-accuracy service
#: fixed at 0.5, so the L population needs no signal split).
EQUILIBRIUM_TYPES = (PlayerType.L, PlayerType.HN, PlayerType.HA)


class ValidationError(ValueError):
    """Raised for invalid parameters; ``code`` identifies the violated rule."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class NetworkParams:
    """Two-route network: per-state slopes, intercepts, and total demand.

    Required orderings: slope1_incident > slope2 >= slope1_normal > 0 and
    intercept2 >= intercept1 >= 0, i.e. route 1 is the cheaper free-flow
    road but degrades badly under an incident. Demand must exceed
    (intercept2 - intercept1) / slope1_normal so that route 2 is ever used.
    """

    slope1_normal: float
    slope1_incident: float
    slope2: float
    intercept1: float
    intercept2: float
    demand: float


@dataclass(frozen=True)
class InfoEnvironment:
    """Information side of the game: (p, lambda, eta_H, eta_L).

    p_incident: prior incident probability, strictly inside (0, 1).
    frac_informed: fraction of players subscribed to the accurate service.
    accuracy_high: probability the accurate service reports the true state,
        in (0.5, 1].
    accuracy_low: same for the other service; the equilibrium analysis fixes
        it at 0.5 (an uninformative signal), and only the general belief
        tables accept anything in [0.5, accuracy_high).
    """

    p_incident: float
    frac_informed: float
    accuracy_high: float
    accuracy_low: float = 0.5


@dataclass(frozen=True)
class DerivedConstants:
    """Averaged route-1 slopes and the load constants K0..K4.

    a1_bar is the prior-averaged route-1 slope; a1_hat and a1_tilde are the
    signal-weighted averages relevant to the informed types (incident signal
    and normal signal respectively). K1/K2/K3 are the route-1 loads that
    equalize the uninformed, incident-signal, and normal-signal expected
    costs; K4 is the route-1 load in the normal state wherever the informed
    population splits on the incident signal while fully using route 1 on the
    normal one.
    """

    a1_bar: float
    a1_hat: float
    a1_tilde: float
    k0: float
    k1: float
    k2: float
    k3: float
    k4: float


def validate(params: NetworkParams, env: InfoEnvironment):
    """Check every model invariant; return the pair unchanged if all hold.

    Raises ValidationError with a distinct code per violated rule:
    ``slope_ordering``, ``intercept_ordering``, ``demand_too_small``,
    ``probability_out_of_range``, ``accuracy_out_of_range``.
    """
    a1n, a1a, a2 = params.slope1_normal, params.slope1_incident, params.slope2
    b1, b2 = params.intercept1, params.intercept2
    if not (np.all(a1a > a2) and np.all(a2 >= a1n) and np.all(a1n > 0)):
        raise ValidationError(
            "slope_ordering",
            f"need slope1_incident > slope2 >= slope1_normal > 0, "
            f"got ({a1a}, {a2}, {a1n})",
        )
    if not (np.all(b2 >= b1) and np.all(b1 >= 0)):
        raise ValidationError(
            "intercept_ordering",
            f"need intercept2 >= intercept1 >= 0, got ({b2}, {b1})",
        )
    if not np.all(params.demand > (b2 - b1) / a1n):
        raise ValidationError(
            "demand_too_small",
            f"demand {params.demand} must exceed "
            f"(intercept2 - intercept1)/slope1_normal = {(b2 - b1) / a1n}",
        )
    p, lam = env.p_incident, env.frac_informed
    if not (np.all(p > 0) and np.all(p < 1)):
        raise ValidationError(
            "probability_out_of_range", f"p_incident must lie in (0, 1), got {p}"
        )
    if not (np.all(lam >= 0) and np.all(lam <= 1)):
        raise ValidationError(
            "probability_out_of_range", f"frac_informed must lie in [0, 1], got {lam}"
        )
    eta_h, eta_l = env.accuracy_high, env.accuracy_low
    if not (np.all(eta_h > 0.5) and np.all(eta_h <= 1)):
        raise ValidationError(
            "accuracy_out_of_range", f"accuracy_high must lie in (0.5, 1], got {eta_h}"
        )
    if not (np.all(eta_l >= 0.5) and np.all(eta_l < eta_h)):
        raise ValidationError(
            "accuracy_out_of_range",
            f"accuracy_low must lie in [0.5, accuracy_high), got {eta_l}",
        )
    return params, env


def route_slope(params: NetworkParams, route: int, state: State) -> float:
    """Latency slope of a route in a given state (route 2 ignores the state)."""
    if route == 1:
        return (
            params.slope1_incident if state == State.INCIDENT else params.slope1_normal
        )
    if route == 2:
        return params.slope2
    raise ValueError(f"route must be 1 or 2, got {route}")


def latency(params: NetworkParams, route: int, state: State, load):
    """Travel time on a route carrying ``load``: slope(state) * load + intercept."""
    if np.any(np.asarray(load) < 0):
        raise ValidationError("negative_load", f"route load must be >= 0, got {load}")
    if route == 1:
        return route_slope(params, 1, state) * load + params.intercept1
    if route == 2:
        return params.slope2 * load + params.intercept2
    raise ValueError(f"route must be 1 or 2, got {route}")


def derived_constants(params: NetworkParams, env: InfoEnvironment) -> DerivedConstants:
    """Averaged route-1 slopes and the equalizing loads K0..K4."""
    validate(params, env)
    p, eta = env.p_incident, env.accuracy_high
    a1n, a1a, a2 = params.slope1_normal, params.slope1_incident, params.slope2
    d = params.demand

    a1_bar = (1 - p) * a1n + p * a1a
    a1_hat = (1 - p) * (1 - eta) * a1n + p * eta * a1a
    a1_tilde = (1 - p) * eta * a1n + p * (1 - eta) * a1a

    p_ha = p * eta + (1 - p) * (1 - eta)
    p_hn = 1 - p_ha

    k0 = a2 * d - params.intercept1 + params.intercept2
    k1 = k0 / (a1_bar + a2)
    k2 = k0 * p_ha / (a1_hat + p_ha * a2)
    k3 = k0 * p_hn / (a1_tilde + p_hn * a2)
    k4 = k2 * (1 + (a1a - a1n) / (a1_bar + a2))
    return DerivedConstants(a1_bar, a1_hat, a1_tilde, k0, k1, k2, k3, k4)
