"""Payoff-monotonicity checks for strategy profiles.

A profile is weakly payoff monotone when, agent by agent, playing one bid
strictly more often than another implies the first bid has strictly higher
expected utility against the co-player's mix. The ``m``-weak variant relaxes
this to a probability *ratio*: a weakly better bid must carry at least a
fraction ``m`` of the probability of a weakly worse one. Both checks implement
the definitions verbatim: a utility tie combined with a strict probability gap
is *not* a weak-monotonicity violation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .games import AuctionGame, Role, StrategyProfile, utility_vector

#: Default slack for probability and utility comparisons on rational-derived
#: profiles; QRE iterates should be checked at ~1e-9 instead.
DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    agent: Role
    bid_a: int
    bid_b: int
    prob_a: float
    prob_b: float
    util_a: float
    util_b: float


@dataclass(frozen=True)
class MonotonicityReport:
    holds: bool
    violations: tuple[Violation, ...]
    tol: float

    def __bool__(self) -> bool:
        return self.holds


def _agent_views(game: AuctionGame, profile: StrategyProfile):
    low, high = profile.as_arrays()
    yield Role.LOW, low, utility_vector(game, Role.LOW, profile.sigma_high)
    yield Role.HIGH, high, utility_vector(game, Role.HIGH, profile.sigma_low)


def _collect(agent: Role, probs, utils, mask) -> list[Violation]:
    rows, cols = np.nonzero(mask)
    return [
        Violation(agent, int(a), int(b), float(probs[a]), float(probs[b]),
                  float(utils[a]), float(utils[b]))
        for a, b in zip(rows, cols)
    ]


def check_weak_monotonicity(
    game: AuctionGame, profile: StrategyProfile, tol: float = DEFAULT_TOL
) -> MonotonicityReport:
    """Record every ordered bid pair with a strict probability gap but no strict
    utility gap: ``sigma(a) > sigma(b) + tol`` while ``U(a) <= U(b) + tol``."""
    violations: list[Violation] = []
    for agent, probs, utils in _agent_views(game, profile):
        mask = (probs[:, None] > probs[None, :] + tol) & (utils[:, None] <= utils[None, :] + tol)
        if mask.any():
            violations.extend(_collect(agent, probs, utils, mask))
    return MonotonicityReport(not violations, tuple(violations), tol)


def check_m_monotonicity(
    game: AuctionGame, profile: StrategyProfile, m: float, tol: float = DEFAULT_TOL
) -> MonotonicityReport:
    """Violation: ``U(a) >= U(b) - tol`` yet ``sigma(a) < m * sigma(b) - tol``."""
    if not 0 <= m <= 1:
        raise ValueError(f"m must lie in [0, 1], got {m}")
    violations: list[Violation] = []
    for agent, probs, utils in _agent_views(game, profile):
        mask = (utils[:, None] >= utils[None, :] - tol) & (probs[:, None] < m * probs[None, :] - tol)
        if mask.any():
            violations.extend(_collect(agent, probs, utils, mask))
    return MonotonicityReport(not violations, tuple(violations), tol)


def monotone_probability_cap(
    game: AuctionGame,
    profile: StrategyProfile,
    role: Role,
    bid: int,
    tol: float = DEFAULT_TOL,
) -> tuple[int, bool]:
    """Count weakly-better alternatives to ``bid`` and test the implied cap.

    If ``k`` other bids are at least as good as ``bid`` (within 1e-12), weak
    payoff monotonicity forces each of them to carry at least ``sigma(bid)``,
    so ``sigma(bid) <= 1/(k+1)``. Returns ``(k, cap_satisfied)`` with the cap
    tested up to ``tol``.
    """
    if not 0 <= bid <= game.profile.p_bar:
        raise ValueError(f"bid {bid} outside bid set 0..{game.profile.p_bar}")
    role = Role(role)
    opp = profile.sigma_high if role is Role.LOW else profile.sigma_low
    utils = utility_vector(game, role, opp)
    k = int(np.sum(utils >= utils[bid] - 1e-12)) - 1
    prob = float(profile.sigma(role)[bid])
    return k, prob <= 1.0 / (k + 1) + tol


def probability_cap_report(
    game: AuctionGame, profile: StrategyProfile, tol: float = DEFAULT_TOL
) -> dict[Role, tuple[np.ndarray, np.ndarray]]:
    """Vectorised :func:`monotone_probability_cap` over every bid of each agent.

    Returns ``{role: (k_vector, satisfied_vector)}``.
    """
    out = {}
    for agent, probs, utils in _agent_views(game, profile):
        k = (utils[None, :] >= utils[:, None] - 1e-12).sum(axis=1) - 1
        ok = probs <= 1.0 / (k + 1) + tol
        out[agent] = (k.astype(int), ok)
    return out
