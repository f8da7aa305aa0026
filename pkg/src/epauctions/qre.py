"""Logistic quantal response equilibria and precision-homotopy paths.

For precision ``lam`` an agent's quantal response puts probability
proportional to ``exp(lam * utility)`` on each bid. A logistic QRE is a
simultaneous fixed point of both agents' responses; we compute it by damped
iteration and approach best-response behaviour by sweeping ``lam`` upward
along a geometric schedule, warm-starting each solve from the previous one.
Only the traced branch is reported; no claim is made that it reaches every
limit point.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .games import (
    SUPPORT_THRESHOLD,
    AuctionGame,
    NashReport,
    Role,
    StrategyProfile,
    is_nash,
    separating_bid,
)

_TINY = float(np.finfo(float).tiny)


@dataclass(frozen=True)
class LogisticConfig:
    """Solver knobs for one logistic fixed-point computation."""

    lam: float = 0.0
    damping: float = 0.5
    residual_tol: float = 1e-10
    max_iter: int = 200_000
    min_damping: float = 1.0 / 64.0

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be positive")


def logistic_response(payoffs: Sequence[float], lam: float) -> np.ndarray:
    """Choice probabilities proportional to ``exp(lam * payoff)``.

    Computed with max-subtraction so large ``lam`` cannot overflow; the output
    is strictly positive (sub-normal mass is clamped to the smallest positive
    normal and renormalised) and ordered exactly like ``payoffs``.
    """
    x = np.asarray(payoffs, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("payoffs must be a nonempty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("payoffs must be finite")
    if lam < 0:
        raise ValueError(f"lam must be nonnegative, got {lam}")
    z = lam * x
    e = np.exp(z - z.max())
    p = e / e.sum()
    p = np.maximum(p, _TINY)
    return p / p.sum()


@dataclass(frozen=True)
class FixedPointResult:
    profile: StrategyProfile
    residual: float
    converged: bool
    iterations: int


ResponsePair = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def damped_fixed_point(
    game: AuctionGame,
    response: ResponsePair,
    init: StrategyProfile,
    damping: float = 0.5,
    residual_tol: float = 1e-10,
    max_iter: int = 200_000,
    min_damping: float = 1.0 / 64.0,
) -> FixedPointResult:
    """Damped simultaneous iteration ``sigma <- (1-a) sigma + a R(sigma)``.

    ``response`` maps the pair of current expected-utility vectors to the pair
    of response distributions. The residual is the sup-norm defect
    ``|R(sigma) - sigma|`` of the *undamped* map; existence of a fixed point is
    Brouwer's, not contraction's, so the step halves whenever the residual has
    not improved over the trailing ten iterations. Long stretches of monotone
    decrease grow the step back toward one, which matters for the slowly
    contracting near-tie modes that appear at large precision.
    """
    u_low_mat, u_high_mat = game.float_matrices()
    low, high = init.as_arrays()
    alpha = damping
    history: list[float] = []
    calm = 0
    best = (np.inf, low, high)
    for it in range(1, max_iter + 1):
        r_low, r_high = response(u_low_mat @ high, low @ u_high_mat)
        residual = max(np.abs(r_low - low).max(), np.abs(r_high - high).max())
        if residual < best[0]:
            best = (residual, low, high)
        if residual <= residual_tol:
            return FixedPointResult(StrategyProfile.from_arrays(low, high), residual, True, it)
        history.append(residual)
        if len(history) > 10 and history[-1] > history[-11]:
            alpha = max(alpha / 2.0, min_damping)
            del history[:]
            calm = 0
        else:
            calm += 1
            if calm >= 40:
                alpha = min(alpha * 1.25, 1.0)
                calm = 0
        low = (1 - alpha) * low + alpha * r_low
        high = (1 - alpha) * high + alpha * r_high
    residual, low, high = best
    return FixedPointResult(StrategyProfile.from_arrays(low, high), float(residual), False, max_iter)


def qre_fixed_point(
    game: AuctionGame,
    config: LogisticConfig,
    init: Optional[StrategyProfile] = None,
) -> FixedPointResult:
    """Logistic QRE at ``config.lam`` from ``init`` (uniform when omitted).

    The returned profile is interior, and — up to the residual — each agent's
    mix is a logistic response to true expected payoffs, hence weakly payoff
    monotone.
    """
    if init is None:
        init = StrategyProfile.uniform(game.profile.p_bar)
    lam = config.lam

    def respond(u_low: np.ndarray, u_high: np.ndarray):
        return logistic_response(u_low, lam), logistic_response(u_high, lam)

    return damped_fixed_point(
        game,
        respond,
        init,
        damping=config.damping,
        residual_tol=config.residual_tol,
        max_iter=config.max_iter,
        min_damping=config.min_damping,
    )


def default_lambda_schedule(
    start: float = 0.1, factor: float = 1.3, cap: float = 500.0
) -> list[float]:
    """Geometric precision schedule ``start * factor**k`` capped at ``cap``."""
    out = []
    lam = start
    while lam < cap:
        out.append(lam)
        lam *= factor
    out.append(cap)
    return out


@dataclass(frozen=True)
class PathRecord:
    lam: float
    profile: StrategyProfile
    residual: float
    converged: bool
    #: Price bid of the support-rounded profile when it passes a Nash check.
    bid_estimate: Optional[int]


@dataclass(frozen=True)
class QREPath:
    game: AuctionGame
    records: tuple[PathRecord, ...]
    stopped_early: bool = False

    def __post_init__(self) -> None:
        lams = [r.lam for r in self.records]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("path precisions must be strictly increasing")

    @property
    def final(self) -> PathRecord:
        return self.records[-1]


def trace_qre_path(
    game: AuctionGame,
    lambda_schedule: Sequence[float],
    config: LogisticConfig = LogisticConfig(),
    stable_stop: Optional[int] = 5,
    nash_tol: float = 1e-6,
) -> QREPath:
    """Solve a logistic QRE per scheduled ``lam``, warm-starting along the path.

    Non-convergence at a point is recorded (flagged) without aborting. When
    ``stable_stop`` is set, tracing stops once the support-rounded profile has
    verified as a Nash equilibrium with the same price bid for that many
    consecutive points.
    """
    schedule = list(lambda_schedule)
    if not schedule:
        raise ValueError("lambda schedule is empty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("lambda schedule must be strictly increasing")
    records: list[PathRecord] = []
    profile = StrategyProfile.uniform(game.profile.p_bar)
    streak: list[int] = []
    stopped = False
    for lam in schedule:
        result = qre_fixed_point(game, replace(config, lam=lam), init=profile)
        profile = result.profile
        estimate = _bid_estimate(game, profile, nash_tol)
        records.append(PathRecord(lam, profile, result.residual, result.converged, estimate))
        if stable_stop is not None:
            streak = streak + [estimate] if estimate is not None else []
            if len(streak) >= stable_stop and len(set(streak[-stable_stop:])) == 1:
                stopped = lam != schedule[-1]
                break
    return QREPath(game, tuple(records), stopped)


def _bid_estimate(game: AuctionGame, profile: StrategyProfile, nash_tol: float) -> Optional[int]:
    try:
        rounded = profile.rounded()
    except ValueError:
        return None
    report = is_nash(game, rounded, tol=nash_tol)
    return report.separating_bid if report.is_nash else None


def path_limit(
    path: QREPath,
    tol: float = 1e-6,
    support_threshold: float = SUPPORT_THRESHOLD,
) -> tuple[StrategyProfile, NashReport]:
    """Round the final path profile to its support and test it as a Nash limit.

    Sub-threshold probabilities are zeroed and the rest renormalised; the
    returned report carries the verdict (``is_nash`` False means the path has
    not converged to an equilibrium at this tolerance).
    """
    if not path.records:
        raise ValueError("path is empty")
    rounded = path.final.profile.rounded(support_threshold)
    return rounded, is_nash(path.game, rounded, tol=tol)


def refine_limit(
    game: AuctionGame,
    profile: StrategyProfile,
    tol: float = 1e-8,
    max_prune: Optional[int] = None,
) -> tuple[StrategyProfile, NashReport, tuple[tuple[Role, int], ...]]:
    """Identify the limiting equilibrium behind a finite-precision iterate.

    Some fixed points keep trailing mass of order ``1/lam`` on bids that leave
    the support only in the limit (the precision tunes a utility gap to
    ``log(lam)/lam``), so no reachable ``lam`` makes the threshold-rounded
    profile an equilibrium. Since that trailing mass is always the smallest in
    the profile, the limit is recovered by repeatedly deleting the smallest
    supported probability and renormalising until the Nash check passes.
    Returns the refined profile, its report, and the pruned ``(role, bid)``
    pairs; pruning stops, with the last report, once either side would lose
    its whole support.
    """
    pruned: list[tuple[Role, int]] = []
    current = profile
    limit = 2 * game.n_bids if max_prune is None else max_prune
    report = is_nash(game, current, tol=tol)
    while not report.is_nash and len(pruned) < limit:
        low, high = current.as_arrays()
        candidates = [
            (low[b], Role.LOW, b) for b in np.nonzero(low)[0] if low.sum() - low[b] > 0
        ] + [
            (high[b], Role.HIGH, b) for b in np.nonzero(high)[0] if high.sum() - high[b] > 0
        ]
        if not candidates:
            break
        _, role, bid = min(candidates, key=lambda c: (c[0], c[1].value, c[2]))
        if role is Role.LOW:
            low[bid] = 0.0
        else:
            high[bid] = 0.0
        current = StrategyProfile.from_arrays(low / low.sum(), high / high.sum())
        pruned.append((role, int(bid)))
        report = is_nash(game, current, tol=tol)
    return current, report, tuple(pruned)
