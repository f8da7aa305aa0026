"""Which equilibrium payoffs survive approximation by payoff-monotone play.

A Nash equilibrium of an extreme-price auction is *empirically plausible*
when it is the limit of interior, weakly payoff monotone behaviour. For
efficient equilibria this is a closed-form restriction on the
price-determining bid ``p``: the winner-bid auction only admits bids in the
left part of the Nash range (the high-value agent keeps at least half, and
usually about four fifths, of the equity surplus), and the loser-bid auction
mirrors this on the right. :func:`allowed_bids` evaluates the case-by-case
bounds; :func:`construct_witness` certifies sufficiency by actually building
interior payoff-monotone fixed points that converge to a target equilibrium;
:func:`transfer_equilibrium` checks the equilibrium-transfer argument that
pins the same payoff spread on *any* mechanism with equitable equilibria.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .games import (
    AuctionGame,
    NashReport,
    Role,
    StrategyProfile,
    ValuationProfile,
    Variant,
    dual_game,
    expected_utility,
    is_nash,
    payoffs,
    reflect_profile,
)
from .monotonicity import MonotonicityReport, check_weak_monotonicity
from .qre import damped_fixed_point, logistic_response


# ---------------------------------------------------------------------------
# Payoff bounds


class BoundCase(str, Enum):
    """Active branch of the payoff-bound characterisation."""

    EQUAL_VALUES = "equal_values"
    ES_LE_2 = "ES_le_2"
    LOW_VL = "low_vl"                   # WB: many bids left of the Nash range
    MID_VL_WEAK = "mid_vl_weak"
    HIGH_VL_STRICT = "high_vl_strict"
    HIGH_VH = "high_vh"                 # LB: few bids right of the Nash range
    MID_VH_WEAK = "mid_vh_weak"
    LOW_VH_STRICT = "low_vh_strict"


@dataclass(frozen=True)
class EmpiricalBounds:
    """Admissible price bids for one auction variant at one valuation profile."""

    profile: ValuationProfile
    variant: Variant
    allowed_bids: frozenset[int]
    active_case: BoundCase
    #: Bound on the protected agent's payoff (pi_high for WB, pi_low for LB).
    payoff_bound: Fraction
    bound_is_strict: bool
    #: The evaluated case-selection thresholds, keyed by name.
    threshold_values: dict

    def __contains__(self, p: int) -> bool:
        return p in self.allowed_bids


def allowed_bids(profile: ValuationProfile, variant: Variant | str) -> EmpiricalBounds:
    """Evaluate the payoff-bound cases and translate them into allowed bids.

    WB bounds constrain ``pi_high = v_high - p``, LB bounds constrain
    ``pi_low = p``; both are intersected with the Nash range. Weak and strict
    inequalities follow the characterisation exactly. Equal valuations have a
    degenerate one-point range (every equilibrium splits the value equally)
    and are marked :attr:`BoundCase.EQUAL_VALUES` instead of a bound case.
    """
    variant = Variant(variant)
    v_l, v_h = profile.v_low, profile.v_high
    c_l, c_h, pb = profile.c_low, profile.c_high, profile.p_bar
    rng = list(profile.nash_range)
    es = profile.equity_surplus

    if v_l == v_h:
        return EmpiricalBounds(
            profile, variant, frozenset({c_l}), BoundCase.EQUAL_VALUES,
            Fraction(v_l, 2), False, {},
        )

    if variant is Variant.WINNER_BID:
        thresholds = {
            "low_vl_cutoff": Fraction(3 * v_h, 8),
            "strict_cutoff": Fraction(7 * v_h, 12) - Fraction(7, 6),
        }
        if es <= 2:
            case, bound, strict = BoundCase.ES_LE_2, Fraction(v_h, 2) + es, False
            allowed = {p for p in rng if Fraction(v_h - p) == bound}
        else:
            if v_l <= thresholds["low_vl_cutoff"]:
                case = BoundCase.LOW_VL
                bound = Fraction(v_h, 2) + Fraction(es, 2) + Fraction(v_l, 4) - Fraction(1, 2)
                strict = False
            else:
                bound = Fraction(v_h, 2) + Fraction(4 * es, 5) - Fraction(4, 5)
                strict = v_l >= thresholds["strict_cutoff"]
                case = BoundCase.HIGH_VL_STRICT if strict else BoundCase.MID_VL_WEAK
            if strict:
                allowed = {p for p in rng if Fraction(v_h - p) > bound}
            else:
                allowed = {p for p in rng if Fraction(v_h - p) >= bound}
    else:
        thresholds = {
            "high_vh_cutoff": Fraction(v_l, 2) + Fraction(5, 8) * (pb - Fraction(v_l, 2)),
            "strict_cutoff": pb - Fraction(7, 24) * (pb - Fraction(v_l, 2)) - Fraction(7, 12),
        }
        if es <= 2:
            case, bound, strict = BoundCase.ES_LE_2, Fraction(v_l, 2) + es, False
        else:
            if Fraction(v_h, 2) >= thresholds["high_vh_cutoff"]:
                case = BoundCase.HIGH_VH
                bound = Fraction(v_l, 2) + Fraction(es, 2) + Fraction(pb - c_h, 2) - Fraction(1, 2)
                strict = False
            else:
                bound = Fraction(v_l, 2) + Fraction(4 * es, 5) - Fraction(4, 5)
                strict = Fraction(v_h, 2) <= thresholds["strict_cutoff"]
                case = BoundCase.LOW_VH_STRICT if strict else BoundCase.MID_VH_WEAK
        if strict:
            allowed = {p for p in rng if Fraction(p) > bound}
        else:
            allowed = {p for p in rng if Fraction(p) >= bound}

    return EmpiricalBounds(profile, variant, frozenset(allowed), case, bound, strict, thresholds)


@dataclass(frozen=True)
class Classification:
    label: str  # "empirical" | "not_empirical"
    reason: str
    bounds: EmpiricalBounds

    @property
    def empirical(self) -> bool:
        return self.label == "empirical"


def classify_payoff(profile: ValuationProfile, variant: Variant | str, p: int) -> Classification:
    """Classify the efficient equilibrium with price bid ``p``.

    ``p`` must lie in the Nash range. The reason cites the active case and the
    binding payoff bound.
    """
    if p not in profile.nash_range:
        raise ValueError(f"p={p} outside the Nash range {profile.c_low}..{profile.c_high}")
    bounds = allowed_bids(profile, variant)
    if bounds.active_case is BoundCase.EQUAL_VALUES:
        half = Fraction(profile.v_low, 2)
        return Classification(
            "empirical", f"equal valuations: every equilibrium pays ({half}, {half})", bounds
        )
    pay = Fraction(profile.v_high - p) if bounds.variant is Variant.WINNER_BID else Fraction(p)
    agent = "pi_high" if bounds.variant is Variant.WINNER_BID else "pi_low"
    rel = ">" if bounds.bound_is_strict else ">="
    if p in bounds.allowed_bids:
        label, verdict = "empirical", "meets"
    else:
        label, verdict = "not_empirical", "violates"
    reason = (
        f"case {bounds.active_case.value}: {agent}={pay} {verdict} the bound "
        f"{agent} {rel} {bounds.payoff_bound}"
    )
    return Classification(label, reason, bounds)


def pure_empirical(profile: ValuationProfile, variant: Variant | str) -> StrategyProfile:
    """The unique pure-strategy empirically plausible equilibrium.

    WB: low bids ``c_low - 1``, high bids ``c_low``. LB: low bids ``c_high``,
    high bids ``c_high + 1``.
    """
    if profile.v_low >= profile.v_high:
        raise ValueError("pure_empirical requires v_low < v_high")
    if Variant(variant) is Variant.WINNER_BID:
        return StrategyProfile.pure(profile.p_bar, profile.c_low - 1, profile.c_low)
    return StrategyProfile.pure(profile.p_bar, profile.c_high, profile.c_high + 1)


def delta(game: AuctionGame, role: Role, r: int, d: int) -> Fraction:
    """Utility advantage of underbidding: conditional on the co-player bidding
    ``r``, the payoff of any bid strictly left of ``r`` (which is exactly
    ``r`` in the winner-bid auction) minus the payoff of bidding ``d``.

    With ``t = d - v_role/2`` and ``n = d - r`` this equals ``t`` at ``r = d``
    and ``2t - n`` for ``r < d``. Defined only for the winner-bid auction.
    """
    if game.variant is not Variant.WINNER_BID:
        raise ValueError("delta is a winner-bid quantity; reflect loser-bid games first")
    if not 0 <= r <= d <= game.profile.p_bar:
        raise ValueError(f"need 0 <= r <= d <= p_bar, got r={r}, d={d}")
    opp = tuple(Fraction(int(b == r)) for b in game.bids)
    return Fraction(r) - expected_utility(game, role, d, opp)


# ---------------------------------------------------------------------------
# Witness constructions


class WitnessCase(str, Enum):
    """Shape of the perturbed-response construction for one target bid."""

    POINT_MASS = "point_mass"        # p = c_low: both agents near a point mass
    SPLIT_PAIR = "split_pair"        # p = c_low + 1: low splits over two bids
    UNIFORM_BELOW = "uniform_below"  # low near-uniform on {0..p-1}
    WINDOW = "window"                # low near-uniform on {y..p-1}
    WINDOW_EDGE = "window_edge"      # boundary p: window plus an epsilon floor


class WitnessError(RuntimeError):
    """A witness construction failed."""


class WitnessConvergenceError(WitnessError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class WitnessMonotonicityError(WitnessError):
    def __init__(self, message: str, report: MonotonicityReport, index: Optional[int] = None):
        super().__init__(message)
        self.report = report
        self.index = index


@dataclass(frozen=True)
class WitnessConfig:
    """One (epsilon, t) point of a witness schedule plus solver knobs."""

    epsilon: float = 1e-2
    t: float = 100.0
    damping: float = 0.5
    residual_tol: float = 1e-10
    max_iter: int = 100_000
    monotonicity_tol: float = 1e-9

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.t <= 0:
            raise ValueError(f"t must be positive, got {self.t}")


def default_witness_schedule() -> list[tuple[float, float]]:
    """Shrinking-epsilon, growing-precision schedule ``(10^-1-k, 20 * 5^k)``."""
    return [(10.0 ** (-1 - k), 20.0 * 5.0**k) for k in range(4)]


@dataclass(frozen=True)
class WitnessResult:
    profile: StrategyProfile
    monotonicity: MonotonicityReport
    residual: float
    case: WitnessCase
    target: StrategyProfile
    #: Construction quantities (y, n, r, eta, tau) where applicable; for
    #: loser-bid games these are reported in reflected winner-bid coordinates.
    derived: dict
    iterations: int


@dataclass(frozen=True)
class _Plan:
    case: WitnessCase
    fixed_low: np.ndarray
    weight_low: float
    fixed_high: np.ndarray
    weight_high: float
    target: StrategyProfile
    derived: dict


def _point_masses(n_bids: int, weights: dict[int, Fraction]) -> np.ndarray:
    out = np.zeros(n_bids)
    for bid, w in weights.items():
        out[bid] += float(w)
    return out


def _exact_mix(n_bids: int, weights: dict[int, Fraction]) -> tuple:
    return tuple(weights.get(b, Fraction(0)) for b in range(n_bids))


def _window_quantities(game: AuctionGame, p: int) -> tuple[int, int, int, tuple]:
    """``y``, ``n``, the plateau edge ``r``, and the exact window target."""
    c_l, c_h = game.profile.c_low, game.profile.c_high
    y = c_l - 3 * (p - 1 - c_l)
    n = p - y
    if y <= 0:
        raise WitnessError(f"window start y={y} not positive for p={p}")
    target_low = _exact_mix(game.n_bids, {b: Fraction(1, n) for b in range(y, p)})
    utils_high = game.utilities_against(Role.HIGH, target_low)
    r = max(b for b in range(p, game.profile.p_bar + 1) if utils_high[b] >= utils_high[y])
    return y, n, r, target_low


def _plan_winner_bid(game: AuctionGame, p: int, eps: float) -> _Plan:
    profile = game.profile
    c_l, v_l, v_h, pb = profile.c_low, profile.v_low, profile.v_high, profile.p_bar
    n_bids = game.n_bids
    epsf = Fraction(eps).limit_denominator(10**12)

    if p == c_l:
        if not epsf < Fraction(2, pb - 2):
            raise WitnessError(f"point-mass case needs epsilon < 2/(p_bar-2) = {Fraction(2, pb-2)}")
        target = StrategyProfile.pure(pb, c_l - 1, c_l)
        return _Plan(
            WitnessCase.POINT_MASS,
            _point_masses(n_bids, {c_l - 1: 1 - epsf}), eps,
            _point_masses(n_bids, {c_l: 1 - epsf}), eps,
            target, {},
        )

    if p == c_l + 1:
        if not epsf < Fraction(1, 2):
            raise WitnessError("split-pair case needs epsilon < 1/2")
        half = Fraction(1, 2)
        target = StrategyProfile(
            _exact_mix(n_bids, {c_l - 1: half, c_l: half}),
            _exact_mix(n_bids, {c_l + 1: Fraction(1)}),
        )
        return _Plan(
            WitnessCase.SPLIT_PAIR,
            _point_masses(n_bids, {c_l - 1: half - epsf, c_l: half - epsf}), 2 * eps,
            _point_masses(n_bids, {c_l + 1: 1 - epsf}), eps,
            target, {},
        )

    if 8 * v_l <= 3 * v_h:
        if not Fraction(p) <= Fraction(v_h, 4) + Fraction(1, 2):
            raise WitnessError(f"no construction for p={p}: above the admissible cutoff")
        if not epsf < Fraction(1, p):
            raise WitnessError(f"uniform-below case needs epsilon < 1/p = 1/{p}")
        target = StrategyProfile(
            _exact_mix(n_bids, {b: Fraction(1, p) for b in range(p)}),
            _exact_mix(n_bids, {p: Fraction(1)}),
        )
        fixed_low = _point_masses(n_bids, {b: Fraction(1, p) - epsf for b in range(p)})
        fixed_low[p] += float((p - 1) * epsf)
        return _Plan(
            WitnessCase.UNIFORM_BELOW,
            fixed_low, eps,
            _point_masses(n_bids, {p: 1 - epsf}), eps,
            target, {},
        )

    edge = c_l + Fraction(profile.equity_surplus, 5) + Fraction(4, 5)
    if not Fraction(p) <= edge:
        raise WitnessError(f"no construction for p={p}: above the admissible cutoff")
    y, n, r, target_low = _window_quantities(game, p)
    eta = Fraction(epsf, 2 * (r - y + 2))
    target = StrategyProfile(target_low, _exact_mix(n_bids, {p: Fraction(1)}))
    fixed_high = _point_masses(n_bids, {p: 1 - epsf / 2})
    for b in range(y, r + 1):
        fixed_high[b] += float(eta)

    if Fraction(p) < edge:
        if not epsf < Fraction(1, n):
            raise WitnessError(f"window case needs epsilon < 1/n = 1/{n}")
        fixed_low = _point_masses(n_bids, {b: Fraction(1, n) - epsf for b in range(y, p)})
        return _Plan(
            WitnessCase.WINDOW,
            fixed_low, float(n * epsf),
            fixed_high, float(eta),
            target, {"y": y, "n": n, "r": r, "eta": float(eta)},
        )

    # Boundary p: the window exactly balances the high bidder's tie incentive
    # (n = c_high - p + 1), so the low side keeps an epsilon floor below y and
    # on p itself, compensated through tau.
    if not v_l < Fraction(7 * v_h, 12) - Fraction(7, 6):
        # The boundary bid is admissible only in the weak-inequality regime.
        raise WitnessError(f"no construction for p={p}: boundary bid outside the weak regime")
    c_h = profile.c_high
    if n != c_h - p + 1 or (c_h - p) - y < 1:
        raise WitnessError(f"boundary-window invariants failed for p={p} (y={y}, n={n})")
    tau = Fraction(2 * y + 3, 2) * epsf / n
    if not tau < Fraction(1, n):
        raise WitnessError(f"boundary case needs (y+3/2)*epsilon < 1, got epsilon={eps}")
    fixed_low = _point_masses(n_bids, {b: Fraction(1, n) - tau for b in range(y, p)})
    for b in range(y):
        fixed_low[b] += float(epsf)
    fixed_low[p] += float(epsf)
    return _Plan(
        WitnessCase.WINDOW_EDGE,
        fixed_low, float(epsf / 2),
        fixed_high, float(eta),
        target, {"y": y, "n": n, "r": r, "eta": float(eta), "tau": float(tau)},
    )


def _solve_plan(game: AuctionGame, plan: _Plan, cfg: WitnessConfig):
    def respond(u_low: np.ndarray, u_high: np.ndarray):
        low = plan.fixed_low + plan.weight_low * logistic_response(u_low, cfg.t)
        high = plan.fixed_high + plan.weight_high * logistic_response(u_high, cfg.t)
        return low / low.sum(), high / high.sum()

    uniform = np.full(game.n_bids, 1.0 / game.n_bids)
    init = StrategyProfile.from_arrays(
        plan.fixed_low + plan.weight_low * uniform,
        plan.fixed_high + plan.weight_high * uniform,
    )
    return damped_fixed_point(
        game, respond, init,
        damping=cfg.damping, residual_tol=cfg.residual_tol, max_iter=cfg.max_iter,
    )


def construct_witness(game: AuctionGame, target_p: int, cfg: WitnessConfig = WitnessConfig()) -> WitnessResult:
    """Build one interior payoff-monotone fixed point aimed at price bid ``target_p``.

    The response mixes a case-specific anchored distribution with a logistic
    response of precision ``cfg.t``; its fixed point (damped iteration) is
    interior, converges to the target equilibrium as ``epsilon -> 0`` and
    ``t -> inf``, and is weakly payoff monotone for admissible parameters.

    Raises :class:`ValueError` when ``target_p`` is not an admissible bid,
    :class:`WitnessConvergenceError` on a stalled iteration, and
    :class:`WitnessMonotonicityError` when the converged point fails the
    monotonicity check (epsilon too large or t too small: tighten the config).
    Loser-bid games are solved through their reflected winner-bid double.
    """
    profile = game.profile
    if profile.v_low >= profile.v_high:
        raise ValueError("witness constructions require v_low < v_high")
    if game.gamma != Fraction(1, 2):
        raise ValueError("witness constructions assume the uniform tie-break (gamma = 1/2)")
    bounds = allowed_bids(profile, game.variant)
    if target_p not in bounds.allowed_bids:
        raise ValueError(
            f"target bid {target_p} is not admissible for {game.variant.value}; "
            f"allowed: {sorted(bounds.allowed_bids)}"
        )

    if game.variant is Variant.WINNER_BID:
        work_game, work_p = game, target_p
    else:
        work_game, work_p = dual_game(game), profile.p_bar - target_p

    plan = _plan_winner_bid(work_game, work_p, cfg.epsilon)
    solved = _solve_plan(work_game, plan, cfg)
    if not solved.converged:
        raise WitnessConvergenceError(
            f"witness iteration stalled at residual {solved.residual:.3e} for p={target_p}",
            solved.residual,
        )

    if game.variant is Variant.WINNER_BID:
        witness, target = solved.profile, plan.target
        derived = dict(plan.derived)
    else:
        witness, target = reflect_profile(solved.profile), reflect_profile(plan.target)
        derived = dict(plan.derived, dual_target=work_p)

    report = check_weak_monotonicity(game, witness, tol=cfg.monotonicity_tol)
    if not report.holds:
        raise WitnessMonotonicityError(
            f"witness for p={target_p} violates weak payoff monotonicity "
            f"({len(report.violations)} pairs at tol {cfg.monotonicity_tol})",
            report,
        )
    return WitnessResult(
        witness, report, solved.residual, plan.case, target, derived, solved.iterations
    )


@dataclass(frozen=True)
class WitnessSequenceReport:
    """A full sufficiency run: every element interior and payoff monotone."""

    results: tuple[WitnessResult, ...]
    target: StrategyProfile
    #: Sup-norm distance of each element to the target equilibrium.
    distances: tuple[float, ...]
    final_rounded: StrategyProfile
    final_report: NashReport

    @property
    def profiles(self) -> tuple[StrategyProfile, ...]:
        return tuple(r.profile for r in self.results)

    @property
    def final_distance(self) -> float:
        return self.distances[-1]


def witness_sequence(
    game: AuctionGame,
    target_p: int,
    schedule: Optional[Sequence[tuple[float, float]]] = None,
    cfg: WitnessConfig = WitnessConfig(),
) -> WitnessSequenceReport:
    """Run :func:`construct_witness` along a shrinking-epsilon schedule.

    ``schedule`` is a list of ``(epsilon, t)`` with decreasing epsilon and
    increasing t (default :func:`default_witness_schedule`). Every element must
    come out interior and weakly payoff monotone; a failure aborts with the
    failing index attached. The final element is support-rounded (threshold
    scaled to its distance from the target, so vanishing anchor mass drops
    out) and re-verified as a Nash equilibrium.
    """
    pts = list(default_witness_schedule() if schedule is None else schedule)
    if not pts:
        raise ValueError("witness schedule is empty")
    eps_seq = [e for e, _ in pts]
    t_seq = [t for _, t in pts]
    if any(b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise ValueError("witness schedule must have strictly decreasing epsilon")
    if any(b <= a for a, b in zip(t_seq, t_seq[1:])):
        raise ValueError("witness schedule must have strictly increasing t")

    results: list[WitnessResult] = []
    for idx, (eps, t) in enumerate(pts):
        point_cfg = WitnessConfig(
            epsilon=eps, t=t, damping=cfg.damping, residual_tol=cfg.residual_tol,
            max_iter=cfg.max_iter, monotonicity_tol=cfg.monotonicity_tol,
        )
        try:
            result = construct_witness(game, target_p, point_cfg)
        except WitnessMonotonicityError as exc:
            raise WitnessMonotonicityError(
                f"schedule point {idx} (epsilon={eps}, t={t}): {exc}", exc.report, index=idx
            ) from exc
        if not result.profile.is_interior():
            raise WitnessError(f"schedule point {idx} produced a non-interior profile")
        results.append(result)

    target = results[-1].target
    distances = tuple(r.profile.distance(target) for r in results)
    threshold = max(1e-9, 3.0 * distances[-1])
    final_rounded = results[-1].profile.rounded(threshold)
    final_report = is_nash(game, final_rounded, tol=1e-6)
    return WitnessSequenceReport(tuple(results), target, distances, final_rounded, final_report)


# ---------------------------------------------------------------------------
# Equilibrium transfer


def transfer_equilibrium(game: AuctionGame, profile: StrategyProfile, t: int) -> bool:
    """Check the transfer argument: an efficient equitable equilibrium of the
    squeezed valuations ``v* = (v_low + 2t, v_low + 2t + 2)`` stays an
    equilibrium under the true valuations, with ``pi_low`` between
    ``v_low/2 + t`` and ``v_low/2 + t + 1``.

    The supplied profile must be an efficient, equitable, exact Nash
    equilibrium of the ``v*`` game (otherwise the input is rejected with
    :class:`ValueError`, as distinct from the transfer check failing).
    """
    base = game.profile
    if base.v_low >= base.v_high:
        raise ValueError("transfer check requires v_low < v_high")
    if not 0 <= t <= base.equity_surplus - 1:
        raise ValueError(f"need 0 <= t <= ES-1 = {base.equity_surplus - 1}, got {t}")
    star_low = 2 * (base.c_low + t)
    star = ValuationProfile(star_low, star_low + 2, base.p_bar)
    star_game = AuctionGame(star, game.variant, game.gamma)

    report = is_nash(star_game, profile, tol=0)
    lo, hi = Fraction(star.c_low), Fraction(star.c_high)
    if not (report.is_nash and report.efficient and lo <= report.payoffs[0] <= hi):
        raise ValueError(
            "rejected input: profile is not an efficient equitable Nash equilibrium "
            f"of the squeezed game {star_low, star_low + 2}"
        )

    true_report = is_nash(game, profile, tol=0)
    pi_low = true_report.payoffs[0]
    return true_report.is_nash and lo <= pi_low <= hi
