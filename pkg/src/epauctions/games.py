"""Finite winner-bid and loser-bid auctions for two-agent partnership dissolution.

Two agents jointly own an object. Each submits a sealed bid from
``{0, ..., p_bar}``; the higher bidder receives the object and a transfer is
paid to the other agent: the winner's own bid (winner-bid auction, WB) or the
loser's bid (loser-bid auction, LB). Ties give the object to the high-value
agent with probability ``gamma``. Utilities are quasi-linear: ``value - price``
when receiving the object, ``price`` when being paid.

Everything Nash-facing here runs in exact rational arithmetic
(:class:`fractions.Fraction`); float matrices are exposed for the iterative
solvers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np

Rational = Union[int, Fraction]
Scalar = Union[int, float, Fraction]

#: Probabilities at or below this are treated as zero in float profiles.
SUPPORT_THRESHOLD = 1e-9


class Variant(str, Enum):
    """Which bid sets the transfer price."""

    WINNER_BID = "wb"
    LOSER_BID = "lb"


class Role(str, Enum):
    LOW = "low"
    HIGH = "high"


def _as_fraction(x: Scalar, what: str) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**9)
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{what} must be rational, got {x!r}") from exc


@dataclass(frozen=True)
class ValuationProfile:
    """An even valuation pair ``v_low <= v_high`` with bid cap ``p_bar``.

    The cap must leave at least two bids above half the high valuation
    (``p_bar >= v_high/2 + 2``); half-valuations ``c_low = v_low/2`` and
    ``c_high = v_high/2`` are then integers and every equilibrium
    price-determining bid lives in ``{c_low, ..., c_high}``.
    """

    v_low: int
    v_high: int
    p_bar: int

    def __post_init__(self) -> None:
        for name, v in (("v_low", self.v_low), ("v_high", self.v_high)):
            if not isinstance(v, int) or v % 2 != 0:
                raise ValueError(f"{name} must be an even integer, got {v!r}")
        if not 2 < self.v_low <= self.v_high:
            raise ValueError(
                f"valuations must satisfy 2 < v_low <= v_high, got ({self.v_low}, {self.v_high})"
            )
        if not isinstance(self.p_bar, int) or self.p_bar < self.v_high // 2 + 2:
            raise ValueError(
                f"p_bar must be an integer >= v_high/2 + 2 = {self.v_high // 2 + 2}, got {self.p_bar!r}"
            )

    @property
    def c_low(self) -> int:
        return self.v_low // 2

    @property
    def c_high(self) -> int:
        return self.v_high // 2

    @property
    def equity_surplus(self) -> int:
        """The divisible gain beyond each agent's guaranteed half value."""
        return self.c_high - self.c_low

    @property
    def nash_range(self) -> range:
        """Integer bids ``{c_low, ..., c_high}`` hosting every equilibrium price."""
        return range(self.c_low, self.c_high + 1)

    @property
    def bids(self) -> range:
        return range(self.p_bar + 1)


def symmetric_cap(v_low: int, v_high: int) -> int:
    """Cap ``c_low + c_high``: equally many bids on each side of the Nash range."""
    return v_low // 2 + v_high // 2


@dataclass(frozen=True)
class AuctionGame:
    """A concrete finite auction game: valuations, variant, and tie weight."""

    profile: ValuationProfile
    variant: Variant
    gamma: Fraction = Fraction(1, 2)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "gamma", _as_fraction(self.gamma, "gamma"))
        if not Fraction(1, 2) <= self.gamma <= 1:
            raise ValueError(f"gamma must lie in [1/2, 1], got {self.gamma}")

    @property
    def bids(self) -> range:
        return self.profile.bids

    @property
    def n_bids(self) -> int:
        return self.profile.p_bar + 1

    def value(self, role: Role) -> int:
        return self.profile.v_low if Role(role) is Role.LOW else self.profile.v_high

    def pure_utilities(self, bid_low: int, bid_high: int) -> tuple[Fraction, Fraction]:
        """Exact expected utilities ``(u_low, u_high)`` of a pure bid pair."""
        v_l, v_h = self.profile.v_low, self.profile.v_high
        if bid_high > bid_low:
            price = bid_high if self.variant is Variant.WINNER_BID else bid_low
            return Fraction(price), Fraction(v_h - price)
        if bid_low > bid_high:
            price = bid_low if self.variant is Variant.WINNER_BID else bid_high
            return Fraction(v_l - price), Fraction(price)
        b = Fraction(bid_low)
        g = self.gamma
        return (1 - g) * (v_l - b) + g * b, g * (v_h - b) + (1 - g) * b

    def exact_matrices(self) -> tuple[tuple[tuple[Fraction, ...], ...], tuple[tuple[Fraction, ...], ...]]:
        """Utility tables ``U[bid_low][bid_high]`` for each agent, as Fractions."""
        return _exact_matrices(self)

    def float_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Float copies of :meth:`exact_matrices` (read-only arrays)."""
        return _float_matrices(self)

    def utilities_against(self, role: Role, opp: Sequence[Scalar]) -> list[Fraction]:
        """Exact expected utility of every own bid against opponent mix ``opp``."""
        opp = _validated_mix(opp, self.n_bids)
        u_low, u_high = self.exact_matrices()
        if Role(role) is Role.LOW:
            return [sum(u_low[b][d] * opp[d] for d in self.bids) for b in self.bids]
        return [sum(u_high[d][b] * opp[d] for d in self.bids) for b in self.bids]


@lru_cache(maxsize=None)
def _exact_matrices(game: AuctionGame):
    n = game.n_bids
    u_low = tuple(
        tuple(game.pure_utilities(i, j)[0] for j in range(n)) for i in range(n)
    )
    u_high = tuple(
        tuple(game.pure_utilities(i, j)[1] for j in range(n)) for i in range(n)
    )
    return u_low, u_high


@lru_cache(maxsize=None)
def _float_matrices(game: AuctionGame) -> tuple[np.ndarray, np.ndarray]:
    u_low, u_high = _exact_matrices(game)
    a = np.array([[float(x) for x in row] for row in u_low])
    b = np.array([[float(x) for x in row] for row in u_high])
    a.flags.writeable = False
    b.flags.writeable = False
    return a, b


def make_auction(
    profile: ValuationProfile | tuple[int, int] | tuple[int, int, int],
    variant: Variant | str = Variant.WINNER_BID,
    gamma: Scalar = Fraction(1, 2),
    p_bar: Optional[int] = None,
) -> AuctionGame:
    """Build an auction game, rejecting invalid valuations, caps, or tie weights.

    ``profile`` may be a :class:`ValuationProfile` or a ``(v_low, v_high)``
    pair, in which case ``p_bar`` defaults to the minimal legal cap
    ``v_high/2 + 2``.
    """
    if not isinstance(profile, ValuationProfile):
        vals = tuple(profile)
        if len(vals) == 3 and p_bar is None:
            v_low, v_high, p_bar = vals
        elif len(vals) == 2:
            v_low, v_high = vals
        else:
            raise ValueError(f"expected (v_low, v_high[, p_bar]), got {profile!r}")
        if p_bar is None:
            if not (isinstance(v_high, int) and v_high % 2 == 0):
                raise ValueError(f"v_high must be an even integer, got {v_high!r}")
            p_bar = v_high // 2 + 2
        profile = ValuationProfile(v_low, v_high, p_bar)
    elif p_bar is not None and p_bar != profile.p_bar:
        raise ValueError("p_bar given twice with different values")
    return AuctionGame(profile, Variant(variant), _as_fraction(gamma, "gamma"))


def _validated_mix(mix: Sequence[Scalar], n: int) -> tuple:
    mix = tuple(mix)
    if len(mix) != n:
        raise ValueError(f"distribution has length {len(mix)}, expected {n}")
    if any(isinstance(x, float) for x in mix):
        arr = np.asarray(mix, dtype=float)
        if (arr < -1e-12).any() or abs(arr.sum() - 1.0) > 1e-12:
            raise ValueError("not a probability distribution")
        return mix
    total = sum(Fraction(x) for x in mix)
    if any(Fraction(x) < 0 for x in mix) or total != 1:
        raise ValueError("not a probability distribution")
    return mix


@dataclass(frozen=True)
class StrategyProfile:
    """A pair of mixed strategies over the common bid set.

    Entries may be exact (``int``/``Fraction``) or floats; exact profiles keep
    exact support and payoff computations, float profiles use
    :data:`SUPPORT_THRESHOLD` when deciding what counts as played.
    """

    sigma_low: tuple
    sigma_high: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma_low", _validated_mix(self.sigma_low, len(self.sigma_low)))
        object.__setattr__(self, "sigma_high", _validated_mix(self.sigma_high, len(self.sigma_high)))
        if len(self.sigma_low) != len(self.sigma_high):
            raise ValueError("agents must share one bid set")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def pure(p_bar: int, bid_low: int, bid_high: int) -> "StrategyProfile":
        if not (0 <= bid_low <= p_bar and 0 <= bid_high <= p_bar):
            raise ValueError("pure bids outside the bid set")
        low = tuple(Fraction(int(b == bid_low)) for b in range(p_bar + 1))
        high = tuple(Fraction(int(b == bid_high)) for b in range(p_bar + 1))
        return StrategyProfile(low, high)

    @staticmethod
    def uniform(p_bar: int) -> "StrategyProfile":
        w = Fraction(1, p_bar + 1)
        return StrategyProfile((w,) * (p_bar + 1), (w,) * (p_bar + 1))

    @staticmethod
    def from_arrays(sigma_low: np.ndarray, sigma_high: np.ndarray) -> "StrategyProfile":
        return StrategyProfile(tuple(float(x) for x in sigma_low), tuple(float(x) for x in sigma_high))

    # -- views -------------------------------------------------------------
    def sigma(self, role: Role) -> tuple:
        return self.sigma_low if Role(role) is Role.LOW else self.sigma_high

    @property
    def is_exact(self) -> bool:
        return not any(isinstance(x, float) for x in self.sigma_low + self.sigma_high)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.asarray([float(x) for x in self.sigma_low]),
            np.asarray([float(x) for x in self.sigma_high]),
        )

    def support(self, role: Role, threshold: float = SUPPORT_THRESHOLD) -> tuple[int, ...]:
        sig = self.sigma(role)
        if self.is_exact:
            return tuple(b for b, x in enumerate(sig) if x > 0)
        return tuple(b for b, x in enumerate(sig) if x > threshold)

    def is_interior(self) -> bool:
        return all(x > 0 for x in self.sigma_low) and all(x > 0 for x in self.sigma_high)

    def distance(self, other: "StrategyProfile") -> float:
        a1, a2 = self.as_arrays()
        b1, b2 = other.as_arrays()
        return max(np.abs(a1 - b1).max(), np.abs(a2 - b2).max())

    def rounded(self, threshold: float = SUPPORT_THRESHOLD) -> "StrategyProfile":
        """Zero out sub-threshold mass and renormalise (always exact-free floats)."""
        low, high = self.as_arrays()
        low = np.where(low > threshold, low, 0.0)
        high = np.where(high > threshold, high, 0.0)
        if low.sum() == 0 or high.sum() == 0:
            raise ValueError("rounding removed all mass; threshold too large")
        return StrategyProfile.from_arrays(low / low.sum(), high / high.sum())


@dataclass(frozen=True)
class NashReport:
    """Outcome of a Nash check: worst regret, price bid, efficiency, payoffs."""

    is_nash: bool
    max_regret: Scalar
    separating_bid: Optional[int]
    efficient: bool
    payoffs: tuple[Scalar, Scalar]


def expected_utility(game: AuctionGame, role: Role, bid: int, opp: Sequence[Scalar]) -> Scalar:
    """Expected utility of ``bid`` for ``role`` against opponent mix ``opp``.

    Exact (Fraction) when ``opp`` is rational-valued, float otherwise.
    """
    if not 0 <= bid <= game.profile.p_bar:
        raise ValueError(f"bid {bid} outside bid set 0..{game.profile.p_bar}")
    opp = _validated_mix(opp, game.n_bids)
    exact = not any(isinstance(x, float) for x in opp)
    u_low, u_high = game.exact_matrices()
    if Role(role) is Role.LOW:
        cells = [u_low[bid][d] for d in game.bids]
    else:
        cells = [u_high[d][bid] for d in game.bids]
    if exact:
        return sum(c * q for c, q in zip(cells, opp))
    return float(sum(float(c) * float(q) for c, q in zip(cells, opp)))


def utility_vector(game: AuctionGame, role: Role, opp: Sequence[Scalar]) -> np.ndarray:
    """Float expected-utility vector of every own bid against ``opp``."""
    u_low, u_high = game.float_matrices()
    arr = np.asarray([float(x) for x in opp])
    return u_low @ arr if Role(role) is Role.LOW else arr @ u_high


def best_response_set(
    game: AuctionGame, role: Role, opp: Sequence[Scalar], tol: Scalar = 0
) -> set[int]:
    """All bids whose expected utility is within ``tol`` of the best one."""
    utils = game.utilities_against(role, opp) if not any(
        isinstance(x, float) for x in tuple(opp)
    ) else list(utility_vector(game, role, opp))
    best = max(utils)
    return {b for b, u in enumerate(utils) if u >= best - tol}


def low_win_probability(game: AuctionGame, profile: StrategyProfile) -> Scalar:
    """Probability that the low-value agent receives the object."""
    sl, sh = profile.sigma_low, profile.sigma_high
    if profile.is_exact:
        win = sum(
            Fraction(sl[i]) * Fraction(sh[j]) for i in game.bids for j in game.bids if i > j
        )
        tie = sum(Fraction(sl[i]) * Fraction(sh[i]) for i in game.bids)
        return win + (1 - game.gamma) * tie
    a, b = profile.as_arrays()
    outer = np.outer(a, b)
    win = float(np.tril(outer, k=-1).sum())
    tie = float(np.trace(outer))
    return win + float(1 - game.gamma) * tie


def payoffs(game: AuctionGame, profile: StrategyProfile) -> tuple[Scalar, Scalar]:
    """Expected payoff pair ``(pi_low, pi_high)``."""
    if profile.is_exact:
        u_low, u_high = game.exact_matrices()
        sl, sh = profile.sigma_low, profile.sigma_high
        pi_l = sum(sl[i] * sh[j] * u_low[i][j] for i in game.bids for j in game.bids if sl[i] and sh[j])
        pi_h = sum(sl[i] * sh[j] * u_high[i][j] for i in game.bids for j in game.bids if sl[i] and sh[j])
        return pi_l, pi_h
    ul, uh = game.float_matrices()
    a, b = profile.as_arrays()
    return float(a @ ul @ b), float(a @ uh @ b)


def _is_efficient(game: AuctionGame, profile: StrategyProfile, tol: float = SUPPORT_THRESHOLD) -> bool:
    # Efficient = the higher-value agent receives the object (exactly, or up to
    # the float support threshold).
    p = low_win_probability(game, profile)
    if profile.is_exact and game.profile.v_low < game.profile.v_high:
        return p == 0
    return float(p) < tol


def separating_bid(
    game: AuctionGame, profile: StrategyProfile, threshold: float = SUPPORT_THRESHOLD
) -> Optional[tuple[int, bool]]:
    """The price-determining bid ``p`` of a (candidate) equilibrium profile.

    Returns ``(p, efficient)`` where ``p`` lies in the Nash range, the low
    agent's support sits in ``{0..p}``, the high agent's in ``{p..p_bar}``,
    and ``p`` is played by the high agent (WB) or the low agent (LB). Returns
    ``None`` when no such bid exists, which signals the profile is not a Nash
    equilibrium of an extreme-price auction.
    """
    supp_low = profile.support(Role.LOW, threshold)
    supp_high = profile.support(Role.HIGH, threshold)
    if not supp_low or not supp_high:
        return None
    if game.variant is Variant.WINNER_BID:
        p = min(supp_high)
    else:
        p = max(supp_low)
    if p not in game.profile.nash_range:
        return None
    if max(supp_low) > p or min(supp_high) < p:
        return None
    return p, _is_efficient(game, profile, threshold)


def is_nash(game: AuctionGame, profile: StrategyProfile, tol: Scalar = 0) -> NashReport:
    """Check mutual best responses on supports; exact when the profile is exact.

    ``max_regret`` is the worst gap between an agent's best reply payoff and
    the payoff of a bid in that agent's support.
    """
    use_exact = profile.is_exact
    regrets = []
    for role in (Role.LOW, Role.HIGH):
        opp = profile.sigma(Role.HIGH if role is Role.LOW else Role.LOW)
        if use_exact:
            utils = game.utilities_against(role, opp)
        else:
            utils = list(utility_vector(game, role, opp))
        best = max(utils)
        supp = profile.support(role)
        regrets.append(max(best - utils[b] for b in supp))
    max_regret = max(regrets)
    nash = max_regret <= tol
    sep = separating_bid(game, profile) if nash else None
    if sep is None:
        p, eff = None, False
    else:
        p, eff = sep
    return NashReport(nash, max_regret, p, eff, payoffs(game, profile))


def enumerate_pure_nash(game: AuctionGame) -> list[StrategyProfile]:
    """Exhaustively scan all pure bid pairs and keep exact zero-regret ones."""
    u_low, u_high = game.exact_matrices()
    n = game.n_bids
    col_max = [max(u_low[i][j] for i in range(n)) for j in range(n)]  # best reply of low to j
    row_max = [max(u_high[i][j] for j in range(n)) for i in range(n)]  # best reply of high to i
    found = []
    for a, b in itertools.product(range(n), range(n)):
        if u_low[a][b] == col_max[b] and u_high[a][b] == row_max[a]:
            found.append(StrategyProfile.pure(game.profile.p_bar, a, b))
    return found


def efficient_nash_payoffs(profile: ValuationProfile) -> set[tuple[Fraction, Fraction]]:
    """Efficient equilibrium payoff pairs: the integer splits of the equity surplus."""
    if profile.v_low == profile.v_high:
        half = Fraction(profile.v_low, 2)
        return {(half, half)}
    es = profile.equity_surplus
    return {
        (Fraction(profile.c_low + es - t), Fraction(profile.c_high + t))
        for t in range(es + 1)
    }


def dual_game(game: AuctionGame) -> AuctionGame:
    """The reflected game: LB and WB swap under ``b -> p_bar - b``.

    An LB game with valuations ``(v_low, v_high)`` and cap ``p_bar`` is the WB
    game with valuations ``(2 p_bar - v_high, 2 p_bar - v_low)`` once bids are
    reflected and roles swapped; each agent's utility shifts by a constant, so
    equilibria, quantal responses, and monotonicity all carry over verbatim.
    """
    pb = game.profile.p_bar
    mirrored = ValuationProfile(2 * pb - game.profile.v_high, 2 * pb - game.profile.v_low, pb)
    other = Variant.LOSER_BID if game.variant is Variant.WINNER_BID else Variant.WINNER_BID
    return AuctionGame(mirrored, other, game.gamma)


def reflect_profile(profile: StrategyProfile) -> StrategyProfile:
    """Map strategies through the duality: reverse bid order and swap roles."""
    return StrategyProfile(tuple(reversed(profile.sigma_high)), tuple(reversed(profile.sigma_low)))
