"""Equilibrium laboratory for winner-bid and loser-bid dissolution auctions.

The package computes Nash equilibria of the two extreme-price auctions as
finite games, solves their logistic quantal response equilibria along
precision homotopies, checks (m-)weak payoff monotonicity, and evaluates and
certifies the closed-form bounds on which equilibrium payoffs are empirically
plausible.
"""

from .games import (
    SUPPORT_THRESHOLD,
    AuctionGame,
    NashReport,
    Role,
    StrategyProfile,
    ValuationProfile,
    Variant,
    best_response_set,
    dual_game,
    efficient_nash_payoffs,
    enumerate_pure_nash,
    expected_utility,
    is_nash,
    low_win_probability,
    make_auction,
    payoffs,
    reflect_profile,
    separating_bid,
    symmetric_cap,
    utility_vector,
)
from .monotonicity import (
    MonotonicityReport,
    Violation,
    check_m_monotonicity,
    check_weak_monotonicity,
    monotone_probability_cap,
    probability_cap_report,
)
from .qre import (
    FixedPointResult,
    LogisticConfig,
    PathRecord,
    QREPath,
    damped_fixed_point,
    default_lambda_schedule,
    logistic_response,
    path_limit,
    qre_fixed_point,
    refine_limit,
    trace_qre_path,
)
from .empirical import (
    BoundCase,
    Classification,
    EmpiricalBounds,
    WitnessCase,
    WitnessConfig,
    WitnessError,
    WitnessMonotonicityError,
    WitnessResult,
    WitnessSequenceReport,
    allowed_bids,
    classify_payoff,
    construct_witness,
    default_witness_schedule,
    delta,
    pure_empirical,
    transfer_equilibrium,
    witness_sequence,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
