"""Optimal time-discounted regret for binary sequence prediction.

Modules:
    specfun     erfi, Dawson, the Hermite payoff family and its slope-capped form
    curves      tabulated payoff curves and steady-state feasibility
    strategies  betting rules
    dp          exact fixed-horizon minimax dynamic programming
    sim         game engine and adversaries
    tradeoff    two-expert regret trade-offs and the optimal constant
    multiscale  residual checks for the two-window system
    cli         command-line interface
"""

__version__ = "0.1.0"
