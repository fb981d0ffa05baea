"""Exception hierarchy.

Caller bugs (bad arguments) derive from ``DomainError``; market or position
conditions that a simulation can legitimately run into derive from
``LiquidationError`` so callers can branch on them.
"""


class DomainError(ValueError):
    """An argument lies outside the operation's domain."""


class LiquidationError(Exception):
    """Base class for position/market conditions reported to the caller."""


class MarketExhausted(LiquidationError):
    """Linear impact discount reached 100%; the sale cannot execute."""


class WipedOut(LiquidationError):
    """Collateral value is zero while debt is outstanding (infinite LTV)."""


class NoDebt(LiquidationError):
    """Debt is zero, so health is undefined."""


class NotLiquidatable(LiquidationError):
    """Position health is at or above 1."""


class InsufficientCollateral(LiquidationError):
    """The seizure required by a step exceeds the collateral held."""


class NoFrontierInRange(LiquidationError):
    """No toxicity sign change inside the requested LTV bracket."""


class ConfigError(ValueError):
    """Invalid scenario or grid configuration.

    ``path`` is the dotted field path of the offending entry.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
