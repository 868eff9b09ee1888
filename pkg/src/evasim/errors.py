"""Exception types shared across the package."""


class EvasimError(Exception):
    pass


class ContractError(EvasimError, ValueError):
    """A precondition of an operation was violated by the caller."""


class ParseError(EvasimError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class SchemaError(EvasimError, ValueError):
    pass


class TrainingError(EvasimError, ValueError):
    pass


class StratificationError(EvasimError, ValueError):
    pass


class BudgetExhausted(EvasimError, RuntimeError):
    """Raised by an oracle when a probe would exceed its budget.

    The failed probe is not charged, so the caller may raise the budget and retry.
    """


class AttackInfeasible(EvasimError, RuntimeError):
    pass


class RunError(EvasimError, RuntimeError):
    pass


class ConfigError(EvasimError, ValueError):
    pass
