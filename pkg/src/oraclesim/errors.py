"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class DomainError(SimulationError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ContractViolationError(SimulationError):
    """An operation was invoked in a state its contract forbids."""


class InsufficientPoolError(SimulationError):
    """A selection was requested from a pool with too few candidates."""


class RegistrationError(SimulationError):
    """Node registration was rejected."""


class DraftingError(SimulationError):
    """The test-case repository cannot supply the requested cases."""


class ConfigError(SimulationError, ValueError):
    """Run configuration failed validation.

    ``fields`` maps each offending field name to its error message.
    """

    def __init__(self, fields: dict[str, str]):
        self.fields = dict(fields)
        detail = "; ".join(f"{name}: {msg}" for name, msg in sorted(self.fields.items()))
        super().__init__(f"invalid configuration: {detail}")
