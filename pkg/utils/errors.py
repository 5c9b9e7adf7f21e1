class ContractError(Exception):
    """Base class for failures raised by the contract solvers."""


class DensityError(ValueError):
    """A signal density failed validation or was queried incorrectly."""


class ExtrapolationError(DensityError):
    """A tabulated density or cost was queried outside its grid hull."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation (e.g. lambda <= 0)."""


class DimensionError(ValueError):
    """The requested state dimension does not match the density's dimension."""


class ConfigError(ValueError):
    """A run configuration is invalid or references a missing file."""


class InfeasibleContractError(ContractError):
    """No contract satisfies the agent's participation constraint."""

    def __init__(self, message: str = "no feasible contract"):
        super().__init__(message)


class PreconditionError(ContractError):
    """A structural precondition of a construction does not hold (e.g. IEA fails)."""
