"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class AccuracyError(RuntimeError):
    """A numerical integration lost unitarity beyond tolerance."""


class DegeneracyError(ArithmeticError):
    """A closed-form expression hit a vanishing denominator."""
