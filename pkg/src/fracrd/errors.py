"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class FracError(Exception):
    """Base class for all errors raised by :mod:`fracrd`."""


class InvalidParams(FracError, ValueError):
    """A parameter violates a documented constraint."""


class NumericalFailure(FracError, ArithmeticError):
    """A numerical routine could not reach its requested accuracy."""


class NonConvergence(NumericalFailure):
    pass


class SeriesDiverged(NumericalFailure):
    pass


class TailTooFat(NumericalFailure):
    pass


class OracleFailure(NumericalFailure):
    pass


class ContourFailure(NumericalFailure):
    pass


class QuadratureFailure(NumericalFailure):
    pass


class StabilityFailure(NumericalFailure):
    pass
