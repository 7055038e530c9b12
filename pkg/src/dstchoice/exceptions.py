"""Error hierarchy.

Two families matter to callers: ``InputError`` (the file or arguments are
malformed, exit code 1) and ``ModelRejection`` (the data are well formed but
reject the model, exit code 2).
"""
from __future__ import annotations

from typing import Any


class DSTError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "details": self.details}


class InputError(DSTError, ValueError):
    exit_code = 1


class ModelRejection(DSTError):
    exit_code = 2


# input problems
class AlternativeNotInMenu(InputError): ...
class MenuOutsideUniverse(InputError): ...
class UniverseMismatch(InputError): ...
class InvalidReplicaCount(InputError): ...
class EmptyMenuCollection(InputError): ...
class MissingMenu(InputError): ...
class DomainError(InputError): ...
class UniverseTooLarge(InputError): ...
class MenuTooLarge(InputError): ...
class ParseError(InputError): ...
class NormalizationError(InputError): ...
class DuplicateCell(InputError): ...
class IncompleteData(InputError): ...
class WrongUniverseSize(InputError): ...
class ObjectiveUnsupported(InputError): ...
class NoAdmissibleTriple(InputError): ...
class PerceivedUtilityTie(InputError): ...
class ConfigError(InputError): ...


# the data reject the model
class ZeroProbability(ModelRejection): ...
class ZeroDenominator(ModelRejection): ...
class RationalityViolation(ModelRejection): ...
class Ambiguous(ModelRejection): ...
class InconsistentAlpha(ModelRejection): ...
class NonPositiveWeight(ModelRejection): ...
class NonConvergence(ModelRejection): ...
class DegenerateVariance(ModelRejection): ...
class BlockMarschakViolation(ModelRejection): ...
class NormalizationFailure(ModelRejection): ...
class MidoViolation(ModelRejection): ...
class InfeasibleModel(ModelRejection): ...
class NoRepresentation(ModelRejection): ...
class NotPositive(ModelRejection): ...
class InconsistentRanking(ModelRejection): ...
class AxiomViolation(ModelRejection): ...
