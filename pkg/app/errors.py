"""
Exception hierarchy for the bayes-tree-planner engine
"""
from typing import Any, Dict, Optional


class BayesPlanError(Exception):
    """Base exception for planner, environment and harness failures"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class InvalidParameterError(BayesPlanError):
    """A constructor received a value outside its domain (e.g. negative std)"""
    pass


class InvalidArgumentError(BayesPlanError):
    """An operation received an argument outside its domain"""
    pass


class EnumerationLimitError(InvalidArgumentError):
    """A brute-force oracle refused an environment that is too large to enumerate"""
    pass


class TreeLogicError(BayesPlanError):
    """The search tree was used inconsistently (planner bug)"""
    pass


class InvalidConfigError(BayesPlanError):
    """Planner or experiment configuration is invalid"""
    pass


class GenerationError(BayesPlanError):
    """Procedural environment generation failed"""
    pass


class ResultsStoreError(BayesPlanError):
    """Results could not be written or read back"""
    pass
