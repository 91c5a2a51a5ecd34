"""
Shared Exceptions
---------------
Structured error classes used across the simulator, the CLI and the HTTP service.
"""

from typing import Dict, Any, Optional


class FdRisError(Exception):
    """Base class for simulator errors"""
    def __init__(self, message: str, error_code: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': self.message,
            'error_code': self.error_code,
            'details': self.details,
        }


class ModelDomainError(FdRisError, ValueError):
    """An argument lies outside the domain of the signal or channel model"""


class ConfigError(FdRisError):
    """A scenario file could not be parsed or failed validation"""


class RecordError(FdRisError):
    """A persisted run record is missing or unreadable"""
