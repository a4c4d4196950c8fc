"""Utilities package for specqa"""

from .logger import setup_logger, RunLogger
from .diagnostics import Diagnostic, DiagnosticLog
from .errors import SpecQAError, DataError, UsageError, ProviderError
from .formatting import ReportFactory, Marker
from .constants import *

__all__ = [
    'setup_logger',
    'RunLogger',
    'Diagnostic',
    'DiagnosticLog',
    'SpecQAError',
    'DataError',
    'UsageError',
    'ProviderError',
    'ReportFactory',
    'Marker'
]
