"""
Error types, error bookkeeping and exit-code mapping for the synchronverter toolkit.
"""

import functools
import logging
import traceback
from collections import Counter, deque
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Any, Callable, Deque, Dict, Optional

logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_NUMERIC = 3
EXIT_BAD_CONFIG = 4


class SynchronverterError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = EXIT_NUMERIC


class ConfigError(SynchronverterError):
    """Configuration file or environment settings are invalid."""

    exit_code = EXIT_BAD_CONFIG


class InfeasibleModelError(SynchronverterError):
    """The model has no equilibrium (or no geometry) for the given parameters."""

    exit_code = EXIT_INFEASIBLE

    def __init__(self, message: str, condition: Optional[str] = None):
        super().__init__(message)
        self.condition = condition


class DomainError(SynchronverterError):
    """An argument lies outside the domain of an operation."""

    exit_code = EXIT_INFEASIBLE

    def __init__(self, message: str, value: Optional[float] = None, lambda_value: Optional[float] = None):
        super().__init__(message)
        self.value = value
        self.lambda_value = lambda_value


class NumericError(SynchronverterError):
    """A numerical routine failed to produce a trustworthy result."""

    exit_code = EXIT_NUMERIC


class SimulationDivergedError(NumericError):
    """The integrated state became non-finite."""

    def __init__(self, message: str, t_blowup: float):
        super().__init__(message)
        self.t_blowup = t_blowup


class ErrorType(Enum):
    """Broad categories of failures."""
    CONFIGURATION = "configuration"
    INFEASIBLE = "infeasible"
    DOMAIN = "domain"
    NUMERIC = "numeric"
    SIMULATION = "simulation"
    IO = "io"
    UNKNOWN = "unknown"


class ErrorSeverity(Enum):
    """Severity levels for errors."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


@dataclass
class ErrorInfo:
    """One recorded failure."""
    error_type: ErrorType
    severity: ErrorSeverity
    message: str
    exception: Optional[Exception] = None
    context: Dict[str, Any] = field(default_factory=dict)
    timestamp: datetime = field(default_factory=datetime.now)

    def __post_init__(self):
        self.context = dict(self.context or {})
        self.traceback = (
            ''.join(traceback.format_exception(type(self.exception), self.exception, self.exception.__traceback__))
            if self.exception is not None else None
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error_type': self.error_type.value,
            'severity': self.severity.value,
            'message': self.message,
            'exception_type': None if self.exception is None else type(self.exception).__name__,
            'context': self.context,
            'timestamp': self.timestamp.isoformat(),
        }


class ErrorTracker:
    """Bounded error history plus a count per (type, message) key."""

    def __init__(self, max_errors: int = 1000):
        self.errors: Deque[ErrorInfo] = deque(maxlen=max_errors)
        self.error_counts: Counter = Counter()

    def record_error(self, error_info: ErrorInfo) -> None:
        self.errors.append(error_info)
        self.error_counts[f"{error_info.error_type.value}:{error_info.message}"] += 1

    def get_error_stats(self, hours: int = 24) -> Dict[str, Any]:
        """Counts by type and severity over the last ``hours``."""
        since = datetime.now() - timedelta(hours=hours)
        window = [info for info in self.errors if info.timestamp > since]
        return {
            'total_errors': len(window),
            'error_types': dict(Counter(info.error_type.value for info in window)),
            'error_severities': dict(Counter(info.severity.value for info in window)),
            'time_period_hours': hours,
        }

    def clear(self) -> None:
        self.errors.clear()
        self.error_counts.clear()


def classify_exception(error: BaseException) -> tuple:
    """Map an exception onto (ErrorType, ErrorSeverity, exit code)."""
    if isinstance(error, ConfigError):
        return ErrorType.CONFIGURATION, ErrorSeverity.HIGH, EXIT_BAD_CONFIG
    if isinstance(error, InfeasibleModelError):
        return ErrorType.INFEASIBLE, ErrorSeverity.MEDIUM, EXIT_INFEASIBLE
    if isinstance(error, DomainError):
        return ErrorType.DOMAIN, ErrorSeverity.MEDIUM, EXIT_INFEASIBLE
    if isinstance(error, SimulationDivergedError):
        return ErrorType.SIMULATION, ErrorSeverity.HIGH, EXIT_NUMERIC
    if isinstance(error, NumericError):
        return ErrorType.NUMERIC, ErrorSeverity.HIGH, EXIT_NUMERIC
    if isinstance(error, OSError):
        return ErrorType.IO, ErrorSeverity.HIGH, EXIT_BAD_CONFIG
    return ErrorType.UNKNOWN, ErrorSeverity.CRITICAL, EXIT_NUMERIC


class ErrorHandler:
    """Records, logs and maps errors to process exit codes."""

    def __init__(self, error_log: Optional[str] = None):
        self.error_tracker = ErrorTracker()
        self._file_handler: Optional[logging.Handler] = None
        if error_log:
            self.setup_error_logging(error_log)

    def setup_error_logging(self, path: str) -> None:
        """Mirror ERROR records of the package into a dedicated file."""
        package_logger = logging.getLogger('synchronverter')
        try:
            file_handler = logging.FileHandler(path)
            file_handler.setLevel(logging.ERROR)
            file_handler.setFormatter(logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            ))
            if self._file_handler is not None:
                package_logger.removeHandler(self._file_handler)
            package_logger.addHandler(file_handler)
            self._file_handler = file_handler
            logger.info(f"Error logging to {path} enabled")
        except Exception as e:
            logger.warning(f"Could not setup error file logging: {e}")

    def handle_error(
        self,
        error: BaseException,
        operation: str,
        context: Optional[Dict[str, Any]] = None
    ) -> int:
        """Record and log an error and return the matching exit code."""
        error_type, severity, exit_code = classify_exception(error)
        error_info = ErrorInfo(
            error_type=error_type,
            severity=severity,
            message=f"{operation}: {error}",
            exception=error if isinstance(error, Exception) else None,
            context=context
        )
        self.error_tracker.record_error(error_info)

        if error_type == ErrorType.UNKNOWN:
            logger.critical(f"Unexpected error in {operation}: {error}", exc_info=error)
        else:
            logger.error(f"{error_type.value} error in {operation}: {error}")
        return exit_code

    def record_warning(
        self,
        error: BaseException,
        operation: str,
        context: Optional[Dict[str, Any]] = None
    ) -> None:
        """Record a recovered error without escalating it."""
        error_type, _, _ = classify_exception(error)
        self.error_tracker.record_error(ErrorInfo(
            error_type=error_type,
            severity=ErrorSeverity.LOW,
            message=f"{operation}: {error}",
            exception=error if isinstance(error, Exception) else None,
            context=context
        ))
        logger.warning(f"Recovered {error_type.value} error in {operation}: {error}")

    def get_error_summary(self, hours: int = 24) -> Dict[str, Any]:
        return self.error_tracker.get_error_stats(hours)

    def log_error_summary(self, hours: int = 24) -> None:
        summary = self.get_error_summary(hours)
        if summary['total_errors']:
            by_type = ", ".join(f"{name}={count}" for name, count in sorted(summary['error_types'].items()))
            logger.info(f"{summary['total_errors']} errors in the last {hours}h ({by_type})")


error_handler = ErrorHandler()


def handle_error_decorator(operation_name: str) -> Callable:
    """Turn exceptions raised by a command into an exit code."""
    def decorator(func: Callable[..., int]) -> Callable[..., int]:
        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                return func(*args, **kwargs)
            except (SynchronverterError, OSError) as e:
                return error_handler.handle_error(e, operation_name)
        return wrapper
    return decorator
