"""
Error handling for sam-dde

This module provides:
- Specific error types for grid, solver, averaging and benchmark failures
- User-facing messages with actionable guidance
- Structured error responses for the command line
- Category to exit-code mapping (2 validation, 3 solver, 4 verification)
"""

import traceback
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Union

from .utils.logging import get_sam_logger

logger = get_sam_logger(__name__)


class ErrorSeverity(Enum):
    """Error severity levels for proper escalation and handling"""

    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Categories of errors; each maps to one CLI exit code"""

    USER_INPUT = "user_input"  # Invalid parameters, infeasible grids, bad config
    NUMERICAL = "numerical"  # Blow-up, step-size underflow, step budget exhausted
    VERIFICATION = "verification"  # Oracle or declaration disagreement
    SYSTEM = "system"  # IO and unexpected failures


EXIT_CODES: Dict[ErrorCategory, int] = {
    ErrorCategory.USER_INPUT: 2,
    ErrorCategory.NUMERICAL: 3,
    ErrorCategory.VERIFICATION: 4,
    ErrorCategory.SYSTEM: 1,
}


@dataclass
class ErrorDetails:
    """Structured error information for consistent handling"""

    code: str  # Error identifier (e.g., "INFEASIBLE_GRID")
    category: ErrorCategory
    severity: ErrorSeverity
    message: str  # User-facing message
    technical_message: str  # Technical details for debugging
    suggestions: List[str]
    context: Dict[str, Any]
    timestamp: datetime
    stack_trace: Optional[str] = None


class SamError(Exception):
    """Base exception for sam-dde errors"""

    def __init__(self, details: ErrorDetails):
        self.details = details
        super().__init__(details.message)

    @property
    def code(self) -> str:
        return self.details.code

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.details.category]

    def annotate(self, **context: Any) -> "SamError":
        """Attach extra coordinates (e.g. N, Omega) while the error propagates."""
        self.details.context.update(context)
        return self


def _details(
    code: str,
    category: ErrorCategory,
    message: str,
    technical_message: str,
    suggestions: List[str],
    context: Dict[str, Any],
    severity: ErrorSeverity = ErrorSeverity.ERROR,
) -> ErrorDetails:
    return ErrorDetails(
        code=code,
        category=category,
        severity=severity,
        message=message,
        technical_message=technical_message,
        suggestions=suggestions,
        context=context,
        timestamp=datetime.now(),
    )


class ConfigValidationError(SamError):
    """Invalid configuration value or unknown configuration key"""

    def __init__(self, field: str, value: Any, reason: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            _details(
                "CONFIG_VALIDATION_ERROR",
                ErrorCategory.USER_INPUT,
                f"Invalid {field}: {reason}",
                f"Validation failed for field '{field}' with value '{value}': {reason}",
                [f"Check the value of {field}", "Run with --help to list accepted options"],
                {"field": field, "value": str(value), "reason": reason, **(context or {})},
                ErrorSeverity.WARNING,
            )
        )


class InfeasibleGrid(SamError):
    """Macro step too short to hold the two-period micro window"""

    def __init__(self, N: int, Omega: float, tau: float, ratio: float, required: float):
        super().__init__(
            _details(
                "INFEASIBLE_GRID",
                ErrorCategory.USER_INPUT,
                f"Grid N={N}, Omega={Omega:.6g} is infeasible: H/T={ratio:.4g} < {required:.4g}",
                f"H=tau/N={tau / N:.6g} must be at least {required:.4g} periods T=2pi/Omega",
                ["Decrease N or increase Omega", "Lower grid.feasibility_ratio only for experiments"],
                {"N": N, "Omega": Omega, "tau": tau, "H_over_T": ratio, "required": required},
                ErrorSeverity.WARNING,
            )
        )


class OutOfDomain(SamError):
    """History or dense output queried outside its interval"""

    def __init__(self, t: float, left: float, right: float):
        super().__init__(
            _details(
                "OUT_OF_DOMAIN",
                ErrorCategory.USER_INPUT,
                f"Time {t:.6g} lies outside [{left:.6g}, {right:.6g}]",
                f"Evaluation requested at t={t!r}, domain=[{left!r}, {right!r}]",
                ["Query the history only on [-tau, 0]", "Extend t_max of the reference solve"],
                {"t": t, "left": left, "right": right},
            )
        )


class NonFiniteState(SamError):
    """A component of the state became NaN or infinite"""

    def __init__(self, where: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(
            _details(
                "NON_FINITE_STATE",
                ErrorCategory.NUMERICAL,
                f"Non-finite state encountered in {where}",
                f"State became non-finite in {where} at {context or {}}",
                ["Reduce the micro step (increase nu_max)", "Check the problem parameters"],
                {"where": where, **(context or {})},
            )
        )


class MissingHistory(SamError):
    """Past values needed by a step are not available"""

    def __init__(self, n: Optional[int] = None, required: Optional[int] = None, t: Optional[float] = None):
        if t is None:
            message = f"Micro trajectory {required} needed by macro step {n} is not available"
            technical = f"history_supplier(n={n}) requires micro trajectory n-N={required}"
            context: Dict[str, Any] = {"n": n, "required": required}
        else:
            message = f"Lagged state at t={t:.6g} is neither history nor computed solution"
            technical = f"lagged lookup at t={t!r}"
            context = {"t": t}
        super().__init__(
            _details(
                "MISSING_HISTORY",
                ErrorCategory.NUMERICAL,
                message,
                technical,
                ["Do not evict micro trajectories newer than one delay", "Cap steps by the smallest lag"],
                context,
            )
        )


class StepSizeUnderflow(SamError):
    """Adaptive step shrank below the representable resolution"""

    def __init__(self, t: float, h: float):
        super().__init__(
            _details(
                "STEP_SIZE_UNDERFLOW",
                ErrorCategory.NUMERICAL,
                f"Step size underflow at t={t:.6g} (h={h:.3g})",
                f"Rejected step pushed h={h!r} below the spacing of t={t!r}",
                ["The problem may be stiff or singular near this time", "Loosen tolerances"],
                {"t": t, "h": h},
            )
        )


class MaxStepsExceeded(SamError):
    """Step budget exhausted before reaching the end of the span"""

    def __init__(self, t: float, max_steps: int):
        super().__init__(
            _details(
                "MAX_STEPS_EXCEEDED",
                ErrorCategory.NUMERICAL,
                f"Reference solver exceeded {max_steps} steps at t={t:.6g}",
                f"max_steps={max_steps} reached at t={t!r}",
                ["Raise solver.max_steps", "Loosen tolerances or shorten t_max"],
                {"t": t, "max_steps": max_steps},
            )
        )


class NonRealResult(SamError):
    """Averaged right-hand side has a significant imaginary part"""

    def __init__(self, residual: float, tolerance: float):
        super().__init__(
            _details(
                "NON_REAL_RESULT",
                ErrorCategory.VERIFICATION,
                f"Averaged right-hand side is not real (imag residual {residual:.3g})",
                f"Imaginary residual {residual!r} exceeds {tolerance!r}",
                ["Check that f_-k is the complex conjugate of f_k"],
                {"imag_residual": residual, "tolerance": tolerance},
            )
        )


class DeclarationMismatch(SamError):
    """Declared structural hypothesis disagrees with numerical probes"""

    def __init__(self, declared: bool, measured: bool, max_norm: float):
        super().__init__(
            _details(
                "DECLARATION_MISMATCH",
                ErrorCategory.VERIFICATION,
                f"Declared H1={declared} but probes indicate H1={measured}",
                f"max |df_k/dY . d| over probes = {max_norm!r}",
                ["Fix the declared_h1 flag of the Fourier problem"],
                {"declared": declared, "measured": measured, "max_norm": max_norm},
            )
        )


class UnsupportedBeta(SamError):
    """Closed-form averaged system requested for an exponent it does not cover"""

    def __init__(self, beta: float):
        super().__init__(
            _details(
                "UNSUPPORTED_BETA",
                ErrorCategory.USER_INPUT,
                f"The closed-form averaged gene system requires beta = 2 (got {beta})",
                f"beta={beta!r}",
                ["Use beta=2 or the toggle problem"],
                {"beta": beta},
                ErrorSeverity.WARNING,
            )
        )


class NonStroboscopicComparison(SamError):
    """Comparison with the oscillatory solution at non-stroboscopic step points"""

    def __init__(self, N: int, Omega: float, periods: float):
        super().__init__(
            _details(
                "NON_STROBOSCOPIC_COMPARISON",
                ErrorCategory.USER_INPUT,
                f"Step points of N={N}, Omega={Omega:.6g} are not stroboscopic (H/T={periods:.6g})",
                f"tau*Omega/(2*pi*N)={periods!r} is not an integer",
                ["Use --reference averaged", "Choose Omega as a multiple of 2*pi*N/tau"],
                {"N": N, "Omega": Omega, "H_over_T": periods},
                ErrorSeverity.WARNING,
            )
        )


class InsufficientDiagonal(SamError):
    """Fewer than three populated diagonal cells"""

    def __init__(self, populated: int):
        super().__init__(
            _details(
                "INSUFFICIENT_DIAGONAL",
                ErrorCategory.USER_INPUT,
                f"Need at least 3 populated diagonal cells, found {populated}",
                f"populated diagonal cells: {populated}",
                ["Extend N_list and Omega_list together"],
                {"populated": populated},
                ErrorSeverity.WARNING,
            )
        )


class VerificationFailed(SamError):
    """Numerical oracle deviation above tolerance"""

    def __init__(self, check: str, deviation: float, tolerance: float):
        super().__init__(
            _details(
                "VERIFICATION_FAILED",
                ErrorCategory.VERIFICATION,
                f"{check}: deviation {deviation:.3g} exceeds {tolerance:.3g}",
                f"{check} deviation={deviation!r} tolerance={tolerance!r}",
                ["Inspect the hand-derived averaged system and the Fourier coefficients"],
                {"check": check, "deviation": deviation, "tolerance": tolerance},
            )
        )


class ErrorHandler:
    """Centralized error handling and response formatting"""

    @staticmethod
    def handle_error(error: Union[Exception, SamError], operation: str) -> Dict[str, Any]:
        """
        Log an error and return a structured response

        Args:
            error: The exception that occurred
            operation: Description of the operation that failed

        Returns:
            Structured error response dictionary
        """
        if isinstance(error, SamError):
            details = error.details
        else:
            details = ErrorHandler._create_generic_error_details(error, operation)

        ErrorHandler._log_error(details)

        response: Dict[str, Any] = {
            "success": False,
            "operation": operation,
            "error": {
                "code": details.code,
                "message": details.message,
                "category": details.category.value,
                "severity": details.severity.value,
                "suggestions": details.suggestions,
                "timestamp": details.timestamp.isoformat(),
                "context": details.context,
            },
        }
        if details.severity in (ErrorSeverity.ERROR, ErrorSeverity.CRITICAL):
            response["error"]["technical_message"] = details.technical_message
            if details.stack_trace:
                response["error"]["stack_trace"] = details.stack_trace
        return response

    @staticmethod
    def exit_code_for(error: Exception) -> int:
        if isinstance(error, SamError):
            return error.exit_code
        if isinstance(error, (ValueError, TypeError)):
            return EXIT_CODES[ErrorCategory.USER_INPUT]
        return EXIT_CODES[ErrorCategory.SYSTEM]

    @staticmethod
    def _create_generic_error_details(error: Exception, operation: str) -> ErrorDetails:
        """Create error details for unexpected exceptions"""
        category = ErrorCategory.SYSTEM
        if isinstance(error, (ValueError, TypeError)):
            category = ErrorCategory.USER_INPUT
        return ErrorDetails(
            code="UNEXPECTED_ERROR",
            category=category,
            severity=ErrorSeverity.ERROR,
            message=str(error) or "An unexpected error occurred",
            technical_message=f"Unexpected error in {operation}: {error!r}",
            suggestions=["Check your input parameters", "Re-run with --log-level DEBUG"],
            context={"operation": operation, "error_type": type(error).__name__},
            timestamp=datetime.now(),
            stack_trace=traceback.format_exc(),
        )

    @staticmethod
    def _log_error(details: ErrorDetails) -> None:
        """Log error based on severity level"""
        log_message = f"[{details.code}] {details.message}"
        if details.severity == ErrorSeverity.INFO:
            logger.info(log_message)
        elif details.severity == ErrorSeverity.WARNING:
            logger.warning(log_message)
        else:
            logger.error(
                f"{log_message} | Technical: {details.technical_message}",
                error_code=details.code,
            )


def create_success_response(
    message: str, data: Dict[str, Any], additional_info: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Create a standardized success response"""
    response = {"success": True, "message": message, "data": data, "timestamp": datetime.now().isoformat()}
    if additional_info:
        response.update(additional_info)
    return response
