#!/usr/bin/env python3

# filename: errors.py
# description: exception classes
# and the command-line exit codes
# they map to

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_SCHEDULE = 4


class OptopixError(Exception):
    """
    Base class for all optopix errors

    Parameters
    ----------
    message : :py:class:`str`
        Human readable description.
    **context
        Extra key-value pairs reported
        in the single-line diagnostic.
    """
    exit_code = 1
    kind = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def diagnostic(self):
        """
        Single-line, machine-parsable
        rendering of the error.
        """
        parts = ["error={}".format(self.kind),
                 "message=\"{}\"".format(
                     self.message.replace("\"", "'"))]
        for key in sorted(self.context):
            parts.append("{}={}".format(
                key, self.context[key]))
        return " ".join(parts).replace("\n", " ")


class ValidationError(OptopixError, ValueError):
    exit_code = EXIT_VALIDATION
    kind = "validation"


class InvalidGeometryError(ValidationError):
    kind = "invalid-geometry"


class OutOfRangeError(ValidationError):
    kind = "out-of-range"


class InsufficientDataError(ValidationError):
    kind = "insufficient-data"


class ModeNotAdmissibleError(ValidationError):
    kind = "mode-not-admissible"


class ConfigError(ValidationError):
    kind = "config"


class NumericalError(OptopixError, ArithmeticError):
    exit_code = EXIT_NUMERICAL
    kind = "numerical"


class InstabilityError(NumericalError):
    kind = "instability"

    def __init__(self, message, time=None, **context):
        super().__init__(message, time=time, **context)
        self.time = time


class ConvergenceError(NumericalError):
    kind = "non-convergence"

    def __init__(self, message, last_iterate=None,
                 iterations=None, **context):
        super().__init__(message,
                         iterations=iterations,
                         **context)
        self.last_iterate = last_iterate
        self.iterations = iterations


class InfeasibleError(NumericalError):
    kind = "infeasible"

    def __init__(self, message,
                 max_displacement=None, **context):
        super().__init__(message,
                         max_displacement=max_displacement,
                         **context)
        self.max_displacement = max_displacement


class ScheduleConflictError(OptopixError):
    """
    Raised when two illumination intervals
    collide under the single-beam constraint.
    `first` and `second` are the conflicting
    intervals in schedule order.
    """
    exit_code = EXIT_SCHEDULE
    kind = "schedule-conflict"

    def __init__(self, message, first=None,
                 second=None, **context):
        super().__init__(message, **context)
        self.first = first
        self.second = second
