"""Exception hierarchy shared by every module."""


class BigJumpError(Exception):
    """Base class for all errors raised by bigjump."""


class ParamOutOfRange(BigJumpError, ValueError):
    def __init__(self, param, value, constraint):
        self.param = param
        self.value = value
        super().__init__(f"parameter {param}={value!r} violates {constraint}")


class OutsideSupport(BigJumpError, ValueError):
    pass


class OutsideWindow(BigJumpError, ValueError):
    pass


class EmptySupport(BigJumpError, ValueError):
    pass


class NonFinite(BigJumpError, ArithmeticError):
    pass


class WrongFamily(BigJumpError, TypeError):
    pass


class TailTooSmall(BigJumpError, ArithmeticError):
    """Raised when a tail probability underflows double precision.

    The log-space value is attached so callers can keep going.
    """

    def __init__(self, message, log_value):
        self.log_value = log_value
        super().__init__(message)


class AcceptanceTooLow(BigJumpError, RuntimeError):
    def __init__(self, message, rate, pilot_rate=None):
        self.rate = rate
        self.pilot_rate = pilot_rate
        super().__init__(message)
