"""Exception hierarchy shared by all sxsine modules."""


class SxSineError(Exception):
    """Base class for every error raised by this package."""


class ExpressionSyntaxError(SxSineError, ValueError):
    pass


class NonAffineError(SxSineError, ValueError):
    """An expression multiplies two state-dependent terms."""


class UnboundSymbolError(SxSineError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class NonZeroSampleTimeError(SxSineError, ValueError):
    pass


class SampleBasedUnsupportedError(SxSineError, ValueError):
    pass


class InvalidModelError(SxSineError, ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MalformedXmlError(SxSineError, ValueError):
    pass


class UnsupportedSchemaError(SxSineError, ValueError):
    pass


class GenParseError(SxSineError, ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class StepTooLargeError(SxSineError, ValueError):
    pass


class NonFiniteError(SxSineError, ArithmeticError):
    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step
