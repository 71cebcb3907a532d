"""Exception hierarchy shared across the package."""


class SigMdnError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SigMdnError, ValueError):
    """An argument violates an operation's precondition."""


class NumericError(SigMdnError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""


class TrainingError(NumericError):
    """Training diverged (non-finite loss)."""

    def __init__(self, message: str, epoch: int):
        super().__init__(f"{message} (epoch {epoch})")
        self.epoch = epoch


class FormatError(SigMdnError):
    """A dataset or model file is malformed."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ConfigError(SigMdnError):
    """A run configuration or scenario file failed validation."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
