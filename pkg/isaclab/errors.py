"""Exceptions raised across isaclab and the exit codes the driver maps them to"""


class ConfigError(ValueError):
    """Invalid configuration, carries the offending field path"""

    exit_code = 2

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f'{field}: {message}'
        super().__init__(message)


class InfeasibleError(RuntimeError):
    """QoS or safety-margin constraints cannot be met"""

    exit_code = 3


class NumericalError(ArithmeticError):
    """Singular inversion, near-zero division or non-finite result"""

    exit_code = 4
