"""Exception hierarchy shared by every module in the package."""


class NodeDPError(Exception):
    """Base class for all errors raised by nodedp."""


class InvalidGraphError(NodeDPError, ValueError):
    """A graph is malformed or too small for the requested operation."""


class ParameterError(NodeDPError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ConstructionError(NodeDPError, ValueError):
    """A witness construction is infeasible for the given arguments."""


class ContractError(NodeDPError, RuntimeError):
    """Inputs are individually valid but inconsistent with each other."""


class ConfigError(NodeDPError, ValueError):
    """An experiment or CLI configuration is invalid."""


class EdgeListParseError(NodeDPError, ValueError):
    """Malformed edge-list input; carries the 1-based offending line."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
