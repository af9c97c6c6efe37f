"""Exception hierarchy. Each category maps to a CLI exit code."""


class KamError(Exception):
    exit_code = 1
    category = "error"


class ParseError(KamError):
    exit_code = 2
    category = "parse"

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


class ConfigurationError(KamError):
    exit_code = 3
    category = "config"


class StructuralError(KamError):
    """Malformed linear program (dimension mismatch, non-finite data)."""

    exit_code = 4
    category = "solver"


class SolverError(KamError):
    exit_code = 4
    category = "solver"

    def __init__(self, message, iterations=None, last_gap=None):
        self.iterations = iterations
        self.last_gap = last_gap
        super().__init__(message)


class DegenerateScoreError(KamError):
    exit_code = 4
    category = "solver"


class GenerationError(KamError):
    exit_code = 3
    category = "config"


class IOFailure(KamError):
    exit_code = 5
    category = "io"
