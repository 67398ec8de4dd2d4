"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for numerical failures (CLI exit status 1)."""

    operation = "geometry"


class OutOfDomain(GeometryError):
    operation = "eval_jet"


class DegenerateJet(GeometryError):
    operation = "eval_jet"


class GridMismatch(GeometryError):
    operation = "identity_lab"


class EmptySample(GeometryError):
    operation = "coverage_raster"


class ConditionsViolated(GeometryError):
    operation = "inequality_chain_check"


class BadDimension(GeometryError):
    operation = "canonical_shrinker"


class ConfigError(Exception):
    """Invalid run configuration (CLI exit status 2)."""

    def __init__(self, field, message, line=None):
        self.field = field
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")
