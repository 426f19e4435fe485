"""Exception hierarchy shared across the package."""


class WPGError(Exception):
    """Base class for all package errors."""


class DomainError(WPGError, ValueError):
    """A point lies outside the domain of a chart or model."""


class ModelInconsistencyError(WPGError):
    """The model data cannot define a polarized pairing (e.g. undetermined sign)."""


class PositivityError(WPGError):
    """The potential is non-real or non-positive at a point."""

    def __init__(self, message, point=None, value=None):
        super().__init__(message)
        self.point = point
        self.value = value


class DegenerateMetricError(WPGError):
    """The metric is not positive definite at a point."""

    def __init__(self, message, metric=None, eigenvalues=None):
        super().__init__(message)
        self.metric = metric
        self.eigenvalues = eigenvalues


class FlagDimensionError(WPGError):
    """A Hodge filtration piece has an unexpected dimension."""

    def __init__(self, message, p=None, expected=None, found=None):
        super().__init__(message)
        self.p = p
        self.expected = expected
        self.found = found


class HodgeSignatureError(WPGError):
    """The Hodge form fails to be positive on some H^{p,q}."""


class InsufficientSeriesDataError(WPGError):
    """A requested expansion order exceeds the known coefficient data."""

    def __init__(self, message, needed_order=None, known_order=None):
        super().__init__(message)
        self.needed_order = needed_order
        self.known_order = known_order


class AmbiguousLeadingDegreeError(WPGError):
    """Two distinct exponent pairs share the minimal degree."""

    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = pairs


class DegenerateFitError(WPGError):
    """A least-squares fit has no usable data."""


class InfiniteOrderError(WPGError):
    """A semisimple part has no finite order below the search bound."""


class ModelFileError(WPGError):
    """A model file could not be parsed."""

    def __init__(self, message, field=None, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.field = field
        self.line = line
        self.column = column


class HomogeneousPositivityError(WPGError):
    """A leading homogeneous piece is not of the form c r^k with c > 0."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = violations or []
