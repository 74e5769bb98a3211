"""Exception types shared across the package.

Every error carries a short machine-readable ``category`` slug; the CLI
prints it as a one-line ``error:<category>: <message>`` diagnostic.
"""


class SourceLocError(Exception):
    category = "error"


class InvalidParameterError(SourceLocError):
    category = "invalid-parameter"


class InvalidInputError(SourceLocError):
    category = "invalid-input"


class DegenerateGraphError(SourceLocError):
    category = "degenerate-graph"


class NumericalFailureError(SourceLocError):
    """Raised when an iterative solve produces non-finite values.

    Carries the offending iterate so failures can be inspected.
    """

    category = "numerical-failure"

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class InvalidReferenceError(SourceLocError):
    category = "invalid-reference"


class SchemaError(SourceLocError):
    category = "schema"


class ParseError(SourceLocError):
    category = "parse"


class InterpolationFailureError(SourceLocError):
    category = "interpolation-failure"


class GenerationFailureError(SourceLocError):
    category = "generation-failure"


class InfeasibleDistanceError(SourceLocError):
    category = "infeasible-distance"
