"""Exception types raised across the package."""


class DconvexError(Exception):
    """Base class for all package errors."""


class GraphError(DconvexError, ValueError):
    pass


class CycleError(GraphError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("edges create the cycle " + " -> ".join(map(str, self.cycle)))


class DuplicateEdgeError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class VertexError(GraphError, IndexError):
    """A vertex index or name does not belong to the graph."""


class AdjacentPairError(GraphError):
    pass


class MembershipError(GraphError):
    pass


class OverlapError(GraphError):
    pass


class EmptyQueryError(GraphError):
    pass


class NotConvexError(GraphError):
    pass


class SizeGuardError(DconvexError, ValueError):
    """An exhaustive oracle was asked to run on an input above its size limit."""


class ZeroEvidenceProbabilityError(DconvexError, ValueError):
    pass


class DegenerateEstimateError(DconvexError, ValueError):
    pass


class FactorError(DconvexError, ValueError):
    pass


class BifSyntaxError(DconvexError, SyntaxError):
    def __init__(self, message, line, col, expected=None):
        self.line = line
        self.col = col
        self.expected = expected
        text = f"line {line}, col {col}: {message}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


class BifSemanticError(DconvexError, ValueError):
    pass


class SchemaError(DconvexError, ValueError):
    def __init__(self, pointer, message):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")
