"""Exception hierarchy shared across causeway modules."""


class CausewayError(Exception):
    """Base class for all library errors."""


class ValidationError(CausewayError, ValueError):
    """Input violates a documented precondition."""


class PreconditionError(ValidationError):
    pass


class CycleError(CausewayError):
    def __init__(self, tail, head):
        self.tail = tail
        self.head = head
        super().__init__(f"orienting {tail}->{head} would create a directed cycle")


class ExtensionError(CausewayError):
    """No acyclic, collider-preserving orientation exists."""


class DegenerateColumnError(ValidationError):
    def __init__(self, column, reason="zero variance"):
        self.column = column
        super().__init__(f"column {column!r} is degenerate ({reason})")


class SingularityError(CausewayError):
    """Correlation submatrix is numerically singular."""


class InsufficientSampleError(ValidationError):
    pass


class KnowledgeConflictError(CausewayError):
    pass


class FittingError(CausewayError):
    def __init__(self, node, reason="rank-deficient parent matrix"):
        self.node = node
        super().__init__(f"cannot fit node {node!r}: {reason}")


class ParseError(ValidationError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
