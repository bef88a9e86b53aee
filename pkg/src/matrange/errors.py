"""Exception types shared across the package."""


class MatrangeError(Exception):
    """Base class for package-specific errors."""


class DimensionMismatchError(MatrangeError, ValueError):
    """Operands have incompatible shapes or tuple lengths."""


class CompletenessError(MatrangeError, ValueError):
    """An operator family fails its completeness/normalization constraint."""


class CertificateError(MatrangeError, ValueError):
    """A Choi certificate fails its positivity/unitality/reproduction contract."""


class NotInSimplexError(MatrangeError, ValueError):
    """The joint range of a tuple sticks out of the reference simplex."""

    def __init__(self, vertex_index, min_eigenvalue):
        self.vertex_index = int(vertex_index)
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"barycentric operator for vertex {vertex_index} has eigenvalue "
            f"{min_eigenvalue:.3e} < 0: tuple lies outside the simplex"
        )


class DegenerateSimplexError(MatrangeError, ValueError):
    """Simplex vertices are (numerically) affinely dependent."""


class TruncationTooSmallError(MatrangeError, RuntimeError):
    """The truncated model has too few body blocks to host a realization."""

    def __init__(self, required_level, message=None):
        self.required_level = int(required_level)
        super().__init__(
            message or f"truncation level must be at least {required_level}"
        )


class SolverError(MatrangeError, RuntimeError):
    """An iterative numerical routine failed to converge."""


class SchemaError(MatrangeError, ValueError):
    """A JSON document does not match the expected encoding."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
