"""Exception hierarchy shared by all modules."""


class WLSError(Exception):
    """Base class for errors raised by wlsubdiv."""

    code = "wls_error"


class MeshError(WLSError):
    code = "invalid_mesh"


class WeightDomainError(WLSError, ValueError):
    """A weight function was evaluated outside its admissible interval."""

    code = "weight_domain"


class StencilError(WLSError):
    """A refinement stencil cannot support a degree-1 fit.

    ``vertex`` holds the index of the offending new vertex when known.
    """

    code = "stencil_lacks_face"

    def __init__(self, message, vertex=None):
        if vertex is not None:
            message = f"{message} (vertex {vertex})"
        super().__init__(message)
        self.vertex = vertex


class SingularSystemError(StencilError):
    code = "singular_wls_system"


class MaskError(WLSError):
    code = "mask_error"


class FrameError(WLSError):
    code = "degenerate_neighborhood"

    def __init__(self, message, vertex=None):
        if vertex is not None:
            message = f"{message} (vertex {vertex})"
        super().__init__(message)
        self.vertex = vertex


class FormatError(WLSError, ValueError):
    """Malformed mesh/value file; ``line`` is 1-based when known."""

    code = "parse_error"

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        if where:
            message = f"{where}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class ConfigError(WLSError, ValueError):
    """Inconsistent run configuration (CLI flags or ExperimentConfig)."""

    code = "invalid_config"
