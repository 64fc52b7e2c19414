"""Error taxonomy shared by every module in the package."""


class CloudmarchError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(CloudmarchError, ValueError):
    """A value violates a documented parameter contract."""


class FormatError(CloudmarchError, ValueError):
    """Serialized data (config, atlas, header) is structurally invalid."""


class ResourceError(CloudmarchError, RuntimeError):
    """A resource limit (memory, queue capacity) was exceeded."""
