"""Exception types shared across the toolkit."""


class DDAKitError(Exception):
    """Base class for all toolkit errors."""


class NonSymmetric(DDAKitError, ValueError):
    pass


class NoConvergence(DDAKitError, RuntimeError):
    pass


class NotPositiveDefinite(DDAKitError, ValueError):
    pass


class DegenerateClass(DDAKitError, ValueError):
    pass


class ZeroWithinScatter(DDAKitError, ValueError):
    pass


class NotTwoClass(DDAKitError, ValueError):
    pass


class ShapeMismatch(DDAKitError, ValueError):
    pass


class OneClassOnly(DDAKitError, ValueError):
    pass


class AllBatchesSkipped(DDAKitError, RuntimeError):
    pass


class MalformedHeader(DDAKitError, ValueError):
    pass


class TruncatedPayload(DDAKitError, ValueError):
    pass


class ConfigError(DDAKitError, ValueError):
    """Bad or missing configuration; the CLI maps this to exit code 2."""


class BadCheckpoint(DDAKitError, ValueError):
    """Checkpoint file is unreadable or has an unknown format."""
