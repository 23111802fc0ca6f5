"""Exception hierarchy shared by all modules."""


class RoutingError(Exception):
    """Base class for every error raised by gradedroute."""


class InvalidConfig(RoutingError, ValueError):
    pass


class GenerationFailed(RoutingError):
    def __init__(self, message, retries):
        super().__init__(f"{message} (after {retries} retries)")
        self.retries = retries


class UnknownNode(RoutingError, KeyError):
    pass


class Unstable(RoutingError, ValueError):
    """A queue or channel whose load meets or exceeds its service capacity."""

    def __init__(self, message, channel=None):
        super().__init__(message)
        self.channel = channel


class InvalidRate(RoutingError, ValueError):
    pass


class InvalidGamma(RoutingError, ValueError):
    pass


class Disconnected(RoutingError):
    """No source-to-destination path survives node filtering."""


class NoRoute(RoutingError):
    pass


class DegenerateBandwidth(RoutingError, ValueError):
    pass


class BadCutPoint(RoutingError, ValueError):
    pass


class NotPermutation(RoutingError, ValueError):
    pass


class DuplicateNode(RoutingError, ValueError):
    pass


class MutationRejected(RoutingError, ValueError):
    pass


class StorageError(RoutingError, OSError):
    pass
