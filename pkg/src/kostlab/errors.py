"""Exception hierarchy shared by every module."""


class KostlabError(Exception):
    """Base class for library errors."""


class NonUnitInput(KostlabError, ValueError):
    """A point expected on the unit sphere is off it beyond tolerance."""


class UnsupportedOrder(KostlabError, ValueError):
    pass


class OutOfDomain(KostlabError, ValueError):
    pass


class SingularKernel(KostlabError, ArithmeticError):
    """Jet covariance failed the positive-semidefinite check."""


class IllConditioned(KostlabError, ArithmeticError):
    pass


class UnsupportedClass(KostlabError, ValueError):
    pass


class DegenerateSample(KostlabError):
    """Numerical audit failed; the trial is discarded and counted, never repaired."""

    def __init__(self, reason, **info):
        super().__init__(reason)
        self.reason = reason
        self.info = info


class DegenerateDirection(KostlabError):
    """Height direction is non-generic for a Morse audit; retry with a fresh one."""


class ConfigError(KostlabError, ValueError):
    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


class ExcessiveDiscards(KostlabError):
    pass
