"""Exception hierarchy shared by every blogcap module."""


class BlogcapError(Exception):
    """Base class; the CLI maps it to exit code 1."""

    exit_code = 1


class NumericalError(BlogcapError):
    """Estimation failures; the CLI maps these to exit code 2."""

    exit_code = 2


class IoFailure(BlogcapError):
    pass


class MalformedRow(BlogcapError):
    def __init__(self, line, reason=""):
        self.line = line
        msg = f"malformed row at line {line}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class EmptyFile(BlogcapError):
    pass


class UnknownSeed(BlogcapError):
    def __init__(self, seed):
        self.seed = seed
        super().__init__(f"unknown seed {seed!r}")


class MissingColumn(BlogcapError):
    pass


class UnknownProfession(BlogcapError):
    pass


class DuplicateBlogId(BlogcapError):
    pass


class TooFewObservations(BlogcapError):
    pass


class MissingBlog(BlogcapError):
    pass


class UnknownTerm(BlogcapError):
    pass


class DesignError(BlogcapError):
    pass


class DimensionMismatch(BlogcapError):
    pass


class MissingClass(BlogcapError):
    pass


class InvalidParams(BlogcapError):
    pass


class IncompleteRows(BlogcapError):
    pass


class SeparationDetected(NumericalError):
    pass


class SingularHessian(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass
