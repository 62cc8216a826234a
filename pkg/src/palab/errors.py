class PALabError(Exception):
    pass


class DomainMismatch(PALabError, TypeError):
    """A point's type does not match the kind of space it is used with."""


class OutOfRange(PALabError, ValueError):
    """A point has the right type but lies outside the space's bounds."""


class InvalidSpec(PALabError, ValueError):
    """Construction parameters violate a documented range."""


class WrongFamily(PALabError, ValueError):
    pass


class EmptySample(PALabError, ValueError):
    pass


class AllDegenerate(PALabError, ValueError):
    """Every sampled instance had a zero denominator."""


class InsufficientTrace(PALabError, ValueError):
    pass
