"""Exception hierarchy shared by every optcert module."""


class OptcertError(Exception):
    """Base class for all errors raised by optcert."""


class InputError(OptcertError, ValueError):
    """Malformed input: bad dimensions, bad rationals, unknown node kinds."""


class PreconditionError(OptcertError):
    """An operation's documented precondition does not hold (e.g. infeasible point)."""


class UndefinedPointError(OptcertError):
    """No guard of a piecewise node holds at the evaluation point."""


class NonsmoothPointError(OptcertError):
    """A gradient was requested at a kink, tie, or guard junction."""


class FragmentError(OptcertError):
    """Expression falls outside the fragment an operation supports."""
