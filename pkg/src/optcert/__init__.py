"""Exact optimality certificates for smooth and nonsmooth optimisation problems."""

__version__ = "0.1.0"

from .errors import (FragmentError, InputError, NonsmoothPointError, OptcertError,  # noqa: E402
                     PreconditionError, UndefinedPointError)

__all__ = ["__version__", "OptcertError", "InputError", "PreconditionError", "UndefinedPointError",
           "NonsmoothPointError", "FragmentError"]
