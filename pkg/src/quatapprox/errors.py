"""Error taxonomy shared by the library and the CLI.

Exit-code mapping used by the command line driver:

* ``ValidationError``        -> exit 1 (bad user input / configuration)
* ``PropertyFailure``        -> exit 2 (a checked mathematical property failed)
* ``InternalInvariantError`` -> exit 3 (something the theory guarantees broke;
  always a bug in this package, never user error)
"""


class ValidationError(ValueError):
    """Invalid argument or configuration value."""


class PropertyFailure(RuntimeError):
    """A property suite or inequality check failed, with witnesses."""


class InternalInvariantError(RuntimeError):
    """A theorem-backed invariant was violated at runtime."""
