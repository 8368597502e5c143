"""Exception hierarchy shared by all modules.

ValidationError marks malformed input (bad shapes, unknown kinds, broken file
headers).  PreconditionError marks input that is well-formed but violates a
mathematical hypothesis (non-unit axis, non-horizontal factor, exceptional
plane).  The command-line layer maps them to distinct exit codes.
"""


class BilegError(Exception):
    pass


class ValidationError(BilegError, ValueError):
    pass


class PreconditionError(BilegError, ValueError):
    pass


class NotFactorizable(PreconditionError):
    pass


class NoMaximalLattice(PreconditionError):
    pass
