"""Error taxonomy.

CapabilityError: the request needs an oracle or structure the model does not
declare (exit code 3 at the CLI).  NumericalError: underflow, degenerate
matrices, failed convergence (also exit 3).  ReliabilityError: an estimator
ran but its output cannot be trusted (too many degenerate inner terms).
DomainError: plain bad arguments to a mathematical function.
"""


class ExpdiagError(Exception):
    pass


class CapabilityError(ExpdiagError):
    pass


class NumericalError(ExpdiagError):
    pass


class ReliabilityError(NumericalError):
    pass


class DomainError(ExpdiagError, ValueError):
    pass
