"""Exception types shared across the package."""


class MCSError(Exception):
    """Base class for all package errors."""


class SpaceMismatchError(MCSError, ValueError):
    """Operands live on different state spaces."""


class UnknownSymbolError(MCSError, KeyError):
    """A word contains a symbol outside the alphabet."""

    def __init__(self, symbol, alphabet):
        self.symbol = symbol
        self.alphabet = alphabet
        super().__init__(f"symbol {symbol!r} not in alphabet {alphabet!r}")

    def __str__(self):
        return self.args[0]


class InvalidKernelError(MCSError, ValueError):
    """A kernel violates nonnegativity or row-sum constraints."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class BudgetExceededError(MCSError, RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


class NotARecognizerError(MCSError):
    """Some reachable distribution falls in neither the accept nor the reject set."""

    def __init__(self, witness, margin=None):
        self.witness = witness
        self.margin = margin
        shown = witness if witness else "ε"
        msg = f"word {shown!r} is undecided"
        if margin is not None:
            msg += f" (margin {float(margin):.6g})"
        super().__init__(msg)


class DiscretizationError(MCSError, ValueError):
    """Quadrature defect too large for the requested grid."""
