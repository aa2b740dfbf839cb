"""Exception hierarchy shared by all engine modules."""


class PairDimError(Exception):
    """Base class for every error raised by the engine."""


class ZeroDegree(PairDimError):
    pass


class NotUnivariate(PairDimError):
    pass


class ZeroPolynomial(PairDimError):
    pass


class FormulaSyntaxError(PairDimError, SyntaxError):
    """Raised by the parser; ``position`` is the character offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SortError(PairDimError):
    pass


class SizeLimit(PairDimError):
    pass


class BoundVarSubstitution(PairDimError):
    pass


class UnsupportedAtom(PairDimError):
    pass


class FreeVariable(PairDimError):
    pass


class UnsupportedFragment(PairDimError):
    """The input leaves the fragment the normalizer can handle.

    ``subformula`` holds the printed offending subformula.
    """

    def __init__(self, message: str, subformula: str = ""):
        text = f"{message}: {subformula}" if subformula else message
        super().__init__(text)
        self.subformula = subformula


class InternalInconsistency(PairDimError):
    pass


class TooLarge(PairDimError):
    pass


class NotPregeometry(PairDimError):
    pass


class DimensionMismatch(PairDimError):
    pass
