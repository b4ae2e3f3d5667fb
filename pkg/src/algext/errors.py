"""Exception hierarchy shared by every construction in the package."""


class AlgextError(Exception):
    """Base class for all errors raised by algext."""


class SpaceMismatch(AlgextError):
    """Operands live on different character spaces."""


class NotInvertible(AlgextError):
    """An element vanishes (within tolerance) somewhere on its character space.

    ``point`` is the offending character index; ``value`` the value found
    there. For extension elements ``root`` carries the fibre coordinate.
    """

    def __init__(self, point, value, root=None, message=None):
        self.point = point
        self.value = value
        self.root = root
        if message is None:
            message = f"element vanishes at character {point} (value {value!r})"
            if root is not None:
                message += f", fibre root {root!r}"
        super().__init__(message)


class LogOnCut(AlgextError):
    def __init__(self, point, value):
        self.point = point
        self.value = value
        super().__init__(f"value {value!r} at character {point} lies on the branch cut")


class DegreeTooHigh(AlgextError):
    pass


class MixedExtensions(AlgextError):
    pass


class NotARoot(AlgextError):
    pass


class IllConditioned(AlgextError):
    def __init__(self, character, message=None):
        self.character = character
        super().__init__(message or f"root clustering is ambiguous at character {character}")


class PointNotInFibration(AlgextError):
    pass


class CannotSeparate(AlgextError):
    pass


class DegenerateNeighborhood(AlgextError):
    pass


class AmbiguousMatching(AlgextError):
    def __init__(self, edge, message=None):
        self.edge = edge
        super().__init__(message or f"sheet matching across edge {edge} is ambiguous")


class NotReached(AlgextError):
    pass


class TooLarge(AlgextError):
    pass


class StageTooLarge(TooLarge):
    pass


class IndexOrder(AlgextError):
    pass


class NotAnExpWitness(AlgextError):
    pass


class UnclassifiablePoint(AlgextError):
    def __init__(self, point, value):
        self.point = point
        self.value = value
        super().__init__(f"eta({point}) = {value!r} is not near an n-th root of unity")


class SamplingTooCoarse(AlgextError):
    pass


class NotInvertibleOnLoop(AlgextError):
    pass


class RetriesExhausted(AlgextError):
    pass


class ParseError(AlgextError):
    pass


class TaskFailure(AlgextError):
    pass
