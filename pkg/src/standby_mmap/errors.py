"""Exception hierarchy shared across the package."""


class ModelError(ValueError):
    """A model object violates one of its invariants.

    The ``kind`` attribute carries a short machine-readable tag
    (e.g. ``"RowSumExceedsOne"``); ``str(exc)`` holds the human detail.
    """

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        super().__init__(f"{kind}: {detail}" if detail else kind)


class PhInvalid(ModelError):
    """A discrete phase-type representation is not valid."""


class NotAbsorbing(ModelError):
    """Sub-stochastic matrix has spectral radius >= 1 (no certain absorption)."""

    def __init__(self, detail: str = ""):
        super().__init__("NotAbsorbing", detail)


class NonUniqueStationary(ModelError):
    """The chain has no unique stationary vector (reducible)."""

    def __init__(self, detail: str = ""):
        super().__init__("NonUniqueStationary", detail)


class LayoutMismatch(ModelError):
    """Kernel/layout/model dimensions do not agree."""

    def __init__(self, detail: str = ""):
        super().__init__("LayoutMismatch", detail)


class NonStochasticResult(ModelError):
    """Assembled one-step kernel fails the row-sum check."""

    def __init__(self, detail: str = ""):
        super().__init__("NonStochasticResult", detail)


class Reducible(ModelError):
    """No unique stationary distribution on the reachable state set."""

    def __init__(self, detail: str = ""):
        super().__init__("Reducible", detail)


class RecursionDirectMismatch(ModelError):
    """Censoring-recursion and direct stationary solves disagree."""

    def __init__(self, detail: str = ""):
        super().__init__("RecursionDirectMismatch", detail)


class InfeasiblePoint(ModelError):
    """A sweep grid point could not be evaluated."""

    def __init__(self, detail: str = ""):
        super().__init__("InfeasiblePoint", detail)
