"""Exception hierarchy. Every error raised on bad input derives from MMError."""


class MMError(Exception):
    pass


class TriangleViolation(MMError):
    def __init__(self, i, j, k, slack):
        self.i, self.j, self.k, self.slack = i, j, k, slack
        super().__init__(
            f"d({i},{k}) exceeds d({i},{j}) + d({j},{k}) by {slack:.3g}"
        )


class NegativeWeight(MMError):
    pass


class AsymmetricMatrix(MMError):
    pass


class BadSpace(MMError):
    """Malformed space input (shape mismatch, non-finite entries, zero mass)."""


class EmptySubset(MMError):
    pass


class OutOfDisk(MMError):
    pass


class InvalidTreePoint(MMError):
    pass


class BadTree(MMError):
    pass


class ModeUnavailable(MMError):
    pass


class FamilyNotLipschitz(MMError):
    pass


class ScreenMismatch(MMError):
    pass


class EmptyMeasure(MMError):
    pass


class NoConvergence(MMError):
    pass


class RepairFailed(MMError):
    pass


class BadSpec(MMError):
    pass
