"""Exception types shared across the solver modules."""


class ThermoacError(Exception):
    """Base class for solver failures."""


class NewtonDivergence(ThermoacError):
    """The implicit phase step's Newton iteration failed to converge."""


class RangeViolation(ThermoacError):
    """A field left its admissible range (rho outside (0,1), xi above its ceiling)."""


class NoContraction(ThermoacError):
    """The inner Picard coupling loop exhausted its iteration budget."""


class MarginViolation(ThermoacError):
    """The branch margin dropped to zero or below somewhere in the window."""


class BracketFailure(ThermoacError):
    """Root bracketing for the temperature solve failed."""


class WindowUnderflow(ThermoacError):
    """Window shrinking pushed the time window below the resolvable minimum."""


class ShrinkSignal(ThermoacError):
    """Recoverable request to retry the current window with a shorter length.

    Raised inside a window attempt when an invariant monitor trips (margin
    below eps0, temperature rate above the cap, no outer contraction). The
    continuation driver catches it, shortens the window geometrically, and
    retries from the same seam state.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
