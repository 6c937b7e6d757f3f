class HpDesignError(Exception):
    """Base class for every error raised by the package."""


# --- Input errors ---

class InvalidCharacter(HpDesignError, ValueError):
    def __init__(self, char, position):
        self.char = char
        self.position = position
        super().__init__(f"Invalid character {char!r} at position {position}")


class SelfIntersection(HpDesignError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"Walk self-intersects at bead {index}")


class LengthMismatch(HpDesignError, ValueError):
    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(f"Length mismatch: expected {expected}, got {got}")


class InvalidContactMap(HpDesignError, ValueError):
    pass


class CompositionOutOfRange(HpDesignError, ValueError):
    def __init__(self, n_h, n):
        super().__init__(f"Composition n_h={n_h} outside [0, {n}]")


class NonpositiveParameter(HpDesignError, ValueError):
    def __init__(self, name, value):
        super().__init__(f"Parameter {name} must be positive, got {value}")


class MissingComposition(HpDesignError, ValueError):
    pass


class DimensionMismatch(HpDesignError, ValueError):
    pass


class EmptyGroundSet(HpDesignError, ValueError):
    pass


class DegenerateSpectrum(HpDesignError, ValueError):
    pass


class DegenerateDifference(HpDesignError, ValueError):
    pass


# --- Resource caps (CLI exit code 2) ---

class CapExceeded(HpDesignError):
    def __init__(self, what, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"{what} {size} exceeds the configured cap {cap}")


class LimitExceeded(CapExceeded):
    def __init__(self, size, cap):
        super().__init__("Chain length", size, cap)


class TooLarge(CapExceeded):
    def __init__(self, size, cap):
        super().__init__("Spin count", size, cap)


class StateTooLarge(CapExceeded):
    def __init__(self, size, cap):
        super().__init__("Qubit count", size, cap)


class ComponentTooLarge(CapExceeded):
    def __init__(self, size, cap):
        super().__init__("Contact-graph component size", size, cap)


class SolverCapExceeded(CapExceeded):
    def __init__(self, solver, size, cap):
        super().__init__(f"Problem size for solver {solver}:", size, cap)


# --- Solver failures (CLI exit code 3) ---

class SolverFailure(HpDesignError):
    pass


class CgNoConvergence(SolverFailure):
    def __init__(self, step, info):
        self.step = step
        super().__init__(f"Conjugate gradients did not converge at step {step} (info={info})")


class NoMinimizerFound(SolverFailure):
    pass
