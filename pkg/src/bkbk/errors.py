"""Exception types shared across the package."""


class BKBKError(Exception):
    """Base class for all package errors."""


class NonFiniteFieldError(BKBKError, ValueError):
    def __init__(self, what="field"):
        super().__init__(f"non-finite {what}")


class DepthUnderflowError(BKBKError, ArithmeticError):
    """Depth fell below the configured floor.

    ``step`` and ``t`` are filled in by the time steppers when the
    underflow happens mid-run.
    """

    def __init__(self, min_eta, location, floor, step=None, t=None):
        self.min_eta = float(min_eta)
        self.location = location
        self.floor = floor
        self.step = step
        self.t = t
        super().__init__(self._message())

    def _message(self):
        msg = (f"depth underflow: min(eta)={self.min_eta:.6g} < floor={self.floor:g} "
               f"at {self.location}")
        if self.step is not None:
            msg += f" (step {self.step}, t={self.t:.9g})"
        return msg

    def at(self, step, t):
        self.step, self.t = step, t
        self.args = (self._message(),)
        return self


class BlowUpError(BKBKError, ArithmeticError):
    def __init__(self, step, t):
        self.step, self.t = step, t
        super().__init__(f"non-finite state at step {step}, t={t:.9g}")


class VacuumError(BKBKError, ArithmeticError):
    def __init__(self, min_density, location):
        self.min_density = float(min_density)
        self.location = location
        super().__init__(f"vacuum: |psi|^2={min_density:.6g} at {location}")


class SingularModeError(BKBKError, ArithmeticError):
    def __init__(self, index, wavenumber, cond):
        self.index = index
        self.wavenumber = wavenumber
        self.cond = cond
        super().__init__(f"ill-conditioned mode matrix at index {index} "
                         f"(k={wavenumber}), cond={cond:.3g}")


class ModeVanishedError(BKBKError, ValueError):
    def __init__(self):
        super().__init__("mode vanished")


class DegenerateWaveError(BKBKError, ValueError):
    pass


class ConfigError(BKBKError, ValueError):
    pass


class SnapshotError(BKBKError, IOError):
    pass


class BadMagicError(SnapshotError):
    def __init__(self, magic):
        super().__init__(f"bad magic {magic!r}")


class ShortReadError(SnapshotError):
    def __init__(self, where):
        super().__init__(f"short read at {where}")


class SizeMismatchError(SnapshotError):
    pass
