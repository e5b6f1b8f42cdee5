"""Exception hierarchy shared across the solver modules.

Every error carries a short machine-readable ``reason`` used by the CLI to
derive exit codes.
"""


class LGSolveError(Exception):
    reason = "error"
    exit_code = 1


class NonConvexDomain(LGSolveError):
    reason = "non_convex_domain"
    exit_code = 10


class EmptyTruncation(LGSolveError):
    reason = "empty_truncation"
    exit_code = 11


class NonIntegrableData(LGSolveError):
    reason = "non_integrable_data"
    exit_code = 12


class DegenerateChord(LGSolveError):
    reason = "degenerate_chord"
    exit_code = 13


class DegenerateLevel(LGSolveError):
    reason = "degenerate_level"
    exit_code = 14


class NestingViolation(LGSolveError):
    reason = "nesting_violation"
    exit_code = 15


class NotStrictBall(LGSolveError):
    reason = "not_strict_ball"
    exit_code = 16


class NoStabilization(LGSolveError):
    reason = "no_stabilization"
    exit_code = 17

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotC0Data(LGSolveError):
    reason = "not_c0_data"
    exit_code = 18


class NoConeDirections(LGSolveError):
    reason = "no_cone_directions"
    exit_code = 19


class NotStripDomain(LGSolveError):
    reason = "not_strip_domain"
    exit_code = 20


class DisconnectedMask(LGSolveError):
    reason = "disconnected_mask"
    exit_code = 21


class NoSignChange(LGSolveError):
    reason = "no_sign_change"
    exit_code = 22


class ConfigError(LGSolveError):
    reason = "config_error"
    exit_code = 2
