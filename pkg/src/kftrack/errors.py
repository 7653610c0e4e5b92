"""Exception types raised across the package."""


class KFTrackError(Exception):
    """Base class for all package errors."""


class SingularInnovation(KFTrackError):
    """Innovation covariance could not be factorised, even with jitter."""


class NonMonotonicFrame(KFTrackError):
    """A tracker received a frame index that is not after the previous one."""


class DegenerateGroundTruth(KFTrackError):
    """A recall-based metric was requested with zero ground-truth boxes."""


class FrameRangeMismatch(KFTrackError):
    """Prediction and ground-truth streams do not cover the same frames."""


class InfeasibleScenario(KFTrackError):
    """A simulated object cannot fit inside the frame."""


class ConfigError(KFTrackError, ValueError):
    """Invalid tracker, scenario, noise or sweep configuration."""


class ParseError(KFTrackError):
    """Malformed record in an input file."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
