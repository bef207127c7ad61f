class ShipError(Exception):
    """Base class for every error raised by the personalization pipeline"""


class ChordParseError(ShipError, ValueError):
    """Chord label text could not be parsed"""

    def __init__(self, message: str, fragment: str = ""):
        self.fragment = fragment
        super().__init__(message)


class AudioError(ShipError):
    pass


class AudioFormatError(AudioError, ValueError):
    """Unsupported container, codec or bit depth"""


class AudioIOError(AudioError, OSError):
    """Audio file missing, unreadable or truncated"""


class CqtConfigError(ShipError, ValueError):
    pass


class AnnotationError(ShipError, ValueError):
    """Invalid LAB content; carries the offending file and line number when known"""

    def __init__(self, message: str, line: int = None, path=None):
        self.detail = message
        self.line = line
        self.path = path
        if line is not None:
            message = f"line {line}: {message}"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class CorpusError(ShipError, ValueError):
    pass


class SplitError(ShipError, ValueError):
    pass


class StandardizerError(ShipError, ValueError):
    pass


class NetworkError(ShipError, ValueError):
    """Invalid network input or configuration"""


class TrainingError(ShipError):
    def __init__(self, message: str, epoch: int = None):
        self.epoch = epoch
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)


class ModelFormatError(ShipError):
    """Model file has a bad magic, version or is truncated"""


class ModelShapeError(ModelFormatError):
    pass


class DecodeError(ShipError, ValueError):
    pass


class UndefinedScoreError(ShipError):
    """Every frame was excluded by the metric, so no accuracy exists"""


class SynthError(ShipError, ValueError):
    pass


class ConfigurationError(ShipError, ValueError):
    pass
