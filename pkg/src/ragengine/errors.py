"""Exception hierarchy shared across the engine."""


class RagEngineError(Exception):
    """Base class for all engine errors."""


class DimensionError(RagEngineError):
    """Vector dimensions disagree with the index or with each other."""


class DegenerateVectorError(RagEngineError):
    """An all-zero vector where a direction is required."""


class EmptyDocumentError(RagEngineError):
    """Document has no splittable content."""


class GatewayError(RagEngineError):
    """A model/service backend failed after retries."""

    def __init__(self, service: str, message: str):
        super().__init__(f"{service}: {message}")
        self.service = service


class DatasetError(RagEngineError):
    """Evaluation dataset is unusable."""


class ConfigError(RagEngineError):
    """Invalid or inconsistent configuration."""


class StageError(RagEngineError):
    """A pipeline stage failed; carries the stage name for callers."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
