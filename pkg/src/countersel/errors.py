"""Exception types shared across the pipeline stages."""


class ParseError(ValueError):
    """A dataset or artifact file failed to parse; message names the line."""


class FormatError(ValueError):
    """A structured file (scores, embeddings, reports) violates its contract."""


class ModelFitError(ValueError):
    """A model could not be fitted on the given corpus."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite objective; message names the epoch."""


class PipelineStageError(RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
