"""Shared exception hierarchy."""


class PipelineError(Exception):
    """Base class for every error this package raises deliberately."""


class RecordFormatError(PipelineError):
    """A source record does not match its declared file format."""


class IntegrityError(PipelineError):
    """A persisted artifact fails its checksum or an invariant check."""
