"""Exception taxonomy shared by every pipeline stage."""

from __future__ import annotations


class VitalityError(Exception):
    """Base class for all engine errors."""


class ParseError(VitalityError):
    """Input file could not be parsed at all."""


class SchemaError(VitalityError):
    """Input parsed but its structure does not match the documented format."""


class ValidationError(VitalityError):
    """Structurally valid input violating a domain invariant."""


class ConfigError(VitalityError):
    """Invalid run configuration."""


class EmptyColumnError(VitalityError):
    """A column holds no observed value, so it cannot be scaled."""


class DomainError(VitalityError):
    """Value outside the documented domain of an operation."""


class InsufficientDonorsError(VitalityError):
    """Fewer candidate donor rows than the requested neighbour count."""


class DisjointRowsError(VitalityError):
    """A row shares no observed column with any candidate donor."""


class ShapeMismatchError(VitalityError):
    """Array arguments with incompatible shapes."""


class DegenerateInputError(VitalityError):
    """Input with no variation where variation is required (e.g. constant x)."""


class NonFiniteLossError(VitalityError):
    """Training diverged to a non-finite loss."""


class CatalogMismatchError(VitalityError):
    """Data carries a different catalog fingerprint than the one supplied."""


class GeometryMissingError(VitalityError):
    """Result rows reference dissemination areas absent from the geo index."""

    def __init__(self, missing_ids):
        self.missing_ids = list(missing_ids)
        super().__init__(f"no geometry for DA ids: {', '.join(self.missing_ids)}")


class DegenerateInitError(VitalityError):
    """Duplicate rows in the initial centroid matrix."""


class EmptyClusterError(VitalityError):
    """A cluster is empty at convergence."""


class SingleClusterError(VitalityError):
    """Silhouette needs at least two clusters."""


class EmptySectorError(VitalityError):
    """A sector has no member dissemination areas."""


class DegenerateSeriesError(VitalityError):
    """Series whose time axis has no spread."""


class GeocodeClientError(VitalityError):
    """Geocoding backend failure, carrying the offending address."""

    def __init__(self, address: str, reason: str):
        self.address = address
        super().__init__(f"geocoding failed for {address!r}: {reason}")


class LocalAccuracyError(VitalityError):
    """Attributions failed to reassemble the model prediction."""


class IncompleteInputsError(VitalityError):
    """Report generation invoked with pipeline stages missing."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"missing pipeline outputs: {', '.join(self.missing)}")


class MissingInputError(VitalityError):
    """A configured input file does not exist."""

    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"input file not found: {self.path}")


class StageError(VitalityError):
    """A pipeline stage failed; no partial outputs were left behind."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")


class SnapshotCorruptError(VitalityError):
    """Snapshot file bytes do not match the manifest hashes."""


class BindError(VitalityError):
    """Server could not bind the requested address."""
