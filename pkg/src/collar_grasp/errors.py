"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: NoDetectionError -> 2,
DegenerateGeometryError -> 3, I/O failures -> 4.
"""


class CollarGraspError(Exception):
    """Base class for pipeline errors."""


class NoDetectionError(CollarGraspError):
    """No collar found: empty mask, empty cluster list, or empty point cloud."""


class DegenerateGeometryError(CollarGraspError):
    """Geometry too degenerate to process (e.g. all neighborhood points coincident)."""


class InvalidDepthError(CollarGraspError, ValueError):
    """A pixel with depth 0 (sensor hole) was used where a valid depth is required."""


class BehindCameraError(CollarGraspError, ValueError):
    """A point with z <= 0 cannot be projected through the pinhole model."""
