"""Domain errors shared by the services, the HTTP surface and the CLI."""
from typing import Any, Optional, Sequence, Tuple


class VoxelightError(Exception):
    """Base class for every error the toolkit raises on bad input."""

    exit_code = 2
    status_code = 422

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# ============= Model / optics errors =============

class OutOfRange(VoxelightError, ValueError):
    """A unit-interval quantity fell outside [0, 1] (or its declared domain)."""

    def __init__(self, field: str, value: Any):
        super().__init__(f"{field}={value!r} is out of range")
        self.field = field
        self.value = value


class OutOfBounds(VoxelightError, IndexError):
    """A voxel coordinate is not an integer cell inside the grid."""

    def __init__(self, coord: Sequence[int]):
        super().__init__(f"voxel {tuple(coord)} is not a cell of the grid")
        self.coord = tuple(coord)


class UnknownMaterial(VoxelightError, KeyError):
    """Material name not in the preset table."""

    status_code = 404

    def __init__(self, name: str):
        super().__init__(f"Unknown material '{name}'")
        self.name = name

    def __str__(self) -> str:
        return self.detail


class DegenerateNormal(VoxelightError, ValueError):
    """Surface normal is not unit length."""

    def __init__(self, norm: float):
        super().__init__(f"surface normal has length {norm!r}, expected 1")
        self.norm = norm


class InvalidRay(VoxelightError, ValueError):
    """Ray direction is not unit length or its parametric range is empty."""


# ============= Cloud file errors =============

class CloudFormatError(VoxelightError):
    """Base class for cloud (PLY) parse errors."""


class MalformedHeader(CloudFormatError):
    def __init__(self, line: int, reason: str = "malformed header"):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownProperty(CloudFormatError):
    def __init__(self, name: str):
        super().__init__(f"unknown vertex property '{name}'")
        self.name = name


class OutOfRangeAttribute(CloudFormatError):
    def __init__(self, record: int, field: str, value: Optional[float] = None):
        super().__init__(f"record {record}: attribute {field}={value!r} outside [0, 1]")
        self.record = record
        self.field = field
        self.value = value


class DuplicateVoxel(CloudFormatError):
    def __init__(self, coord: Tuple[int, int, int]):
        super().__init__(f"duplicate voxel {tuple(coord)}")
        self.coord = tuple(coord)


class OutOfBoundsVoxel(CloudFormatError):
    def __init__(self, coord: Tuple[int, int, int]):
        super().__init__(f"voxel {tuple(coord)} is outside the declared dims")
        self.coord = tuple(coord)


class TruncatedBody(CloudFormatError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"body truncated: expected {expected} records, got {got}")
        self.expected = expected
        self.got = got


class TrailingData(CloudFormatError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"body has {got} records but the header declares {expected}")
        self.expected = expected
        self.got = got


class MalformedRecord(CloudFormatError):
    def __init__(self, record: Optional[int], reason: str):
        super().__init__(reason if record is None else f"record {record}: {reason}")
        self.record = record
        self.reason = reason


# ============= Scene errors =============

class SchemaError(VoxelightError):
    """Scene document does not match the schema."""

    def __init__(self, path: str, reason: str, errors: Optional[Sequence[Tuple[str, str]]] = None):
        super().__init__(f"{path or '<root>'}: {reason}")
        self.path = path
        self.reason = reason
        self.errors = list(errors) if errors else [(path, reason)]


class UnknownScene(VoxelightError, KeyError):
    """Demo scene name not registered."""

    status_code = 404

    def __init__(self, name: str, valid: Sequence[str] = ()):
        hint = f" (valid scenes: {', '.join(valid)})" if valid else ""
        super().__init__(f"Unknown scene '{name}'{hint}")
        self.name = name
        self.valid = tuple(valid)

    def __str__(self) -> str:
        return self.detail


# ============= Output errors =============

class OutputError(VoxelightError):
    """An output file could not be written."""

    exit_code = 3
    status_code = 500
