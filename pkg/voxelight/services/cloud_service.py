"""Cloud file service: PLY dialect reader/writer, validation and summaries."""
import io
import logging
import math
from typing import Callable, Dict, List, Tuple, Union

import numpy as np
from plyfile import PlyData, PlyElement, PlyElementParseError, PlyHeaderParseError, PlyListProperty

from voxelight.errors import (
    CloudFormatError,
    DuplicateVoxel,
    MalformedHeader,
    MalformedRecord,
    OutOfBoundsVoxel,
    OutOfRangeAttribute,
    TrailingData,
    TruncatedBody,
    UnknownProperty,
)
from voxelight.models import (
    ATTRIBUTE_NAMES,
    Encoding,
    Quantization,
    VoxelAttributes,
    VoxelGrid,
    match_preset,
)
from voxelight.schemas import AttributeStats, CloudHeader, CloudInfo, ValidationReport

logger = logging.getLogger(__name__)

PROPERTY_NAMES = ("x", "y", "z") + ATTRIBUTE_NAMES
COMMENT_PREFIX = "voxelight"
VALUE_TYPES = {"f4": Quantization.FLOAT32, "u1": Quantization.UINT8}


def _vertex_dtype(quantization: Quantization) -> np.dtype:
    value_type = "<f4" if quantization == Quantization.FLOAT32 else "u1"
    return np.dtype([(name, "<i4") for name in ("x", "y", "z")]
                    + [(name, value_type) for name in ATTRIBUTE_NAMES])


def _float32_text(v: float) -> str:
    """Shortest decimal that round-trips the float32 nearest to ``v``."""
    return np.format_float_positional(np.float32(v), unique=True, trim="0")


def _dequantize_float32(values: np.ndarray) -> np.ndarray:
    """float32 -> float64 through the shortest decimal, so 0.2 reads back as 0.2."""
    if values.size == 0:
        return values.astype(np.float64)
    uniq, inverse = np.unique(values.astype(np.float32), return_inverse=True)
    converted = np.array([float(_float32_text(v)) if math.isfinite(v) else float(v) for v in uniq])
    return converted[inverse.reshape(values.shape)]


def _type_code(prop) -> str:
    return np.dtype(prop.val_dtype).str[1:]


def _header_lines(data: bytes) -> List[str]:
    """Raw header lines; plyfile keeps no line numbers once the header parsed."""
    lines: List[str] = []
    for raw in io.BytesIO(data):
        line = raw.decode("ascii", errors="replace").strip()
        lines.append(line)
        if line == "end_header":
            break
    return lines


def _line_of(lines: List[str], match: Callable[[str], bool]) -> int:
    return next((i for i, line in enumerate(lines, start=1) if match(line)), len(lines))


def _body_rows(data: bytes) -> int:
    return sum(1 for line in data.splitlines()[len(_header_lines(data)):] if line.strip())


def _read_ply(data: bytes) -> Tuple[PlyData, bytes]:
    """Read with plyfile; returns the parsed file and whatever follows the body."""
    stream = io.BytesIO(data)
    try:
        ply = PlyData.read(stream, mmap=False)
    except PlyHeaderParseError as exc:
        raise MalformedHeader(exc.line or 1, exc.message)
    except PlyElementParseError as exc:
        missing_row = exc.message == "early end-of-line" and exc.row is not None and exc.row >= _body_rows(data)
        if exc.message == "early end-of-file" or missing_row:
            raise TruncatedBody(exc.element.count, exc.row)
        raise MalformedRecord(exc.row, exc.message)
    except (ValueError, OverflowError) as exc:
        raise MalformedRecord(None, str(exc))
    return ply, stream.read()


def _cloud_header(ply: PlyData, data: bytes) -> CloudHeader:
    """Dialect checks on top of the generic PLY header."""
    lines = _header_lines(data)
    end_line = len(lines)
    if not ply.text and ply.byte_order != "<":
        raise MalformedHeader(2, "expected 'format ascii|binary_little_endian 1.0'")

    dims = None
    voxel_size = None
    comments = list(ply.comments) + [c for element in ply.elements for c in element.comments]
    for comment in comments:
        tokens = comment.split()
        if tokens[:1] != [COMMENT_PREFIX]:
            continue
        line_no = _line_of(lines, lambda line: line == f"comment {comment}".strip())
        try:
            if tokens[1:2] == ["dims"] and len(tokens) == 5:
                dims = tuple(int(t) for t in tokens[2:5])
                if any(n <= 0 for n in dims):
                    raise ValueError
            elif tokens[1:2] == ["voxel_size"] and len(tokens) == 3:
                voxel_size = float(tokens[2])
                if not (voxel_size > 0.0 and math.isfinite(voxel_size)):
                    raise ValueError
            else:
                raise ValueError
        except ValueError:
            raise MalformedHeader(line_no, f"bad voxelight comment '{comment}'")

    element_lines = [i for i, line in enumerate(lines, start=1) if line.startswith("element")]
    if not ply.elements:
        raise MalformedHeader(end_line, "missing 'element vertex'")
    for k, element in enumerate(ply.elements):
        if k > 0 or element.name != "vertex":
            raise MalformedHeader(element_lines[k], "expected a single 'element vertex N'")

    vertex = ply.elements[0]
    properties = list(vertex.properties)
    for k, prop in enumerate(properties):
        line_no = _line_of(lines, lambda line: line.startswith("property") and line.split()[-1] == prop.name)
        if prop.name not in PROPERTY_NAMES:
            raise UnknownProperty(prop.name)
        if k >= len(PROPERTY_NAMES) or prop.name != PROPERTY_NAMES[k]:
            expected = PROPERTY_NAMES[k] if k < len(PROPERTY_NAMES) else "end_header"
            raise MalformedHeader(line_no, f"expected property '{expected}', got '{prop.name}'")
        if isinstance(prop, PlyListProperty):
            raise MalformedHeader(line_no, f"'{prop.name}' must not be a list")
        if k < 3 and _type_code(prop) != "i4":
            raise MalformedHeader(line_no, f"coordinate '{prop.name}' must be int")
        if k >= 3 and _type_code(prop) not in VALUE_TYPES:
            raise MalformedHeader(line_no, f"unsupported type for '{prop.name}'")
    if len(properties) != len(PROPERTY_NAMES):
        raise MalformedHeader(end_line, f"expected {len(PROPERTY_NAMES)} properties, got {len(properties)}")
    value_types = {_type_code(prop) for prop in properties[3:]}
    if len(value_types) != 1:
        raise MalformedHeader(end_line, "attributes must all be float or all be uchar")
    if dims is None:
        raise MalformedHeader(end_line, "missing 'comment voxelight dims'")
    if voxel_size is None:
        raise MalformedHeader(end_line, "missing 'comment voxelight voxel_size'")
    return CloudHeader(dims=dims, voxel_size=voxel_size, count=vertex.count,
                       encoding=Encoding.ASCII if ply.text else Encoding.BINARY,
                       quantization=VALUE_TYPES[value_types.pop()])


def _check_trailing(header: CloudHeader, rest: bytes) -> None:
    if header.encoding == Encoding.BINARY:
        if rest:
            extra = math.ceil(len(rest) / _vertex_dtype(header.quantization).itemsize)
            raise TrailingData(header.count, header.count + extra)
        return
    extra = [line for line in rest.splitlines() if line.strip()]
    if extra:
        raise TrailingData(header.count, header.count + len(extra))


class CloudService:
    """Service for cloud-file operations."""

    @staticmethod
    def read_records(data: bytes) -> Tuple[CloudHeader, np.ndarray, np.ndarray]:
        """Header plus raw records as (N x 3 int64 coords, N x 7 values in file units)."""
        ply, rest = _read_ply(data)
        header = _cloud_header(ply, data)
        _check_trailing(header, rest)
        records = ply["vertex"].data
        n = header.count
        coords = np.stack([records[a].astype(np.int64) for a in ("x", "y", "z")], axis=1).reshape(n, 3)
        values = np.stack([records[a] for a in ATTRIBUTE_NAMES], axis=1).reshape(n, 7)
        if header.quantization == Quantization.UINT8:
            values = values.astype(np.float64)
        return header, coords, values

    @staticmethod
    def _record_errors(header: CloudHeader, coords: np.ndarray, values: np.ndarray,
                       fail_fast: bool) -> List[CloudFormatError]:
        errors: List[CloudFormatError] = []
        if header.quantization == Quantization.FLOAT32:
            bad = ~((values >= 0.0) & (values <= 1.0))
        else:
            bad = np.zeros(values.shape, dtype=bool)
        bad_rows = bad.any(axis=1)
        dims = np.asarray(header.dims)
        oob_rows = ((coords < 0) | (coords >= dims)).any(axis=1)
        seen = set()
        for i, coord in enumerate(map(tuple, coords.tolist())):
            if bad_rows[i]:
                j = int(np.argmax(bad[i]))
                errors.append(OutOfRangeAttribute(i, ATTRIBUTE_NAMES[j], float(values[i, j])))
            if oob_rows[i]:
                errors.append(OutOfBoundsVoxel(coord))
            elif coord in seen:
                errors.append(DuplicateVoxel(coord))
            else:
                seen.add(coord)
            if fail_fast and errors:
                break
        return errors

    @staticmethod
    def _to_unit(header: CloudHeader, values: np.ndarray) -> np.ndarray:
        if header.quantization == Quantization.UINT8:
            return values / 255.0
        return _dequantize_float32(values)

    @staticmethod
    def parse_cloud(data: bytes) -> VoxelGrid:
        """Parse a cloud file into a grid, raising on the first violation."""
        header, coords, values = CloudService.read_records(data)
        errors = CloudService._record_errors(header, coords, values, fail_fast=True)
        if errors:
            raise errors[0]
        unit = CloudService._to_unit(header, values)
        grid = VoxelGrid(header.dims, header.voxel_size)
        interned: Dict[Tuple[float, ...], VoxelAttributes] = {}
        for coord, row in zip(coords.tolist(), map(tuple, unit.tolist())):
            attrs = interned.get(row)
            if attrs is None:
                attrs = interned[row] = VoxelAttributes(*row)
            grid.set(coord, attrs)
        logger.debug("parsed cloud %s with %d voxels", header.dims, len(grid))
        return grid

    @staticmethod
    def serialize_cloud(grid: VoxelGrid, encoding: Union[Encoding, str] = Encoding.BINARY,
                        quantization: Union[Quantization, str] = Quantization.FLOAT32) -> bytes:
        """Canonical bytes: cells in (z, y, x) order, fixed property order.

        float32 files store the float32 nearest to each attribute, and the reader
        maps it back to the shortest decimal rounding to that float32. A grid
        therefore survives ``parse_cloud(serialize_cloud(grid))`` exactly when
        every attribute is such a shortest decimal, which covers every value
        with at most six significant digits that is zero or at least 1.2e-38.
        A value like ``float(np.float32(0.1))`` comes back as 0.1.
        """
        encoding = Encoding(encoding)
        quantization = Quantization(quantization)
        cells = list(grid.cells())
        records = np.zeros(len(cells), dtype=_vertex_dtype(quantization))
        if cells:
            coords = np.array([c for c, _ in cells], dtype=np.int64)
            values = np.array([a.as_tuple() for _, a in cells], dtype=np.float64)
            if quantization == Quantization.UINT8:
                values = np.floor(values * 255.0 + 0.5)
            for axis, name in enumerate(("x", "y", "z")):
                records[name] = coords[:, axis]
            for j, name in enumerate(ATTRIBUTE_NAMES):
                records[name] = values[:, j]

        comments = [
            "{} dims {} {} {}".format(COMMENT_PREFIX, *grid.dims),
            f"{COMMENT_PREFIX} voxel_size {grid.voxel_size!r}",
        ]
        ply = PlyData([PlyElement.describe(records, "vertex")], text=encoding == Encoding.ASCII,
                      byte_order="<", comments=comments)
        stream = io.BytesIO()
        ply.write(stream)
        return stream.getvalue()

    @staticmethod
    def validate_cloud(data: bytes) -> ValidationReport:
        """Collect every violation instead of stopping at the first one."""
        try:
            header, coords, values = CloudService.read_records(data)
        except CloudFormatError as exc:
            return ValidationReport(valid=False, violations=[f"{type(exc).__name__}: {exc}"])
        errors = CloudService._record_errors(header, coords, values, fail_fast=False)
        return ValidationReport(valid=not errors,
                                violations=[f"{type(e).__name__}: {e}" for e in errors])

    @staticmethod
    def cloud_info(grid: VoxelGrid) -> CloudInfo:
        """Dims, occupancy, per-attribute statistics and preset matches."""
        values = np.array([a.as_tuple() for _, a in grid.cells()], dtype=np.float64).reshape(-1, 7)
        stats = {}
        for j, name in enumerate(ATTRIBUTE_NAMES):
            column = values[:, j]
            if column.size:
                stats[name] = AttributeStats(min=float(column.min()), max=float(column.max()),
                                             mean=float(column.mean()))
            else:
                stats[name] = AttributeStats(min=0.0, max=0.0, mean=0.0)
        presets: Dict[str, int] = {}
        unmatched = 0
        for _, attrs in grid.cells():
            name = match_preset(attrs)
            if name is None:
                unmatched += 1
            else:
                presets[name] = presets.get(name, 0) + 1
        return CloudInfo(dims=grid.dims, voxel_size=grid.voxel_size, occupied=len(grid),
                         attributes=stats, presets=dict(sorted(presets.items())), unmatched=unmatched)
