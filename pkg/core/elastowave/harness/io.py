"""
Writers for seismograms, series, snapshots and run metadata, plus reference ingestion.
"""
import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..diagnostics.diagnostics import TimeSeries, velocity_magnitude
from ..errors import FormatError
from ..settings.settings import CSV_FLOAT_FORMAT, METADATA_FILE, SNAPSHOT_BYTE_ORDER
from ..sources.sources import Receiver

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReferenceSeismogram:
    receiver: str
    components: tuple
    times: np.ndarray
    values: np.ndarray
    provenance: str = "external file"


def _fmt(value: float) -> str:
    return CSV_FLOAT_FORMAT.format(float(value))


def write_rows(path: Path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_seismogram(receiver: Receiver, path: Path) -> Path:
    times, values = receiver.series()
    header = ["t"] + list(receiver.components)
    return write_rows(path, header, ([float(t)] + [float(v) for v in row] for t, row in zip(times, values)))


def write_series(series: TimeSeries, path: Path) -> Path:
    return write_rows(path, ["t", "value"], zip(series.times, series.values))


def write_convergence(path: Path, spacings: Sequence[float], errors: Sequence[float], rates: Sequence[float], label: str = "h") -> Path:
    rows = []
    for i, (h, e) in enumerate(zip(spacings, errors)):
        rows.append([float(h), float(e), float(rates[i - 1]) if i > 0 and rates else ""])
    return write_rows(path, [label, "error", "rate"], rows)


def write_metadata(directory: Path, metadata: Dict) -> Path:
    path = Path(directory) / METADATA_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(metadata, handle, indent=2, sort_keys=True, default=str)
    return path


def write_snapshot(state, directory: Path, index: int, fmt: str = "binary", components: Optional[List[str]] = None) -> List[Path]:
    """One flat little-endian float64 file per component (element-major) plus a text header"""
    disc = state.discretization
    system = disc.system
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = list(components or system.components)
    fields = {name: state.Q[system.index_of(name)] for name in names}
    fields["vmag"] = velocity_magnitude(state)
    stem = f"snapshot_{index:05d}"

    if fmt == "csv":
        if disc.dim != 2:
            raise FormatError("CSV snapshots are only written for 2D runs")
        coords = [np.broadcast_to(c, fields["vmag"].shape).ravel() for c in disc.mesh.node_coordinates(disc.ops.nodes)]
        columns = coords + [f.ravel() for f in fields.values()]
        path = directory / f"{stem}.csv"
        write_rows(path, ["x", "y"] + list(fields), zip(*columns))
        return [path]

    paths = []
    dtype = np.dtype(f"{SNAPSHOT_BYTE_ORDER}f8")
    for name, values in fields.items():
        path = directory / f"{stem}_{name}.bin"
        np.ascontiguousarray(values, dtype=dtype).tofile(path)
        paths.append(path)
    header = directory / f"{stem}.hdr"
    header.write_text(
        "\n".join([
            f"time = {_fmt(state.time)}",
            f"dimension = {disc.dim}",
            f"degree = {disc.degree}",
            f"elements = {', '.join(str(k) for k in disc.mesh.counts)}",
            f"nodes_per_axis = {disc.ops.size}",
            f"layout = element-major ({' x '.join(['elements'] * disc.dim + ['nodes'] * disc.dim)})",
            "dtype = float64",
            f"byte_order = {'little' if SNAPSHOT_BYTE_ORDER == '<' else 'big'}",
            f"components = {', '.join(fields)}",
        ]) + "\n",
        encoding="utf-8",
    )
    return paths + [header]


def ingest_reference(path: Path, components: Optional[Sequence[str]] = None, receiver: Optional[str] = None) -> ReferenceSeismogram:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from None
    if not rows:
        raise FormatError(f"{path}: empty file")

    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t":
        raise FormatError(f"{path}: first column must be 't', got {header[:1]}")
    found = header[1:]
    if not found:
        raise FormatError(f"{path}: no component columns")
    if components is not None and list(components) != found:
        raise FormatError(f"{path}: expected header {','.join(['t'] + list(components))}, got {','.join(header)}")

    try:
        data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
    except ValueError as e:
        raise FormatError(f"{path}: non-numeric entry ({e})") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(header):
        raise FormatError(f"{path}: every row needs {len(header)} values")
    times = data[:, 0]
    if np.any(np.diff(times) <= 0):
        raise FormatError(f"{path}: times must be strictly increasing")
    return ReferenceSeismogram(receiver or path.stem, tuple(found), times, data[:, 1:])
