import json
import logging
import math
import re
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from models import __version__
from models.highway import PointSet
from models.interference import InterferenceProfile
from models.monte_carlo import AGGREGATE_COLUMNS, AggregateRow, ExperimentConfig, ScalingFit

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
PILOT_FIXTURES = DATA_DIR / "pilot_fixtures.json"
PILOT_RECORDS = DATA_DIR / "pilot_records.json"

_POWER = re.compile(r"^\s*(\d+)\s*(?:\^|\*\*)\s*(\d+)\s*$")


class PointsFileError(ValueError):
    """Malformed points file, with the 1-based line number of the problem"""

    def __init__(self, path: PathLike, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


@contextmanager
def _open_output(path: Optional[PathLike]):
    """Open path for writing, or hand out stdout when path is None or '-'"""
    if path is None or str(path) == "-":
        yield sys.stdout
        return
    try:
        handle = open(path, "w", encoding="utf-8", newline="")
    except OSError as err:
        raise OSError(f"Cannot write {path}: {err.strerror}") from err
    with handle:
        yield handle


def parse_count(text: str) -> int:
    """
    Parse a sensor count, accepting power expressions such as 2^16 or 10**4.

    Raises:
        ValueError: if the text is not a nonnegative integer expression
    """
    match = _POWER.match(str(text))
    if match:
        return int(match.group(1)) ** int(match.group(2))
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"Not a count: {text!r}") from None
    if not value.is_integer() or value < 0:
        raise ValueError(f"Not a count: {text!r}")
    return int(value)


def parse_grid(text: str) -> List[int]:
    """Comma separated list of counts"""
    return [parse_count(item) for item in str(text).split(",") if item.strip()]


def read_points_file(path: PathLike) -> PointSet:
    """
    Read a points file: one decimal position per line, ascending, '#' lines ignored.

    Raises:
        PointsFileError: on unparsable, non-finite, unsorted or duplicate values
        OSError: if the file cannot be read
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise OSError(f"Cannot read {path}: {err.strerror}") from err

    values = []
    previous = None
    for number, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        try:
            value = float(text)
        except ValueError:
            raise PointsFileError(path, number, f"not a number: {text!r}") from None
        if not math.isfinite(value):
            raise PointsFileError(path, number, f"non-finite position {text!r}")
        if previous is not None and value == previous:
            raise PointsFileError(path, number, f"duplicate position {text}")
        if previous is not None and value < previous:
            raise PointsFileError(path, number, f"position {text} is not in ascending order")
        values.append(value)
        previous = value
    logger.debug("Read %d positions from %s", len(values), path)
    return PointSet(np.array(values, dtype=np.float64))


def write_points_file(p: PointSet, path: Optional[PathLike], header: Optional[Dict] = None):
    """
    Write a point set in the points file format.

    Raises:
        ValueError: if the coordinates do not survive conversion to decimal doubles
    """
    positions = np.array([float(x) for x in p.positions], dtype=np.float64)
    if positions.size > 1 and not np.all(np.diff(positions) > 0):
        raise ValueError("Coordinates collapse in double precision; the chain is too long for a points file")
    with _open_output(path) as handle:
        for key, value in (header or {}).items():
            handle.write(f"# {key}={value}\n")
        for value in positions.tolist():
            handle.write(f"{value!r}\n")


def export_profile(profile: InterferenceProfile, fmt: str, path: Optional[PathLike] = None):
    """Write a profile as CSV (index,position,z plus a z_max comment) or JSON"""
    if fmt == "csv":
        frame = pd.DataFrame({
            "index": np.arange(len(profile)),
            "position": [float(x) for x in profile.positions],
            "z": profile.counts,
        })
        with _open_output(path) as handle:
            frame.to_csv(handle, index=False, lineterminator="\n")
            handle.write(f"# z_max={profile.max} argmax={profile.argmax}\n")
    elif fmt == "json":
        with _open_output(path) as handle:
            json.dump(profile.to_dict(), handle)
            handle.write("\n")
    else:
        raise ValueError(f"Unknown format {fmt!r}; expected csv or json")


def rows_to_frame(rows: List[AggregateRow]) -> pd.DataFrame:
    if not rows:
        raise ValueError("No aggregate rows to export")
    return pd.DataFrame([row.to_dict() for row in rows], columns=AGGREGATE_COLUMNS)


def export(result, fmt: str, path: Optional[PathLike] = None):
    """
    Export aggregate rows or a scaling fit.

    Args:
        result: List of AggregateRow or a ScalingFit
        fmt: 'csv' or 'json' (a fit is always JSON)
        path: Output file, stdout when None
    """
    if isinstance(result, ScalingFit):
        with _open_output(path) as handle:
            json.dump(result.to_dict(), handle, indent=2)
            handle.write("\n")
        return
    frame = rows_to_frame(list(result))
    with _open_output(path) as handle:
        if fmt == "csv":
            frame.to_csv(handle, index=False, lineterminator="\n")
        elif fmt == "json":
            json.dump(frame.to_dict(orient="records"), handle, indent=2)
            handle.write("\n")
        else:
            raise ValueError(f"Unknown format {fmt!r}; expected csv or json")


def export_records(records: pd.DataFrame, path: PathLike):
    """Per-trial records as CSV"""
    with _open_output(path) as handle:
        records.to_csv(handle, index=False, lineterminator="\n")


def write_metadata(config: ExperimentConfig, path: PathLike):
    """Sidecar JSON recording the configuration needed to replay a run"""
    metadata = {
        "config": config.to_dict(),
        "seed": config.seed,
        "generator": config.generator,
        "version": __version__,
    }
    with _open_output(path) as handle:
        json.dump(metadata, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_aggregate_csv(path: PathLike) -> List[AggregateRow]:
    """Read rows written by export(rows, 'csv', ...)"""
    try:
        frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    except OSError as err:
        raise OSError(f"Cannot read {path}: {err.strerror}") from err
    missing = [column for column in AGGREGATE_COLUMNS if column not in frame.columns]
    if missing:
        raise ValueError(f"{path} lacks aggregate columns: {', '.join(missing)}")
    return [
        AggregateRow(**{
            column: (float(record[column]) if column.startswith("mean") or column == "std"
                     else int(record[column]))
            for column in AGGREGATE_COLUMNS
        })
        for record in frame.to_dict(orient="records")
    ]


def load_pilot_fixtures(path: PathLike = PILOT_FIXTURES) -> Dict:
    """
    Load the versioned pilot configuration and tolerance bands used by the
    acceptance tests.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as err:
        raise OSError(f"Cannot read {path}: {err.strerror}") from err


def load_pilot_records(path: PathLike = PILOT_RECORDS) -> Dict:
    """Observed pilot statistics, or an empty dict when no pilot has been recorded"""
    if not Path(path).exists():
        return {}
    return load_pilot_fixtures(path)


def write_pilot_records(records: Dict, path: Optional[PathLike] = None):
    with _open_output(path) as handle:
        json.dump(records, handle, indent=2, sort_keys=True)
        handle.write("\n")
