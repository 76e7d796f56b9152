import csv
import io
import json
import logging
import math
import os
import pathlib
from typing import Any, Iterable, List, Mapping, Sequence, Union

from appease import __version__
from appease.sim.metrics import METRICS_COLUMNS
from appease.sim.trace import Trace

LOG = logging.getLogger(__name__)

PathLike = Union[pathlib.Path, str]


def provenance(scenario_digest: str, seed: int, policy: str) -> Mapping[str, Any]:
    """The fields every output file carries so that it describes itself."""
    return {'scenario_digest': scenario_digest, 'seed': seed, 'policy': policy, 'version': __version__}


def write_atomic(path: PathLike, text: str) -> pathlib.Path:
    """
    Writes `text` next to `path` and renames it into place, so a reader
    never sees a partially written file. Parent directories are created.
    """
    path = pathlib.Path(path)
    tmp = path.with_name(path.name + '.tmp')
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except OSError as e:
        LOG.warning(f"failed to write {path}: {e}")
        if tmp.exists():
            tmp.unlink()
        raise
    LOG.debug(f"wrote {path}")
    return path


def _cell(value):
    if isinstance(value, float):
        return 'nan' if math.isnan(value) else repr(value)
    return value


def table_text(rows: Iterable[Mapping[str, Any]], columns: Sequence[str], header: Mapping[str, Any]) -> str:
    """
    CSV text of `rows` in the order of `columns`, preceded by one `#` line
    per header field.
    """
    buffer = io.StringIO()
    for key, value in header.items():
        buffer.write(f"# {key}: {value}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def write_table(path: PathLike, rows: Iterable[Mapping[str, Any]], columns: Sequence[str],
                header: Mapping[str, Any]) -> pathlib.Path:
    return write_atomic(path, table_text(rows, columns, header))


def write_metrics(path: PathLike, rows: Iterable[Mapping[str, Any]], header: Mapping[str, Any]) -> pathlib.Path:
    return write_table(path, rows, METRICS_COLUMNS, header)


def _jsonable(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_json(path: PathLike, payload: Mapping[str, Any]) -> pathlib.Path:
    """Writes `payload` with sorted keys; NaN values become `null`."""
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    return write_atomic(path, text + '\n')


def write_trace(path: PathLike, trace: Trace, header: Mapping[str, Any]) -> pathlib.Path:
    lines: List[str] = [f"# {key}: {value}" for key, value in header.items()]
    lines.extend(trace.lines())
    return write_atomic(path, '\n'.join(lines) + '\n')


def read_trace(path: PathLike) -> Trace:
    with open(path, encoding='utf-8') as f:
        return Trace.from_lines(line for line in f if line.strip() and not line.startswith('#'))
