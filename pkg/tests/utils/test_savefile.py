import json
import math
import os

import pytest

from appease import __version__
from appease.sim import METRICS_COLUMNS, Trace
from appease.utils.savefile import (
    provenance,
    read_trace,
    table_text,
    write_atomic,
    write_json,
    write_metrics,
    write_trace,
)


@pytest.fixture
def header():
    return provenance("abc123", 7, "rr")


def test_provenance(header):
    assert header == {'scenario_digest': "abc123", 'seed': 7, 'policy': "rr", 'version': __version__}


def test_write_atomic(tmp_path):
    path = write_atomic(tmp_path / "nested" / "out.txt", "one\n")
    assert path.read_text() == "one\n"
    write_atomic(path, "two\n")
    assert path.read_text() == "two\n"
    assert os.listdir(path.parent) == ["out.txt"]


def test_write_atomic_failure(tmp_path):
    (tmp_path / "taken").write_text("a file, not a directory")
    with pytest.raises(OSError):
        write_atomic(tmp_path / "taken" / "out.txt", "x")


def test_table_text(header):
    text = table_text([{'a': 1, 'b': 0.5}, {'a': 2, 'b': math.nan}], ('a', 'b'), header)
    assert text.splitlines() == [
        "# scenario_digest: abc123",
        "# seed: 7",
        "# policy: rr",
        f"# version: {__version__}",
        "a,b",
        "1,0.5",
        "2,nan",
    ]


def test_write_metrics(tmp_path, header):
    path = write_metrics(tmp_path / "m.csv", [{'scenario_id': "s", 'policy': "rr"}], header)
    lines = path.read_text().splitlines()
    assert lines[4] == ",".join(METRICS_COLUMNS)
    assert lines[5].startswith("s,rr,")


def test_write_json(tmp_path):
    path = write_json(tmp_path / "r.json", {'b': [1.0, math.nan], 'a': {2: "x"}})
    assert json.loads(path.read_text()) == {'a': {'2': "x"}, 'b': [1.0, None]}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')


def test_trace_file(tmp_path, header):
    trace = Trace()
    trace.record(0, 'arrive', 1, 1, customer=1)
    trace.record(20, 'settle', 1, 1, latency=20, u=10.0, ran=10)
    path = write_trace(tmp_path / "t.trace", trace, header)
    assert path.read_text().startswith("# scenario_digest: abc123\n")
    assert read_trace(path).events == trace.events
