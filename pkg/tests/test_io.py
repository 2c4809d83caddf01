import json

import numpy as np
import pandas as pd

from splinet.utils.io import json_safe, write_frame, write_json, write_jsonl


def test_json_safe():
    document = {'a': np.float64(np.inf), 'b': [np.int64(3), np.nan, 0.5], 'c': np.bool_(True), 'd': None}
    assert json_safe(document) == {'a': None, 'b': [3, None, 0.5], 'c': True, 'd': None}


def test_write_json_sorts_keys(tmp_path):
    path = write_json(tmp_path / 'nested' / 'doc.json', {'b': 1, 'a': float('nan')})
    assert path.read_text() == '{\n  "a": null,\n  "b": 1\n}\n'


def test_jsonl(tmp_path):
    path = write_jsonl(tmp_path / 'records.jsonl', [{'x': 1.0}, {'x': np.inf}])
    assert [json.loads(line) for line in path.read_text().splitlines()] == [{'x': 1.0}, {'x': None}]


def test_write_frame_round_trips_floats(tmp_path):
    values = np.array([0.1, 1 / 3, np.pi * 1e-9])
    path = write_frame(tmp_path / 'frame.csv', pd.DataFrame({'v': values}))
    np.testing.assert_array_equal(pd.read_csv(path, float_precision='round_trip')['v'].to_numpy(), values)
