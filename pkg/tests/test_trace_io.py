"""Tests for dataset, moment, trace and report files."""

import json
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from herding_box.config import RunConfig
from herding_box.conditional import LabeledDataset
from herding_box.engine import herd_run
from herding_box.exceptions import DatasetParseError, DimensionMismatchError
from herding_box.maximizer import CoordinateAscentMaximizer, ExactEnumerationMaximizer
from herding_box.models import RandomModelSpec, random_mrf, rbm_features
from herding_box.moments import MomentVector
from herding_box.trace import TraceConfig, TraceRecorder
from herding_box.trace_io import (
    meta_path,
    read_dataset,
    read_moments,
    read_trace,
    write_report,
    write_table,
    write_trace,
)


class _TempDirTestCase(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name: str, content: str) -> Path:
        path = self.dir / name
        path.write_text(content, encoding="utf-8")
        return path


class TestReadDataset(_TempDirTestCase):
    def test_labelled(self):
        """Test a label column gives a LabeledDataset."""
        path = self.write("train.csv", "label,x1,x2\n0,1.5,2\n1,-3,4\n")
        dataset = read_dataset(path)
        self.assertIsInstance(dataset, LabeledDataset)
        self.assertEqual(len(dataset), 2)
        np.testing.assert_array_equal(dataset.inputs, [[1.5, 2.0], [-3.0, 4.0]])
        np.testing.assert_array_equal(dataset.labels, [0, 1])

    def test_visible_matrix(self):
        """Test a +-1 matrix is mapped to 0/1 variable values."""
        path = self.write("visible.csv", "v1,v2,v3\n1,-1,1\n-1,-1,1\n")
        np.testing.assert_array_equal(read_dataset(path), [[1, 0, 1], [0, 0, 1]])

    def test_ragged_row_names_line(self):
        """Test an extra field is reported with its line number."""
        path = self.write("ragged.csv", "label,x1,x2\n0,1,2\n1,3,4\n0,5,6,7\n")
        with self.assertRaises(DatasetParseError) as context:
            read_dataset(path)
        self.assertEqual(context.exception.line, 4)

    def test_missing_value_names_line(self):
        """Test a short row is reported with its line number."""
        path = self.write("short.csv", "v1,v2\n1,1\n-1\n")
        with self.assertRaises(DatasetParseError) as context:
            read_dataset(path)
        self.assertEqual(context.exception.line, 3)

    def test_bad_values(self):
        """Test non-numeric cells, bad labels and non-binary visible data."""
        with self.assertRaises(DatasetParseError):
            read_dataset(self.write("text.csv", "v1,v2\n1,a\n"))
        with self.assertRaises(DatasetParseError) as context:
            read_dataset(self.write("labels.csv", "label,x\n0,1\n0.5,2\n"))
        self.assertEqual(context.exception.line, 3)
        with self.assertRaises(DatasetParseError):
            read_dataset(self.write("binary.csv", "v1,v2\n1,0\n"))
        with self.assertRaises(DatasetParseError):
            read_dataset(self.write("empty.csv", ""))

    def test_no_feature_columns(self):
        """Test a label-only file is rejected."""
        with self.assertRaises(DimensionMismatchError):
            read_dataset(self.write("label_only.csv", "label\n0\n1\n"))


class TestReadMoments(_TempDirTestCase):
    def test_named_values(self):
        """Test names and values are read in order."""
        names, values = read_moments(self.write("moments.csv", "name,value\nnode,0.25\nedge,-0.5\n"))
        self.assertEqual(names, ("node", "edge"))
        np.testing.assert_array_equal(values, [0.25, -0.5])

    def test_wrong_header(self):
        """Test the header is checked."""
        with self.assertRaises(DatasetParseError) as context:
            read_moments(self.write("moments.csv", "key,val\na,1\n"))
        self.assertEqual(context.exception.line, 1)


class TestTraceFiles(_TempDirTestCase):
    def test_enumerable_round_trip(self):
        """Test samples, weights and the running feature sum survive a write and read."""
        model = random_mrf(RandomModelSpec(6, 3, seed=11))
        trace = herd_run(None, model.moments, model.fmap, ExactEnumerationMaximizer(), 50, TraceConfig(snapshot_stride=7))
        path = write_trace(trace, self.dir / "trace.csv", RunConfig("herd", {"steps": 50}))
        loaded, meta = read_trace(path)
        np.testing.assert_array_equal(loaded.samples, trace.samples)
        np.testing.assert_array_equal(loaded.running_feature_sum, trace.running_feature_sum)
        np.testing.assert_array_equal(loaded.snapshot_steps, trace.snapshot_steps)
        np.testing.assert_array_equal(loaded.snapshot_weights, trace.snapshot_weights)
        np.testing.assert_array_equal(loaded.final_weights, trace.final_weights)
        np.testing.assert_array_equal(loaded.weight_norms, trace.weight_norms)
        self.assertEqual(loaded.space, trace.space)
        self.assertEqual(meta["config"], {"command": "herd", "steps": 50})
        self.assertEqual(meta["steps"], 50)

    def test_csv_layout(self):
        """Test row 0 has no sample and weights are filled only on snapshot rows."""
        model = random_mrf(RandomModelSpec(4, 2, seed=1))
        trace = herd_run(None, model.moments, model.fmap, ExactEnumerationMaximizer(), 10, TraceConfig(snapshot_stride=5))
        path = write_trace(trace, self.dir / "trace.csv")
        frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ["step", "state_index", "w_norm", "w_inf_norm", "pct", "w0", "w1"])
        self.assertEqual(len(frame), 11)
        self.assertTrue(pd.isna(frame.loc[0, "state_index"]))
        self.assertEqual(list(frame.dropna(subset=["w0"])["step"]), [0, 5, 10])
        self.assertTrue(meta_path(path).exists())

    def test_per_variable_columns(self):
        """Test a space too large to enumerate writes one column per variable."""
        fmap = rbm_features(21, 0)
        data = np.zeros((2, 21), dtype=np.int64)
        data[0, ::2] = 1
        moments = MomentVector.from_data(fmap, data)
        trace = herd_run(None, moments, fmap, CoordinateAscentMaximizer(), 5)
        path = write_trace(trace, self.dir / "trace.csv")
        header = pd.read_csv(path, nrows=0).columns
        self.assertNotIn("state_index", header)
        loaded, _ = read_trace(path)
        np.testing.assert_array_equal(loaded.samples, trace.samples)

    def test_zero_steps_is_header_only(self):
        """Test an empty trace writes only the header."""
        model = random_mrf(RandomModelSpec(3, 2, seed=2))
        recorder = TraceRecorder(model.fmap.space, np.zeros(2), TraceConfig(), 0)
        path = write_trace(recorder.finish(), self.dir / "empty.csv")
        self.assertEqual(path.read_text(encoding="utf-8").splitlines(), ["step,state_index,w_norm,w_inf_norm,pct,w0,w1"])
        loaded, _ = read_trace(path)
        self.assertEqual(loaded.steps, 0)


class TestReports(_TempDirTestCase):
    def test_write_table(self):
        """Test a table and its sidecar are written."""
        frame = pd.DataFrame({"temperature": [0.5, 1.0], "period": [2, 1]})
        path = write_table(frame, self.dir / "table.csv", RunConfig("bifurcate"), note="grid")
        pd.testing.assert_frame_equal(pd.read_csv(path), frame)
        meta = json.loads(meta_path(path).read_text(encoding="utf-8"))
        self.assertEqual(meta["config"], {"command": "bifurcate"})
        self.assertEqual(meta["note"], "grid")

    def test_write_report_converts_numpy(self):
        """Test arrays and numpy scalars are written as plain JSON."""
        report = {"autocorrelation": np.array([1.0, -0.5]), "period": np.int64(4), "path": self.dir}
        path = write_report(report, self.dir / "report.json", RunConfig("diagnose", {"max_lag": 1}))
        content = json.loads(path.read_text(encoding="utf-8"))
        self.assertEqual(content["autocorrelation"], [1.0, -0.5])
        self.assertEqual(content["period"], 4)
        self.assertEqual(content["path"], str(self.dir))
        self.assertEqual(content["config"]["max_lag"], 1)


if __name__ == "__main__":
    unittest.main()
