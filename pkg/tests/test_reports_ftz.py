import os
import struct
import tempfile

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lsft.ftz import MAGIC, FtzError, read_ftz, write_ftz
from lsft.harness import (
    AblationRow,
    AggregateCurve,
    BalancePoint,
    EtaHistogram,
    TimingRow,
    aggregate_traces,
    compare_methods,
)
from lsft.reports import COLUMNS, RunManifest, read_report_csv, write_report_csv
from lsft.synthetic import gen_pair


class TestFtz:
    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 9)),
                  elements=st.floats(allow_nan=False, allow_infinity=False)))
    def test_f8_roundtrip_bit_exact(self, F):
        with tempfile.TemporaryDirectory() as d:
            p = os.path.join(d, "x.ftz")
            write_ftz(F, p)
            back = read_ftz(p)
        assert back.dtype == np.float64
        assert back.tobytes() == F.tobytes()

    def test_f4_quantizes_like_numpy(self, tmp_path, rng):
        F = rng.normal(size=(3, 7)) * 1e3
        write_ftz(F, tmp_path / "a.ftz", dtype="f4")
        np.testing.assert_array_equal(read_ftz(tmp_path / "a.ftz"), F.astype(np.float32).astype(np.float64))

    def test_layout(self, tmp_path):
        F = np.arange(6, dtype=float).reshape(2, 3)
        write_ftz(F, tmp_path / "a.ftz")
        raw = (tmp_path / "a.ftz").read_bytes()
        assert raw[:13] == MAGIC + struct.pack("<IIB", 2, 3, 1)
        assert raw[13:] == F.astype("<f8").tobytes()
        assert len(raw) == 13 + 48

    @pytest.mark.parametrize(
        "payload, match",
        [
            (b"", "bad magic"),
            (b"NOPE" + bytes(9), "bad magic"),
            (MAGIC + b"\x01", "truncated header"),
            (MAGIC + struct.pack("<IIB", 2, 2, 7) + bytes(32), "unknown dtype"),
            (MAGIC + struct.pack("<IIB", 0, 2, 1), "invalid shape"),
            (MAGIC + struct.pack("<IIB", 2, 2, 1) + bytes(31), "truncated payload"),
            (MAGIC + struct.pack("<IIB", 2, 2, 1) + bytes(33), "trailing"),
            (MAGIC + struct.pack("<IIB", 1, 1, 1) + struct.pack("<d", float("nan")), "non-finite"),
        ],
    )
    def test_corrupt(self, tmp_path, payload, match):
        p = tmp_path / "bad.ftz"
        p.write_bytes(payload)
        with pytest.raises(FtzError, match=match):
            read_ftz(p)

    def test_write_errors(self, tmp_path):
        with pytest.raises(FtzError, match="dtype"):
            write_ftz(np.ones((1, 1)), tmp_path / "a.ftz", dtype="f2")
        with pytest.raises(FtzError, match="2-D"):
            write_ftz(np.ones(3), tmp_path / "a.ftz")


def manifest():
    return RunManifest("test", "ls-ft", {"alpha": 1.0, "arr": np.array([1, 2])}, seeds=[1, 2], inputs=["x"])


class TestReports:
    def test_manifest_json_roundtrip(self):
        m = manifest()
        back = RunManifest.from_json(m.to_json())
        assert back.config["arr"] == [1, 2] and back.seeds == [1, 2] and back.tool_version == m.tool_version

    def test_curve_roundtrip_is_exact(self, tmp_path):
        mean = np.array([1 / 3, np.pi, 1e-300, 12345.678901234567])
        curve = AggregateCurve(mean, np.sqrt(mean), 7)
        assert write_report_csv(curve, tmp_path / "c.csv", manifest()) == "convergence"
        rep = read_report_csv(tmp_path / "c.csv")
        assert rep.kind == "convergence" and rep.columns == COLUMNS["convergence"]
        assert rep.column("iteration") == [1, 2, 3, 4]
        assert rep.column("mean_loss") == list(mean) and rep.column("std_loss") == list(np.sqrt(mean))
        assert rep.manifest == RunManifest.from_json(manifest().to_json())

    def test_one_row_curve(self, tmp_path):
        write_report_csv(AggregateCurve(np.array([2.0]), np.array([0.0]), 1), tmp_path / "c.csv")
        body = [l for l in (tmp_path / "c.csv").read_text().splitlines() if not l.startswith("#")]
        assert body == ["iteration,mean_loss,std_loss", "1,2,0"]

    def test_other_kinds(self, tmp_path):
        cases = {
            "balance": [BalancePoint(0.2, 1.5, 2.5)],
            "timing": [TimingRow("fhd", 64, 10, "ls-ft", 0.25)],
            "histogram": EtaHistogram(np.array([0.0, 0.5, 1.0]), np.array([3, 4])),
            "ablation": [AblationRow("ls-ft", False, 1.0, 0.0, 0, 1e-17)],
        }
        for kind, data in cases.items():
            p = tmp_path / f"{kind}.csv"
            assert write_report_csv(data, p) == kind
            rep = read_report_csv(p)
            assert rep.kind == kind and len(rep.rows) == (2 if kind == "histogram" else 1)
        assert read_report_csv(tmp_path / "ablation.csv").rows == [["ls-ft", False, 1.0, 0.0, 0, 1e-17]]
        assert read_report_csv(tmp_path / "histogram.csv").column("count") == [3, 4]

    def test_trace_rows_include_start(self, tmp_path):
        pairs = [gen_pair(s, 4, 20, 20) for s in range(2)]
        traces = compare_methods(pairs, ["ls-ft"], iters=2, seeds=[10, 11], layer="L")["ls-ft"]
        write_report_csv(traces, tmp_path / "t.csv", manifest())
        rep = read_report_csv(tmp_path / "t.csv")
        assert rep.column("iteration") == [0, 1, 2, 0, 1, 2]
        assert rep.column("seed") == [10] * 3 + [11] * 3
        assert rep.column("eta")[0] is None and rep.column("eta")[1] == traces[0].records[0].eta
        assert rep.column("loss")[2] == traces[0].final_loss

    def test_aggregate_file_matches_memory(self, tmp_path):
        pairs = [gen_pair(s, 5, 30, 30) for s in range(4)]
        traces = compare_methods(pairs, ["m-iterft"], iters=5)["m-iterft"]
        agg = aggregate_traces(traces)
        write_report_csv(agg, tmp_path / "a.csv")
        rep = read_report_csv(tmp_path / "a.csv")
        assert rep.column("mean_loss") == list(agg.mean)
        assert rep.column("std_loss") == list(agg.std)

    def test_write_errors(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            write_report_csv([], tmp_path / "x.csv")
        with pytest.raises(TypeError):
            write_report_csv([object()], tmp_path / "x.csv")
        with pytest.raises(OSError, match="missing"):
            write_report_csv([BalancePoint(1, 1, 1)], tmp_path / "missing" / "x.csv")

    def test_read_rejects_bad_files(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("# kind: balance\nalpha,content_loss\n1,2\n")
        with pytest.raises(ValueError, match="schema"):
            read_report_csv(p)
        p.write_text("# kind: nope\na\n")
        with pytest.raises(ValueError, match="unknown report kind"):
            read_report_csv(p)
        p.write_text("# kind: balance\nalpha,content_loss,style_loss\n1,2\n")
        with pytest.raises(ValueError, match="cells"):
            read_report_csv(p)
        p.write_text("# kind: balance\n")
        with pytest.raises(ValueError, match="header"):
            read_report_csv(p)
