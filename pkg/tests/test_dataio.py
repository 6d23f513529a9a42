from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irvol.dataio import (
    read_chain,
    read_chain_meta,
    read_returns,
    read_ticks,
    write_chain,
    write_returns,
    write_summary,
    write_ticks,
)
from irvol.mcmc import McmcChain, McmcConfig, summarize


def _write(path, text):
    path.write_text(text)
    return path


class TestReadTicks:
    def test_grouping_and_sorting(self, tmp_path):
        path = _write(tmp_path / "ticks.csv", (
            "asset,timestamp,price\n"
            "b,2.0,20.0\n"
            "a,3.0,4.0\n"
            "a,1.0,3.0\n"
            "b,1.0,19.0\n"
        ))
        series = read_ticks(path)
        assert [s.asset_id for s in series] == ["b", "a"]  # first-appearance order
        np.testing.assert_allclose(series[1].timestamps, [1.0, 3.0])
        np.testing.assert_allclose(series[1].prices, [3.0, 4.0])

    def test_duplicate_timestamp_keeps_last(self, tmp_path):
        path = _write(tmp_path / "ticks.csv", (
            "asset,timestamp,price\n"
            "a,1.0,3.0\n"
            "a,1.0,5.0\n"
            "a,2.0,4.0\n"
        ))
        series = read_ticks(path)
        np.testing.assert_allclose(series[0].prices, [5.0, 4.0])

    def test_nonpositive_price_reports_line(self, tmp_path):
        path = _write(tmp_path / "ticks.csv",
                      "asset,timestamp,price\na,1.0,3.0\na,2.0,-1.0\n")
        with pytest.raises(ValueError, match="line 3"):
            read_ticks(path)

    def test_malformed_row_reports_line(self, tmp_path):
        path = _write(tmp_path / "ticks.csv",
                      "asset,timestamp,price\na,1.0,3.0\na,2.0\n")
        with pytest.raises(ValueError, match="line 3"):
            read_ticks(path)

    def test_empty_file_rejected(self, tmp_path):
        path = _write(tmp_path / "ticks.csv", "")
        with pytest.raises(ValueError, match="empty"):
            read_ticks(path)
        header_only = _write(tmp_path / "ticks2.csv", "asset,timestamp,price\n")
        with pytest.raises(ValueError, match="no data rows"):
            read_ticks(header_only)

    def test_iso_timestamps_are_utc(self, tmp_path):
        path = _write(tmp_path / "ticks.csv", (
            "asset,timestamp,price\n"
            "a,1970-01-01T00:00:01.5,3.0\n"
            "a,1970-01-01T00:00:02Z,4.0\n"
        ))
        series = read_ticks(path)
        np.testing.assert_allclose(series[0].timestamps, [1.5, 2.0])

    def test_roundtrip(self, tmp_path):
        from irvol.core import TickSeries

        rng = np.random.default_rng(0)
        ts = np.cumsum(rng.uniform(0.1, 3.0, size=20))
        original = [
            TickSeries("x", ts, np.exp(rng.normal(size=20))),
            TickSeries("y", ts + 0.05, np.exp(rng.normal(size=20))),
        ]
        path = tmp_path / "ticks.csv"
        write_ticks(original, path)
        back = read_ticks(path)
        for a, b in zip(original, back):
            assert a.asset_id == b.asset_id
            np.testing.assert_array_equal(a.timestamps, b.timestamps)
            np.testing.assert_array_equal(a.prices, b.prices)


class TestReturnsRoundTrip:
    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        gaps = rng.uniform(0.2, 2.0, size=9)
        ts = np.concatenate(([0.0], np.cumsum(gaps)))
        r = rng.normal(scale=1e-4, size=(2, 10))
        path = tmp_path / "returns.csv"
        write_returns(path, ts, r, ["aa", "bb"])
        ts2, gaps2, r2, assets = read_returns(path)
        np.testing.assert_array_equal(ts, ts2)
        np.testing.assert_array_equal(np.diff(ts), gaps2)
        np.testing.assert_array_equal(r, r2)
        assert assets == ["aa", "bb"]

    def test_univariate_shape(self, tmp_path):
        path = tmp_path / "returns.csv"
        write_returns(path, [0.0, 1.0, 2.5], [0.1, -0.2, 0.3], ["solo"])
        ts, gaps, r, assets = read_returns(path)
        assert r.shape == (1, 3)

    def test_gap_consistency_enforced(self, tmp_path):
        path = _write(tmp_path / "returns.csv", (
            "timestamp,gap,r_a\n"
            "0.0,,0.1\n"
            "1.0,0.9,0.2\n"
        ))
        with pytest.raises(ValueError, match="disagrees"):
            read_returns(path)

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6,
                              allow_nan=False, allow_infinity=False),
                    min_size=2, max_size=30))
    @settings(max_examples=40, deadline=None)
    def test_any_float_payload_roundtrips(self, values):
        import tempfile

        ts = np.arange(float(len(values)))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "returns.csv"
            write_returns(path, ts, np.array(values)[np.newaxis, :], ["v"])
            _, _, r2, _ = read_returns(path)
        np.testing.assert_array_equal(np.array(values), r2[0])


def _small_chain(seed=0, config=None):
    rng = np.random.default_rng(seed)
    names = ("mu", "phi", "sigma_eta", "h_0", "h_9")
    draws = rng.normal(size=(100, len(names)))
    rates = {"mu": 0.43, "phi": 0.41, "sigma_eta": 0.44, "h": 0.45}
    return McmcChain(names, draws, rates, config)


class TestChainRoundTrip:
    def test_bit_identical(self, tmp_path):
        config = McmcConfig(1100, 100, 10, rng_seed=9)
        chain = _small_chain(seed=2, config=config)
        path = tmp_path / "chain.csv"
        write_chain(chain, path, extra_meta={"gap_scale_factor": 7.0})
        back = read_chain(path)
        np.testing.assert_array_equal(chain.draws, back.draws)
        assert back.names == chain.names
        assert back.config == config
        assert back.acceptance_rates == chain.acceptance_rates
        assert read_chain_meta(path)["gap_scale_factor"] == 7.0

    def test_awkward_floats(self, tmp_path):
        names = ("x",)
        values = np.array([[0.1], [1e-300], [-1e308], [3.141592653589793],
                           [2.2250738585072014e-308]])
        chain = McmcChain(names, values)
        path = tmp_path / "chain.csv"
        write_chain(chain, path)
        np.testing.assert_array_equal(read_chain(path).draws, values)

    def test_missing_sidecar_warns(self, tmp_path):
        chain = _small_chain()
        path = tmp_path / "chain.csv"
        write_chain(chain, path)
        (tmp_path / "chain.csv.meta.json").unlink()
        with pytest.warns(UserWarning, match="sidecar"):
            back = read_chain(path)
        assert back.config is None
        np.testing.assert_array_equal(back.draws, chain.draws)

    def test_width_mismatch_rejected(self, tmp_path):
        path = _write(tmp_path / "chain.csv", "a,b\n1.0,2.0\n3.0\n")
        with pytest.raises(ValueError, match="width"):
            read_chain(path)

    def test_unknown_version_rejected(self, tmp_path):
        chain = _small_chain()
        path = tmp_path / "chain.csv"
        write_chain(chain, path)
        meta_path = tmp_path / "chain.csv.meta.json"
        meta_path.write_text(meta_path.read_text().replace(
            '"format_version": 1', '"format_version": 99'))
        with pytest.raises(ValueError, match="version"):
            read_chain(path)


class TestWriteSummary:
    def test_table_layout(self, tmp_path):
        chain = McmcChain(("mu",), np.full((50, 1), -8.9997))
        summary = summarize(chain)
        path = tmp_path / "summary.csv"
        write_summary(summary, path, true_values={"mu": -9.0})
        lines = path.read_text().splitlines()
        assert lines[0] == "parameter,true_value,mean,sd,q2.5,q97.5"
        assert lines[1] == "mu,-9.0000,-8.9997,0.0000,-8.9997,-8.9997"

    def test_without_true_values(self, tmp_path):
        chain = McmcChain(("a", "b"), np.random.default_rng(3).normal(size=(40, 2)))
        path = tmp_path / "summary.csv"
        write_summary(summarize(chain), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "parameter,mean,sd,q2.5,q97.5"
        assert len(lines) == 3

    def test_empty_summary_header_only(self, tmp_path):
        from irvol.mcmc import PosteriorSummary
        path = tmp_path / "summary.csv"
        write_summary(PosteriorSummary({}), path)
        assert path.read_text().splitlines() == ["parameter,mean,sd"]

    def test_non_ascii_rejected(self, tmp_path):
        chain = McmcChain(("µ",), np.zeros((5, 1)))
        with pytest.raises(ValueError, match="ASCII"):
            write_summary(summarize(chain), tmp_path / "s.csv")
