import numpy as np
import pytest

from evtcv import (
    PreprocessSpec,
    TabularDataset,
    dump_csv,
    load_csv,
    synthetic_parabola,
)
from evtcv.errors import EmptyAfterPreprocessing, MissingTargetColumn, ParseError

WHO_STYLE = """Country,Year,Status,Life expectancy,Adult Mortality,Population
Albania,2015,Developing,77.8,74,28873
Albania,2014,Developing,77.5,8,288914
Bolivia,2013,Developing,68.2,,105432
Chad,2012,Developing,52.1,280,NA
Chad,2011,Developing,nan,275,12448
Fiji,2010,Developing,68.9,121,888145
"""


@pytest.fixture
def who_csv(tmp_path):
    path = tmp_path / "who.csv"
    path.write_text(WHO_STYLE)
    return path


class TestSyntheticParabola:
    def test_construction_bounds(self):
        data = synthetic_parabola(5000, np.random.default_rng(0))
        x = data.features[:, 0]
        assert np.all((x >= -5) & (x <= 5))
        assert np.all(np.abs(data.target - x**2) <= 5.0)
        assert data.feature_names == ["x"]

    def test_noise_is_centred(self):
        data = synthetic_parabola(1_000_000, np.random.default_rng(1))
        residual = data.target - data.features[:, 0] ** 2
        assert abs(residual.mean()) < 0.02

    def test_deterministic_per_stream(self):
        a = synthetic_parabola(100, np.random.default_rng(7))
        b = synthetic_parabola(100, np.random.default_rng(7))
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.target, b.target)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            synthetic_parabola(0, np.random.default_rng(0))


class TestLoadCsv:
    def test_who_style_pipeline(self, who_csv):
        spec = PreprocessSpec(
            target_column="Life expectancy",
            drop_columns=("Year", "Population"),
        )
        data, log = load_csv(who_csv, spec)
        # Country/Status non-numeric; Year/Population dropped by name;
        # rows 3 (empty cell) and 5 (nan target) dropped
        assert data.feature_names == ["Adult Mortality"]
        assert data.n_rows == 4
        assert data.target_name == "Life expectancy"
        stages = [s["stage"] for s in log.stages]
        assert stages == ["parsed", "drop_columns", "drop_non_numeric",
                          "drop_rows_with_missing", "zscore_normalize"]

    def test_row_counts_decrease_only_at_missing_stage(self, who_csv):
        spec = PreprocessSpec(target_column="Life expectancy",
                              drop_columns=("Year", "Population"))
        _, log = load_csv(who_csv, spec)
        rows = [s["n_rows"] for s in log.stages]
        for before, after, stage in zip(rows, rows[1:], log.stages[1:]):
            if stage["stage"] == "drop_rows_with_missing":
                assert after < before
            else:
                assert after == before

    def test_zscore_population_convention(self, who_csv):
        spec = PreprocessSpec(target_column="Life expectancy",
                              drop_columns=("Year", "Population"))
        data, _ = load_csv(who_csv, spec)
        col = data.features[:, 0]
        assert abs(col.mean()) < 1e-9
        assert abs(col.std() - 1.0) < 1e-9  # np.std divides by n

    def test_normalization_can_be_disabled(self, who_csv):
        spec = PreprocessSpec(target_column="Life expectancy",
                              drop_columns=("Year", "Population"),
                              zscore_normalize=False)
        data, _ = load_csv(who_csv, spec)
        assert data.features[:, 0].tolist() == [74.0, 8.0, 280.0, 121.0]

    def test_missing_target_column(self, who_csv):
        with pytest.raises(MissingTargetColumn):
            load_csv(who_csv, PreprocessSpec(target_column="happiness"))

    def test_ragged_row_parse_error_carries_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,y\n1,2,3\n4,5\n")
        with pytest.raises(ParseError) as err:
            load_csv(path, PreprocessSpec(target_column="y"))
        assert err.value.line == 3

    def test_all_rows_dropped(self, tmp_path):
        path = tmp_path / "gone.csv"
        path.write_text("a,y\nNA,1\nnan,2\n,3\n")
        with pytest.raises(EmptyAfterPreprocessing):
            load_csv(path, PreprocessSpec(target_column="y"))

    def test_target_cannot_be_dropped(self):
        with pytest.raises(ValueError):
            PreprocessSpec(target_column="y", drop_columns=("y",))


class TestRoundTrip:
    def test_dump_then_load_is_idempotent(self, tmp_path):
        data = synthetic_parabola(200, np.random.default_rng(3))
        first = tmp_path / "first.csv"
        dump_csv(data, first)
        spec = PreprocessSpec(target_column="y", zscore_normalize=False)
        loaded, _ = load_csv(first, spec)
        np.testing.assert_allclose(loaded.features, data.features, rtol=0, atol=0)
        np.testing.assert_allclose(loaded.target, data.target, rtol=0, atol=0)

        # re-applying the normalizing pipeline to its own output is a no-op
        norm_spec = PreprocessSpec(target_column="y")
        once, _ = load_csv(first, norm_spec)
        second = tmp_path / "second.csv"
        dump_csv(once, second)
        twice, _ = load_csv(second, norm_spec)
        np.testing.assert_allclose(twice.features, once.features, atol=1e-12)
        np.testing.assert_array_equal(twice.target, once.target)


class TestTabularDataset:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            TabularDataset(np.array([[1.0], [np.inf]]), np.array([1.0, 2.0]), ["x"])

    def test_arrays_are_frozen(self):
        data = synthetic_parabola(10, np.random.default_rng(0))
        with pytest.raises(ValueError):
            data.features[0, 0] = 99.0

    def test_take_subset(self):
        data = synthetic_parabola(10, np.random.default_rng(0))
        sub = data.take([3, 5])
        assert sub.n_rows == 2
        np.testing.assert_array_equal(sub.target, data.target[[3, 5]])
