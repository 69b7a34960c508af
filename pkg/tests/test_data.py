"""Series generation, loading and windowing."""

import numpy as np
import pytest

from evornn import TimeSeriesDataset, generate_sine, load_series, split_series, window


def test_sine_quarter_period_grid():
    series = generate_sine(4, 4)
    np.testing.assert_allclose(series.values[:, 0], [0.0, 1.0, 0.0, -1.0], atol=1e-12)


def test_sine_noise_free_ignores_seed():
    a = generate_sine(50, 7, amplitude=2.0, phase=0.3, noise_std=0.0, seed=1)
    b = generate_sine(50, 7, amplitude=2.0, phase=0.3, noise_std=0.0, seed=999)
    assert np.array_equal(a.values, b.values)


def test_sine_mean_abs_over_full_periods():
    series = generate_sine(1000, 100)
    oracle = float(np.mean(np.abs(series.values)))
    assert oracle == pytest.approx(2.0 / np.pi, abs=1e-3)


def test_sine_noise_is_seeded():
    a = generate_sine(30, 10, noise_std=0.5, seed=4)
    b = generate_sine(30, 10, noise_std=0.5, seed=4)
    c = generate_sine(30, 10, noise_std=0.5, seed=5)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_sine_rejects_tiny_n():
    with pytest.raises(ValueError):
        generate_sine(1, 10)


def test_load_single_column(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("1.0\n2.0\n3.0\n")
    series = load_series(path)
    assert series.num_steps == 3 and series.num_features == 1
    np.testing.assert_allclose(series.values[:, 0], [1.0, 2.0, 3.0])


def test_load_detects_header(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    series = load_series(path)
    assert series.num_steps == 2 and series.num_features == 2
    np.testing.assert_allclose(series.values, [[1.0, 2.0], [3.0, 4.0]])


def test_load_ragged_rows_names_row(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="row 2"):
        load_series(path)


def test_load_empty_file(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("")
    with pytest.raises(ValueError, match="empty"):
        load_series(path)


def test_load_parse_error_names_row(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("1.0\nnot-a-number\n")
    with pytest.raises(ValueError, match="row 2"):
        load_series(path)


def test_window_count_formula():
    data = generate_sine(10, 5)
    assert window(data, 2).num_windows == 8


def test_window_direct_construction():
    data = TimeSeriesDataset(np.array([1.0, 2.0, 3.0, 4.0]))
    wd = window(data, 2)
    np.testing.assert_allclose(wd.inputs[:, :, 0], [[1.0, 2.0], [2.0, 3.0]])
    np.testing.assert_allclose(wd.targets[:, 0], [3.0, 4.0])


def test_window_look_back_boundary():
    data = generate_sine(6, 3)
    with pytest.raises(ValueError, match="look_back"):
        window(data, 6)
    with pytest.raises(ValueError, match="look_back"):
        window(data, 7)
    assert window(data, 5).num_windows == 1


def test_window_round_trip_alignment():
    rng = np.random.default_rng(8)
    for _ in range(20):
        steps = int(rng.integers(5, 40))
        look_back = int(rng.integers(1, steps))
        values = rng.normal(size=(steps, 2))
        wd = window(TimeSeriesDataset(values), look_back)
        assert wd.num_windows == steps - look_back
        for i in range(wd.num_windows):
            assert np.array_equal(wd.inputs[i], values[i : i + look_back])
            assert np.array_equal(wd.targets[i], values[i + look_back])


def test_dataset_rejects_nan():
    with pytest.raises(ValueError, match="missing"):
        TimeSeriesDataset(np.array([1.0, np.nan, 2.0]))


def test_split_is_chronological():
    data = generate_sine(100, 10)
    train, test = split_series(data, 0.7)
    assert train.num_steps == 70 and test.num_steps == 30
    assert np.array_equal(np.vstack([train.values, test.values]), data.values)
    with pytest.raises(ValueError):
        split_series(data, 1.2)
