import json

import numpy as np
import pytest

from avica.avica import avica_eval, avica_fit
from avica.classifier import LabeledDataset, classify_batch, train_one_vs_all
from avica.dataio import (
    Blobs,
    Circle,
    Line,
    ModelCorruptError,
    ModelSchemaError,
    ModelVersionError,
    SyntheticSpec,
    UnionOfCircles,
    circle_threshold,
    generate,
    level_set_grid,
    load_model,
    read_csv_points,
    save_model,
    write_level_set_csv,
    write_points_csv,
)
from avica.ipca import ipca_eval, ipca_fit
from avica.kernels import KernelSpec

THETA = 1.0 / np.sqrt(2.0)
SPEC1 = KernelSpec.inhomogeneous(1, THETA)


class TestGenerate:
    def test_clean_circle_radius(self):
        pts, labels = generate(SyntheticSpec(Circle(10.0), 200, 0.0, seed=1))
        assert labels is None
        assert pts.shape == (200, 2)
        np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 10.0, atol=1e-12)

    def test_noisy_circle_radial_spread(self):
        # per-coordinate noise of std sigma gives radial deviations of about
        # the same magnitude
        hits = 0
        for seed in range(5):
            pts, _ = generate(SyntheticSpec(Circle(10.0), 200, 1.1, seed=seed))
            spread = np.std(np.linalg.norm(pts, axis=1) - 10.0)
            hits += 0.7 <= spread <= 1.5
        assert hits >= 4

    def test_union_of_circles_labels(self):
        pts, labels = generate(SyntheticSpec(UnionOfCircles((5.0, 10.0)), 70, 0.0, seed=2))
        assert pts.shape == (140, 2)
        assert np.sum(labels == 0) == 70 and np.sum(labels == 1) == 70
        np.testing.assert_allclose(np.linalg.norm(pts[labels == 0], axis=1), 5.0, atol=1e-12)

    def test_line(self):
        pts, labels = generate(
            SyntheticSpec(Line((2.0, 0.0), (0.0, 3.0)), 50, 0.0, seed=3)
        )
        assert labels is None
        np.testing.assert_allclose(pts[:, 1], 3.0, atol=1e-12)
        assert np.all(np.abs(pts[:, 0]) <= 2.0)

    def test_blobs(self):
        pts, labels = generate(
            SyntheticSpec(Blobs(((0.0, 0.0), (10.0, 10.0)), (0.5, 0.5)), 40, 0.0, seed=4)
        )
        assert pts.shape == (80, 2)
        assert np.linalg.norm(pts[labels == 1].mean(axis=0) - [10, 10]) < 0.5

    def test_deterministic_in_seed(self):
        a, _ = generate(SyntheticSpec(Circle(10.0), 50, 0.7, seed=9))
        b, _ = generate(SyntheticSpec(Circle(10.0), 50, 0.7, seed=9))
        np.testing.assert_array_equal(a, b)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SyntheticSpec(Circle(0.0), 10)
        with pytest.raises(ValueError):
            SyntheticSpec(Circle(1.0), 0)
        with pytest.raises(ValueError):
            SyntheticSpec(Circle(1.0), 10, noise_sigma=-0.1)
        with pytest.raises(ValueError):
            Line((0.0, 0.0), (1.0, 1.0))
        with pytest.raises(ValueError):
            Blobs(((0.0, 0.0),), (1.0, 2.0))


class TestCircleThreshold:
    def test_values(self):
        assert circle_threshold(0.5, 1.0) == pytest.approx(np.sqrt(2.0))
        assert circle_threshold(0.5, 0.0) == 0.0
        assert circle_threshold(1 / np.sqrt(2), 2.0) == pytest.approx(8.0)


class TestLevelSetGrid:
    def _circle_model(self, sigma=1.1, seed=0):
        pts, _ = generate(SyntheticSpec(Circle(10.0), 200, sigma, seed=seed))
        return avica_fit(pts, SPEC1, maxdeg=2, epsilon=circle_threshold(THETA, sigma), seed=seed)

    def test_band_contains_true_circle(self):
        model = self._circle_model()
        grid = level_set_grid(model, (-13.0, 13.0), (-13.0, 13.0), 101)
        # nearest-grid-sample check: values at grid points closest to the circle
        angles = np.linspace(0, 2 * np.pi, 180, endpoint=False)
        circle = 10.0 * np.column_stack([np.cos(angles), np.sin(angles)])
        xi = np.abs(grid.x[:, None] - circle[:, 0][None, :]).argmin(axis=0)
        yi = np.abs(grid.y[:, None] - circle[:, 1][None, :]).argmin(axis=0)
        on_circle = grid.values[xi, yi]
        lo, hi = grid.band
        assert np.mean((on_circle >= lo) & (on_circle <= hi)) >= 0.9

    def test_far_points_outside_band(self):
        model = self._circle_model()
        grid = level_set_grid(model, (30.0, 60.0), (30.0, 60.0), 25)
        lo, hi = grid.band
        outside = (grid.values < lo) | (grid.values > hi)
        assert np.mean(outside) >= 0.99

    def test_minimal_grid(self):
        model = self._circle_model()
        grid = level_set_grid(model, (-1.0, 1.0), (-1.0, 1.0), 2)
        assert grid.values.shape == (2, 2)

    def test_errors(self):
        model = self._circle_model()
        with pytest.raises(ValueError, match="steps"):
            level_set_grid(model, (-1.0, 1.0), (-1.0, 1.0), 1)
        clean, _ = generate(SyntheticSpec(Circle(10.0), 100, 0.0, seed=1))
        bare = avica_fit(clean, SPEC1, maxdeg=1, epsilon=None, seed=1)
        with pytest.raises(ValueError, match="generative"):
            level_set_grid(bare, (-1.0, 1.0), (-1.0, 1.0), 5)
        rng = np.random.default_rng(0)
        pts3 = rng.normal(size=(30, 3))
        model3 = avica_fit(pts3, SPEC1, maxdeg=1, epsilon=10.0, seed=2)
        with pytest.raises(ValueError, match="2-dimensional"):
            level_set_grid(model3, (-1.0, 1.0), (-1.0, 1.0), 5)

    def test_csv_export_round_trip(self, tmp_path):
        model = self._circle_model()
        grid = level_set_grid(model, (-12.0, 12.0), (-12.0, 12.0), 11)
        path = tmp_path / "grid.csv"
        write_level_set_csv(grid, path)
        text = path.read_text().splitlines()
        header = [l for l in text if l.startswith("#")]
        assert any("quantum=" in l for l in header)
        rows = [l for l in text if not l.startswith("#")]
        assert len(rows) == 11 * 11
        x, y, v = rows[0].split(",")
        assert float(x) == grid.x[0] and float(y) == grid.y[0]
        assert float(v) == grid.values[0, 0]


class TestCsvPoints:
    def test_plain_round_trip(self, tmp_path):
        path = tmp_path / "pts.csv"
        pts = np.array([[1.0, 2.0], [3.0, 4.0]])
        write_points_csv(path, pts)
        np.testing.assert_array_equal(read_csv_points(path), pts)

    def test_labeled_round_trip(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("1.0,2.0,0\n3.0,4.0,1\n")
        ds = read_csv_points(path, has_labels=True)
        assert isinstance(ds, LabeledDataset)
        np.testing.assert_array_equal(ds.labels, [0, 1])
        np.testing.assert_array_equal(ds.points, [[1.0, 2.0], [3.0, 4.0]])

    def test_ragged_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0\n1.0,2.0\n")
        with pytest.raises(ValueError, match="line 2"):
            read_csv_points(path)

    def test_non_numeric_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\nx,3.0\n")
        with pytest.raises(ValueError, match="line 2"):
            read_csv_points(path)

    def test_comment_header_skipped(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("# my points\n1.5,2.5\n")
        np.testing.assert_array_equal(read_csv_points(path), [[1.5, 2.5]])

    def test_full_precision_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(20, 3)) * np.pi
        path = tmp_path / "pts.csv"
        write_points_csv(path, pts)
        np.testing.assert_array_equal(read_csv_points(path), pts)


class TestPersistence:
    def _avica_model(self, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-3, 3, (30, 2))
        return avica_fit(X, SPEC1, maxdeg=3, epsilon=0.05, seed=seed)

    def test_avica_round_trip_bitwise(self, tmp_path):
        model = self._avica_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        loaded = load_model(path)
        rng = np.random.default_rng(1)
        for _ in range(10):
            X_new = rng.uniform(-4, 4, (8, 2))
            for (d1, g1), (d2, g2) in zip(avica_eval(model, X_new), avica_eval(loaded, X_new)):
                np.testing.assert_array_equal(d1, d2)
                np.testing.assert_array_equal(g1, g2)

    def test_ipca_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(15, 3))
        model = ipca_fit(X, KernelSpec.inhomogeneous(2, THETA), epsilon=0.1, seed=2)
        path = tmp_path / "m.json"
        save_model(model, path)
        loaded = load_model(path)
        X_new = rng.normal(size=(7, 3))
        np.testing.assert_array_equal(ipca_eval(model, X_new), ipca_eval(loaded, X_new))

    def test_one_vs_all_round_trip_predictions(self, tmp_path):
        pts, labels = generate(SyntheticSpec(UnionOfCircles((5.0, 10.0)), 60, 0.3, seed=3))
        model = train_one_vs_all(LabeledDataset(pts, labels), SPEC1, maxdeg=2,
                                 epsilon="logmean", seed=3)
        path = tmp_path / "ova.json"
        save_model(model, path)
        loaded = load_model(path)
        rng = np.random.default_rng(4)
        probe = rng.uniform(-12, 12, (50, 2))
        np.testing.assert_array_equal(classify_batch(model, probe), classify_batch(loaded, probe))

    def test_truncated_file_is_corrupt(self, tmp_path):
        model = self._avica_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(ModelCorruptError):
            load_model(path)

    def test_future_version_rejected(self, tmp_path):
        model = self._avica_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ModelVersionError):
            load_model(path)

    def test_not_a_model_container(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"hello": "world"}')
        with pytest.raises(ModelCorruptError):
            load_model(path)

    def test_schema_violation_detected(self, tmp_path):
        model = self._avica_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        # corrupt the orthonormality of the first layer's right vectors
        V = payload["model"]["layers"][0]["V"]
        parts = V["data"].split()
        parts[0] = format(7.5, ".17e")
        V["data"] = " ".join(parts)
        path.write_text(json.dumps(payload))
        with pytest.raises(ModelSchemaError, match="orthonormal"):
            load_model(path)

    def test_missing_field_is_schema_error(self, tmp_path):
        model = self._avica_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        del payload["model"]["epsilon"]
        path.write_text(json.dumps(payload))
        with pytest.raises(ModelSchemaError):
            load_model(path)

    def test_broken_epsilon_chain_rejected(self, tmp_path):
        model = self._avica_model()
        path = tmp_path / "m.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        payload["model"]["layers"][1]["epsilon_d"] = format(123.0, ".17e")
        path.write_text(json.dumps(payload))
        with pytest.raises(ModelSchemaError, match="chain"):
            load_model(path)
