import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evckit.errors import InsufficientDataError, ParameterError, SchemaError
from evckit.units import (
    Codebook,
    DedupResult,
    dedup,
    expand,
    kmeans_assign,
    kmeans_fit,
    load_codebook,
    load_dedup,
    load_features,
    load_units,
    save_codebook,
    save_dedup,
    save_features,
    save_units,
)


class TestKmeansFit:
    def test_two_points_two_clusters(self):
        pts = np.array([[0.0, 0.0], [4.0, 4.0]])
        cb = kmeans_fit(pts, 2, seed=0)
        assert sorted(map(tuple, cb.centroids.tolist())) == [(0.0, 0.0), (4.0, 4.0)]
        assert cb.inertia_history[-1] == 0.0

    def test_k1_gives_mean(self, rng):
        pts = rng.normal(0, 1, (40, 3))
        cb = kmeans_fit(pts, 1, seed=0)
        assert np.allclose(cb.centroids[0], pts.mean(axis=0))

    def test_deterministic_per_seed(self, rng):
        pts = rng.normal(0, 1, (60, 4))
        cb1 = kmeans_fit(pts, 5, seed=9)
        cb2 = kmeans_fit(pts, 5, seed=9)
        assert np.array_equal(cb1.centroids, cb2.centroids)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            kmeans_fit(np.zeros((2, 3)), 5)

    def test_inertia_monotone(self, rng):
        pts = rng.normal(0, 1, (200, 5))
        cb = kmeans_fit(pts, 8, seed=1, debug=True)
        hist = cb.inertia_history
        assert len(hist) >= 1
        for prev, cur in zip(hist, hist[1:]):
            assert cur <= prev * (1 + 1e-12) + 1e-12

    def test_separated_blobs_recovered(self, rng):
        centers = np.array([[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]])
        labels_true = np.repeat(np.arange(3), 50)
        pts = centers[labels_true] + rng.normal(0, 0.5, (150, 2))
        cb = kmeans_fit(pts, 3, seed=3)
        assigned = kmeans_assign(pts, cb)
        # same partition up to label permutation
        for blob in range(3):
            got = assigned[labels_true == blob]
            assert np.all(got == got[0])
        assert len(set(assigned[::50])) == 3


class TestKmeansAssign:
    def test_exact_match_returns_row_indices(self, rng):
        centroids = rng.normal(0, 1, (6, 3))
        cb = Codebook(centroids)
        assert np.array_equal(kmeans_assign(centroids, cb), np.arange(6))

    def test_tie_breaks_to_lowest_index(self):
        # the point 1.0 is exactly equidistant to centroids 2 and 5
        cb = Codebook(np.array([[9.0], [9.0], [0.0], [9.0], [9.0], [2.0]]))
        assert kmeans_assign(np.array([[1.0]]), cb)[0] == 2

    def test_units_in_range(self, rng):
        cb = kmeans_fit(rng.normal(0, 1, (50, 4)), 7, seed=0)
        units = kmeans_assign(rng.normal(0, 1, (100, 4)), cb)
        assert units.min() >= 0 and units.max() < 7

    def test_dim_mismatch(self, rng):
        cb = Codebook(rng.normal(0, 1, (4, 3)))
        with pytest.raises(ParameterError):
            kmeans_assign(rng.normal(0, 1, (5, 2)), cb)


class TestDedup:
    def test_documented_example(self):
        out = dedup([5, 5, 5, 2, 2, 7])
        assert np.array_equal(out.unique_units, [5, 2, 7])
        assert np.array_equal(out.counts, [3, 2, 1])

    def test_empty(self):
        out = dedup([])
        assert len(out) == 0
        assert expand(out).size == 0

    @given(st.lists(st.integers(min_value=0, max_value=10), max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_expand_inverts_dedup(self, units):
        assert np.array_equal(expand(dedup(units)), np.asarray(units, dtype=np.int64))

    def test_dedup_inverts_expand(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 12))
            units = np.cumsum(rng.integers(1, 4, n))  # strictly increasing, adjacent differ
            counts = rng.integers(1, 5, n)
            d = DedupResult(units, counts)
            back = dedup(expand(d))
            assert np.array_equal(back.unique_units, d.unique_units)
            assert np.array_equal(back.counts, d.counts)

    def test_dedup_invariants(self, rng):
        units = rng.integers(0, 5, 200)
        out = dedup(units)
        assert out.counts.sum() == units.size
        assert out.counts.min() >= 1
        if len(out) > 1:
            assert np.all(np.diff(out.unique_units) != 0)


class TestExpand:
    def test_documented_examples(self):
        assert np.array_equal(expand(DedupResult([5, 2, 7], [3, 2, 1])), [5, 5, 5, 2, 2, 7])
        assert np.array_equal(expand(DedupResult([3], [4])), [3, 3, 3, 3])

    def test_zero_count_rejected(self):
        with pytest.raises(ParameterError):
            DedupResult([3], [0])

    def test_negative_count_rejected(self):
        with pytest.raises(ParameterError):
            DedupResult([3, 4], [2, -1])

    def test_adjacent_duplicates_rejected(self):
        with pytest.raises(ParameterError):
            DedupResult([3, 3], [1, 2])


class TestUnitFileFormats:
    def test_codebook_roundtrip(self, tmp_path, rng):
        cb = Codebook(rng.normal(0, 1, (4, 3)))
        path = tmp_path / "cb.json"
        save_codebook(path, cb)
        back = load_codebook(path)
        assert np.array_equal(back.centroids, cb.centroids)

    def test_codebook_schema_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"k": 2, "dim": 3}')
        with pytest.raises(SchemaError):
            load_codebook(path)
        path.write_text("not json")
        with pytest.raises(SchemaError):
            load_codebook(path)

    def test_features_csv_roundtrip(self, tmp_path, rng):
        feats = rng.normal(0, 1, (7, 3))
        path = tmp_path / "f.csv"
        save_features(path, feats)
        assert np.allclose(load_features(path), feats)

    def test_features_binary_roundtrip(self, tmp_path, rng):
        feats = rng.normal(0, 1, (7, 3)).astype(np.float32).astype(np.float64)
        path = tmp_path / "f.f32"
        save_features(path, feats)
        assert np.array_equal(load_features(path), feats)

    def test_binary_without_sidecar(self, tmp_path):
        path = tmp_path / "f.f32"
        path.write_bytes(b"\x00" * 12)
        with pytest.raises(SchemaError):
            load_features(path)

    def test_binary_size_mismatch(self, tmp_path):
        path = tmp_path / "f.f32"
        path.write_bytes(b"\x00" * 12)
        (tmp_path / "f.f32.json").write_text('{"frames": 2, "dim": 4}')
        with pytest.raises(SchemaError):
            load_features(path)

    def test_units_text_roundtrip(self, tmp_path):
        path = tmp_path / "u.txt"
        save_units(path, [3, 3, 1, 0])
        assert np.array_equal(load_units(path), [3, 3, 1, 0])
        save_units(path, [])
        assert load_units(path).size == 0

    def test_dedup_json_roundtrip(self, tmp_path):
        path = tmp_path / "d.json"
        save_dedup(path, dedup([1, 1, 2]))
        back = load_dedup(path)
        assert np.array_equal(back.unique_units, [1, 2])
        assert np.array_equal(back.counts, [2, 1])

    def test_dedup_json_invalid(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text('{"units": [1, 1], "counts": [1, 1]}')
        with pytest.raises(SchemaError):
            load_dedup(path)
