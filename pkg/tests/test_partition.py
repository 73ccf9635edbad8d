import itertools
import math

import numpy as np
import pytest

from sentmark.embedding import normalize
from sentmark.errors import (
    DegenerateCorpusError,
    DimensionMismatchError,
    InsufficientDataError,
    PartitionLoadError,
)
from sentmark.partition import (
    KMeansPartition,
    assign,
    brute_force_two_cluster_cost,
    fit_kmeans,
    fit_lsh,
    load_partition,
    lsh_margin_ok,
    lsh_signature,
    margin_ok,
    save_partition,
)
from sentmark.rng import Xoshiro256StarStar
from sentmark.toylm import make_clustered_embeddings


def _random_units(n, dim, seed):
    rng = Xoshiro256StarStar(seed)
    return np.stack([normalize([rng.gauss() for _ in range(dim)]) for _ in range(n)])


def two_bundles(n_per_side, dim, seed, jitter=0.02):
    """Two tight antipodal bundles around +e0 and -e0."""
    rng = Xoshiro256StarStar(seed)
    center = normalize([rng.gauss() for _ in range(dim)])
    pts = []
    for sign in (1.0, -1.0):
        for _ in range(n_per_side):
            noise = np.array([rng.gauss() for _ in range(dim)])
            pts.append(normalize(sign * center + jitter * noise))
    return np.stack(pts), center


class TestFitKMeans:
    def test_k_distinct_points_zero_inertia(self):
        pts = np.eye(6)[:4]
        part = fit_kmeans(pts, 4, seed=3)
        assert part.inertia <= 1e-9
        rows = {tuple(np.round(r, 9)) for r in part.centroids}
        assert rows == {tuple(np.round(p, 9)) for p in pts}

    def test_antipodal_bundles_centroids_near_bundle_means(self):
        pts, center = two_bundles(50, 32, seed=9)
        part = fit_kmeans(pts, 2, seed=21)
        mean_a = normalize(pts[:50].mean(axis=0))
        mean_b = normalize(pts[50:].mean(axis=0))
        for mean in (mean_a, mean_b):
            best = float(np.min(1.0 - part.centroids @ mean))
            assert best < 0.01

    def test_two_cluster_assignment_is_brute_force_optimal(self):
        # small enough to enumerate every bipartition
        pts, _ = two_bundles(6, 16, seed=5)
        part = fit_kmeans(pts, 2, seed=8)
        labels = np.array([assign(part, p) for p in pts])
        fitted_cost = brute_force_two_cluster_cost(pts, labels == 0)
        best_cost = min(
            brute_force_two_cluster_cost(pts, np.array(mask))
            for mask in itertools.product([True, False], repeat=len(pts))
            if any(mask) and not all(mask)
        )
        assert fitted_cost <= best_cost + 1e-9

    def test_eight_cluster_recovery_bijective(self):
        pts, _, centers = make_clustered_embeddings(8, 40, 64, seed=5)
        part = fit_kmeans(pts, 8, seed=17)
        sims = part.centroids @ centers.T
        matches = sims.argmax(axis=1)
        assert sorted(matches) == list(range(8))
        assert float((1.0 - sims.max(axis=1)).max()) < 0.05

    def test_insufficient_points(self):
        with pytest.raises(InsufficientDataError):
            fit_kmeans(np.eye(4)[:3], 4, seed=0)

    def test_identical_points_degenerate(self):
        pts = np.tile(normalize([1.0, 2.0, 3.0]), (10, 1))
        with pytest.raises(DegenerateCorpusError):
            fit_kmeans(pts, 2, seed=0)

    def test_inertia_trace_non_increasing(self):
        for seed in range(20):
            pts = _random_units(60, 16, seed=1000 + seed)
            part = fit_kmeans(pts, 4, seed=seed)
            trace = part.inertia_trace
            assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    def test_fit_determinism_bitwise(self, corpus_vectors):
        a = fit_kmeans(corpus_vectors[:500], 8, seed=123)
        b = fit_kmeans(corpus_vectors[:500], 8, seed=123)
        assert np.array_equal(a.centroids, b.centroids)
        assert a.inertia == b.inertia

    def test_centroids_unit_and_distinct(self, kmeans_part):
        norms = np.linalg.norm(kmeans_part.centroids, axis=1)
        assert np.all(np.abs(norms - 1.0) < 1e-6)
        dots = kmeans_part.centroids @ kmeans_part.centroids.T
        np.fill_diagonal(dots, -1)
        assert dots.max() < 1.0 - 1e-9


class TestAssignAndMargin:
    def test_assign_centroid_to_itself(self, kmeans_part):
        for i in range(kmeans_part.k):
            assert assign(kmeans_part, kmeans_part.centroids[i]) == i

    def test_assign_hand_fixture(self):
        part = KMeansPartition(np.array([[1.0, 0.0], [0.0, 1.0]]), 0, 0.0)
        # d_cos((0.6, 0.8), e0) = 0.4; to e1 = 0.2 -> index 1
        assert assign(part, np.array([0.6, 0.8])) == 1

    def test_assign_tie_breaks_lowest_index(self):
        part = KMeansPartition(np.array([[1.0, 0.0], [0.0, 1.0]]), 0, 0.0)
        v = normalize([1.0, 1.0])
        assert assign(part, v) == 0

    def test_assign_dimension_mismatch(self, kmeans_part):
        with pytest.raises(DimensionMismatchError):
            assign(kmeans_part, np.ones(3))

    def test_margin_hand_fixtures(self):
        part = KMeansPartition(np.array([[1.0, 0.0], [0.0, 1.0]]), 0, 0.0)
        assert margin_ok(part, np.array([1.0, 0.0]), 0.035)  # 0 < 1 - 0.035
        equidistant = normalize([1.0, 1.0])
        assert not margin_ok(part, equidistant, 0.0)  # strict inequality fails
        assert margin_ok(part, np.array([1.0, 0.0]), 0.0)

    def test_margin_zero_means_strict_unique_argmin(self, kmeans_part):
        rng = Xoshiro256StarStar(42)
        for _ in range(200):
            v = normalize([rng.gauss() for _ in range(kmeans_part.dim)])
            if margin_ok(kmeans_part, v, 0.0):
                d = 1.0 - kmeans_part.centroids @ v
                order = np.sort(d)
                assert order[0] < order[1]

    def test_margin_monotone_in_m(self, kmeans_part):
        rng = Xoshiro256StarStar(43)
        for _ in range(200):
            v = normalize([rng.gauss() for _ in range(kmeans_part.dim)])
            if margin_ok(kmeans_part, v, 0.05):
                assert margin_ok(kmeans_part, v, 0.02)
                assert margin_ok(kmeans_part, v, 0.0)

    def test_stability_under_small_perturbation(self):
        # points passing the margin keep their region under moves <= m/2
        pts, labels, _ = make_clustered_embeddings(8, 50, 64, seed=6)
        part = fit_kmeans(pts, 8, seed=7)
        m = 0.035
        rng = Xoshiro256StarStar(99)
        trials = same = 0
        i = 0
        while trials < 10_000:
            v = pts[i % len(pts)]
            i += 1
            if not margin_ok(part, v, m):
                continue
            noise = np.array([rng.gauss() for _ in range(64)])
            v2 = normalize(v + (m / 4) * noise / np.linalg.norm(noise))
            if np.linalg.norm(v - v2) > m / 2:
                continue
            trials += 1
            same += assign(part, v2) == assign(part, v)
        assert same / trials >= 0.99


class TestLSH:
    def test_fit_deterministic_and_shape(self):
        a = fit_lsh(3, 64, seed=11)
        b = fit_lsh(3, 64, seed=11)
        assert np.array_equal(a.normals, b.normals)
        assert a.normals.shape == (3, 64)
        assert np.all(np.linalg.norm(a.normals, axis=1) > 0)
        c = fit_lsh(3, 64, seed=12)
        assert not np.array_equal(a.normals, c.normals)

    def test_signature_hand_fixture(self):
        from sentmark.partition import LSHPartition

        part = LSHPartition(np.array([[1.0, 0.0], [0.0, 1.0]]))
        v = np.array([-0.6, 0.8])
        assert lsh_signature(part, v) == 2  # bits (0, 1)

    def test_signature_all_positive_and_complement(self):
        from sentmark.partition import LSHPartition

        part = LSHPartition(np.array([[1.0, 0.0], [0.5, 0.5], [0.9, 0.1]]))
        v = normalize([1.0, 1.0])
        assert lsh_signature(part, v) == 2**3 - 1
        rng = Xoshiro256StarStar(3)
        lsh = fit_lsh(4, 16, seed=2)
        for _ in range(100):
            v = normalize([rng.gauss() for _ in range(16)])
            if np.any(lsh.normals @ v == 0.0):
                continue
            assert lsh_signature(lsh, v) ^ lsh_signature(lsh, -v) == 2**4 - 1

    def test_signature_boundary_dot_gives_zero_bit(self):
        from sentmark.partition import LSHPartition

        part = LSHPartition(np.array([[1.0, 0.0]]))
        assert lsh_signature(part, np.array([0.0, 1.0])) == 0

    def test_margin_hand_fixtures(self):
        from sentmark.partition import LSHPartition

        part = LSHPartition(np.array([[1.0, 0.0]]))
        assert not lsh_margin_ok(part, np.array([0.0, 1.0]), 0.1)  # on the plane
        assert lsh_margin_ok(part, np.array([0.0, 1.0]), 0.0) is False  # distance 0, strict
        assert lsh_margin_ok(part, np.array([0.6, 0.8]), 0.5)  # distance 0.6
        assert lsh_margin_ok(part, np.array([0.6, 0.8]), 0.0)

    def test_region_count(self):
        assert fit_lsh(3, 8, seed=0).region_count == 8


class TestPersistence:
    def test_round_trip_preserves_assignments(self, kmeans_part, lsh_part, tmp_path):
        kpath = tmp_path / "k.json"
        lpath = tmp_path / "l.json"
        save_partition(kmeans_part, kpath)
        save_partition(lsh_part, lpath)
        k2 = load_partition(kpath)
        l2 = load_partition(lpath)
        assert np.array_equal(k2.centroids, kmeans_part.centroids)
        assert np.array_equal(l2.normals, lsh_part.normals)
        rng = Xoshiro256StarStar(55)
        for _ in range(1000):
            v = normalize([rng.gauss() for _ in range(64)])
            assert assign(k2, v) == assign(kmeans_part, v)
            assert lsh_signature(l2, v) == lsh_signature(lsh_part, v)

    def test_truncated_file_rejected(self, kmeans_part, tmp_path):
        path = tmp_path / "p.json"
        save_partition(kmeans_part, path)
        data = path.read_text()
        path.write_text(data[: len(data) // 2])
        with pytest.raises(PartitionLoadError):
            load_partition(path)

    def test_version_mismatch_rejected(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text('{"version": 2, "type": "kmeans", "dim": 2, "k": 2, "rows": [[1,0],[0,1]]}\n')
        with pytest.raises(PartitionLoadError):
            load_partition(path)

    def test_non_unit_centroid_rejected(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(
            '{"version": 1, "type": "kmeans", "dim": 2, "k": 2, '
            '"rows": [[1.0, 0.0], [0.0, 1.5]], "fit_seed": 0}\n'
        )
        with pytest.raises(PartitionLoadError):
            load_partition(path)

    def test_unknown_type_rejected(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text('{"version": 1, "type": "voronoi", "dim": 2, "rows": [[1,0]]}\n')
        with pytest.raises(PartitionLoadError):
            load_partition(path)
