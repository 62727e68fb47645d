import numpy as np
import pytest

from clrsc.errors import ContractViolation
from clrsc.metrics import sca
from clrsc.numerics import RngStream
from clrsc.spectral import cluster, fuse_affinity, kmeans, normalized_laplacian, spectral_embed


def block_affinity(sizes):
    n = sum(sizes)
    w = np.zeros((n, n))
    start = 0
    for s in sizes:
        w[start:start + s, start:start + s] = 1.0
        start += s
    return w, np.repeat(np.arange(1, len(sizes) + 1), sizes)


def test_fuse_single_identity():
    assert np.array_equal(fuse_affinity([np.eye(3)]), 2 * np.eye(3))


def test_fuse_two_equal_views(rng):
    z = rng.standard_normal((5, 5))
    expected = np.sqrt(2) * (np.abs(z) + np.abs(z).T)
    assert np.allclose(fuse_affinity([z, z]), expected)


def test_fuse_matches_entrywise_oracle(rng):
    Zs = [rng.standard_normal((4, 4)) for _ in range(3)]
    w = fuse_affinity(Zs)
    for i in range(4):
        for j in range(4):
            a = sum(z[i, j] ** 2 for z in Zs) ** 0.5
            b = sum(z[j, i] ** 2 for z in Zs) ** 0.5
            assert w[i, j] == pytest.approx(a + b, rel=1e-14)
    assert np.array_equal(w, w.T)


def test_fuse_zero_pattern():
    z = np.zeros((3, 3))
    z[0, 1] = 1.0
    w = fuse_affinity([z, np.zeros((3, 3))])
    assert w[0, 1] == w[1, 0] == 1.0
    assert np.count_nonzero(w) == 2


def test_fuse_shape_mismatch():
    with pytest.raises(ContractViolation):
        fuse_affinity([np.eye(2), np.eye(3)])


def test_laplacian_block_nullity():
    w, _ = block_affinity([3, 4, 2])
    vals = np.linalg.eigvalsh(normalized_laplacian(w))
    assert np.sum(np.abs(vals) < 1e-10) == 3


def test_laplacian_of_empty_graph():
    assert np.array_equal(normalized_laplacian(np.zeros((4, 4))), np.eye(4))


def test_laplacian_spectrum_range(rng):
    a = np.abs(rng.standard_normal((8, 8)))
    w = a + a.T
    L = normalized_laplacian(w)
    assert np.array_equal(L, L.T)
    vals = np.linalg.eigvalsh(L)
    assert vals.min() >= -1e-10 and vals.max() <= 2 + 1e-10


def test_embedding_block_structure():
    w, labels = block_affinity([5, 5, 5])
    emb = spectral_embed(normalized_laplacian(w), 3)
    for a in range(15):
        for b in range(15):
            dot = emb[a] @ emb[b]
            if labels[a] == labels[b]:
                assert dot == pytest.approx(1.0, abs=1e-8)
            else:
                assert abs(dot) < 1e-8


def test_embedding_single_component(rng):
    a = np.abs(rng.standard_normal((6, 6))) + 0.1
    emb = spectral_embed(normalized_laplacian(a + a.T), 1)
    assert np.allclose(emb, emb[0]) and abs(abs(emb[0, 0]) - 1) < 1e-12


def test_embedding_rows_unit_norm(rng):
    a = np.abs(rng.standard_normal((9, 9)))
    emb = spectral_embed(normalized_laplacian(a + a.T), 3)
    assert np.allclose(np.linalg.norm(emb, axis=1), 1.0, atol=1e-12)


def test_embedding_zero_rows_stay_zero():
    w, _ = block_affinity([3, 3])
    w = np.pad(w, ((0, 1), (0, 1)))
    emb = spectral_embed(normalized_laplacian(w), 2)
    norms = np.linalg.norm(emb, axis=1)
    assert np.all((np.abs(norms - 1) < 1e-12) | (norms == 0))


def test_embedding_too_many_vectors():
    with pytest.raises(ContractViolation):
        spectral_embed(np.eye(3), 4)


def test_kmeans_one_cluster_per_point(rng):
    pts = rng.standard_normal((6, 2))
    res = kmeans(pts, 6, RngStream(1))
    assert sorted(res.labels) == list(range(1, 7))
    assert res.wcss == pytest.approx(0.0, abs=1e-24)


def test_kmeans_single_cluster(rng):
    pts = rng.standard_normal((30, 3))
    res = kmeans(pts, 1, RngStream(1))
    assert set(res.labels) == {1}
    assert res.wcss == pytest.approx(np.sum((pts - pts.mean(axis=0)) ** 2))


def test_kmeans_separated_blobs(rng):
    pts = np.vstack([rng.normal(0, 0.1, (25, 2)), rng.normal(5, 0.1, (25, 2))])
    truth = np.repeat([1, 2], 25)
    assert sca(kmeans(pts, 2, RngStream(4)), truth) == 100.0


def test_kmeans_deterministic(rng):
    pts = rng.standard_normal((40, 3))
    a = kmeans(pts, 4, RngStream(9, (1,)))
    b = kmeans(pts, 4, RngStream(9, (1,)))
    assert np.array_equal(a.labels, b.labels) and a.wcss == b.wcss


def test_kmeans_k_too_large():
    with pytest.raises(ContractViolation):
        kmeans(np.zeros((3, 2)), 4, RngStream(0))


def test_kmeans_never_returns_empty_clusters(rng):
    # duplicated points force empty clusters during seeding
    pts = np.repeat(rng.standard_normal((3, 2)), 10, axis=0)
    res = kmeans(pts, 3, RngStream(2))
    assert len(set(res.labels)) == 3


def test_cluster_ideal_blocks():
    w, labels = block_affinity([6, 4, 5])
    assert sca(cluster(w, 3, RngStream(0)), labels) == 100.0


def test_cluster_permutation_equivariance(rng):
    w, labels = block_affinity([5, 5, 5])
    w = w + 0.01 * np.abs(rng.standard_normal(w.shape))
    w = w + w.T
    perm = rng.permutation(15)
    base = cluster(w, 3, RngStream(0)).labels
    permuted = cluster(w[np.ix_(perm, perm)], 3, RngStream(0)).labels
    assert sca(permuted, base[perm]) == 100.0


def test_cluster_scale_invariance(rng):
    a = np.abs(rng.standard_normal((20, 20)))
    w = a + a.T
    l1 = cluster(w, 3, RngStream(5)).labels
    l2 = cluster(7.3 * w, 3, RngStream(5)).labels
    assert np.array_equal(l1, l2)
