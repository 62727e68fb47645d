import numpy as np
import pytest

from clrsc.datagen import (
    MultiViewDataset,
    add_noise_at_psnr,
    gen_semisynthetic,
    gen_synthetic,
    standin_library,
)
from clrsc.errors import ContractViolation
from clrsc.metrics import psnr
from clrsc.numerics import RngStream


@pytest.fixture(scope="module")
def synthetic():
    return gen_synthetic(RngStream(0))


def test_synthetic_defaults(synthetic):
    assert synthetic.n_views == 2
    assert [v.shape for v in synthetic.views] == [(100, 100), (100, 100)]
    assert synthetic.labels.tolist() == np.repeat(np.arange(1, 6), 20).tolist()


def test_synthetic_clusters_lie_in_low_dim_subspaces(synthetic):
    for X in synthetic.views:
        for j in range(1, 6):
            block = X[:, synthetic.labels == j]
            s = np.linalg.svd(block, compute_uv=False)
            assert np.sum(s > 1e-10 * s[0]) <= 4
            # the basis from the block's span projects every column exactly
            U = np.linalg.svd(block, full_matrices=False)[0][:, :4]
            assert np.linalg.norm(block - U @ (U.T @ block)) < 1e-10


def test_synthetic_views_are_independent(synthetic):
    a, b = synthetic.views
    assert not np.allclose(a, b)


def test_synthetic_minimal():
    ds = gen_synthetic(RngStream(1), ambient=5, k=2, dim=1, per_cluster=1)
    assert ds.views[0].shape == (5, 2)
    assert ds.labels.tolist() == [1, 2]


def test_synthetic_bad_dim():
    with pytest.raises(ContractViolation):
        gen_synthetic(RngStream(1), ambient=3, dim=4)


def test_semisynthetic_identity_library():
    ds = gen_semisynthetic(RngStream(2), np.eye(321))
    for X in ds.views:
        for j in range(1, 6):
            block = X[:, ds.labels == j]
            assert np.count_nonzero(np.any(block != 0, axis=1)) <= 5
            assert np.all(block >= 0)


def test_semisynthetic_shapes_and_repeats():
    lib = standin_library(RngStream(3))
    ds = gen_semisynthetic(RngStream(4), lib)
    assert [v.shape for v in ds.views] == [(321, 50), (321, 50)]
    for X in ds.views:
        for j in range(1, 6):
            block = X[:, ds.labels == j]
            assert block.shape[1] == 10
            assert np.all(block == block[:, :1])
        assert np.linalg.matrix_rank(X) <= 25


def test_semisynthetic_small_library():
    with pytest.raises(ContractViolation):
        gen_semisynthetic(RngStream(0), np.ones((10, 3)))


def test_standin_library_is_positive_and_smooth():
    lib = standin_library(RngStream(5), bands=321, count=20)
    assert lib.shape == (321, 20)
    assert np.all(lib > 0) and np.all(lib <= 1)
    assert np.max(np.abs(np.diff(lib, axis=0))) < 0.1


def test_noise_hits_target_psnr():
    lib = standin_library(RngStream(3))
    clean = gen_semisynthetic(RngStream(4), lib)
    noisy = add_noise_at_psnr(RngStream(8), clean, 40.0)
    for c, n in zip(clean.views, noisy.views):
        assert 39.0 <= psnr(c, n, np.abs(c).max()) <= 41.0
    assert np.array_equal(noisy.labels, clean.labels)


def test_noise_is_deterministic_and_view_independent(synthetic):
    a = add_noise_at_psnr(RngStream(8, 1), synthetic, 30.0)
    b = add_noise_at_psnr(RngStream(8, 1), synthetic, 30.0)
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a.views, b.views))
    n0 = a.views[0] - synthetic.views[0]
    n1 = a.views[1] - synthetic.views[1]
    assert abs(np.corrcoef(n0.ravel(), n1.ravel())[0, 1]) < 0.05


def test_noise_rejects_infinite_target(synthetic):
    with pytest.raises(ContractViolation):
        add_noise_at_psnr(RngStream(0), synthetic, float("inf"))


def test_dataset_validation():
    with pytest.raises(ContractViolation):
        MultiViewDataset([np.ones((2, 3)), np.ones((2, 4))], None, 1)
    with pytest.raises(ContractViolation):
        MultiViewDataset([np.ones((2, 3))], [1, 2, 3], 2)
