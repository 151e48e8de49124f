import gzip

import numpy as np
import pytest

from dstlab.data.augment import (AugmentationSpec, Strength, StrongAugmentation,
                                 WeakAugmentation, augment)
from dstlab.data.batching import BatchPlan, IndexCycler, JointBatcher, ViewMaker
from dstlab.data.dataset import Dataset
from dstlab.data.generators import gen_gaussian_blobs, gen_rings, gen_two_moons
from dstlab.data.io import export_csv, load_csv, load_idx, write_idx
from dstlab.data.split import make_ssl_split
from dstlab.exceptions import ConfigError, ContractError, ParseError, SplitError


def test_two_moons_without_noise_lies_on_half_circle():
    data = gen_two_moons(200, 0.0, seed=0)
    upper = data.features[data.labels == 0]
    np.testing.assert_allclose(np.linalg.norm(upper, axis=1), 1.0, atol=1e-9)
    assert np.all(upper[:, 1] >= -1e-9)
    assert data.class_counts().tolist() == [100, 100]


def test_generators_are_seed_deterministic():
    assert gen_two_moons(100, 0.15, 4).checksum() == gen_two_moons(100, 0.15, 4).checksum()
    assert gen_rings(3, 20, 0.1, 4).checksum() == gen_rings(3, 20, 0.1, 4).checksum()
    blobs = [gen_gaussian_blobs(3, 20, 0.3, [1.0, 1.0, 0.3], 4) for _ in range(2)]
    assert blobs[0].checksum() == blobs[1].checksum()
    assert gen_two_moons(100, 0.15, 4).checksum() != gen_two_moons(100, 0.15, 5).checksum()


def test_two_moons_rejects_odd_n():
    with pytest.raises(ConfigError):
        gen_two_moons(101, 0.1, 0)


def test_rings_radius_equals_class_plus_one():
    data = gen_rings(3, 50, 0.0, seed=2)
    radii = np.linalg.norm(data.features, axis=1)
    np.testing.assert_allclose(radii, data.labels + 1.0, atol=1e-9)


def test_blobs_follow_distance_profile():
    data = gen_gaussian_blobs(3, 500, 0.05, [2.0, 2.0, 0.5], seed=0)
    for cls, distance in enumerate([2.0, 2.0, 0.5]):
        center = data.features[data.labels == cls].mean(axis=0)
        assert np.linalg.norm(center) == pytest.approx(distance, abs=0.02)
    with pytest.raises(ConfigError):
        gen_gaussian_blobs(3, 10, 0.1, [1.0, 1.0], seed=0)


def test_dataset_arrays_are_read_only(moons):
    with pytest.raises(ValueError):
        moons.features[0, 0] = 5.0


def test_load_csv_exact_values(tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("a,b,label\n0.5,1,0\n-2,3.25,1\n4,0,1\n")
    data = load_csv(path)
    assert len(data) == 3
    np.testing.assert_array_equal(data.features, [[0.5, 1.0], [-2.0, 3.25], [4.0, 0.0]])
    np.testing.assert_array_equal(data.labels, [0, 1, 1])
    assert data.feature_names == ("a", "b")


def test_load_csv_reports_line_of_bad_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,label\n0.5,1,0\n1,oops,1\n")
    with pytest.raises(ParseError) as info:
        load_csv(path)
    assert info.value.line == 3


def test_load_csv_reports_short_row(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("a,b,label\n0.5,1,0\n1,2\n")
    with pytest.raises(ParseError) as info:
        load_csv(path)
    assert info.value.line == 3


def test_csv_export_reads_back(tmp_path, moons):
    data = load_csv(export_csv(moons, tmp_path / "moons.csv"))
    np.testing.assert_allclose(data.features, moons.features, rtol=1e-12)
    np.testing.assert_array_equal(data.labels, moons.labels)


@pytest.mark.parametrize("suffix", ["", ".gz"])
def test_idx_round_trip(tmp_path, suffix):
    images = np.arange(32, dtype=np.uint8).reshape(2, 4, 4) * 7
    labels = np.array([3, 1], dtype=np.uint8)
    write_idx(images, labels, tmp_path / f"img{suffix}", tmp_path / f"lbl{suffix}")
    data = load_idx(tmp_path / f"img{suffix}", tmp_path / f"lbl{suffix}")
    assert data.grid_shape == (4, 4)
    np.testing.assert_array_equal(np.round(data.features * 255).astype(np.uint8),
                                  images.reshape(2, 16))
    np.testing.assert_array_equal(data.labels, [3, 1])


def test_idx_wrong_magic_reports_offset_zero(tmp_path):
    images = tmp_path / "img"
    images.write_bytes(b"\x00\x00\x08\x01" + b"\x00" * 20)
    labels = tmp_path / "lbl"
    write_idx(np.zeros((1, 2, 2)), [0], tmp_path / "ok_img", labels)
    with pytest.raises(ParseError) as info:
        load_idx(images, labels)
    assert info.value.offset == 0


def test_idx_gzip_is_really_compressed(tmp_path):
    write_idx(np.zeros((1, 2, 2)), [0], tmp_path / "img.gz", tmp_path / "lbl.gz")
    with gzip.open(tmp_path / "img.gz", "rb") as handle:
        assert handle.read(4) == b"\x00\x00\x08\x03"


def test_split_sizes_and_determinism():
    data = gen_gaussian_blobs(4, 50, 0.3, None, seed=0)
    first = make_ssl_split(data, 4, 0.2, include_labeled_in_unlabeled=True, seed=3)
    second = make_ssl_split(data, 4, 0.2, include_labeled_in_unlabeled=True, seed=3)
    assert len(first.labeled) == 16
    assert first.labeled.class_counts().tolist() == [4, 4, 4, 4]
    assert first.labeled_indices == second.labeled_indices
    assert first.eval.class_counts().tolist() == [10, 10, 10, 10]
    assert len(first.unlabeled) == len(data) - len(first.eval)


def test_split_without_labeled_in_pool():
    data = gen_gaussian_blobs(4, 50, 0.3, None, seed=0)
    split = make_ssl_split(data, 4, 0.2, include_labeled_in_unlabeled=False, seed=3)
    assert len(split.unlabeled) == len(data) - len(split.eval) - len(split.labeled)


def test_split_names_the_short_class():
    features = np.zeros((23, 2))
    labels = np.array([0] * 20 + [1] * 3)
    with pytest.raises(SplitError) as info:
        make_ssl_split(Dataset(features, labels, 2), 4, 0.2, True, seed=0)
    assert info.value.class_index == 1


def test_unlabeled_pool_has_no_labels(moons_split):
    assert not hasattr(moons_split.unlabeled, "labels")


def test_identity_augmentation():
    spec = AugmentationSpec(weak=WeakAugmentation(jitter_sigma=0.0, flip_prob=0.0, crop_pad=0))
    x = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(augment(x, spec, Strength.WEAK, np.random.default_rng(0)), x)


def test_strong_full_drop_is_zero():
    spec = AugmentationSpec(strong=StrongAugmentation(feature_drop_prob=1.0))
    out = augment(np.ones(5), spec, Strength.STRONG, np.random.default_rng(0))
    np.testing.assert_array_equal(out, np.zeros(5))


def test_weak_jitter_standard_deviation():
    rng = np.random.default_rng(0)
    spec = AugmentationSpec()
    draws = np.stack([augment(np.zeros(2), spec, Strength.WEAK, rng) for _ in range(10_000)])
    assert np.all((draws.std(axis=0) >= 0.045) & (draws.std(axis=0) <= 0.055))


def test_augmentation_never_mutates_source(moons):
    before = moons.checksum()
    augment(moons.example(0), AugmentationSpec(), Strength.STRONG, np.random.default_rng(0))
    assert moons.checksum() == before


def test_grid_augmentation_keeps_shape():
    x = np.arange(16.0)
    out = augment(x, AugmentationSpec(), Strength.STRONG, np.random.default_rng(0), grid_shape=(4, 4))
    assert out.shape == (16,)


def test_strong_jitter_must_exceed_weak():
    with pytest.raises(ValueError):
        AugmentationSpec(weak=WeakAugmentation(jitter_sigma=0.5),
                         strong=StrongAugmentation(jitter_sigma=0.1))


def test_labeled_cycle_is_disjoint_then_reshuffled():
    cycler = IndexCycler(16, 8, np.random.default_rng(0))
    first, second = cycler.next(), cycler.next()
    assert sorted(np.concatenate([first, second]).tolist()) == list(range(16))
    cycler.next()
    assert cycler.epoch == 1


def test_unlabeled_batch_size_and_full_cycle(moons_split):
    plan = BatchPlan(labeled_batch=8, unlabeled_ratio=3)
    assert plan.unlabeled_batch == 24
    batcher = JointBatcher(moons_split, plan)
    pool = len(moons_split.unlabeled)
    seen = np.concatenate([batcher.next_joint_batch().unlabeled_index
                           for _ in range(pool // 24)])
    assert len(set(seen.tolist())) == seen.size


def test_empty_pool_is_rejected():
    with pytest.raises(ContractError):
        IndexCycler(0, 4, np.random.default_rng(0))


def test_view_maker_is_seed_deterministic(moons_split):
    def draw():
        batcher = JointBatcher(moons_split, BatchPlan(8, 2, seed=5))
        return ViewMaker(AugmentationSpec(), seed=5)(batcher.next_joint_batch())

    a, b = draw(), draw()
    np.testing.assert_array_equal(a.labeled_weak, b.labeled_weak)
    np.testing.assert_array_equal(a.unlabeled_strong, b.unlabeled_strong)
    assert a.unlabeled_weak.shape == (16, 2)
