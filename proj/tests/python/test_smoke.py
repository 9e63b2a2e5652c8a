import numpy as np
import pytest

import yseg


def test_gen_shapes_is_seeded():
    img, labels = yseg.gen_shapes(5)
    again, labels_again = yseg.gen_shapes(5)
    assert img.shape == (64, 64, 3) and img.dtype == np.float32
    assert labels.shape == (64, 64) and labels.dtype == np.uint8
    assert np.array_equal(img, again) and np.array_equal(labels, labels_again)
    assert labels.max() < 4
    assert 0.0 <= img.min() and img.max() <= 1.0


def test_boundary_targets_on_a_split():
    labels = np.zeros((8, 8), np.uint8)
    labels[:, 4:] = 1
    planes = yseg.boundary_targets(labels, 1, 2)
    assert planes.shape == (2, 8, 8)
    assert planes[0].nonzero()[1].tolist() == [3] * 8
    assert planes[1].nonzero()[1].tolist() == [4] * 8


def test_best_crop_matches_exhaustive_search():
    rng = np.random.default_rng(0)
    w = rng.integers(0, 10, (16, 16)).astype(float)
    y, x, h, ww = yseg.best_crop(w, 4, 5, seed=3)
    sums = [w[i:i + 4, j:j + 5].sum() for i in range(13) for j in range(12)]
    assert (h, ww) == (4, 5)
    assert w[y:y + 4, x:x + 5].sum() == max(sums)


def test_metrics():
    _, gt = yseg.gen_shapes(1)
    mean, per_class = yseg.miou(gt, gt, 4)
    assert mean == 1.0
    c = yseg.confusion(gt, gt, 4)
    assert c.sum() == gt.size and np.count_nonzero(c - np.diag(np.diag(c))) == 0
    assert yseg.f1_boundary(gt, gt, 4, 3)["mean_f1"] == 1.0


def test_errors_carry_their_code():
    with pytest.raises(yseg.Error, match="^config: "):
        yseg.normalize_config("no_such_key = 1\n")
    with pytest.raises(yseg.Error, match="^shape: "):
        yseg.boundary_targets(np.zeros((2, 2, 2), np.uint8), 1, 2)


def test_config_round_trip():
    text = yseg.default_config()
    assert yseg.normalize_config(text) == text
    assert "num_classes = 6" in yseg.normalize_config("num_classes = 6\n")


def test_train_then_predict(tmp_path):
    cfg = "num_images = 4\nimage_size = 32\ncrop_size = 32\nbatch_size = 2\ntotal_iters = 4\nseed = 2\n"
    yseg.gen_data(cfg, str(tmp_path / "data"))
    ckpt = str(tmp_path / "model.ytc")
    losses = yseg.train(cfg, str(tmp_path / "data"), ckpt)
    assert len(losses) == 4 and all(np.isfinite(losses))
    assert losses == yseg.train(cfg, str(tmp_path / "data"), str(tmp_path / "again.ytc"))

    model = yseg.Model(ckpt)
    assert model.iteration == 4
    img, _ = yseg.gen_shapes(9, size=32)
    out = model.forward(img)
    assert out["labels"].shape == (32, 32)
    a = out["a_map"]
    assert a.min() >= 0.0 and a.max() <= 1.0
    assert np.array_equal(out["final"][0].argmax(axis=0), out["labels"])


def test_gradcheck_smoke():
    results = yseg.gradcheck()
    assert results and all(ok for _, _, ok in results)
