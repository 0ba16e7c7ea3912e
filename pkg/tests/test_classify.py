import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopdesc.classify import (
    CRC,
    LabeledSet,
    chi2_distance,
    crc_classify,
    cross_validate,
    describe_set,
    load_dataset,
    make_folds,
    nn_classify,
    quarter_turns,
    scan_dataset,
)
from loopdesc.raster import save_pgm

hist = st.lists(st.floats(0, 1, allow_nan=False), min_size=6, max_size=6)


def toy(vectors, labels):
    return LabeledSet(np.array(vectors, dtype=float), list(labels), [str(i) for i in range(len(labels))],
                      sorted(set(labels)))


def onehot_set(n_per_class, n_classes=2, dim=8):
    vecs, labels = [], []
    for c in range(n_classes):
        for i in range(n_per_class):
            v = np.zeros(dim)
            v[c * (dim // n_classes) + i % (dim // n_classes)] = 1.0
            vecs.append(v)
            labels.append(f"c{c}")
    return toy(vecs, labels)


class TestChi2:
    def test_identity(self):
        assert chi2_distance([0.2, 0.8], [0.2, 0.8]) == 0

    def test_disjoint(self):
        assert chi2_distance([1, 0], [0, 1]) == 2

    def test_zero_bins_skipped(self):
        assert chi2_distance([0.5, 0.5, 0], [0.5, 0.5, 0]) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            chi2_distance([1, 0], [1, 0, 0])

    @given(hist, hist)
    def test_symmetric_nonnegative(self, h, g):
        d = chi2_distance(h, g)
        assert d >= 0
        assert d == pytest.approx(chi2_distance(g, h))
        assert (d == 0) == (np.asarray(h) == np.asarray(g)).all()


class TestNN:
    def test_exact_match(self):
        train = toy([[1, 0, 0], [0, 1, 0], [0, 0, 1]], ["a", "b", "c"])
        assert nn_classify(train, [0, 1, 0]) == "b"

    def test_single_item(self):
        assert nn_classify(toy([[1, 0]], ["only"]), [0, 1]) == "only"

    def test_against_exhaustive_scan(self):
        train = toy([[0.6, 0.4, 0.0], [0.1, 0.1, 0.8], [0.3, 0.3, 0.4]], ["a", "b", "c"])
        q = [0.25, 0.35, 0.4]
        # by hand: a = .1225/.85 + .0025/.75 + .16/.4, and so on
        dists = [chi2_distance(v, q) for v in train.vectors]
        assert dists == pytest.approx([0.5474510, 0.3365079, 0.0083916], abs=1e-6)
        assert nn_classify(train, q) == "c"

    def test_ties_go_to_earliest(self):
        train = toy([[1, 0], [1, 0]], ["x", "y"])
        assert nn_classify(train, [1, 0]) == "x"


class TestCRC:
    def test_query_equal_to_training_column(self, rng):
        vecs = rng.dirichlet(np.ones(16), size=6)
        train = toy(vecs, ["a", "a", "b", "b", "c", "c"])
        model = CRC(1e-6).fit(train)
        assert model.predict(vecs[3])[0] == "b"
        coef = model.coefficients(vecs[3])[:, 0]
        assert np.argmax(np.abs(coef)) == 3
        assert coef[3] == pytest.approx(1.0, abs=1e-3)

    def test_orthogonal_columns(self):
        train = toy([[1, 0], [0, 1]], ["e1", "e2"])
        lam = 1e-3
        res = CRC(lam).fit(train).residuals([1, 0])[0]
        # closed form: a = (1/(1+lam), 0); r_e1 = lam/(1+lam), r_e2 = 1
        assert res[0] == pytest.approx(lam / (1 + lam))
        assert res[1] == pytest.approx(1.0)
        assert crc_classify(train, [1, 0], lam) == "e1"

    def test_huge_lambda_ties_to_first_class(self):
        train = toy([[0, 1], [1, 0]], ["a", "b"])
        res = CRC(1e30).fit(train).residuals([1.0, 0.0])[0]
        assert res[0] == res[1] == 1.0
        assert crc_classify(train, [1.0, 0.0], 1e30) == "a"

    def test_singular_without_regulariser(self):
        train = toy([[1, 0], [1, 0], [0, 1]], ["a", "a", "b"])
        with pytest.raises(np.linalg.LinAlgError, match="lambda > 0"):
            CRC(0.0).fit(train)

    def test_negative_lambda(self):
        with pytest.raises(ValueError):
            CRC(-1.0)

    @given(st.floats(0.01, 100))
    @settings(max_examples=30, deadline=None)
    def test_query_scaling_scales_residuals(self, gamma):
        rng = np.random.default_rng(3)
        vecs = rng.dirichlet(np.ones(10), size=6)
        model = CRC(1e-3).fit(toy(vecs, ["a", "b", "c"] * 2))
        y = rng.dirichlet(np.ones(10))
        r1 = model.residuals(y)[0]
        r2 = model.residuals(gamma * y)[0]
        np.testing.assert_allclose(r2, gamma * r1, rtol=1e-9)
        assert model.predict(y) == model.predict(gamma * y)


class TestFolds:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(1, 13), min_size=2, max_size=5), st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
    def test_stratified(self, sizes, k, seed):
        labels = [f"c{i}" for i, n in enumerate(sizes) for _ in range(n)]
        if k > len(labels):
            return
        plan = make_folds(labels, k, seed)
        for c in set(labels):
            counts = np.bincount(plan.assignment[[i for i, l in enumerate(labels) if l == c]], minlength=k)
            assert counts.max() - counts.min() <= 1
        sizes_per_fold = np.bincount(plan.assignment, minlength=k)
        assert sizes_per_fold.min() >= 1

    def test_deterministic(self):
        labels = ["a"] * 7 + ["b"] * 9
        assert (make_folds(labels, 5, 1).assignment == make_folds(labels, 5, 1).assignment).all()
        assert (make_folds(labels, 5, 1).assignment != make_folds(labels, 5, 2).assignment).any()

    def test_too_many_folds(self):
        with pytest.raises(ValueError):
            make_folds(["a", "b"], 3)


class TestCrossValidate:
    def test_separable_is_perfect(self):
        data = onehot_set(10)
        for clf in ("nn", "crc"):
            recs = cross_validate(data, make_folds(data.labels, 5, 42), clf)
            assert len(recs) == 5
            assert all(r.accuracy == 100.0 for r in recs)
            assert sum(r.n_test for r in recs) == len(data)

    def test_shuffled_labels_near_chance(self):
        rng = np.random.default_rng(42)
        vecs = rng.dirichlet(np.ones(32), size=400)
        labels = ["a", "b"] * 200
        data = toy(vecs, labels)
        recs = cross_validate(data, make_folds(labels, 5, 42), "nn")
        assert abs(np.mean([r.accuracy for r in recs]) - 50) <= 10

    def test_leave_one_out(self):
        data = onehot_set(3)
        recs = cross_validate(data, make_folds(data.labels, 6, 0), "nn")
        assert len(recs) == 6
        assert all(r.n_test == 1 for r in recs)

    def test_starved_class(self):
        data = toy([[1, 0], [0, 1], [0, 1], [0, 1]], ["a", "b", "b", "b"])
        with pytest.raises(ValueError, match="class 'a'"):
            cross_validate(data, make_folds(data.labels, 2, 0), "nn")

    def test_records_in_fold_order_and_bounded(self, rng):
        vecs = rng.dirichlet(np.ones(16), size=60)
        data = toy(vecs, ["a", "b", "c"] * 20)
        plan = make_folds(data.labels, 5, 9)
        serial = cross_validate(data, plan, "crc")
        parallel = cross_validate(data, plan, "crc", workers=4)
        assert serial == parallel
        assert [r.fold for r in serial] == list(range(5))
        assert all(0 <= r.accuracy <= 100 for r in serial)

    def test_unknown_classifier(self):
        data = onehot_set(4)
        with pytest.raises(ValueError):
            cross_validate(data, make_folds(data.labels, 2, 0), "svm")


class TestDataset:
    def make_root(self, tmp_path, rng, layout):
        for label, n in layout.items():
            (tmp_path / label).mkdir()
            for i in range(n):
                save_pgm(rng.integers(0, 256, (24, 24), dtype=np.uint8), tmp_path / label / f"{i}.pgm")
        return tmp_path

    def test_load(self, tmp_path, rng):
        root = self.make_root(tmp_path, rng, {"b": 3, "a": 2})
        data, skipped = load_dataset(root, "lbp", levels=2)
        assert len(data) == 5 and data.classes == ["a", "b"]
        assert data.labels == ["a", "a", "b", "b", "b"]
        assert data.paths == sorted(data.paths)
        assert data.vectors.shape == (5, 512)
        assert skipped == []

    def test_single_class(self, tmp_path, rng):
        root = self.make_root(tmp_path, rng, {"a": 2})
        with pytest.raises(ValueError, match=">= 2 classes"):
            scan_dataset(root)

    def test_empty_class(self, tmp_path, rng):
        root = self.make_root(tmp_path, rng, {"a": 2, "b": 0})
        with pytest.raises(ValueError, match="no PGM"):
            scan_dataset(root)

    def test_non_pgm_skipped(self, tmp_path, rng, caplog):
        root = self.make_root(tmp_path, rng, {"a": 2, "b": 2})
        (root / "a" / "notes.txt").write_text("hi")
        data, skipped = load_dataset(root, "lbp", levels=1)
        assert len(data) == 4
        assert skipped == [str(root / "a" / "notes.txt")]
        assert "skipping" in caplog.text

    def test_unreadable_image_named(self, tmp_path, rng):
        root = self.make_root(tmp_path, rng, {"a": 2, "b": 2})
        (root / "b" / "bad.pgm").write_bytes(b"P2\n3 3\n255\n")
        with pytest.raises(ValueError, match="bad.pgm"):
            load_dataset(root, "lbp", levels=1)

    def test_rotated_queries(self, rng):
        imgs = [rng.integers(0, 256, (20, 20), dtype=np.uint8) for _ in range(6)]
        data = describe_set(imgs, ["a", "b"] * 3, kind="loop", levels=1, rotate_queries=5)
        assert data.queries.shape == data.vectors.shape
        turns = quarter_turns(6, 5)
        for i, t in enumerate(turns):
            if t == 0:
                np.testing.assert_array_equal(data.queries[i], data.vectors[i])
