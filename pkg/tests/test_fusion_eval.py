import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from crackweak.errors import InputError, StructuralError
from crackweak.evaluation import (
    ImageScore,
    best_of_sweep,
    brightness_histograms,
    evaluate,
    macro_f1,
    micro_f1,
    score_image,
    sweep_threshold,
)
from crackweak.fusion import fuse

import oracles

probs = arrays(np.float64, (4, 4), elements=st.floats(0, 1))
mask_pairs = st.tuples(arrays(bool, (5, 5)), arrays(bool, (5, 5)))


def S(p, r, tp=0, fp=0, fn=0):
    return ImageScore("x", p, r, tp, fp, fn)


class TestFuse:
    def test_identity_and_annihilator(self, rng):
        m = rng.random((6, 7))
        assert np.array_equal(fuse(np.ones((6, 7)), m), m)
        assert (fuse(m, np.zeros((6, 7))) == 0).all()

    def test_product(self):
        assert fuse(np.array([[0.8]]), np.array([[0.5]]))[0, 0] == pytest.approx(0.4)

    def test_shape_mismatch(self):
        with pytest.raises(StructuralError):
            fuse(np.ones((2, 2)), np.ones((2, 3)))

    @given(probs, probs, probs)
    def test_algebra(self, a, b, c):
        f = fuse(a, b)
        assert (f <= np.minimum(a, b)).all()
        assert np.array_equal(f, fuse(b, a))
        assert np.allclose(fuse(fuse(a, b), c), fuse(a, fuse(b, c)), atol=1e-15)


class TestScoreImage:
    def test_perfect(self):
        g = np.array([[True, False], [False, True]])
        s = score_image(g, g)
        assert (s.precision, s.recall) == (1.0, 1.0)

    def test_both_empty(self):
        s = score_image(np.zeros((3, 3), bool), np.zeros((3, 3), bool))
        assert (s.precision, s.recall) == (1.0, 1.0)

    def test_empty_prediction_nonempty_gt(self):
        gt = np.zeros((3, 3), bool)
        gt[0, 0] = True
        s = score_image(np.zeros((3, 3), bool), gt)
        assert (s.precision, s.recall) == (0.0, 0.0)

    def test_half_and_half(self):
        gt = np.zeros((4, 4), bool)
        gt[0, :] = True
        pred = np.zeros((4, 4), bool)
        pred[0, :2] = True
        pred[3, :2] = True
        s = score_image(pred, gt)
        assert (s.tp, s.fp, s.fn) == (2, 2, 2)
        assert (s.precision, s.recall) == (0.5, 0.5)

    def test_shape_mismatch(self):
        with pytest.raises(StructuralError):
            score_image(np.zeros((2, 2)), np.zeros((3, 2)))

    @given(mask_pairs)
    def test_counts_match_oracle(self, pair):
        pred, gt = pair
        s = score_image(pred, gt)
        assert (s.tp, s.fp, s.fn) == oracles.count_pixels(pred, gt)
        assert s.tp + s.fn == gt.sum() and s.tp + s.fp == pred.sum()
        assert (s.precision, s.recall) == oracles.precision_recall(s.tp, s.fp, s.fn)


class TestAggregates:
    def test_macro_examples(self):
        assert macro_f1([S(1.0, 0.5), S(0.5, 1.0)]) == pytest.approx(0.75)
        assert macro_f1([S(1, 1), S(1, 1)]) == 1.0
        assert macro_f1([S(0, 0), S(0, 0)]) == 0.0

    def test_micro_examples(self):
        a, b = S(1, 1, 10, 0, 0), S(0, 0, 0, 0, 10)
        assert micro_f1([a, b]) == pytest.approx(20 / 30)
        assert micro_f1([S(1, 1, 0, 0, 0)]) == 1.0
        single = S(0.6, 0.75, 3, 2, 1)
        assert micro_f1([single]) == pytest.approx(2 * 0.6 * 0.75 / (0.6 + 0.75))

    def test_empty(self):
        with pytest.raises(InputError):
            macro_f1([])
        with pytest.raises(InputError):
            micro_f1([])

    @given(st.lists(mask_pairs, min_size=1, max_size=6), st.randoms())
    def test_permutation_and_duplication(self, pairs, random):
        scores = [score_image(p, g) for p, g in pairs]
        shuffled = scores[:]
        random.shuffle(shuffled)
        assert macro_f1(shuffled) == pytest.approx(macro_f1(scores), abs=1e-12)
        assert macro_f1(scores * 2) == pytest.approx(macro_f1(scores), abs=1e-12)
        assert micro_f1(scores * 2) == pytest.approx(micro_f1(scores), abs=1e-12)

    @given(st.lists(mask_pairs, min_size=1, max_size=4), st.lists(mask_pairs, min_size=1, max_size=4))
    def test_micro_pooling(self, xs, ys):
        sx = [score_image(p, g) for p, g in xs]
        sy = [score_image(p, g) for p, g in ys]
        pooled = S(0, 0, sum(s.tp for s in sx + sy), sum(s.fp for s in sx + sy), sum(s.fn for s in sx + sy))
        assert micro_f1(sx + sy) == micro_f1([pooled])


class TestSweep:
    def test_zero_threshold_full_recall(self, rng):
        gts = [rng.random((6, 6)) > 0.7 for _ in range(3)]
        probs = [rng.random((6, 6)) for _ in range(3)]
        curve = sweep_threshold(probs, gts, [0.0, 1.0])
        assert [t for t, _ in curve] == [0.0, 1.0]
        scores = [score_image(np.ones((6, 6), bool), g) for g in gts]
        assert all(s.recall == 1.0 for s in scores)
        assert curve[0][1] == macro_f1(scores)

    def test_perfect_separation(self, rng):
        gts = [rng.random((8, 8)) > 0.8 for _ in range(4)]
        probs = [np.where(g, 0.9, 0.1) for g in gts]
        curve = dict(sweep_threshold(probs, gts, [0.05, 0.5, 0.95]))
        assert curve[0.5] == 1.0
        assert best_of_sweep(list(curve.items())) == (0.5, 1.0)
        assert len(curve) == 3

    def test_misaligned(self):
        with pytest.raises(StructuralError):
            sweep_threshold([np.zeros((2, 2))], [], [0.5])

    def test_evaluate_report(self, rng):
        gts = [rng.random((8, 8)) > 0.8 for _ in range(3)]
        probs = [np.where(g, 0.9, 0.1) for g in gts]
        rep = evaluate(probs, gts, ["a", "b", "c"], t=0.5, grid=[0.2, 0.5])
        assert rep.macro_f1 == 1.0 and rep.micro_f1 == 1.0
        d = rep.to_dict()
        assert d["best"] == {"threshold": 0.2, "macro_f1": 1.0}
        assert [s["image_id"] for s in d["scores"]] == ["a", "b", "c"]
        assert rep.sweep_csv().splitlines()[0] == "threshold,macro_f1"


class TestHistogram:
    def test_disjoint(self):
        gt = np.zeros((4, 4), bool)
        gt[1, :] = True
        img = np.where(gt, 10, 200).astype(np.uint8)
        h = brightness_histograms([img], [gt])
        assert h.overlap == 0.0
        assert h.crack_bins.sum() == 4 and h.noncrack_bins.sum() == 12
        assert h.crack_bins[10] == 4 and h.noncrack_bins[200] == 12

    def test_identical(self, rng):
        gt = np.zeros((10, 10), bool)
        gt[:5] = True
        vals = rng.integers(0, 256, 50)
        img = np.concatenate([vals, vals]).reshape(10, 10).astype(np.uint8)
        assert brightness_histograms([img], [gt]).overlap == pytest.approx(1.0, abs=1e-12)

    def test_shared_bin(self):
        # crack: half at 10, half at 100; background: half at 100, half at 200
        gt = np.array([[True, True, False, False]])
        img = np.array([[10, 100, 100, 200]], np.uint8)
        assert brightness_histograms([img], [gt]).overlap == pytest.approx(0.5)

    def test_misaligned(self):
        with pytest.raises(StructuralError):
            brightness_histograms([np.zeros((2, 2), np.uint8)], [np.zeros((2, 3), bool)])
        with pytest.raises(StructuralError):
            brightness_histograms([np.zeros((2, 2), np.uint8)], [])
