import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from crackweak.errors import ColorTypeError, MissingFileError, ParameterError, StructuralError
from crackweak.raster import (
    as_gray,
    as_prob,
    read_gray,
    read_mask,
    read_prob,
    threshold,
    to_gray,
    write_gray,
    write_mask,
    write_prob,
)

probs = arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
               elements=st.floats(0.0, 1.0))


class TestToGray:
    def test_black_and_white(self):
        black = np.zeros((2, 2, 3), np.uint8)
        white = np.full((2, 2, 3), 255, np.uint8)
        for w in [(0.299, 0.587, 0.114), (1, 0, 0), (1 / 3, 1 / 3, 1 / 3)]:
            assert (to_gray(black, w) == 0).all()
            assert (to_gray(white, w) == 255).all()

    def test_bt601_hand_value(self):
        px = np.array([[[100, 200, 50]]], np.uint8)
        # 29.9 + 117.4 + 5.7
        assert to_gray(px)[0, 0] == 153

    def test_channel_list(self):
        r, g, b = np.full((2, 3), 100), np.full((2, 3), 200), np.full((2, 3), 50)
        assert (to_gray([r, g, b]) == 153).all()

    def test_channel_shape_mismatch(self):
        with pytest.raises(StructuralError):
            to_gray([np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2))])

    @pytest.mark.parametrize("w", [(0.5, 0.5, 0.5), (-0.1, 0.6, 0.5), (1, 0)])
    def test_bad_weights(self, w):
        with pytest.raises(ParameterError):
            to_gray(np.zeros((1, 1, 3)), w)

    @given(arrays(np.uint8, (4, 5)),
           st.tuples(st.floats(0, 1), st.floats(0, 1)).filter(lambda t: t[0] + t[1] <= 1))
    def test_gray_replication_roundtrip(self, gray, ab):
        w = (ab[0], ab[1], 1.0 - ab[0] - ab[1])
        rgb = np.repeat(gray[..., None], 3, axis=2)
        assert np.array_equal(to_gray(rgb, w), gray)


class TestThreshold:
    def test_constants(self):
        assert not threshold(np.zeros((3, 3)), 0.5).any()
        assert threshold(np.ones((3, 3)), 0.5).all()

    def test_inclusive_boundary(self):
        out = threshold(np.array([[0.4, 0.5, 0.6]]), 0.5)
        assert out.tolist() == [[False, True, True]]

    @pytest.mark.parametrize("t", [-0.01, 1.01])
    def test_out_of_range(self, t):
        with pytest.raises(ParameterError):
            threshold(np.zeros((1, 1)), t)

    @given(probs)
    def test_zero_selects_everything(self, p):
        assert threshold(p, 0.0).all()

    @given(probs, st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, p, t1, t2):
        lo, hi = sorted((t1, t2))
        assert not (threshold(p, hi) & ~threshold(p, lo)).any()


def test_validators():
    with pytest.raises(ParameterError):
        as_gray(np.array([[256]]))
    with pytest.raises(ParameterError):
        as_prob(np.array([[1.5]]))
    with pytest.raises(StructuralError):
        as_prob(np.zeros(3))


class TestFiles:
    def test_prob_roundtrip(self, tmp_path, rng):
        p = rng.random((17, 23))
        write_prob(tmp_path / "p.png", p)
        back = read_prob(tmp_path / "p.png")
        assert back.shape == p.shape
        assert np.abs(back - p).max() <= 0.5 / 65535 + 1e-15

    def test_gray_and_mask_roundtrip(self, tmp_path, rng):
        g = rng.integers(0, 256, (9, 11)).astype(np.uint8)
        m = rng.random((9, 11)) > 0.5
        write_gray(tmp_path / "g.png", g)
        write_mask(tmp_path / "m.png", m)
        assert np.array_equal(read_gray(tmp_path / "g.png"), g)
        assert np.array_equal(read_mask(tmp_path / "m.png"), m)

    def test_mask_binarizes_antialiasing(self, tmp_path):
        write_gray(tmp_path / "a.png", np.array([[0, 127, 128, 255]], np.uint8))
        assert read_mask(tmp_path / "a.png").tolist() == [[False, False, True, True]]

    def test_colour_image_is_converted(self, tmp_path):
        import cv2
        bgr = np.zeros((2, 2, 3), np.uint8)
        bgr[..., 0], bgr[..., 1], bgr[..., 2] = 50, 200, 100  # B, G, R
        cv2.imwrite(str(tmp_path / "c.png"), bgr)
        assert (read_gray(tmp_path / "c.png") == 153).all()

    def test_missing(self, tmp_path):
        with pytest.raises(MissingFileError):
            read_prob(tmp_path / "nope.png")

    def test_colour_prob_rejected(self, tmp_path):
        import cv2
        cv2.imwrite(str(tmp_path / "c.png"), np.zeros((2, 2, 3), np.uint8))
        with pytest.raises(ColorTypeError):
            read_prob(tmp_path / "c.png")
