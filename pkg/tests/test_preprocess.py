import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anpr.image import BinaryImage, GrayImage, Polarity, RgbImage
from anpr.preprocess import (
    PreprocessConfig,
    bilateral_filter,
    binarize,
    clahe,
    dilate,
    preprocess,
    preprocess_stages,
    to_grayscale,
)

from oracles import bilateral_ref, clahe_ref, dilate_ref, to_lists


def gray(rows):
    return GrayImage(np.array(rows, dtype=np.uint8))


@pytest.mark.parametrize("rgb, expected", [((255, 255, 255), 255), ((0, 0, 0), 0), ((255, 0, 0), 76)])
def test_grayscale_examples(rgb, expected):
    img = RgbImage(np.array([[rgb]], dtype=np.uint8))
    assert to_grayscale(img).data.tolist() == [[expected]]


def test_bilateral_constant_image_is_fixed_point():
    img = GrayImage(np.full((9, 7), 137, np.uint8))
    assert bilateral_filter(img) == img


def test_bilateral_ramp_matches_reference():
    rows = [[0, 60, 120, 180, 240]] * 5
    out = bilateral_filter(gray(rows))
    assert to_lists(out.data) == bilateral_ref(rows, 5, 2.0, 50.0)


@pytest.mark.parametrize("seed", range(6))
def test_bilateral_random_matches_reference(seed):
    rng = np.random.default_rng(seed)
    h, w = rng.integers(3, 12, size=2)
    data = rng.integers(0, 256, size=(h, w))
    cfg = PreprocessConfig(bilateral_kernel=int(rng.choice([3, 5, 7])), bilateral_sigma_range=float(rng.uniform(10, 80)))
    out = bilateral_filter(GrayImage(data), cfg)
    expected = bilateral_ref(to_lists(data), cfg.bilateral_kernel, cfg.bilateral_sigma_space, cfg.bilateral_sigma_range)
    assert to_lists(out.data) == expected


def test_clahe_constant_image_unchanged():
    img = GrayImage(np.full((20, 13), 90, np.uint8))
    assert clahe(img) == img


def test_clahe_two_halves_matches_reference():
    rows = [[100] * 8 + [200] * 8 for _ in range(16)]
    cfg = PreprocessConfig(clahe_tile=8, clahe_clip=256.0)
    assert to_lists(clahe(gray(rows), cfg).data) == clahe_ref(rows, 8, 256.0)


@pytest.mark.parametrize("seed", range(6))
def test_clahe_random_matches_reference(seed):
    rng = np.random.default_rng(100 + seed)
    h, w = rng.integers(4, 30, size=2)
    data = rng.integers(0, 256, size=(h, w)) // int(rng.choice([1, 16, 64])) * 16 % 256
    tile = int(rng.choice([4, 8]))
    clip = float(rng.choice([1.0, 2.0, 4.0, 8.0]))
    out = clahe(GrayImage(data), PreprocessConfig(clahe_tile=tile, clahe_clip=clip))
    assert to_lists(out.data) == clahe_ref(to_lists(data), tile, clip)


def test_binarize_boundaries():
    out = binarize(gray([[127, 128, 0, 255]]), 128)
    assert out.polarity is Polarity.INK
    assert out.bits.tolist() == [[1, 0, 1, 0]]
    assert not binarize(GrayImage(np.full((4, 4), 255, np.uint8))).bits.any()


def test_binarize_rejects_bad_threshold():
    with pytest.raises(ValueError):
        binarize(gray([[0]]), 256)


def test_dilate_empty_and_single_point():
    empty = BinaryImage(np.zeros((11, 11), np.uint8))
    assert dilate(empty) == empty
    bits = np.zeros((11, 11), np.uint8)
    bits[5, 5] = 1
    out = dilate(BinaryImage(bits)).bits
    expected = np.zeros((11, 11), np.uint8)
    expected[4:7, 4:7] = 1
    assert np.array_equal(out, expected)


def test_dilate_rejects_edge_polarity():
    with pytest.raises(ValueError):
        dilate(BinaryImage(np.zeros((3, 3), np.uint8), Polarity.EDGE))


@pytest.mark.parametrize("seed", range(6))
def test_dilate_random_matches_reference(seed):
    rng = np.random.default_rng(200 + seed)
    bits = (rng.random(rng.integers(1, 15, size=2)) < 0.1).astype(np.uint8)
    r, it = int(rng.integers(1, 3)), int(rng.integers(0, 3))
    out = dilate(BinaryImage(bits), r, it)
    assert to_lists(out.bits) == dilate_ref(to_lists(bits), r, it)


binary_arrays = arrays(np.uint8, st.tuples(st.integers(1, 16), st.integers(1, 16)), elements=st.integers(0, 1))


@settings(max_examples=60, deadline=None)
@given(binary_arrays)
def test_dilation_is_extensive_and_composes(bits):
    img = BinaryImage(bits)
    once = dilate(img, 1, 1)
    assert np.all(once.bits >= bits)
    assert dilate(img, 1, 2) == dilate(img, 2, 1)
    assert dilate(img, 1, 0) == img


@settings(max_examples=60, deadline=None)
@given(binary_arrays, st.data())
def test_dilation_is_monotone(bits, data):
    extra = data.draw(arrays(np.uint8, bits.shape, elements=st.integers(0, 1)))
    bigger = bits | extra
    assert np.all(dilate(BinaryImage(bigger)).bits >= dilate(BinaryImage(bits)).bits)


def test_preprocess_constant_gray_is_all_white():
    binary, dilated = preprocess(GrayImage(np.full((32, 32), 200, np.uint8)))
    assert not binary.bits.any()
    assert not dilated.bits.any()


def test_stage_order():
    rng = np.random.default_rng(3)
    img = RgbImage(rng.integers(0, 256, size=(24, 24, 3)).astype(np.uint8))
    stages = preprocess_stages(img)
    assert list(stages) == ["gray", "denoised", "contrast", "binary", "dilated"]
    assert stages["denoised"] == bilateral_filter(stages["gray"])
    assert stages["contrast"] == clahe(stages["denoised"])
    assert stages["dilated"] == dilate(stages["binary"])


def test_config_validation():
    with pytest.raises(ValueError):
        PreprocessConfig(bilateral_kernel=4)
    with pytest.raises(ValueError):
        PreprocessConfig(clahe_clip=0.5)


def test_dilate_radius_larger_than_image():
    bits = np.array([[0, 0, 1, 0, 0]], np.uint8)
    assert dilate(BinaryImage(bits), 2).bits.tolist() == [[1, 1, 1, 1, 1]]
    assert dilate(BinaryImage(bits.T), 7).bits.all()
