import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from anpr.dataset import SceneSpec, render_scene
from anpr.image import BinaryImage, BoundingBox, Polarity, crop
from anpr.locate import sobel_vertical
from anpr.preprocess import preprocess
from anpr.segment import (
    Axis,
    Band,
    EmptyPlateError,
    Projection,
    find_bands,
    normalize_glyph,
    project,
    select_character_band,
    split_characters,
    strip_noise_rows,
)

from oracles import find_bands_ref, normalize_ref, project_columns_ref, project_rows_ref, to_lists


def ink(rows):
    return BinaryImage(np.array(rows, dtype=np.uint8), Polarity.INK)


def bands_as_tuples(bands):
    return [(b.start, b.end, b.area, b.peak) for b in bands]


def test_projection_examples():
    img = ink([[1, 0, 1], [0, 1, 0]])
    assert project(img, Axis.ROWS).counts.tolist() == [2, 1]
    assert project(img, Axis.COLUMNS).counts.tolist() == [1, 1, 1]
    assert not project(ink(np.zeros((3, 4))), Axis.ROWS).counts.any()


@pytest.mark.parametrize("seed", range(8))
def test_projections_match_reference(seed):
    rng = np.random.default_rng(500 + seed)
    bits = (rng.random(rng.integers(1, 25, size=2)) < 0.4).astype(np.uint8)
    lists = to_lists(bits)
    assert project(ink(bits), Axis.ROWS).counts.tolist() == project_rows_ref(lists)
    assert project(ink(bits), Axis.COLUMNS).counts.tolist() == project_columns_ref(lists)


def test_find_bands_example():
    bands = find_bands(Projection(Axis.ROWS, [0, 0, 5, 6, 5, 0, 2, 0]))
    assert bands == [Band(2, 4, 16, 6), Band(6, 6, 2, 2)]
    assert bands[0].width == 3 and bands[1].width == 1


def test_find_bands_degenerate():
    assert find_bands(Projection(Axis.ROWS, [0, 0, 0])) == []
    assert find_bands(Projection(Axis.ROWS, [3, 1, 4])) == [Band(0, 2, 8, 4)]
    assert find_bands(Projection(Axis.ROWS, [])) == []


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 9), max_size=60))
def test_find_bands_matches_run_scan(counts):
    assert bands_as_tuples(find_bands(Projection(Axis.COLUMNS, counts))) == find_bands_ref(counts)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 9), max_size=60))
def test_bands_are_disjoint_and_cover_the_mass(counts):
    bands = find_bands(Projection(Axis.ROWS, counts))
    assert sum(b.area for b in bands) == sum(counts)
    for a, b in zip(bands, bands[1:]):
        assert a.end + 1 < b.start


def fig11_plate():
    """A noise band with 8 edges per row over 2 rows above a 10-row
    character band with 6 edges per row.

    Each isolated one-pixel ink column produces an edge on either side,
    and features at least 2 rows tall produce edges on exactly their rows.
    """
    bits = np.zeros((20, 40), np.uint8)
    for x in (4, 12, 20, 28):
        bits[2:4, x] = 1
    for x in (6, 18, 30):
        bits[6:16, x] = 1
    return ink(bits)


def test_fig11_wider_band_beats_taller_narrow_band():
    plate = fig11_plate()
    rows = project(sobel_vertical(plate), Axis.ROWS)
    assert bands_as_tuples(find_bands(rows)) == [(2, 3, 16, 8), (6, 15, 60, 6)]
    assert select_character_band(plate) == Band(6, 15, 60, 6)
    stripped = strip_noise_rows(plate)
    assert stripped.height == 10 and stripped.bits.sum() == 30


def test_strip_single_band_is_those_rows():
    bits = np.zeros((12, 20), np.uint8)
    bits[3:9, 5] = 1
    bits[3:9, 12] = 1
    out = strip_noise_rows(ink(bits))
    assert out == crop(ink(bits), BoundingBox(0, 3, 20, 6))


def test_strip_empty_plate_raises():
    with pytest.raises(EmptyPlateError):
        strip_noise_rows(ink(np.zeros((10, 10))))


def test_strip_removes_bolt_holes(atlas):
    spec = SceneSpec(
        symbols=tuple("ZG1234"),
        plate_box=BoundingBox(200, 300, 200, 48),
        clutter=0.0,
        noise_sigma=0.0,
        bolts=True,
    )
    img, truth = render_scene(atlas, spec)
    bolts = [box for kind, box in truth.clutter if kind == "bolt"]
    assert len(bolts) == 2
    _, dilated = preprocess(img)
    plate = crop(dilated, truth.plate_box)
    band = select_character_band(plate)
    top = truth.plate_box.y + band.start
    bottom = truth.plate_box.y + band.end
    # every character row is kept and no bolt row is
    assert top <= min(c.box.y for c in truth.chars)
    assert bottom >= max(c.box.y2 - 1 for c in truth.chars)
    assert all(b.y2 + 1 < top for b in bolts)


def test_split_blank_plate():
    assert split_characters(ink(np.zeros((10, 30)))) == []


def test_split_two_blocks():
    bits = np.zeros((8, 16), np.uint8)
    bits[1:7, 2:6] = 1
    bits[2:8, 9:13] = 1
    boxes = split_characters(ink(bits))
    assert boxes == [BoundingBox(2, 1, 4, 6), BoundingBox(9, 2, 4, 6)]


def test_split_drops_thin_specks():
    bits = np.zeros((12, 16), np.uint8)
    bits[:, 3] = 1
    bits[1:11, 8:12] = 1
    assert split_characters(ink(bits)) == [BoundingBox(8, 1, 4, 10)]


def test_normalize_identity_and_constant():
    rng = np.random.default_rng(9)
    bits = (rng.random((20, 20)) < 0.5).astype(np.uint8)
    assert np.array_equal(normalize_glyph(ink(bits)).pixels, bits)
    assert normalize_glyph(ink(np.ones((7, 33)))).pixels.all()


def test_normalize_block_image_matches_reference():
    rng = np.random.default_rng(10)
    small = (rng.random((20, 20)) < 0.5).astype(np.uint8)
    big = np.kron(small, np.ones((2, 2), np.uint8))
    out = normalize_glyph(ink(big)).pixels
    assert to_lists(out) == normalize_ref(to_lists(big))
    assert np.array_equal(out, small)


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 60), st.integers(1, 60)), elements=st.integers(0, 1)))
def test_normalize_matches_reference(bits):
    out = normalize_glyph(ink(bits), label="A")
    assert out.label == "A"
    assert to_lists(out.pixels) == normalize_ref(to_lists(bits))
