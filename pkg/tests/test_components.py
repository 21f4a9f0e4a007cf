import numpy as np
import pytest
from helpers import flood_fill_components, library_component_sets, make_blob_slice

from gazebench.proposal import nearest_candidate, threshold_components


def test_empty_slice_gives_no_components():
    plane = np.zeros((16, 16), dtype=np.float32)
    assert threshold_components(plane, 1.0) == []


def test_diagonal_pixels_are_one_component():
    plane = np.zeros((8, 8), dtype=np.float32)
    plane[3, 3] = 5.0
    plane[4, 4] = 5.0
    comps = threshold_components(plane, 1.0)
    assert len(comps) == 1
    assert comps[0].component_pixel_count == 2
    assert (comps[0].box.x, comps[0].box.y, comps[0].box.w, comps[0].box.h) == (3, 3, 2, 2)


def test_matches_flood_fill_oracle_on_random_masks():
    rng = np.random.default_rng(0)
    for _ in range(100):
        mask = rng.random((64, 64)) < 0.35
        plane = mask.astype(np.float32) * 2.0
        expected = {pixels: box for pixels, box in flood_fill_components(mask)}
        got = {pixels: box for pixels, box in library_component_sets(plane, 1.0)}
        assert got == expected


def test_boxes_are_tight_and_supra_threshold():
    rng = np.random.default_rng(5)
    plane = (rng.random((32, 32)) < 0.3).astype(np.float32) * 3.5
    comps = threshold_components(plane, 2.0)
    for cand in comps:
        b = cand.box
        region = plane[b.x : b.x + b.w, b.y : b.y + b.h]
        mask = region >= 2.0
        # tightness: every edge row/column touches a component pixel
        assert mask[0, :].any() and mask[-1, :].any()
        assert mask[:, 0].any() and mask[:, -1].any()
        assert cand.component_pixel_count >= 1


def test_ordering_by_min_y_then_min_x():
    plane = make_blob_slice((32, 32), [(20, 2, 3, 3, 5.0), (2, 10, 3, 3, 5.0), (10, 10, 3, 3, 5.0)])
    comps = threshold_components(plane, 1.0)
    keys = [(c.box.y, c.box.x) for c in comps]
    assert keys == sorted(keys)
    assert keys[0] == (2, 20)


def test_affine_rescale_invariance():
    rng = np.random.default_rng(7)
    plane = rng.uniform(0, 10, size=(24, 24)).astype(np.float32)
    base = threshold_components(plane, 4.0)
    scaled = threshold_components(plane * 3.0 + 5.0, 4.0 * 3.0 + 5.0)
    assert [(c.box, c.component_pixel_count) for c in base] == [
        (c.box, c.component_pixel_count) for c in scaled
    ]


def test_threshold_monotonic_nesting():
    rng = np.random.default_rng(9)
    plane = rng.uniform(0, 10, size=(24, 24)).astype(np.float32)
    low = library_component_sets(plane, 3.0)
    high = library_component_sets(plane, 6.0)
    for pixels_high, _ in high:
        assert any(pixels_high <= pixels_low for pixels_low, _ in low)


def test_threshold_must_be_positive():
    with pytest.raises(ValueError):
        threshold_components(np.zeros((4, 4)), 0.0)


def test_nearest_candidate_tie_breaks_by_area():
    plane = make_blob_slice((64, 64), [(10, 10, 6, 6, 5.0), (10, 30, 2, 2, 5.0)])
    comps = threshold_components(plane, 1.0)
    # gaze equidistant from both boxes: small one wins
    pick = nearest_candidate(comps, (11.0, 22.5))
    assert pick.box.area == 4
