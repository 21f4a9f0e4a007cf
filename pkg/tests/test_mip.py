import numpy as np
import pytest

from gazebench.volume import Modality, ScalarVolume, mip_stack


def pet(data, spacing=(1, 1, 1)):
    return ScalarVolume(np.asarray(data, dtype=np.float32), spacing, Modality.PET_SUV)


def rotate90_oracle(data, quarter_turns):
    """Exact grid rotation about the in-plane center for square planes."""
    out = data
    for _ in range(quarter_turns % 4):
        # out[x, y] = in[y, nx-1-x] (the bilinear path's 90-degree mapping)
        out = out[:, ::-1, :].transpose(1, 0, 2)
    return out


def test_identity_angle_equals_direct_max():
    rng = np.random.default_rng(1)
    vol = pet(rng.uniform(0, 8, size=(16, 16, 4)))
    stack = mip_stack(vol)
    expected = vol.data.max(axis=1).T[::-1, :]
    assert np.array_equal(stack.projections[0], expected)


@pytest.mark.parametrize("angle_idx,quarter_turns", [(3, 1), (6, 2), (9, 3)])
def test_quarter_turn_angles_match_axis_permutation(angle_idx, quarter_turns):
    rng = np.random.default_rng(2)
    vol = pet(rng.uniform(0, 8, size=(16, 16, 4)))
    stack = mip_stack(vol)
    expected = rotate90_oracle(vol.data, quarter_turns).max(axis=1).T[::-1, :]
    assert np.allclose(stack.projections[angle_idx], expected, atol=1e-6)


def test_single_voxel_on_axis_survives_all_angles():
    data = np.zeros((17, 17, 5), dtype=np.float32)
    data[8, 8, 2] = 7.3  # on the rotation axis; every azimuth sees it exactly
    stack = mip_stack(pet(data))
    for proj in stack.projections:
        assert proj.max() == pytest.approx(float(np.float32(7.3)), abs=1e-9)


def test_global_max_conservation_and_bound():
    rng = np.random.default_rng(3)
    for trial in range(20):
        shape = tuple(int(d) for d in rng.integers(3, 14, size=3))
        vol = pet(rng.uniform(0, 100, size=shape))
        stack = mip_stack(vol)
        vmax = float(vol.data.max())
        assert stack.global_max == vmax
        for proj in stack.projections:
            assert proj.max() <= vmax + 1e-12


def test_aspect_correction_row_count():
    vol = pet(np.ones((8, 8, 10)), spacing=(1.0, 1.0, 3.0))
    stack = mip_stack(vol)
    assert all(p.shape == (30, 8) for p in stack.projections)
    assert stack.global_max == 1.0


def test_aspect_downscale_keeps_max():
    data = np.zeros((6, 6, 9), dtype=np.float32)
    data[3, 2, 5] = 4.2
    vol = pet(data, spacing=(2.0, 2.0, 1.0))  # sz/sx = 0.5 -> fewer rows
    stack = mip_stack(vol)
    assert stack.projections[0].shape[0] < 9
    assert stack.global_max == pytest.approx(4.2)


def test_requires_pet():
    vol = ScalarVolume(np.ones((4, 4, 2), dtype=np.float32), (1, 1, 1), Modality.CT)
    with pytest.raises(ValueError):
        mip_stack(vol)


def test_twelve_angles():
    stack = mip_stack(pet(np.ones((4, 4, 2))))
    assert len(stack.projections) == 12
    assert stack.angles_deg == tuple(range(0, 360, 30))
