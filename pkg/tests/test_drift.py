import numpy as np
import pytest

from osmosis import (
    DIRECTIONS,
    Image,
    Mask,
    canonical_drift,
    cdr_drift,
    read_drift_dump,
    shadow_drift,
    write_drift_dump,
)

# Component stored at a pixel pairs with the component of the SAME edge
# stored at the neighbour in that direction.
OPPOSITE = {"N": "S", "S": "N", "E": "W", "W": "E"}


def random_image(rng, rows=5, cols=4, lo=0.5, hi=2.0):
    return Image.from_grid(rng.uniform(lo, hi, size=(rows, cols)))


def test_constant_reference_gives_zero_drift():
    field = canonical_drift(Image.from_grid(np.full((4, 4), 7.0)))
    assert np.all(field.components == 0.0)


def test_table_value_horizontal_edge():
    # adjacent values 1 and 3, h = 1: dE = 2 (3 - 1) / (1 * (3 + 1)) = 1
    v = Image.from_grid(np.array([[1.0, 3.0], [1.0, 3.0]]))
    field = canonical_drift(v)
    k = v.grid.flat_index(0, 0)
    assert field.dE[k] == pytest.approx(1.0, abs=0)
    # swapping the two values flips the sign
    v_swapped = Image.from_grid(np.array([[3.0, 1.0], [3.0, 1.0]]))
    assert canonical_drift(v_swapped).dE[k] == pytest.approx(-1.0, abs=0)


def test_rejects_nonpositive_reference():
    with pytest.raises(ValueError):
        canonical_drift(Image.from_grid(np.array([[1.0, 0.0], [1.0, 1.0]])))


def test_antisymmetry_is_exact(rng):
    v = random_image(rng)
    field = canonical_drift(v)
    g = v.grid
    for k in range(g.n_pixels):
        for d in DIRECTIONS:
            nk, boundary = g.neighbor(k, d)
            if boundary:
                continue
            a = field.component(d)[k]
            b = field.component(OPPOSITE[d])[nk]
            assert a == -b  # bit-exact, the formula is antisymmetric


def test_boundary_edges_zero_and_flagged(rng):
    v = random_image(rng, 3, 3)
    field = canonical_drift(v)
    g = v.grid
    for k in range(g.n_pixels):
        for i, d in enumerate(DIRECTIONS):
            _, boundary = g.neighbor(k, d)
            if boundary:
                assert field.components[i][k] == 0.0
                assert field.suppressed[i][k]


def test_scaling_invariance(rng):
    v = random_image(rng)
    base = canonical_drift(v)
    doubled = canonical_drift(v.with_values(2.0 * v.values))
    assert np.array_equal(base.components, doubled.components)
    scaled = canonical_drift(v.with_values(3.7 * v.values))
    np.testing.assert_allclose(scaled.components, base.components, rtol=1e-14, atol=1e-16)


def test_shadow_drift_empty_mask_is_canonical(rng):
    v = random_image(rng)
    out = shadow_drift(v, Mask.empty(v.grid))
    assert np.array_equal(out.components, canonical_drift(v).components)


def test_shadow_drift_full_mask_kills_everything(rng):
    v = random_image(rng)
    out = shadow_drift(v, Mask.full(v.grid))
    assert np.all(out.components == 0.0)
    assert np.all(out.suppressed)


def test_shadow_drift_single_pixel_zeroes_its_four_edges(rng):
    v = random_image(rng, 3, 3)
    base = canonical_drift(v)
    mask = np.zeros((3, 3), dtype=bool)
    mask[1, 1] = True
    out = shadow_drift(v, Mask.from_grid(mask))
    g = v.grid
    center = g.flat_index(1, 1)
    killed_edges = set()
    for k in range(g.n_pixels):
        for i, d in enumerate(DIRECTIONS):
            nk, boundary = g.neighbor(k, d)
            if boundary:
                continue
            if out.components[i][k] != base.components[i][k]:
                assert out.components[i][k] == 0.0
                killed_edges.add(frozenset((k, nk)))
                assert center in (k, nk)
    assert len(killed_edges) == 4


def test_cdr_drift_full_mask_is_canonical(rng):
    v = random_image(rng)
    out = cdr_drift(v, Mask.full(v.grid))
    assert np.array_equal(out.components, canonical_drift(v).components)


def test_cdr_drift_empty_mask_is_zero(rng):
    v = random_image(rng)
    out = cdr_drift(v, Mask.empty(v.grid))
    assert np.all(out.components == 0.0)


def test_cdr_drift_keeps_only_interior_edge(rng):
    v = random_image(rng, 3, 3)
    mask = np.zeros((3, 3), dtype=bool)
    mask[1, 0] = mask[1, 1] = True  # two horizontally adjacent pixels
    out = cdr_drift(v, Mask.from_grid(mask))
    g = v.grid
    a, b = g.flat_index(1, 0), g.flat_index(1, 1)
    for k in range(g.n_pixels):
        for i, d in enumerate(DIRECTIONS):
            nk, boundary = g.neighbor(k, d)
            val = out.components[i][k]
            if not boundary and {k, nk} == {a, b}:
                assert d in ("E", "W")
                assert val != 0.0
            else:
                assert val == 0.0


def test_shadow_and_cdr_partition_edges(rng):
    v = random_image(rng, 4, 4)
    mask_arr = rng.uniform(size=(4, 4)) < 0.4
    mask = Mask.from_grid(mask_arr)
    sh = shadow_drift(v, mask)
    cd = cdr_drift(v, mask)
    # an edge carries drift in at most one of the two fields
    assert np.all((sh.components == 0.0) | (cd.components == 0.0))


def test_grid_mismatch_rejected(rng):
    v = random_image(rng, 4, 4)
    with pytest.raises(ValueError):
        shadow_drift(v, Mask.empty(Image.from_grid(np.ones((3, 3))).grid))
    with pytest.raises(ValueError):
        cdr_drift(v, Mask.empty(Image.from_grid(np.ones((3, 3))).grid))


def test_dump_roundtrip(tmp_path, rng):
    v = random_image(rng, 3, 5)
    field = canonical_drift(v)
    path = tmp_path / "drift.bin"
    write_drift_dump(field, path)
    raw = path.read_bytes()
    assert len(raw) == 16 + 4 * 15 * 8
    rows, cols, comps = read_drift_dump(path)
    assert (rows, cols) == (3, 5)
    assert np.array_equal(comps, field.components)
