import numpy as np
import pytest

from osmosis import DiffusivityParams, Image, edge_g, pointwise_g
from osmosis.grid import DIRECTIONS

from oracles import pointwise_g_loops, random_positive


def test_params_validation():
    with pytest.raises(ValueError):
        DiffusivityParams(epsilon=0.0)
    with pytest.raises(ValueError):
        DiffusivityParams(p=2.0)
    with pytest.raises(ValueError):
        DiffusivityParams(p=0.5)
    with pytest.raises(ValueError):
        DiffusivityParams(mode="quadratic")


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("p", [1.0, 1.5, 1.9])
def test_state_proportional_to_reference_saturates_g(rng, c, p):
    v = Image.from_grid(random_positive(rng, 5, 4))
    u = v.with_values(c * v.values)
    params = DiffusivityParams(epsilon=1e-7, p=p)
    field = pointwise_g(u, v, params)
    np.testing.assert_allclose(field.g, params.g_max, rtol=1e-12)


def test_saturation_value_at_default_epsilon(rng):
    v = Image.from_grid(random_positive(rng, 4, 4))
    field = pointwise_g(v, v, DiffusivityParams())
    assert field.g[0] == pytest.approx(3162.2776601683795, rel=1e-9)


def test_linear_mode_forces_unity(rng):
    v = Image.from_grid(random_positive(rng, 4, 4))
    u = Image.from_grid(random_positive(rng, 4, 4))
    field = pointwise_g(u, v, DiffusivityParams(mode="linear"))
    assert np.all(field.g == 1.0)
    assert np.all(field.edges == 1.0)


@pytest.mark.parametrize("p", [1.0, 1.7])
def test_unit_step_value(p):
    # constant reference, unit step between rows 1 and 2: on either side of
    # the step the centred difference is 1/2, so g = (1/4 + eps)^(-p/2)
    eps = 1e-7
    u2 = np.zeros((4, 4))
    u2[2:, :] = 1.0
    u = Image.from_grid(u2)
    v = Image.from_grid(np.ones((4, 4)))
    field = pointwise_g(u, v, DiffusivityParams(epsilon=eps, p=p))
    k = u.grid.flat_index(1, 1)
    assert field.g[k] == pytest.approx((0.25 + eps) ** (-p / 2.0), rel=1e-13)


def test_matches_loop_oracle(rng):
    u2 = random_positive(rng, 5, 4)
    v2 = random_positive(rng, 5, 4)
    params = DiffusivityParams(epsilon=1e-6, p=1.4)
    field = pointwise_g(Image.from_grid(u2), Image.from_grid(v2), params)
    expected = pointwise_g_loops(u2, v2, 1.0, params.epsilon, params.p)
    np.testing.assert_allclose(field.g, expected.reshape(-1), rtol=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.5, 1.9])
def test_g_bounds(rng, p):
    params = DiffusivityParams(p=p)
    u = Image.from_grid(random_positive(rng, 6, 6, lo=0.1, hi=5.0))
    v = Image.from_grid(random_positive(rng, 6, 6))
    field = pointwise_g(u, v, params)
    assert np.all(field.g > 0.0)
    assert np.all(field.g <= params.g_max * (1 + 1e-12))
    assert np.all(field.edges > 0.0)


def test_g_monotone_in_gradient_magnitude():
    # steeper ramps produce smaller g at the centre pixel
    v = Image.from_grid(np.ones((5, 5)))
    ramp = np.linspace(0.0, 1.0, 5)[:, None] * np.ones((1, 5))
    values = []
    for alpha in (0.1, 1.0, 10.0):
        u = Image.from_grid(alpha * ramp)
        field = pointwise_g(u, v, DiffusivityParams())
        values.append(field.g[u.grid.flat_index(2, 2)])
    assert values[0] > values[1] > values[2]


def test_edge_averages_shared_bitwise(rng):
    u = Image.from_grid(random_positive(rng, 5, 5))
    v = Image.from_grid(random_positive(rng, 5, 5))
    field = pointwise_g(u, v, DiffusivityParams())
    g = u.grid
    opposite = {"N": "S", "S": "N", "E": "W", "W": "E"}
    for k in range(g.n_pixels):
        for i, d in enumerate(DIRECTIONS):
            nk, boundary = g.neighbor(k, d)
            if boundary:
                continue
            j = DIRECTIONS.index(opposite[d])
            assert field.edges[i][k] == field.edges[j][nk]


def test_edge_g_values(rng):
    g2 = np.array([[2.0, 2.0], [4.0, 4.0]])
    # force exact g by using linear mode then reading mean structure via a
    # hand-built field instead
    from osmosis.diffusivity import DiffusivityField, _edge_averages

    img = Image.from_grid(g2)
    field = DiffusivityField(img.grid, g2.reshape(-1), _edge_averages(g2))
    k00 = img.grid.flat_index(0, 0)
    assert edge_g(field, k00, "N") == 3.0  # mean of 2 and 4
    assert edge_g(field, k00, "S") == 2.0  # boundary mirror: own value
    uniform = DiffusivityField(img.grid, np.full(4, 5.0), _edge_averages(np.full((2, 2), 5.0)))
    assert all(edge_g(uniform, k, d) == 5.0 for k in range(4) for d in DIRECTIONS)


def test_grid_mismatch_rejected(rng):
    u = Image.from_grid(random_positive(rng, 4, 4))
    v = Image.from_grid(random_positive(rng, 3, 3))
    with pytest.raises(ValueError):
        pointwise_g(u, v, DiffusivityParams())
