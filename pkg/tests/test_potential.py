import math

import numpy as np
import pytest

from henonlab.dynamics import MapParams, PointC2, henon_apply
from henonlab.errors import ContractError
from henonlab.poly1d import Poly
from henonlab.potential import (ScalarGrid, discrete_ddc_mass, green_minus,
                                green_plus, green_plus_field, green_poly,
                                green_poly_field, mass_in_disk, mass_total,
                                potential_kernel, subaverage_check)

SQUARE = Poly((0.0, 0.0, 1.0))
CHEB = Poly((-2.0, 0.0, 1.0))
BASILICA = Poly((-1.0, 0.0, 1.0))


def test_potential_kernel_values():
    assert potential_kernel(-2.5, 1) == pytest.approx(2.5)
    assert potential_kernel(0.0j, 2) == -math.inf
    assert potential_kernel(complex(math.e ** 2, 0.0), 2) == pytest.approx(2.0)
    assert potential_kernel(np.array([2.0, 0.0, 0.0]), 3) == pytest.approx(-0.5)
    with pytest.raises(ContractError):
        potential_kernel(1.0 + 1.0j, 1)
    with pytest.raises(ContractError):
        potential_kernel(np.array([1.0, 0.0, 0.0]), 2)


def test_green_square_map_is_exact():
    rng = np.random.default_rng(4)
    for z in rng.normal(scale=2.0, size=50) + 1j * rng.normal(scale=2.0, size=50):
        g = green_poly(z, SQUARE)
        assert g.converged
        assert abs(g.value - max(math.log(abs(z)), 0.0)) < 1e-12
    inside = green_poly(0.4 + 0.2j, SQUARE)
    assert inside.presumed_bounded and inside.value == 0.0 and inside.bound == 0.0


def test_green_conjugacy_oracle():
    # z = w + 1/w conjugates z^2 - 2 to w^2, so G(3) = log((3 + sqrt 5)/2)
    g = green_poly(3.0, CHEB, tol=1e-12)
    assert g.converged
    assert abs(g.value - math.log((3.0 + math.sqrt(5.0)) / 2.0)) < 1e-12


def test_green_poly_functional_equation():
    rng = np.random.default_rng(9)
    zs = rng.normal(scale=1.8, size=300) + 1j * rng.normal(scale=1.8, size=300)
    for z in zs:
        g = green_poly(z, BASILICA, tol=1e-11)
        if not g.converged or g.value <= 0.0:
            continue
        g2 = green_poly(BASILICA(z), BASILICA, tol=1e-11)
        assert abs(g2.value - 2.0 * g.value) < 1e-9


def test_green_poly_field_matches_scalar():
    rng = np.random.default_rng(10)
    zs = rng.normal(scale=2.0, size=64) + 1j * rng.normal(scale=2.0, size=64)
    fld = green_poly_field(zs, BASILICA)
    for i, z in enumerate(zs):
        g = green_poly(complex(z), BASILICA)
        assert fld.values[i] == pytest.approx(g.value, abs=1e-14)
        assert bool(fld.converged[i]) == g.converged
        assert fld.n_used[i] == g.n_used


def test_green_plus_functional_equation(horseshoe):
    rng = np.random.default_rng(12)
    checked = 0
    for _ in range(400):
        r = rng.uniform(-2 * horseshoe.R, 2 * horseshoe.R, size=4)
        p = PointC2(complex(r[0], r[1]), complex(r[2], r[3]))
        g = green_plus(p, horseshoe)
        if not g.converged or g.value <= 0.0:
            continue
        g2 = green_plus(henon_apply(p, horseshoe), horseshoe)
        assert abs(g2.value - 2.0 * g.value) < 1e-6
        checked += 1
    assert checked > 100


def test_green_minus_functional_equation(horseshoe):
    from henonlab.dynamics import henon_inverse
    rng = np.random.default_rng(13)
    checked = 0
    for _ in range(400):
        r = rng.uniform(-2 * horseshoe.R, 2 * horseshoe.R, size=4)
        p = PointC2(complex(r[0], r[1]), complex(r[2], r[3]))
        g = green_minus(p, horseshoe)
        if not g.converged or g.value <= 0.0:
            continue
        g2 = green_minus(henon_inverse(p, horseshoe), horseshoe)
        assert abs(g2.value - 2.0 * g.value) < 1e-6
        checked += 1
    assert checked > 100


def test_green_plus_bounded_orbit_is_presumed():
    # a sink's basin is numerically robust; a saddle would drift off after
    # ~20 steps of amplified rounding and read as a tiny positive value
    m = MapParams(0.1, 0.3)
    x = (-1.3 + math.sqrt(1.3 ** 2 + 0.4)) / 2.0
    g = green_plus(PointC2(x, x), m)
    assert g.presumed_bounded and g.value == 0.0 and g.converged


def test_green_plus_untriggered_overflow_not_presumed(horseshoe):
    g = green_plus(PointC2(1.0, 1e200), horseshoe)
    assert not g.converged
    assert not g.presumed_bounded
    assert g.bound == math.inf


def test_green_field_against_scalar_henon(horseshoe):
    rng = np.random.default_rng(14)
    xs = rng.normal(scale=6.0, size=40) + 1j * rng.normal(scale=6.0, size=40)
    ys = rng.normal(scale=6.0, size=40) + 1j * rng.normal(scale=6.0, size=40)
    fld = green_plus_field(xs, ys, horseshoe)
    for i in range(40):
        g = green_plus(PointC2(complex(xs[i]), complex(ys[i])), horseshoe)
        assert fld.values[i] == pytest.approx(g.value, abs=1e-13)
        assert bool(fld.presumed_bounded[i]) == g.presumed_bounded


def test_scalar_grid_round_trip(tmp_path):
    g = ScalarGrid.over_window(lambda z: z.real + 2.0 * z.imag,
                               -1.0, 1.0, -0.5, 0.5, 0.125)
    blob = g.to_bytes()
    g2 = ScalarGrid.from_bytes(blob)
    assert g2.origin == g.origin and g2.spacing == g.spacing
    assert np.array_equal(g2.values, g.values)
    path = tmp_path / "field.grid"
    g.save(path)
    g3 = ScalarGrid.load(path)
    assert np.array_equal(g3.values, g.values)
    with pytest.raises(ContractError):
        ScalarGrid.from_bytes(blob[:17])


def test_scalar_grid_window_avoids_origin():
    g = ScalarGrid.over_window(lambda z: np.log(np.abs(z)),
                               -1.0, 1.0, -1.0, 1.0, 0.01)
    assert np.all(np.isfinite(g.values))
    assert g.width == 200 and g.height == 200


def test_scalar_grid_interpolation():
    g = ScalarGrid.sample(lambda z: 3.0 * z.real - z.imag, 0.0, 0.5, 5, 5)
    # bilinear interpolation is exact on affine functions
    assert g.interpolate(0.8 + 1.1j) == pytest.approx(3 * 0.8 - 1.1)
    with pytest.raises(ContractError):
        g.interpolate(3.0 + 0.0j)


def test_ddc_mass_log_kernel():
    g = ScalarGrid.over_window(lambda z: np.log(np.abs(z)),
                               -1.0, 1.0, -1.0, 1.0, 0.01)
    mass = discrete_ddc_mass(g)
    inside = mass_in_disk(mass, 0.0, 0.5)
    assert abs(inside - 1.0) < 0.01
    assert abs(mass_total(mass) - 1.0) < 0.02


def test_ddc_mass_harmonic_function_vanishes():
    g = ScalarGrid.over_window(lambda z: (z * z).real, -1.0, 1.0, -1.0, 1.0,
                               0.05)
    mass = discrete_ddc_mass(g)
    assert abs(mass_total(mass)) < 1e-9


def test_ddc_degenerate_grid_rejected():
    g = ScalarGrid(0.0, 1.0, np.full((3, 3), -np.inf))
    with pytest.raises(ContractError):
        discrete_ddc_mass(g)


def test_subaverage_check_log_kernel():
    fn = lambda z: float(np.log(abs(z))) if z != 0 else -math.inf
    res = subaverage_check(fn, 0.0, 1.0)
    assert res.passed  # mean over the circle is 0, center value is -inf
    res2 = subaverage_check(fn, 1.5 + 0.5j, 0.3)
    assert res2.passed and abs(res2.deficit) < 1e-6  # harmonic off the origin
    with pytest.raises(ContractError):
        subaverage_check(fn, 0.0, 1.0, n_samples=4)


def test_subaverage_check_flags_superharmonic():
    # circle mean of -|z|^2 is -(|c|^2 + r^2), strictly below the center value
    anti = lambda z: -abs(z) ** 2
    res = subaverage_check(anti, 1.0 + 0.0j, 0.5)
    assert not res.passed
    assert abs(res.deficit + 0.25) < 1e-9
