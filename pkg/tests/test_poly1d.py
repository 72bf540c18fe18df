import math
from fractions import Fraction

import numpy as np
import pytest

from henonlab.errors import CapError, ContractError
from henonlab.poly1d import (Poly, brolin_measure, exceptional_check,
                             julia_render_points, periodic_points_1d,
                             preimages, simultaneous_roots, solve_offset)

SQUARE = Poly((0.0, 0.0, 1.0))
BASILICA = Poly((-1.0, 0.0, 1.0))


def test_poly_contract():
    with pytest.raises(ContractError):
        Poly((1.0, 1.0))           # degree 1
    with pytest.raises(ContractError):
        Poly((1.0, 0.0, 2.0))      # not monic
    f = Poly((2.0, -1.0, 0.0, 1.0))
    assert f.degree == 3
    assert f(2.0) == pytest.approx(8 - 2 + 2)
    assert f.eval_deriv(2.0) == pytest.approx(12 - 1)
    assert f.lower_coeff_sum() == pytest.approx(3.0)


def test_iterate_coeffs_small_cases():
    c2 = SQUARE.iterate_coeffs(2)
    assert np.allclose(c2, [0, 0, 0, 0, 1])
    cb = BASILICA.iterate_coeffs(2)  # (z^2-1)^2 - 1 = z^4 - 2 z^2
    assert np.allclose(cb, [0, 0, -2, 0, 1])
    ev, dev = BASILICA.iter_eval(np.array([2.0 + 0j]), 2)
    assert abs(ev[0] - (2 ** 4 - 2 * 2 ** 2)) < 1e-12


def test_iterate_coeffs_cap():
    with pytest.raises(CapError):
        SQUARE.iterate_coeffs(13)  # 2^13 past the expansion cap


def test_simultaneous_roots_against_numpy():
    rng = np.random.default_rng(7)
    for deg in (2, 3, 4, 7, 11):
        for _ in range(10):
            c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
            c[-1] = 1.0
            mine = np.sort_complex(simultaneous_roots(c))
            ref = np.sort_complex(np.roots(c[::-1]))
            assert np.max(np.abs(mine - ref)) < 1e-7


def test_simultaneous_roots_resolves_interior_root():
    # z^64 - z: one root at the origin, the rest on the unit circle
    c = np.zeros(65, dtype=complex)
    c[1], c[-1] = -1.0, 1.0
    roots = simultaneous_roots(c)
    assert int(np.sum(np.abs(roots) < 0.5)) == 1
    assert np.max(np.abs(np.polyval(c[::-1], roots))) < 1e-10


def test_solve_offset_inverts():
    rng = np.random.default_rng(8)
    for f in (SQUARE, BASILICA, Poly((0.3, -0.2 + 0.1j, 0.0, 1.0))):
        ws = rng.normal(size=6) + 1j * rng.normal(size=6)
        roots = solve_offset(f, ws)
        assert roots.shape == (6, f.degree)
        err = np.abs(f(roots) - ws[:, None])
        assert float(err.max()) < 1e-8


def test_preimage_tree_full_shapes():
    tree = preimages(BASILICA, 1.0 + 0.2j, 5)
    assert [len(lv) for lv in tree.levels] == [1, 2, 4, 8, 16, 32]
    for k in range(1, 6):
        parents = BASILICA(tree.levels[k])
        # every child maps onto some entry of the previous level
        prev = tree.levels[k - 1]
        d = np.min(np.abs(parents[:, None] - prev[None, :]), axis=1)
        assert float(d.max()) < 1e-9
    assert tree.max_parent_residual(BASILICA) < 1e-9


def test_preimage_tree_sampled_shapes():
    tree = preimages(SQUARE, 2.0, 30, mode="sampled", k=64, rng_seed=3)
    assert all(len(lv) == 64 for lv in tree.levels[1:])
    t2 = preimages(SQUARE, 2.0, 30, mode="sampled", k=64, rng_seed=3)
    assert np.array_equal(tree.levels[-1], t2.levels[-1])


def test_preimage_cap():
    with pytest.raises(CapError):
        preimages(SQUARE, 1.0, 25)


def test_exceptional_points():
    assert exceptional_check(SQUARE, 0.0)        # backward orbit stays {0}
    assert not exceptional_check(SQUARE, 1.0)
    assert not exceptional_check(BASILICA, 0.0)
    assert not exceptional_check(Poly((-2.0, 0.0, 1.0)), 2.0)


def test_periodic_points_1d_square_map():
    reps, mult = periodic_points_1d(SQUARE, 2)
    assert int(mult.sum()) == 4
    got = np.sort_complex(np.repeat(reps, mult))
    want = np.sort_complex(np.roots([1, 0, 0, -1, 0]))  # z^4 - z
    assert np.max(np.abs(got - want)) < 1e-9


def test_brolin_measure_preimage_mode():
    mu = brolin_measure(SQUARE, "preimage", 10, c=1.0)
    assert len(mu) == 1024
    assert mu.total_mass() == Fraction(1)
    assert mu.complete
    assert np.max(np.abs(np.abs(mu.points) - 1.0)) < 1e-12
    with pytest.raises(ContractError):
        brolin_measure(SQUARE, "preimage", 5, c=0.0)  # exceptional base
    with pytest.raises(ContractError):
        brolin_measure(SQUARE, "preimage", 5)


def test_brolin_measure_periodic_mode():
    mu = brolin_measure(SQUARE, "periodic", 6)
    assert mu.complete
    assert mu.total_mass() == Fraction(1)
    with pytest.raises(ContractError):
        brolin_measure(SQUARE, "orbit", 4)


def test_julia_render_points_deterministic_and_on_circle():
    pts, lvls = julia_render_points(SQUARE, 2.0, walks=256, depth=45,
                                    burn_in=24, rng_seed=5)
    p2, l2 = julia_render_points(SQUARE, 2.0, walks=256, depth=45,
                                 burn_in=24, rng_seed=5)
    assert np.array_equal(pts, p2) and np.array_equal(lvls, l2)
    assert lvls.min() == 25 and lvls.max() == 45
    # backward contraction puts every retained level within 1e-6 of |z| = 1
    assert np.max(np.abs(np.abs(pts) - 1.0)) < 1e-6
    with pytest.raises(ContractError):
        julia_render_points(SQUARE, 0.0, walks=8, depth=10)
