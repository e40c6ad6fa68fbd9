import math

import numpy as np
import pytest
from scipy import integrate

from eqmeas.dynamics import ReferenceDomain
from eqmeas.measure import (DiscreteMeasure, MomentVector, capacity_from_energy, energy,
                            fekete_points, moment_distance, moments,
                            potential_at, potential_cderiv, read_measure_csv,
                            reference_equilibrium, support_scale, transfinite_diameter,
                            write_measure_csv)
from eqmeas.poly import Polynomial, poly_derivative
from eqmeas.roots import find_roots, root_measure


def unity(n, r=1.0):
    return DiscreteMeasure(r * np.exp(2j * np.pi * np.arange(n) / n))


# --- DiscreteMeasure ------------------------------------------------------------

def test_weights_must_sum_to_one():
    DiscreteMeasure([0, 1], [0.5, 0.5 + 5e-13])
    with pytest.raises(ValueError):
        DiscreteMeasure([0, 1], [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteMeasure([0, 1], [1.5, -0.5])


def test_rejects_non_finite_and_empty():
    with pytest.raises(ValueError):
        DiscreteMeasure([np.inf])
    with pytest.raises(ValueError):
        DiscreteMeasure([])


def test_measure_is_immutable():
    mu = unity(4)
    with pytest.raises(ValueError):
        mu.weights[0] = 1


def test_subsample_keeps_probability():
    mu = DiscreteMeasure(np.arange(10), np.arange(1, 11) / 55)
    s = mu.subsample(3)
    assert len(s) == 3 and math.isclose(math.fsum(s.weights), 1.0, abs_tol=1e-15)
    assert mu.subsample(100) is mu


def test_csv_round_trip(tmp_path):
    mu = DiscreteMeasure([0.1 + 0.3j, -2, 1e-9j], [0.25, 0.25, 0.5])
    write_measure_csv(mu, tmp_path / "m.csv")
    back = read_measure_csv(tmp_path / "m.csv")
    assert np.array_equal(back.points, mu.points) and np.array_equal(back.weights, mu.weights)


# --- potential -------------------------------------------------------------------

def test_potential_roots_of_unity_identity():
    # prod |z - zeta_j| = |z^n - 1|
    assert math.isclose(potential_at(unity(8), 2.0), math.log(255) / 8, rel_tol=1e-14)
    z = np.array([1.5j, -3 + 1j, 0.2])
    assert np.allclose(potential_at(unity(8), z), np.log(np.abs(z ** 8 - 1)) / 8, rtol=1e-13)


def test_potential_trivial_values():
    assert math.isclose(potential_at(DiscreteMeasure([0]), math.e), 1.0)
    assert abs(potential_at(unity(16), 0.0)) < 1e-15
    assert potential_at(DiscreteMeasure([1, 1j, -1, -1j]), 1j) == -np.inf


def test_cderiv_examples():
    assert potential_cderiv(DiscreteMeasure([0]), 2) == 0.5
    assert math.isclose(abs(potential_cderiv(unity(4), 2) - 8 / 15), 0, abs_tol=1e-15)
    with pytest.raises(ValueError):
        potential_cderiv(unity(4), 1)


def test_cderiv_is_log_derivative_of_root_polynomial():
    p = Polynomial([2, -1 + 1j, 0.5, 3, 1])
    mu = root_measure(find_roots(p))
    z = 1.7 - 0.4j
    expected = poly_derivative(p)(z) / p(z) / p.degree
    assert abs(potential_cderiv(mu, z) - expected) < 1e-12


# --- energy, capacity, diameters ------------------------------------------------------

@pytest.mark.parametrize("n", [2, 4, 7, 64])
def test_energy_roots_of_unity(n):
    assert math.isclose(energy(unity(n)), math.log(n) / n, rel_tol=1e-12, abs_tol=1e-15)


def test_energy_examples():
    assert energy(DiscreteMeasure([0, 1])) == 0
    assert energy(DiscreteMeasure([0, 0, 1])) == -np.inf
    with pytest.raises(ValueError):
        energy(DiscreteMeasure([1]))


def test_disk_reference_energy_correction():
    # n equispaced atoms on |z| = r: I = (1 - 1/n) log r + (log n)/n
    n = 8
    I = energy(reference_equilibrium(ReferenceDomain.disk(2), n))
    assert abs(I - ((1 - 1 / n) * math.log(2) + math.log(n) / n)) < 1e-12
    assert abs(I - math.log(n) / n - math.log(2)) < 0.1


def test_capacity_from_energy():
    assert capacity_from_energy(0) == 1
    assert math.isclose(capacity_from_energy(-math.log(2)), 0.5)
    assert math.isclose(capacity_from_energy(math.log(2)), 2)
    with pytest.raises(ValueError):
        capacity_from_energy(-np.inf)


def test_transfinite_diameter_examples():
    assert math.isclose(transfinite_diameter([1, -1]), 2)
    # Vandermonde of n-th roots of unity: prod_{i<j} |.|^2 = n^n
    assert math.isclose(transfinite_diameter(unity(3).points), math.sqrt(3), rel_tol=1e-13)
    assert math.isclose(transfinite_diameter(unity(8).points), 8 ** (1 / 7), rel_tol=1e-13)
    assert transfinite_diameter([1, 1, 2]) == 0


def test_fekete_examples():
    pts = fekete_points(ReferenceDomain.disk(1), 2)
    assert math.isclose(abs(pts[0] - pts[1]), 2, rel_tol=1e-12)
    pts = fekete_points(ReferenceDomain.disk(1), 4)
    assert abs(transfinite_diameter(pts) - 4 ** (1 / 3)) < 1e-3
    pts = fekete_points(ReferenceDomain.interval(-1, 1), 2)
    assert sorted(pts.real) == [-1, 1]
    with pytest.raises(ValueError):
        fekete_points(ReferenceDomain.disk(1), 10, boundary_resolution=5)


def test_fekete_diameter_decreases_towards_capacity():
    d = [transfinite_diameter(fekete_points(ReferenceDomain.disk(1), n, 720)) for n in range(2, 10)]
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))
    assert min(d) >= 1


def test_fekete_on_interval_matches_its_capacity_scale():
    # Fekete points of [-1, 1] are the zeros of (1 - x^2) P'_{n-1}; diameter -> 1/2
    pts = fekete_points(ReferenceDomain.interval(-1, 1), 6, 4096)
    x = np.sort(pts.real)
    leg = np.polynomial.legendre.Legendre.basis(5).deriv().roots()
    assert np.allclose(x, np.concatenate([[-1], np.sort(leg), [1]]), atol=2e-3)


# --- moments ------------------------------------------------------------------------

def test_moment_examples():
    assert abs(moments(unity(4))[1, 0]) < 1e-15
    assert math.isclose(moments(unity(32, 1.7))[1, 1].real, 1.7 ** 2, rel_tol=1e-14)
    oracle, _ = integrate.quad(lambda x: x * x / (np.pi * np.sqrt(1 - x * x)), -1, 1)
    mu = reference_equilibrium(ReferenceDomain.interval(), 64)
    assert abs(moments(mu)[2, 0] - oracle) < 1e-12


def test_moment_vector_structure():
    rng = np.random.default_rng(5)
    mu = DiscreteMeasure(rng.normal(size=40) + 1j * rng.normal(size=40))
    mv = moments(mu, 6)
    assert mv[0, 0] == 1
    for a, b in mv.indices():
        assert mv[a, b] == mv[b, a].conjugate()
    with pytest.raises(KeyError):
        mv[4, 3]
    assert MomentVector.from_dict(mv.to_dict()).entries.tolist() == mv.entries.tolist()
    with pytest.raises(ValueError):
        moments(mu, 0)


def test_moment_distance_examples():
    mu = unity(64)
    assert moment_distance(mu, mu) == 0
    assert moment_distance(DiscreteMeasure([0]), DiscreteMeasure([1]), 1) == 1
    assert moment_distance(unity(64), unity(128)) < 1e-14
    with pytest.raises(ValueError):
        moment_distance(DiscreteMeasure([5]), mu)


def test_support_scale():
    assert support_scale([unity(3, 3.9)]) == 1
    assert support_scale([unity(3, 9), unity(2)]) == 0.25


def test_reference_equilibrium():
    mu = reference_equilibrium(ReferenceDomain.disk(1), 4)
    assert np.allclose(mu.points, [1, 1j, -1, -1j], atol=1e-15)
    assert np.all(mu.weights == 0.25)
    m2 = [moments(reference_equilibrium(ReferenceDomain.interval(), n), 2)[2, 0].real for n in (1, 2, 8)]
    assert m2[0] == pytest.approx(0.0, abs=1e-15) and m2[1] == pytest.approx(0.5) and m2[2] == pytest.approx(0.5)
    mu = reference_equilibrium(ReferenceDomain.interval(0, 4), 16)
    assert mu.points.real.min() > 0 and mu.points.real.max() < 4
    with pytest.raises(ValueError, match="brolin_sample|pullback"):
        reference_equilibrium(ReferenceDomain.filled_julia(Polynomial([-1, 0, 1])), 8)
