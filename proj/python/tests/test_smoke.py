import math

import numpy as np
import pytest

import _beablelab as bl


def test_lattice_and_derivative():
    lat = bl.make_lattice(16, 2 * math.pi)
    assert lat.n_points == 16
    q = np.array(lat.points)
    d = bl.spectral_derivative(lat, np.sin(q).astype(complex))
    assert np.max(np.abs(d - np.cos(q))) < 1e-12
    total = bl.quadrature(lat, np.ones(16, dtype=complex))
    assert abs(total - 2 * math.pi) < 1e-13


def test_lattice_rejects_odd():
    with pytest.raises(bl.BlabError):
        bl.make_lattice(7, 2 * math.pi)


def test_rotor_spectrum_is_integers():
    lat = bl.make_lattice(8, 2 * math.pi)
    field = bl.catalog_field("uniform", {"omega": 1.0})
    h = bl.build_hamiltonian(field, lat, "weyl")
    assert h.hermitian
    s = bl.spectrum(h)
    vals = sorted(np.real(np.array(s.values)))
    assert np.allclose(vals, np.arange(-4, 4), atol=1e-10)


def test_flow_map_semigroup():
    field = bl.catalog_field("shifted_sine", {"a": 1.5, "b": 1.0})
    one = bl.flow_map(field, 0.0, 0.6, 1e-3, 2 * math.pi)
    two = bl.flow_map(field, bl.flow_map(field, 0.0, 0.3, 1e-3, 2 * math.pi),
                      0.3, 1e-3, 2 * math.pi)
    assert abs(one - two) < 1e-9


def test_splitting_and_subspace():
    lat = bl.make_lattice(8, 2 * math.pi)
    field = bl.catalog_field("uniform", {"omega": 1.0})
    h = bl.build_hamiltonian(field, lat, "weyl")
    pair = bl.split_hamiltonian(h, 2.0, field, lat)
    res = bl.validate_split(pair)
    assert res.difference < 1e-10
    c = bl.build_constraint(pair, 0.01, 1.0)
    sub = bl.physical_subspace(c, 1e-8)
    assert sub.dimension == 1


def test_born_check_rotor():
    field = bl.catalog_field("uniform", {"omega": 1.0})
    times = [0.0, math.pi / 2, math.pi]
    rep = bl.born_check(field, 32, 32, 8.0, "one_plus_eiq", "unit_box",
                        times, 1e-6)
    assert rep.passed
    assert max(rep.max_deviation) < 1e-8


def test_transport_kernel_permutation():
    lat = bl.make_lattice(16, 2 * math.pi)
    field = bl.catalog_field("uniform", {"omega": 1.0})
    k = bl.build_transport_kernel(field, lat, lat.spacing, "nearest")
    rho = np.zeros(16)
    rho[3] = 1.0
    out = k.apply(rho)
    assert out[4] == 1.0


def test_ensemble_deterministic():
    lat = bl.make_lattice(32, 2 * math.pi)
    field = bl.catalog_field("uniform", {"omega": 1.0})
    rho0 = np.full(32, 1.0 / (2 * math.pi))
    a = bl.ensemble_sample(field, lat, rho0, 2000, 1.0, 11, 1e-2, 1)
    b = bl.ensemble_sample(field, lat, rho0, 2000, 1.0, 11, 1e-2, 4)
    assert np.array_equal(np.array(a), np.array(b))


def test_custom_field_closure():
    field = bl.custom_field("half", lambda q: 0.5, lambda q: 0.0)
    assert abs(bl.flow_map(field, 0.0, 1.0, 1e-3, 2 * math.pi) - 0.5) < 1e-10
