import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from contactangle.ambient import hermitian_inner, inner, project, reeb, sphere_point

vec6 = arrays(np.float64, 6, elements=st.floats(-3, 3, allow_nan=False))


def _c(x):
    return x[0::2] + 1j * x[1::2]


def _sphere(x):
    z = _c(x)
    n = np.sqrt(inner(z, z))
    return z / n if n > 1e-3 else np.array([1, 0, 0], dtype=complex)


def test_hermitian_examples():
    assert hermitian_inner([1, 0, 0], [1, 0, 0]) == (1 + 0j, 1.0)
    h, r = hermitian_inner([1j, 0, 0], [1, 0, 0])
    assert h == 1j and r == 0
    s = 1 / np.sqrt(2)
    h, r = hermitian_inner([s, 1j * s, 0], [1j * s, 0, s])
    assert np.isclose(h, -0.5j) and np.isclose(r, 0.0)


def test_reeb_examples():
    np.testing.assert_allclose(reeb([1, 0, 0]), [1j, 0, 0])
    np.testing.assert_allclose(reeb([0, 1j, 0]), [0, -1, 0])
    z = np.ones(3) / np.sqrt(3)
    xi = reeb(z)
    np.testing.assert_allclose(xi, 1j * z)
    assert abs(inner(xi, z)) < 1e-15


def test_project_examples():
    z = np.array([0, 0.6, 0.8j])
    s = project(z, reeb(z))
    assert np.isclose(s.reeb_component, 1) and np.allclose(s.contact_component, 0)
    s = project(z, z)
    assert np.isclose(s.reeb_component, 0) and np.allclose(s.contact_component, 0)
    assert np.isclose(s.radial_component, 1)
    s = project(np.array([1, 0, 0]), np.array([0, 1, 0]))
    assert s.reeb_component == 0
    np.testing.assert_allclose(s.contact_component, [0, 1, 0])


def test_sphere_point_validation():
    sphere_point([1, 0, 0])
    with pytest.raises(ValueError):
        sphere_point([1.1, 0, 0])
    with pytest.raises(ValueError):
        sphere_point([np.nan, 0, 0])


@given(vec6, vec6)
@settings(max_examples=200, deadline=None)
def test_split_invariants(zr, ur):
    z, u = _sphere(zr), _c(ur)
    s = project(z, u)
    xi = reeb(z)
    recon = s.radial_component * z + s.reeb_component * xi + s.contact_component
    assert np.max(np.abs(recon - u)) < 1e-12
    assert abs(inner(s.contact_component, z)) < 1e-12
    assert abs(inner(s.contact_component, xi)) < 1e-12
    # the contact plane is complex: i * contact has no Reeb part
    assert abs(project(z, 1j * s.contact_component).reeb_component) < 1e-12


@given(vec6)
@settings(max_examples=100, deadline=None)
def test_reeb_unit_and_orthogonal(zr):
    z = _sphere(zr)
    xi = reeb(z)
    assert abs(inner(xi, xi) - 1) < 1e-12
    assert abs(inner(xi, z)) < 1e-12
