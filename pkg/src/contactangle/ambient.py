"""Exact algebra of C^3 = R^6, the unit 5-sphere and its contact splitting.

Vectors are complex arrays with a trailing axis of length 3.  Every function
also accepts :class:`~contactangle.taylor.Taylor` fields, which is how the
frame pipeline differentiates through them.
"""

from dataclasses import dataclass

import numpy as np

from .taylor import Taylor

SPHERE_TOL = 1e-12


def _vec(z):
    if isinstance(z, Taylor):
        return z
    z = np.asarray(z, dtype=complex)
    if z.shape[-1:] != (3,):
        raise ValueError(f"expected a trailing axis of length 3, got shape {z.shape}")
    return z


def hermitian(z, w):
    """Hermitian product sum_j z^j conj(w^j)."""
    return (_vec(z) * _vec(w).conj()).sum(axis=-1)


def inner(z, w):
    """Real inner product Re (z, w) on R^6."""
    return hermitian(z, w).real


def norm(z):
    return np.sqrt(inner(z, z))


def hermitian_inner(z, w):
    """Return the pair ``((z, w), <z, w>)``."""
    h = hermitian(z, w)
    return h, h.real


def sphere_point(z, tol=SPHERE_TOL):
    """Validate that ``z`` lies on S^5 and return it as a complex array."""
    z = _vec(z)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite coordinates")
    dev = np.max(np.abs(inner(z, z) - 1.0))
    if dev >= tol:
        raise ValueError(f"point is off the unit sphere (| |z|^2 - 1 | = {dev:.3g})")
    return z


def reeb(z):
    """Reeb field xi(z) = i z."""
    return 1j * _vec(z)


@dataclass(frozen=True)
class ContactSplit:
    reeb_component: np.ndarray
    contact_component: np.ndarray
    radial_component: np.ndarray


def project(z, u):
    """Split ``u`` at ``z`` into radial, Reeb and contact parts.

    ``u = radial * z + reeb_component * iz + contact_component`` with the
    contact part orthogonal to both ``z`` and ``iz``.
    """
    z, u = _vec(z), _vec(u)
    radial = inner(u, z)
    xi = reeb(z)
    r = inner(u, xi)
    contact = u - radial[..., None] * z - r[..., None] * xi
    return ContactSplit(reeb_component=r, contact_component=contact, radial_component=radial)
