"""Jets of parametric maps, and first/second order operators on surfaces.

Two independent routes produce the derivative table of a map ``X(u, v)``:

``taylor``
    propagate truncated Taylor series through the map (exact to roundoff);
``finite_difference``
    tensor-product central differences with two levels of Richardson
    extrapolation (truncation error O(h^6)), over a ladder of halved steps
    from which the most self-consistent estimate is kept.

The second route exists only as an oracle for the first.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetric, NonFinite
from .taylor import MAX_ORDER, Taylor, index, monomials

METRIC_EPS = 1e-14

# central-difference weights for d^p/dx^p, keyed by offset in units of h
_STENCILS = {
    0: {0: 1.0},
    1: {1: 0.5, -1: -0.5},
    2: {1: 1.0, 0: -2.0, -1: 1.0},
    3: {2: 0.5, 1: -1.0, -1: 1.0, -2: -0.5},
}

# largest base step per total derivative order; FD_LEVELS halvings are tried
# and, per entry, the level whose extrapolants agree best with the next is kept
FD_STEPS = {1: 2e-3, 2: 6e-3, 3: 1.2e-2}
FD_LEVELS = 4


@dataclass
class ParamJet:
    """Value and partial derivatives ``D^(p,q) X`` (``p + q <= order``) of a map into C^3.

    ``table`` has shape ``(n_coeffs(order), *batch, 3)`` in graded order
    ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...``.
    """

    u: np.ndarray
    v: np.ndarray
    order: int
    table: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.table)):
            raise NonFinite("jet contains NaN or Inf")

    def d(self, p, q):
        return self.table[index(p, q)]

    @property
    def X(self):
        return self.table[0]

    def taylor(self):
        """The map as a :class:`Taylor` field around the jet point."""
        return Taylor.from_derivatives(self.table, self.order)

    def __getitem__(self, key):
        """Restrict to a subset of batch points."""
        if not isinstance(key, tuple):
            key = (key,)
        return ParamJet(
            np.asarray(self.u)[key], np.asarray(self.v)[key], self.order,
            self.table[(slice(None),) + key],
        )


def _evaluate(surface, u, v):
    comps = surface(u, v)
    if isinstance(comps, Taylor):
        return comps
    if any(isinstance(c, Taylor) for c in comps):
        return Taylor.stack(list(comps), axis=-1)
    return np.stack(np.broadcast_arrays(*[np.asarray(c, dtype=complex) for c in comps]), axis=-1)


def jet(surface, point, order=3, method="taylor", steps=None):
    """Derivative table of ``surface`` at ``point = (u, v)`` (scalars or arrays).

    ``surface(u, v)`` returns the three complex coordinates and must be
    written with numpy ufuncs so that it accepts :class:`Taylor` arguments.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 0..{MAX_ORDER}")
    u0, v0 = np.broadcast_arrays(np.asarray(point[0], dtype=float), np.asarray(point[1], dtype=float))
    if method == "taylor":
        u = Taylor.variable(u0, 0, order)
        v = Taylor.variable(v0, 1, order)
        X = _evaluate(surface, u, v)
        table = X.derivatives()
        if table.shape[1:-1] != u0.shape:
            table = np.broadcast_to(table, (table.shape[0],) + u0.shape + (3,)).copy()
        return ParamJet(u0, v0, order, table.astype(complex))
    if method == "finite_difference":
        return ParamJet(u0, v0, order, _fd_table(surface, u0, v0, order, steps or FD_STEPS))
    raise ValueError(f"unknown method {method!r}")


def _fd_table(surface, u0, v0, order, steps, levels=FD_LEVELS):
    scale = np.maximum(1.0, np.maximum(np.abs(u0), np.abs(v0)))
    cache = {}

    def f(i, j, h):
        key = (i, j, h)
        if key not in cache:
            cache[key] = _evaluate(surface, u0 + i * h * scale, v0 + j * h * scale)
        return cache[key]

    def central(p, q, h):
        acc = 0.0
        for i, wi in _STENCILS[p].items():
            for j, wj in _STENCILS[q].items():
                acc = acc + wi * wj * f(i, j, h)
        return acc / (h * scale[..., None]) ** (p + q)

    rows = []
    for p, q in monomials(order):
        if p + q == 0:
            rows.append(f(0, 0, 0.0))
            continue
        hs = [steps[p + q] / 2**k for k in range(levels + 3)]
        d = [central(p, q, h) for h in hs]
        ext = []
        for k in range(levels + 1):
            r1 = (4 * d[k + 1] - d[k]) / 3
            r2 = (4 * d[k + 2] - d[k + 1]) / 3
            ext.append((16 * r2 - r1) / 15)
        ext = np.stack(ext)
        best = np.argmin(np.abs(np.diff(ext, axis=0)), axis=0)
        rows.append(np.take_along_axis(ext[1:], best[None], axis=0)[0])
    return np.stack(rows)


@dataclass
class ScalarJet2:
    """Value, first and second chart partials of a real field."""

    value: np.ndarray
    fu: np.ndarray
    fv: np.ndarray
    fuu: np.ndarray
    fuv: np.ndarray
    fvv: np.ndarray

    @classmethod
    def from_taylor(cls, t):
        if t.order < 2:
            raise ValueError("need a series of order >= 2")
        d = [np.real(t.derivative(p, q)) for p, q in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))]
        return cls(*d)

    @classmethod
    def constant(cls, value):
        z = np.zeros_like(np.asarray(value, dtype=float))
        return cls(np.asarray(value, dtype=float), z, z, z, z, z)

    def __add__(self, other):
        return ScalarJet2(*(a + b for a, b in zip(self._fields(), other._fields())))

    def __mul__(self, k):
        return ScalarJet2(*(a * k for a in self._fields()))

    __rmul__ = __mul__

    def _fields(self):
        return (self.value, self.fu, self.fv, self.fuu, self.fuv, self.fvv)


def _metric_values(metric):
    E, F, G = (m.value if isinstance(m, ScalarJet2) else np.asarray(m, dtype=float) for m in metric)
    det = E * G - F * F
    if np.any(det <= METRIC_EPS):
        raise DegenerateMetric("EG - F^2 <= 1e-14")
    return E, F, G, det


def rotate90(coeffs, metric):
    """Chart coefficients of J w for a tangent vector w given by chart coefficients.

    J is the rotation by +pi/2 in the orientation of (X_u, X_v).
    """
    E, F, G, det = _metric_values(metric)
    a, b = coeffs
    s = np.sqrt(det)
    return (-(F * a + G * b) / s, (E * a + F * b) / s)


def surface_gradient(f, metric, e1=None):
    """Components (f_1, f_2) = (df(e1), df(e2)) of the gradient in the frame (e1, J e1).

    ``e1`` gives chart coefficients of a unit tangent vector; by default
    ``e1 = X_u / |X_u|``.
    """
    E, F, G, _ = _metric_values(metric)
    if e1 is None:
        e1 = (1.0 / np.sqrt(E), np.zeros_like(E))
    e2 = rotate90(e1, metric)
    f1 = e1[0] * f.fu + e1[1] * f.fv
    f2 = e2[0] * f.fu + e2[1] * f.fv
    return f1, f2


def laplace_beltrami(f, metric):
    """(1/sqrt g) d_i (sqrt g g^ij d_j f) from jets of f and of (E, F, G).

    ``metric`` is a triple of :class:`ScalarJet2` (only first partials are used).
    """
    E, F, G = metric
    _, _, _, det = _metric_values(metric)
    # inverse metric
    guu, guv, gvv = G.value / det, -F.value / det, E.value / det
    # Christoffel symbols of the first kind, [ij, k]
    Eu, Ev, Fu, Fv, Gu, Gv = E.fu, E.fv, F.fu, F.fv, G.fu, G.fv
    uu_u, uu_v = 0.5 * Eu, Fu - 0.5 * Ev
    uv_u, uv_v = 0.5 * Ev, 0.5 * Gu
    vv_u, vv_v = Fv - 0.5 * Gu, 0.5 * Gv

    def second_kind(ku, kv):
        return guu * ku + guv * kv, guv * ku + gvv * kv

    g_uu = second_kind(uu_u, uu_v)
    g_uv = second_kind(uv_u, uv_v)
    g_vv = second_kind(vv_u, vv_v)
    hess_uu = f.fuu - g_uu[0] * f.fu - g_uu[1] * f.fv
    hess_uv = f.fuv - g_uv[0] * f.fu - g_uv[1] * f.fv
    hess_vv = f.fvv - g_vv[0] * f.fu - g_vv[1] * f.fv
    return guu * hess_uu + 2 * guv * hess_uv + gvv * hess_vv
