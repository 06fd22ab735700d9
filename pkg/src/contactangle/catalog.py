"""Parametric immersions into S^5 used throughout the package.

Every surface is a callable ``X(u, v) -> (x1, x2, x3)`` written with numpy
ufuncs, so the same code evaluates on floats, arrays and Taylor jets.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateExponents, InvalidRadii

TWO_PI = 2 * np.pi


@dataclass
class Surface:
    """Base class: a named immersion with a rectangular parameter domain."""

    name: str = "surface"
    u_range: tuple = (0.0, TWO_PI)
    v_range: tuple = (0.0, TWO_PI)
    periodic: tuple = (True, True)

    def __call__(self, u, v):
        raise NotImplementedError

    def grid(self, n):
        """``n x n`` parameter grid; periodic directions omit the endpoint."""
        axes = []
        for (lo, hi), per in zip((self.u_range, self.v_range), self.periodic):
            axes.append(np.linspace(lo, hi, n, endpoint=not per))
        uu, vv = np.meshgrid(axes[0], axes[1], indexing="ij")
        return uu.ravel(), vv.ravel()

    def descriptor(self):
        return {"kind": "builtin", "name": self.name}


@dataclass
class HomogeneousTorus(Surface):
    """X_k(u, v) = r_k exp(i (M[0][k] u + M[1][k] v))."""

    r: np.ndarray = None
    M: np.ndarray = None
    name: str = "homogeneous"

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.M = np.asarray(self.M, dtype=float)
        if self.r.shape != (3,) or self.M.shape != (2, 3):
            raise InvalidRadii("expected r of length 3 and M of shape 2x3")
        if not np.all(np.isfinite(self.r)) or not np.all(np.isfinite(self.M)):
            raise InvalidRadii("non-finite parameters")
        if np.any(self.r < 0):
            raise InvalidRadii("radii must be non-negative")
        if abs(np.sum(self.r**2) - 1.0) > 1e-12:
            raise InvalidRadii(f"sum of squared radii is {np.sum(self.r ** 2)!r}, not 1")
        E, F, G = self.metric()
        if E * G - F * F <= 1e-10:
            # blame the radii when the exponents alone would give a nondegenerate metric
            m, n = self.M
            if np.any(self.r == 0) and np.sum(m * m) * np.sum(n * n) - np.sum(m * n) ** 2 > 1e-10:
                raise InvalidRadii("zero radii make the induced metric degenerate (EG - F^2 <= 1e-10)")
            raise DegenerateExponents("induced metric is degenerate (EG - F^2 <= 1e-10)")

    def metric(self):
        w = self.r**2
        m, n = self.M
        return float(np.sum(m * m * w)), float(np.sum(m * n * w)), float(np.sum(n * n * w))

    def __call__(self, u, v):
        m, n = self.M
        return tuple(self.r[k] * np.exp(1j * (m[k] * u + n[k] * v)) for k in range(3))

    def descriptor(self):
        if self.name != "homogeneous":
            return {"kind": "builtin", "name": self.name}
        return {"kind": "homogeneous", "params": {"r": self.r.tolist(), "M": self.M.tolist()}}


@dataclass
class GreatSphere(Surface):
    """Totally geodesic S^2 = S^5 cap span(p, q, w), in polar coordinates (s, t)."""

    frame: np.ndarray = None
    name: str = "great-sphere"
    u_range: tuple = (0.3, np.pi - 0.3)
    periodic: tuple = (False, True)

    def __post_init__(self):
        if self.frame is None:
            self.frame = generic_real_frame()
        self.frame = np.asarray(self.frame, dtype=complex)

    def __call__(self, s, t):
        p, q, w = self.frame
        cs, ss = np.cos(s), np.sin(s)
        a, b = ss * np.cos(t), ss * np.sin(t)
        return tuple(p[k] * cs + q[k] * a + w[k] * b for k in range(3))


def generic_real_frame(seed=7):
    """Three R^6-orthonormal vectors of C^3 in general position for the contact structure."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(6, 3)))
    cols = Q.T
    return cols[:, 0::2] + 1j * cols[:, 1::2]


@dataclass
class TrigImmersion(Surface):
    """Normalized trigonometric polynomial map P(u, v) / |P(u, v)|.

    ``coeffs[k]`` maps frequency pairs (m, n) to complex coefficients of the
    k-th coordinate of P.
    """

    coeffs: list = field(default_factory=list)
    normalize: bool = True
    name: str = "trig"

    def __call__(self, u, v):
        comps = []
        for terms in self.coeffs:
            acc = 0.0
            for (m, n), c in terms.items():
                acc = acc + c * np.exp(1j * (m * u + n * v))
            comps.append(acc)
        if not self.normalize:
            return tuple(comps)
        nrm2 = sum((c * np.conj(c)).real for c in comps)
        inv = 1.0 / np.sqrt(nrm2)
        return tuple(c * inv for c in comps)


def random_trig_immersion(rng, degree=3, normalize=True):
    """Random trigonometric immersion with coefficients in [-1, 1] + i[-1, 1]."""
    freqs = [(m, n) for m in range(-degree, degree + 1) for n in range(-degree, degree + 1)
             if abs(m) + abs(n) <= degree]
    coeffs = []
    for _ in range(3):
        coeffs.append({f: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for f in freqs})
    return TrigImmersion(coeffs=coeffs, normalize=normalize)


def legendrian_flat():
    r = np.full(3, 1 / np.sqrt(3))
    return HomogeneousTorus(r=r, M=[[1, 0, -1], [0, 1, -1]], name="legendrian-flat")


def clifford_s3():
    r = np.array([1 / np.sqrt(2), 1 / np.sqrt(2), 0.0])
    return HomogeneousTorus(r=r, M=[[1, 0, 0], [0, 1, 0]], name="clifford-s3")


def great_sphere():
    return GreatSphere()


BUILTINS = {
    "legendrian-flat": legendrian_flat,
    "clifford-s3": clifford_s3,
    "great-sphere": great_sphere,
}


def builtin(name):
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin surface {name!r}; choose from {sorted(BUILTINS)}") from None


def from_descriptor(desc):
    """Build a surface from a descriptor dict (see :func:`Surface.descriptor`)."""
    if not isinstance(desc, dict):
        raise ValueError("surface descriptor must be a JSON object")
    kind = desc.get("kind")
    if kind == "builtin":
        return builtin(desc.get("name"))
    if kind == "homogeneous":
        params = desc.get("params")
        if not isinstance(params, dict) or "r" not in params or "M" not in params:
            raise ValueError("homogeneous descriptor needs params.r and params.M")
        return HomogeneousTorus(r=params["r"], M=params["M"])
    raise ValueError(f"unknown descriptor kind {kind!r}")
