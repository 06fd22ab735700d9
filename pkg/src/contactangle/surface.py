"""Contact-adapted frames, fundamental forms and curvature of surfaces in S^5.

The frame is built pointwise from a :class:`~contactangle.calculus.ParamJet`
but entirely in Taylor arithmetic, so every frame field comes with its first
chart derivatives.  Connection forms, second fundamental forms and the
derivatives of the contact angle are read off those series rather than
differenced across grid points.

Conventions
-----------
* ``e1`` spans TS cap Delta; ``e2 = J e1`` where J is the rotation by +pi/2
  in the orientation of (X_u, X_v); the sign of the pair is chosen so that
  ``cos beta = <xi, e2> >= 0``.
* On Legendrian points (``cos beta ~ 0``) TS cap Delta is the whole tangent
  plane and ``e1 = X_u / |X_u|``.
* ``h[j][k][l] = <D_{e_k} e_l, e_j>`` and ``conn[j][k][l] = theta_j^k(e_l) =
  <D_{e_l} e_j, e_k>``, stored with zero-based indices (``e1`` is index 0).
"""

from dataclasses import dataclass, field

import numpy as np

from .ambient import inner
from .calculus import ScalarJet2, laplace_beltrami
from .errors import AlphaDegenerate, BetaDegenerate, DegenerateMetric
from .taylor import Taylor

ANGLE_EPS = 1e-6
LEGENDRIAN_EPS = 1e-9
METRIC_EPS = 1e-14
B_ZERO_TOL = 1e-6
ALPHA_CONST_TOL = 1e-6


@dataclass
class AdaptedFrame:
    """Point values of the adapted frame; arrays carry a batch shape.

    Undefined quantities at degenerate points (see the two masks) are filled
    with zeros so that nothing downstream sees NaN.
    """

    z: np.ndarray
    xi: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    v: np.ndarray
    e3: np.ndarray
    e4: np.ndarray
    e5: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray
    beta_degenerate: np.ndarray
    alpha_degenerate: np.ndarray
    legendrian: np.ndarray
    fields: dict = field(repr=False, default_factory=dict)

    @property
    def degenerate(self):
        return self.beta_degenerate | self.alpha_degenerate

    def vectors(self):
        """(z, e1, ..., e5) stacked along a new leading axis."""
        return np.stack([self.z, self.e1, self.e2, self.e3, self.e4, self.e5])


@dataclass
class FundamentalData:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    h: np.ndarray  # (3, 2, 2, *batch): h[j-3][k-1][l-1]
    conn: np.ndarray  # (5, 5, 2, *batch): conn[j-1][k-1][l-1]
    a: np.ndarray
    b: np.ndarray
    second_form: np.ndarray  # (2, 2, *batch, 3): normal part of D_{e_k} e_l
    tangent_coeffs: tuple  # chart coefficients of e1 and e2

    def theta(self, j, k, l):
        """theta_j^k(e_l) with the one-based labels used for the frame."""
        return self.conn[j - 1, k - 1, l - 1]


@dataclass
class PointSample:
    beta: np.ndarray
    alpha: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    lap_beta: np.ndarray
    K_intrinsic: np.ndarray
    K_extrinsic: np.ndarray
    H_norm: np.ndarray
    a: np.ndarray
    b: np.ndarray
    b_zero: np.ndarray
    alpha_const_locally: np.ndarray
    beta_degenerate: np.ndarray
    alpha_degenerate: np.ndarray
    legendrian: np.ndarray


# ---------------------------------------------------------------------------
# frame construction


def _tangent_basics(jet):
    Xt = jet.taylor()
    if Xt.order < 2:
        raise ValueError("frame construction needs a jet of order >= 2")
    Xu, Xv = Xt.partial(0), Xt.partial(1)
    X = Xt.truncate(Xu.order)
    E, F, G = inner(Xu, Xu), inner(Xu, Xv), inner(Xv, Xv)
    det = E * G - F * F
    if np.any(det.value <= METRIC_EPS):
        raise DegenerateMetric("induced metric is degenerate (EG - F^2 <= 1e-14)")
    return {"X": X, "Xu": Xu, "Xv": Xv, "E": E, "F": F, "G": G, "det": det, "sqrt_det": np.sqrt(det)}


def _rotate90(w, basics):
    Xu, Xv = basics["Xu"], basics["Xv"]
    return (inner(w, Xu)[..., None] * Xv - inner(w, Xv)[..., None] * Xu) / basics["sqrt_det"][..., None]


def _chart_coeffs(w, basics):
    """Chart coefficients (c_u, c_v) of a tangent vector at the point."""
    E, F, G, det = (basics[k].value for k in ("E", "F", "G", "det"))
    pu = inner(w, basics["Xu"].value)
    pv = inner(w, basics["Xv"].value)
    return ((G * pu - F * pv) / det, (E * pv - F * pu) / det)


def _tangent_frame(basics):
    X, Xu, Xv = basics["X"], basics["Xu"], basics["Xv"]
    xi = 1j * X
    pu, pv = inner(Xu, xi), inner(Xv, xi)
    E, F, G, det = (basics[k].value for k in ("E", "F", "G", "det"))
    pu0, pv0 = pu.value, pv.value
    cos_beta_sq = (G * pu0 * pu0 - 2 * F * pu0 * pv0 + E * pv0 * pv0) / det
    legendrian = np.sqrt(np.maximum(cos_beta_sq, 0.0)) < LEGENDRIAN_EPS
    raw = pv[..., None] * Xu - pu[..., None] * Xv
    raw = Taylor.where(legendrian[..., None], Xu, raw)
    e1 = raw / np.sqrt(inner(raw, raw))[..., None]
    e2 = _rotate90(e1, basics)
    sign = np.where(~legendrian & (inner(xi.value, e2.value) < 0), -1.0, 1.0)[..., None]
    return e1 * sign, e2 * sign, legendrian


def _safe_norm(w, degenerate):
    """|w| as a trailing-axis Taylor factor, replaced by 1 where ``degenerate``."""
    return np.sqrt(Taylor.where(degenerate, 1.0, inner(w, w)))[..., None]


def _complete(basics, e1, e2, legendrian):
    """Angles and normal fields from a tangent frame (e1 in the contact plane)."""
    X = basics["X"]
    xi = 1j * X
    cos_beta = inner(xi, e2)
    cb0 = np.clip(cos_beta.value, -1.0, 1.0)
    beta_deg = np.sqrt(1.0 - cb0 * cb0) < ANGLE_EPS
    beta = Taylor.where(beta_deg, Taylor.constant(np.arccos(cb0), cos_beta.order),
                        np.arccos(Taylor.where(beta_deg, 0.0, cos_beta)))
    cos_beta = Taylor.where(beta_deg, np.zeros_like(cb0), cos_beta)
    v = e2 - cos_beta[..., None] * xi
    v = v / _safe_norm(v, beta_deg)
    cos_alpha = inner(1j * e1, v)
    ca0 = np.clip(cos_alpha.value, -1.0, 1.0)
    alpha_deg = beta_deg | (np.sqrt(1.0 - ca0 * ca0) < ANGLE_EPS)
    alpha = Taylor.where(alpha_deg, Taylor.constant(np.zeros_like(ca0), cos_alpha.order),
                         np.arccos(Taylor.where(alpha_deg, 0.0, cos_alpha)))
    cos_alpha = np.cos(alpha)
    # dividing by the computed norms (equal to sin alpha, sin beta) keeps unit length near small angles
    w3 = 1j * e1 - cos_alpha[..., None] * v
    w4 = cos_alpha[..., None] * e1 + 1j * v
    w5 = xi - cos_beta[..., None] * e2
    e3, e4 = (w / _safe_norm(w, alpha_deg) for w in (w3, w4))
    e5 = w5 / _safe_norm(w5, beta_deg)
    fields = {"z": X, "xi": xi, "e1": e1, "e2": e2, "v": v, "e3": e3, "e4": e4, "e5": e5,
              "beta": beta, "alpha": alpha}
    vals = {k: f.value for k, f in fields.items()}
    # zero out fields that are undefined at degenerate points
    for k, mask in (("v", beta_deg), ("e5", beta_deg), ("e3", alpha_deg), ("e4", alpha_deg)):
        vals[k] = np.where(mask[..., None], 0.0, vals[k])
    vals["alpha"] = np.where(alpha_deg, 0.0, vals["alpha"])
    frame = AdaptedFrame(
        z=vals["z"], xi=vals["xi"], e1=vals["e1"], e2=vals["e2"], v=vals["v"],
        e3=vals["e3"], e4=vals["e4"], e5=vals["e5"],
        beta=np.real(vals["beta"]), alpha=np.real(vals["alpha"]),
        beta_degenerate=beta_deg, alpha_degenerate=alpha_deg, legendrian=legendrian,
        fields=fields,
    )
    frame.fields["_basics"] = basics
    return frame


def _frame(jet):
    basics = _tangent_basics(jet)
    e1, e2, legendrian = _tangent_frame(basics)
    return _complete(basics, e1, e2, legendrian)


def adapted_frame(jet, strict=True):
    """Adapted frame (z, e1, ..., e5) with contact angle beta and holomorphic angle alpha.

    With ``strict`` (the default) a degenerate point raises
    :class:`BetaDegenerate` or :class:`AlphaDegenerate`; otherwise the masks
    on the returned frame record them.
    """
    frame = _frame(jet)
    if strict:
        if np.any(frame.beta_degenerate):
            raise BetaDegenerate("sin(beta) < 1e-6: the contact angle is degenerate")
        if np.any(frame.alpha_degenerate):
            raise AlphaDegenerate("sin(alpha) < 1e-6: the holomorphic angle is degenerate")
    return frame


def rotate_frame(frame, t):
    """Rotate (e1, e2) by the constant angle ``t`` and rebuild the normals.

    Only meaningful on Legendrian points, where every tangent direction lies in
    the contact plane; elsewhere ``t`` must be zero.
    """
    t = np.broadcast_to(np.asarray(t, dtype=float), frame.beta.shape)
    if np.any((t != 0) & ~frame.legendrian):
        raise ValueError("tangent-frame rotation is only defined on Legendrian points")
    c, s = np.cos(t)[..., None], np.sin(t)[..., None]
    e1, e2 = frame.fields["e1"], frame.fields["e2"]
    return _complete(frame.fields["_basics"], c * e1 + s * e2, c * e2 - s * e1, frame.legendrian)


# ---------------------------------------------------------------------------
# fundamental forms


def _along(field_, coeffs):
    """Directional derivative at the point of a Taylor field along chart coefficients."""
    du, dv = field_.partial(0).value, field_.partial(1).value
    cu, cv = coeffs
    if du.ndim > np.ndim(cu):
        cu, cv = cu[..., None], cv[..., None]
    return cu * du + cv * dv


def fundamental_data(jet, frame):
    """First and second fundamental forms and all connection coefficients."""
    basics = frame.fields["_basics"]
    names = ("e1", "e2", "e3", "e4", "e5")
    vec = [frame.fields[k] for k in names]
    vals = [getattr(frame, k) for k in names]
    coeffs = (_chart_coeffs(vals[0], basics), _chart_coeffs(vals[1], basics))
    deriv = [[_along(f, coeffs[l]) for l in range(2)] for f in vec]
    batch = frame.beta.shape
    conn = np.zeros((5, 5, 2) + batch)
    for j in range(5):
        for l in range(2):
            for k in range(5):
                conn[j, k, l] = inner(deriv[j][l], vals[k])
    # h^j_kl = <D_{e_k} e_l, e_j> = theta_l^j(e_k)
    h = np.zeros((3, 2, 2) + batch)
    for j in range(3):
        for k in range(2):
            for l in range(2):
                h[j, k, l] = conn[l, j + 2, k]
    z = frame.z
    second = np.zeros((2, 2) + batch + (3,), dtype=complex)
    for k in range(2):
        for l in range(2):
            w = deriv[l][k]
            w = w - inner(w, z)[..., None] * z
            for m in range(2):
                w = w - inner(w, vals[m])[..., None] * vals[m]
            second[k, l] = w
    return FundamentalData(
        E=basics["E"].value, F=basics["F"].value, G=basics["G"].value,
        h=h, conn=conn, a=h[0, 0, 0], b=h[0, 0, 1], second_form=second,
        tangent_coeffs=coeffs,
    )


def mean_curvature(data, frame=None):
    """Mean curvature vector H = (1/2) sum_j (h^j_11 + h^j_22) e_j and its norm.

    Without a frame (or at degenerate points) H is the trace of the
    normal-projected second derivative, which agrees wherever both exist.
    """
    H = 0.5 * (data.second_form[0, 0] + data.second_form[1, 1])
    if frame is not None:
        ok = ~frame.degenerate
        Hf = 0.5 * sum((data.h[j, 0, 0] + data.h[j, 1, 1])[..., None] * e
                       for j, e in enumerate((frame.e3, frame.e4, frame.e5)))
        H = np.where(ok[..., None], Hf, H)
    return H, np.sqrt(inner(H, H))


def brioschi(E, F, G):
    """Gaussian curvature from jets of the first fundamental form."""
    det = E.value * G.value - F.value**2
    if np.any(det <= METRIC_EPS):
        raise DegenerateMetric("EG - F^2 <= 1e-14")
    a11 = -0.5 * E.fvv + F.fuv - 0.5 * G.fuu
    a12, a13 = 0.5 * E.fu, F.fu - 0.5 * E.fv
    a21, a31 = F.fv - 0.5 * G.fu, 0.5 * G.fv
    A = np.stack([
        np.stack([a11, a12, a13]),
        np.stack([a21, E.value, F.value]),
        np.stack([a31, F.value, G.value]),
    ])
    z = np.zeros_like(E.value)
    B = np.stack([
        np.stack([z, 0.5 * E.fv, 0.5 * G.fu]),
        np.stack([0.5 * E.fv, E.value, F.value]),
        np.stack([0.5 * G.fu, F.value, G.value]),
    ])
    detA = np.linalg.det(np.moveaxis(A, (0, 1), (-2, -1)))
    detB = np.linalg.det(np.moveaxis(B, (0, 1), (-2, -1)))
    return (detA - detB) / det**2


def metric_jets(jet):
    Xt = jet.taylor()
    if Xt.order < 3:
        raise ValueError("metric jets need a ParamJet of order 3")
    Xu, Xv = Xt.partial(0), Xt.partial(1)
    return tuple(ScalarJet2.from_taylor(t) for t in (inner(Xu, Xu), inner(Xu, Xv), inner(Xv, Xv)))


def gaussian_curvature(jet, data, route="extrinsic"):
    """Gaussian curvature by the Gauss equation or by the Brioschi formula."""
    if route == "extrinsic":
        II = data.second_form
        return 1.0 + inner(II[0, 0], II[1, 1]) - inner(II[0, 1], II[0, 1])
    if route == "intrinsic":
        return brioschi(*metric_jets(jet))
    raise ValueError(f"unknown route {route!r}")


def _frame_gradient(field_, coeffs):
    return tuple(np.real(_along(field_, c)) for c in coeffs)


def point_sample(jet, frame=None, data=None):
    """All scalar diagnostics at the jet points; degeneracies are flagged, not raised."""
    if frame is None:
        frame = adapted_frame(jet, strict=False)
    if data is None:
        data = fundamental_data(jet, frame)
    coeffs = data.tangent_coeffs
    beta1, beta2 = _frame_gradient(frame.fields["beta"], coeffs)
    alpha1, alpha2 = _frame_gradient(frame.fields["alpha"], coeffs)
    metric = metric_jets(jet)
    beta_jet = ScalarJet2.from_taylor(frame.fields["beta"])
    lap = laplace_beltrami(beta_jet, metric)
    _, H_norm = mean_curvature(data, frame)
    bdeg, adeg = frame.beta_degenerate, frame.alpha_degenerate
    zero = np.zeros_like(frame.beta)
    beta1, beta2, lap = (np.where(bdeg, zero, x) for x in (beta1, beta2, lap))
    alpha1, alpha2 = (np.where(adeg, zero, x) for x in (alpha1, alpha2))
    a = np.where(adeg, zero, data.a)
    b = np.where(adeg, zero, data.b)
    return PointSample(
        beta=frame.beta, alpha=frame.alpha,
        beta1=beta1, beta2=beta2, alpha1=alpha1, alpha2=alpha2, lap_beta=lap,
        K_intrinsic=gaussian_curvature(jet, data, "intrinsic"),
        K_extrinsic=gaussian_curvature(jet, data, "extrinsic"),
        H_norm=H_norm, a=a, b=b,
        b_zero=~adeg & (np.abs(b) < B_ZERO_TOL),
        alpha_const_locally=~adeg & (np.abs(alpha1) < ALPHA_CONST_TOL) & (np.abs(alpha2) < ALPHA_CONST_TOL),
        beta_degenerate=bdeg, alpha_degenerate=adeg, legendrian=frame.legendrian,
    )


def _b_coefficient(frame):
    """b = h^3_12 = <D_{e1} e2, e3> without assembling the full connection table."""
    coeffs = _chart_coeffs(frame.e1, frame.fields["_basics"])
    return inner(_along(frame.fields["e2"], coeffs), frame.e3)


def b_zero_gauge(frame, jet, tol=1e-10):
    """Smallest rotation t >= 0 of the tangent frame making b vanish on Legendrian points.

    Returns ``(t, rotated_frame, rotated_data)``.  b(t) is a trigonometric
    polynomial of degree 3 in t, so 8 rotated samples determine it exactly.
    Its first sign change on a fine grid brackets the smallest root, which is
    then bisected and polished with Newton steps.
    """
    if not np.all(frame.legendrian):
        raise ValueError("the b = 0 gauge rotation requires Legendrian points")
    n = 8
    ts = 2 * np.pi * np.arange(n) / n
    samples = np.stack([_b_coefficient(rotate_frame(frame, t)) for t in ts])
    batch = frame.beta.shape
    fourier = np.fft.fft(samples.reshape(n, -1), axis=0) / n
    ks = np.arange(-3, 4)
    coef = fourier[ks % n]  # b(t) = sum_k coef[k] e^{ikt}

    def model(t, deriv=False):
        ph = np.exp(1j * ks[:, None, None] * t[None])
        w = (1j * ks)[:, None, None] if deriv else 1.0
        return np.real(np.sum(w * coef[:, None, :] * ph, axis=0))

    m = 512
    grid = 2 * np.pi * np.arange(m + 1) / m
    vals = model(np.broadcast_to(grid[:, None], (m + 1, coef.shape[1])))
    hit = (vals[:-1] == 0) | (np.sign(vals[:-1]) != np.sign(vals[1:]))
    has = np.any(hit, axis=0)
    j = np.argmax(hit, axis=0)
    lo, hi = grid[j], grid[j + 1]
    flo = vals[j, np.arange(vals.shape[1])]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = model(mid[None])[0]
        left = np.sign(fm) == np.sign(flo)
        lo, flo = np.where(left, mid, lo), np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    t = np.where(vals[j, np.arange(vals.shape[1])] == 0, lo, 0.5 * (lo + hi))
    for _ in range(2):
        d = model(t[None], deriv=True)[0]
        step = np.where(d != 0, model(t[None])[0] / np.where(d != 0, d, 1.0), 0.0)
        t = t - step
    # no sign change: b(t) touches zero tangentially or never; take the grid minimum of |b|
    t = np.where(has, t, grid[np.argmin(np.abs(vals), axis=0)])
    t = np.where(np.max(np.abs(coef), axis=0) < tol, 0.0, np.mod(t, 2 * np.pi))
    t = t.reshape(batch)
    rotated = rotate_frame(frame, t)
    return t, rotated, fundamental_data(jet, rotated)
