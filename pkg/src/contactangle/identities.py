"""Grid residuals for the frame, connection, curvature and Laplacian identities.

Every identity is a pointwise residual gated by hypothesis flags.  A grid is
evaluated once (in chunks, so large grids fit in memory) into a
:class:`GridData`; the checks then only combine stored per-point arrays.

Two roles exist:

asserted
    the residual must stay below tolerance wherever the hypotheses hold;
diagnostic
    the residual is published but never decides a verdict.  These are the
    printed formulas that do not agree with the rest of the system, kept so
    the disagreement itself is on record.
"""

from dataclasses import dataclass, field

import numpy as np

from .ambient import inner
from .errors import NotMinimal
from .calculus import jet
from .surface import _along, adapted_frame, b_zero_gauge, fundamental_data, point_sample

DEFAULT_TOL = 1e-6
MINIMAL_TOL = 1e-6
MINIMAL_FRACTION = 0.9
CONST_TOL = 1e-6
COS_BETA_GUARD = 0.05
BETA1_TOL = 1e-5
K_NONNEG_TOL = 1e-8
GAUGE_B_TOL = 1e-10
HOPF_TOL = 1e-6
CHUNK = 2048

FLAGS = ("beta_nondegenerate", "alpha_nondegenerate", "minimal", "b_zero", "alpha_const",
         "a_const", "cos_beta_guard", "legendrian", "gauge_b_zero", "beta1_relation",
         "k_nonnegative")

SCALARS = ("beta", "alpha", "beta1", "beta2", "alpha1", "alpha2", "lap_beta", "K_intrinsic",
           "K_extrinsic", "H_norm", "a", "b")


# ---------------------------------------------------------------------------
# grid evaluation


def _vector_residuals(J, frame, data):
    """Per-point residuals of relations that need the frame vectors themselves."""
    z, xi, e1, e2, e3, e4, e5, v = (frame.z, frame.xi, frame.e1, frame.e2, frame.e3,
                                    frame.e4, frame.e5, frame.v)
    B, A = frame.beta[..., None], frame.alpha[..., None]
    sb, cb, sa, ca = np.sin(B), np.cos(B), np.sin(A), np.cos(A)
    sa_safe = np.where(frame.alpha_degenerate[..., None], 1.0, sa)
    sb_safe = np.where(frame.beta_degenerate[..., None], 1.0, sb)

    def nrm(w):
        return np.sqrt(inner(w, w))

    vecs = frame.vectors()
    gram = np.einsum("i...k,j...k->ij...", vecs, np.conj(vecs)).real
    out = {
        "gram": np.max(np.abs(gram - np.eye(6).reshape((6, 6) + (1,) * (gram.ndim - 2))), axis=(0, 1)),
        "e1_contact": np.abs(inner(e1, xi)),
        "cos_beta": np.abs(np.cos(frame.beta) - inner(xi, e2)),
        "e2_split": nrm(e2 - sb * v - cb * xi),
        "cos_alpha": np.abs(np.cos(frame.alpha) - inner(1j * e1, v)),
        "normals": np.max([
            nrm(e3 - (1j * e1 - ca * v) / sa_safe),
            nrm(e4 - (ca * e1 + 1j * v) / sa_safe),
            nrm(e5 - (xi - cb * e2) / sb_safe),
        ], axis=0),
        "contact_expansion": np.max([
            nrm(v - (sb * e2 - cb * e5)),
            nrm(1j * v - (sa * e4 - ca * e1)),
            nrm(xi - (cb * e2 + sb * e5)),
        ], axis=0),
        "complex_expansion": np.max([
            nrm(1j * e1 - (ca * sb * e2 + sa * e3 - ca * cb * e5)),
            nrm(1j * e2 - (-cb * z - ca * sb * e1 + sa * sb * e4)),
        ], axis=0),
        "h_symmetry": np.max(np.abs(data.h[:, 0, 1] - data.h[:, 1, 0]), axis=0),
        "conn_antisymmetry": np.max(np.abs(data.conn + np.swapaxes(data.conn, 0, 1)), axis=(0, 1, 2)),
    }

    # derivatives of xi and v along e1, e2 with the radial part removed
    T = data.conn
    theta1 = (1.0, 0.0)
    beta_field = frame.fields["beta"]
    dbeta = [np.real(_along(beta_field, c)) for c in data.tangent_coeffs]
    basis = (e1, e2, e3, e4, e5)
    dxi_res, dv_res, dv_printed = [], [], []
    for l, coeffs in enumerate(data.tangent_coeffs):
        t1, t2 = theta1[l], 1.0 - theta1[l]
        dxi = _along(frame.fields["xi"], coeffs)
        dxi = dxi - inner(dxi, z)[..., None] * z
        rhs = (-ca * sb * t2 * e1 + ca * sb * t1 * e2 + sa * t1 * e3 + sa * sb * t2 * e4
               - ca * cb * t1 * e5)
        dxi_res.append(nrm(dxi - rhs))
        dv = _along(frame.fields["v"], coeffs)
        dv = dv - inner(dv, z)[..., None] * z
        db = dbeta[l][..., None]

        def th(j, k):
            return T[j - 1, k - 1, l][..., None]

        coef = [
            sb * th(2, 1) - cb * th(5, 1),
            cb * (db - th(5, 2)),
            sb * th(2, 3) - cb * th(5, 3),
            sb * th(2, 4) - cb * th(5, 4),
            sb * (db + th(2, 5)),
        ]
        dv_res.append(nrm(dv - sum(c * e for c, e in zip(coef, basis))))
        coef[3] = sb * th(4, 2) - cb * th(5, 4)
        dv_printed.append(nrm(dv - sum(c * e for c, e in zip(coef, basis))))
    out["reeb_derivative"] = np.max(dxi_res, axis=0)
    out["v_derivative"] = np.max(dv_res, axis=0)
    out["v_derivative_printed"] = np.max(dv_printed, axis=0)
    return out


def _gauge_quantities(J, frame):
    """Point samples after rotating to the b = 0 gauge on Legendrian points."""
    n = frame.beta.shape[0]
    out = {k: np.zeros(n) for k in ("K", "beta", "alpha", "beta1", "a", "b")}
    out["mask"] = np.zeros(n, dtype=bool)
    idx = np.flatnonzero(frame.legendrian & ~frame.degenerate)
    if idx.size == 0:
        return out
    Jl = J[idx]
    fl = adapted_frame(Jl, strict=False)
    _, rf, rd = b_zero_gauge(fl, Jl, tol=GAUGE_B_TOL)
    ps = point_sample(Jl, rf, rd)
    ok = ~rf.degenerate
    for key, val in (("K", ps.K_intrinsic), ("beta", ps.beta), ("alpha", ps.alpha),
                     ("beta1", ps.beta1), ("a", ps.a), ("b", ps.b)):
        out[key][idx] = val
    out["mask"][idx] = ok
    return out


def _chunk(surface, u, v):
    J = jet(surface, (u, v), order=3)
    frame = adapted_frame(J, strict=False)
    data = fundamental_data(J, frame)
    ps = point_sample(J, frame, data)
    rec = {k: getattr(ps, k) for k in SCALARS}
    rec.update(beta_degenerate=ps.beta_degenerate, alpha_degenerate=ps.alpha_degenerate,
               legendrian=ps.legendrian, b_zero=ps.b_zero,
               alpha_const_locally=ps.alpha_const_locally,
               conn=np.moveaxis(data.conn, -1, 0))
    with np.errstate(all="ignore"):
        for k, val in _vector_residuals(J, frame, data).items():
            rec["vec_" + k] = val
    for k, val in _gauge_quantities(J, frame).items():
        rec["gauge_" + k] = val
    return rec


@dataclass
class GridData:
    """Per-point quantities of one surface over an n x n grid, plus hypothesis masks."""

    surface: object
    n: int
    values: dict
    flags: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.n * self.n

    def __getattr__(self, key):
        values = self.__dict__.get("values", {})
        if key in values:
            return values[key]
        raise AttributeError(key)

    def theta(self, j, k):
        """theta_j^k(e_l) for l = 1, 2 as an array of shape (2, N)."""
        return self.values["conn"][:, j - 1, k - 1].T


def _spread(x, mask):
    if not np.any(mask):
        return np.inf
    x = x[mask]
    return float(np.max(x) - np.min(x))


def evaluate(surface, n):
    """Evaluate every per-point quantity on the ``n x n`` grid of ``surface``."""
    u, v = surface.grid(n)
    recs = [_chunk(surface, u[i:i + CHUNK], v[i:i + CHUNK]) for i in range(0, u.size, CHUNK)]
    values = {k: np.concatenate([r[k] for r in recs]) for k in recs[0]}
    g = GridData(surface=surface, n=n, values=values)
    _add_derived(g)
    _add_flags(g)
    return g


def _add_derived(g):
    val = g.values
    B, A = val["beta"], val["alpha"]
    with np.errstate(all="ignore"):
        sb, cb, sa, ca = np.sin(B), np.cos(B), np.sin(A), np.cos(A)
        val.update(sb=sb, cb=cb, sa=sa, ca=ca, csc=1 / sb, cot=cb / sb, sec=1 / cb, tan=sb / cb,
                   cota=ca / sa)
    one, zero = np.ones_like(B), np.zeros_like(B)
    val["th1"] = np.stack([one, zero])
    val["th2"] = np.stack([zero, one])
    val["db"] = np.stack([val["beta1"], val["beta2"]])
    val["dbJ"] = np.stack([val["beta2"], -val["beta1"]])
    val["da"] = np.stack([val["alpha1"], val["alpha2"]])
    val["K"] = val["K_intrinsic"]


def _add_flags(g):
    val, f = g.values, g.flags
    f["beta_nondegenerate"] = ~val["beta_degenerate"]
    f["alpha_nondegenerate"] = ~val["alpha_degenerate"]
    frame_ok = f["beta_nondegenerate"] & f["alpha_nondegenerate"]
    f["minimal"] = val["H_norm"] < MINIMAL_TOL
    f["b_zero"] = val["b_zero"]
    alpha_global = _spread(val["alpha"], frame_ok) < CONST_TOL
    f["alpha_const"] = val["alpha_const_locally"] & alpha_global
    f["a_const"] = frame_ok & (_spread(val["a"], frame_ok) < CONST_TOL)
    f["cos_beta_guard"] = np.abs(val["cb"]) >= COS_BETA_GUARD
    f["legendrian"] = val["legendrian"]
    f["gauge_b_zero"] = val["gauge_mask"] & (np.abs(val["gauge_b"]) < GAUGE_B_TOL)
    f["beta1_relation"] = np.abs(val["beta1"] + 2 * val["ca"]) < BETA1_TOL
    k_ok = bool(np.any(frame_ok)) and bool(np.all(val["K"][frame_ok] >= -K_NONNEG_TOL))
    f["k_nonnegative"] = frame_ok & k_ok


# ---------------------------------------------------------------------------
# identity registry


@dataclass
class IdentityCheck:
    name: str
    group: str
    hypotheses: tuple
    residual: object
    formula: str
    role: str = "asserted"
    tol: float = None


@dataclass
class IdentityResult:
    name: str
    group: str
    hypotheses: tuple
    role: str
    formula: str
    tol: float
    sup: float
    mean: float
    evaluated: int
    skipped: int
    nonfinite: int
    hypothesis_summary: dict
    verdict: str
    note: str = ""

    def to_dict(self):
        return {
            "name": self.name, "group": self.group, "role": self.role,
            "hypotheses": list(self.hypotheses), "formula": self.formula, "tol": self.tol,
            "sup": self.sup, "mean": self.mean, "evaluated": self.evaluated,
            "skipped": self.skipped, "nonfinite": self.nonfinite,
            "hypothesis_summary": self.hypothesis_summary, "verdict": self.verdict,
            "note": self.note,
        }


REGISTRY = []
FRAME = ("beta_nondegenerate", "alpha_nondegenerate")


def identity(name, group, hypotheses=(), formula="", role="asserted", tol=None):
    def deco(fn):
        REGISTRY.append(IdentityCheck(name, group, FRAME + tuple(hypotheses), fn, formula, role, tol))
        return fn
    return deco


def _vec(key):
    return lambda g: g.values["vec_" + key]


for _key, _formula in (
    ("gram", "Gram(z, e1, ..., e5) = I"),
    ("e1_contact", "<e1, xi> = 0"),
    ("cos_beta", "cos beta = <xi, e2>"),
    ("e2_split", "e2 = sin beta v + cos beta xi"),
    ("cos_alpha", "cos alpha = <i e1, v>"),
    ("normals", "e3 = i csc alpha e1 - cot alpha v; e4 = cot alpha e1 + i csc alpha v; e5 = csc beta xi - cot beta e2"),
    ("contact_expansion", "v = sin beta e2 - cos beta e5; iv = sin alpha e4 - cos alpha e1; xi = cos beta e2 + sin beta e5"),
    ("complex_expansion", "i e1 = cos alpha sin beta e2 + sin alpha e3 - cos alpha cos beta e5; "
                          "i e2 = -cos beta z - cos alpha sin beta e1 + sin alpha sin beta e4"),
    ("h_symmetry", "h^j_12 = h^j_21"),
    ("conn_antisymmetry", "theta_j^k = -theta_k^j"),
):
    identity("frame_" + _key, "frame", formula=_formula)(_vec(_key))

identity("curvature_routes", "frame", formula="K_brioschi = 1 + sum_j (h^j_11 h^j_22 - (h^j_12)^2)")(
    lambda g: g.K_intrinsic - g.K_extrinsic)

identity("reeb_derivative", "structure",
         formula="D xi = -cos alpha sin beta th2 e1 + cos alpha sin beta th1 e2 + sin alpha th1 e3 + sin alpha sin beta th2 e4 "
                 "- cos alpha cos beta th1 e5")(_vec("reeb_derivative"))
identity("v_derivative", "structure",
         formula="D v = (sin beta th_2^1 - cos beta th_5^1) e1 + cos beta (dbeta - th_5^2) e2 + (sin beta th_2^3 - "
                 "cos beta th_5^3) e3 + (sin beta th_2^4 - cos beta th_5^4) e4 + sin beta (dbeta + th_2^5) e5")(
    _vec("v_derivative"))
identity("v_derivative_printed", "structure", role="diagnostic",
         formula="as v_derivative but with e4 coefficient sin beta th_4^2 - cos beta th_5^4")(
    _vec("v_derivative_printed"))


def _structure(g):
    T = g.theta
    sb, cb, sa = g.sb, g.cb, g.sa
    csc, cot, cota = g.csc, g.cot, g.cota
    th1, th2 = g.th1, g.th2
    return {
        "3_1": (T(3, 1) + T(1, 3), "theta_3^1 = -theta_1^3", ()),
        "3_2": (T(3, 2) - (sb * T(4, 1) - cb * sa * th1),
                "theta_3^2 = sin beta theta_4^1 - cos beta sin alpha th1", ("alpha_const",)),
        "3_4": (T(3, 4) - (csc * T(1, 2) - cota * (T(1, 3) + csc * T(2, 4))),
                "theta_3^4 = csc beta theta_1^2 - cot alpha (theta_1^3 + csc beta theta_2^4)", ()),
        "3_5": (T(3, 5) - (cot * T(2, 3) - csc * sa * th1),
                "theta_3^5 = cot beta theta_2^3 - csc beta sin alpha th1", ()),
        "4_1": (T(4, 1) - (-csc * T(2, 3) + sa * cot * th1),
                "theta_4^1 = -csc beta theta_2^3 + sin alpha cot beta th1", ("alpha_const",)),
        "4_2": (T(4, 2) + T(2, 4), "theta_4^2 = -theta_2^4", ()),
        "4_3": (T(4, 3) - (csc * T(2, 1) + cota * (T(1, 3) + csc * T(2, 4))),
                "theta_4^3 = csc beta theta_2^1 + cot alpha (theta_1^3 + csc beta theta_2^4)", ()),
        "4_5": (T(4, 5) - (cot * T(2, 4) - sa * th2), "theta_4^5 = cot beta theta_2^4 - sin alpha th2", ()),
        "5_1": (T(5, 1) - (-g.ca * th2 - cot * T(2, 1)),
                "theta_5^1 = -cos alpha th2 - cot beta theta_2^1", ()),
        "5_2": (T(5, 2) - (g.db + g.ca * th1), "theta_5^2 = dbeta + cos alpha th1", ()),
        "5_3": (T(5, 3) - (-cot * T(2, 3) + csc * sa * th1),
                "theta_5^3 = -cot beta theta_2^3 + csc beta sin alpha th1", ()),
        "5_4": (T(5, 4) - (-cot * T(2, 4) + sa * th2), "theta_5^4 = -cot beta theta_2^4 + sin alpha th2", ()),
        "3_2_general": (T(3, 2) - (sb * T(4, 1) - cb * sa * th1 + sb * g.da),
                        "theta_3^2 = sin beta theta_4^1 - cos beta sin alpha th1 + sin beta dalpha", ()),
        "4_1_general": (T(4, 1) - (-csc * T(2, 3) + sa * cot * th1 - g.da),
                        "theta_4^1 = -csc beta theta_2^3 + sin alpha cot beta th1 - dalpha", ()),
    }


def _register_table(prefix, group, table_fn, base_hyp, role="asserted"):
    for key, (_, formula, extra) in table_fn(_Probe()).items():
        identity(f"{prefix}_theta_{key}", group, base_hyp + extra, formula, role)(
            (lambda k: lambda g: table_fn(g)[k][0])(key))


class _Probe:
    """Stand-in grid used only to read formula strings and hypotheses at import time."""

    def __getattr__(self, key):
        return 0.0

    def theta(self, j, k):
        return 0.0


_register_table("structure", "structure", _structure, ())


def _minimal_forms(g):
    T = g.theta
    a, b = g.a, g.b
    sa, ca, csc, cot, cota, sec = g.sa, g.ca, g.csc, g.cot, g.cota, g.sec
    th1, th2, db, dbJ = g.th1, g.th2, g.db, g.dbJ
    return {
        "1_3": (T(1, 3) - (a * th1 + b * th2), "theta_1^3 = a th1 + b th2", ()),
        "2_3": (T(2, 3) - (b * th1 - a * th2), "theta_2^3 = b th1 - a th2", ()),
        "1_4": (T(1, 4) - ((b * csc - sa * cot) * th1 - a * csc * th2),
                "theta_1^4 = (b csc beta - sin alpha cot beta) th1 - a csc beta th2", ("alpha_const",)),
        "2_4": (T(2, 4) - (-a * csc * th1 - (b * csc - sa * cot) * th2),
                "theta_2^4 = -a csc beta th1 - (b csc beta - sin alpha cot beta) th2", ("alpha_const",)),
        "1_5": (T(1, 5) - (dbJ - ca * th2), "theta_1^5 = dbeta o J - cos alpha th2", ()),
        "2_5": (T(2, 5) - (-db - ca * th1), "theta_2^5 = -dbeta - cos alpha th1", ()),
        "3_4": (T(3, 4) - (-sec * dbJ + a * cota * cot**2 * th1
                           + (b * cota * cot**2 - ca * cot * csc + 2 * sec * ca) * th2),
                "theta_3^4 = -sec beta dbeta o J + a cot alpha cot^2 beta th1 + (b cot alpha cot^2 beta - cos alpha cot beta "
                "csc beta + 2 sec beta cos alpha) th2", ("alpha_const", "cos_beta_guard")),
        "3_5": (T(3, 5) - ((b * cot - csc * sa) * th1 - a * cot * th2),
                "theta_3^5 = (b cot beta - csc beta sin alpha) th1 - a cot beta th2", ()),
        "4_5": (T(4, 5) - (-a * cot * csc * th1 + (-b * csc * cot + sa * (cot**2 - 1)) * th2),
                "theta_4^5 = -a cot beta csc beta th1 + (-b csc beta cot beta + sin alpha (cot^2 beta - 1)) th2",
                ("alpha_const",)),
    }


def _b_zero_forms(g):
    T = g.theta
    a = g.a
    sa, ca, csc, cot, cota, sec = g.sa, g.ca, g.csc, g.cot, g.cota, g.sec
    th1, th2, db, dbJ = g.th1, g.th2, g.db, g.dbJ
    return {
        "1_3": (T(1, 3) - a * th1, "theta_1^3 = a th1", ()),
        "2_3": (T(2, 3) + a * th2, "theta_2^3 = -a th2", ()),
        "1_4": (T(1, 4) - (-sa * cot * th1 - a * csc * th2),
                "theta_1^4 = -sin alpha cot beta th1 - a csc beta th2", ("alpha_const",)),
        "2_4": (T(2, 4) - (-a * csc * th1 + sa * cot * th2),
                "theta_2^4 = -a csc beta th1 + sin alpha cot beta th2", ("alpha_const",)),
        "1_5": (T(1, 5) - (dbJ - ca * th2), "theta_1^5 = dbeta o J - cos alpha th2", ()),
        "2_5": (T(2, 5) - (-db - ca * th1), "theta_2^5 = -dbeta - cos alpha th1", ()),
        "3_4": (T(3, 4) - (-sec * dbJ + a * cota * cot**2 * th1
                           + (-ca * cot * csc + 2 * sec * ca) * th2),
                "theta_3^4 = -sec beta dbeta o J + a cot alpha cot^2 beta th1 + (-cos alpha cot beta csc beta + 2 sec beta "
                "cos alpha) th2", ("alpha_const", "cos_beta_guard")),
        "3_5": (T(3, 5) - (-csc * sa * th1 - a * cot * th2),
                "theta_3^5 = -csc beta sin alpha th1 - a cot beta th2", ()),
        "4_5": (T(4, 5) - (-a * cot * csc * th1 + sa * (cot**2 - 1) * th2),
                "theta_4^5 = -a cot beta csc beta th1 + sin alpha (cot^2 beta - 1) th2", ("alpha_const",)),
    }


_register_table("minimal", "minimal_forms", _minimal_forms, ("minimal",))
_register_table("bzero", "minimal_forms", _b_zero_forms, ("minimal", "b_zero"))


# scalar curvature and Laplacian expressions

def _grad2(g):
    return g.beta1**2 + g.beta2**2


def _gauss_line1(g, beta1=None, alpha=None, a=None):
    beta1 = g.beta1 if beta1 is None else beta1
    ca = g.ca if alpha is None else np.cos(alpha)
    sa = g.sa if alpha is None else np.sin(alpha)
    a = g.a if a is None else a
    grad2 = beta1**2 + g.beta2**2
    return 1 - grad2 - 2 * ca * beta1 - ca**2 - (1 + g.csc**2) * a**2 - sa**2 * g.cot**2


def _gauss_line2(g, literal=False):
    tail = g.sa**2 * (np.cos(g.beta**2) / np.sin(g.beta**2) if literal else g.cot**2)
    return 1 - (1 + g.csc**2) * g.a**2 - ((g.beta1 + g.ca)**2 + g.beta2**2) - tail


CURV = ("minimal", "b_zero", "alpha_const")

identity("gauss_curvature_angles", "curvature", CURV,
         "K = 1 - |grad beta|^2 - 2 cos alpha beta1 - cos^2 alpha - (1 + csc^2 beta) a^2 - sin^2 alpha cot^2 beta")(
    lambda g: g.K - _gauss_line1(g))
identity("gauss_curvature_square", "curvature", CURV,
         "K = 1 - (1 + csc^2 beta) a^2 - |grad beta + cos alpha e1|^2 - sin^2 alpha cot^2 beta")(
    lambda g: g.K - _gauss_line2(g))
identity("gauss_curvature_square_literal", "curvature", CURV,
         "K = 1 - (1 + csc^2 beta) a^2 - |grad beta + cos alpha e1|^2 - sin^2 alpha cot(beta^2)", role="diagnostic")(
    lambda g: g.K - _gauss_line2(g, literal=True))


def _gauge_line1(g):
    beta1, alpha, a = g.gauge_beta1, g.gauge_alpha, g.gauge_a
    ca, sa = np.cos(alpha), np.sin(alpha)
    with np.errstate(all="ignore"):
        csc, cot = 1 / np.sin(g.gauge_beta), np.cos(g.gauge_beta) / np.sin(g.gauge_beta)
    # the gauge rotation does not move beta, so |grad beta| is frame independent
    return g.gauge_K - (1 - _grad2(g) - 2 * ca * beta1 - ca**2 - (1 + csc**2) * a**2 - sa**2 * cot**2)


identity("gauss_curvature_gauge", "curvature", ("minimal", "legendrian", "gauge_b_zero", "alpha_const"),
         "K = 1 - |grad beta|^2 - 2 cos alpha beta1 - cos^2 alpha - (1 + csc^2 beta) a^2 - sin^2 alpha cot^2 beta "
         "in the b = 0 tangent gauge")(_gauge_line1)

identity("tangent_connection", "curvature", ("minimal", "b_zero", "cos_beta_guard"),
         "theta_2^1 = tan beta (dbeta o J - 2 cos alpha th2)")(
    lambda g: g.theta(2, 1) - g.tan * (g.dbJ - 2 * g.ca * g.th2))


def _gauss_laplacian(g):
    t2 = g.tan**2
    return (-(1 + t2) * _grad2(g) - g.tan * g.lap_beta - 2 * g.ca * (1 + 2 * t2) * g.beta1
            - 4 * t2 * g.ca**2)


identity("gauss_curvature_laplacian", "curvature", CURV + ("cos_beta_guard",),
         "K = -(1 + tan^2 beta)|grad beta|^2 - tan beta Lap beta - 2 cos alpha (1 + 2 tan^2 beta) beta1 - 4 tan^2 beta cos^2 alpha")(
    lambda g: g.K - _gauss_laplacian(g))


def _lap_combined(g, beta1=None):
    beta1 = g.beta1 if beta1 is None else beta1
    sq = (beta1 + 2 * g.ca)**2 + g.beta2**2
    return ((1 + g.csc**2) * g.a**2 - g.tan**2 * (sq - (g.sa * (1 - g.cot**2))**2)
            + g.sa**2 * (1 - g.tan**2))


def _lap_theorem(g):
    return (g.cot * ((1 + g.csc**2) * g.a**2 - g.sa**2)
            - g.tan * (_grad2(g) + 12 * g.ca**2 - g.sa**2))


LAP = CURV + ("cos_beta_guard",)
LAP_COMBINED = ("tan beta Lap beta = (1 + csc^2 beta) a^2 - tan^2 beta (|grad beta + 2 cos alpha e1|^2 - |sin alpha (1 - cot^2 beta)|^2)"
                " + sin^2 alpha (1 - tan^2 beta)")
LAP_CODAZZI = ("tan beta Lap beta = (1 + csc^2 beta) a^2 - tan^2 beta (|grad beta + 2 cos alpha|^2 - |sin alpha (1 - cot^2 beta)|^2)"
               " + sin^2 alpha (1 - tan^2 beta), read as (beta1 + 2 cos alpha)^2 + beta2^2")
LAP_THEOREM = "Lap beta = cot beta ((1 + csc^2 beta) a^2 - sin^2 alpha) - tan beta (|grad beta|^2 + 12 cos^2 alpha - sin^2 alpha)"

identity("laplacian_combined", "laplacian", LAP, LAP_COMBINED)(
    lambda g: g.tan * g.lap_beta - _lap_combined(g))
identity("laplacian_codazzi_ricci", "laplacian", LAP + ("a_const",), LAP_CODAZZI)(
    lambda g: g.tan * g.lap_beta - _lap_combined(g))
identity("laplacian_theorem", "laplacian", LAP + ("a_const",), LAP_THEOREM, role="diagnostic")(
    lambda g: g.lap_beta - _lap_theorem(g))

CODAZZI = ("minimal", "b_zero", "alpha_const", "a_const", "cos_beta_guard")
CODAZZI_BETA2 = ("beta2 = (3 - cos^2 beta) a / (sin beta cos beta) * (-2 sin alpha csc beta beta1 - sin alpha cos alpha csc beta (3 - cot^2 beta)"
                 " + a^2 cot alpha csc beta cot^2 beta)")


def _codazzi_beta2(g):
    pre = (3 - g.cb**2) * g.a / (g.sb * g.cb)
    par = (-2 * g.sa * g.csc * g.beta1 - g.sa * g.ca * g.csc * (3 - g.cot**2)
           + g.a**2 * g.cota * g.csc * g.cot**2)
    return g.beta2 - pre * par


identity("codazzi_beta2", "codazzi", CODAZZI, CODAZZI_BETA2, role="diagnostic")(_codazzi_beta2)
identity("codazzi_beta1", "codazzi", CODAZZI, "beta1 = -2 cos alpha", role="diagnostic")(
    lambda g: g.beta1 + 2 * g.ca)


def _corollary_rhs(beta, beta2, lap):
    t = np.tan(beta)
    return -(1 + t * t) * beta2**2 - t * lap


identity("corollary_curvature", "corollary", CURV + ("cos_beta_guard", "beta1_relation"),
         "K = -(1 + tan^2 beta) beta2^2 - tan beta Lap beta")(
    lambda g: g.K - _corollary_rhs(g.beta, g.beta2, g.lap_beta))


def _hopf(g):
    mask = g.flags["beta_nondegenerate"] & g.flags["alpha_nondegenerate"]
    ref = float(np.mean(g.beta[mask])) if np.any(mask) else 0.0
    return g.beta - ref


identity("hopf_constant_beta", "corollary", ("minimal", "alpha_const", "a_const", "k_nonnegative"),
         "K >= 0 and a constant on a compact example force beta constant", tol=HOPF_TOL)(_hopf)

identity("mean_curvature_norm", "frame", (), "|H| (always reported)", role="diagnostic")(
    lambda g: g.H_norm)


# ---------------------------------------------------------------------------
# evaluation of checks


def _mask(g, hypotheses):
    m = np.ones(g.size, dtype=bool)
    for h in hypotheses:
        m &= g.flags[h]
    return m


def run_check(check, g, tol=DEFAULT_TOL):
    """Apply one check to an evaluated grid."""
    tol = check.tol if check.tol is not None else tol
    mask = _mask(g, check.hypotheses)
    summary = {h: int(np.count_nonzero(g.flags[h])) for h in check.hypotheses}
    evaluated = int(np.count_nonzero(mask))
    sup = mean = None
    nonfinite = 0
    if evaluated:
        with np.errstate(all="ignore"):
            res = np.abs(np.asarray(check.residual(g), dtype=float))
        res = res.reshape(-1, g.size) if res.ndim > 1 else res[None]
        res = np.max(res, axis=0)[mask]
        finite = np.isfinite(res)
        nonfinite = int(np.count_nonzero(~finite))
        if np.any(finite):
            sup, mean = float(np.max(res[finite])), float(np.mean(res[finite]))
    if not evaluated:
        verdict = "SKIP"
    elif nonfinite or sup is None or not sup < tol:
        verdict = "FAIL"
    else:
        verdict = "PASS"
    return IdentityResult(check.name, check.group, check.hypotheses, check.role, check.formula, tol,
                          sup, mean, evaluated, g.size - evaluated, nonfinite, summary, verdict)


def _grid(surface_or_grid, n):
    return surface_or_grid if isinstance(surface_or_grid, GridData) else evaluate(surface_or_grid, n)


def _run_group(groups, surface, n, tol):
    g = _grid(surface, n)
    return [run_check(c, g, tol) for c in REGISTRY if c.group in groups]


def check_frame(surface, n=32, tol=DEFAULT_TOL):
    return _run_group(("frame",), surface, n, tol)


def check_structure(surface, n=32, tol=DEFAULT_TOL):
    """Derivatives of xi and v, and the relations among the normal connection forms."""
    return _run_group(("structure",), surface, n, tol)


def _require_minimal(g):
    frac = float(np.mean(g.flags["minimal"]))
    if frac < MINIMAL_FRACTION:
        raise NotMinimal(f"only {frac:.1%} of grid points have |H| < {MINIMAL_TOL:g}")


def check_minimal_forms(surface, n=32, tol=DEFAULT_TOL):
    """Connection forms of a minimal surface; raises NotMinimal on non-minimal input."""
    g = _grid(surface, n)
    _require_minimal(g)
    return _run_group(("minimal_forms",), g, n, tol)


def check_curvature(surface, n=32, tol=DEFAULT_TOL):
    return _run_group(("curvature",), surface, n, tol)


def check_laplacians(surface, n=32, tol=DEFAULT_TOL):
    g = _grid(surface, n)
    return _run_group(("laplacian",), g, n, tol), laplacian_table(g)


def check_codazzi(surface, n=32, tol=DEFAULT_TOL):
    return _run_group(("codazzi",), surface, n, tol)


def check_corollary(surface, n=32, tol=DEFAULT_TOL):
    return _run_group(("corollary",), surface, n, tol)


# ---------------------------------------------------------------------------
# tuple mode of the corollary substitution


def corollary_tuples(n=1000, seed=0):
    """Random (beta, alpha, a, beta2, lap) with beta1 = -2 cos alpha and the two curvature sides.

    Returns ``(tuples, lhs, rhs)``: lhs is the general curvature-Laplacian
    expression after substitution, rhs the collapsed corollary form.
    """
    rng = np.random.default_rng(seed)
    beta = rng.uniform(0.05, np.pi / 2 - 0.05, n)
    alpha = rng.uniform(0.05, np.pi - 0.05, n)
    a = rng.uniform(-2, 2, n)
    beta2 = rng.uniform(-2, 2, n)
    lap = rng.uniform(-2, 2, n)
    return (beta, alpha, a, beta2, lap), *corollary_sides(beta, alpha, beta2, lap)


def corollary_sides(beta, alpha, beta2, lap):
    t = np.tan(beta)
    ca = np.cos(alpha)
    beta1 = -2 * ca
    grad2 = beta1**2 + beta2**2
    lhs = -(1 + t * t) * grad2 - t * lap - 2 * ca * (1 + 2 * t * t) * beta1 - 4 * t * t * ca * ca
    return lhs, _corollary_rhs(beta, beta2, lap)


def corollary_tuple_residual(n=1000, seed=0):
    _, lhs, rhs = corollary_tuples(n, seed)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# consistency tables


def _sup(x, mask):
    if not np.any(mask):
        return None
    with np.errstate(all="ignore"):
        x = np.abs(x[mask])
    return float(np.max(x)) if np.all(np.isfinite(x)) else None


def _at(x, idx):
    return None if idx is None else float(x[idx])


def laplacian_table(g):
    """Three printed Laplacian right-hand sides compared on identical data."""
    hyp = FRAME + LAP + ("a_const",)
    mask = _mask(g, hyp)
    idx = int(np.flatnonzero(mask)[0]) if np.any(mask) else None
    with np.errstate(all="ignore"):
        combined = _lap_combined(g) / g.tan
        theorem = _lap_theorem(g)
        chain = _lap_combined(g, beta1=-2 * g.ca) - (-g.K - (1 + g.tan**2) * g.beta2**2)
    # the codazzi-ricci form is read with the same vector square, so it coincides
    codazzi = combined
    return {
        "name": "laplacian_three_way",
        "role": "diagnostic",
        "hypotheses": list(hyp),
        "evaluated": int(np.count_nonzero(mask)),
        "formulas": {"combined": LAP_COMBINED, "codazzi_ricci": LAP_CODAZZI, "theorem": LAP_THEOREM},
        "representative": {
            "index": idx, "beta": _at(g.beta, idx), "alpha": _at(g.alpha, idx), "a": _at(g.a, idx),
            "measured": _at(g.lap_beta, idx), "combined": _at(combined, idx),
            "codazzi_ricci": _at(codazzi, idx), "theorem": _at(theorem, idx),
        },
        "sup_difference": {
            "combined_minus_codazzi_ricci": _sup(combined - codazzi, mask),
            "combined_minus_theorem": _sup(combined - theorem, mask),
            "codazzi_ricci_minus_theorem": _sup(codazzi - theorem, mask),
        },
        "sup_minus_measured": {
            "combined": _sup(combined - g.lap_beta, mask),
            "codazzi_ricci": _sup(codazzi - g.lap_beta, mask),
            "theorem": _sup(theorem - g.lap_beta, mask),
        },
        "combined_vs_corollary_chain": _sup(chain, mask),
    }


def codazzi_table(g):
    """Behaviour of the b1 relation on data with constant beta."""
    hyp = FRAME + CODAZZI
    mask = _mask(g, hyp)
    beta_const = _spread(g.beta, mask) < CONST_TOL
    return {
        "name": "beta1_relation_constant_beta",
        "role": "diagnostic",
        "hypotheses": list(hyp),
        "evaluated": int(np.count_nonzero(mask)),
        "beta_constant": bool(beta_const),
        "sup_residual": _sup(g.beta1 + 2 * g.ca, mask),
        "sup_two_abs_cos_alpha": _sup(2 * g.ca, mask),
        "alpha_half_pi": None if not np.any(mask) else bool(np.all(np.abs(g.ca[mask]) < CONST_TOL)),
        "consistent": None if not (np.any(mask) and beta_const)
        else bool(np.all(np.abs(g.ca[mask]) < BETA1_TOL)),
    }


def gauss_readings_table(g):
    hyp = FRAME + CURV
    mask = _mask(g, hyp)
    with np.errstate(all="ignore"):
        diff = _gauss_line2(g) - _gauss_line2(g, literal=True)
    return {
        "name": "gauss_curvature_readings",
        "role": "diagnostic",
        "hypotheses": list(hyp),
        "evaluated": int(np.count_nonzero(mask)),
        "readings": ["sin^2 alpha cot^2 beta", "sin^2 alpha cot(beta^2)"],
        "sup_difference": _sup(diff, mask),
    }


def corollary_table(n=1000, seed=0):
    return {
        "name": "corollary_tuples",
        "role": "asserted",
        "samples": n,
        "seed": seed,
        "sup_residual": corollary_tuple_residual(n, seed),
        "tol": 1e-12,
    }


# ---------------------------------------------------------------------------
# report


@dataclass
class ResidualReport:
    surface: dict
    grid: int
    tol: float
    identities: list
    consistency_tables: list
    degeneracy: dict

    def to_dict(self):
        return {
            "surface": self.surface, "grid": self.grid, "tol": self.tol,
            "identities": [r.to_dict() for r in self.identities],
            "consistency_tables": self.consistency_tables,
            "degeneracy": self.degeneracy,
        }

    def result(self, name):
        for r in self.identities:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def all_skipped(self):
        return all(r.evaluated == 0 for r in self.identities)

    @property
    def failures(self):
        return [r for r in self.identities if r.role == "asserted" and r.verdict == "FAIL"]

    def exit_code(self):
        if self.all_skipped:
            return 3
        if self.failures:
            return 2
        if any(t.get("role") == "asserted" and t.get("sup_residual", 0) >= t.get("tol", np.inf)
               for t in self.consistency_tables):
            return 2
        return 0


def run_report(surface, grid_n=32, tol=DEFAULT_TOL):
    """Evaluate every registered identity on one surface; failures are verdicts."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    g = evaluate(surface, grid_n)
    results = []
    try:
        _require_minimal(g)
        minimal_note = ""
    except NotMinimal as exc:
        minimal_note = str(exc)
    for c in REGISTRY:
        r = run_check(c, g, tol)
        if c.group == "minimal_forms" and minimal_note:
            r.verdict, r.note = "SKIP", "NotMinimal: " + minimal_note
            r.sup = r.mean = None
            r.skipped, r.evaluated, r.nonfinite = g.size, 0, 0
        results.append(r)
    bdeg = int(np.count_nonzero(g.beta_degenerate))
    adeg = int(np.count_nonzero(g.alpha_degenerate))
    status = "ok"
    if bdeg == g.size:
        status = "BetaDegenerate at every point"
    elif adeg == g.size:
        status = "AlphaDegenerate at every point"
    degeneracy = {
        "points": g.size,
        "beta_degenerate": bdeg,
        "alpha_degenerate": adeg,
        "legendrian": int(np.count_nonzero(g.legendrian)),
        "status": status,
    }
    tables = [laplacian_table(g), codazzi_table(g), gauss_readings_table(g), corollary_table()]
    return ResidualReport(surface.descriptor(), grid_n, float(tol), results, tables, degeneracy)
