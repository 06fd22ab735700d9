"""Homogeneous tori in S^5: minimality, constrained solving and the circle equation.

The searched ansatz is ``X_k = r_k exp(i (m_k u + n_k v))``.  Minimality and
the measured invariants always come from the generic frame pipeline; the
solver never uses closed-form shortcuts for them.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .calculus import ParamJet, jet
from .catalog import HomogeneousTorus
from .errors import GeometryError, InfeasibleConstraint, NoConvergence
from .surface import adapted_frame, fundamental_data, mean_curvature, point_sample
from .taylor import Taylor

CONSTRAINTS = ("none", "a_zero", "b_zero", "target_beta")
N_STARTS = 8
MAX_ITER = 500
MIN_RES_TOL = 1e-8
CONSTRAINT_TOL = 1e-6
# a^2 above -ADMISSIBLE_EPS counts as admissible so the pi/4 boundary survives roundoff
ADMISSIBLE_EPS = 1e-12


@dataclass
class CircleSample:
    beta: float
    a: float
    b: float
    residual: float


def make_torus(r, M, name="homogeneous"):
    """Validated homogeneous torus (raises InvalidRadii / DegenerateExponents)."""
    return HomogeneousTorus(r=r, M=M, name=name)


def circle_center(beta):
    return np.cos(beta) / (1 + np.sin(beta) ** 2)


def circle_radius_sq(beta):
    s2 = np.sin(beta) ** 2
    return 2 * s2 * s2 / (1 + s2) ** 2


def circle_residual(beta, a, b):
    """a^2 + (b - cos(beta) / (1 + sin^2 beta))^2 - 2 sin^4(beta) / (1 + sin^2 beta)^2."""
    return a * a + (b - circle_center(beta)) ** 2 - circle_radius_sq(beta)


def circle_sample(beta, a, b):
    return CircleSample(float(beta), float(a), float(b), float(circle_residual(beta, a, b)))


def family_branches(beta):
    """Closed-form members of the circle at contact angle ``beta``.

    ``b_zero_a2`` is the a^2 forced by b = 0 (negative means no such torus);
    ``a_zero_b`` are the two b values allowed when a = 0.
    """
    c, r2 = circle_center(beta), circle_radius_sq(beta)
    a2 = r2 - c * c
    r = np.sqrt(r2)
    return {
        "b_zero_a2": a2,
        "b_zero_admissible": np.asarray(a2) > -ADMISSIBLE_EPS,
        "a_zero_b": (c - r, c + r),
    }


def b_zero_boundary():
    """The contact angle where the b = 0 branch opens, from 2 sin^4 = cos^2.

    With s = sin^2 beta this is (2s - 1)(s + 1) = 0, so s = 1/2.
    """
    return float(np.arcsin(np.sqrt(0.5)))


def write_circle_csv(samples, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beta", "a", "b", "residual"])
        for s in samples:
            w.writerow([format(x, ".17g") for x in (s.beta, s.a, s.b, s.residual)])


# ---------------------------------------------------------------------------
# measurement


def probe_jet(torus, n):
    u, v = torus.grid(n)
    return jet(torus, (u, v), order=3)


def minimality_residual(torus, n=8):
    """max |H| over an n x n probe grid."""
    J = probe_jet(torus, n)
    frame = adapted_frame(J, strict=False)
    _, H = mean_curvature(fundamental_data(J, frame), frame)
    return float(np.max(H))


def measure(torus, n=16):
    """Invariants of a torus over an n x n probe grid plus their spread."""
    J = probe_jet(torus, n)
    frame = adapted_frame(J, strict=False)
    data = fundamental_data(J, frame)
    ps = point_sample(J, frame, data)
    out = {"degenerate": bool(np.any(frame.degenerate))}
    for key in ("beta", "alpha", "a", "b", "H_norm", "K_intrinsic", "K_extrinsic"):
        x = getattr(ps, key)
        out[key] = float(x[0])
        out[key + "_spread"] = float(np.max(x) - np.min(x))
    out["H_max"] = float(np.max(ps.H_norm))
    out["circle_residual"] = float(circle_residual(out["beta"], out["a"], out["b"]))
    out["integer_exponents"] = bool(np.all(np.abs(torus.M - np.round(torus.M)) < 1e-6))
    return out


# ---------------------------------------------------------------------------
# solver


def _unpack(x):
    r = np.abs(x[..., :3])
    r = r / np.linalg.norm(r, axis=-1, keepdims=True)
    M = x[..., 3:].reshape(x.shape[:-1] + (2, 3))
    return r, M


def _project(x):
    r, M = _unpack(x)
    return np.concatenate([r, M.reshape(M.shape[:-2] + (6,))], axis=-1)


def _batch_residuals(x, constraint, beta_target):
    """Residual vectors for a batch of parameter vectors, evaluated at (0, 0)."""
    r, M = _unpack(x)
    B = x.shape[0]
    w = r * r
    m, n = M[:, 0], M[:, 1]
    E, F, G = (np.sum(p * q * w, axis=-1) for p, q in ((m, m), (m, n), (n, n)))
    det = E * G - F * F
    bad = det <= 1e-8
    # evaluate degenerate candidates on a harmless stand-in; they are penalized below
    r = np.where(bad[:, None], 1 / np.sqrt(3), r)
    M = np.where(bad[:, None, None], np.array([[1.0, 0, -1], [0, 1, -1]]), M)
    u = Taylor.variable(np.zeros(B), 0, 3)
    v = Taylor.variable(np.zeros(B), 1, 3)
    comps = [r[:, k] * np.exp(1j * (M[:, 0, k] * u + M[:, 1, k] * v)) for k in range(3)]
    X = Taylor.stack(comps, axis=-1)
    J = ParamJet(np.zeros(B), np.zeros(B), 3, X.derivatives())
    frame = adapted_frame(J, strict=False)
    data = fundamental_data(J, frame)
    H, _ = mean_curvature(data, frame)
    parts = [H.real, H.imag, (det - 1.0)[:, None]]
    if constraint in ("a_zero", "b_zero", "target_beta"):
        parts.append((frame.beta - beta_target)[:, None])
    if constraint == "a_zero":
        parts.append(data.a[:, None])
    if constraint == "b_zero":
        parts.append(data.b[:, None])
    res = np.concatenate(parts, axis=-1)
    res[bad] = 1e3
    res[frame.degenerate] += 1.0
    return res


def _check_constraint(constraint, beta_target):
    if constraint not in CONSTRAINTS:
        raise ValueError(f"unknown constraint {constraint!r}")
    if constraint == "none":
        return
    if beta_target is None:
        raise InfeasibleConstraint(f"constraint {constraint!r} needs a target contact angle")
    lo, hi = {
        "b_zero": (np.pi / 4, np.pi / 2),
        "a_zero": (0.0, np.pi / 2),
        "target_beta": (0.0, np.pi / 2),
    }[constraint]
    ok = lo < beta_target < hi or (constraint == "target_beta" and beta_target == hi)
    if not ok:
        raise InfeasibleConstraint(
            f"beta* = {beta_target!r} is outside the admissible range ({lo:.17g}, {hi:.17g}) for {constraint}"
        )


def _levenberg_marquardt(x0, constraint, beta_target, max_iter=MAX_ITER, step=1e-6, tol=1e-13):
    """Damped Gauss-Newton on all starts at once; one row of ``x0`` per start."""
    x = _project(x0)
    S, P = x.shape
    lam = np.full(S, 1e-3)
    res = _batch_residuals(x, constraint, beta_target)
    cost = np.sum(res * res, axis=-1)
    active = np.ones(S, dtype=bool)
    eye = np.eye(P)
    for _ in range(max_iter):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        xa = x[idx]
        pert = np.concatenate([xa[:, None, :] + step * eye, xa[:, None, :] - step * eye], axis=1)
        rp = _batch_residuals(pert.reshape(-1, P), constraint, beta_target).reshape(len(idx), 2 * P, -1)
        Jac = (rp[:, :P] - rp[:, P:]).transpose(0, 2, 1) / (2 * step)
        ra = res[idx]
        JtJ = np.einsum("sri,srj->sij", Jac, Jac)
        g = np.einsum("sri,sr->si", Jac, ra)
        diag = np.einsum("sii->si", JtJ)
        A = JtJ + lam[idx, None, None] * (diag[:, :, None] * eye + 1e-12 * eye)
        delta = -np.linalg.solve(A, g[..., None])[..., 0]
        trial = _project(xa + delta)
        rt = _batch_residuals(trial, constraint, beta_target)
        ct = np.sum(rt * rt, axis=-1)
        better = ct < cost[idx]
        acc = idx[better]
        x[acc], res[acc], cost[acc] = trial[better], rt[better], ct[better]
        lam[acc] = np.maximum(lam[acc] / 3, 1e-12)
        rej = idx[~better]
        lam[rej] = lam[rej] * 4
        done = (cost[idx] < tol**2) | (lam[idx] > 1e12) | (np.linalg.norm(delta, axis=-1) < 1e-15)
        active[idx[done]] = False
    return x, cost


def _seeds(seed):
    rng = np.random.default_rng(seed)
    starts = []
    for child in np.random.SeedSequence(int(rng.integers(2**63))).spawn(N_STARTS):
        g = np.random.default_rng(child)
        r = g.uniform(0.2, 1.0, size=3)
        M = g.normal(size=6)
        starts.append(np.concatenate([r, M]))
    return np.array(starts)


def solve_minimal(constraint="none", beta_target=None, seed=0, max_iter=MAX_ITER):
    """Multi-start search for a minimal homogeneous torus meeting ``constraint``.

    Returns ``(torus, measured)`` where ``measured`` comes from :func:`measure`.
    Raises :class:`InfeasibleConstraint` before solving when the target angle
    is outside the branch window, and :class:`NoConvergence` (carrying the best
    candidate) when no start reaches the tolerances.
    """
    _check_constraint(constraint, beta_target)
    bt = 0.0 if beta_target is None else float(beta_target)
    x, _ = _levenberg_marquardt(_seeds(seed), constraint, bt, max_iter=max_iter)
    candidates = []
    for row in x:
        r, M = _unpack(row)
        r = r / np.linalg.norm(r)
        try:
            torus = make_torus(r, M)
            measured = measure(torus)
        except (ValueError, GeometryError):
            continue
        cres = _constraint_residual(measured, constraint, bt)
        total = measured["H_max"] + cres
        ok = (not measured["degenerate"]) and measured["H_max"] < MIN_RES_TOL and cres < CONSTRAINT_TOL
        candidates.append((not ok, total, tuple(row.round(12)), torus, measured))
    if not candidates:
        raise NoConvergence("no start produced an admissible torus", best=None)
    candidates.sort(key=lambda c: c[:3])
    failed, _, _, torus, measured = candidates[0]
    measured["constraint"] = constraint
    measured["beta_target"] = beta_target
    measured["constraint_residual"] = _constraint_residual(measured, constraint, bt)
    if failed:
        raise NoConvergence(
            f"best start reached |H| = {measured['H_max']:.3g}, constraint residual "
            f"{measured['constraint_residual']:.3g}",
            best=(torus, measured),
        )
    return torus, measured


def _constraint_residual(measured, constraint, beta_target):
    if constraint == "none":
        return 0.0
    res = abs(measured["beta"] - beta_target)
    if constraint == "a_zero":
        res = max(res, abs(measured["a"]))
    elif constraint == "b_zero":
        res = max(res, abs(measured["b"]))
    return float(res)
