import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contactangle.ambient import inner
from contactangle.calculus import ScalarJet2, jet, laplace_beltrami, surface_gradient
from contactangle.errors import DegenerateMetric, NonFinite
from contactangle.surface import adapted_frame, metric_jets, point_sample
from contactangle.taylor import Taylor

FLAT = tuple(ScalarJet2.constant(x) for x in (1.0, 0.0, 1.0))


def _circle(u, v):
    return (np.exp(1j * u) + 0 * v, 0 * u, 0 * u)


def test_exponential_jet():
    J = jet(_circle, (0.0, 0.0), order=2)
    np.testing.assert_allclose(J.d(1, 0), [1j, 0, 0])
    np.testing.assert_allclose(J.d(2, 0), [-1, 0, 0])
    np.testing.assert_allclose(J.d(0, 1), [0, 0, 0])


def test_constant_map_jet():
    c = np.array([0.6, 0.8j, 0])
    J = jet(lambda u, v: tuple(ck + 0 * u + 0 * v for ck in c), (0.4, 1.0), order=3)
    assert np.all(J.table[1:] == 0)
    np.testing.assert_allclose(J.X, c)


def test_nonfinite_raises():
    with np.errstate(all="ignore"), pytest.raises(NonFinite):
        jet(lambda u, v: (np.log(u), 0 * v, 0 * v), (0.0, 0.0), order=1)


def test_sphere_constraints_hold(trig_corpus):
    rng = np.random.default_rng(0)
    u, v = rng.uniform(0, 2 * np.pi, (2, 50))
    J = jet(trig_corpus[0], (u, v), order=3)
    X, Xu, Xuu = J.X, J.d(1, 0), J.d(2, 0)
    assert np.max(np.abs(inner(X, X) - 1)) < 1e-10
    assert np.max(np.abs(inner(X, Xu))) < 1e-10
    assert np.max(np.abs(inner(Xu, Xu) + inner(X, Xuu))) < 1e-10


def _rel(a, b):
    return np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))


def test_legendrian_fd_matches_taylor(legendrian):
    Jt = jet(legendrian, (0.3, 0.7), method="taylor")
    Jf = jet(legendrian, (0.3, 0.7), method="finite_difference")
    assert _rel(Jf.table, Jt.table) < 1e-6


def test_fd_oracle_on_trig_corpus(trig_corpus):
    rng = np.random.default_rng(11)
    worst = 0.0
    for surf in trig_corpus:
        u, v = rng.uniform(0, 2 * np.pi, (2, 100))
        Jt = jet(surf, (u, v), method="taylor")
        Jf = jet(surf, (u, v), method="finite_difference")
        worst = max(worst, _rel(Jf.table, Jt.table))
    assert worst < 1e-6


def test_gradient_examples():
    assert surface_gradient(ScalarJet2.constant(2.0), FLAT) == (0.0, 0.0)
    f = ScalarJet2(0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    assert surface_gradient(f, FLAT) == (1.0, 0.0)


def test_laplacian_examples():
    assert laplace_beltrami(ScalarJet2.constant(3.0), FLAT) == 0
    f = ScalarJet2(0.0, 0.0, 0.0, 2.0, 0.0, 2.0)  # u^2 + v^2 at the origin
    assert laplace_beltrami(f, FLAT) == 4


def test_degenerate_metric_raises():
    bad = tuple(ScalarJet2.constant(x) for x in (1.0, 1.0, 1.0))
    with pytest.raises(DegenerateMetric):
        surface_gradient(ScalarJet2.constant(1.0), bad)
    with pytest.raises(DegenerateMetric):
        laplace_beltrami(ScalarJet2.constant(1.0), bad)


def test_beta_gradient_and_laplacian_vanish_on_legendrian(legendrian):
    J = jet(legendrian, (0.3, 0.7))
    ps = point_sample(J)
    metric = metric_jets(J)
    beta = ScalarJet2.from_taylor(adapted_frame(J).fields["beta"])
    g1, g2 = surface_gradient(beta, metric)
    assert abs(g1) < 1e-12 and abs(g2) < 1e-12
    assert abs(laplace_beltrami(beta, metric)) < 1e-12
    assert abs(ps.lap_beta) < 1e-12


coef = st.floats(-3, 3, allow_nan=False)


@given(st.lists(coef, min_size=12, max_size=12), coef, coef)
@settings(max_examples=100, deadline=None)
def test_operators_are_linear(c, s, t):
    metric = (ScalarJet2(1.3, 0.2, -0.1, 0, 0, 0), ScalarJet2(0.1, 0.05, 0.3, 0, 0, 0),
              ScalarJet2(0.9, -0.2, 0.4, 0, 0, 0))
    f, g = ScalarJet2(*c[:6]), ScalarJet2(*c[6:])
    h = s * f + t * g
    for op in (lambda x: np.array(surface_gradient(x, metric)), lambda x: laplace_beltrami(x, metric)):
        np.testing.assert_allclose(op(h), s * op(f) + t * op(g), atol=1e-12 * (1 + abs(s) + abs(t)) * 10)


def _fd4(a, h, axis):
    """Fourth-order central first derivative on the interior of a grid array."""
    def sh(k):
        return np.roll(a, -k, axis=axis)
    return (-sh(2) + 8 * sh(1) - 8 * sh(-1) + sh(-2)) / (12 * h)


def test_laplacian_against_grid_finite_differences(trig_corpus):
    """Taylor Laplace-Beltrami of beta vs a pure finite-difference pipeline on sampled values."""
    surf = trig_corpus[3]
    n, lo, width = 128, 0.4, 0.25
    s = np.linspace(lo, lo + width, n)
    h = s[1] - s[0]
    uu, vv = np.meshgrid(s, s, indexing="ij")
    J = jet(surf, (uu, vv), order=3)
    ps = point_sample(J)
    assert not np.any(ps.beta_degenerate)
    # independent pipeline: point samples of X and beta only
    X = np.stack(surf(uu, vv), axis=-1)
    beta = ps.beta
    Xu, Xv = _fd4(X, h, 0), _fd4(X, h, 1)
    E, F, G = inner(Xu, Xu), inner(Xu, Xv), inner(Xv, Xv)
    det = E * G - F * F
    sq = np.sqrt(det)
    bu, bv = _fd4(beta, h, 0), _fd4(beta, h, 1)
    flux_u = sq * (G * bu - F * bv) / det
    flux_v = sq * (E * bv - F * bu) / det
    lap = (_fd4(flux_u, h, 0) + _fd4(flux_v, h, 1)) / sq
    core = (slice(6, -6), slice(6, -6))
    assert np.max(np.abs(lap[core] - ps.lap_beta[core])) < 1e-4
