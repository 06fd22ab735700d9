"""Truncated bivariate Taylor arithmetic.

A :class:`Taylor` holds the normalized coefficients ``c[p, q] = D^(p,q) f / (p! q!)``
of a field in the two chart parameters ``(u, v)``, truncated at total degree
``order``.  Coefficients are stored along a leading axis in graded order
``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), (3,0), ...``; trailing axes carry
batches (grid points) and vector components, with ordinary numpy broadcasting.

Elementary numpy ufuncs (``np.exp``, ``np.sin``, ``np.sqrt``, ...) dispatch to
:class:`Taylor`, so a map written against numpy works unchanged on jets::

    u = Taylor.variable(0.3, 0, order=3)
    v = Taylor.variable(0.7, 1, order=3)
    x = np.exp(1j * (u + 2 * v))
    x.derivative(1, 1)   # d^2/du dv at (0.3, 0.7)
"""

from functools import lru_cache
from math import factorial

import numpy as np

MAX_ORDER = 3


def n_coeffs(order):
    return (order + 1) * (order + 2) // 2


def index(p, q):
    d = p + q
    return d * (d + 1) // 2 + q


@lru_cache(maxsize=None)
def monomials(order):
    return tuple((d - q, q) for d in range(order + 1) for q in range(d + 1))


@lru_cache(maxsize=None)
def _product_plan(order):
    mons = monomials(order)
    left, right, out = [], [], []
    for i, (p1, q1) in enumerate(mons):
        for j, (p2, q2) in enumerate(mons):
            if p1 + q1 + p2 + q2 <= order:
                left.append(i)
                right.append(j)
                out.append(index(p1 + p2, q1 + q2))
    scatter = np.zeros((len(mons), len(out)))
    scatter[out, np.arange(len(out))] = 1.0
    return np.array(left), np.array(right), scatter


@lru_cache(maxsize=None)
def _partial_plan(order, axis):
    src, dst, fac = [], [], []
    for p, q in monomials(order - 1):
        if axis == 0:
            src.append(index(p + 1, q))
            fac.append(p + 1)
        else:
            src.append(index(p, q + 1))
            fac.append(q + 1)
        dst.append(index(p, q))
    return np.array(src), np.array(fac, dtype=float)


def _unary_derivatives(name, x0, order):
    """Derivatives f^(n)(x0), n = 0..order, of the named elementary function."""
    if name == "exp":
        e = np.exp(x0)
        return [e] * (order + 1)
    if name == "sin":
        s, c = np.sin(x0), np.cos(x0)
        return [s, c, -s, -c][: order + 1]
    if name == "cos":
        s, c = np.sin(x0), np.cos(x0)
        return [c, -s, -c, s][: order + 1]
    if name == "tan":
        t = np.tan(x0)
        s2 = 1 + t * t
        return [t, s2, 2 * t * s2, 2 * s2 * (1 + 3 * t * t)][: order + 1]
    if name == "log":
        return [np.log(x0), 1 / x0, -1 / x0**2, 2 / x0**3][: order + 1]
    if name == "arccos":
        w = 1 - x0 * x0
        return [
            np.arccos(x0),
            -(w**-0.5),
            -x0 * w**-1.5,
            -(1 + 2 * x0 * x0) * w**-2.5,
        ][: order + 1]
    raise KeyError(name)


def _power_derivatives(x0, p, order):
    out, coef = [], 1.0
    for n in range(order + 1):
        out.append(coef * x0 ** (p - n))
        coef *= p - n
    return out


class Taylor:
    """Truncated Taylor polynomial in (u, v) with array-valued coefficients."""

    __array_priority__ = 1000

    def __init__(self, coeffs, order):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"order must be in 0..{MAX_ORDER}, got {order}")
        coeffs = np.asarray(coeffs)
        if coeffs.shape[0] != n_coeffs(order):
            raise ValueError("coefficient axis does not match order")
        self.c = coeffs
        self.order = order

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, value, order):
        value = np.asarray(value)
        c = np.zeros((n_coeffs(order),) + value.shape, dtype=value.dtype)
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, axis, order):
        """The chart coordinate ``u`` (axis 0) or ``v`` (axis 1) expanded at ``value``."""
        value = np.asarray(value, dtype=float)
        c = np.zeros((n_coeffs(order),) + value.shape)
        c[0] = value
        if order >= 1:
            c[1 + axis] = 1.0
        return cls(c, order)

    @classmethod
    def from_derivatives(cls, table, order):
        """Build from a table of actual partial derivatives in graded order."""
        table = np.asarray(table)
        fac = np.array([factorial(p) * factorial(q) for p, q in monomials(order)])
        fac = fac.reshape((-1,) + (1,) * (table.ndim - 1))
        return cls(table[: n_coeffs(order)] / fac, order)

    # inspection -------------------------------------------------------------

    @property
    def value(self):
        return self.c[0]

    @property
    def shape(self):
        return self.c.shape[1:]

    @property
    def ndim(self):
        return self.c.ndim - 1

    @property
    def dtype(self):
        return self.c.dtype

    def coeff(self, p, q):
        return self.c[index(p, q)]

    def derivative(self, p, q):
        """The partial derivative D^(p,q) at the expansion point."""
        return self.c[index(p, q)] * (factorial(p) * factorial(q))

    def derivatives(self):
        """All partial derivatives up to ``order`` in graded order."""
        fac = np.array([factorial(p) * factorial(q) for p, q in monomials(self.order)])
        return self.c * fac.reshape((-1,) + (1,) * self.ndim)

    def __repr__(self):
        return f"Taylor(order={self.order}, shape={self.shape}, value={self.value!r})"

    # structural -------------------------------------------------------------

    def truncate(self, order):
        if order > self.order:
            raise ValueError("cannot raise the order of a truncated series")
        return Taylor(self.c[: n_coeffs(order)], order)

    def partial(self, axis):
        """Chart partial derivative; the result is valid to one lower order."""
        if self.order == 0:
            raise ValueError("order-0 series has no derivative")
        src, fac = _partial_plan(self.order, axis)
        fac = fac.reshape((-1,) + (1,) * self.ndim)
        return Taylor(self.c[src] * fac, self.order - 1)

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Taylor(self.c[(slice(None),) + key], self.order)

    def sum(self, axis=None):
        if axis is None:
            axes = tuple(range(1, self.c.ndim))
        else:
            axes = tuple(a + 1 if a >= 0 else a for a in np.atleast_1d(axis))
        return Taylor(self.c.sum(axis=axes), self.order)

    def conj(self):
        return Taylor(np.conj(self.c), self.order)

    conjugate = conj

    @property
    def real(self):
        return Taylor(np.real(self.c), self.order)

    @property
    def imag(self):
        return Taylor(np.imag(self.c), self.order)

    @staticmethod
    def stack(items, axis=-1):
        order = min(t.order for t in items if isinstance(t, Taylor))
        cs = [_coeffs(t, order) for t in items]
        nd = max(c.ndim for c in cs) - 1
        cs = [_lift(c, nd) for c in cs]
        shape = np.broadcast_shapes(*(c.shape for c in cs))
        cs = [np.broadcast_to(c, shape) for c in cs]
        ax = axis + 1 if axis >= 0 else axis
        return Taylor(np.stack(cs, axis=ax), order)

    @staticmethod
    def where(mask, a, b):
        """Pointwise select between two series; ``mask`` broadcasts over value axes."""
        order = min(t.order for t in (a, b) if isinstance(t, Taylor))
        mask = np.asarray(mask)
        ca, cb = _align(_coeffs(a, order), _coeffs(b, order))
        ca = _lift(ca, mask.ndim)
        return Taylor(np.where(mask, ca, cb), order)

    # arithmetic -------------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, Taylor):
            order = min(self.order, other.order)
            a, b = _align(self.c[: n_coeffs(order)], other.c[: n_coeffs(order)])
            return Taylor(op(a, b), order)
        other = np.asarray(other)
        a = _lift(self.c, other.ndim)
        shape = np.broadcast_shapes(a.shape, (1,) + other.shape)
        c = np.array(np.broadcast_to(a, shape), dtype=np.result_type(a, other))
        c[0] = op(c[0], other)
        return Taylor(c, self.order)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Taylor(-self.c, self.order)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            other = np.asarray(other)
            return Taylor(_lift(self.c, other.ndim) * other, self.order)
        order = min(self.order, other.order)
        left, right, scatter = _product_plan(order)
        a, b = _align(self.c, other.c)
        prod = a[left] * b[right]
        flat = prod.reshape(prod.shape[0], -1)
        out = (scatter @ flat).reshape((scatter.shape[0],) + prod.shape[1:])
        return Taylor(out, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            other = np.asarray(other)
            return Taylor(_lift(self.c, other.ndim) / other, self.order)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Taylor):
            return np.exp(p * np.log(self))
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Taylor.constant(np.ones(self.shape, dtype=self.dtype), self.order)
            for _ in range(int(p)):
                out = out * self
            return out
        return self._compose(_power_derivatives(self.value, p, self.order))

    def reciprocal(self):
        return self._compose(_power_derivatives(self.value, -1.0, self.order))

    def _compose(self, derivs):
        """Apply f given the derivatives of f at the constant term."""
        delta = Taylor(self.c.copy(), self.order)
        delta.c[0] = 0
        out = Taylor.constant(np.asarray(derivs[0]), self.order)
        power = None
        for n in range(1, self.order + 1):
            power = delta if power is None else power * delta
            out = out + power * (np.asarray(derivs[n]) / factorial(n))
        return out

    def apply(self, name):
        return self._compose(_unary_derivatives(name, self.value, self.order))

    # numpy protocol ---------------------------------------------------------

    _UNARY = {
        np.exp: "exp",
        np.sin: "sin",
        np.cos: "cos",
        np.tan: "tan",
        np.log: "log",
        np.arccos: "arccos",
    }

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs.get("out") is not None:
            return NotImplemented
        if ufunc in self._UNARY:
            return inputs[0].apply(self._UNARY[ufunc])
        if ufunc is np.sqrt:
            return inputs[0] ** 0.5
        if ufunc is np.reciprocal:
            return inputs[0].reciprocal()
        if ufunc is np.negative:
            return -inputs[0]
        if ufunc is np.conjugate:
            return inputs[0].conj()
        if ufunc is np.square:
            return inputs[0] * inputs[0]
        binary = {
            np.add: lambda a, b: a + b,
            np.subtract: lambda a, b: a - b,
            np.multiply: lambda a, b: a * b,
            np.true_divide: lambda a, b: a / b,
            np.power: lambda a, b: a**b,
        }
        if ufunc in binary:
            a, b = inputs
            if not isinstance(a, Taylor):
                a = Taylor.constant(np.asarray(a), b.order)
            return binary[ufunc](a, b)
        return NotImplemented


def _coeffs(x, order):
    if isinstance(x, Taylor):
        return x.c[: n_coeffs(order)]
    x = np.asarray(x)
    c = np.zeros((n_coeffs(order),) + x.shape, dtype=x.dtype)
    c[0] = x
    return c


def _lift(c, ndim):
    """Insert unit axes after the coefficient axis so value axes number at least ``ndim``."""
    extra = ndim - (c.ndim - 1)
    if extra <= 0:
        return c
    return c.reshape((c.shape[0],) + (1,) * extra + c.shape[1:])


def _align(a, b):
    nd = max(a.ndim, b.ndim) - 1
    return _lift(a, nd), _lift(b, nd)
