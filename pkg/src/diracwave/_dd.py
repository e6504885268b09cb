"""Vectorized double-double arithmetic on numpy arrays.

A double-double value is a pair ``(hi, lo)`` of float64 arrays with
``|lo| <= ulp(hi)/2``. Complex values are pairs of double-doubles. Only the
handful of operations the hypergeometric series needs are provided.
"""

from __future__ import annotations

import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def fast_two_sum(a, b):
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def add(x, y):
    s, e = two_sum(x[0], y[0])
    t, f = two_sum(x[1], y[1])
    e = e + t
    s, e = fast_two_sum(s, e)
    e = e + f
    return fast_two_sum(s, e)


def neg(x):
    return -x[0], -x[1]


def sub(x, y):
    return add(x, neg(y))


def mul(x, y):
    p, e = two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return fast_two_sum(p, e)


def mul_d(x, d):
    p, e = two_prod(x[0], d)
    e = e + x[1] * d
    return fast_two_sum(p, e)


def div(x, y):
    q1 = x[0] / y[0]
    r = sub(x, mul_d(y, q1))
    q2 = r[0] / y[0]
    r = sub(r, mul_d(y, q2))
    q3 = r[0] / y[0]
    q1, q2 = fast_two_sum(q1, q2)
    return add((q1, q2), (q3, np.zeros_like(q3)))


def from_float(a):
    a = np.asarray(a, dtype=float)
    return a, np.zeros_like(a)


# complex double-double: ((re_hi, re_lo), (im_hi, im_lo))

def cfrom(z):
    z = np.asarray(z, dtype=complex)
    return from_float(z.real.copy()), from_float(z.imag.copy())


def cadd(x, y):
    return add(x[0], y[0]), add(x[1], y[1])


def cmul(x, y):
    re = sub(mul(x[0], y[0]), mul(x[1], y[1]))
    im = add(mul(x[0], y[1]), mul(x[1], y[0]))
    return re, im


def cmul_d(x, z):
    """Multiply a complex double-double by an ordinary complex array."""
    zr = np.real(z)
    zi = np.imag(z)
    re = sub(mul_d(x[0], zr), mul_d(x[1], zi))
    im = add(mul_d(x[0], zi), mul_d(x[1], zr))
    return re, im


def cdiv(x, y):
    den = add(mul(y[0], y[0]), mul(y[1], y[1]))
    re = add(mul(x[0], y[0]), mul(x[1], y[1]))
    im = sub(mul(x[1], y[0]), mul(x[0], y[1]))
    return div(re, den), div(im, den)


def cadd_int(x, n):
    """``x + n`` for an exact integer ``n``."""
    return add(x[0], (np.full_like(x[0][0], float(n)), np.zeros_like(x[0][0]))), x[1]


def to_complex(x):
    return (x[0][0] + x[0][1]) + 1j * (x[1][0] + x[1][1])


def cabs_hi(x):
    return np.hypot(x[0][0], x[1][0])
