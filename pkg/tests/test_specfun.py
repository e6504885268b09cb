import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from diracwave import specfun as sf
from diracwave.errors import DomainError, RangeError

# mpmath.loggamma at 40 digits
LOGGAMMA = [
    (0.5, complex(0.5723649429247001, 0.0)),
    (3.7, complex(1.428072326665388, 0.0)),
    ((2.5 + 1.3j), complex(-0.10630409567296853, 0.9922582256437686)),
    ((0.3 - 7j), complex(-10.465674446702918, -6.310309647040768)),
    ((-2.5 + 0.4j), complex(-0.6712684153790344, -8.982366885720555)),
    ((40 + 25j), complex(99.17881962308392, 93.4076390853069)),
    ((1.2 + 0.0001j), complex(-0.08537409634020185, -2.8903989412879484e-05)),
]

# mpmath.hyp1f1 at 40 digits: (a, b, z, value)
KUMMER = [
    ((1.5 - 0.3j), (4 + 0j), -6j, complex(-0.06266019717700866, -0.2162202363980323)),
    ((3.2 + 0.7j), (7.4 + 0j), -20j, complex(0.043630905114477994, 0.027101100351007414)),
    ((0.14 - 0.99j), (1.28 + 0j), 10j, complex(-5.099162748825316, 2.5926829092671495)),
    ((20 + 0.5j), (41 + 0j), -50j, complex(1.5155138056235426e-05, 8.465616806401944e-05)),
    ((1 + 0j), (2 + 0j), (3 + 0j), complex(6.361845641062556, 0.0)),
    ((-2 + 0j), (3 + 0.5j), (1.5 - 1j), complex(0.162993762993763, 0.5471933471933472)),
]


def _same_mod_2pi(a: complex, b: complex, tol: float) -> bool:
    d = a - b
    return abs(d.real) <= tol * max(1.0, abs(b.real)) and \
        abs(cmath.phase(cmath.exp(1j * d.imag))) <= tol * max(1.0, abs(b))


@pytest.mark.parametrize("z, ref", LOGGAMMA)
def test_loggamma_reference(z, ref):
    assert _same_mod_2pi(complex(sf.complex_loggamma(z)), ref, 1e-13)


def test_loggamma_vectorized_matches_scalar():
    zs = np.array([z for z, _ in LOGGAMMA], dtype=complex)
    out = sf.complex_loggamma(zs)
    assert out.shape == zs.shape
    for z, v in zip(zs, out):
        assert v == sf.complex_loggamma(z)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30))
def test_loggamma_recurrence(x, y):
    z = complex(x, y)
    if abs(z) < 1e-3 or (abs(y) < 1e-3 and x <= 0 and abs(x - round(x)) < 1e-3):
        return
    lhs = complex(sf.complex_loggamma(z + 1))
    rhs = complex(sf.complex_loggamma(z)) + cmath.log(z)
    assert _same_mod_2pi(lhs, rhs, 1e-11)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 60), st.floats(-60, 60))
def test_loggamma_against_scipy(x, y):
    z = complex(x, y)
    assert _same_mod_2pi(complex(sf.complex_loggamma(z)), complex(special.loggamma(z)), 1e-12)


def test_gamma_poles_and_overflow():
    with pytest.raises(DomainError):
        sf.complex_gamma(-3.0)
    with pytest.raises(DomainError):
        sf.complex_loggamma(0.0)
    with pytest.raises(RangeError):
        sf.complex_gamma(200.0)
    assert abs(sf.complex_gamma(5.0) - 24.0) < 1e-12


@pytest.mark.parametrize("a, b, z, ref", KUMMER)
def test_kummer_reference(a, b, z, ref):
    val, err = sf.kummer_1f1(a, b, z, return_error=True)
    assert abs(val - ref) <= 1e-13 * abs(ref)
    assert err < 1e-12


def test_kummer_elementary_cases():
    z = np.linspace(-5, 5, 11) + 0.3j
    np.testing.assert_allclose(sf.kummer_1f1(1.0, 1.0, z), np.exp(z), rtol=1e-14)
    # 1F1(1; 2; z) = (e^z - 1)/z
    np.testing.assert_allclose(sf.kummer_1f1(1.0, 2.0, z), np.expm1(z) / z, rtol=1e-14)


def test_kummer_kummer_transformation():
    a, b, z = 2.3 - 0.8j, 5.6, 14j
    lhs = sf.kummer_1f1(a, b, z)
    rhs = np.exp(z) * sf.kummer_1f1(b - a, b, -z)
    assert abs(lhs - rhs) <= 1e-13 * abs(lhs)


def test_kummer_rejects_bad_b():
    with pytest.raises(DomainError):
        sf.kummer_1f1(1.0, -2.0, 1.0)


def test_whittaker_definition():
    alpha, mu, z = 0.3j, 1.7, 2.0 - 1.0j
    ref = np.exp(-z / 2) * z ** (0.5 + mu) * sf.kummer_1f1(0.5 + mu - alpha, 1 + 2 * mu, z)
    assert abs(sf.whittaker_m(alpha, mu, z) - ref) < 1e-15 * abs(ref)


@pytest.mark.parametrize("l", [0, 1, 2, 7, 20, 45])
def test_spherical_bessel_against_scipy(l):
    x = np.geomspace(1e-3, 300, 200)
    ours = sf.spherical_bessel(l, x)
    ref = special.spherical_jn(l, x)
    assert np.all(np.abs(ours - ref) <= 1e-11 * np.abs(ref) + 1e-15)
    d = sf.spherical_bessel_derivative(l, x)
    np.testing.assert_allclose(d, special.spherical_jn(l, x, derivative=True), rtol=1e-9, atol=1e-13)


def test_spherical_bessel_domain():
    with pytest.raises(DomainError):
        sf.spherical_bessel(61, 1.0)
    with pytest.raises(DomainError):
        sf.spherical_bessel(2, 0.0)
    assert isinstance(sf.spherical_bessel(3, 2.0), float)
