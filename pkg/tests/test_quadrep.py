import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracwave import quadrep as qr
from diracwave.errors import DomainError

# exact values from 2^{b-1} B(a, b-a) e^{i rho} 1F1(a; b; -2 i rho), a = gamma - i nu,
# b = 2 gamma + 1 (eps = 1 via t = (1+t) - 1), mpmath at 40 digits
INTEGRAL_REF = [
    (0, 1.0, 0.0, 2.0, complex(0.9092974268256817, 0.8707955499599832)),
    (1, 1.0, 0.0, 2.0, complex(-0.03850187686569846, -0.8707955499599832)),
    (0, 0.3, 0.5, 7.0, complex(-0.3606130370383917, 0.187131861967884)),
    (1, 0.3, -0.5, 7.0, complex(0.8647878642068227, 1.6721038731591935)),
    (0, 2.5, 0.9, 15.0, complex(0.0008314065402026327, 0.0016814926389418566)),
    (1, 4.2, 0.2, -3.0, complex(-0.02910720107688183, 0.18197970661833499)),
    (0, 0.14, 0.99, 40.0, complex(-0.012169419670148576, 0.07427833473353775)),
    (1, 0.14, -0.99, 25.0, complex(-1.473864829554914, -0.8239786874648763)),
    (1, 6.0, 0.0, 0.5, complex(-0.0554199346247724, -0.028180096861985394)),
]


@pytest.mark.parametrize("eps, gamma, nu, rho, ref", INTEGRAL_REF)
def test_integral_reference(eps, gamma, nu, rho, ref):
    val, err = qr.integral_direct(qr.IntegralParams(eps, gamma, nu, rho), return_error=True)
    assert abs(val - ref) <= 1e-11 * abs(ref)
    assert err <= 1e-9 * abs(ref)


def _kummer_closed_form(gamma, nu, rho):
    # int_{-1}^{1} e^{-i rho t}(1+t)^{a-1}(1-t)^{b-a-1} dt = 2^{b-1} B(a, b-a) e^{i rho} 1F1(a; b; -2 i rho)
    a = mp.mpc(gamma, -nu)
    b = 2 * gamma + 1
    return complex(mp.power(2, b - 1) * mp.beta(a, b - a) * mp.exp(1j * rho) * mp.hyp1f1(a, b, -2j * rho))


@settings(max_examples=25, deadline=None)
@given(gamma=st.floats(0.15, 6.0), nu=st.floats(-0.95, 0.95), rho=st.floats(-20.0, 20.0))
def test_integral_matches_kummer_closed_form(gamma, nu, rho):
    ref = _kummer_closed_form(gamma, nu, rho)
    val = qr.integral_direct(qr.IntegralParams(0, gamma, nu, rho))
    assert abs(val - ref) <= 1e-9 * abs(ref) + 1e-13


def test_phase_form_equals_integrand():
    p = qr.IntegralParams(1, 2.3, 0.4, 5.5)
    t = np.linspace(-0.99, 0.99, 101)
    np.testing.assert_allclose(qr.integrand_phase_form(p, t), qr.integrand(p, t), rtol=1e-12)


def test_g_eps():
    z = np.array([0.3 + 0.2j, -0.5 - 1.0j])
    nu = 0.6
    ref = z * (1 + z) ** (-1j * nu) * (1 - z) ** (1 + 1j * nu)
    np.testing.assert_allclose(qr.g_eps(1, nu, z), ref, rtol=1e-14)


def test_params_validation():
    with pytest.raises(DomainError):
        qr.IntegralParams(2, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        qr.IntegralParams(0, -0.1, 0.0, 1.0)
    with pytest.raises(DomainError):
        qr.IntegralParams(0, 1.0, 1.2, 1.0)
    with pytest.raises(DomainError):
        qr.integrand(qr.IntegralParams(0, 1.0, 0.0, 1.0), 1.0)
    assert math.isclose(qr.IntegralParams(0, 3.0, 0.0, 4.0).q, 0.5)
