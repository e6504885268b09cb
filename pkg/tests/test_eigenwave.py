import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from diracwave import eigenwave as ew
from diracwave.errors import DomainError

# S = G + iF from the closed form, evaluated with mpmath at 50 digits
PSI_REF = [
    (1, 0.0, 0.7, complex(0.6507581360086939, 0.1570471983461153)),
    (1, 0.5, 3.0, complex(-0.2062566040332826, 0.05543597762290183)),
    (-1, 0.5, 3.0, complex(-0.05543597762290183, -0.2062566040332826)),
    (-2, 0.3, 12.5, complex(0.0471415183261367, -0.03891536564841301)),
    (3, -0.7, 0.05, complex(5.4532191453198603e-05, -6.047446573656025e-06)),
    (5, 0.9, 40.0, complex(-0.015784072092059523, -0.009961404940039612)),
    (-8, 0.2, 7.0, complex(-0.034948788839717665, 0.06672352411877078)),
    (20, 0.5, 30.0, complex(0.021939012853014948, 0.002693402748721767)),
    (2, 0.6, -4.0, complex(0.16969293068287325, -0.1666276112849113)),
    (-3, -0.4, -9.0, complex(-0.04448999455650375, 0.04964269567763417)),
    (1, 0.99, 150.0, complex(0.0033481787366749856, -0.0032962466796526524)),
    (-12, 0.95, 2.0, complex(-2.0611563724579673e-09, 1.6999259298976775e-08)),
]


@pytest.mark.parametrize("k, nu, rho, ref", PSI_REF)
def test_auto_matches_reference(k, nu, rho, ref):
    ch = ew.make_channel(k, nu)
    ev = ew.evaluate(ch, rho)
    assert abs(ev.S - ref) <= 1e-10 * abs(ref)
    assert ev.psi.F == ev.S.imag and ev.psi.G == ev.S.real


@pytest.mark.parametrize("k, nu, rho, ref", PSI_REF)
def test_every_applicable_backend_matches_reference(k, nu, rho, ref):
    ch = ew.make_channel(k, nu)
    for m in ew.applicable_methods(ch, rho):
        assert abs(ew.evaluate(ch, rho, m).S - ref) <= 1e-8 * abs(ref), m


def test_psi_array_matches_pointwise():
    ch = ew.make_channel(-3, 0.45)
    rho = np.concatenate([-np.geomspace(0.01, 500, 15), np.geomspace(0.01, 500, 25)])
    S, dS = ew.psi_array(ch, rho, derivative=True)
    for r, s, d in zip(rho, S, dS):
        ev = ew.evaluate(ch, r, derivative=True)
        assert abs(s - ev.S) <= 1e-10 * abs(ev.S)
        assert abs(d - ev.dS) <= 1e-9 * (abs(ev.dS) + abs(ev.S))


@pytest.mark.parametrize("k", [1, 2, 5, -1, -4])
def test_bessel_reduction(k):
    ch = ew.make_channel(k, 0.0)
    rho = np.geomspace(0.05, 200, 40)
    S = ew.psi_array(ch, rho)
    # k > 0: (F, G) = (j_k, j_{k-1})/sqrt2;  k < 0: (F, G) = (j_{|k|-1}, -j_{|k|})/sqrt2
    n = abs(k)
    F_ref = special.spherical_jn(n if k > 0 else n - 1, rho) / math.sqrt(2)
    G_ref = special.spherical_jn(n - 1 if k > 0 else n, rho) / math.sqrt(2) * (1 if k > 0 else -1)
    np.testing.assert_allclose(S.imag, F_ref, rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(S.real, G_ref, rtol=1e-10, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(-15, 15).filter(lambda v: v != 0), nu=st.floats(-0.95, 0.95),
       rho=st.floats(0.02, 300))
def test_radial_ode_residual(k, nu, rho):
    ch = ew.make_channel(k, nu)
    ev = ew.evaluate(ch, rho, derivative=True)
    F, G = ev.S.imag, ev.S.real
    dF, dG = ev.dS.imag, ev.dS.real
    r1 = -nu / rho * F - dG + (k - 1) / rho * G - F
    r2 = dF + (k + 1) / rho * F - nu / rho * G - G
    scale = abs(ev.S) * (1 + abs(k) / rho) + abs(ev.dS)
    assert abs(r1) + abs(r2) <= 1e-9 * scale


@settings(max_examples=30, deadline=None)
@given(k=st.integers(-10, 10).filter(lambda v: v != 0), nu=st.floats(-0.9, 0.9),
       rho=st.floats(0.05, 100))
def test_reflection_symmetry(k, nu, rho):
    # S(-rho; nu) = S(rho; -nu) up to a unimodular constant phase
    a = ew.evaluate(ew.make_channel(k, nu), -rho).S
    b = ew.evaluate(ew.make_channel(k, -nu), rho).S
    assert abs(abs(a) - abs(b)) <= 1e-9 * abs(b)


@pytest.mark.parametrize("k, nu", [(1, 0.5), (-1, -0.5), (4, 0.9), (-7, 0.2)])
def test_outer_amplitude(k, nu):
    # |psi| -> 1/(sqrt 2 rho) for rho -> +-inf
    ch = ew.make_channel(k, nu)
    for rho in (4000.0, -4000.0):
        assert abs(abs(ew.evaluate(ch, rho).S) * abs(rho) - 1 / math.sqrt(2)) < 5e-3


@pytest.mark.parametrize("k, nu, rho", [(1, 0.3, 0.5), (-2, 0.7, 6.0), (6, -0.4, 20.0)])
def test_realness_residue_small(k, nu, rho):
    assert ew.realness_residue(ew.make_channel(k, nu), rho) < 1e-13


def test_cross_validate_reports_gap():
    out = ew.cross_validate(ew.make_channel(-2, 0.5), 14.0, derivative=True)
    assert len(out["methods"]) >= 2
    assert out["gap"] < 1e-8
    assert not out["failures"]


def test_xi_branch():
    for k in (1, 3, 9):
        for nu in (-0.8, 0.0, 0.8):
            assert -math.pi / 2 < ew.make_channel(k, nu).xi <= math.pi / 2
            assert 0 < ew.make_channel(-k, nu).xi <= math.pi


def test_channel_domain_errors():
    with pytest.raises(DomainError):
        ew.make_channel(0, 0.3)
    with pytest.raises(DomainError):
        ew.make_channel(2, 1.5)
    with pytest.raises(DomainError):
        ew.make_channel(1, 1.0)
    with pytest.raises(DomainError):
        ew.evaluate(ew.make_channel(1, 0.2), 0.0)
    with pytest.raises(DomainError):
        ew.psi_array(ew.make_channel(1, 0.2), [1.0, float("nan")])


def test_reduced_small_matches_series():
    ch = ew.make_channel(-1, 0.7)
    rho = np.array([-0.4, -1e-3, 1e-5, 0.3])
    S = ew.psi_array(ch, rho)
    red = ew.reduced_small(ch, rho)
    np.testing.assert_allclose(red * np.abs(rho) ** (ch.gamma - 1), S, rtol=1e-13)
