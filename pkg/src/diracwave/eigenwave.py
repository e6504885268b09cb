"""Generalized eigenfunctions psi_k = (F_k, G_k) of the radial Dirac-Coulomb operator.

    G + iF = sqrt(2) |Gamma(gamma+1+i nu)| / Gamma(2 gamma+1) e^{pi nu/2 + i(rho+xi)}
             |2 rho|^{gamma-1} 1F1(gamma - i nu, 2 gamma + 1, -2 i rho)

with gamma = sqrt(k^2 - nu^2) and e^{-2 i xi} = (gamma - i nu)/k; for rho < 0
the factor e^{pi nu/2} is taken as e^{-pi nu/2} (see _coulomb_log). Writing the
1F1 as an Euler integral gives S = G + iF = A(rho) I_0(rho), where
|A| = e^{pi nu/2} |rho|^{gamma-1} / (2^{gamma+1/2} |Gamma(gamma - i nu)|) and
I_eps is the integral of quadrep/saddle. Three backends evaluate S:
the 1F1 series, direct quadrature of I_eps and steepest descent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import quadrep, saddle
from .errors import AccuracyError, DomainError, RangeError
from .specfun import complex_loggamma, kummer_1f1

LN2 = math.log(2.0)

# backend applicability windows (see applicable_methods)
SERIES_MAX_RHO = 18.0
QUAD_MAX_RHO = 480.0
QUAD_MAX_LOSS = math.log(1e5)
SD_MIN_RHO = 12.0


class EvalMethod(str, Enum):
    SERIES = "series"
    QUADRATURE = "quadrature"
    STEEPEST_DESCENT = "steepest_descent"
    AUTO = "auto"


@dataclass(frozen=True)
class ChannelParams:
    k: int
    nu: float
    gamma: float
    xi: float


@dataclass(frozen=True)
class SpinorValue:
    F: float
    G: float

    @property
    def norm(self) -> float:
        return math.hypot(self.F, self.G)


@dataclass(frozen=True)
class Evaluation:
    """Full result of one backend call at one point."""
    rho: float
    S: complex            # G + iF
    dS: complex | None    # d/drho (G + iF)
    method: str
    est_error: float      # relative to |S|

    @property
    def psi(self) -> SpinorValue:
        return SpinorValue(self.S.imag, self.S.real)

    @property
    def dpsi(self) -> SpinorValue:
        return SpinorValue(self.dS.imag, self.dS.real)


def make_channel(k: int, nu: float) -> ChannelParams:
    """Channel (k, nu) with gamma = sqrt(k^2 - nu^2) and the frozen xi branch.

    xi lies in (-pi/2, pi/2] for k > 0 and in (0, pi] for k < 0.
    """
    if int(k) != k or k == 0:
        raise DomainError("k must be a nonzero integer")
    k = int(k)
    nu = float(nu)
    if not abs(nu) <= 1:
        raise DomainError("nu must lie in [-1, 1]")
    if abs(k) == 1 and abs(nu) == 1:
        raise DomainError("gamma = 0 (|k| = 1, |nu| = 1) is not supported")
    gamma = math.sqrt(k * k - nu * nu)
    xi = -0.5 * cmath.phase(complex(gamma, -nu) / k)
    if k > 0:
        if xi <= -math.pi / 2:
            xi += math.pi
    elif xi <= 0:
        xi += math.pi
    return ChannelParams(k, nu, gamma, xi)


def _coulomb_log(nu: float, rho: float) -> float:
    """log of the Coulomb factor e^{pi nu sgn(rho) / 2}.

    Negative rho are negative energies, for which the attractive potential
    acts as a repulsive one; with the sign the two rows of the transform
    kernel have the same plane-wave normalization and j-values satisfy
    j(rho; nu) = j(-rho; -nu).
    """
    return math.pi * nu / 2 if rho >= 0 else -math.pi * nu / 2


def log_prefactor(ch: ChannelParams, rho) -> np.ndarray:
    """log of e^{pi nu/2} |rho|^{gamma-1} / (2^{gamma+1/2} |Gamma(gamma - i nu)|)."""
    rho = np.abs(np.asarray(rho, dtype=float))
    lg = complex_loggamma(complex(ch.gamma, -ch.nu)).real
    return math.pi * ch.nu / 2 + (ch.gamma - 1.0) * np.log(rho) - (ch.gamma + 0.5) * LN2 - lg


def prefactor(ch: ChannelParams, rho):
    """The modulus |A(rho)| linking |psi| to |I_0|; computed in log space."""
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr <= 0):
        raise DomainError("prefactor needs rho > 0")
    lp = log_prefactor(ch, rho_arr)
    if np.any(lp > 709.0):
        raise RangeError("prefactor overflows double precision")
    out = np.exp(lp)
    return float(out) if rho_arr.ndim == 0 else out


def _log_A(ch: ChannelParams, rho: float) -> complex:
    """log A(rho), A = e^{i xi} |Gamma(g+1+i nu)|/Gamma(g+1+i nu) e^{pi nu/2}|rho|^{g-1}/(2^{g+1/2} Gamma(g - i nu))."""
    g, nu = ch.gamma, ch.nu
    lg_b = complex_loggamma(complex(g + 1, nu))
    lg_a = complex_loggamma(complex(g, -nu))
    return (1j * ch.xi - 1j * lg_b.imag + _coulomb_log(nu, rho) + (g - 1) * math.log(abs(rho))
            - (g + 0.5) * LN2 - lg_a)


# ---------------------------------------------------------------------------
# backends

def _series(ch: ChannelParams, rho: float, derivative: bool) -> Evaluation:
    g, nu = ch.gamma, ch.nu
    a = complex(g, -nu)
    b = 2 * g + 1
    z = -2j * rho
    lg_b1 = complex_loggamma(complex(g + 1, nu)).real
    lg_2g = complex_loggamma(complex(b, 0)).real
    logc = (0.5 * LN2 + lg_b1 - lg_2g + _coulomb_log(nu, rho) + 1j * (rho + ch.xi)
            + (g - 1) * math.log(2 * abs(rho)))
    base = cmath.exp(logc)
    m, err = kummer_1f1(a, b, z, return_error=True)
    S = base * complex(m)
    dS = None
    est = float(err)
    if derivative:
        m1, err1 = kummer_1f1(a + 1, b + 1, z, return_error=True)
        corr = base * (-2j) * (a / b) * complex(m1)
        dS = (1j + (g - 1) / rho) * S + corr
        est = max(est, float(err1))
    return Evaluation(rho, S, dS, EvalMethod.SERIES.value, est)


def _combine(ch: ChannelParams, rho: float, i0, i1, derivative: bool, method: str, est: float):
    """S = A I_0, dS = (gamma-1)/rho S - i A I_1; i0/i1 are (mantissa, log_scale)."""
    la = _log_A(ch, rho)
    S = cmath.exp(la + i0[1]) * i0[0]
    dS = None
    if derivative:
        dS = (ch.gamma - 1) / rho * S - 1j * cmath.exp(la + i1[1]) * i1[0]
    return Evaluation(rho, S, dS, method, est)


def _quadrature(ch: ChannelParams, rho: float, derivative: bool) -> Evaluation:
    v0, e0 = quadrep.integral_direct(quadrep.IntegralParams(0, ch.gamma, ch.nu, rho), return_error=True)
    est = e0 / max(abs(v0), 1e-300)
    i1 = (0j, 0.0)
    if derivative:
        v1, e1 = quadrep.integral_direct(quadrep.IntegralParams(1, ch.gamma, ch.nu, rho), return_error=True)
        i1 = (v1, 0.0)
        est = max(est, e1 / max(abs(v1), 1e-300))
    return _combine(ch, rho, (v0, 0.0), i1, derivative, EvalMethod.QUADRATURE.value, est)


def _steepest(ch: ChannelParams, rho: float, derivative: bool, thresholds: dict) -> Evaluation:
    m0, l0, e0, kind = saddle.steepest_descent_scaled(0, ch.gamma, ch.nu, rho, **thresholds)
    est = e0 / max(abs(m0), 1e-300)
    i1 = (0j, 0.0)
    if derivative:
        m1, l1, e1, _ = saddle.steepest_descent_scaled(1, ch.gamma, ch.nu, rho, **thresholds)
        i1 = (m1, l1)
        est = max(est, e1 / max(abs(m1), 1e-300))
    ev = _combine(ch, rho, (m0, l0), i1, derivative, EvalMethod.STEEPEST_DESCENT.value, est)
    return ev


# ---------------------------------------------------------------------------
# dispatch

def _q(ch: ChannelParams, rho: float) -> float:
    return (ch.gamma - 1.0) / abs(rho)


def quadrature_loss(ch: ChannelParams, rho: float) -> float:
    """Predicted digits (natural log) lost to cancellation by direct quadrature."""
    r = abs(rho)
    q = _q(ch, rho)
    if q <= 0:
        return math.log1p(r)
    if q >= 1:
        sd = saddle.saddle_points(q)
        reh = saddle.phase_h(q, sd.z_minus).real
    else:
        reh = q * math.log(2 * q / math.e)
    return max(0.0, -r * reh + 0.5 * math.log(max(r, 1.0)))


def applicable_methods(ch: ChannelParams, rho: float) -> list[str]:
    """Backends expected to meet the 1e-8 relative target at this point."""
    r = abs(rho)
    out = []
    if r <= SERIES_MAX_RHO:
        out.append(EvalMethod.SERIES.value)
    if r <= QUAD_MAX_RHO and quadrature_loss(ch, rho) <= QUAD_MAX_LOSS:
        out.append(EvalMethod.QUADRATURE.value)
    q = _q(ch, rho)
    if (r >= SD_MIN_RHO and q > 0) or saddle.vertical_owns(ch.gamma, r) and r >= SD_MIN_RHO:
        out.append(EvalMethod.STEEPEST_DESCENT.value)
    return out


def auto_method(ch: ChannelParams, rho: float) -> str:
    """series if 2|rho| <= 30; quadrature if q outside (0, 2]; else steepest descent.

    For q > 2 (only reachable with gamma > 31) steepest descent is used as
    well, since direct quadrature loses all digits there.
    """
    r = abs(rho)
    if 2 * r <= 30:
        return EvalMethod.SERIES.value
    q = _q(ch, rho)
    if q <= 0:
        return EvalMethod.QUADRATURE.value
    return EvalMethod.STEEPEST_DESCENT.value


def evaluate(ch: ChannelParams, rho: float, method: str | EvalMethod = EvalMethod.AUTO,
             derivative: bool = False, **thresholds) -> Evaluation:
    """S = G + iF (and optionally dS/drho) at one nonzero rho."""
    rho = float(rho)
    if rho == 0 or not math.isfinite(rho):
        raise DomainError("rho must be finite and nonzero")
    method = EvalMethod(method).value
    if method == EvalMethod.AUTO.value:
        method = auto_method(ch, rho)
    if method == EvalMethod.SERIES.value:
        return _series(ch, rho, derivative)
    if method == EvalMethod.QUADRATURE.value:
        return _quadrature(ch, rho, derivative)
    return _steepest(ch, rho, derivative, thresholds)


def psi(ch: ChannelParams, rho: float, method: str | EvalMethod = EvalMethod.AUTO) -> SpinorValue:
    return evaluate(ch, rho, method).psi


def psi_derivative(ch: ChannelParams, rho: float, method: str | EvalMethod = EvalMethod.AUTO) -> SpinorValue:
    return evaluate(ch, rho, method, derivative=True).dpsi


def j_values(ch: ChannelParams, rho: float, method: str | EvalMethod = EvalMethod.AUTO):
    """(j0, j1) = (|psi|, |psi' - (gamma-1) psi / rho|)."""
    ev = evaluate(ch, rho, method, derivative=True)
    j0 = abs(ev.S)
    j1 = abs(ev.dS - (ch.gamma - 1) / rho * ev.S)
    return j0, j1


def _series_batch(ch: ChannelParams, rho: np.ndarray, derivative: bool):
    # same formulas as _series, one vectorized 1F1 call
    g, nu = ch.gamma, ch.nu
    a = complex(g, -nu)
    b = 2 * g + 1
    z = -2j * rho
    lg_b1 = complex_loggamma(complex(g + 1, nu)).real
    lg_2g = complex_loggamma(complex(b, 0)).real
    logc = (0.5 * LN2 + lg_b1 - lg_2g + np.sign(rho) * (math.pi * nu / 2) + 1j * (rho + ch.xi)
            + (g - 1) * np.log(2 * np.abs(rho)))
    base = np.exp(logc)
    S = base * kummer_1f1(a, b, z)
    if not derivative:
        return S, None
    dS = (1j + (g - 1) / rho) * S + base * (-2j) * (a / b) * kummer_1f1(a + 1, b + 1, z)
    return S, dS


SMALL_RHO = 0.5


def reduced_small(ch: ChannelParams, rho) -> np.ndarray:
    """S(rho) |rho|^{1-gamma} for 0 < |rho| <= SMALL_RHO, plain double Taylor series.

    With |2 rho| <= 1 the 1F1 terms fall off like 1/n! without cancellation,
    so double precision is enough and many points are cheap.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho) > SMALL_RHO) or np.any(rho == 0):
        raise DomainError("reduced_small needs 0 < |rho| <= %g" % SMALL_RHO)
    g, nu = ch.gamma, ch.nu
    a = complex(g, -nu)
    b = 2 * g + 1
    z = -2j * rho
    term = np.ones(rho.shape, dtype=complex)
    total = term.copy()
    for n in range(40):
        term = term * ((a + n) / ((b + n) * (n + 1))) * z
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    lg_b1 = complex_loggamma(complex(g + 1, nu)).real
    lg_2g = complex_loggamma(complex(b, 0)).real
    logc = (0.5 * LN2 + lg_b1 - lg_2g + np.sign(rho) * (math.pi * nu / 2) + 1j * (rho + ch.xi)
            + (g - 1) * LN2)
    return np.exp(logc) * total


WATSON_MIN_RHO = 15.0
WATSON_MAX_TERMS = 200
WATSON_TOL = 1e-13


def _watson_rays(ch: ChannelParams, rho: np.ndarray, eps: int):
    """I_eps for rho > 0 from the two vertical steepest-descent rays t = +-1 - i s.

    Each ray integral is expanded by Watson's lemma (binomial series of the
    smooth factor, integrated term by term against e^{-rho s} s^{c-1}).
    Returns (log_scale, mantissa, est_rel_error, converged) with
    I = e^{log_scale} * mantissa.
    """
    g, nu = ch.gamma, ch.nu
    out = []
    c_l = complex(g, -nu)
    c_r = complex(g + 1, nu)
    lg_l = complex_loggamma(c_l)
    lg_r = complex_loggamma(c_r)
    log_mi = -0.5j * math.pi                                             # log(-i), from dt = -i ds
    log_l = (log_mi + 1j * rho - 0.5j * math.pi * (g - 1) - math.pi * nu / 2
             + complex(g, nu) * LN2 + lg_l - c_l * np.log(rho))
    log_r = (log_mi - 1j * rho + 0.5j * math.pi * g - math.pi * nu / 2
             + complex(g - 1, -nu) * LN2 + lg_r - c_r * np.log(rho))
    # per ray: binomial exponent, series variable factor, Gamma argument,
    # value of t at the ray foot, log prefactor
    rays = ((complex(g, nu), 0.5j, c_l, -1.0, log_l),
            (complex(g - 1, -nu), -0.5j, c_r, 1.0, log_r))
    for p, fac, c, e0, logpre in rays:
        B = np.ones(rho.shape, dtype=complex)
        total = (e0 * B) if eps else B.copy()
        biggest = np.abs(total)
        done = np.zeros(rho.shape, dtype=bool)
        ok = np.zeros(rho.shape, dtype=bool)
        last = np.abs(total)
        for n in range(1, WATSON_MAX_TERMS):
            Bprev = B
            B = B * ((p - n + 1) / n * fac * (c + n - 1) / rho)
            if eps:
                # (e0 - i s) * series: shift contributes -i B_{n-1} (c+n-1)/rho
                T = e0 * B - 1j * Bprev * (c + n - 1) / rho
            else:
                T = B
            T = np.where(done, 0, T)
            total = total + T
            at = np.abs(T)
            biggest = np.maximum(biggest, at)
            small = (at <= 1e-17 * np.abs(total)) & (last <= 1e-15 * np.abs(total))
            growing = (at > last) & (n > abs(p) + 2)
            ok = ok | (small & ~done)
            done = done | small | growing
            last = at
            if np.all(done):
                break
        est = 1e-16 * biggest / np.maximum(np.abs(total), 1e-300)
        out.append((logpre, total, est, ok))
    (l1, t1, e1, o1), (l2, t2, e2, o2) = out
    # I = L - R, combined with a common scale
    ref = np.maximum(l1.real + np.log(np.abs(t1) + 1e-300), l2.real + np.log(np.abs(t2) + 1e-300))
    mant = np.exp(l1 - ref) * t1 - np.exp(l2 - ref) * t2
    est = (e1 * np.abs(np.exp(l1 - ref) * t1) + e2 * np.abs(np.exp(l2 - ref) * t2)) / np.maximum(np.abs(mant), 1e-300)
    return ref, mant, est, o1 & o2


def _watson_batch(ch: ChannelParams, rho: np.ndarray, derivative: bool):
    """S (and dS) from the Watson expansion; rho of either sign.

    Returns (S, dS, ok) where ok marks points whose series converged to
    WATSON_TOL. Negative rho uses I(rho, nu) = conj(I(-rho, -nu)).
    """
    S = np.empty(rho.shape, dtype=complex)
    dS = np.empty(rho.shape, dtype=complex) if derivative else None
    ok = np.zeros(rho.shape, dtype=bool)
    # log A = const + Coulomb sign term + (gamma - 1) log|rho|
    c_pos = _log_A(ch, 1.0)
    c_neg = _log_A(ch, -1.0)
    la = np.where(rho > 0, c_pos, c_neg) + (ch.gamma - 1) * np.log(np.abs(rho))
    for sgn in (1, -1):
        m = (rho > 0) if sgn == 1 else (rho < 0)
        if not np.any(m):
            continue
        cw = ch if sgn == 1 else ChannelParams(ch.k, -ch.nu, ch.gamma, ch.xi)
        r = np.abs(rho[m])
        ls0, m0, e0, ok0 = _watson_rays(cw, r, 0)
        if sgn == -1:
            m0 = np.conj(m0)
        S[m] = np.exp(la[m] + ls0) * m0
        good = ok0 & (e0 <= WATSON_TOL)
        if derivative:
            ls1, m1, e1, ok1 = _watson_rays(cw, r, 1)
            if sgn == -1:
                m1 = np.conj(m1)
            dS[m] = (ch.gamma - 1) / rho[m] * S[m] - 1j * np.exp(la[m] + ls1) * m1
            good = good & ok1 & (e1 <= WATSON_TOL)
        ok[m] = good
    return S, dS, ok


def psi_array(ch: ChannelParams, rhos, method: str | EvalMethod = EvalMethod.AUTO,
              derivative: bool = False):
    """Complex arrays S (and dS) over many rho values.

    Points that resolve to the series backend are evaluated in one batch.
    With ``auto``, points with |rho| >= WATSON_MIN_RHO whose vertical-ray
    Watson expansion converges use that expansion (vectorized); the rest go
    through evaluate() one by one.
    """
    rhos = np.asarray(rhos, dtype=float)
    if np.any(rhos == 0) or not np.all(np.isfinite(rhos)):
        raise DomainError("rho must be finite and nonzero")
    S = np.empty(rhos.shape, dtype=complex)
    dS = np.empty(rhos.shape, dtype=complex) if derivative else None
    method = EvalMethod(method).value
    flat = rhos.ravel()
    chosen = np.array([auto_method(ch, r) if method == "auto" else method for r in flat])
    ser = chosen == EvalMethod.SERIES.value
    Sf = S.reshape(-1)
    dSf = dS.reshape(-1) if derivative else None
    if np.any(ser):
        s_val, d_val = _series_batch(ch, flat[ser], derivative)
        Sf[ser] = s_val
        if derivative:
            dSf[ser] = d_val
    rest = ~ser
    if method == "auto":
        # endpoint-only steepest descent: Watson expansion of the vertical rays
        cand = rest & (np.abs(flat) >= WATSON_MIN_RHO)
        if np.any(cand):
            idx = np.flatnonzero(cand)
            w_S, w_dS, w_ok = _watson_batch(ch, flat[idx], derivative)
            hit = idx[w_ok]
            Sf[hit] = w_S[w_ok]
            if derivative:
                dSf[hit] = w_dS[w_ok]
            rest[hit] = False
    for i in np.flatnonzero(rest):
        ev = evaluate(ch, float(flat[i]), chosen[i], derivative)
        Sf[i] = ev.S
        if derivative:
            dSf[i] = ev.dS
    return (S, dS) if derivative else S


def realness_residue(ch: ChannelParams, rho: float) -> float:
    """Spurious imaginary part of (F, G) rebuilt from two independent series.

    conj(S) is computed a second way through Kummer's transformation,
    conj(S) = conj(C) e^{i rho} |2 rho|^{gamma-1} 1F1(gamma+1-i nu, 2 gamma+1, -2 i rho);
    G = (S + conj S)/2 and F = (S - conj S)/(2i) should then be real.
    Returned relative to |F| + |G| + 1. Valid where the series is, |rho| <= 25.
    """
    if abs(rho) > 25:
        raise DomainError("realness residue uses the series, |rho| <= 25")
    g, nu = ch.gamma, ch.nu
    S = _series(ch, rho, False).S
    lg_b1 = complex_loggamma(complex(g + 1, nu)).real
    lg_2g = complex_loggamma(complex(2 * g + 1, 0)).real
    logc_conj = (0.5 * LN2 + lg_b1 - lg_2g + _coulomb_log(nu, rho) - 1j * ch.xi + 1j * rho
                 + (g - 1) * math.log(2 * abs(rho)))
    Sc = cmath.exp(logc_conj) * complex(kummer_1f1(complex(g + 1, -nu), 2 * g + 1, -2j * rho))
    G = (S + Sc) / 2
    F = (S - Sc) / 2j
    return (abs(G.imag) + abs(F.imag)) / (abs(F.real) + abs(G.real) + 1.0)


def cross_validate(ch: ChannelParams, rho: float, derivative: bool = False) -> dict:
    """Evaluate every applicable backend and report the worst pairwise gap.

    The gap is |S_a - S_b| / (j0 + 1e-300). Failures of a backend are
    recorded, not raised.
    """
    methods = applicable_methods(ch, rho)
    vals = {}
    failures = {}
    for m in methods:
        try:
            vals[m] = evaluate(ch, rho, m, derivative)
        except (AccuracyError, RangeError) as exc:
            failures[m] = str(exc)
    gap = 0.0
    names = list(vals)
    j0 = max((abs(v.S) for v in vals.values()), default=0.0)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = vals[names[i]], vals[names[j]]
            d = abs(a.S - b.S)
            if derivative:
                d = max(d, abs(a.dS - b.dS) / max(1.0, abs((ch.gamma - 1) / rho)))
            gap = max(gap, d / (j0 + 1e-300))
    return {"k": ch.k, "nu": ch.nu, "rho": rho, "methods": names, "gap": gap,
            "values": vals, "failures": failures}
