"""Steepest-descent evaluation of I_{eps,gamma,rho} = int_{-1}^{1} g_eps(z) e^{rho h_q(z)} dz.

h_q(z) = -iz + q ln(1 - z^2) with q = (gamma-1)/rho, and
g_eps(z) = z^eps (1+z)^{-i nu} (1-z)^{1+i nu}. The interval is deformed into
one of six contours depending on q:

    q >= q0          gamma_minus     single arc through z_-
    1 <= q < q0      modified_1b     arc with affine pieces near z_-
    q1 <= q < 1      modified_2b     two arcs joined by four affine pieces
    q2 <= q < q1     gamma_lr        two unbounded arcs through z_-, z_+
    0 < q < q2       rescaled_2c     gamma_lr with the saddle windows in u
    q <= 0, or rho >= max(2, (gamma+1)^2/2)
                     vertical_lines  the rays -1 - i[0,inf) and 1 - i[0,inf)

Arcs come from closed-form level curves of Im h_q. Integrands are evaluated
in log form relative to a reference value of rho*Re h, so integrals are
returned as (mantissa, log_scale) pairs that cannot overflow.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _quad
from .errors import ConstructionError, DomainError, RangeError

Q0 = 1.15
Q1 = 0.85
Q2 = 0.15
DELTA = 0.1
U0 = 0.2
TRUNC_LOG = math.log(1e-18)

CONTOUR_KINDS = ("vertical_lines", "gamma_minus", "gamma_lr",
                 "modified_1b", "modified_2b", "rescaled_2c")


@dataclass(frozen=True)
class PhaseParams:
    q: float
    gamma: float
    nu: float
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError("steepest descent needs rho > 0")
        if abs(self.q * self.rho - (self.gamma - 1.0)) > 1e-14 * max(1.0, abs(self.gamma - 1.0)) * 4:
            raise DomainError("q*rho must equal gamma-1")

    @classmethod
    def from_gamma(cls, gamma: float, nu: float, rho: float) -> "PhaseParams":
        return cls((gamma - 1.0) / rho, float(gamma), float(nu), float(rho))


def phase_h(q: float, z):
    """h_q(z) = -iz + q ln(1-z^2) with the principal logarithm on the slit plane."""
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (np.abs(z.real) >= 1)):
        raise DomainError("h_q is not defined on the cuts (-inf,-1] and [1,inf)")
    return -1j * z + q * (np.log1p(z) + np.log1p(-z))


def phase_h_prime(q: float, z):
    z = np.asarray(z, dtype=complex)
    return -1j + q / (z - 1.0) + q / (z + 1.0)


@dataclass(frozen=True)
class SaddleData:
    z_minus: complex
    z_plus: complex
    theta0: float
    coalesced: bool


def saddle_points(q: float) -> SaddleData:
    """Roots of z^2 + 2iqz - 1 = 0, the zeros of h_q'."""
    if not q > 0:
        raise DomainError("saddle points need q > 0")
    if q >= 1:
        r = math.sqrt(q * q - 1.0)
        zm = complex(0.0, -1.0 / (q + r))     # -i(q - r), no cancellation
        zp = complex(0.0, -(q + r))
        return SaddleData(zm, zp, float("nan"), abs(q - 1.0) <= 1e-12)
    th0 = math.acos(q)
    s = math.sin(th0)
    return SaddleData(complex(-s, -q), complex(s, -q), th0, abs(q - 1.0) <= 1e-12)


# ---------------------------------------------------------------------------
# small stable helpers

def _x_minus_sin(x):
    """x - sin x without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    out = x - np.sin(x)
    small = np.abs(x) < 1.0
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        term = xs * x2 / 6.0
        acc = term.copy()
        for n in range(4, 22, 2):
            term = -term * x2 / (n * (n + 1))
            acc = acc + term
        out[small] = acc
    return out


def _xms_over_x2(x):
    """(x - sin x)/x^2, finite at 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    tiny = np.abs(x) < 1e-8
    out[tiny] = x[tiny] / 6.0
    xt = x[~tiny]
    out[~tiny] = _x_minus_sin(xt) / (xt * xt)
    return out


def _sinc(x):
    """sin(x)/x."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


# ---------------------------------------------------------------------------
# closed-form arcs. Each returns (z, dz/dparam, 1+z, 1-z).

def _gamma_minus_point(q: float, t):
    """z_q(t) = t + i y_-(t) for q >= 1, t in (-1, 1)."""
    t = np.asarray(t, dtype=float)
    s = t / q
    sn = np.sin(s)
    cs = np.cos(s)
    inv_sinc = 1.0 / _sinc(s)                     # s / sin s
    # t^2/sin^2(s) - 1 = (q^2-1) + q^2 ((s/sin s)^2 - 1)
    ratio = _xms_over_x2(s) * (1.0 + _sinc(s)) * inv_sinc * inv_sinc * s   # (s-sin s)(s+sin s)/sin^2 s
    w = (q * q - 1.0) + q * q * ratio
    w = np.maximum(w, 0.0)
    sw = np.sqrt(w)
    y = -q * cs * inv_sinc + sw
    # derivative
    small = np.abs(s) < 1e-6
    ss = np.where(small, 1.0, s)
    sns = np.where(small, 1.0, sn)
    a = 0.5 * _x_minus_sin(2 * ss) / (sns * sns)          # (s - sin s cos s)/sin^2 s
    b = 2 * ss * np.sin(ss / 2) ** 2 - _x_minus_sin(ss)   # sin s - s cos s
    wp = 2 * q * ss / (sns * sns) * b / sns
    a = np.where(small, 2 * s / 3, a)
    wp = np.where(small, 2 * q * s / 3, wp)
    with np.errstate(divide="ignore", invalid="ignore"):
        dy = a + np.where(sw > 0, wp / (2 * np.where(sw > 0, sw, 1.0)), 0.0)
    z = t + 1j * y
    return z, 1.0 + 1j * dy, (1.0 + t) + 1j * y, (1.0 - t) - 1j * y


@dataclass(frozen=True)
class _LRGeom:
    q: float
    theta0: float
    xq: float
    theta_max: float

    @classmethod
    def make(cls, q: float) -> "_LRGeom":
        th0 = math.acos(q)
        xq = math.sin(th0) - th0 * q
        return cls(q, th0, xq, (1.0 - xq) / q)


def _phi_q(geo: _LRGeom, theta):
    """phi_q(theta) and its derivative on (0, theta_max), cancellation-free near theta0."""
    q, th0 = geo.q, geo.theta0
    theta = np.asarray(theta, dtype=float)
    d = theta - th0
    s0 = math.sin(th0)
    sn = np.sin(theta)
    cs = np.cos(theta)
    p = q * theta + geo.xq
    # g = p - sin(theta) = cos(th0)(d - sin d) + 2 sin(th0) sin^2(d/2), g2 = g/d^2
    half_sinc = 0.5 * _sinc(d / 2)                        # sin(d/2)/d
    g2 = q * _xms_over_x2(d) + 2 * s0 * half_sinc * half_sinc
    g = g2 * d * d
    sq = np.sqrt(g2 * (g + 2 * sn))                       # sgn(d) R = d * sq
    phi = p * cs / sn - d * sq / sn
    nd = 2 * sn * np.sin(th0 + d / 2) * half_sinc + q * d * g2   # (p q - sin cos)/d
    dphi = q * cs / sn - p / (sn * sn) - (nd / sq / sn - d * sq * cs / (sn * sn))
    return phi, dphi


def _lr_point(geo: _LRGeom, theta):
    """z_q(theta) = q theta + sgn(theta) x_q - i phi_q(|theta|)."""
    theta = np.asarray(theta, dtype=float)
    a = np.abs(theta)
    phi, dphi = _phi_q(geo, a)
    p = geo.q * a + geo.xq
    zr = p - 1j * phi
    dzr = geo.q - 1j * dphi
    opz_r = (1.0 + p) - 1j * phi
    omz_r = geo.q * (geo.theta_max - a) + 1j * phi
    right = theta > 0
    z = np.where(right, zr, -np.conj(zr))
    dz = np.where(right, dzr, np.conj(dzr))
    opz = np.where(right, opz_r, np.conj(omz_r))
    omz = np.where(right, omz_r, np.conj(opz_r))
    return z, dz, opz, omz


def _affine(z0: complex, z1: complex):
    def fn(s):
        s = np.asarray(s, dtype=float)
        z = z0 + (z1 - z0) * s
        opz = (1.0 + z0) + (z1 - z0) * s
        omz = (1.0 - z0) - (z1 - z0) * s
        return z, np.full(s.shape, z1 - z0, dtype=complex), opz, omz
    return fn


# ---------------------------------------------------------------------------
# contours

@dataclass(frozen=True)
class Segment:
    fn: Callable
    a: float
    b: float
    label: str
    pieces: int = 8


@dataclass(frozen=True)
class Contour:
    segments: tuple
    kind: str
    log_scale: float                 # reference value of rho * Re h
    truncation_bound: float = 0.0    # relative bound on discarded tails
    diagnostics: dict = field(default_factory=dict)

    def nodes(self, per_segment: int = 64):
        """(segment index, parameter, z) samples for plotting and checks."""
        out = []
        for i, seg in enumerate(self.segments):
            s = np.linspace(seg.a, seg.b, per_segment)
            z = seg.fn(s)[0]
            out.append((np.full(s.shape, i), s, z))
        return out


def _log_integrand(p: PhaseParams, seg_fn, s, ref: float):
    """log of g_0(z) e^{rho h_q(z)} dz/ds minus ref, plus z for eps = 1."""
    z, dz, opz, omz = seg_fn(s)
    hit = (opz == 0) | (omz == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.log(opz)
        lm = np.log(omz)
        ell = (-1j * p.rho * z + (p.gamma - 1.0) * (lp + lm)
               - 1j * p.nu * lp + (1.0 + 1j * p.nu) * lm + np.log(dz) - ref)
    if np.any(hit):
        # a node rounded onto a branch point; arcs only end there when
        # gamma > 1, where the integrand vanishes
        ell = np.where(hit, -np.inf, ell)
    return ell, z


def _seg_logmag(p, seg_fn, s, ref):
    return _log_integrand(p, seg_fn, np.asarray(s, dtype=float), ref)[0].real


def _check_param(q, lo, hi, name, lo_open=False, hi_open=False):
    ok_lo = q > lo if lo_open else q >= lo
    ok_hi = q < hi if hi_open else q <= hi
    if not (ok_lo and ok_hi):
        raise DomainError(f"{name} requires q in the range [{lo}, {hi}], got {q}")


def _saddle_scale(p: PhaseParams, z0: complex) -> float:
    return float(p.rho * phase_h(p.q, z0).real)


def contour_vertical(params: PhaseParams) -> Contour:
    """Rays -1 - i[0, T] and 1 - i[T, 0], parametrized by w = log(rho t)."""
    p = params
    rho = p.rho

    def left(w):
        t = np.exp(np.asarray(w, dtype=float)) / rho
        return -1.0 - 1j * t, -1j * t, -1j * t + 0.0, 2.0 + 1j * t

    def right(w):
        t = np.exp(np.asarray(w, dtype=float)) / rho
        return 1.0 - 1j * t, -1j * t, 2.0 - 1j * t, 1j * t + 0.0

    # the integrand behaves like e^{gamma w} as w -> -inf
    w_floor = max(min(-80.0, (TRUNC_LOG - 12.0) / max(p.gamma, 1e-3)), -700.0)
    wgrid = np.linspace(w_floor, math.log(60.0 + 40.0 * max(p.gamma, 1.0)) + 1.0, 1600)
    ref = max(float(np.max(_seg_logmag(p, left, wgrid, 0.0))),
              float(np.max(_seg_logmag(p, right, wgrid, 0.0))))
    cut = TRUNC_LOG - 2.0
    w_lo, w_hi = wgrid[-1], wgrid[0]
    tail = 0.0
    for fn in (left, right):
        lm = _seg_logmag(p, fn, wgrid, ref)
        keep = np.nonzero(lm > cut)[0]
        if keep.size == 0:
            continue
        w_lo = min(w_lo, wgrid[max(keep[0] - 1, 0)])
        w_hi = max(w_hi, wgrid[min(keep[-1] + 1, wgrid.size - 1)])
        tail = max(tail, float(np.exp(lm[0])), float(np.exp(lm[-1])))
    if w_hi >= wgrid[-1] or w_lo <= wgrid[0]:
        raise ConstructionError("vertical contour truncation depth not reached")
    segs = (Segment(left, w_lo, w_hi, "left_ray", 24),
            Segment(right, w_hi, w_lo, "right_ray", 24))
    depth = math.exp(w_hi) / rho
    return Contour(segs, "vertical_lines", ref, max(tail, 1e-18),
                   {"depth": depth, "w_min": w_lo})


def _gamma_minus_unchecked(p: PhaseParams) -> Contour:
    q = p.q
    sd = saddle_points(q)
    fn = lambda t: _gamma_minus_point(q, t)
    ref = _saddle_scale(p, sd.z_minus)
    segs = (Segment(fn, -1.0, 0.0, "arc_left", 8), Segment(fn, 0.0, 1.0, "arc_right", 8))
    return Contour(segs, "gamma_minus", ref, 0.0, {"z_minus": sd.z_minus})


def contour_gamma_minus(params: PhaseParams) -> Contour:
    """Level curve Im h_q = 0 through z_- for 1 <= q <= 2."""
    _check_param(params.q, 1.0, 2.0, "contour_gamma_minus")
    return _gamma_minus_unchecked(params)


def _descent_fit(p: PhaseParams, z_saddle: complex, z_end: complex, bound_top: float,
                 n: int = 400):
    """Check Re h decreases from z_saddle to z_end and below bound_top.

    Returns kappa = min (bound_top - Re h) / (sqrt|q-1| tau^2 + tau^3) over
    the segment, tau = |z - z_saddle|.
    """
    s = np.linspace(0.0, 1.0, n + 1)[1:]
    z = z_saddle + (z_end - z_saddle) * s
    reh = phase_h(p.q, z).real
    reh0 = phase_h(p.q, z_saddle).real
    steps = np.diff(np.concatenate([[reh0], reh]))
    if np.any(steps > 1e-9):
        raise ConstructionError("Re h increases along a controlled-descent segment")
    tau = np.abs(z - z_saddle)
    deficit = bound_top - reh
    kappa = float(np.min(deficit / (math.sqrt(abs(p.q - 1.0)) * tau ** 2 + tau ** 3)))
    if not kappa > 0:
        raise ConstructionError("no positive descent constant on a controlled-descent segment")
    return kappa


def contour_modified_1b(params: PhaseParams, delta: float = DELTA) -> Contour:
    """Arc z_q on [-1,-delta] and [delta,1] joined through z_- by two segments."""
    p = params
    q = p.q
    _check_param(q, 1.0, Q0, "contour_modified_1b")
    if not 0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    sd = saddle_points(q)
    fn = lambda t: _gamma_minus_point(q, t)
    zl = complex(fn(np.array([-delta]))[0][0])
    zr = complex(fn(np.array([delta]))[0][0])
    z0 = sd.z_minus
    top = q * math.log(2 * q / math.e)
    if phase_h(q, z0).real > top + 1e-12:
        raise ConstructionError("Re h at the saddle exceeds q ln(2q/e)")
    kl = _descent_fit(p, z0, zl, top)
    kr = _descent_fit(p, z0, zr, top)
    ref = _saddle_scale(p, z0)
    segs = (Segment(fn, -1.0, -delta, "arc_left", 6),
            Segment(_affine(zl, z0), 0.0, 1.0, "affine_left", 8),
            Segment(_affine(z0, zr), 0.0, 1.0, "affine_right", 8),
            Segment(fn, delta, 1.0, "arc_right", 6))
    return Contour(segs, "modified_1b", ref, 0.0,
                   {"kappa_prime": min(kl, kr), "delta": delta, "z_minus": z0})


def _lr_truncation(p: PhaseParams, geo: _LRGeom, theta_hi: float, ref: float):
    """Smallest theta kept on the unbounded end of the right branch, and the tail bound."""
    fn = lambda th: _lr_point(geo, th)
    th = theta_hi * np.exp2(-np.arange(0, 200) / 4.0)
    lm = _seg_logmag(p, fn, th, ref)
    below = np.nonzero(lm < TRUNC_LOG - 2.0)[0]
    if below.size == 0:
        raise ConstructionError("unbounded branch does not decay within the search range")
    j = int(below[0])
    tail = float(th[j] * np.exp(lm[j]))
    return float(th[j]), tail


def contour_gamma_lr(params: PhaseParams) -> Contour:
    """The two arcs Gamma^l, Gamma^r through z_-, z_+ for q2 <= q <= q1."""
    _check_param(params.q, Q2, Q1, "contour_gamma_lr")
    return _gamma_lr_unchecked(params)


def _gamma_lr_unchecked(p: PhaseParams) -> Contour:
    geo = _LRGeom.make(p.q)
    sd = saddle_points(p.q)
    ref = _saddle_scale(p, sd.z_plus)
    th_min, tail = _lr_truncation(p, geo, geo.theta0, ref)
    fn = lambda th: _lr_point(geo, th)
    segs = (Segment(fn, -geo.theta_max, -geo.theta0, "left_outer", 8),
            Segment(fn, -geo.theta0, -th_min, "left_inner", 16),
            Segment(fn, th_min, geo.theta0, "right_inner", 16),
            Segment(fn, geo.theta0, geo.theta_max, "right_outer", 8))
    return Contour(segs, "gamma_lr", ref, tail,
                   {"theta0": geo.theta0, "x_q": geo.xq, "theta_max": geo.theta_max,
                    "theta_min": th_min})


def contour_modified_2b(params: PhaseParams, delta: float = DELTA) -> Contour:
    """Six pieces A-B-C-D-E: arcs beyond theta0+delta, affine through C on the axis."""
    p = params
    q = p.q
    _check_param(q, Q1, 1.0, "contour_modified_2b", hi_open=True)
    geo = _LRGeom.make(q)
    if not 0 < delta < geo.theta_max - geo.theta0:
        raise DomainError("delta too large for this q")
    fn = lambda th: _lr_point(geo, th)
    th0 = geo.theta0
    za = complex(fn(np.array([-th0 - delta]))[0][0])
    ze = complex(fn(np.array([th0 + delta]))[0][0])
    sd = saddle_points(q)
    zb, zd = sd.z_minus, sd.z_plus
    # the segments from z_+ at angle -3pi/5 and from z_- at -2pi/5 meet the
    # imaginary axis here; this lies below both saddles
    zc = complex(0.0, -math.cos(2 * math.pi / 5 - th0) / math.cos(2 * math.pi / 5))
    top = q * math.log(2 * q / math.e)
    k_arc = min(_descent_fit(p, zb, za, top + 1e-13), _descent_fit(p, zd, ze, top + 1e-13))
    k_mid = min(_descent_fit(p, zb, zc, top + 1e-13), _descent_fit(p, zd, zc, top + 1e-13))
    ref = _saddle_scale(p, zd)
    segs = (Segment(fn, -geo.theta_max, -th0 - delta, "arc_left", 6),
            Segment(_affine(za, zb), 0.0, 1.0, "affine_AB", 6),
            Segment(_affine(zb, zc), 0.0, 1.0, "affine_BC", 8),
            Segment(_affine(zc, zd), 0.0, 1.0, "affine_CD", 8),
            Segment(_affine(zd, ze), 0.0, 1.0, "affine_DE", 6),
            Segment(fn, th0 + delta, geo.theta_max, "arc_right", 6))
    return Contour(segs, "modified_2b", ref, 0.0,
                   {"kappa_prime": k_arc, "kappa_triple_prime": k_mid, "C": zc,
                    "theta0": th0, "delta": delta})


def window_point(geo: _LRGeom, u):
    """Z(q, u) = z_q(theta0 + q u) and dZ/du."""
    z, dz, opz, omz = _lr_point(geo, geo.theta0 + geo.q * np.asarray(u, dtype=float))
    return z, geo.q * dz, opz, omz


def rescaled_window_2c(params: PhaseParams, u0: float = U0) -> Contour:
    """gamma_lr with |theta -/+ theta0| <= q u0 reparametrized by u."""
    p = params
    q = p.q
    _check_param(q, 0.0, Q2, "rescaled_window_2c", lo_open=True)
    if not 0 < u0 <= 0.25:
        raise DomainError("u0 must lie in (0, 1/4]")
    geo = _LRGeom.make(q)
    u = np.linspace(-u0, u0, 401)
    zw = window_point(geo, u)[0]
    reh = phase_h(q, zw).real
    bound = q * math.log(2 * q / math.e) - q * u * u
    if np.any(reh > bound + 1e-12 * (1 + abs(q * math.log(2 * q / math.e)))):
        raise ConstructionError("Re h exceeds q ln(2q/e) - q u^2 on the rescaled window")
    sd = saddle_points(q)
    ref = _saddle_scale(p, sd.z_plus)
    lo = geo.theta0 - q * u0
    hi = geo.theta0 + q * u0
    th_min, tail = _lr_truncation(p, geo, lo, ref)
    fn = lambda th: _lr_point(geo, th)
    wr = lambda s: window_point(geo, s)

    def wl(s):
        z, dz, opz, omz = window_point(geo, -np.asarray(s, dtype=float))
        return -np.conj(z), np.conj(dz), np.conj(omz), np.conj(opz)

    segs = (Segment(fn, -geo.theta_max, -hi, "left_outer", 8),
            Segment(wl, -u0, u0, "left_window", 8),
            Segment(fn, -lo, -th_min, "left_inner", 16),
            Segment(fn, th_min, lo, "right_inner", 16),
            Segment(wr, -u0, u0, "right_window", 8),
            Segment(fn, hi, geo.theta_max, "right_outer", 8))
    return Contour(segs, "rescaled_2c", ref, tail,
                   {"theta0": geo.theta0, "x_q": geo.xq, "u0": u0, "theta_min": th_min})


def vertical_owns(gamma: float, rho: float) -> bool:
    return rho >= max(2.0, 0.5 * (gamma + 1.0) ** 2)


def case_tag(params: PhaseParams, q0: float = Q0, q1: float = Q1, q2: float = Q2) -> str:
    q = params.q
    if q <= 0 or vertical_owns(params.gamma, params.rho):
        return "vertical_lines"
    if q >= q0:
        return "gamma_minus"
    if q >= 1.0:
        return "modified_1b"
    if q >= q1:
        return "modified_2b"
    if q >= q2:
        return "gamma_lr"
    return "rescaled_2c"


def select_contour(params: PhaseParams, *, q0: float = Q0, q1: float = Q1, q2: float = Q2,
                   delta: float = DELTA, u0: float = U0) -> Contour:
    """Dispatch on q over [q0,inf), [1,q0), [q1,1), [q2,q1), (0,q2).

    The gamma_minus arc is also used for q > 2, where the construction is
    unchanged.
    """
    tag = case_tag(params, q0, q1, q2)
    if tag == "vertical_lines":
        return contour_vertical(params)
    if tag == "gamma_minus":
        return _gamma_minus_unchecked(params)
    if tag == "modified_1b":
        return contour_modified_1b(params, delta)
    if tag == "modified_2b":
        return contour_modified_2b(params, delta)
    if tag == "gamma_lr":
        return _gamma_lr_unchecked(params)
    return rescaled_window_2c(params, u0)


# ---------------------------------------------------------------------------
# integration

def _segment_breaks(seg: Segment) -> np.ndarray:
    """Uniform pieces, graded geometrically toward an end that sits on +-1.

    There the integrand has an algebraic factor |1 -+ z|^{gamma-1} which
    plain bisection resolves only slowly.
    """
    breaks = np.linspace(seg.a, seg.b, seg.pieces + 1)
    with np.errstate(all="ignore"):
        _, _, opz, omz = seg.fn(np.array([seg.a, seg.b]))
    dist = np.minimum(np.abs(opz), np.abs(omz))
    step = breaks[1] - breaks[0]
    grade = step * np.exp2(-np.arange(1, 60))
    grade = grade[np.abs(grade) > 1e4 * np.finfo(float).eps * max(abs(seg.a), abs(seg.b))]
    if dist[0] < 1e-12:
        breaks = np.concatenate([[seg.a], seg.a + grade[::-1], breaks[1:]])
    if dist[1] < 1e-12:
        breaks = np.concatenate([breaks[:-1], seg.b - grade, [seg.b]])
    return breaks


def contour_integral_scaled(params: PhaseParams, c: Contour, eps: int, *, rtol: float = 1e-13):
    """Return (mantissa, log_scale, error) with the integral = mantissa * e^log_scale."""
    if eps not in (0, 1):
        raise DomainError("eps must be 0 or 1")
    total = 0j
    err = 0.0
    for seg in c.segments:
        def f(s, fn=seg.fn):
            ell, z = _log_integrand(params, fn, s, c.log_scale)
            val = np.exp(ell)
            return val * z if eps else val
        breaks = _segment_breaks(seg)
        v, e = _quad.adaptive(f, breaks, rtol=rtol, l1_rtol=1e-15)
        total += v
        err += e
    err += c.truncation_bound
    return total, c.log_scale, err


def contour_integral(params: PhaseParams, c: Contour, eps: int) -> complex:
    """Path integral of g_eps e^{rho h_q} along ``c``; raises RangeError on overflow."""
    m, ls, _ = contour_integral_scaled(params, c, eps)
    if ls > 709.0:
        raise RangeError("contour integral overflows double precision; use the scaled form")
    return complex(m * math.exp(ls))


def steepest_descent_scaled(eps: int, gamma: float, nu: float, rho: float, **thresholds):
    """I_{eps,gamma,rho} as (mantissa, log_scale, error, kind); rho may be negative.

    Negative rho uses I(rho, nu) = conj(I(-rho, -nu)).
    """
    if rho == 0:
        raise DomainError("steepest descent needs rho != 0")
    flip = rho < 0
    p = PhaseParams.from_gamma(gamma, -nu if flip else nu, abs(rho))
    c = select_contour(p, **thresholds)
    m, ls, e = contour_integral_scaled(p, c, eps)
    if flip:
        m = m.conjugate()
    return m, ls, e, c.kind


def dump_contour(params: PhaseParams, c: Contour, path, per_segment: int = 64,
                 comments=()) -> None:
    """CSV rows: case, segment_index, parameter, re_z, im_z, re_h, im_h.

    ``comments`` are written first as lines starting with '#'.
    """
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write("# " + line + "\n")
        w = csv.writer(fh)
        w.writerow(["case", "segment_index", "parameter", "re_z", "im_z", "re_h", "im_h"])
        for idx, s, z in c.nodes(per_segment):
            z = np.asarray(z, dtype=complex)
            end = (z.imag == 0) & (np.abs(z.real) >= 1)
            h = np.empty(z.shape, dtype=complex)
            h[~end] = phase_h(params.q, z[~end])
            # ends on +-1: Re h -> -inf for q > 0; Im h keeps the level of the
            # curve, taken from the neighbouring node
            for j in np.flatnonzero(end):
                nb = j + 1 if j + 1 < z.size and not end[j + 1] else j - 1
                h[j] = complex(-math.inf, h[nb].imag)
            for i, si, zi, hi in zip(idx, s, z, h):
                w.writerow([c.kind, int(i), f"{si:.17e}", f"{zi.real:.17e}", f"{zi.imag:.17e}",
                            f"{hi.real:.17e}", f"{hi.imag:.17e}"])
