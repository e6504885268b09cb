"""Relativistic Hankel transform, radial Dirac-Coulomb operator and Strichartz scans.

Radial functions f = (f+, f-) live in L^2((0, inf), r^2 dr); on channel k the
transform is

    P_k f(E) = sqrt(2/pi) int_0^inf H_k(E r) f(r) r^2 dr,
    H_k(rho) = [[F(rho), G(rho)], [F(-rho), G(-rho)]],

and its inverse uses the transposed kernel. The sqrt(2/pi) makes P_k an
isometry with the eigenfunction normalization of eigenwave (it is the usual
spherical-Bessel normalization at nu = 0). The radial operator, acting on
(f+, f-) paired with (F, G), is

    D = [[-nu/r, -d/dr + (k-1)/r], [d/dr + (k+1)/r, -nu/r]],

for which psi(E r) and psi(-E r) are eigenvectors with energies E and -E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import sph_harm_y

from . import eigenwave as ew
from .errors import DivergenceError, DomainError
from .specfun import _sph_bessel_all

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# 6th-order Gregory end corrections for the trapezoid rule
_GREGORY = np.array([95 / 288, 317 / 240, 23 / 30, 793 / 720, 157 / 160])

DEFAULT_RMIN = 1e-6
DEFAULT_RMAX = 48.0
DEFAULT_DU = 0.04


# ---------------------------------------------------------------------------
# grids and functions

def _gregory_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    k = len(_GREGORY)
    if n < 2 * k:
        w[0] = w[-1] = 0.5
        return w
    w[:k] = _GREGORY
    w[-k:] = _GREGORY[::-1]
    return w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes and weights for int f(r) r^2 dr (the r^2 is inside the weights).

    Grids built from a map r(u) on a uniform u lattice keep ``u_step``,
    ``u_nodes`` and ``jac`` = dr/du, which the finite differences use.
    ``log_step`` is set for log-uniform grids, which make transform kernels
    depend on i + j only.
    """
    nodes: np.ndarray
    weights: np.ndarray
    log_step: float | None = None
    u_step: float | None = None
    u_nodes: np.ndarray | None = field(default=None, repr=False)
    jac: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise DomainError("nodes and weights must be matching 1-D arrays")
        if nodes.size < 2 or np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
            raise DomainError("nodes must be positive and strictly increasing")
        if np.any(weights <= 0):
            raise DomainError("weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def log_uniform(cls, rmin: float = 1e-3, rmax: float = 200.0,
                    n: int = 2048) -> "RadialGrid":
        du = math.log(rmax / rmin) / (n - 1)
        return cls.from_log_step(rmin, du, n)

    @classmethod
    def from_log_step(cls, rmin: float, du: float, n: int) -> "RadialGrid":
        u = math.log(rmin) + du * np.arange(n)
        r = np.exp(u)
        return cls(r, _gregory_weights(n) * du * r ** 3, du, du, u, r)

    @classmethod
    def softplus(cls, rmin: float = DEFAULT_RMIN, rmax: float = DEFAULT_RMAX,
                 du: float = DEFAULT_DU, scale: float = 1.0) -> "RadialGrid":
        """r = scale * log(1 + e^u): log-spaced below ``scale``, spacing scale*du above."""
        def inv(r):
            return math.log(math.expm1(r / scale))
        u0, u1 = inv(rmin), inv(rmax)
        n = int(math.ceil((u1 - u0) / du)) + 1
        u = u0 + du * np.arange(n)
        r = scale * np.logaddexp(0.0, u)
        jac = scale * 0.5 * (1.0 + np.tanh(0.5 * u))      # scale * sigmoid(u)
        return cls(r, _gregory_weights(n) * du * jac * r * r, None, du, u, jac)

    @classmethod
    def uniform(cls, rmax: float, n: int) -> "RadialGrid":
        """Midpoint nodes (j + 1/2) h on (0, rmax)."""
        h = rmax / n
        r = (np.arange(n) + 0.5) * h
        return cls(r, h * r * r, None, h, r, np.ones(n))

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def key(self) -> tuple:
        return (self.nodes.size, float(self.nodes[0]), float(self.nodes[-1]),
                float(self.weights[0]), self.log_step, self.u_step)

    def integrate(self, values) -> complex:
        return np.sum(self.weights * values)

    def compatible(self, other: "RadialGrid") -> bool:
        return (self.log_step is not None and other.log_step is not None
                and abs(self.log_step - other.log_step) <= 1e-12 * self.log_step)


def default_grid() -> RadialGrid:
    """Default radial (and energy) grid: softplus map over [1e-6, 48], du = 0.04."""
    return RadialGrid.softplus()


@dataclass(eq=False)
class RadialFunction:
    grid: RadialGrid
    plus: np.ndarray
    minus: np.ndarray
    flags: np.ndarray | None = None     # boundary rows of a finite-difference result

    def __post_init__(self):
        self.plus = np.asarray(self.plus, dtype=complex)
        self.minus = np.asarray(self.minus, dtype=complex)
        if self.plus.shape != (len(self.grid),) or self.minus.shape != (len(self.grid),):
            raise DomainError("component arrays must match the grid length")

    def norm(self) -> float:
        return float(np.sqrt(self.grid.integrate(np.abs(self.plus) ** 2 + np.abs(self.minus) ** 2).real))

    def __add__(self, other):
        return RadialFunction(self.grid, self.plus + other.plus, self.minus + other.minus)

    def __sub__(self, other):
        return RadialFunction(self.grid, self.plus - other.plus, self.minus - other.minus)

    def scale(self, a: complex):
        return RadialFunction(self.grid, a * self.plus, a * self.minus)


class SpectralFunction(RadialFunction):
    """Same layout over an energy grid: plus = positive energies, minus = negative."""

    @property
    def energy_grid(self) -> RadialGrid:
        return self.grid


@dataclass(frozen=True)
class AngularIndex:
    k: int
    m: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k == 0:
            raise DomainError("k must be a nonzero integer")
        if (self.m - 0.5) != round(self.m - 0.5) or abs(self.m) > abs(self.k) - 0.5:
            raise DomainError("m must be a half-integer with |m| <= |k| - 1/2")

    @staticmethod
    def all_for(k: int) -> list["AngularIndex"]:
        return [AngularIndex(k, m + 0.5) for m in range(-abs(k), abs(k))]


# ---------------------------------------------------------------------------
# kernels

def _kernel_pair(ch: ew.ChannelParams, rho: np.ndarray):
    """(F(rho), G(rho)) as real arrays."""
    S = ew.psi_array(ch, rho)
    return S.imag, S.real


def _tail_weights(grid: RadialGrid, gamma: float) -> np.ndarray:
    """Grid weights plus the (0, x0) tail for integrands ~ x^{2 gamma}.

    Band-limited channel functions behave like x^{gamma-1} at the origin, so
    kernel times function times x^2 is a pure power there; for small gamma the
    piece below the first node is not negligible.
    """
    w = grid.weights.copy()
    x0 = grid.nodes[0]
    w[0] += x0 ** 3 / (2 * gamma + 1)
    return w


class HankelTransform:
    """Dense transform matrices FP = F(E r), GP = G(E r), FM = F(-E r), GM = G(-E r).

    On compatible log grids only the n_E + n_r - 1 distinct products E_i r_j
    are evaluated; otherwise a KernelTable is interpolated.
    """

    def __init__(self, ch: ew.ChannelParams, r_grid: RadialGrid, e_grid: RadialGrid,
                 table: "KernelTable | None" = None):
        self.ch = ch
        self.r_grid = r_grid
        self.e_grid = e_grid
        r = r_grid.nodes
        E = e_grid.nodes
        if table is None and r_grid.compatible(e_grid):
            n_r, n_e = r.size, E.size
            du = r_grid.log_step
            rho = np.exp(math.log(E[0] * r[0]) + du * np.arange(n_r + n_e - 1))
            fp, gp = _kernel_pair(ch, rho)
            fm, gm = _kernel_pair(ch, -rho)
            idx = np.arange(n_e)[:, None] + np.arange(n_r)[None, :]
            self.FP, self.GP, self.FM, self.GM = fp[idx], gp[idx], fm[idx], gm[idx]
        else:
            if table is None:
                table = KernelTable(ch, float(E[-1] * r[-1]))
            rho = E[:, None] * r[None, :]
            SP = table(rho)
            SM = table(-rho)
            self.FP, self.GP, self.FM, self.GM = SP.imag, SP.real, SM.imag, SM.real

        self.wr = _tail_weights(r_grid, ch.gamma)
        self.we = _tail_weights(e_grid, ch.gamma)

    def forward(self, f: RadialFunction) -> SpectralFunction:
        a = self.wr * f.plus
        b = self.wr * f.minus
        plus = SQRT_2_OVER_PI * (self.FP @ a + self.GP @ b)
        minus = SQRT_2_OVER_PI * (self.FM @ a + self.GM @ b)
        return SpectralFunction(self.e_grid, plus, minus)

    def inverse(self, g: SpectralFunction) -> RadialFunction:
        a = self.we * g.plus
        b = self.we * g.minus
        plus = SQRT_2_OVER_PI * (self.FP.T @ a + self.FM.T @ b)
        minus = SQRT_2_OVER_PI * (self.GP.T @ a + self.GM.T @ b)
        return RadialFunction(self.r_grid, plus, minus)


_TRANSFORMS: dict = {}
_CACHE_SIZE = 8


def get_transform(ch: ew.ChannelParams, r_grid: RadialGrid, e_grid: RadialGrid) -> HankelTransform:
    key = (ch.k, ch.nu, r_grid.key, e_grid.key)
    tr = _TRANSFORMS.get(key)
    if tr is None:
        if len(_TRANSFORMS) >= _CACHE_SIZE:
            _TRANSFORMS.pop(next(iter(_TRANSFORMS)))
        tr = HankelTransform(ch, r_grid, e_grid)
        _TRANSFORMS[key] = tr
    return tr


class KernelTable:
    """S(rho) = G + iF on |rho| <= rho_max by quintic Hermite interpolation.

    Tabulates Phi = S |rho|^{1-gamma}, smooth on each side of 0, at nodes
    +-(j + 1/2) h; |rho| < h/2 is evaluated directly. Phi' and Phi'' come from the radial ODE
        F' = (1 + nu/rho) G - (k+1) F / rho,   G' = (k-1) G / rho - (1 + nu/rho) F
    so only S itself is evaluated.
    """

    BLOCK = 1 << 14

    def __init__(self, ch: ew.ChannelParams, rho_max: float, h: float = 0.25):
        self.ch = ch
        self.h = h
        n = int(math.ceil(rho_max / h)) + 2
        pos = (np.arange(n) + 0.5) * h
        nodes = np.concatenate([-pos[::-1], pos])
        self.x0 = nodes[0]
        self.n = nodes.size
        S = ew.psi_array(ch, nodes)
        y, d, c = self._derivs(nodes, S)
        # quintic Hermite on each interval as a polynomial in t = (x - x_i)/h
        d, c = d * h, c * h * h
        y0, y1, d0, d1, c0, c1 = y[:-1], y[1:], d[:-1], d[1:], c[:-1], c[1:]
        self.coef = np.stack([
            y0,
            d0,
            0.5 * c0,
            -10 * y0 - 6 * d0 - 1.5 * c0 + 10 * y1 - 4 * d1 + 0.5 * c1,
            15 * y0 + 8 * d0 + 1.5 * c0 - 15 * y1 + 7 * d1 - c1,
            -6 * y0 - 3 * d0 - 0.5 * c0 + 6 * y1 - 3 * d1 + 0.5 * c1,
        ])
        self.rho_max = float(pos[-1])

    def _derivs(self, rho, S):
        k, nu, g = self.ch.k, self.ch.nu, self.ch.gamma
        F, G = S.imag, S.real
        Fp = (1 + nu / rho) * G - (k + 1) / rho * F
        Gp = (k - 1) / rho * G - (1 + nu / rho) * F
        Fpp = -nu / rho ** 2 * G + (1 + nu / rho) * Gp + (k + 1) / rho ** 2 * F - (k + 1) / rho * Fp
        Gpp = -(k - 1) / rho ** 2 * G + (k - 1) / rho * Gp + nu / rho ** 2 * F - (1 + nu / rho) * Fp
        p = 1.0 - g
        w = np.abs(rho) ** p
        w1 = p * w / rho
        w2 = p * (p - 1) * w / rho ** 2
        S1 = Gp + 1j * Fp
        S2 = Gpp + 1j * Fpp
        return S * w, S1 * w + S * w1, S2 * w + 2 * S1 * w1 + S * w2

    def _blocks(self, rho, fn) -> np.ndarray:
        # fixed-size blocks keep the temporaries small and reused; whole-matrix
        # temporaries spend most of their time in page faults
        rho = np.asarray(rho, dtype=float)
        if rho.size <= self.BLOCK:
            return fn(rho)
        flat = rho.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i in range(0, flat.size, self.BLOCK):
            out[i:i + self.BLOCK] = fn(flat[i:i + self.BLOCK])
        return out.reshape(rho.shape)

    def reduced(self, rho) -> np.ndarray:
        """Phi(rho) = S(rho) |rho|^{1-gamma}."""
        return self._blocks(rho, self._reduced)

    def _full(self, rho: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self._reduced(rho) * np.abs(rho) ** (self.ch.gamma - 1.0)

    def __call__(self, rho) -> np.ndarray:
        return self._blocks(rho, self._full)

    def _reduced(self, rho: np.ndarray) -> np.ndarray:
        if np.any(np.abs(rho) > self.rho_max):
            raise DomainError("rho outside the tabulated range")
        s = (rho - self.x0) / self.h
        i = np.clip(np.floor(s).astype(int), 0, self.n - 2)
        t = s - i
        C = self.coef
        out = C[5][i]
        for j in (4, 3, 2, 1, 0):
            out = out * t + C[j][i]
        # Phi jumps across 0 when nu != 0 (the Coulomb factor flips), so the
        # interval around the origin is evaluated directly
        near = np.abs(rho) < 0.5 * self.h
        if np.any(near):
            out[near] = ew.reduced_small(self.ch, rho[near])
        return out


# ---------------------------------------------------------------------------
# transforms and operator

def hankel_forward(ch: ew.ChannelParams, f: RadialFunction, energy_grid: RadialGrid) -> SpectralFunction:
    return get_transform(ch, f.grid, energy_grid).forward(f)


def hankel_inverse(ch: ew.ChannelParams, g: SpectralFunction, radial_grid: RadialGrid) -> RadialFunction:
    return get_transform(ch, radial_grid, g.grid).inverse(g)


def _fd_weights(x0: float, xs: np.ndarray, order: int = 1) -> np.ndarray:
    """Fornberg finite-difference weights for the order-th derivative at x0."""
    n = xs.size
    c = np.zeros((n, order + 1))
    c1 = 1.0
    c4 = xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for m in range(mn, 0, -1):
                    c[i, m] = c1 * (m * c[i - 1, m - 1] - c5 * c[i - 1, m]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for m in range(mn, 0, -1):
                c[j, m] = (c4 * c[j, m] - m * c[j, m - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def derivative(grid: RadialGrid, values: np.ndarray):
    """4th-order d/dr on the grid; returns (derivative, boundary flags)."""
    r = grid.nodes
    n = r.size
    if n < 9:
        raise DomainError("need at least 9 grid nodes for the finite-difference stencil")
    flags = np.zeros(n, dtype=bool)
    flags[:2] = flags[-2:] = True
    out = np.empty(n, dtype=complex)
    if grid.u_step is not None:
        # uniform in the map variable u: central 5-point in the interior
        du = grid.u_step
        u, jac, v = grid.u_nodes, grid.jac, values
        out[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * du) / jac[2:-2]
        for i in (0, 1, n - 2, n - 1):
            lo = 0 if i < 2 else n - 5
            w = _fd_weights(u[i], u[lo:lo + 5])
            out[i] = np.dot(w, v[lo:lo + 5]) / jac[i]
        return out, flags
    for i in range(n):
        lo = min(max(i - 2, 0), n - 5)
        out[i] = np.dot(_fd_weights(r[i], r[lo:lo + 5]), values[lo:lo + 5])
    return out, flags


def radial_dirac_apply(ch: ew.ChannelParams, f: RadialFunction) -> RadialFunction:
    """D_{nu,k} f with boundary rows flagged in ``flags``."""
    r = f.grid.nodes
    dp, flags = derivative(f.grid, f.plus)
    dm, _ = derivative(f.grid, f.minus)
    k, nu = ch.k, ch.nu
    plus = -nu / r * f.plus - dm + (k - 1) / r * f.minus
    minus = dp + (k + 1) / r * f.plus - nu / r * f.minus
    return RadialFunction(f.grid, plus, minus, flags)


def evolve_channel(ch: ew.ChannelParams, t: float, f0: "RadialFunction | SpectralFunction",
                   energy_grid: RadialGrid | None = None,
                   radial_grid: RadialGrid | None = None) -> RadialFunction:
    """P^{-1}[e^{-i t E sigma_3} P f0].

    Spectral input skips the forward transform, so the multiplier acts on
    exactly the given data (used for spikes).
    """
    if isinstance(f0, SpectralFunction):
        eg = f0.grid
        rg = radial_grid or eg
        g = f0
    else:
        eg = energy_grid or f0.grid
        rg = f0.grid
        g = get_transform(ch, rg, eg).forward(f0)
    tr = get_transform(ch, rg, eg)
    ph = np.exp(-1j * t * eg.nodes)
    return tr.inverse(SpectralFunction(eg, g.plus * ph, g.minus * np.conj(ph)))


def spectral_spike(grid: RadialGrid, index: int, channel: str = "plus") -> SpectralFunction:
    """Unit-norm spectral function supported at one energy node."""
    v = np.zeros(len(grid), dtype=complex)
    v[index] = 1.0 / math.sqrt(grid.weights[index])
    z = np.zeros_like(v)
    return SpectralFunction(grid, v, z) if channel == "plus" else SpectralFunction(grid, z, v)


def gaussian_profile(grid: RadialGrid, center: float, width: float = 1.0,
                     plus: complex = 1.0, minus: complex = 0.0, spectral: bool = False):
    b = np.exp(-((grid.nodes - center) / width) ** 2)
    cls = SpectralFunction if spectral else RadialFunction
    return cls(grid, plus * b, minus * b)


# ---------------------------------------------------------------------------
# angular part

def spinor_harmonic(idx: AngularIndex, theta, phi) -> np.ndarray:
    """Omega_{k,m}(theta, phi), shape (2,) + broadcast(theta, phi).

    Omega = (sqrt|k - m + 1/2| Y_l^{m-1/2}, sgn(-k) sqrt|k + m + 1/2| Y_l^{m+1/2}) / sqrt|2k + 1|
    with l = |k + 1/2| - 1/2 and Condon-Shortley Y_l^m.
    """
    k, m = idx.k, idx.m
    l = int(round(abs(k + 0.5) - 0.5))
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    norm = 1.0 / math.sqrt(abs(2 * k + 1))

    def Y(mm):
        mm = int(round(mm))
        if abs(mm) > l:
            return np.zeros(theta.shape, dtype=complex)
        return sph_harm_y(l, mm, theta, phi)

    up = math.sqrt(abs(k - m + 0.5)) * Y(m - 0.5)
    down = -np.sign(k) * math.sqrt(abs(k + m + 0.5)) * Y(m + 0.5)
    return norm * np.stack([up, down])


def sphere_quadrature(n_theta: int = 32, n_phi: int = 64):
    """Gauss-Legendre in cos(theta) times the uniform rule in phi."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.repeat(w[:, None], n_phi, axis=1) * (2 * np.pi / n_phi)
    return T, P, W


def angular_momentum(k: int) -> int:
    """l of the spherical harmonics inside Omega_{k,m}."""
    return int(round(abs(k + 0.5) - 0.5))


# ---------------------------------------------------------------------------
# norms

def _lq_r(weights: np.ndarray, dens: np.ndarray, q: float) -> np.ndarray:
    """(int |f|^q r^2 dr)^{1/q} along the last axis; dens = |f|^2 (angular l^2 included)."""
    if math.isinf(q):
        return np.sqrt(dens.max(axis=-1))
    return np.sum(weights * dens ** (q / 2), axis=-1) ** (1 / q)


def _lp_t(times: np.ndarray, vals: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(vals))
    return float(np.trapezoid(vals ** p, times) ** (1 / p))


def mixed_norm(channels: dict, p: float, q: float, time_grid) -> float:
    """||F||_{L^p_t L^q_{r^2 dr} L^2_omega} for F = sum over (k, m) of f_{k,m}(t) . Xi_{k,m}.

    ``channels`` maps (k, m) to a sequence of RadialFunction, one per time
    node. The angular L^2 norm is the l^2 sum of the radial coefficients.
    """
    if p < 1 or q < 1:
        raise DomainError("p and q must be >= 1")
    times = np.asarray(time_grid, dtype=float)
    grid = None
    dens = None
    for series in channels.values():
        if len(series) != times.size:
            raise DomainError("each channel needs one radial function per time node")
        for f in series:
            if grid is None:
                grid = f.grid
            elif f.grid is not grid and f.grid.key != grid.key:
                raise DomainError("all channels must share one radial grid")
        block = np.array([np.abs(f.plus) ** 2 + np.abs(f.minus) ** 2 for f in series])
        dens = block if dens is None else dens + block
    if dens is None:
        raise DomainError("no channels")
    return _lp_t(times, _lq_r(grid.weights, dens, q), p)


def sobolev_window(nu: float) -> float:
    return 0.5 + math.sqrt(1 - nu * nu)


def sobolev_norm(u0: dict, s: float, nu: float) -> float:
    """(sum over channels of int E^{2s} |P_k f|^2 E^2 dE)^{1/2}.

    ``u0`` maps (k, m) to the SpectralFunction P_k f_{k,m}.
    """
    if not 0 <= s <= sobolev_window(nu):
        raise DomainError(f"s must lie in [0, {sobolev_window(nu):.6g}]")
    tot = 0.0
    for g in u0.values():
        E = g.grid.nodes
        tot += float(g.grid.integrate(E ** (2 * s) * (np.abs(g.plus) ** 2 + np.abs(g.minus) ** 2)).real)
    return math.sqrt(tot)


def flat_sobolev_norm(radial: dict, s: float, energy_grid: RadialGrid) -> float:
    """Free-space homogeneous H^s norm of sum f_{k,m} . Xi_{k,m} via spherical Bessel transforms.

    The component f+ Omega_{k,m} carries angular momentum l(k) and f- Omega_{-k,m}
    carries l(-k); each is measured with the order-l Bessel transform. Intended
    for moderate E r (the Bessel recurrence costs O(max E r)).
    """
    tot = 0.0
    E = energy_grid.nodes
    for (k, _m), f in radial.items():
        r = f.grid.nodes
        x = E[:, None] * r[None, :]
        for comp, kk in ((f.plus, k), (f.minus, -k)):
            l = angular_momentum(kk)
            J = _sph_bessel_all(l, x.ravel())[l].reshape(x.shape)
            ghat = SQRT_2_OVER_PI * J @ (f.grid.weights * comp)
            tot += float(energy_grid.integrate(E ** (2 * s) * np.abs(ghat) ** 2).real)
    return math.sqrt(tot)


# ---------------------------------------------------------------------------
# Strichartz machinery

def q_upper(nu: float) -> float:
    """Upper end of the admissible q window, 3 / (1 - sqrt(1 - nu^2))."""
    d = 1 - math.sqrt(1 - nu * nu)
    return math.inf if d == 0 else 3 / d


def check_cond_k(q: float, gamma_min: float) -> tuple[float, float]:
    """Exponents (gamma_min - 1 + 3/q, 2/q - 1/2); raises DivergenceError if either has the wrong sign."""
    a = gamma_min - 1 + 3 / q
    b = 2 / q - 0.5
    if not a > 0:
        raise DivergenceError("dyadic sum over NR <= 1 diverges", "gamma_min - 1 + 3/q > 0")
    if not b < 0:
        raise DivergenceError("dyadic sum over NR >= 1 diverges", "2/q - 1/2 < 0")
    return a, b


DYADIC_RANGE = 40


def dyadic_q_sums(q: float, nu: float, gamma_min: float | None = None):
    """Suprema of the dyadic Schur sums of Q(NR) over N, R in 2^[-40, 40].

    Q(x) = x^a for x <= 1 and x^b for x >= 1, a = gamma_min - 1 + 3/q,
    b = 2/q - 1/2. Returns (supR_sumN, supN_sumR, truncation_bound): the
    bound is the tail of the full geometric series beyond the window.
    """
    if q < 1 or not math.isfinite(q):
        raise DomainError("q must be finite and >= 1")
    if gamma_min is None:
        gamma_min = math.sqrt(1 - nu * nu)
    a, b = check_cond_k(q, gamma_min)
    js = np.arange(-DYADIC_RANGE, DYADIC_RANGE + 1)

    def Q(j):
        return np.where(j <= 0, 2.0 ** (a * np.minimum(j, 0)), 2.0 ** (b * np.maximum(j, 0)))

    # Q depends on N R = 2^(n + r); for a fixed R the sum over N is a window of Q
    sums = np.array([np.sum(Q(js + r)) for r in js])
    full = 1 / (1 - 2.0 ** -a) + 2.0 ** b / (1 - 2.0 ** b)
    sup = float(sums.max())
    # sum over R for fixed N is the same window by symmetry of N R
    tail = max(full - sup, 0.0)
    return sup, sup, tail


def _smooth_cutoff(x):
    """C-infinity bump on (0, 1)."""
    out = np.zeros_like(x)
    m = (x > 0) & (x < 1)
    xm = x[m]
    out[m] = np.exp(-1 / (xm * (1 - xm)) + 4)
    return out


def random_block(rng, E: np.ndarray, N: float, n_modes: int = 4):
    """Random smooth spectral profile supported in [N, 2N] (two components)."""
    x = (E - N) / N
    chi = _smooth_cutoff(x)
    out = []
    for _ in range(2):
        c = rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)
        basis = np.cos(np.pi * np.outer(np.arange(n_modes), np.clip(x, 0, 1)))
        out.append(chi * (c @ basis))
    return out[0], out[1]


@dataclass
class StrichartzSetup:
    """Grids for one Strichartz evaluation."""
    T: float
    e_max: float
    e_min: float
    times: np.ndarray
    r_grid: RadialGrid
    e_nodes: np.ndarray
    e_weights: np.ndarray

    @classmethod
    def build(cls, T: float, e_min: float, e_max: float, r_pad: float | None = None):
        if r_pad is None:
            r_pad = 12.0 / e_min
        r_max = T + r_pad
        n_r = int(math.ceil(r_max / (math.pi / (3 * e_max))))
        rg = RadialGrid.uniform(r_max, n_r)
        dE = math.pi / (T + r_max)
        nE = int(math.ceil((e_max - e_min) / dE)) + 1
        E = np.linspace(e_min, e_max, nE)
        h = E[1] - E[0]
        w = np.full(nE, h)
        w[0] = w[-1] = h / 2
        dt = math.pi / (8 * e_max)
        nt = 2 * int(math.ceil(T / dt)) + 1
        times = np.linspace(-T, T, nt)
        return cls(T, e_max, e_min, times, rg, E, w * E * E)


def _channel_density(table: KernelTable, setup: StrichartzSetup, gp, gm, chunk: int = 256):
    """|f+(t, r)|^2 + |f-(t, r)|^2 for f = P^{-1}[e^{-itE sigma_3}(gp, gm)]."""
    r = setup.r_grid.nodes
    E = setup.e_nodes
    n_r = r.size
    rho = E[:, None] * r[None, :]
    w = np.outer(E ** (table.ch.gamma - 1), r ** (table.ch.gamma - 1))
    SP = table.reduced(rho) * w
    SM = table.reduced(-rho) * w
    # one real block matrix [[FP FM], [GP GM]] acting on (A, B) split into re/im
    K = SQRT_2_OVER_PI * np.block([[SP.imag.T, SM.imag.T], [SP.real.T, SM.real.T]])
    a = setup.e_weights * gp
    b = setup.e_weights * gm
    out = np.empty((setup.times.size, n_r))
    for s in range(0, setup.times.size, chunk):
        t = setup.times[s:s + chunk]
        ph = np.exp(-1j * np.outer(E, t))
        AB = np.vstack([a[:, None] * ph, b[:, None] * np.conj(ph)])
        Y = K @ np.hstack([AB.real, AB.imag])
        m = t.size
        re, im = Y[:, :m], Y[:, m:]
        dens = re * re + im * im
        out[s:s + chunk] = (dens[:n_r] + dens[n_r:]).T
    return out


@dataclass
class StrichartzReport:
    nu: float
    q_list: list
    s_list: list
    ratios: dict          # q -> list of per-trial ratios
    max_ratio: dict       # q -> max over trials
    config: dict = field(default_factory=dict)

    def rows(self):
        for q, s in zip(self.q_list, self.s_list):
            for i, v in enumerate(self.ratios[q]):
                yield q, s, i, v


def _validate_q(q: float, nu: float):
    if not math.isfinite(q) or q < 1:
        raise DomainError("q must be finite and >= 1")
    check_cond_k(q, math.sqrt(1 - nu * nu))


def _run_strichartz(nu: float, q_list, s_list, k_list, freq_exps, T, trials, seed, m_weights=True):
    Ns = [2.0 ** e for e in freq_exps]
    setup = StrichartzSetup.build(T, min(Ns), 2 * max(Ns))
    tables = {}
    E = setup.e_nodes
    ratios = {q: [] for q in q_list}
    for trial in range(trials):
        dens = np.zeros((setup.times.size, len(setup.r_grid)))
        sob = {s: 0.0 for s in set(s_list)}
        for k in k_list:
            ch = ew.make_channel(k, nu)
            if k not in tables:
                tables[k] = KernelTable(ch, float(E[-1] * setup.r_grid.nodes[-1]) + 1.0)
            # draws depend on (seed, trial, k) only, so runs with other T or k_max reuse them
            rng = np.random.default_rng([seed, trial, k + 10_000])
            gp = np.zeros(E.size, dtype=complex)
            gm = np.zeros(E.size, dtype=complex)
            for N in Ns:
                bp, bm = random_block(rng, E, N)
                gp += bp
                gm += bm
            # one radial profile per k; the m-multiplicity enters through random amplitudes
            amp = 1.0
            if m_weights:
                c = rng.normal(size=2 * abs(k)) + 1j * rng.normal(size=2 * abs(k))
                amp = float(np.sum(np.abs(c) ** 2))
            dens += amp * _channel_density(tables[k], setup, gp, gm)
            spec = np.abs(gp) ** 2 + np.abs(gm) ** 2
            for s in sob:
                sob[s] += amp * float(np.sum(setup.e_weights * E ** (2 * s) * spec))
        for q, s in zip(q_list, s_list):
            num = _lp_t(setup.times, _lq_r(setup.r_grid.weights, dens, q), 2.0)
            ratios[q].append(num / math.sqrt(sob[s]))
    return ratios, setup


def unit_frequency_strichartz(ch_set, q: float, nu: float, trials: int = 3, T: float = 50.0,
                              seed: int = 0) -> StrichartzReport:
    """max over trials of ||e^{-itD} u0||_{L^2_t L^q L^2_omega} / ||u0||_{L^2}, supp P_k u0 in [1, 2]."""
    _validate_q(q, nu)
    k_list = [int(k) for k in ch_set]
    ratios, setup = _run_strichartz(nu, [q], [0.0], k_list, [0], T, trials, seed)
    cfg = {"nu": nu, "q": q, "k": k_list, "trials": trials, "T": T, "seed": seed,
           "n_t": int(setup.times.size), "n_r": len(setup.r_grid), "n_E": int(setup.e_nodes.size)}
    return StrichartzReport(nu, [q], [0.0], ratios, {q: max(ratios[q])}, cfg)


def strichartz_scan(nu: float, q_list, s: float | None = None, trials: int = 2, k_max: int = 4,
                    T: float = 25.0, freq_exps=range(-3, 4), seed: int = 0) -> StrichartzReport:
    """Ratios ||e^{-itD} u0||_{L^2_t L^q L^2_omega} / ||u0||_{H^s} with s = 1 - 3/q.

    Data: every channel 1 <= |k| <= k_max, a random smooth piece in each
    dyadic block [N, 2N], N = 2^e for e in freq_exps.
    """
    q_list = [float(q) for q in q_list]
    for q in q_list:
        _validate_q(q, nu)
    s_list = [1 - 3 / q if s is None else s for q in q_list]
    for sv in s_list:
        if not 0 <= sv <= sobolev_window(nu):
            raise DomainError("s outside the Sobolev equivalence window")
    k_list = [k for k in range(-k_max, k_max + 1) if k]
    ratios, setup = _run_strichartz(nu, q_list, s_list, k_list, list(freq_exps), T, trials, seed)
    cfg = {"nu": nu, "q": q_list, "s": s_list, "k_max": k_max, "trials": trials, "T": T,
           "freq_exps": list(freq_exps), "seed": seed, "n_t": int(setup.times.size),
           "n_r": len(setup.r_grid), "n_E": int(setup.e_nodes.size)}
    return StrichartzReport(nu, q_list, s_list, ratios, {q: max(v) for q, v in ratios.items()}, cfg)
