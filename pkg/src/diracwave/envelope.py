"""Three-regime envelope for j0 + j1, its derivative variant and dyadic L^2 bounds.

The envelope, for a channel with |k| and gamma, reads

    C (min(rho/2, 1))^{gamma-1} e^{-D|k|}          rho <= max(|k|/2, 2)   (inner)
    C |k|^{-3/4} (||k| - rho| + |k|^{1/3})^{-1/4}   |k|/2 <= rho <= 2|k|   (transition)
    C / rho                                         rho >= 2|k|            (outer)

with the minimum taken where regions overlap. Constants are fitted on a
finite scan: one (C, D) pair for every channel of the scan.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import eigenwave as ew
from .errors import AccuracyError, VerificationError

REGIMES = ("inner", "transition", "outer")

D_MIN = 1e-3
D_MAX = 10.0

GL_BASE = 64
DYADIC_RTOL = 1e-8
DYADIC_MAX_NODES = 1 << 16
PANEL_WIDTH = 16.0


@dataclass(frozen=True)
class EnvelopeConstants:
    C: float
    D: float

    def __post_init__(self):
        if not (self.C > 0 and self.D > 0):
            raise ValueError("envelope constants must be positive")


@dataclass
class Sample:
    k: int
    nu: float
    rho: float
    regime: str
    j0: float
    j1: float
    bound: float = float("nan")
    ratio: float = float("nan")


@dataclass
class EnvelopeReport:
    samples: list
    constants: EnvelopeConstants
    worst_ratio: float
    worst_sample: Sample | None = None
    tightness: float = float("nan")   # worst_ratio; >= 1/4 means the fit is not vacuous
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.worst_ratio <= 1.0

    def to_json(self, config: dict | None = None) -> str:
        worst = sorted(self.samples, key=lambda s: -s.ratio)[:10]
        doc = {
            "config": config or {},
            "constants": asdict(self.constants),
            "worst_ratio": self.worst_ratio,
            "tightness": self.tightness,
            "ok": self.ok,
            "worst_samples": [asdict(s) for s in worst],
            "extra": self.extra,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "nu", "rho", "regime", "j0", "j1", "bound", "ratio"])
            for s in self.samples:
                w.writerow([s.k, f"{s.nu:.17g}", f"{s.rho:.17g}", s.regime, f"{s.j0:.17e}",
                            f"{s.j1:.17e}", f"{s.bound:.17e}", f"{s.ratio:.17e}"])


def ceil_sig(x: float, digits: int = 2) -> float:
    """Round x > 0 up to `digits` significant digits."""
    if x <= 0 or not math.isfinite(x):
        return x
    e = math.floor(math.log10(x)) - digits + 1
    m = x / 10.0 ** e
    # guard against representation noise pushing an exact value up a step
    up = math.ceil(m - 1e-9)
    return float(f"{up}e{e}")


def d_lattice(d_min: float = D_MIN, d_max: float = D_MAX) -> np.ndarray:
    """All values m * 10^e with m in 10..99 between d_min and d_max."""
    vals = []
    for e in range(math.floor(math.log10(d_min)) - 1, math.ceil(math.log10(d_max)) + 1):
        for m in range(10, 100):
            v = float(f"{m}e{e - 1}")
            if d_min <= v <= d_max:
                vals.append(v)
    return np.array(sorted(set(vals)))


def regimes_for(k: int, rho: float) -> list[str]:
    ak = abs(k)
    out = []
    if rho <= max(ak / 2, 2.0):
        out.append("inner")
    if ak / 2 <= rho <= 2 * ak:
        out.append("transition")
    if rho >= 2 * ak:
        out.append("outer")
    return out


def _shape(regime: str, k: int, gamma: float, rho: float, D: float, inner_shift: float) -> float:
    ak = abs(k)
    if regime == "inner":
        return min(rho / 2, 1.0) ** (gamma - 1 - inner_shift) * math.exp(-D * ak)
    if regime == "transition":
        return ak ** -0.75 * (abs(ak - rho) + ak ** (1 / 3)) ** -0.25
    return 1.0 / rho


def envelope_shape(k: int, gamma: float, rho: float, D: float, derivative: bool = False):
    """(bound with C = 1, regime attaining the minimum)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    shift = 1.0 if derivative else 0.0
    best = None
    for reg in regimes_for(k, rho):
        v = _shape(reg, k, gamma, rho, D, shift)
        if best is None or v < best[0]:
            best = (v, reg)
    return best


def envelope_bound(k: int, gamma: float, rho: float, c: EnvelopeConstants,
                   derivative: bool = False) -> float:
    """Envelope value; with ``derivative`` the inner exponent is gamma - 2."""
    return c.C * envelope_shape(k, gamma, rho, c.D, derivative)[0]


# ---------------------------------------------------------------------------
# scans

def scan(k_set, nu_set, rho_grid, method="auto") -> list[Sample]:
    """j0, j1 on the product grid (rho > 0)."""
    rho_grid = np.asarray(rho_grid, dtype=float)
    out = []
    for k in k_set:
        for nu in nu_set:
            ch = ew.make_channel(k, nu)
            S, dS = ew.psi_array(ch, rho_grid, method, derivative=True)
            j0 = np.abs(S)
            j1 = np.abs(dS - (ch.gamma - 1) / rho_grid * S)
            for r, a, b in zip(rho_grid, j0, j1):
                out.append(Sample(int(k), float(nu), float(r), "", float(a), float(b)))
    return out


def _ratio_table(samples, d_values, derivative=False, key=lambda s: s.j0 + s.j1):
    """ratios[i, j] = measured_i / shape_i(D_j) for C = 1 (vectorized envelope_shape)."""
    k = np.array([abs(s.k) for s in samples], dtype=float)
    nu = np.array([s.nu for s in samples])
    rho = np.array([s.rho for s in samples])
    val = np.array([key(s) for s in samples])
    gamma = np.sqrt(k * k - nu * nu)
    shift = 1.0 if derivative else 0.0
    d = np.asarray(d_values, dtype=float)[None, :]
    inner = np.where(rho <= np.maximum(k / 2, 2.0),
                     np.minimum(rho / 2, 1.0) ** (gamma - 1 - shift), np.inf)
    inner = inner[:, None] * np.exp(-d * k[:, None])
    trans = np.where((k / 2 <= rho) & (rho <= 2 * k),
                     k ** -0.75 * (np.abs(k - rho) + np.cbrt(k)) ** -0.25, np.inf)
    outer = np.where(rho >= 2 * k, 1.0 / rho, np.inf)
    shape = np.minimum(inner, np.minimum(trans, outer)[:, None])
    return val[:, None] / shape


def fit_from_samples(samples, d_values=None, derivative=False, key=None) -> EnvelopeConstants:
    """Smallest C (2 significant digits, rounded up), then the largest D keeping it.

    Raises VerificationError when no D >= D_MIN on the lattice gives a finite C.
    """
    if not samples:
        raise ValueError("no samples")
    if d_values is None:
        d_values = d_lattice()
    key = key or (lambda s: s.j0 + s.j1)
    ratios = _ratio_table(samples, d_values, derivative, key)
    cmax = ratios.max(axis=0)
    finite = np.isfinite(cmax)
    if not np.any(finite):
        worst = samples[int(np.argmax(ratios[:, 0]))]
        raise VerificationError("no feasible envelope constants", asdict(worst))
    c_of_d = np.array([ceil_sig(float(c)) if f else np.inf for c, f in zip(cmax, finite)])
    c_best = float(np.min(c_of_d))
    j = int(np.flatnonzero(c_of_d == c_best).max())
    return EnvelopeConstants(c_best, float(d_values[j]))


def build_report(samples, c: EnvelopeConstants, derivative=False, key=None) -> EnvelopeReport:
    key = key or (lambda s: s.j0 + s.j1)
    worst = None
    for s in samples:
        gamma = math.sqrt(s.k * s.k - s.nu * s.nu)
        shape, reg = envelope_shape(s.k, gamma, s.rho, c.D, derivative)
        s.regime = reg
        s.bound = c.C * shape
        s.ratio = key(s) / s.bound
        if worst is None or s.ratio > worst.ratio:
            worst = s
    wr = worst.ratio if worst else float("nan")
    return EnvelopeReport(samples, c, wr, worst, wr)


def fit_constants(k_set, nu_set, rho_grid, samples=None) -> EnvelopeConstants:
    """One (C, D) pair for the whole scan."""
    if not (len(k_set) and len(nu_set) and len(rho_grid)):
        raise ValueError("grids must be nonempty")
    if samples is None:
        samples = scan(k_set, nu_set, rho_grid)
    return fit_from_samples(samples)


def verify_envelope(k_set, nu_set, rho_grid, samples=None) -> EnvelopeReport:
    if samples is None:
        samples = scan(k_set, nu_set, rho_grid)
    c = fit_from_samples(samples)
    return build_report(samples, c)


def derivative_envelope_check(k, nu, rho_grid, c: EnvelopeConstants | None = None) -> EnvelopeReport:
    """|psi'| against the envelope with inner exponent gamma - 2.

    ``k`` and ``nu`` may be scalars or sequences. When ``c`` is None the
    constants are fitted to |psi'| itself; otherwise the given pair is checked
    and a VerificationError raised on violation.
    """
    ks = np.atleast_1d(k).tolist()
    nus = np.atleast_1d(nu).tolist()
    rho_grid = np.asarray(rho_grid, dtype=float)
    samples = []
    for kk in ks:
        for n in nus:
            ch = ew.make_channel(int(kk), float(n))
            _, dS = ew.psi_array(ch, rho_grid, derivative=True)
            for r, d in zip(rho_grid, np.abs(dS)):
                # j0 holds |psi'| here; j1 unused
                samples.append(Sample(int(kk), float(n), float(r), "", float(d), 0.0))
    key = lambda s: s.j0  # noqa: E731
    fitted = c is None
    if fitted:
        c = fit_from_samples(samples, derivative=True, key=key)
    rep = build_report(samples, c, derivative=True, key=key)
    if not fitted and not rep.ok:
        raise VerificationError("derivative envelope violated", asdict(rep.worst_sample))
    return rep


# ---------------------------------------------------------------------------
# regime diagnostics

def loglog_slope(x, y) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def inner_slope(k: int, nu: float, rho_grid=None, derivative=False) -> float:
    """Log-log slope of j0 (or |psi'|) as rho -> 0+."""
    if rho_grid is None:
        rho_grid = np.logspace(-2, np.log10(0.02), 5)
    ch = ew.make_channel(k, nu)
    S, dS = ew.psi_array(ch, rho_grid, derivative=True)
    return loglog_slope(rho_grid, np.abs(dS if derivative else S))


def outer_sup(samples) -> float:
    """sup of rho (j0 + j1) over samples in the outer region rho >= 2|k|."""
    vals = [s.rho * (s.j0 + s.j1) for s in samples if s.rho >= 2 * abs(s.k)]
    return max(vals) if vals else float("nan")


def coalescence_slope(ks=(8, 16, 32, 64), nu: float = 0.0) -> float:
    """Slope of log j0(rho = |k|) against log|k|."""
    j0 = [abs(ew.evaluate(ew.make_channel(k, nu), float(abs(k))).S) for k in ks]
    return loglog_slope([abs(k) for k in ks], j0)


# ---------------------------------------------------------------------------
# dyadic L^2 norms

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_BASE)


def _composite_gl(a: float, b: float, panels: int):
    edges = np.linspace(a, b, panels + 1)
    h = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + h[:, None] * _GL_X[None, :]).ravel()
    w = (h[:, None] * _GL_W[None, :]).ravel()
    return x, w


def dyadic_pair(k: int, nu: float, R: float, rtol: float = DYADIC_RTOL):
    """(||psi||, ||psi'||) in L^2([R, 2R], r^2 dr).

    Composite 64-point Gauss-Legendre; panels start at width <= PANEL_WIDTH
    (a few oscillation periods) and are doubled until two passes agree to rtol.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    ch = ew.make_channel(k, nu)
    prev = None
    panels = max(1, 2 ** math.ceil(math.log2(R / PANEL_WIDTH))) if R > PANEL_WIDTH else 1
    while True:
        r, w = _composite_gl(R, 2 * R, panels)
        S, dS = ew.psi_array(ch, r, derivative=True)
        wr = w * r * r
        cur = np.sqrt(np.array([np.sum(wr * np.abs(S) ** 2), np.sum(wr * np.abs(dS) ** 2)]))
        if prev is not None and np.all(np.abs(cur - prev) <= rtol * cur):
            return float(cur[0]), float(cur[1])
        if 2 * panels * GL_BASE > DYADIC_MAX_NODES:
            raise AccuracyError("dyadic quadrature did not stabilize",
                                float(np.max(np.abs(cur - prev) / cur)))
        prev = cur
        panels *= 2


def dyadic_l2(k: int, nu: float, R: float, which: str = "psi") -> float:
    """(int_R^{2R} |psi|^2 r^2 dr)^{1/2}, or the same for psi'."""
    if which not in ("psi", "psi_prime"):
        raise ValueError("which must be 'psi' or 'psi_prime'")
    lr = math.log2(R)
    if abs(lr - round(lr)) > 1e-12 or not -10 <= round(lr) <= 12:
        raise ValueError("R must be a power of two in [2^-10, 2^12]")
    a, b = dyadic_pair(k, nu, R)
    return a if which == "psi" else b


def dyadic_profile(k: int, nu: float, exps) -> dict:
    """Dyadic norms for R = 2^e, e in exps."""
    Rs = [2.0 ** e for e in exps]
    pairs = [dyadic_pair(k, nu, R) for R in Rs]
    return {"R": Rs, "psi": [p[0] for p in pairs], "psi_prime": [p[1] for p in pairs]}


def dyadic_constant(k: int, nu: float, profile: dict) -> float:
    """Smallest C with ||psi||_R <= C R^{gamma+1/2} (R <= 1) and <= C R^{1/2} (R >= 1)."""
    gamma = math.sqrt(k * k - nu * nu)
    c = 0.0
    for R, v in zip(profile["R"], profile["psi"]):
        e = gamma + 0.5 if R <= 1 else 0.5
        c = max(c, v / R ** e)
    return c
