"""Command-line driver.

Every subcommand validates its parameters before computing, writes its
outputs (CSV with 17 significant digits, JSON summaries) into an output
directory and embeds the resolved configuration in each file.

Exit codes: 0 success, 2 usage or validation error, 3 accuracy failure,
4 verification failure or divergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import eigenwave as ew
from . import envelope as env
from . import saddle as sd
from . import spectral as sp
from .errors import (AccuracyError, ConstructionError, DivergenceError, DomainError,
                     RangeError, VerificationError)

log = logging.getLogger("diracwave")

OUT_ENV = "DIRACWAVE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ACCURACY = 3
EXIT_VERIFY = 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers

def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _versions() -> dict:
    return {"diracwave": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _config(args) -> dict:
    # settings that do not change any number are left out, so identical
    # inputs give identical files wherever they are written
    skip = {"func", "config", "out_dir", "workers", "verbose"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        cfg[k] = list(v) if isinstance(v, tuple) else v
    return cfg


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get(OUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_csv(path: Path, config: dict, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row) + "\n")


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"bad number list {text!r}") from e


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise UsageError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _check_nu(nu: float) -> None:
    if not abs(nu) <= 1:
        raise UsageError("nu must lie in [-1, 1]")


def _check_channel(k: int, nu: float) -> None:
    if k == 0:
        raise UsageError("k must be nonzero")
    _check_nu(nu)
    if abs(k) == 1 and abs(nu) == 1:
        raise UsageError("gamma = 0 (|k| = 1, |nu| = 1) is not supported")


def _pmap(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def _rho_grid(args) -> np.ndarray:
    if args.rho:
        grid = np.array(_floats(args.rho))
    else:
        if args.points < 1:
            raise UsageError("--points must be >= 1")
        if not 0 < args.rho_min <= args.rho_max:
            raise UsageError("need 0 < rho-min <= rho-max")
        grid = np.geomspace(args.rho_min, args.rho_max, args.points)
    if grid.size == 0:
        raise UsageError("empty rho grid")
    return grid


# ---------------------------------------------------------------------------
# eval

def cmd_eval(args) -> int:
    _check_channel(args.k, args.nu)
    rho = _rho_grid(args)
    if np.any(rho == 0):
        raise UsageError("rho must be nonzero")
    ch = ew.make_channel(args.k, args.nu)
    rows, bad = [], []
    for r in rho:
        try:
            e = ew.evaluate(ch, float(r), args.method, derivative=True)
        except AccuracyError as exc:
            bad.append((float(r), str(exc)))
            continue
        j1 = abs(e.dS - (ch.gamma - 1) / r * e.S)
        rows.append((float(r), e.S.imag, e.S.real, abs(e.S), j1, e.method, e.est_error))
        if e.est_error > args.tol:
            bad.append((float(r), f"estimated error {e.est_error:.3e} above {args.tol:.1e}"))
    cfg = _config(args)
    path = _out_dir(args) / args.out
    _write_csv(path, cfg, ["rho", "F", "G", "j0", "j1", "method_used", "est_error"], rows)
    print(f"wrote {path} ({len(rows)} rows)")
    if bad:
        for r, msg in bad:
            print(f"accuracy failure at rho={_fmt(r)}: {msg}", file=sys.stderr)
        return EXIT_ACCURACY
    return EXIT_OK


# ---------------------------------------------------------------------------
# envelope and dyadic checks

def _scan_one(job):
    k, nus, grid = job
    return env.scan([k], nus, grid)


def cmd_verify_envelope(args) -> int:
    ks = sorted({k for k in _ints(args.k)} if args.k else
                {s * k for k in range(1, args.k_max + 1) for s in (1, -1)})
    if not ks or 0 in ks:
        raise UsageError("k set must be nonempty and exclude 0")
    nus = _floats(args.nu)
    if not nus:
        raise UsageError("nu set must be nonempty")
    for k in ks:
        for nu in nus:
            _check_channel(k, nu)
    grid = _rho_grid(args)
    out = _out_dir(args)
    cfg = _config(args)
    parts = _pmap(_scan_one, [(k, nus, grid) for k in ks], args.workers)
    samples = [s for p in parts for s in p]
    doc = {"config": cfg, "versions": _versions()}
    try:
        rep = env.verify_envelope(ks, nus, grid, samples=samples)
    except VerificationError as exc:
        doc.update(ok=False, error=str(exc), worst_sample=exc.worst)
        _write_json(out / "envelope.json", doc)
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    rep.extra["outer_sup"] = env.outer_sup(samples)
    if args.middle:
        mk = _ints(args.middle_k)
        rep.extra["coalescence_slope"] = env.coalescence_slope(mk, nus[0])
        rep.extra["coalescence_k"] = mk
    _write_csv(out / "envelope.csv", cfg,
               ["k", "nu", "rho", "regime", "j0", "j1", "bound", "ratio"],
               [(s.k, s.nu, s.rho, s.regime, s.j0, s.j1, s.bound, s.ratio) for s in rep.samples])
    summary = json.loads(rep.to_json(cfg))
    summary["versions"] = _versions()
    _write_json(out / "envelope.json", summary)
    print(f"C = {rep.constants.C:g}, D = {rep.constants.D:g}, worst ratio {rep.worst_ratio:.4f}")
    if "coalescence_slope" in rep.extra:
        print(f"coalescence slope {rep.extra['coalescence_slope']:.4f}")
    return EXIT_OK


def _dyadic_one(job):
    k, nu, exps = job
    return env.dyadic_profile(k, nu, exps)


def dyadic_summary(k: int, nu: float, prof: dict, slope_tol: float = 0.05) -> dict:
    """Slopes of the dyadic L^2 norms for R <= 1 and R >= 4|k| against their targets."""
    gamma = math.sqrt(k * k - nu * nu)
    R = np.array(prof["R"])
    res = {"k": k, "nu": nu, "gamma": gamma, "constant": env.dyadic_constant(k, nu, prof)}
    for name, target_in in (("psi", gamma + 0.5), ("psi_prime", gamma - 0.5)):
        v = np.array(prof[name])
        lo, hi = R <= 1, R >= 4 * abs(k)
        res[name + "_inner_slope"] = env.loglog_slope(R[lo], v[lo]) if lo.sum() >= 2 else None
        res[name + "_outer_slope"] = env.loglog_slope(R[hi], v[hi]) if hi.sum() >= 2 else None
        res[name + "_inner_target"] = target_in
    ok = True
    for key, target in (("psi_inner_slope", gamma + 0.5), ("psi_outer_slope", 0.5)):
        if res[key] is not None and abs(res[key] - target) > slope_tol:
            ok = False
    res["ok"] = ok
    return res


def cmd_verify_dyadic(args) -> int:
    ks = _ints(args.k)
    if not ks or 0 in ks:
        raise UsageError("k set must be nonempty and exclude 0")
    for k in ks:
        _check_channel(k, args.nu)
    if args.exp_min > args.exp_max:
        raise UsageError("need exp-min <= exp-max")
    exps = list(range(args.exp_min, args.exp_max + 1))
    if min(exps) < -10 or max(exps) > 12:
        raise UsageError("dyadic exponents must lie in [-10, 12]")
    cfg = _config(args)
    profs = _pmap(_dyadic_one, [(k, args.nu, exps) for k in ks], args.workers)
    rows, summ = [], []
    for k, prof in zip(ks, profs):
        for R, a, b in zip(prof["R"], prof["psi"], prof["psi_prime"]):
            rows.append((k, float(args.nu), R, a, b))
        summ.append(dyadic_summary(k, args.nu, prof))
    consts = [s["constant"] for s in summ]
    spread = max(consts) / min(consts)
    ok = all(s["ok"] for s in summ) and spread <= 10
    out = _out_dir(args)
    _write_csv(out / "dyadic.csv", cfg, ["k", "nu", "R", "psi_l2", "psi_prime_l2"], rows)
    _write_json(out / "dyadic.json", {"config": cfg, "versions": _versions(), "channels": summ,
                                      "constant_spread": spread, "ok": ok})
    print(f"constants {min(consts):.4g}..{max(consts):.4g} (spread {spread:.3g}), ok={ok}")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# saddle dump

def cmd_saddle_dump(args) -> int:
    if args.rho is None or not args.rho > 0:
        raise UsageError("--rho must be positive")
    _check_nu(args.nu)
    if args.q is not None:
        gamma = 1.0 + args.q * args.rho
    elif args.gamma is not None:
        gamma = args.gamma
    else:
        raise UsageError("give --gamma or --q")
    if not gamma > 0:
        raise UsageError("gamma must be positive (q*rho > -1)")
    if not 0 < args.q2 < args.q1 < 1 < args.q0:
        raise UsageError("thresholds must satisfy 0 < q2 < q1 < 1 < q0")
    p = sd.PhaseParams.from_gamma(gamma, args.nu, args.rho)
    tag = sd.case_tag(p, args.q0, args.q1, args.q2)
    c = sd.select_contour(p, q0=args.q0, q1=args.q1, q2=args.q2)
    cfg = _config(args)
    cfg["gamma_resolved"] = gamma
    cfg["q_resolved"] = p.q
    path = _out_dir(args) / args.out
    sd.dump_contour(p, c, path, args.per_segment,
                    comments=["config: " + json.dumps(cfg, sort_keys=True),
                              f"case: {tag}"])
    print(f"case {tag}, q = {_fmt(p.q)}")
    if p.q > 0:
        sdat = sd.saddle_points(p.q)
        zs = [sdat.z_minus] if sdat.coalesced else [sdat.z_minus, sdat.z_plus]
        print("saddles: " + ", ".join(f"{z.real:.6f}{z.imag:+.6f}i" for z in zs))
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# data descriptors for hankel / evolve

def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise UsageError("complex values are [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def load_descriptor(path) -> dict:
    """Parse {nu, channels: [{k, m, profile: {type, params}}], grids: {...}}."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read descriptor: {exc}") from exc
    try:
        nu = float(doc["nu"])
        _check_nu(nu)
        g = doc.get("grids", {})
        grid = sp.RadialGrid.softplus(float(g.get("rmin", sp.DEFAULT_RMIN)),
                                      float(g.get("rmax", sp.DEFAULT_RMAX)),
                                      float(g.get("du", sp.DEFAULT_DU)),
                                      float(g.get("scale", 1.0)))
        chans = []
        for c in doc["channels"]:
            idx = sp.AngularIndex(int(c["k"]), float(c["m"]))
            _check_channel(idx.k, nu)
            prof = c["profile"]
            kind = prof["type"]
            par = prof.get("params", {})
            if kind == "gaussian":
                domain = par.get("domain", "r")
                if domain not in ("r", "E"):
                    raise UsageError("gaussian domain must be 'r' or 'E'")
                f = sp.gaussian_profile(grid, float(par["center"]), float(par.get("width", 1.0)),
                                        _complex(par.get("plus", 1.0)),
                                        _complex(par.get("minus", 0.0)), spectral=domain == "E")
            elif kind == "spike":
                E0 = float(par["energy"])
                i = int(np.argmin(np.abs(grid.nodes - E0)))
                f = sp.spectral_spike(grid, i, par.get("channel", "plus"))
            else:
                raise UsageError(f"unknown profile type {kind!r}")
            chans.append((idx, f))
        if not chans:
            raise UsageError("descriptor has no channels")
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad descriptor: {exc}") from exc
    return {"nu": nu, "grid": grid, "channels": chans, "raw": doc}


def _hankel_one(job):
    k, nu, grid, f = job
    ch = ew.make_channel(k, nu)
    tr = sp.get_transform(ch, grid, grid)
    if isinstance(f, sp.SpectralFunction):
        g = tr.inverse(f)
        back = tr.forward(g)
    else:
        g = tr.forward(f)
        back = tr.inverse(g)
    return g, (back - f).norm() / f.norm(), g.norm() / f.norm() - 1


def cmd_hankel(args) -> int:
    d = load_descriptor(args.data)
    cfg = _config(args)
    cfg["descriptor"] = d["raw"]
    jobs = [(idx.k, d["nu"], d["grid"], f) for idx, f in d["channels"]]
    res = _pmap(_hankel_one, jobs, args.workers)
    rows, summ = [], []
    for (idx, f), (g, rt, iso) in zip(d["channels"], res):
        dom = "E" if isinstance(f, sp.SpectralFunction) else "r"
        out_dom = "E" if dom == "r" else "r"
        for x, a, b in zip(g.grid.nodes, g.plus, g.minus):
            rows.append((idx.k, idx.m, out_dom, float(x), a.real, a.imag, b.real, b.imag))
        summ.append({"k": idx.k, "m": idx.m, "input_domain": dom, "isometry_error": iso,
                     "roundtrip_error": rt, "profile": d["raw"]["channels"][len(summ)]["profile"]["type"]})
    out = _out_dir(args)
    _write_csv(out / "hankel.csv", cfg,
               ["k", "m", "domain", "x", "plus_re", "plus_im", "minus_re", "minus_im"], rows)
    _write_json(out / "hankel.json", {"config": cfg, "versions": _versions(), "channels": summ})
    # a spike is not normalizable on a finite grid, so it is left out of the summary line
    errs = [max(abs(s["isometry_error"]), s["roundtrip_error"]) for s in summ
            if s["profile"] != "spike"]
    if errs:
        print(f"{len(summ)} channels, worst isometry/roundtrip error {max(errs):.3e}")
    return EXIT_OK


def _evolve_one(job):
    k, nu, f, times = job
    ch = ew.make_channel(k, nu)
    return [sp.evolve_channel(ch, t, f) for t in times]


def cmd_evolve(args) -> int:
    d = load_descriptor(args.data)
    times = _floats(args.t)
    if not times:
        raise UsageError("--t needs at least one time")
    cfg = _config(args)
    cfg["descriptor"] = d["raw"]
    jobs = [(idx.k, d["nu"], f, times) for idx, f in d["channels"]]
    res = _pmap(_evolve_one, jobs, args.workers)
    rows, norms = [], []
    for (idx, f), series in zip(d["channels"], res):
        spectral = isinstance(f, sp.SpectralFunction)
        # spectral data (spikes included) are compared with their own t = 0 image
        n0 = (sp.evolve_channel(ew.make_channel(idx.k, d["nu"]), 0.0, f).norm() if spectral
              else f.norm())
        for t, u in zip(times, series):
            for r, a, b in zip(u.grid.nodes, u.plus, u.minus):
                rows.append((t, idx.k, idx.m, float(r), a.real, a.imag, b.real, b.imag))
            entry = {"t": t, "k": idx.k, "m": idx.m, "norm": u.norm(), "reference_norm": n0,
                     "relative_drift": u.norm() / n0 - 1}
            if t == 0 and not spectral:
                entry["roundtrip_error"] = (u - f).norm() / n0
            norms.append(entry)
    out = _out_dir(args)
    _write_csv(out / "evolve.csv", cfg,
               ["t", "k", "m", "r", "plus_re", "plus_im", "minus_re", "minus_im"], rows)
    _write_json(out / "evolve.json", {"config": cfg, "versions": _versions(), "norms": norms})
    drift = max(abs(n["relative_drift"]) for n in norms)
    print(f"{len(jobs)} channels x {len(times)} times, worst norm drift {drift:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# strichartz

def cmd_strichartz(args) -> int:
    _check_nu(args.nu)
    qs = _floats(args.q)
    if not qs:
        raise UsageError("--q needs at least one value")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if not args.T > 0:
        raise UsageError("--T must be positive")
    cfg = _config(args)
    out = _out_dir(args)
    try:
        if args.unit:
            ks = _ints(args.k) if args.k else [1, -1]
            reps = [sp.unit_frequency_strichartz(ks, q, args.nu, args.trials, args.T, args.seed)
                    for q in qs]
            ratios = {q: r.ratios[q] for q, r in zip(qs, reps)}
            s_list = [0.0] * len(qs)
            max_ratio = {q: r.max_ratio[q] for q, r in zip(qs, reps)}
            run_cfg = [r.config for r in reps]
        else:
            freq = range(args.freq_min, args.freq_max + 1)
            rep = sp.strichartz_scan(args.nu, qs, args.s, args.trials, args.k_max, args.T, freq,
                                     args.seed)
            ratios, s_list, max_ratio, run_cfg = rep.ratios, rep.s_list, rep.max_ratio, rep.config
        sums = {q: sp.dyadic_q_sums(q, args.nu) for q in qs}
    except DivergenceError as exc:
        _write_json(out / "strichartz.json", {"config": cfg, "versions": _versions(), "ok": False,
                                              "error": str(exc), "inequality": exc.inequality})
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    rows = [(q, s, i, v) for q, s in zip(qs, s_list) for i, v in enumerate(ratios[q])]
    _write_csv(out / "strichartz.csv", cfg, ["q", "s", "trial", "ratio"], rows)
    _write_json(out / "strichartz.json", {
        "config": cfg, "versions": _versions(), "ok": True, "run": run_cfg,
        "max_ratio": {_fmt(q): v for q, v in max_ratio.items()},
        "dyadic_sums": {_fmt(q): {"supR_sumN": a, "supN_sumR": b, "truncation": t}
                        for q, (a, b, t) in sums.items()},
    })
    for q in qs:
        print(f"q = {q:g}: max ratio {max_ratio[q]:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for this command's flags")
    common.add_argument("--out-dir", default=None,
                        help=f"output directory (default: ${OUT_ENV} or the current directory)")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes for independent channels")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="diracwave", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def rho_flags(q, rmin, rmax, pts):
        q.add_argument("--rho", help="comma-separated rho values (overrides the grid flags)")
        q.add_argument("--rho-min", type=float, default=rmin)
        q.add_argument("--rho-max", type=float, default=rmax)
        q.add_argument("--points", type=int, default=pts, help="log-spaced grid size")

    e = sub.add_parser("eval", parents=[common], help="evaluate psi_k on a rho grid")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--nu", type=float, default=0.0)
    rho_flags(e, 0.01, 400.0, 60)
    e.add_argument("--method", default="auto", choices=[m.value for m in ew.EvalMethod])
    e.add_argument("--tol", type=float, default=1e-8, help="largest accepted error estimate")
    e.add_argument("--out", default="eval.csv")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify-envelope", parents=[common], help="fit and check the envelope")
    v.add_argument("--k", help="comma-separated k values (default: all 0 < |k| <= k-max)")
    v.add_argument("--k-max", type=int, default=20)
    v.add_argument("--nu", default="0,0.3,-0.3,0.7,-0.7,0.99,-0.99")
    rho_flags(v, 0.01, 400.0, 60)
    v.add_argument("--middle", action="store_true", help="also fit the coalescence slope")
    v.add_argument("--middle-k", default="8,16,32,64")
    v.set_defaults(func=cmd_verify_envelope)

    dy = sub.add_parser("verify-dyadic", parents=[common], help="dyadic L^2 norms and slopes")
    dy.add_argument("--k", default="1,2,5,10,20")
    dy.add_argument("--nu", type=float, default=0.0)
    dy.add_argument("--exp-min", type=int, default=-10)
    dy.add_argument("--exp-max", type=int, default=9)
    dy.set_defaults(func=cmd_verify_dyadic)

    s = sub.add_parser("saddle-dump", parents=[common], help="dump the selected descent contour")
    s.add_argument("--gamma", type=float)
    s.add_argument("--q", type=float, help="phase parameter; sets gamma = 1 + q rho")
    s.add_argument("--nu", type=float, default=0.0)
    s.add_argument("--rho", type=float, default=None)
    s.add_argument("--q0", type=float, default=sd.Q0)
    s.add_argument("--q1", type=float, default=sd.Q1)
    s.add_argument("--q2", type=float, default=sd.Q2)
    s.add_argument("--per-segment", type=int, default=64)
    s.add_argument("--out", default="contour.csv")
    s.set_defaults(func=cmd_saddle_dump)

    h = sub.add_parser("hankel", parents=[common], help="transform the channels of a descriptor")
    h.add_argument("--data", required=True, help="JSON data descriptor")
    h.set_defaults(func=cmd_hankel)

    ev = sub.add_parser("evolve", parents=[common], help="propagate the channels of a descriptor")
    ev.add_argument("--data", required=True, help="JSON data descriptor")
    ev.add_argument("--t", default="0", help="comma-separated times")
    ev.set_defaults(func=cmd_evolve)

    st = sub.add_parser("strichartz", parents=[common], help="Strichartz ratio scan")
    st.add_argument("--nu", type=float, default=0.0)
    st.add_argument("--q", default="4.5,6,10")
    st.add_argument("--s", type=float, default=None, help="Sobolev index (default 1 - 3/q)")
    st.add_argument("--trials", type=int, default=2)
    st.add_argument("--k-max", type=int, default=4)
    st.add_argument("--T", type=float, default=25.0)
    st.add_argument("--freq-min", type=int, default=-3, help="smallest dyadic exponent")
    st.add_argument("--freq-max", type=int, default=3)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--unit", action="store_true", help="unit-frequency data in channels --k")
    st.add_argument("--k", default=None, help="channels for --unit (default 1,-1)")
    st.set_defaults(func=cmd_strichartz)
    return p


def _config_path(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _parse(parser: argparse.ArgumentParser, argv):
    """Parse argv; a --config file supplies defaults, and flags on the command line win.

    The file is read before parsing so that it can also supply required flags.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if path is not None and command is not None:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        sub = choices[command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for a in sub._actions:
            if a.dest in cfg:
                a.required = False
        sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:       # argparse usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AccuracyError, RangeError) as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (VerificationError, ConstructionError, DivergenceError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
