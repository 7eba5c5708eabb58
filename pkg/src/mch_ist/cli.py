"""Command-line front end: mch-ist [command] --config run.json --out DIR."""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import kernels
from .artifacts import COMMANDS, load_config, load_profile, read_table, write_json, write_table
from .direct import ScatteringData, reflection_data, spectral_limits
from .errors import ConfigError, IstError
from .grids import SpectralGrid, build_grids
from .pipeline import ForwardRun, inverse, roundtrip_error, run_forward, y_window
from .cauchy import CauchyContext
from .timeflow import KappaScaling


def _header(cfg, kind, **extra):
    h = {"kind": kind, "config_hash": cfg.hash, "command": cfg.command, "kappa": cfg.kappa,
         "seed": cfg.seed, "backend": kernels.BACKEND}
    h.update(extra)
    return h


def _spectral_grid(cfg, t_max):
    g = replace(cfg.grid, t_max=float(KappaScaling(cfg.kappa).native_time(t_max)))
    return build_grids(g)[1]


def _forward(cfg, t_max=0.0) -> ForwardRun:
    x, m0 = load_profile(cfg)
    return run_forward(m0, x, _spectral_grid(cfg, t_max), cfg.kappa)


def _write_scattering(cfg, run, out):
    sd = run.data
    k = sd.grid.k_nodes
    lim = spectral_limits(sd)
    header = _header(cfg, "scattering", k_max=sd.grid.k_max, n_k=sd.grid.n,
                     log_a_i=[sd.log_a_i.real, sd.log_a_i.imag], mass=run.profile.mass,
                     resonance_margin=sd.resonance_margin,
                     y_range=[float(run.profile.y_of_x[0]), float(run.profile.y_of_x[-1])], norms=sd.norm_report,
                     limits={key: [v.real, v.imag] for key, v in lim.items()},
                     unitarity=float(np.max(np.abs(np.abs(sd.a) ** 2 + np.abs(sd.b) ** 2 - 1))))
    cols = {"k": k, "z_plus": sd.grid.z_nodes[0], "z_minus": sd.grid.z_nodes[1],
            "a_plus": sd.a[0], "a_minus": sd.a[1], "b_plus": sd.b[0], "b_minus": sd.b[1]}
    return write_table(out / "scattering.csv", header, cols)


def _read_scattering(cfg, path):
    header, cols = read_table(path)
    grid = SpectralGrid(float(header["k_max"]), int(header["n_k"]))
    a = np.vstack([cols["a_plus"], cols["a_minus"]])
    b = np.vstack([cols["b_plus"], cols["b_minus"]])
    r, rt, rho = reflection_data(a, b)
    sd = ScatteringData(grid=grid, a=a, b=b, r=r, rtilde=rt, rho=rho,
                        log_a_i=complex(*header["log_a_i"]))
    kappa = float(header.get("kappa", cfg.kappa))
    return ForwardRun(profile=_ProfileStub(header), data=sd, scaling=KappaScaling(kappa), ctx=CauchyContext(grid))


class _ProfileStub:
    """The y range of a stored run, enough for y_window."""

    def __init__(self, header):
        self.y_of_x = np.asarray(header.get("y_range", [-12.0, 12.0]), dtype=float)
        self.mass = float(header.get("mass", 0.0))


def _x_grid(cfg):
    return np.linspace(-cfg.x_window, cfg.x_window, cfg.n_x_out)


def _write_field(cfg, out, snap, tag):
    fs = snap.field
    common = dict(t=snap.t, residual=fs.residual, max_iterations=fs.max_iterations)
    s = KappaScaling(cfg.kappa)
    write_table(out / f"field_y_{tag}.csv", _header(cfg, "field_y", **common),
                {"y": fs.y_grid, "q": fs.q_y, "m": s.physical_field(fs.m_y), "x": fs.x_of_y,
                 "eta": fs.eta_y, "zeta": fs.zeta_y,
                 "u": s.physical_field(fs.u_tilde), "u_x": s.physical_field(fs.ux_tilde)})
    if fs.x_grid is not None:
        write_table(out / f"field_x_{tag}.csv", _header(cfg, "field_x", jacobian=fs.jacobian, **common),
                    {"x": snap.x, "m": snap.m, "u": snap.u, "u_x": snap.u_x})


def _fields(cfg, run, out):
    for i, t in enumerate(cfg.times):
        lo, hi = y_window(run, t, margin=1.0)
        ys = np.linspace(lo, hi, int(np.ceil((hi - lo) / cfg.y_spacing)) + 1)
        snap = inverse(run, t, ys, _x_grid(cfg), cfg.method, cfg.time_sign)
        _write_field(cfg, out, snap, f"{i:03d}")
    return 0


def cmd_forward(cfg, out):
    run = _forward(cfg)
    _write_scattering(cfg, run, out)
    return 0


def cmd_evolve(cfg, out):
    run = _forward(cfg, max(cfg.times))
    _write_scattering(cfg, run, out)
    return _fields(cfg, run, out)


def cmd_inverse(cfg, out):
    if not cfg.scattering_csv:
        raise ConfigError("inverse needs scattering_csv")
    return _fields(cfg, _read_scattering(cfg, cfg.scattering_csv), out)


def cmd_roundtrip(cfg, out):
    x, m0 = load_profile(cfg)
    run = run_forward(m0, x, _spectral_grid(cfg, 0.0), cfg.kappa)
    err, snap = roundtrip_error(run, m0, x, cfg.x_window)
    tol = cfg.tolerances.get("roundtrip", 1e-4)
    _write_field(cfg, out, snap, "roundtrip")
    write_json(out / "roundtrip.json", _header(cfg, "roundtrip", sup_error=err, tolerance=tol,
                                                passed=err <= tol, window=cfg.x_window))
    print(f"roundtrip sup error {err:.3e} (tolerance {tol:.1e})")
    return 0 if err <= tol else 1


def cmd_soliton(cfg, out):
    from .soliton import soliton_data, soliton_field, soliton_profile

    if not cfg.solitons:
        raise ConfigError("soliton needs at least one seed")
    data = soliton_data([(complex(a, b), complex(c, d)) for a, b, c, d in cfg.solitons])
    s = KappaScaling(cfg.kappa)
    xg = _x_grid(cfg)
    w = cfg.grid.y_half_width
    ys = np.linspace(-w, w, int(np.ceil(2 * w / cfg.y_spacing)) + 1)
    for i, t in enumerate(cfg.times):
        fs = soliton_field(data, ys, float(s.native_time(t)), cfg.time_sign)
        head = _header(cfg, "soliton_y", t=t, zeros=[[z.real, z.imag] for z in data.zeros])
        write_table(out / f"soliton_y_{i:03d}.csv", head,
                    {"y": ys, "q": fs.q_y, "m": s.physical_field(fs.m_y), "x": fs.x_of_y,
                     "eta": fs.eta_y, "zeta": fs.zeta_y})
        m = soliton_profile(data, xg, t, cfg.kappa, cfg.time_sign)
        write_table(out / f"soliton_x_{i:03d}.csv", _header(cfg, "soliton_x", t=t), {"x": xg, "m": m})
    return 0


def cmd_validate(cfg, out):
    from .validate import SuiteConfig, run_invariant_suite

    x, m0 = load_profile(cfg)
    g = cfg.grid
    suite = SuiteConfig(kappa=cfg.kappa, k_max=g.k_max, n_k=g.n_k or 1024, x_window=cfg.x_window,
                        time_sign=cfg.time_sign, seed=cfg.seed)
    reports = run_invariant_suite(m0, x, suite)
    write_json(out / "validate.json", _header(cfg, "validate", reports=[r.to_dict() for r in reports]))
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.rel_error:.3e} (tolerance {r.tolerance:.1e})")
    return 0 if all(r.passed for r in reports) else 1


HANDLERS = {"forward": cmd_forward, "evolve": cmd_evolve, "inverse": cmd_inverse,
            "roundtrip": cmd_roundtrip, "soliton": cmd_soliton, "validate": cmd_validate}


def build_parser():
    p = argparse.ArgumentParser(prog="mch-ist", description=__doc__)
    p.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the config command")
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, help="output directory (overrides the config)")
    p.add_argument("--threads", type=int, default=None, help="threads for the compiled kernel")
    p.add_argument("--strict", action="store_true", help="treat warnings as failures")
    return p


def run(cfg, strict=False) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        if strict:
            warnings.simplefilter("error")
        return HANDLERS[cfg.command](cfg, out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads:
        kernels.set_threads(args.threads)
    try:
        cfg = load_config(args.config, {"command": args.command,
                                        "out": str(args.out) if args.out else None})
        return run(cfg, args.strict)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 2
    except IstError as exc:
        print(f"{exc.module} error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except Warning as exc:
        print(f"strict mode: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
