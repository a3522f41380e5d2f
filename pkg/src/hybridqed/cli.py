"""Command-line front end: ``simulate``, ``couplings``, ``verify`` and ``sweep``.

Frequencies in config files and flags are entered in MHz under the 2π
convention (``omega_drive = 50`` means Ω = 2π·50 rad/µs); times are in µs.

Exit status: 0 success, 1 validation error, 2 numerical-invariant failure.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import dynamics, measures, model, verify
from .errors import (ConfigError, DivisionByZeroDetuning, HybridQEDError, MalformedValue,
                     StateInvariantViolated, UnknownKey)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2

CSV_HEADER = "t_us,concurrence,fidelity_overlap,fidelity_uhlmann,p_ee,p_eg,p_ge,p_gg"
SWEEP_HEADER = "omega,G_eff,period_us,c_first_zero_us"

DEFAULT_OMEGA = {model.Regime.DISPERSIVE: 50.0, model.Regime.RESONANT: 0.01}

_OVERRIDABLE = tuple(f.name for f in fields(model.SystemParams)
                     if f.name not in ("regime", "n_fock_a", "n_fock_b", "Omega"))


@dataclass
class RunConfig:
    regime: model.Regime = model.Regime.DISPERSIVE
    omega_drive: float | None = None  # rad/µs; None -> regime default
    t_max: float = 10.0
    dt: float = 1e-3
    record_every: int = 10
    n_fock: int = 2
    fidelity_convention: str = "overlap"
    output_path: str | None = None
    overrides: dict = field(default_factory=dict)  # rad/µs
    sweep_omegas: list = field(default_factory=list)  # rad/µs
    full: bool = False
    both: bool = False
    jobs: int = 1

    @property
    def omega(self) -> float:
        if self.omega_drive is not None:
            return self.omega_drive
        return model.mhz(DEFAULT_OMEGA[self.regime])

    def params(self, omega: float | None = None) -> model.SystemParams:
        Omega = self.omega if omega is None else omega
        if self.regime is model.Regime.DISPERSIVE:
            p = model.preset_dispersive(Omega)
        else:
            p = model.preset_resonant(Omega)
        return p.replace(n_fock_a=self.n_fock, n_fock_b=self.n_fock, **self.overrides)


def _float(text: str, where: str, positive: bool = False) -> float:
    try:
        v = float(text)
    except ValueError:
        raise MalformedValue(f"not a number: {text!r}", where) from None
    if not math.isfinite(v) or v < 0 or (positive and v == 0):
        raise MalformedValue(f"must be {'> 0' if positive else '>= 0'}, got {text!r}", where)
    return v


def _int(text: str, where: str, minimum: int) -> int:
    try:
        v = int(text)
    except ValueError:
        raise MalformedValue(f"not an integer: {text!r}", where) from None
    if v < minimum:
        raise MalformedValue(f"must be >= {minimum}, got {v}", where)
    return v


def _apply(cfg: RunConfig, key: str, value: str, where: str) -> None:
    value = value.strip()
    if key == "regime":
        try:
            cfg.regime = model.Regime(value.lower())
        except ValueError:
            raise MalformedValue(f"regime must be dispersive or resonant, got {value!r}", where) from None
    elif key == "omega_drive":
        cfg.omega_drive = model.mhz(_float(value, where))
    elif key == "t_max":
        cfg.t_max = _float(value, where, positive=True)
    elif key == "dt":
        cfg.dt = _float(value, where, positive=True)
    elif key == "record_every":
        cfg.record_every = _int(value, where, 1)
    elif key == "n_fock":
        cfg.n_fock = _int(value, where, 2)
    elif key == "fidelity_convention":
        if value not in ("overlap", "uhlmann"):
            raise MalformedValue(f"fidelity_convention must be overlap or uhlmann, got {value!r}", where)
        cfg.fidelity_convention = value
    elif key == "output_path":
        if not value:
            raise MalformedValue("empty path", where)
        cfg.output_path = value
    elif key == "sweep_omegas":
        items = [s for s in value.split(",") if s.strip()]
        cfg.sweep_omegas = [model.mhz(_float(s, where)) for s in items]
    elif key in _OVERRIDABLE:
        cfg.overrides[key] = model.mhz(_float(value, where))
    else:
        raise UnknownKey(f"unknown key {key!r}", where)


def read_config_text(text: str, source: str = "<config>") -> list[tuple[str, str, str]]:
    """Parse flat ``key = value`` lines into (key, value, location) triples."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise MalformedValue(f"expected 'key = value', got {raw.strip()!r}", where)
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise MalformedValue("missing key", where)
        out.append((key, value, where))
    return out


def parse_config(path: str | Path | None = None, flags: dict | None = None) -> RunConfig:
    """Resolve a RunConfig from an optional config file and flag values.

    ``flags`` maps config keys to raw strings (as typed on the command line);
    they are applied after the file, so they win.
    """
    cfg = RunConfig()
    entries = []
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise MalformedValue(f"cannot read config: {exc}", str(p)) from None
        entries.extend(read_config_text(text, str(p)))
    for key, (value, where) in (flags or {}).items():
        entries.append((key, value, where))
    # regime first so that its default Ω does not clobber an explicit one
    for key, value, where in sorted(entries, key=lambda e: e[0] != "regime"):
        _apply(cfg, key, value, where)
    return cfg


# ---------------------------------------------------------------------------
# commands

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def simulate_rows(cfg: RunConfig, omega: float | None = None):
    """Effective-model run from the Bell state; returns (trajectory, columns dict)."""
    p = cfg.params(omega)
    spec = dynamics.effective_spec_from_params(p)
    rho0 = dynamics.bell_initial_state()
    traj = dynamics.evolve(spec, rho0, cfg.t_max, cfg.dt, cfg.record_every)
    f_u = measures.fidelity_uhlmann(rho0, traj.states)
    cols = {
        "concurrence": measures.concurrence(traj.states),
        "fidelity_overlap": f_u * f_u,
        "fidelity_uhlmann": f_u,
    }
    pops = dynamics.populations(traj.states)
    for k, name in enumerate(("p_ee", "p_eg", "p_ge", "p_gg")):
        cols[name] = pops[:, k]
    return traj, cols


def format_csv(times: np.ndarray, cols: dict) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    names = CSV_HEADER.split(",")[1:]
    for k, t in enumerate(times):
        buf.write(",".join([_fmt(t)] + [_fmt(cols[n][k]) for n in names]) + "\n")
    return buf.getvalue()


def _write(text: str, path: str | None, out) -> None:
    if path is None:
        (out or sys.stdout).write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_simulate(cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    traj, cols = simulate_rows(cfg)
    _write(format_csv(traj.times, cols), cfg.output_path, out)
    key = "fidelity_overlap" if cfg.fidelity_convention == "overlap" else "fidelity_uhlmann"
    print(f"{len(traj)} rows; final concurrence {_fmt(cols['concurrence'][-1])}, "
          f"final {key} {_fmt(cols[key][-1])}", file=err)
    return EXIT_OK


def _mhz(x: float) -> str:
    return f"{x / model.TWO_PI:.6g}"


def _coupling_block(p: model.SystemParams) -> tuple[list[str], float]:
    d = model.detunings(p)
    lines = [
        f"regime: {p.regime.value}",
        f"inputs (2pi MHz): Omega={_mhz(p.Omega)} G_A={_mhz(p.G_A)} G_a={_mhz(p.G_a)} "
        f"G_B={_mhz(p.G_B)} G_b={_mhz(p.G_b)}",
        f"detunings (2pi MHz): delta_Aa={_mhz(d.delta_Aa)} delta_aq={_mhz(d.delta_aq)} "
        f"delta_Bb={_mhz(d.delta_Bb)} delta_bq={_mhz(d.delta_bq)} delta_e1e2={_mhz(d.delta_e1e2)}",
    ]
    G = model.effective_coupling(p).value
    name = "G_D" if p.regime is model.Regime.DISPERSIVE else "G_R"
    lines.append(f"{name} = {_mhz(G)} (2pi MHz) = {G:.6g} rad/us")
    lines.append(f"resonant constraint residual = {_mhz(model.resonant_constraint_residual(d))} (2pi MHz)")
    lines.extend(f"WARNING {w}" for w in model.regime_warnings(p))
    return lines, G


def cmd_couplings(cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    lines, G = _coupling_block(cfg.params())
    if cfg.both:
        other = replace(cfg, regime=(model.Regime.RESONANT if cfg.regime is model.Regime.DISPERSIVE
                                     else model.Regime.DISPERSIVE), omega_drive=None)
        more, G2 = _coupling_block(other.params())
        lines.append("")
        lines.extend(more)
        G_D, G_R = (G, G2) if cfg.regime is model.Regime.DISPERSIVE else (G2, G)
        lines.append("")
        lines.append(f"G_R/G_D = {G_R / G_D:.3g} (expected order 10)")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _check(out, name: str, ok: bool, detail: str) -> bool:
    out.write(f"CHECK {name}: {'PASS' if ok else 'FAIL'} {detail}\n")
    return ok


def analytic_oracle_errors(p: model.SystemParams, t_max: float, dt: float):
    """Max deviations of C(t) and F²(t) from the closed-form single-excitation
    solution, plus the trajectory for further checks."""
    if p.Gamma_A != p.Gamma_B or p.Gamma_AB or p.Gamma_BA:
        raise ValueError("closed-form oracle needs Gamma_A == Gamma_B and no cross decay")
    G = model.effective_coupling(p).value
    gamma = p.Gamma_A
    rho0 = dynamics.bell_initial_state()
    traj = dynamics.evolve(dynamics.effective_spec_from_params(p), rho0, t_max, dt)
    t = traj.times
    C = measures.concurrence(traj.states)
    F = measures.fidelity_overlap(rho0, traj.states)
    env = np.exp(-gamma * t)
    return (float(np.max(np.abs(C - env * np.abs(np.cos(2 * G * t))))),
            float(np.max(np.abs(F - env * np.cos(G * t) ** 2))), traj)


def trajectory_invariant_errors(states: np.ndarray) -> tuple[float, float, float]:
    """(max |tr − 1|, max Hermiticity deviation, min eigenvalue) over a stack."""
    tr = np.trace(states, axis1=-2, axis2=-1).real
    herm = np.max(np.abs(states - np.conj(np.swapaxes(states, -1, -2))))
    w = np.linalg.eigvalsh(0.5 * (states + np.conj(np.swapaxes(states, -1, -2))))
    return float(np.max(np.abs(tr - 1))), float(herm), float(np.min(w))


def cmd_verify(cfg: RunConfig, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    ok = True
    p = cfg.params()
    try:
        c_err, f_err, traj = analytic_oracle_errors(p, cfg.t_max, cfg.dt)
        ok &= _check(out, "analytic_oracle", c_err < 1e-6 and f_err < 1e-6,
                     f"max|C-C_exact|={c_err:.3e} max|F2-F2_exact|={f_err:.3e} (tol 1e-6, dt={cfg.dt:g})")
        tr_e, h_e, wmin = trajectory_invariant_errors(traj.states)
        ok &= _check(out, "trajectory_invariants", tr_e < 1e-9 and h_e < 1e-9 and wmin > -1e-7,
                     f"trace={tr_e:.2e} hermiticity={h_e:.2e} min_eig={wmin:.2e}")
    except (StateInvariantViolated, ValueError) as exc:
        ok &= _check(out, "analytic_oracle", False, f"{type(exc).__name__}: {exc}")

    p_disp = p if p.regime is model.Regime.DISPERSIVE else model.preset_dispersive()
    p_res = p if p.regime is model.Regime.RESONANT else model.preset_resonant()
    r0 = verify.bch_dispersive_check(p_disp, 0)
    r_null = verify.bch_dispersive_check(p_disp.replace(Omega=0.0), 5)
    ok &= _check(out, "bch_null", r0.G_numeric == 0.0 and r_null.G_numeric == 0.0 and r_null.G_formula == 0.0,
                 f"order0={r0.G_numeric:g} omega0={r_null.G_numeric:g}")
    r5 = verify.bch_dispersive_check(p_disp, 5)
    ok &= _check(out, "bch_order5", 0.1 <= r5.ratio <= 10.0,
                 f"G_bch={_mhz(r5.G_numeric)} G_D={_mhz(r5.G_formula)} (2pi MHz) deviation={r5.deviation:.3g}")
    ratio = model.coupling_resonant(p_res).value / model.coupling_dispersive(p_disp).value
    ok &= _check(out, "coupling_ratio", 1.0 <= ratio <= 100.0, f"G_R/G_D={ratio:.4g}")
    try:
        cmp = verify.compare_regimes(p_disp, p_res, t_max=cfg.t_max, dt=cfg.dt)
        ok &= _check(out, "regime_periods", cmp.resonant_period_shorter,
                     f"period_res={cmp.resonant.details['period_us']:.4g}us "
                     f"period_disp={cmp.dispersive.details['period_us']:.4g}us")
    except StateInvariantViolated as exc:
        ok &= _check(out, "regime_periods", False, f"StateInvariantViolated: {exc}")

    if cfg.full:
        pf = model.preset_resonant_scaled().replace(n_fock_a=cfg.n_fock, n_fock_b=cfg.n_fock)
        rep = verify.full_model_swap_check(pf)
        d = rep.details
        ok &= _check(out, "full_conservation", d["conservation_error"] < 1e-10,
                     f"max|[H,N]|={d['conservation_error']:.2e}")
        ok &= _check(out, "full_unitarity", d["norm_drift"] < 1e-9, f"norm drift={d['norm_drift']:.2e}")
        ok &= _check(out, "full_swap_frequency", 0.5 <= rep.ratio <= 2.0,
                     f"G_fit={rep.G_numeric:.4g} G_R={rep.G_formula:.4g} rad/us ratio={rep.ratio:.4g} "
                     f"max_P_target={d['max_target_population']:.3g}")
        for w in rep.warnings:
            out.write(f"  note: {w}\n")
    return EXIT_OK if ok else EXIT_NUMERIC


def _sweep_point(cfg: RunConfig, omega: float, path: str | None):
    p = cfg.params(omega)
    G = model.effective_coupling(p).value
    traj, cols = simulate_rows(cfg, omega)
    if path is not None:
        _write(format_csv(traj.times, cols), path, None)
    C = cols["concurrence"]
    return G, verify.oscillation_period(traj.times, C), verify.first_zero(traj.times, C)


def sweep_point_path(output_path: str, omega_mhz: float) -> str:
    base = Path(output_path)
    return str(base.with_name(f"{base.stem}_omega{omega_mhz:g}{base.suffix or '.csv'}"))


def cmd_sweep(cfg: RunConfig, omegas=None, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    omegas = list(cfg.sweep_omegas if omegas is None else omegas)
    if not omegas:
        print("sweep: need at least one omega (--omega 50,75)", file=err)
        return EXIT_INVALID
    summary_path = cfg.output_path
    paths = [None if summary_path is None else sweep_point_path(summary_path, w / model.TWO_PI)
             for w in omegas]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_sweep_point, cfg, w, path) for w, path in zip(omegas, paths)]
            results = [_collect(f.result, w, err) for f, w in zip(futures, omegas)]
    else:
        results = [_collect(lambda w=w, path=path: _sweep_point(cfg, w, path), w, err)
                   for w, path in zip(omegas, paths)]
    lines = [SWEEP_HEADER]
    failed = False
    for w, res in zip(omegas, results):
        if res is None:
            failed = True
            res = (math.nan, math.nan, math.nan)
        G, period, zero = res
        lines.append(",".join(_fmt(x) for x in (w / model.TWO_PI, G / model.TWO_PI, period, zero)))
    _write("\n".join(lines) + "\n", summary_path, out)
    return EXIT_NUMERIC if failed else EXIT_OK


def _collect(fn, omega, err):
    try:
        return fn()
    except HybridQEDError as exc:
        print(f"sweep point omega={omega / model.TWO_PI:g}: {type(exc).__name__}: {exc}", file=err)
        return None


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--regime", choices=[r.value for r in model.Regime])
    common.add_argument("--omega", help="drive amplitude in 2pi MHz (comma list for sweep)")
    common.add_argument("--tmax", help="simulated time in us")
    common.add_argument("--dt", help="integrator step in us")
    common.add_argument("--record-every", dest="record_every", help="keep every n-th step")
    common.add_argument("--fock", help="Fock truncation per resonator")
    common.add_argument("--fidelity", choices=["overlap", "uhlmann"])
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a parameter, e.g. Gamma_A=0 (2pi MHz)")

    parser = argparse.ArgumentParser(prog="hybridqed", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="effective-model trajectory as CSV")
    c = sub.add_parser("couplings", parents=[common], help="closed-form effective couplings")
    c.add_argument("--both", action="store_true", help="report both regimes and their ratio")
    v = sub.add_parser("verify", parents=[common], help="run the numerical cross-checks")
    v.add_argument("--full", action="store_true", help="include the full-model swap check (slow)")
    s = sub.add_parser("sweep", parents=[common], help="simulate a list of drive amplitudes")
    s.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


_FLAG_KEYS = {"regime": "regime", "tmax": "t_max", "dt": "dt", "record_every": "record_every",
              "fock": "n_fock", "fidelity": "fidelity_convention", "out": "output_path"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    flags = {}
    for attr, key in _FLAG_KEYS.items():
        v = getattr(ns, attr, None)
        if v is not None:
            flags[key] = (str(v), "--" + attr.replace("_", "-"))
    if ns.omega is not None:
        key = "sweep_omegas" if ns.command == "sweep" else "omega_drive"
        flags[key] = (ns.omega, "--omega")
    for item in ns.set:
        if "=" not in item:
            raise MalformedValue(f"expected KEY=VALUE, got {item!r}", "--set")
        k, val = item.split("=", 1)
        flags[k.strip()] = (val, f"--set {k.strip()}")
    cfg = parse_config(ns.config, flags)
    cfg.full = getattr(ns, "full", False)
    cfg.both = getattr(ns, "both", False)
    cfg.jobs = getattr(ns, "jobs", 1)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if ns.command == "simulate":
            return cmd_simulate(cfg)
        if ns.command == "couplings":
            return cmd_couplings(cfg)
        if ns.command == "verify":
            return cmd_verify(cfg)
        return cmd_sweep(cfg)
    except (ConfigError, DivisionByZeroDetuning, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except HybridQEDError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
