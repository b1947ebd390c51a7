"""Scenario-driven command-line front end.

Subcommands run verification suites or produce trajectory/metric/evolution
data from a JSON scenario configuration, writing CSV files plus a
human-readable report.  Exit status: 0 when every check passes, 1 when a
check fails, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra, dynamic_map, model, schrodinger, static_map
from .algebra import FlowFactor, GeneratorId
from .errors import ConfigError, NotInUnbrokenRegime, PtdysonError
from .model import ModelParams, RegimeKind

_SCHEMA = {
    "model": {"m", "omega_x", "omega_y", "lambda"},
    "constants": None,
    "time": {"start", "end", "samples"},
    "grid": {"z_min", "z_max", "points", "boundary_tol"},
    "tolerances": {"hermiticity", "ode", "ermakov", "grid"},
    "fock": {"n"},
    "branches": None,
}

_DEFAULTS = {
    "time": {"start": 0.0, "end": 5.0, "samples": 101},
    "grid": {"z_min": -8.0, "z_max": 8.0, "points": 48, "boundary_tol": 1e-8},
    "tolerances": {"hermiticity": 1e-8, "ode": 1e-10, "ermakov": 1e-8, "grid": 1e-4},
    "fock": {"n": 12},
    "branches": "auto",
    "constants": None,
}


@dataclass
class ScenarioConfig:
    params: ModelParams
    constants: tuple[float, float, float, float] | None
    t_start: float
    t_end: float
    samples: int
    z_min: float
    z_max: float
    grid_points: int
    boundary_tol: float
    tol_hermiticity: float
    tol_ode: float
    tol_ermakov: float
    tol_grid: float
    fock_n: int
    branches: str | tuple[int, int]


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class RunReport:
    subcommand: str
    checks: list[Check] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)

    def add(self, name: str, value: float, threshold: float, larger_ok: bool = False):
        ok = value > threshold if larger_ok else value <= threshold
        self.checks.append(Check(name, float(value), float(threshold), bool(ok)))

    def note(self, line: str):
        self.lines.append(line)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        out = [f"subcommand: {self.subcommand}"]
        out += self.lines
        for c in self.checks:
            out.append(
                f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: "
                f"value={c.value!r} threshold={c.threshold!r}"
            )
        out.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(out) + "\n"


def load_config(path: str) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    if "model" not in raw:
        raise ConfigError("config requires a 'model' section")

    merged: dict = {}
    for key, subkeys in _SCHEMA.items():
        if key == "model":
            section = raw["model"]
            if not isinstance(section, dict):
                raise ConfigError("'model' must be an object")
            bad = set(section) - subkeys
            if bad:
                raise ConfigError(f"unknown keys in 'model': {sorted(bad)}")
            missing = subkeys - set(section)
            if missing:
                raise ConfigError(f"missing keys in 'model': {sorted(missing)}")
            merged["model"] = section
        elif subkeys is None:
            merged[key] = raw.get(key, _DEFAULTS[key])
        else:
            section = dict(_DEFAULTS[key])
            if key in raw:
                if not isinstance(raw[key], dict):
                    raise ConfigError(f"'{key}' must be an object")
                bad = set(raw[key]) - subkeys
                if bad:
                    raise ConfigError(f"unknown keys in '{key}': {sorted(bad)}")
                section.update(raw[key])
            merged[key] = section

    try:
        params = ModelParams(
            m=float(merged["model"]["m"]),
            omega_x=float(merged["model"]["omega_x"]),
            omega_y=float(merged["model"]["omega_y"]),
            lam=float(merged["model"]["lambda"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc

    constants = merged["constants"]
    if constants is not None:
        if not (isinstance(constants, list) and len(constants) == 4):
            raise ConfigError("'constants' must be null or a list of four reals")
        constants = tuple(float(v) for v in constants)

    branches = merged["branches"]
    if branches != "auto":
        if not (isinstance(branches, list) and len(branches) == 2
                and all(b in (1, -1) for b in branches)):
            raise ConfigError("'branches' must be \"auto\" or a pair of +-1")
        branches = (int(branches[0]), int(branches[1]))

    tols = merged["tolerances"]
    for k, v in tols.items():
        if not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"tolerance '{k}' must be positive")
    t = merged["time"]
    if int(t["samples"]) < 2:
        raise ConfigError("time.samples must be at least 2")

    return ScenarioConfig(
        params=params,
        constants=constants,
        t_start=float(t["start"]),
        t_end=float(t["end"]),
        samples=int(t["samples"]),
        z_min=float(merged["grid"]["z_min"]),
        z_max=float(merged["grid"]["z_max"]),
        grid_points=int(merged["grid"]["points"]),
        boundary_tol=float(merged["grid"]["boundary_tol"]),
        tol_hermiticity=float(tols["hermiticity"]),
        tol_ode=float(tols["ode"]),
        tol_ermakov=float(tols["ermakov"]),
        tol_grid=float(tols["grid"]),
        fock_n=int(merged["fock"]["n"]),
        branches=branches,
    )


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    repr(float(v)) if isinstance(v, float) else str(v) for v in row
                )
                + "\n"
            )


# ---------------------------------------------------------------------------
# Trajectory construction shared by solve-map, verify-metric and evolve.
# ---------------------------------------------------------------------------


def _default_initial(cfg: ScenarioConfig, regime: RegimeKind):
    """Initial chart point and cross-check constants for the scenario."""
    p = cfg.params
    t0 = cfg.t_start
    if regime is RegimeKind.UNBROKEN:
        values = cfg.constants if cfg.constants is not None else (0.1, 0.0, 0.0, 0.0)
        k = dynamic_map.IntegrationConstants(RegimeKind.UNBROKEN, values)
        dynamic_map.validate_constants(k, p, (cfg.t_start, cfg.t_end))
        branches = (
            dynamic_map.select_branches(k, p, t0)
            if cfg.branches == "auto"
            else cfg.branches
        )
        initial = dynamic_map.recover(dynamic_map.alpha_closed_form(k, p, t0), p, branches)
        return initial, k
    if cfg.constants is not None:
        raise ConfigError(
            "explicit constants are only supported in the unbroken regime; "
            "set constants to null (the initial chart point is fixed and the "
            "constants are fitted from its jet)"
        )
    theta0 = 0.25 if regime is RegimeKind.BROKEN else 0.0
    initial = dynamic_map.MapCoefficients(
        t=t0, alpha_minus=0.1, theta_plus=0.0, alpha_plus=0.0, theta_minus=theta0
    )
    jet = dynamic_map.jet_from_coefficients(initial, p)
    k = dynamic_map.constants_from_jet(jet, p)
    return initial, k


def _build_trajectory(cfg: ScenarioConfig):
    regime = model.classify(cfg.params)
    initial, constants = _default_initial(cfg, regime.kind)
    traj = dynamic_map.integrate(
        initial,
        cfg.params,
        (cfg.t_start, cfg.t_end),
        tol=cfg.tol_ode,
        n_samples=cfg.samples,
        constants=constants,
    )
    return traj, regime


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_classify(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    regime = model.classify(cfg.params)
    spectrum = model.eigenfrequencies(cfg.params)
    report.note(f"regime={regime.kind.value} delta={float(regime.delta)!r}")
    report.note(
        f"omega_x_eff={complex(spectrum.omega_x_eff)!r} "
        f"omega_y_eff={complex(spectrum.omega_y_eff)!r}"
    )
    f_plus, f_minus = dynamic_map.regime_frequencies(cfg.params)
    _write_csv(
        out / "classify.csv",
        ["m", "omega_x", "omega_y", "lambda", "delta", "regime",
         "omega_x_eff_re", "omega_x_eff_im", "omega_y_eff_re", "omega_y_eff_im",
         "freq_plus", "freq_minus"],
        [[cfg.params.m, cfg.params.omega_x, cfg.params.omega_y, cfg.params.lam,
          regime.delta, regime.kind.value,
          float(spectrum.omega_x_eff.real), float(spectrum.omega_x_eff.imag),
          float(spectrum.omega_y_eff.real), float(spectrum.omega_y_eff.imag),
          f_plus, f_minus]],
    )


def cmd_verify_algebra(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    from .tables import COMMUTATION_TABLE, relation_error

    rows = []
    worst_table = 0.0
    for entry in COMMUTATION_TABLE:
        err = relation_error(entry)
        worst_table = max(worst_table, err)
        rows.append([f"[{entry.left.name},{entry.right.name}]", err, 1e-12,
                     "pass" if err <= 1e-12 else "fail"])
    report.add("commutation-table", worst_table, 1e-12)

    rng = np.random.default_rng(2024)
    worst_jac = 0.0
    for _ in range(100):
        mats = [algebra.QuadraticOperator(_random_sym(rng)) for _ in range(3)]
        a, b, c = mats
        total = (
            algebra.bracket(a, algebra.bracket(b, c)).coeff
            + algebra.bracket(b, algebra.bracket(c, a)).coeff
            + algebra.bracket(c, algebra.bracket(a, b)).coeff
        )
        worst_jac = max(worst_jac, float(np.abs(total).max()))
    report.add("jacobi-identity", worst_jac, 1e-10)

    n = cfg.fock_n
    mask = algebra.interior_mask(n, 2)
    idx = np.where(mask)[0]
    sub = np.ix_(idx, idx)
    worst_fock = 0.0
    gens = list(GeneratorId)
    for ga in gens:
        fa = algebra.fock_matrix(algebra.generator(ga), n)
        for gb in gens:
            fb = algebra.fock_matrix(algebra.generator(gb), n)
            lhs = fa @ fb - fb @ fa
            rhs = 1j * algebra.fock_matrix(
                algebra.bracket(algebra.generator(ga), algebra.generator(gb)), n
            )
            worst_fock = max(worst_fock, float(np.abs((lhs - rhs)[sub]).max()))
    report.add("fock-bracket-oracle", worst_fock, 1e-8)
    rows.append(["jacobi-identity", worst_jac, 1e-10, "pass" if worst_jac <= 1e-10 else "fail"])
    rows.append(["fock-bracket-oracle", worst_fock, 1e-8, "pass" if worst_fock <= 1e-8 else "fail"])
    _write_csv(out / "verify_algebra.csv", ["check", "value", "threshold", "status"], rows)


def _random_sym(rng) -> np.ndarray:
    m = rng.uniform(-1, 1, (4, 4))
    return m + m.T


def cmd_static(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    p = cfg.params
    try:
        sol = static_map.solve_static(p)
    except NotInUnbrokenRegime as exc:
        report.note(f"static-map-domain: {exc}")
        report.add("static-map-domain", 1.0, 0.5)  # explicit failure
        _write_csv(out / "static.csv",
                   ["status", "detail"], [["NotInUnbrokenRegime", str(exc)]])
        return
    h = static_map.static_hermitian(p, sol.flow_coefficient)
    residual = float(np.abs(h.coeff.imag).max())
    report.add("static-antihermitian-residual", residual, 1e-10)
    spectrum = model.eigenfrequencies(p)
    model_set = sorted([float(spectrum.omega_x_eff.real) ** 2,
                        float(spectrum.omega_y_eff.real) ** 2])
    static_set = sorted([sol.omega_x_sq, sol.omega_y_sq])
    freq_err = max(abs(a - b) for a, b in zip(model_set, static_set))
    report.add("static-frequency-match", freq_err, 1e-10)
    report.note(f"theta={sol.theta!r} flow_coefficient={sol.flow_coefficient!r}")
    _write_csv(
        out / "static.csv",
        ["theta", "flow_coefficient", "omega_x_sq", "omega_y_sq",
         "antiherm_residual", "frequency_err"],
        [[sol.theta, sol.flow_coefficient, sol.omega_x_sq, sol.omega_y_sq,
          residual, freq_err]],
    )


def _metric_min_eig(c, n: int) -> float:
    sv = np.linalg.svd(dynamic_map.fock_dyson(c, n), compute_uv=False)
    return float(sv.min() ** 2)


def cmd_solve_map(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    traj, regime = _build_trajectory(cfg)
    rows = []
    for i, t in enumerate(traj.times):
        c = traj.coefficients[i]
        hp = traj.hermitian[i]
        rows.append([
            float(t), c.alpha_minus, c.theta_plus, c.alpha_plus, c.theta_minus,
            hp.M_plus, hp.M_minus, hp.omega_plus_sq, hp.omega_minus_sq, hp.g,
            float(traj.antiherm_residual[i]),
            _metric_min_eig(c, cfg.fock_n),
        ])
    _write_csv(
        out / "solve_map.csv",
        ["t", "alpha_minus", "theta_plus", "alpha_plus", "theta_minus",
         "M_plus", "M_minus", "omega_plus_sq", "omega_minus_sq", "g",
         "antiherm_residual", "metric_min_eig"],
        rows,
    )
    report.note(f"regime={regime.kind.value} delta={float(regime.delta)!r}")
    report.add("tdde-antihermitian-max", float(traj.antiherm_residual.max()),
               cfg.tol_hermiticity)
    if traj.closed_form_mismatch is not None:
        report.add("closed-form-mismatch", float(traj.closed_form_mismatch.max()), 1e-6)
    report.add("metric-min-eig", min(r[-1] for r in rows), 0.0, larger_ok=True)


def cmd_verify_metric(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    traj, regime = _build_trajectory(cfg)
    n = cfg.fock_n
    rows = []
    worst_fac = 0.0
    min_eig = np.inf
    for i, t in enumerate(traj.times):
        c = traj.coefficients[i]
        rho = dynamic_map.fock_metric(c, n)
        eta = dynamic_map.fock_dyson(c, n)
        fac = float(
            np.linalg.norm(rho - eta.conj().T @ eta) / np.linalg.norm(rho)
        )
        me = _metric_min_eig(c, n)
        worst_fac = max(worst_fac, fac)
        min_eig = min(min_eig, me)
        rows.append([float(t), me, fac])
    _write_csv(out / "verify_metric.csv",
               ["t", "metric_min_eig", "factorization_err"], rows)
    report.add("metric-min-eig", min_eig, 0.0, larger_ok=True)
    report.add("metric-factorization", worst_fac, 1e-8)

    # Quasi-Hermiticity at a handful of interior sample times, evaluated on
    # the complete-block part (total quanta <= 8) of a larger Fock space.
    n_qh = max(n, 20)
    h = model.fock_hamiltonian(cfg.params, n_qh)
    nx = np.arange(n_qh).repeat(n_qh)
    ny = np.tile(np.arange(n_qh), n_qh)
    keep = np.where(nx + ny <= 8)[0]
    sub = np.ix_(keep, keep)
    dt = 1e-4
    ts = np.linspace(cfg.t_start + dt, cfg.t_end - dt, 6)
    worst_qh = 0.0
    for t in ts:
        rho = dynamic_map.fock_metric(traj.coefficients_at(t), n_qh)
        rp = dynamic_map.fock_metric(traj.coefficients_at(t + dt), n_qh)
        rm = dynamic_map.fock_metric(traj.coefficients_at(t - dt), n_qh)
        lhs = 1j * (rp - rm) / (2 * dt)
        rhs = h.conj().T @ rho - rho @ h
        scale = 0.5 * (np.linalg.norm((h.conj().T @ rho)[sub])
                       + np.linalg.norm((rho @ h)[sub]))
        worst_qh = max(worst_qh, float(np.linalg.norm((lhs - rhs)[sub]) / scale))
    report.add("quasi-hermiticity", worst_qh, 1e-6)
    report.note(f"regime={regime.kind.value} fock_n={n} qh_fock_n={n_qh}")


def cmd_evolve(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    traj, regime = _build_trajectory(cfg)
    grid = schrodinger.Grid1D(cfg.z_min, cfg.z_max, cfg.grid_points)
    evx = schrodinger.evolve_component(
        traj, schrodinger.WaveSpec(n=0, component=-1), tol=1e-12
    )
    evy = schrodinger.evolve_component(
        traj, schrodinger.WaveSpec(n=0, component=+1), tol=1e-12
    )
    res_x = schrodinger.ermakov_residuals(evx.ermakov, traj.hermitian_at)
    res_y = schrodinger.ermakov_residuals(evy.ermakov, traj.hermitian_at)
    report.add("ermakov-residual", float(max(res_x.max(), res_y.max())),
               cfg.tol_ermakov)

    ts = np.linspace(cfg.t_start, cfg.t_end, min(cfg.samples, 9))
    rows, qnorms, norms = [], [], []
    for t in ts:
        phi = schrodinger.GridState2D(
            np.outer(evx.wavefunction(t, grid.points), evy.wavefunction(t, grid.points)),
            grid, grid,
        )
        c = traj.coefficients_at(t)
        inv = [FlowFactor(f.generator, -f.coefficient)
               for f in reversed(dynamic_map.dyson_factors(c))]
        psi = schrodinger.apply_flow_chain(inv, phi, cfg.boundary_tol)
        qn = schrodinger.quasi_norm(
            psi, dynamic_map.metric_factors(c), cfg.boundary_tol
        )
        nn = schrodinger.grid_norm_sq(phi)
        qnorms.append(qn)
        norms.append(nn)
        esx, esy = evx.ermakov.at(t), evy.ermakov.at(t)
        rows.append([float(t), esx.rho, esy.rho, nn, qn])
    qnorms = np.asarray(qnorms)
    report.add("quasi-norm-drift",
               float(np.max(np.abs(qnorms - qnorms[0])) / qnorms[0]), cfg.tol_grid)
    report.add("norm-vs-quasi-norm",
               float(np.max(np.abs(qnorms - np.asarray(norms))) / qnorms[0]),
               cfg.tol_grid)
    _write_csv(out / "evolve.csv",
               ["t", "rho_x", "rho_y", "phi_norm_sq", "quasi_norm"], rows)
    report.note(f"regime={regime.kind.value}")


def _sweep_point(args):
    (m, ox, oy, lam, window, tol) = args
    p = ModelParams(m=m, omega_x=ox, omega_y=oy, lam=lam)
    regime = model.classify(p)
    theta0 = {
        RegimeKind.UNBROKEN: None,
        RegimeKind.BROKEN: 0.25,
        RegimeKind.EXCEPTIONAL: 0.0,
    }[regime.kind]
    if theta0 is None:
        initial = dynamic_map.static_fixed_point(p, window[0])
        initial = dynamic_map.MapCoefficients(
            t=window[0], alpha_minus=0.1, theta_plus=0.0, alpha_plus=0.0,
            theta_minus=initial.theta_minus,
        )
    else:
        initial = dynamic_map.MapCoefficients(
            t=window[0], alpha_minus=0.1, theta_plus=0.0, alpha_plus=0.0,
            theta_minus=theta0,
        )
    traj = dynamic_map.integrate(initial, p, window, tol=tol, n_samples=41)
    min_eig = min(_metric_min_eig(c, 10) for c in traj.coefficients[::8])
    return [float(lam), float(regime.delta), regime.kind.value,
            float(traj.antiherm_residual.max()), min_eig]


def cmd_sweep(cfg: ScenarioConfig, out: Path, report: RunReport) -> None:
    """Sweep lambda across the exceptional point |m Omega_-^2| = 2 lambda."""
    p = cfg.params
    lam_ep = abs(p.m * p.omega_minus_sq) / 2.0
    if lam_ep == 0.0:
        raise ConfigError("sweep needs Omega_x != Omega_y so the exceptional "
                          "point sits at a finite lambda")
    lams = [float(round(f * lam_ep, 12)) for f in np.linspace(0.25, 1.75, 13)]
    window = (cfg.t_start, min(cfg.t_end, cfg.t_start + 1.0))
    jobs = [(p.m, p.omega_x, p.omega_y, lam, window, cfg.tol_ode) for lam in lams]
    workers = int(os.environ.get("PTDYSON_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    _write_csv(out / "sweep.csv",
               ["lambda", "delta", "regime", "max_antiherm_residual",
                "metric_min_eig"], rows)
    report.add("sweep-antihermitian-max",
               max(r[3] for r in rows), cfg.tol_hermiticity)
    report.add("sweep-metric-min-eig", min(r[4] for r in rows), 0.0, larger_ok=True)
    report.note(f"lambda_ep={lam_ep!r} points={len(rows)}")


_COMMANDS = {
    "verify-algebra": cmd_verify_algebra,
    "classify": cmd_classify,
    "static": cmd_static,
    "solve-map": cmd_solve_map,
    "verify-metric": cmd_verify_metric,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ptdyson",
        description="Time-dependent Dyson map engine for the 2D non-Hermitian "
                    "coupled oscillator",
    )
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--out-dir", default="ptdyson-out")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(subcommand=args.subcommand)
    try:
        _COMMANDS[args.subcommand](cfg, out, report)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PtdysonError as exc:
        report.note(f"aborted: {type(exc).__name__}: {exc}")
        report.add(f"{args.subcommand}-completed", 1.0, 0.5)

    (out / "report.txt").write_text(report.render())
    if not args.quiet:
        sys.stdout.write(report.render())
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
