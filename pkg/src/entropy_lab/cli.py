"""Experiment runner.

    entropy-lab <experiment> --config <path> [--out <dir>] [--seed <int>]

Experiments are configured by INI files with strictly validated sections
and keys; every emitted CSV carries a manifest line with the config hash.
Exit codes: 0 success, 2 configuration error, 3 numerical invariant
violation, 4 I/O error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, claw, euler, fluxes, renewal, reports, young
from .errors import ConfigError, EntropyLabError, InvariantViolationError
from .grids import PeriodicGrid, ScalarField, l1_distance

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

FP_CONTRACTION_GUARD = 1e-12


# ---------------------------------------------------------------------------
# config plumbing

class RunContext:
    def __init__(self, name, cfg, sha, out_dir, seed, timestamps):
        self.name = name
        self.cfg = cfg
        self.sha = sha
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.timestamps = timestamps

    def comments(self):
        if self.timestamps:
            return (f"# generated: {datetime.now(timezone.utc).isoformat()}",)
        return ()

    def write(self, filename, header, rows):
        reports.write_csv(self.out_dir / filename, header, rows,
                          self.name, self.sha, self.comments())


def _parse_config(path: Path, schema: dict) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError:
        raise
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for section in cp.sections():
        if section not in schema:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in schema[section]:
                raise ConfigError(f"unknown config key [{section}] {key}")
    return cp


def _get(cp, section, key, cast, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc


def _int_list(raw: str):
    return [int(tok) for tok in raw.replace(",", " ").split()]


def _float_list(raw: str):
    return [float(tok) for tok in raw.replace(",", " ").split()]


# ---------------------------------------------------------------------------
# shared builders

def _initial_field(kind: str, grid: PeriodicGrid, rng, amplitude=1.0):
    x = grid.cell_centers
    if kind == "sin":
        return ScalarField(grid, amplitude * np.sin(x))
    if kind == "constant":
        return ScalarField(grid, np.full(grid.n_cells, 0.5 * amplitude))
    if kind == "riemann":
        return ScalarField(grid, np.where(
            (x > grid.length / 4) & (x <= 3 * grid.length / 4), amplitude, 0.0))
    if kind == "random":
        if rng is None:
            raise ConfigError("u0=random requires a seed")
        c = rng.normal(0.0, 0.5, 3)
        return ScalarField(grid, c[0] + c[1] * np.sin(x) + c[2] * np.cos(2 * x))
    raise ConfigError(f"unknown initial data kind {kind!r}")


def _flux_from_name(name: str, lam_max: float):
    if name == "burgers":
        return fluxes.burgers_flux(lam_max=lam_max)
    if name == "linear":
        return fluxes.linear_flux(lam_max=lam_max)
    raise ConfigError(f"unknown flux {name!r}")


def _load_table(path):
    rows = [ln for ln in Path(path).read_text().splitlines()
            if ln.strip() and not ln.startswith("#")]
    try:
        data = np.array([[float(t) for t in ln.split(",")] for ln in rows])
    except ValueError as exc:
        raise ConfigError(f"malformed table file {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise ConfigError(f"table file {path} needs two columns (x, value)")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ConfigError(f"table file {path} needs strictly increasing x")
    return data[:, 0], data[:, 1]


def _birth_from_config(cp):
    kind = _get(cp, "birth", "kind", str, "exp")
    params = _float_list(_get(cp, "birth", "params", str, "1.0"))
    if kind == "exp":
        beta = params[0]
        factor = params[1] if len(params) > 1 else 2.0
        return renewal.exponential_birth_rate(beta, factor)
    if kind == "indicator":
        if len(params) != 3:
            raise ConfigError("indicator birth needs params = height, lo, hi")
        return renewal.indicator_birth_rate(*params)
    if kind == "table":
        path = _get(cp, "birth", "table", str, None)
        if path is None:
            raise ConfigError("birth.kind=table requires birth.table = <csv>")
        xs, bs = _load_table(path)
        if np.any(bs < 0):
            raise ConfigError("tabulated birth rate must be non-negative")

        def b_func(x):
            return np.interp(np.asarray(x, dtype=float), xs, bs,
                             left=bs[0], right=0.0)

        return renewal.BirthRate(b_func, support_points=(float(xs[-1]),))
    raise ConfigError(f"unknown birth kind {kind!r}")


# ---------------------------------------------------------------------------
# experiments

def run_claw_converge(ctx: RunContext):
    cp = ctx.cfg
    n_x = _get(cp, "claw", "n_x", int, 1024)
    t_end = _get(cp, "claw", "t_end", float, 1.2)
    ladder = _int_list(_get(cp, "claw", "viscosity_ladder", str, "32 128 512"))
    n_snap = _get(cp, "claw", "n_snapshots", int, 24)
    flux = _flux_from_name(_get(cp, "claw", "flux", str, "burgers"),
                           _get(cp, "claw", "lam_max", float, 4.0))
    grid = PeriodicGrid(n_x)
    rng = np.random.default_rng(ctx.seed) if ctx.seed is not None else None
    u0 = _initial_field(_get(cp, "claw", "u0", str, "sin"), grid, rng)
    ref = claw.solve_reference(u0, flux, t_end, n_snap)
    rows = []
    prev = None
    for n in ladder:
        run = claw.solve_viscous(u0, flux, n, t_end, n_snap)
        gap = l1_distance(run.trajectory.snapshots[-1], ref.snapshots[-1])
        rows.append((1.0 / n, gap))
        if prev is not None and gap > prev * 1.10:
            raise InvariantViolationError(
                f"viscous gap grew along the ladder at n={n}")
        prev = gap
    ctx.write("ladder.csv", ("h", "error"), rows)
    ctx.write("reference.csv", ("t", "x", "value"), reports.trajectory_rows(ref))


def run_entropy_check(ctx: RunContext):
    cp = ctx.cfg
    n_x = _get(cp, "claw", "n_x", int, 1024)
    t_end = _get(cp, "claw", "t_end", float, 1.2)
    n_snap = _get(cp, "claw", "n_snapshots", int, 60)
    k_values = _float_list(_get(cp, "claw", "k_values", str, "-0.5 0 0.5"))
    flux = _flux_from_name(_get(cp, "claw", "flux", str, "burgers"),
                           _get(cp, "claw", "lam_max", float, 4.0))
    grid = PeriodicGrid(n_x)
    rng = np.random.default_rng(ctx.seed) if ctx.seed is not None else None
    u0 = _initial_field(_get(cp, "claw", "u0", str, "sin"), grid, rng)
    traj = claw.solve_reference(u0, flux, t_end, n_snap)
    bank = claw.TestFunctionBank(grid.length, t_end)
    tol = bank.tolerance(grid.dx, traj.dt_snap)
    table = [claw.entropy_residual(traj, flux, k, bank) for k in k_values]
    ctx.write("residuals.csv",
              ("k", "phi_index", "residual", "tolerance", "pass"),
              reports.residual_rows(k_values, table, tol))
    if any(np.min(r) < -tol for r in table):
        raise InvariantViolationError("entropy residual below -tolerance")

    if _get(cp, "counterexample", "enabled", bool, False):
        amp = _get(cp, "counterexample", "amplitude", float, 3.0)
        n_snap_ce = _get(cp, "counterexample", "n_snapshots", int, 240)
        ce_flux = _flux_from_name("burgers", amp + 2.0)
        ce = claw.expansion_shock_trajectory(grid, t_end, n_snap_ce, amp)
        tol_ce = bank.tolerance(grid.dx, ce.dt_snap)
        res = claw.entropy_residual(ce, ce_flux, 0.0, bank)
        ctx.write("counterexample_residuals.csv",
                  ("k", "phi_index", "residual", "tolerance", "pass"),
                  reports.residual_rows([0.0], [res], tol_ce))
        if np.min(res) >= -tol_ce:
            raise InvariantViolationError(
                "expansion shock not detected by the residual check")


def run_young_measure(ctx: RunContext):
    cp = ctx.cfg
    n_x = _get(cp, "claw", "n_x", int, 1024)
    t_end = _get(cp, "claw", "t_end", float, 1.2)
    n_snap = _get(cp, "claw", "n_snapshots", int, 64)
    ladder = _int_list(_get(cp, "claw", "viscosity_ladder", str, "32 128 512"))
    flux = _flux_from_name(_get(cp, "claw", "flux", str, "burgers"),
                           _get(cp, "claw", "lam_max", float, 4.0))
    bins = _get(cp, "young", "bins", int, 64)
    radius = _get(cp, "young", "truncation_radius", float, 2.0)
    coarse = (_get(cp, "young", "n_x_coarse", int, 16),
              _get(cp, "young", "n_t_coarse", int, 8))
    grid = PeriodicGrid(n_x)
    rng = np.random.default_rng(ctx.seed) if ctx.seed is not None else None
    u0 = _initial_field(_get(cp, "claw", "u0", str, "sin"), grid, rng)
    members = [claw.solve_viscous(u0, flux, n, t_end, n_snap).trajectory
               for n in ladder]
    bound = max(grid.dx * float(np.sum(np.abs(tr.values_array()), axis=1).max())
                for tr in members) * (1 + 1e-9)
    seq = young.MeasureSequenceInput(members, bound)
    measure = young.build_measure(seq, bins=bins, R=radius, coarse=coarse)
    var = young.dirac_diagnostic(measure)
    ctx.write("measure.csv", ("cell_x", "cell_t", "bin_lo", "bin_hi", "weight"),
              reports.measure_rows(measure))
    ctx.write("concentration.csv", ("cell_x", "cell_t", "m1", "w_plus", "w_minus"),
              reports.measure_sidecar_rows(measure))
    if not np.all(np.abs(measure.weights.sum(axis=2) - 1.0) < 1e-12):
        raise InvariantViolationError("histogram normalization broken")
    if float(var.max()) > 0.25 * (2 * radius) ** 2:
        raise InvariantViolationError("cell variance exceeds the crude bound")


def run_contraction(ctx: RunContext):
    cp = ctx.cfg
    n_x = _get(cp, "contraction", "n_x", int, 256)
    t_end = _get(cp, "contraction", "t_end", float, 1.0)
    n_snap = _get(cp, "contraction", "n_snapshots", int, 10)
    shift = _get(cp, "contraction", "phase_shift", float, 0.3)
    flux = _flux_from_name(_get(cp, "contraction", "flux", str, "burgers"), 4.0)
    grid = PeriodicGrid(n_x)
    rng = np.random.default_rng(ctx.seed) if ctx.seed is not None else None
    kind = _get(cp, "contraction", "u0", str, "sin")
    a0 = _initial_field(kind, grid, rng)
    if kind == "random":
        b0 = _initial_field(kind, grid, rng)
    else:
        b0 = ScalarField(grid, np.interp(
            (grid.cell_centers + shift) % grid.length,
            grid.cell_centers, a0.values, period=grid.length))
    ta = claw.solve_reference(a0, flux, t_end, n_snap)
    tb = claw.solve_reference(b0, flux, t_end, n_snap)
    series = claw.contraction_series(ta, tb)
    ctx.write("contraction.csv", ("t", "distance"), series)
    d = series[:, 1]
    guard = FP_CONTRACTION_GUARD * max(1.0, d[0])
    if np.any(d[1:] > d[:-1] + guard):
        raise InvariantViolationError("discrete contraction violated")


def run_euler_weak_strong(ctx: RunContext):
    cp = ctx.cfg
    fine_n = _get(cp, "euler", "fine_n", int, 1024)
    levels = _int_list(_get(cp, "euler", "levels", str, "64 128 256"))
    amp = _get(cp, "euler", "amplitude", float, 0.25)
    gamma = _get(cp, "euler", "gamma", float, 1.4)
    t_end = _get(cp, "euler", "t_end", float, 0.3)
    cfl = _get(cp, "euler", "cfl", float, 0.45)
    n_snap = _get(cp, "euler", "n_snapshots", int, 12)
    c_g = _get(cp, "euler", "gronwall_constant", float, euler.GRONWALL_CONSTANT)
    grid = PeriodicGrid(fine_n)
    state0 = euler.simple_wave_state(grid, amp, gamma)
    strong = euler.lax_friedrichs_euler(state0, t_end, cfl=cfl, n_snapshots=n_snap)
    result = euler.weak_strong_experiment(strong, levels, c_g=c_g, cfl=cfl)
    ctx.write("strong_trajectory.csv", ("t", "x", "rho", "u"),
              reports.euler_trajectory_rows(strong))
    for nc, rep in zip(result.levels, result.reports):
        rows = zip(rep.times, rep.e_rel, rep.bound, rep.per_time_ok)
        ctx.write(f"gronwall_{nc}.csv", ("t", "E_rel", "bound", "pass"), rows)
    if not all(rep.ok for rep in result.reports):
        raise InvariantViolationError("exponential bound violated on a level")
    if np.any(np.diff(result.max_e_rel) >= 0):
        raise InvariantViolationError("relative entropy not decreasing under refinement")


def run_renewal_decay(ctx: RunContext):
    cp = ctx.cfg
    birth = _birth_from_config(cp)
    x_max = _get(cp, "grid", "x_max", float, 24.0)
    n_cells = _get(cp, "grid", "n", int, 9600)
    grid = renewal.AgeGrid(x_max, n_cells)
    model = renewal.RenewalModel.build(birth, grid)
    dt = _get(cp, "time", "dt", float, grid.dx)
    t_end = _get(cp, "time", "t_end", float, 10.0)
    m_tol = _get(cp, "time", "m_tol", float, 1e-2)
    kind = _get(cp, "init", "kind", str, "perturbed")
    m0 = None
    if kind == "steady":
        n0 = renewal.steady_initial(model)
    elif kind == "perturbed":
        n0 = renewal.perturbed_initial(
            model,
            amplitude=_get(cp, "init", "amplitude", float, 0.1),
            center=_get(cp, "init", "center", float, 1.5),
            width=_get(cp, "init", "width", float, 0.5))
    elif kind == "atom":
        age = _get(cp, "init", "age", float, 1.0)
        n0 = renewal.atom_initial(model, age)
        m0 = renewal.atom_mass_functional(model, age)
    elif kind == "table":
        path = _get(cp, "init", "table", str, None)
        if path is None:
            raise ConfigError("init.kind=table requires init.table = <csv>")
        xs, vals = _load_table(path)
        if np.any(vals < 0):
            raise ConfigError("tabulated initial data must be non-negative")
        n0 = np.interp(grid.nodes, xs, vals, left=vals[0], right=0.0)
    else:
        raise ConfigError(f"unknown init kind {kind!r}")
    series = renewal.decay_experiment(n0, model, t_end, dt=dt, m0=m0)
    ctx.write("decay.csv", ("t", "H", "m", "sigma_hat_running"),
              zip(series.times, series.H, series.m,
                  np.nan_to_num(series.sigma_running)))
    ctx.write("eigen.csv", ("x", "N", "phi"),
              zip(grid.nodes, model.N, model.phi))
    drift = np.max(np.abs(series.m - series.m[0])) / max(abs(series.m[0]), 1e-300)
    if drift > m_tol:
        raise InvariantViolationError(
            f"invariant functional drifted by {drift:.3e} > {m_tol:.1e}")


EXPERIMENTS = {
    "claw-converge": (
        run_claw_converge,
        "vanishing-viscosity ladder vs the monotone reference solver",
        "scalar conservation laws / parabolic regularization",
        {"claw": {"n_x", "t_end", "viscosity_ladder", "n_snapshots", "flux",
                  "lam_max", "u0"},
         "experiment": {"seed", "out"}},
    ),
    "entropy-check": (
        run_entropy_check,
        "weak Kruzhkov residuals on a run, optional expansion-shock counterexample",
        "entropy inequalities for scalar laws",
        {"claw": {"n_x", "t_end", "n_snapshots", "k_values", "flux", "lam_max",
                  "u0"},
         "counterexample": {"enabled", "amplitude", "n_snapshots"},
         "experiment": {"seed", "out"}},
    ),
    "young-measure": (
        run_young_measure,
        "empirical Young measure of a viscosity ladder with concentration split",
        "Young measures / oscillation and concentration",
        {"claw": {"n_x", "t_end", "viscosity_ladder", "n_snapshots", "flux",
                  "lam_max", "u0"},
         "young": {"bins", "truncation_radius", "n_x_coarse", "n_t_coarse"},
         "experiment": {"seed", "out"}},
    ),
    "contraction": (
        run_contraction,
        "L1 distance series between two monotone-scheme runs",
        "averaged contraction / L1 stability",
        {"contraction": {"n_x", "t_end", "n_snapshots", "flux", "u0",
                         "phase_shift"},
         "experiment": {"seed", "out"}},
    ),
    "euler-weak-strong": (
        run_euler_weak_strong,
        "relative entropy of coarse isentropic flows against a fine strong run",
        "weak-strong uniqueness for compressible flow",
        {"euler": {"fine_n", "levels", "amplitude", "gamma", "t_end", "cfl",
                   "n_snapshots", "gronwall_constant"},
         "experiment": {"seed", "out"}},
    ),
    "renewal-decay": (
        run_renewal_decay,
        "growth-rescaled age transport: invariant functional and decay rate",
        "age-structured population asymptotics",
        {"birth": {"kind", "params", "table"},
         "grid": {"x_max", "n"},
         "time": {"dt", "t_end", "m_tol"},
         "init": {"kind", "amplitude", "center", "width", "age", "table"},
         "experiment": {"seed", "out"}},
    ),
}


def list_experiments() -> str:
    lines = ["available experiments:"]
    for name, (_, desc, tag, schema) in EXPERIMENTS.items():
        keys = ", ".join(
            f"[{sec}] {key}" for sec in sorted(schema) if sec != "experiment"
            for key in sorted(schema[sec]))
        lines.append(f"  {name:18s} {desc}  [{tag}]")
        lines.append(f"  {'':18s} keys: {keys}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="entropy-lab",
        description="run a named experiment from an INI config",
    )
    parser.add_argument("experiment", nargs="?", help="experiment name")
    parser.add_argument("--config", type=Path, help="INI config path")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--timestamps", action="store_true",
                        help="add a generation-time comment to artifacts")
    parser.add_argument("--version", action="version", version=__version__)
    args = parser.parse_args(argv)

    if args.experiment is None or args.experiment == "list":
        print(list_experiments())
        return 0

    def fail(code, kind, message):
        record = {"error": kind, "message": message, "experiment": args.experiment}
        print(json.dumps(record), file=sys.stderr)
        return code

    if args.experiment not in EXPERIMENTS:
        return fail(EXIT_CONFIG, "unknown-experiment",
                    f"unknown experiment {args.experiment!r}; valid: "
                    + ", ".join(sorted(EXPERIMENTS)))
    if args.config is None:
        return fail(EXIT_CONFIG, "config-missing", "--config is required")

    runner, _, _, schema = EXPERIMENTS[args.experiment]
    try:
        raw = args.config.read_bytes()
        cfg = _parse_config(args.config, schema)
        seed = args.seed if args.seed is not None else \
            _get(cfg, "experiment", "seed", int, None)
        out_dir = args.out or Path(_get(cfg, "experiment", "out", str, "out"))
        ctx = RunContext(args.experiment, cfg, reports.config_sha(raw),
                         out_dir, seed, args.timestamps)
        ctx.out_dir.mkdir(parents=True, exist_ok=True)
        runner(ctx)
    except ConfigError as exc:
        return fail(EXIT_CONFIG, "config-error", str(exc))
    except (InvariantViolationError,) as exc:
        return fail(EXIT_NUMERICAL, "invariant-violation", str(exc))
    except EntropyLabError as exc:
        return fail(EXIT_NUMERICAL, type(exc).__name__, str(exc))
    except OSError as exc:
        return fail(EXIT_IO, "io-error", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
