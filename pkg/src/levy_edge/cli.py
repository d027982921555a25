"""Command-line front end.

    levy-edge SUBCOMMAND [--config FILE] [flags]

Flags may also come from a flat key=value config file; command-line values
win.  Output is CSV (header row, 17 significant digits) or JSON, and every row
carries the config hash and seed.  Failures print a one-line JSON error record
to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import edge, matrix, pwit, rde, stable, transfer

__all__ = ["RunConfig", "ConfigError", "parse_config", "dispatch", "sweep", "main"]

SUBCOMMANDS = ("stable-check", "rde", "edge", "lambda", "transfer", "pwit", "matrix", "sweep")
STOCHASTIC = {"stable-check", "rde", "pwit", "matrix"}

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(ValueError):
    """Invalid configuration."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    alpha: tuple[float, ...] = (0.5,)
    s: tuple[float, ...] = (0.75,)
    E: tuple[float, ...] = (0.0,)
    eta: tuple[float, ...] = (0.01,)
    N: tuple[int, ...] = (500,)
    pool: int = 100_000
    trees: int = 200
    depth: int = 4
    omega: float | None = None
    reps: int = 5
    seed: int | None = None
    tol: float = 1e-8
    out: str | None = None
    format: str = "csv"
    timing: bool = False

    def hash(self) -> str:
        """Digest of everything that determines the numbers (not where they go)."""
        payload = {k: v for k, v in asdict(self).items() if k not in ("out", "format")}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# parsing


def _floats(text: str, name: str) -> tuple[float, ...]:
    """Comma list, or lo:hi:n for n evenly spaced values."""
    text = str(text).strip()
    if not text:
        raise ConfigError(f"{name} grid is empty")
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            if int(n) < 1:
                raise ConfigError(f"{name} grid is empty")
            return tuple(float(v) for v in np.linspace(float(lo), float(hi), int(n)))
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(f"cannot parse {name} grid {text!r}") from None


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for number, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{number}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levy-edge", description="Mobility edge of Levy matrices.")
    p.add_argument("subcommand")
    p.add_argument("--config")
    for flag in ("--alpha", "--s", "--E", "--E-grid", "--eta-ladder", "--N", "--pool", "--trees",
                 "--depth", "--omega", "--reps", "--seed", "--tol", "--out", "--format"):
        p.add_argument(flag, dest=flag[2:].replace("-", "_"))
    p.add_argument("--timing", action="store_const", const="true")
    return p


def parse_config(argv: list[str]) -> RunConfig:
    args = _parser().parse_args(argv)
    values: dict[str, str] = {}
    if args.config:
        values.update(_read_config_file(args.config))
    values.update({k: v for k, v in vars(args).items() if v is not None and k != "config"})
    sub = values.pop("subcommand")
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {sub!r}; expected one of {', '.join(SUBCOMMANDS)}")
    known = set(RunConfig.__dataclass_fields__) | {"E_grid", "eta_ladder"}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    kw: dict = {"subcommand": sub}
    try:
        if "alpha" in values:
            kw["alpha"] = _floats(values["alpha"], "alpha")
        if "s" in values:
            kw["s"] = _floats(values["s"], "s")
        if "E_grid" in values:
            kw["E"] = _floats(values["E_grid"], "E")
        elif "E" in values:
            kw["E"] = _floats(values["E"], "E")
        if "eta_ladder" in values:
            kw["eta"] = _floats(values["eta_ladder"], "eta")
        elif "eta" in values:
            kw["eta"] = _floats(values["eta"], "eta")
        if "N" in values:
            kw["N"] = tuple(int(v) for v in _floats(values["N"], "N"))
        for key in ("pool", "trees", "depth", "reps"):
            if key in values:
                kw[key] = int(values[key])
        if "seed" in values:
            kw["seed"] = int(values["seed"])
        for key in ("omega", "tol"):
            if key in values:
                kw[key] = float(values[key])
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from None
    if "out" in values:
        kw["out"] = values["out"]
    if "format" in values:
        if values["format"] not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        kw["format"] = values["format"]
    if "timing" in values:
        kw["timing"] = str(values["timing"]).lower() in ("1", "true", "yes")
    cfg = RunConfig(**kw)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    for name in ("alpha", "s", "E", "eta", "N"):
        if not getattr(cfg, name):
            raise ConfigError(f"{name} grid is empty")
    if cfg.subcommand in STOCHASTIC and cfg.seed is None:
        raise ConfigError(f"{cfg.subcommand} is stochastic and needs --seed")
    if any(not 0 < a < 1 for a in cfg.alpha):
        raise ConfigError("alpha values must lie in (0, 1)")
    if any(e <= 0 for e in cfg.eta):
        raise ConfigError("eta values must be positive")
    if min(cfg.pool, cfg.trees, cfg.depth, cfg.reps) < 1 or min(cfg.N) < 2:
        raise ConfigError("budgets must be positive")


# ---------------------------------------------------------------------------
# subcommands; each returns (columns, rows)


def _run_stable_check(cfg: RunConfig):
    cols = ["alpha", "check", "t", "estimate", "exact", "std_err", "z_score"]
    rows = []
    rng = np.random.default_rng(cfg.seed)
    for a in cfg.alpha:
        x = stable.sample_stable(stable.StableParams(a, 1.0, 1.0), cfg.pool, rng)
        for t in (0.5, 1.0, 2.0):
            vals = np.exp(-t * x)
            est, se = vals.mean(), vals.std(ddof=1) / math.sqrt(len(vals))
            exact = math.exp(-math.gamma(1.0 - a) * t**a)
            rows.append([a, "laplace", t, est, exact, se, (est - exact) / se])
        # E[S**(-alpha/2)] for S one-sided of index alpha/2
        half = stable.sample_stable(stable.StableParams(0.5 * a, 1.0, 1.0), cfg.pool, rng)
        vals = half ** (-0.5 * a)
        est, se = vals.mean(), vals.std(ddof=1) / math.sqrt(len(vals))
        exact = stable.neg_fractional_moment(a, 1.0)
        rows.append([a, "neg_moment", math.nan, est, exact, se, (est - exact) / se])
    return cols, rows


def _run_rde(cfg: RunConfig):
    cols = ["alpha", "re_z", "im_z", "re_y", "im_y", "y_std_err", "y_residual", "a", "b",
            "sigma_kappa", "beta_kappa", "sigma_theta"]
    rows = []
    rng = np.random.default_rng(cfg.seed)
    for a in cfg.alpha:
        for E in cfg.E:
            for eta in cfg.eta:
                pop = rde.run_population(complex(E, eta), a, cfg.pool, seed=rng)
                y = rde.estimate_y(pop)
                aa, bb = rde.ab_from_y(y.y, a)
                se = rde.self_energy_params(pop)
                rows.append([a, E, eta, y.y.real, y.y.imag, y.std_err, y.residual, aa, bb,
                             se.sigma_kappa, se.beta_kappa, se.sigma_theta])
    return cols, rows


def _run_edge(cfg: RunConfig):
    cols = ["alpha", "root_index", "E_root", "largest", "E_mob", "bracket_lo", "bracket_hi", "n_roots"]
    rows = []
    for a in cfg.alpha:
        m = edge.mobility_edge(a)
        for i, r in enumerate(m.all_roots):
            rows.append([a, i, r, int(r == m.E_mob), m.E_mob, m.bracket[0], m.bracket[1], len(m.all_roots)])
    return cols, rows


def _run_lambda(cfg: RunConfig):
    cols = ["alpha", "E", "a", "b", "re_ell", "im_ell", "lambda", "residual", "method", "s", "lambda_s"]
    rows = []
    for a in cfg.alpha:
        for E in cfg.E:
            pair = edge.solve_ab(E, a, tol=cfg.tol)
            sol = edge.edge_solution(E, a, pair=pair)
            for s in cfg.s:
                lam_s = edge.lambda_from_ell(sol.ell, a, s) if a < s <= 1 else math.nan
                rows.append([a, E, sol.a, sol.b, sol.ell.real, sol.ell.imag, sol.lambda_, sol.residual,
                             sol.method, s, lam_s])
    return cols, rows


def _run_transfer(cfg: RunConfig):
    cols = ["alpha", "s", "E", "lambda_rank2", "lambda_grid", "lambda_s", "eigvec_1", "eigvec_2", "grid_points"]
    rows = []
    for a in cfg.alpha:
        for s in cfg.s:
            for E in cfg.E:
                pair = edge.solve_ab(E, a, tol=cfg.tol)
                k = transfer.build_kernel(E, s, a, pair)
                lam2, vec = transfer.perron_rank2(k)
                lamg, _ = transfer.perron_grid(k)
                rows.append([a, s, E, lam2, lamg, edge.lambda_s(E, s, a, pair=pair), vec[0], vec[1], len(k.x)])
    return cols, rows


def _run_pwit(cfg: RunConfig):
    cols = ["alpha", "s", "re_z", "im_z", "L", "phi_L", "phi_rate", "std_err", "omega", "n_trees"]
    rows = []
    rng = np.random.default_rng(cfg.seed)
    for a in cfg.alpha:
        # default omega gives mean branching 4
        omega = cfg.omega if cfg.omega is not None else 4.0 ** (-1.0 / a)
        for E in cfg.E:
            for eta in cfg.eta:
                z = complex(E, eta)
                pop = rde.run_population(z, a, cfg.pool, cutoff=omega**2, seed=rng)
                trees = [pwit.tree_resolvent(pwit.sample_tree(a, cfg.depth, omega, rng), z, "stable",
                                             pool=pop, seed=rng) for _ in range(cfg.trees)]
                for s in cfg.s:
                    for L in range(1, cfg.depth + 1):
                        est = pwit.phi_L(trees, s, z, L)
                        rows.append([a, s, E, eta, L, est.phi_L, est.phi_rate, est.std_err, omega, cfg.trees])
    return cols, rows


def _run_matrix(cfg: RunConfig):
    cols = ["alpha", "E", "eta", "N", "rep", "med_im_g", "q2", "qhalf_s", "class", "q_class"]
    rows = []
    rng = np.random.default_rng(cfg.seed)
    s = cfg.s[0]
    for a in cfg.alpha:
        for N in cfg.N:
            report = matrix.phase_diagnostic(a, list(cfg.E), N, list(cfg.eta), cfg.reps, rng, s=s)
            for row in report.rows:
                for rep in range(cfg.reps):
                    for j, eta in enumerate(row.etas):
                        rows.append([a, row.E, eta, N, rep, row.rep_median_im_g[rep][j],
                                     row.rep_q2[rep][j], row.rep_q_half_s[rep][j], row.label, row.q_label])
    return cols, rows


def _sweep_row(a: float) -> dict:
    start = time.perf_counter()
    try:
        m = edge.mobility_edge(a)
        out = {"alpha": a, "E_mob": m.E_mob, "scaled_large": (1.0 - a) * m.E_mob,
               "scaled_small": m.E_mob ** (0.5 * a) * abs(math.log(a)), "n_roots": len(m.all_roots),
               "status": "ok", "error": ""}
    except Exception as err:  # one bad alpha must not sink the sweep
        out = {"alpha": a, "E_mob": math.nan, "scaled_large": math.nan, "scaled_small": math.nan,
               "n_roots": 0, "status": "error", "error": f"{type(err).__name__}: {err}"}
    out["runtime"] = time.perf_counter() - start
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LEVY_EDGE_THREADS", "1")))
    except ValueError:
        raise ConfigError("LEVY_EDGE_THREADS must be an integer") from None


def sweep(cfg: RunConfig):
    """Per-alpha mobility edge with both scaling statistics, in config order."""
    cols = ["alpha", "E_mob", "scaled_large", "scaled_small", "n_roots", "status", "error"]
    if cfg.timing:
        cols.append("runtime")
    workers = min(_threads(), len(cfg.alpha))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_row, cfg.alpha))
    else:
        results = [_sweep_row(a) for a in cfg.alpha]
    return cols, [[r[c] for c in cols] for r in results]


_RUNNERS = {
    "stable-check": _run_stable_check,
    "rde": _run_rde,
    "edge": _run_edge,
    "lambda": _run_lambda,
    "transfer": _run_transfer,
    "pwit": _run_pwit,
    "matrix": _run_matrix,
    "sweep": sweep,
}


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def render(cfg: RunConfig, cols: list[str], rows: list[list]) -> str:
    cols = cols + ["config_hash", "seed"]
    tag = [cfg.hash(), "" if cfg.seed is None else cfg.seed]
    rows = [list(r) + tag for r in rows]
    if cfg.format == "json":
        records = [{c: _json_value(v) for c, v in zip(cols, r)} for r in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def dispatch(cfg: RunConfig) -> int:
    """Run the configured subcommand and write its table; returns the exit status."""
    cols, rows = _RUNNERS[cfg.subcommand](cfg)
    text = render(cfg, cols, rows)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _error_record(kind: str, message: str, subcommand: str | None) -> str:
    return json.dumps({"error": kind, "message": message, "subcommand": subcommand})


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    sub = argv[0] if argv else None
    try:
        cfg = parse_config(argv)
        return dispatch(cfg)
    except (ConfigError, OSError) as err:
        print(_error_record(type(err).__name__, str(err), sub), file=sys.stderr)
        return EXIT_CONFIG
    except (stable.ConvergenceError, pwit.BudgetError, ValueError) as err:
        print(_error_record(type(err).__name__, str(err), sub), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
