"""Configuration-driven command line: sweeps to CSV, certification to JSON.

Usage:

    psagen <command> --config <file> [--out <dir>] [--threads N]

Commands: ``threshold-sweep``, ``evolve``, ``choi``, ``qho``, ``certify``.
Configs are TOML with a ``[model]`` block plus optional ``[sweep]``/``[time]``
blocks; a ``[[series]]`` list runs the same command over model variations,
one output file per series.  CSV output is deterministic: metadata lines are
prefixed with ``#``, every float is printed with 12 significant digits, and
sweep points are dispatched to a thread pool whose results are written in
input order regardless of completion order.

Exit codes: 0 success, 2 validation/configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, dynamics, positivity
from .bath import dipole_pv_terms
from .dipole import DipoleModel, build_dipole
from .errors import (
    ConfigurationError,
    IntegrationError,
    NonUniqueSteadyStateError,
    NotCompletelyPositiveError,
    PsagenError,
    QuadratureError,
    ValidationError,
)

__all__ = ["main", "run", "load_config"]

REPORT_SCHEMA = "psagen-report/1"

_STATISTICS = {"bosonic": +1, "fermionic": -1, "+1": +1, "-1": -1, 1: +1, -1: -1}
_SYSTEMS = {"qubit": -1, "oscillator": +1, "qho": +1}


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"config {path} is not valid TOML: {exc}") from exc


def _flatten(prefix: str, block) -> list[str]:
    lines = []
    for key in sorted(block):
        val = block[key]
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(val, dict):
            lines.extend(_flatten(name, val))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            for k, item in enumerate(val):
                lines.extend(_flatten(f"{name}[{k}]", item))
        else:
            lines.append(f"{name} = {_fmt(val)}")
    return lines


def _parse_beta(block: dict) -> float:
    if "beta" in block and "kT" in block:
        raise ValidationError("give either beta or kT, not both")
    if "beta" in block:
        beta = block["beta"]
        if isinstance(beta, str):
            if beta.lower() in ("inf", "infinity"):
                return math.inf
            raise ValidationError(f"unrecognized beta value {beta!r}")
        if beta < 0:
            raise ValidationError("beta must be >= 0")
        return float(beta)
    if "kT" in block:
        kt = float(block["kT"])
        if kt < 0:
            raise ValidationError("kT must be >= 0")
        return math.inf if kt == 0.0 else 1.0 / kt
    raise ValidationError("model block needs a temperature (beta or kT)")


def _parse_model(block: dict, need_timescale: bool) -> DipoleModel:
    system = block.get("system", "qubit")
    if system not in _SYSTEMS:
        raise ValidationError(f"unknown system {system!r}")
    stats = block.get("statistics", "bosonic")
    if stats not in _STATISTICS:
        raise ValidationError(f"unknown statistics {stats!r}")
    delta_t = block.get("delta_t")
    if isinstance(delta_t, str):
        if delta_t.lower() not in ("inf", "infinity"):
            raise ValidationError(f"unrecognized delta_t value {delta_t!r}")
        delta_t = math.inf
    sinc_value = block.get("sinc_value")
    if need_timescale and delta_t is None and sinc_value is None:
        raise ValidationError("model needs delta_t or sinc_value for this command")
    return DipoleModel(
        s=_SYSTEMS[system],
        q=_STATISTICS[stats],
        omega0=float(block.get("omega0", 1.0)),
        beta=_parse_beta(block),
        kappa0=float(block.get("kappa0", 1.0)),
        omega_c=float(block["omega_c"]),
        n_max=int(block.get("n_max", 30)),
        delta_t=None if delta_t is None else float(delta_t),
        sinc_value=None if sinc_value is None else float(sinc_value),
    )


def _series_blocks(config: dict) -> list[tuple[str, dict]]:
    base = dict(config.get("model", {}))
    series = config.get("series")
    if not series:
        return [("", base)]
    out = []
    for k, entry in enumerate(series):
        if "name" not in entry:
            raise ValidationError(f"series[{k}] needs a name")
        merged = dict(base)
        merged.update({key: v for key, v in entry.items() if key != "name"})
        out.append((str(entry["name"]), merged))
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise ValidationError("series names must be unique")
    return out


def _sweep_grid(config: dict) -> np.ndarray:
    block = config.get("sweep")
    if not block:
        raise ValidationError("this command needs a [sweep] block")
    if "grid" in block:
        grid = np.asarray(block["grid"], dtype=float)
    else:
        try:
            start, stop, points = block["start"], block["stop"], block["points"]
        except KeyError as exc:
            raise ValidationError(f"sweep block missing {exc}") from exc
        if block.get("log", False):
            grid = np.geomspace(start, stop, int(points))
        else:
            grid = np.linspace(start, stop, int(points))
    if len(grid) == 0 or np.any(np.diff(grid) <= 0):
        raise ValidationError("sweep grid must be nonempty and strictly increasing")
    return grid


def _time_grid(config: dict, default_t_max: float) -> np.ndarray:
    block = config.get("time", {})
    t_max = float(block.get("t_max", default_t_max))
    points = int(block.get("points", 400))
    if t_max <= 0 or points < 2:
        raise ValidationError("time block needs t_max > 0 and points >= 2")
    return np.linspace(0.0, t_max, points)


def _write_csv(path: Path, command: str, config: dict, series: str,
               header: list[str], rows) -> None:
    lines = [f"# psagen {__version__}", f"# command = {command}"]
    if series:
        lines.append(f"# series = {series}")
    lines.extend(f"# {entry}" for entry in _flatten("", config))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _pool(threads: int | None) -> ThreadPoolExecutor:
    workers = threads if threads and threads > 0 else (os.cpu_count() or 1)
    return ThreadPoolExecutor(max_workers=workers)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_threshold_sweep(config, out_dir: Path, stem: str, threads) -> list[Path]:
    grid = _sweep_grid(config)
    written = []
    for name, block in _series_blocks(config):
        base = dict(block)
        base.pop("kT", None)
        base.pop("beta", None)

        def point(kt: float, base=base):
            model = _parse_model({**base, "kT": kt}, need_timescale=False)
            bath = model.bath()
            big_i, i_minus, i_plus = dipole_pv_terms(bath, model.omega0)
            kappa = float(bath.kappa(model.omega0))
            n = bath.occupation(model.omega0)
            return (
                kt,
                positivity.exact_threshold(kappa, n, model.q, big_i),
                positivity.simple_threshold_bound(n, model.q),
                positivity.sufficient_sinc_bound(kappa, n, model.q, i_minus, i_plus),
            )

        with _pool(threads) as pool:
            rows = list(pool.map(point, grid))
        path = out_dir / (f"{stem}__{name}.csv" if name else f"{stem}.csv")
        _write_csv(path, "threshold-sweep", config, name,
                   ["T", "exact_threshold", "simple_bound", "sufficient_bound"], rows)
        written.append(path)
    return written


def _cmd_evolve(config, out_dir: Path, stem: str, threads) -> list[Path]:
    written = []
    jobs = []
    for name, block in _series_blocks(config):
        model = _parse_model(block, need_timescale=True)
        if model.s != -1:
            raise ValidationError("evolve expects the two-level model")
        jobs.append((name, model))

    def run_one(job):
        name, model = job
        build = build_dipole(model)
        times = _time_grid(config, default_t_max=10.0 / model.omega0)
        plus = np.full((2, 2), 0.5, dtype=complex)
        traj = dynamics.evolve(build.liouvillian, plus, times)
        rows = []
        for t, rho in zip(times, traj.states):
            ana = dynamics.qubit_analytic(build.rates, t)
            delta = float(np.abs(rho - ana).max())
            det = float(np.linalg.det(rho).real)
            rows.append((float(t), rho[0, 0].real, rho[1, 1].real,
                         rho[1, 0].real, rho[1, 0].imag, det, delta))
        return name, rows

    with _pool(threads) as pool:
        results = list(pool.map(run_one, jobs))
    for name, rows in results:
        path = out_dir / (f"{stem}__{name}.csv" if name else f"{stem}.csv")
        _write_csv(path, "evolve", config, name,
                   ["t", "rho00", "rho11", "re_rho10", "im_rho10", "det",
                    "analytic_delta"],
                   rows)
        written.append(path)
    return written


def _cmd_choi(config, out_dir: Path, stem: str, threads) -> list[Path]:
    written = []
    jobs = []
    for name, block in _series_blocks(config):
        model = _parse_model(block, need_timescale=True)
        if model.s != -1:
            raise ValidationError("choi expects the two-level model")
        jobs.append((name, model))

    def run_one(job):
        name, model = job
        build = build_dipole(model)
        times = _time_grid(config, default_t_max=10.0 / model.omega0)
        choi = dynamics.choi_evolution(build.liouvillian, times)
        rows = [(float(t), *map(float, choi.eigenvalues[k]))
                for k, t in enumerate(times)]
        return name, rows

    with _pool(threads) as pool:
        results = list(pool.map(run_one, jobs))
    for name, rows in results:
        path = out_dir / (f"{stem}__{name}.csv" if name else f"{stem}.csv")
        _write_csv(path, "choi", config, name,
                   ["t", "lambda1", "lambda2", "lambda3", "lambda4"], rows)
        written.append(path)
    return written


def _cmd_qho(config, out_dir: Path, stem: str, threads) -> list[Path]:
    written = []
    jobs = []
    for name, block in _series_blocks(config):
        model = _parse_model({**{"system": "oscillator"}, **block},
                             need_timescale=True)
        if model.s != +1:
            raise ValidationError("qho expects the oscillator model")
        jobs.append((name, model))

    def run_one(job):
        name, model = job
        build = build_dipole(model)
        times = _time_grid(config, default_t_max=60.0 / model.omega0)
        moments = dynamics.qho_moments(build.rates, 0.0 + 0.0j, 0.0, times)
        ground = np.zeros((model.n_max, model.n_max), dtype=complex)
        ground[0, 0] = 1.0
        traj = dynamics.evolve(build.liouvillian, ground, times)
        from .dipole import ladder_operator
        a2_num, occ_num = dynamics.ladder_moments(traj.states,
                                                  ladder_operator(model.n_max))
        rows = []
        for k, t in enumerate(times):
            delta = max(abs(moments.occupation[k] - occ_num[k]),
                        abs(moments.a_squared[k] - a2_num[k]))
            rows.append((float(t), float(moments.occupation[k]),
                         float(moments.a_squared[k].real),
                         float(moments.a_squared[k].imag), float(delta)))
        return name, rows

    with _pool(threads) as pool:
        results = list(pool.map(run_one, jobs))
    for name, rows in results:
        path = out_dir / (f"{stem}__{name}.csv" if name else f"{stem}.csv")
        _write_csv(path, "qho", config, name,
                   ["t", "occupation", "re_a2", "im_a2", "ode_delta"], rows)
        written.append(path)
    return written


def _synthetic_provider(block: dict):
    from .bath import OmegaProvider

    gaps = [float(w) for w in block.get("gaps", [])]
    if len(gaps) < 2:
        raise ValidationError("synthetic model needs a gaps list (>= 2 entries)")
    m = int(block.get("channels", 1))
    rng = np.random.default_rng(int(block.get("seed", 0)))
    entries = {}
    for w in gaps:
        r = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        c = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        entries[w] = r @ r.conj().T / 2.0 + 0.5j * (c + c.conj().T)
    return OmegaProvider(entries=entries), gaps


def _cmd_certify(config, out_dir: Path, stem: str, threads) -> list[Path]:
    block = dict(config.get("model", {}))
    system = block.get("system", "qubit")
    report: dict = {"schema": REPORT_SCHEMA, "version": __version__}

    if system == "synthetic":
        provider, gaps = _synthetic_provider(block)
        report["model"] = {"system": "synthetic", "gaps": gaps,
                           "channels": int(block.get("channels", 1)),
                           "seed": int(block.get("seed", 0))}
        delta_t = block.get("delta_t")
        if delta_t is not None:
            gamma = positivity.rate_matrix(provider, delta_t=float(delta_t))
            lam = positivity.lambda_min(gamma)
            scale = float(np.linalg.norm(gamma, 2))
            report["lambda_min"] = lam
            report["is_cp"] = bool(lam >= -positivity.PSD_REL_TOL * max(scale, 1e-300))
    else:
        model = _parse_model(block, need_timescale=False)
        build_needed = model.delta_t is not None or model.sinc_value is not None
        from .bath import dipole_omega
        provider = dipole_omega(model.bath(), model.omega0)
        gaps = list(provider.gaps)
        report["model"] = {
            "system": system, "statistics": "bosonic" if model.q > 0 else "fermionic",
            "omega0": model.omega0, "beta": model.beta, "kappa0": model.kappa0,
            "omega_c": model.omega_c,
        }
        report["exact_threshold"] = positivity.exact_threshold_dipole(model)
        report["sufficient_bound"] = positivity.sufficient_sinc_bound_dipole(model)
        delta_t = model.delta_t
        if build_needed:
            gamma = positivity.rate_matrix(provider, delta_t=model.delta_t,
                                           sinc_value=model.sinc_value)
            lam = positivity.lambda_min(gamma)
            scale = float(np.linalg.norm(gamma, 2))
            report["lambda_min"] = lam
            report["is_cp"] = bool(lam >= -positivity.PSD_REL_TOL * max(scale, 1e-300))

    times = positivity.critical_times(provider, gaps)
    report["trivial_single_gap"] = times.trivial_single_gap
    report["dtc0"], report["dtc1"], report["dtc2"] = times.dtc0, times.dtc1, times.dtc2
    report["dilution"] = {
        _fmt(w): {
            "Q": rec.q_total,
            "K": rec.k_constant,
            "q": {_fmt(wp): v for wp, v in sorted(rec.q_weights.items())},
            "p": {_fmt(wp): v for wp, v in sorted(rec.p_optimal.items())},
        }
        for w, rec in sorted(times.dilution.items())
    }

    if system == "synthetic" and delta_t is None and not times.trivial_single_gap:
        # sufficiency spot-check: the rate matrix must be PSD at each bound
        checks = {}
        for label, dtc in (("dtc0", times.dtc0), ("dtc1", times.dtc1),
                           ("dtc2", times.dtc2)):
            gamma = positivity.rate_matrix(provider, delta_t=dtc)
            lam = positivity.lambda_min(gamma)
            scale = float(np.linalg.norm(gamma, 2))
            checks[label] = bool(lam >= -positivity.PSD_REL_TOL * max(scale, 1e-300))
        report["sufficiency_verified"] = checks

    def _jsonable(x):
        if isinstance(x, float) and math.isinf(x):
            return "inf"
        return x

    path = out_dir / f"{stem}.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True,
                               default=_jsonable) + "\n")
    return [path]


_COMMANDS = {
    "threshold-sweep": _cmd_threshold_sweep,
    "evolve": _cmd_evolve,
    "choi": _cmd_choi,
    "qho": _cmd_qho,
    "certify": _cmd_certify,
}


def run(command: str, config_path, out_dir=None, threads: int | None = None) -> list[Path]:
    """Execute one command; returns the list of files written."""
    config = load_config(config_path)
    declared = config.get("command")
    if declared is not None and declared != command:
        raise ValidationError(
            f"config declares command {declared!r} but {command!r} was invoked")
    stem = Path(config_path).stem
    out = Path(out_dir) if out_dir else Path(config.get("output", {}).get("dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[command](config, out, stem, threads)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="psagen",
        description="Partial-secular master-equation sweeps and certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: available parallelism)")
    args = parser.parse_args(argv)

    try:
        written = run(args.command, args.config, args.out, args.threads)
    except (ValidationError, ConfigurationError) as exc:
        print(f"psagen: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, NotCompletelyPositiveError,
            NonUniqueSteadyStateError, IntegrationError) as exc:
        print(f"psagen: numerical failure: {exc}", file=sys.stderr)
        return 3
    except PsagenError as exc:
        print(f"psagen: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
