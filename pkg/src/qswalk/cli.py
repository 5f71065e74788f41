"""Command-line front end.

Subcommands: ``generate``, ``evolve``, ``est``, ``ensemble``, ``fit``,
``analytic``. Each reads an optional INI config, applies ``--set`` overrides
and writes CSV/JSON files whose ``#`` header carries the effective
configuration. Output files are only written once the whole command has
succeeded.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import DimerParams, dimer_est_closed, dimer_est_limits, monomer_est
from .config import ConfigError, RunConfig, load_config
from .dynamics import SystemSpec, Trajectory, assemble_superoperator, evolve
from .ensemble import EnsembleSpec, ensemble_est_sweep, fit_exponential, fit_power_law, run_ensemble
from .errors import NumericalError, QSWError, RealizationError, SamplingBudgetExceeded, ValidationError
from .est import ESTCurve, est_sweep
from .fit import fit_dimer_to_curve
from .network import (
    build_dimer_hamiltonian,
    build_dipole_hamiltonian,
    build_graph_hamiltonian,
    sample_disordered_network,
    write_hamiltonian_csv,
)

log = logging.getLogger("qswalk")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class Outputs:
    """Collects output files and writes them all at the end, atomically per file."""

    def __init__(self, directory: str):
        self.directory = Path(directory)
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> list[Path]:
        self.directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            dest = self.directory / name
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{name}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w") as fh:
                    fh.write(text)
                os.replace(tmp, dest)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            written.append(dest)
        return written


def _header(cfg: RunConfig, command: str, extra: dict | None = None) -> str:
    lines = []
    if cfg.timestamp:
        lines.append(f"# created={_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
    lines.append(f"# qswalk={__version__} command={command}")
    for key, value in cfg.provenance().items():
        lines.append(f"# {key}={value}")
    for key, value in (extra or {}).items():
        lines.append(f"# {key}={value}")
    return "\n".join(lines) + "\n"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def network_hamiltonian(cfg: RunConfig):
    """Return ``(H, NodeConfiguration or None)`` for the configured network."""
    if cfg.kind == "dimer":
        return build_dimer_hamiltonian(cfg.V, cfg.delta), None
    if cfg.kind == "monomer":
        return np.zeros((1, 1)), None
    if cfg.kind == "graph":
        try:
            A = np.loadtxt(cfg.adjacency_file, delimiter="," if cfg.adjacency_file.endswith(".csv") else None, ndmin=2)
        except OSError as exc:
            raise ConfigError("network.adjacency_file", f"cannot read {cfg.adjacency_file}: {exc}") from None
        except ValueError as exc:
            raise ConfigError("network.adjacency_file", str(exc)) from None
        return build_graph_hamiltonian(A, cfg.hop_rate), None
    config = sample_disordered_network(cfg.n_nodes, cfg.radius, cfg.seed, cfg.min_separation)
    return build_dipole_hamiltonian(config), config


def _warn_stiff(H, threshold):
    off = np.abs(H[~np.eye(len(H), dtype=bool)])
    if off.size and off.max() > threshold:
        log.warning("largest coupling %.3g exceeds stiffness threshold %.3g", off.max(), threshold)


def _system(cfg: RunConfig, alpha: float | None = None) -> SystemSpec:
    H, _ = network_hamiltonian(cfg)
    _warn_stiff(H, cfg.stiffness_threshold)
    return SystemSpec(H, cfg.alpha if alpha is None else alpha, cfg.Gamma, cfg.gamma)


def _ensemble_spec(cfg: RunConfig, alpha: float | None = None) -> EnsembleSpec:
    return EnsembleSpec(
        n_nodes=cfg.n_nodes,
        radius=cfg.radius,
        realisations=cfg.realisations,
        master_seed=cfg.master_seed,
        alpha=cfg.alpha if alpha is None else alpha,
        Gamma=cfg.Gamma,
        gamma=cfg.gamma,
        time_grid=cfg.time_grid,
        min_separation=cfg.min_separation,
    )


def trajectory_csv(traj: Trajectory, full_state: bool = False, survival_first: bool = False) -> str:
    pops = traj.populations
    dim = pops.shape[1]
    names = [f"rho{k}{k}" for k in range(dim - 1)] + ["rho_drain"]
    surv = traj.survival
    if survival_first:
        header = ["t", "survival"] + names
        cols = [traj.times, surv] + [pops[:, k] for k in range(dim)]
    else:
        header = ["t"] + names + ["survival"]
        cols = [traj.times] + [pops[:, k] for k in range(dim)] + [surv]
    if full_state and traj.states.ndim == 3:
        for i in range(dim):
            for j in range(dim):
                header += [f"re_{i}_{j}", f"im_{i}_{j}"]
                cols += [traj.states[:, i, j].real, traj.states[:, i, j].imag]
    return _csv(header, zip(*cols))


def cmd_generate(cfg: RunConfig, out: Outputs) -> str:
    H, config = network_hamiltonian(cfg)
    _warn_stiff(H, cfg.stiffness_threshold)
    buf = io.StringIO()
    write_hamiltonian_csv(H, buf)
    out.add("hamiltonian.csv", buf.getvalue())
    if config is not None:
        out.add("network.json", config.to_json() + "\n")
    off = np.abs(H[~np.eye(len(H), dtype=bool)])
    summary = f"N={len(H)}"
    if off.size:
        summary += f" min_coupling={off.min():.6g} max_coupling={off.max():.6g}"
    return summary


def cmd_evolve(cfg: RunConfig, out: Outputs) -> str:
    if cfg.kind == "disordered" and cfg.realisations > 1:
        traj = run_ensemble(_ensemble_spec(cfg), jobs=cfg.jobs)
    else:
        traj = evolve(assemble_superoperator(_system(cfg)), times=cfg.time_grid)
    out.add("trajectory.csv", _header(cfg, "evolve", traj.meta) + trajectory_csv(traj, cfg.full_state))
    return f"final survival={traj.survival[-1]:.6g}"


def cmd_ensemble(cfg: RunConfig, out: Outputs) -> str:
    spec = _ensemble_spec(cfg)
    traj = run_ensemble(spec, jobs=cfg.jobs)
    header = _header(cfg, "ensemble", traj.meta)
    out.add("ensemble_trajectory.csv", header + trajectory_csv(traj, survival_first=True))
    rows = []
    t, s = traj.times, traj.survival
    for name, fn, window in (
        ("power_law_beta", fit_power_law, cfg.power_window),
        ("exponential_mu", fit_exponential, cfg.exp_window),
    ):
        fit = fn(t, s, window)
        rows.append((name, fit.exponent, fit.window[0], fit.window[1], fit.residual))
    out.add("fits.csv", header + _csv(["quantity", "exponent", "window_lo", "window_hi", "residual"], rows))
    return "; ".join(f"{r[0]}={r[1]:.6g}" for r in rows)


def compute_est_curve(cfg: RunConfig) -> ESTCurve:
    if cfg.kind == "disordered" and cfg.realisations > 1:
        return ensemble_est_sweep(_ensemble_spec(cfg), cfg.alpha_grid, jobs=cfg.jobs)
    meta = {"kind": cfg.kind}
    if cfg.kind == "disordered":
        meta["seed"] = cfg.seed
    return est_sweep(_system(cfg, alpha=0.0), cfg.alpha_grid, meta)


def cmd_est(cfg: RunConfig, out: Outputs) -> str:
    curve = compute_est_curve(cfg)
    out.add("est.csv", _header(cfg, "est", curve.meta) + _csv(["alpha", "eta"], zip(curve.alphas, curve.etas)))
    return f"eta(alpha={curve.alphas[-1]:g})={curve.etas[-1]:.10g}"


def cmd_fit(cfg: RunConfig, out: Outputs) -> str:
    if cfg.target:
        try:
            target = ESTCurve.from_csv(cfg.target)
        except OSError as exc:
            raise ConfigError("fit.target", f"cannot read {cfg.target}: {exc.strerror}") from None
        except (KeyError, ValueError) as exc:
            raise ConfigError("fit.target", f"not an EST curve: {exc}") from None
        source = cfg.target
    else:
        target = compute_est_curve(cfg)
        out.add("est.csv", _header(cfg, "fit", target.meta) + _csv(["alpha", "eta"], zip(target.alphas, target.etas)))
        source = "est.csv"
    res = fit_dimer_to_curve(target, cfg.fit_delta, cfg.guess, n_starts=cfg.n_starts)
    row = res.as_row()
    header = _header(cfg, "fit", {"target": source, "iterations": res.iterations})
    out.add("fit.csv", header + _csv(list(row), [row.values()]))
    return f"gamma_d={res.gamma_d:.6g} Gamma_d={res.Gamma_d:.6g} V={res.V:.6g} loss={res.loss:.3g}"


def cmd_analytic(cfg: RunConfig, out: Outputs) -> str:
    if cfg.kind == "monomer":
        eta = monomer_est(cfg.Gamma, cfg.gamma)
        rows = [(a, eta) for a in cfg.alpha_grid]
        extra = {}
    elif cfg.kind == "dimer":
        p = DimerParams(V=cfg.V, delta=cfg.delta, Gamma=cfg.Gamma, gamma=cfg.gamma)
        rows = [(a, dimer_est_closed(p, float(a))) for a in cfg.alpha_grid]
        lo, hi = dimer_est_limits(p)
        extra = {"eta_alpha0": repr(lo), "eta_alpha1": repr(hi)}
    else:
        raise ConfigError("network.kind", "analytic results exist for monomer and dimer only")
    table = _csv(["alpha", "eta"], rows)
    out.add("analytic.csv", _header(cfg, "analytic", extra) + table)
    return table.rstrip("\n")


HELP = {
    "generate": "build a network and write its Hamiltonian",
    "evolve": "propagate the density matrix (ensemble average for disordered networks with realisations > 1)",
    "est": "expected survival time over the alpha grid",
    "ensemble": "ensemble-averaged trajectory and decay-law fits",
    "fit": "fit the dimer EST to a network EST curve",
    "analytic": "closed-form monomer or dimer EST",
}

COMMANDS = {
    "generate": cmd_generate,
    "evolve": cmd_evolve,
    "est": cmd_est,
    "ensemble": cmd_ensemble,
    "fit": cmd_fit,
    "analytic": cmd_analytic,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qswalk", description="Quantum stochastic walks with source and drain.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("-c", "--config", help="INI configuration file")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override a config key")
        p.add_argument("-o", "--out", help="output directory (output.directory)")
        p.add_argument("-j", "--jobs", type=int, help="worker processes (ensemble.jobs)")
        p.add_argument("--no-timestamp", action="store_true", help="omit the creation time from headers")
        p.add_argument("--full-state", action="store_true", help="also export real/imaginary parts of every element")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    overrides = list(args.set)
    if args.out is not None:
        overrides.append(f"output.directory={args.out}")
    if args.jobs is not None:
        overrides.append(f"ensemble.jobs={args.jobs}")
    if args.no_timestamp:
        overrides.append("output.timestamp=false")
    if args.full_state:
        overrides.append("output.full_state=true")
    try:
        cfg = load_config(args.config, overrides)
        out = Outputs(cfg.directory)
        message = COMMANDS[args.command](cfg, out)
        out.commit()
    except (ConfigError, SamplingBudgetExceeded) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, RealizationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QSWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(message)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
