"""
Command-line front end.

Subcommands
-----------
evolve        populations and target probability versus τ
eig           eigenvalues and eigenvectors of one J block
pulse         first target-probability peak above the threshold
scan          pulse search over a grid of |A| and W values
oracle-check  compare the configuration-space model with the collective one
figure        named presets for the Bell and GHZ probability curves

Parameters come from flags, then from a ``key = value`` file given with
``--config``, then from built-in defaults.  Output goes to ``--out`` (stdout
when omitted) as CSV or JSON and is written once, after the computation.

Exit codes: 0 success, 2 usage error, 3 accuracy failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .collective import ModelParams, build_h_prime, enumerate_j_blocks
from .dynamics import (
    DEFAULT_DTAU,
    basis_state,
    from_interaction_picture,
    generic_hermitian_eig,
    integrate_reduced,
    propagate_series,
    to_lab_frame,
)
from .errors import AccuracyError, DomainError
from .fock import (
    fock_rotating_hamiltonian,
    multiplets,
    oracle_evolve,
    paired_subspace_leakage,
    pairing_offset,
)
from .metrics import DEFAULT_THRESHOLD, search_pulse, target_probability, tau_to_seconds

EXIT_OK, EXIT_USAGE, EXIT_ACCURACY = 0, 2, 3
ORACLE_TOL = 1e-6

COMMANDS = ("evolve", "eig", "pulse", "scan", "oracle-check", "figure")

# name -> (n_dots, w, a_amp, tau_max, threshold)
FIGURE_PRESETS = {
    "fig1a": (2, 0.1, 1 / 25, 100.0, 0.99),
    "fig1b": (2, 0.1, 1 / 50, 300.0, 0.99),
    "fig1c": (2, 0.1, 1e-2, 1e3, 0.99),
    "fig1d": (2, 0.1, 1e-3, 1e5, 0.99),
    "fig2a": (2, 0.1, 1e-3, 1e5, 0.99),
    "fig2b": (2, 0.05, 1e-3, 5e4, 0.99),
    "fig2c": (2, 0.01, 1e-3, 1e4, 0.99),
    "fig3a": (3, 0.1, 1 / 25, 300.0, 0.98),
    "fig3b": (3, 0.1, 1 / 50, 1500.0, 0.98),
    "fig3c": (3, 0.1, 1e-2, 1e4, 0.98),
    "fig3d": (3, 0.1, 1e-3, 1e7, 0.98),
}

# key -> (parser, default); None defaults are filled per command
SETTINGS = {
    "n": (int, 2),
    "w": (float, 0.1),
    "a": (float, 0.04),
    "a_phase": (float, 0.0),
    "detuning": (float, 0.0),
    "phi": (float, 0.0),
    "tau_max": (float, None),
    "dtau": (float, DEFAULT_DTAU),
    "samples": (int, 1001),
    "threshold": (float, None),
    "frame": (str, None),
    "epsilon_ev": (float, 2.8),
    "method": (str, "eigen"),
    "j": (float, None),
    "a_list": (str, "0.04,0.02,0.01,0.001"),
    "w_list": (str, "0.1"),
    "workers": (int, 1),
    "format": (str, "csv"),
    "out": (str, None),
}

_CHOICES = {
    "frame": ("laboratory", "rotating", "both"),
    "format": ("csv", "json"),
    "method": ("eigen", "rk4"),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: ModelParams
    phi: float
    frame: str
    tau_max: float
    d_tau: float
    threshold: float
    samples: int
    method: str
    out: str | None
    fmt: str
    j: float | None = None
    a_list: list = field(default_factory=list)
    w_list: list = field(default_factory=list)
    workers: int = 1
    figure: str | None = None

    def __post_init__(self):
        if not self.d_tau > 0:
            raise DomainError("dtau must be > 0")
        if not self.tau_max > 0:
            raise DomainError("tau_max must be > 0")
        if not 0 < self.threshold < 1:
            raise DomainError("threshold must lie in (0, 1)")
        if self.samples < 2:
            raise DomainError("samples must be >= 2")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")

    def echo(self) -> dict:
        p = self.params
        out = {
            "command": self.command,
            "n": p.n_dots,
            "w": p.w,
            "a": p.a_amp,
            "a_phase": p.a_phase,
            "detuning": p.detuning,
            "epsilon_ev": p.epsilon_ev,
            "phi": self.phi,
            "frame": self.frame,
            "tau_max": self.tau_max,
            "dtau": self.d_tau,
            "threshold": self.threshold,
            "samples": self.samples,
            "method": self.method,
        }
        if self.command == "eig":
            out["j"] = self.j
        if self.command == "scan":
            out.update(a_list=self.a_list, w_list=self.w_list, workers=self.workers)
        if self.figure:
            out["figure"] = self.figure
        return out


# --- argument handling -------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and run settings")
    g.add_argument("--n", type=int, help="number of dots, 1..4 (default 2)")
    g.add_argument("--w", type=float, help="interdot coupling W / ε (default 0.1)")
    g.add_argument("--a", type=float, help="drive amplitude |A| / ε (default 0.04)")
    g.add_argument("--a-phase", type=float, help="drive phase arg A in radians (default 0)")
    g.add_argument("--detuning", type=float, help="(ε - ω) / ε (default 0)")
    g.add_argument("--phi", type=float, help="relative phase of the target state (default 0)")
    g.add_argument("--tau-max", type=float, help="end of the reduced-time range")
    g.add_argument("--dtau", type=float, help=f"RK4 step in reduced time (default {DEFAULT_DTAU})")
    g.add_argument("--samples", type=int, help="output points on [0, tau_max] (default 1001)")
    g.add_argument("--threshold", type=float, help="peak qualification level")
    g.add_argument("--frame", choices=_CHOICES["frame"], help="frame of the target probability")
    g.add_argument("--epsilon-ev", type=float, help="band gap ε in eV for the seconds axis (default 2.8)")
    g.add_argument("--method", choices=_CHOICES["method"], help="evolve: eigen-expansion or RK4")
    g.add_argument("--out", help="output file (default stdout)")
    g.add_argument("--format", choices=_CHOICES["format"], help="output format (default csv)")
    g.add_argument("--config", help="file of 'key = value' lines; flags take precedence")

    parser = argparse.ArgumentParser(prog="excitonqd", description="Driven coupled quantum-dot excitons.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="time series from the exciton vacuum")
    eig = sub.add_parser("eig", parents=[common], help="spectrum of one J block")
    eig.add_argument("--j", type=float, help="total J of the block (default N/2)")
    sub.add_parser("pulse", parents=[common], help="first peak of the target probability")
    scan = sub.add_parser("scan", parents=[common], help="pulse search over |A| and W grids")
    scan.add_argument("--a-list", help="comma-separated |A| values")
    scan.add_argument("--w-list", help="comma-separated W values")
    scan.add_argument("--workers", type=int, help="parallel worker processes (default 1)")
    sub.add_parser("oracle-check", parents=[common], help="configuration-space cross-check")
    fig = sub.add_parser("figure", parents=[common], help="named probability-curve presets")
    fig.add_argument("name", choices=sorted(FIGURE_PRESETS), help="preset name")
    return parser


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in SETTINGS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        conv = SETTINGS[key][0]
        try:
            values[key] = conv(value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
        if key in _CHOICES and values[key] not in _CHOICES[key]:
            raise UsageError(f"{path}:{lineno}: {key} must be one of {', '.join(_CHOICES[key])}")
    return values


def _float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"{name} must be comma-separated numbers") from exc
    if not values:
        raise UsageError(f"{name} is empty")
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge flags over the config file over presets over defaults."""
    merged = {k: default for k, (_, default) in SETTINGS.items()}
    figure = getattr(args, "name", None) if args.command == "figure" else None
    if figure:
        n, w, a, tau_max, threshold = FIGURE_PRESETS[figure]
        merged.update(n=n, w=w, a=a, tau_max=tau_max, threshold=threshold, samples=20001, frame="both")
    if args.config:
        merged.update(read_config_file(args.config))
    for key in SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    long_run = args.command in ("pulse", "scan")
    if merged["tau_max"] is None:
        merged["tau_max"] = 1e7 if long_run else 100.0
    if merged["threshold"] is None:
        merged["threshold"] = DEFAULT_THRESHOLD
    if merged["frame"] is None:
        merged["frame"] = "laboratory"

    params = ModelParams(
        n_dots=merged["n"],
        w=merged["w"],
        a_amp=merged["a"],
        a_phase=merged["a_phase"],
        detuning=merged["detuning"],
        epsilon_ev=merged["epsilon_ev"],
    )
    return RunConfig(
        command=args.command,
        params=params,
        phi=merged["phi"],
        frame=merged["frame"],
        tau_max=merged["tau_max"],
        d_tau=merged["dtau"],
        threshold=merged["threshold"],
        samples=merged["samples"],
        method=merged["method"],
        out=merged["out"],
        fmt=merged["format"],
        j=merged["j"],
        a_list=_float_list(merged["a_list"], "a_list") if args.command == "scan" else [],
        w_list=_float_list(merged["w_list"], "w_list") if args.command == "scan" else [],
        workers=merged["workers"],
        figure=figure,
    )


# --- output ------------------------------------------------------------------


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    metadata: dict = field(default_factory=dict)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.11e" % value


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(table.columns)]
        lines += [",".join(_cell(v) for v in row) for row in table.rows]
        return "\n".join(lines) + "\n"
    doc = {"metadata": _plain(table.metadata), "columns": table.columns, "rows": _plain(table.rows)}
    return json.dumps(doc, indent=1) + "\n"


# --- commands ----------------------------------------------------------------


def _frames(frame: str) -> tuple[str, ...]:
    return ("laboratory", "rotating") if frame == "both" else (frame,)


def _grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.tau_max, cfg.samples)


def _rotating_series(cfg: RunConfig, grid: np.ndarray):
    p = cfg.params
    j = p.n_dots / 2
    psi0 = basis_state(j)
    if cfg.method == "rk4":
        return from_interaction_picture(integrate_reduced(p, j, psi0, grid, cfg.d_tau), p)
    return propagate_series(build_h_prime(j, p), psi0, grid)


def _probability_table(cfg: RunConfig) -> Table:
    grid = _grid(cfg)
    rot = _rotating_series(cfg, grid)
    frames = _frames(cfg.frame)
    probs = {}
    for frame in frames:
        series = to_lab_frame(rot, cfg.params.omega) if frame == "laboratory" else rot
        probs[frame] = target_probability(series, cfg.phi)
    pops = rot.populations
    names = ["p_target"] if len(frames) == 1 else [f"p_target_{f}" for f in frames]
    columns = ["tau", "t_seconds", *names, *[f"p_m_{i}" for i in range(pops.shape[1])]]
    seconds = tau_to_seconds(grid, cfg.params.epsilon_ev)
    data = np.column_stack([grid, seconds, *[probs[f] for f in frames], pops])
    return Table(columns, data.tolist(), {"config": cfg.echo()})


def cmd_evolve(cfg: RunConfig) -> Table:
    return _probability_table(cfg)


def cmd_eig(cfg: RunConfig) -> Table:
    p = cfg.params
    j = p.n_dots / 2 if cfg.j is None else cfg.j
    eig = generic_hermitian_eig(build_h_prime(j, p))
    dim = eig.energies.size
    columns = ["k", "energy"] + [f"{part}_v_{i}" for i in range(dim) for part in ("re", "im")]
    rows = []
    for k, (e, v) in enumerate(zip(eig.energies, eig.vectors)):
        rows.append([k, float(e)] + [x for c in v for x in (c.real, c.imag)])
    return Table(columns, rows, {"config": cfg.echo(), "j": j})


_PULSE_COLUMNS = ["n", "w", "a", "frame", "tau_star", "t_seconds", "peak_prob", "threshold", "found"]


def _pulse_rows(cfg: RunConfig, p: ModelParams) -> list[list]:
    rows = []
    for frame in _frames(cfg.frame):
        r = search_pulse(p, cfg.phi, cfg.threshold, frame, cfg.tau_max)
        rows.append([p.n_dots, p.w, p.a_amp, frame, r.tau_star, r.t_seconds, r.peak_prob, r.threshold, r.found])
    return rows


def cmd_pulse(cfg: RunConfig) -> Table:
    return Table(_PULSE_COLUMNS, _pulse_rows(cfg, cfg.params), {"config": cfg.echo()})


def _scan_point(args) -> list[list]:
    cfg, p = args
    return _pulse_rows(cfg, p)


def cmd_scan(cfg: RunConfig) -> Table:
    points = [(cfg, cfg.params.with_(a_amp=a, w=w)) for a, w in product(cfg.a_list, cfg.w_list)]
    if cfg.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_scan_point, points))
    else:
        chunks = [_scan_point(pt) for pt in points]
    return Table(_PULSE_COLUMNS, [row for chunk in chunks for row in chunk], {"config": cfg.echo()})


def oracle_report(cfg: RunConfig) -> dict:
    """Block and dynamics deviations between the two model descriptions."""
    p = cfg.params
    n = p.n_dots
    offset = pairing_offset(p)
    h_rot = fock_rotating_hamiltonian(p, 0.0)
    block_dev = 0.0
    for j, _, basis in multiplets(n):
        block = basis.conj().T @ h_rot @ basis - offset * np.eye(basis.shape[1])
        block_dev = max(block_dev, float(np.abs(block - np.asarray(build_h_prime(j, p))).max()))

    j_top, _, top = multiplets(n)[0]
    grid = _grid(cfg)
    psi0 = top[:, 0].astype(complex)
    fock_series = oracle_evolve(p, psi0, grid, cfg.d_tau)
    collective = to_lab_frame(propagate_series(build_h_prime(j_top, p), basis_state(j_top), grid), p.omega)
    projected = fock_series.amplitudes @ top.conj() * np.exp(1j * offset * grid)[:, None]
    dyn_dev = float(np.abs(projected - collective.amplitudes).max())
    outside = fock_series.populations.sum(axis=1) - np.abs(projected) ** 2 @ np.ones(top.shape[1])
    return {
        "leakage": paired_subspace_leakage(n),
        "block_deviation": block_dev,
        "dynamics_deviation": dyn_dev,
        "weight_outside_block": float(np.abs(outside).max()),
        "j_blocks": [[float(j), d] for j, d in enumerate_j_blocks(n)],
        "tolerance": ORACLE_TOL,
    }


def cmd_oracle_check(cfg: RunConfig) -> Table:
    report = oracle_report(cfg)
    keys = ["leakage", "block_deviation", "dynamics_deviation", "weight_outside_block", "tolerance"]
    table = Table(["quantity", "value"], [[k, report[k]] for k in keys], {"config": cfg.echo(), **report})
    worst = max(report["block_deviation"], report["dynamics_deviation"], report["weight_outside_block"])
    table.metadata["passed"] = worst < ORACLE_TOL
    return table


def cmd_figure(cfg: RunConfig) -> Table:
    table = _probability_table(cfg)
    pulses = {}
    for frame in _frames(cfg.frame):
        r = search_pulse(cfg.params, cfg.phi, cfg.threshold, frame, cfg.tau_max)
        pulses[frame] = r.as_dict()
    table.metadata["pulse"] = pulses
    return table


HANDLERS = {
    "evolve": cmd_evolve,
    "eig": cmd_eig,
    "pulse": cmd_pulse,
    "scan": cmd_scan,
    "oracle-check": cmd_oracle_check,
    "figure": cmd_figure,
}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        table = HANDLERS[cfg.command](cfg)
    except (UsageError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"excitonqd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(f"excitonqd: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    _emit(render(table, cfg.fmt), cfg.out)
    if cfg.command == "figure":
        for frame, r in table.metadata["pulse"].items():
            print(f"{cfg.figure} {frame}: tau*={r['tau_star']:.6g} peak={r['peak_prob']:.6f} found={r['found']}", file=sys.stderr)
    if cfg.command == "oracle-check" and not table.metadata["passed"]:
        print("excitonqd: oracle deviation exceeds tolerance", file=sys.stderr)
        return EXIT_ACCURACY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
