"""Scenario runner: ``se3beam run <config>`` and ``se3beam report <dir>``.

A scenario is an INI file with a ``[scenario]`` section and either a
``[rigid]`` or a ``[beam]`` section (see ``demos/*.ini`` for annotated
examples). ``run`` writes ``trajectory.csv`` (and ``fields.csv`` for beams)
plus ``metadata.json`` into the output directory; ``report`` reads them
back and writes ``diagnostics.json``.

Exit codes: 0 success, 1 simulation error, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import beam as bm
from . import covariant as cv
from . import liegroup as lg
from . import rigidbody as rb
from .connection import Metric6
from .errors import ConfigError, FormatError, Se3BeamError

log = logging.getLogger("se3beam")

FLOAT_FMT = "%.17g"
TRAJECTORY = "trajectory.csv"
FIELDS = "fields.csv"
METADATA = "metadata.json"
DIAGNOSTICS = "diagnostics.json"

TWIST_NAMES = ("wx", "wy", "wz", "vx", "vy", "vz")
COTWIST_NAMES = ("mx", "my", "mz", "nx", "ny", "nz")
RIGID_COLUMNS = (
    ("t",)
    + TWIST_NAMES
    + tuple(f"R{i}{j}" for i in range(3) for j in range(3))
    + ("rx", "ry", "rz", "energy", "energy_drift", "casimir_nn", "casimir_mn")
    + tuple(f"pi_s_{c}" for c in COTWIST_NAMES)
)
BEAM_COLUMNS = (
    ("t", "tip_x", "tip_y", "tip_z", "kinetic", "potential", "energy", "energy_drift")
    + tuple(f"P_{c}" for c in COTWIST_NAMES)
)
FIELD_COLUMNS = (
    ("t", "i", "s")
    + tuple(f"eps_{c}" for c in TWIST_NAMES)
    + tuple(f"chi_{c}" for c in TWIST_NAMES)
    + tuple(f"R{i}{j}" for i in range(3) for j in range(3))
    + ("rx", "ry", "rz")
)

# diagnostics thresholds used for PASS/FAIL flags
THRESHOLDS = {
    "rigid": {"energy_drift": 1e-8, "casimir_drift": 1e-9, "momentum_defect": 1e-8},
    "beam": {"energy_drift": 1e-6, "momentum_defect": 1e-8},
}


@dataclass
class Scenario:
    kind: str
    duration: float
    dt: float | None
    cfl: float
    stride: int
    seed: int
    output_dir: Path
    params: dict = field(default_factory=dict)
    echo: dict = field(default_factory=dict)


# ---------------------------------------------------------------- config


class _Section:
    """Typed accessors on one config section that name the offending field."""

    def __init__(self, cp: configparser.ConfigParser, name: str, path):
        if not cp.has_section(name):
            raise ConfigError(f"{path}: missing section [{name}]")
        self.s = cp[name]
        self.name = name
        self.path = path

    def _where(self, key):
        return f"{self.path}: [{self.name}] {key}"

    def raw(self, key, default=None):
        if key not in self.s:
            if default is None:
                raise ConfigError(f"{self._where(key)}: missing required field '{key}'")
            return default
        return self.s[key].strip()

    def float(self, key, default=None, positive=False):
        text = self.raw(key, None if default is None else str(default))
        try:
            val = float(text)
        except ValueError:
            raise ConfigError(f"{self._where(key)}: expected a number, got {text!r}") from None
        if not np.isfinite(val) or (positive and val <= 0):
            raise ConfigError(f"{self._where(key)}: must be a {'positive ' if positive else ''}finite number")
        return val

    def int(self, key, default=None, minimum=None):
        text = self.raw(key, None if default is None else str(default))
        try:
            val = int(text)
        except ValueError:
            raise ConfigError(f"{self._where(key)}: expected an integer, got {text!r}") from None
        if minimum is not None and val < minimum:
            raise ConfigError(f"{self._where(key)}: must be at least {minimum}")
        return val

    def vector(self, key, sizes, default=None):
        text = self.raw(key, default)
        try:
            vals = np.array([float(x) for x in text.replace(",", " ").split()])
        except ValueError:
            raise ConfigError(f"{self._where(key)}: expected numbers, got {text!r}") from None
        if vals.size not in sizes:
            raise ConfigError(f"{self._where(key)}: expected {' or '.join(map(str, sizes))} values, got {vals.size}")
        return vals


def load_scenario(path, output_dir=None) -> Scenario:
    """Parse and validate a scenario file.

    Raises
    ------
    ConfigError
        With the file, section and field (or line) at fault.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: config file not found")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    sc = _Section(cp, "scenario", path)
    kind = sc.raw("kind").lower()
    if kind not in ("rigid", "beam"):
        raise ConfigError(f"{path}: [scenario] kind: must be 'rigid' or 'beam', got {kind!r}")
    dt_text = sc.raw("dt", "auto")
    out = Path(output_dir) if output_dir is not None else Path(sc.raw("output_dir", "output"))
    if output_dir is None and not out.is_absolute():
        out = path.parent / out
    scen = Scenario(
        kind=kind,
        duration=sc.float("duration", positive=True),
        dt=None if dt_text.lower() == "auto" else sc.float("dt", positive=True),
        cfl=sc.float("cfl", 0.5, positive=True),
        stride=sc.int("sample_stride", 1, minimum=1),
        seed=sc.int("seed", 0),
        output_dir=out,
        echo={sec: dict(cp[sec]) for sec in cp.sections()},
    )
    if scen.cfl > bm.CFL_LIMIT:
        raise ConfigError(f"{path}: [scenario] cfl: must not exceed {bm.CFL_LIMIT}")
    sec = _Section(cp, kind, path)
    scen.params = _rigid_params(sec, scen) if kind == "rigid" else _beam_params(sec, scen)
    return scen


def _rigid_params(sec: _Section, scen: Scenario) -> dict:
    if scen.dt is None:
        raise ConfigError(f"{sec.path}: [scenario] dt: rigid scenarios need an explicit time step")
    inertia = sec.vector("inertia", (6, 36))
    try:
        J = Metric6(inertia if inertia.size == 6 else inertia.reshape(6, 6))
    except Se3BeamError as exc:
        raise ConfigError(f"{sec.path}: [rigid] inertia: {exc}") from None
    return {
        "J": J,
        "chi0": sec.vector("chi0", (6,)),
        "rotation0": sec.vector("rotation0", (3,), "0 0 0"),
        "position0": sec.vector("position0", (3,), "0 0 0"),
        "perturbation": sec.float("perturbation", 0.0),
    }


def _beam_params(sec: _Section, scen: Scenario) -> dict:
    n_s = sec.int("n_s", minimum=3)
    L = sec.float("length", positive=True)
    bc = sec.raw("bc", "clamped-free")
    try:
        bm.parse_bc(bc)
    except ValueError as exc:
        raise ConfigError(f"{sec.path}: [beam] bc: {exc}") from None
    try:
        if "inertia" in sec.s or "stiffness" in sec.s:
            J = Metric6(sec.vector("inertia", (6,)))
            C = Metric6(sec.vector("stiffness", (6,)))
        else:
            shear = sec.raw("shear_coefficient", "auto")
            J, C = bm.circular_section(
                sec.float("radius", positive=True),
                sec.float("E", positive=True),
                sec.float("rho", positive=True),
                sec.float("nu", 0.3),
                None if shear == "auto" else sec.float("shear_coefficient", positive=True),
            )
    except Se3BeamError as exc:
        raise ConfigError(f"{sec.path}: [beam]: {exc}") from None
    initial = sec.raw("initial", "rest").lower()
    if initial not in ("rest", "pluck", "bump", "strike"):
        raise ConfigError(f"{sec.path}: [beam] initial: must be rest, pluck, bump or strike, got {initial!r}")
    axis = sec.int("axis", 1)
    if axis not in (1, 2):
        raise ConfigError(f"{sec.path}: [beam] axis: must be 1 or 2")
    return {
        "p": bm.BeamParams(L, n_s, J, C, bc=bc),
        "initial": initial,
        "amplitude": sec.float("amplitude", 0.0),
        "axis": axis,
        "perturbation": sec.float("perturbation", 0.0),
    }


# ---------------------------------------------------------------- writing


def _fmt(row) -> str:
    return ",".join(FLOAT_FMT % x for x in row)


def _write_csv(path: Path, columns, rows, header_lines):
    with open(path, "w", newline="\n") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(_fmt(row) + "\n")


def _provenance(scen: Scenario, extra: dict) -> list[str]:
    lines = [f"se3beam {__version__}", f"kind = {scen.kind}"]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    for sec, items in scen.echo.items():
        lines += [f"[{sec}] {k} = {v}" for k, v in items.items()]
    return lines


def _step_count(duration: float, dt: float, stride: int) -> int:
    # a whole number of sampling strides keeps the stored slices equally spaced
    n = max(1, int(np.ceil(duration / dt / stride - 1e-9)))
    return n * stride


def _run_rigid(scen: Scenario):
    prm = scen.params
    J = prm["J"]
    rng = np.random.default_rng(scen.seed)
    chi0 = prm["chi0"] + prm["perturbation"] * rng.standard_normal(6)
    H0 = lg.compose(lg.Pose(np.eye(3), prm["position0"]), lg.exp(lg.twist(prm["rotation0"], np.zeros(3))))
    n_steps = _step_count(scen.duration, scen.dt, scen.stride)
    traj = rb.simulate(rb.RigidState(H0, chi0), J, scen.dt, n_steps, scen.stride)
    E0 = float(rb.energy(chi0, J))
    rows = []
    for st in traj:
        E = float(rb.energy(st.chi, J))
        drift = (E - E0) / E0 if E0 > 0 else E - E0
        nn, mn = rb.casimirs(J(st.chi))
        rows.append(
            [st.t, *st.chi, *st.H.R.ravel(), *st.H.r, E, drift, nn, mn, *rb.spatial_momentum(st, J)]
        )
    grid = {"dt": scen.dt, "n_steps": n_steps, "sample_stride": scen.stride}
    meta = {"J": J.matrix.tolist()}
    return {TRAJECTORY: (RIGID_COLUMNS, rows)}, grid, meta


def _initial_beam(scen: Scenario) -> bm.BeamState:
    prm = scen.params
    p = prm["p"]
    amp = prm["amplitude"]
    if prm["initial"] == "pluck":
        st = bm.tip_load_pluck(p, amp, prm["axis"])
    elif prm["initial"] == "bump":
        st = bm.bump_pluck(p, amp, prm["axis"])
    elif prm["initial"] == "strike":
        st = bm.strike_state(p, amp, prm["axis"])
    else:
        st = bm.rest_state(p)
    if prm["perturbation"] > 0:
        rng = np.random.default_rng(scen.seed)
        chi = st.chi + prm["perturbation"] * rng.standard_normal(st.chi.shape)
        st = bm.state_from_fields(p, st.eps, chi)
    return st


def _run_beam(scen: Scenario):
    p = scen.params["p"]
    dt_max = p.max_dt(scen.cfl)
    if scen.dt is None:
        n_steps = _step_count(scen.duration, dt_max, scen.stride)
        dt = scen.duration / n_steps
    else:
        dt = scen.dt
        n_steps = _step_count(scen.duration, dt, scen.stride)
    st0 = _initial_beam(scen)
    traj = bm.simulate(st0, p, dt, n_steps, scen.stride)
    E0 = sum(bm.energies(st0, p))
    total, _ = cv.momentum_flux(traj, p)
    rows = []
    field_rows = []
    s = p.s
    for st, P in zip(traj, total):
        Ec, Ep = bm.energies(st, p)
        drift = (Ec + Ep - E0) / E0 if E0 > 0 else Ec + Ep - E0
        rows.append([st.t, *st.H.r[-1], Ec, Ep, Ec + Ep, drift, *P])
        for i in range(p.n_s):
            field_rows.append([st.t, i, s[i], *st.eps[i], *st.chi[i], *st.H.R[i].ravel(), *st.H.r[i]])
    grid = {"dt": dt, "n_steps": n_steps, "sample_stride": scen.stride, "n_s": p.n_s, "ds": p.ds,
            "c_max": p.c_max}
    meta = {"L": p.L, "bc": p.bc, "J": p.J.matrix.tolist(), "C": p.C.matrix.tolist(),
            "eps0": p.eps0[0].tolist()}
    return {TRAJECTORY: (BEAM_COLUMNS, rows), FIELDS: (FIELD_COLUMNS, field_rows)}, grid, meta


def run(config_path, output_dir=None) -> Path:
    """Run one scenario and write its outputs; returns the output directory."""
    scen = load_scenario(config_path, output_dir)
    log.info("running %s scenario from %s", scen.kind, config_path)
    files, grid, model = (_run_rigid if scen.kind == "rigid" else _run_beam)(scen)
    out = scen.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from None
    header = _provenance(scen, grid)
    for name, (cols, rows) in files.items():
        _write_csv(out / name, cols, rows, header)
    meta = {
        "version": __version__,
        "kind": scen.kind,
        "grid": grid,
        "model": model,
        "seed": scen.seed,
        "config": scen.echo,
        "files": {name: list(cols) for name, (cols, _) in files.items()},
    }
    (out / METADATA).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", ", ".join(sorted(files)))
    return out


# ---------------------------------------------------------------- report


def _read_csv(path: Path, columns) -> np.ndarray:
    if not path.is_file():
        raise FormatError(f"{path}: file not found")
    rows = []
    header_seen = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if tuple(line.split(",")) != tuple(columns):
                    raise FormatError(f"{path}:{lineno}: unexpected column header")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise FormatError(
                    f"{path}:{lineno}: record has {len(parts)} fields, expected {len(columns)}"
                )
            try:
                rows.append([float(x) for x in parts])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric value in record") from None
    if not header_seen:
        raise FormatError(f"{path}: missing column header")
    return np.array(rows).reshape(-1, len(columns))


def _max_rel(series, ref) -> float:
    scale = np.abs(ref).max()
    dev = np.abs(series - ref).max()
    return float(dev / scale) if scale > 0 else float(dev)


def _rigid_diagnostics(data: np.ndarray, meta: dict) -> dict:
    col = {c: i for i, c in enumerate(RIGID_COLUMNS)}
    P = data[:, [col[f"pi_s_{c}"] for c in COTWIST_NAMES]]
    return {
        "energy_drift": _max_rel(data[:, col["energy"]], data[0, col["energy"]]),
        "casimir_drift": max(
            _max_rel(data[:, col["casimir_nn"]], data[0, col["casimir_nn"]]),
            _max_rel(data[:, col["casimir_mn"]], data[0, col["casimir_mn"]]),
        ),
        "momentum_defect": _max_rel(P, P[0]),
    }


def _beam_trajectory(fields: np.ndarray, n_s: int):
    if fields.shape[0] % n_s:
        raise FormatError(f"{FIELDS}: {fields.shape[0]} records is not a multiple of n_s={n_s} (truncated file?)")
    out = []
    for k in range(fields.shape[0] // n_s):
        blk = fields[k * n_s:(k + 1) * n_s]
        if not np.array_equal(blk[:, 1], np.arange(n_s)) or np.ptp(blk[:, 0]) != 0:
            raise FormatError(f"{FIELDS}: record {k * n_s + 1} starts a malformed time slice")
        out.append(bm.BeamState(blk[:, 3:9], blk[:, 9:15], lg.Pose(blk[:, 15:24].reshape(-1, 3, 3), blk[:, 24:27]),
                                float(blk[0, 0])))
    return out


def _beam_diagnostics(data: np.ndarray, fields: np.ndarray, meta: dict) -> dict:
    grid, model = meta["grid"], meta["model"]
    p = bm.BeamParams(model["L"], grid["n_s"], model["J"], model["C"], np.array(model["eps0"]), model["bc"])
    traj = _beam_trajectory(fields, p.n_s)
    E = data[:, BEAM_COLUMNS.index("energy")]
    diag = {"energy_drift": _max_rel(E, E[0])}
    if len(traj) >= 3:
        t = np.array([st.t for st in traj])
        if not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9, atol=0):
            raise FormatError(f"{FIELDS}: time slices are not equally spaced")
        defect = cv.noether_flux_balance(traj, p, relative=E[0] > 0)
        # a clamped end feeds momentum through its reaction force; the balance
        # is then only as good as the time sampling, so it is reported unchecked
        diag["momentum_defect" if p.ends == ("free", "free") else "momentum_flux_defect"] = defect
        diag["conservation_residual"] = bm.conservation_residual(traj, p)
        sec = cv.ReducedSection.from_trajectory(traj, p.ds)
        diag["curvature_residual"] = float(np.abs(cv.curvature(sec)).max())
    return diag


def report(directory) -> Path:
    """Compute conservation diagnostics for a finished run; returns the diagnostics path."""
    d = Path(directory)
    try:
        meta = json.loads((d / METADATA).read_text())
        kind = meta["kind"]
    except FileNotFoundError:
        raise FormatError(f"{d / METADATA}: file not found") from None
    except (json.JSONDecodeError, KeyError) as exc:
        raise FormatError(f"{d / METADATA}: unreadable metadata ({exc})") from None
    if kind == "rigid":
        diag = _rigid_diagnostics(_read_csv(d / TRAJECTORY, RIGID_COLUMNS), meta)
    elif kind == "beam":
        diag = _beam_diagnostics(_read_csv(d / TRAJECTORY, BEAM_COLUMNS), _read_csv(d / FIELDS, FIELD_COLUMNS), meta)
    else:
        raise FormatError(f"{d / METADATA}: unknown kind {kind!r}")
    checks = {}
    for name, limit in THRESHOLDS[kind].items():
        if name in diag:
            checks[name] = {"value": diag[name], "threshold": limit, "status": "PASS" if diag[name] < limit else "FAIL"}
    result = {"version": __version__, "kind": kind, "grid": meta["grid"], "diagnostics": diag, "checks": checks}
    path = d / DIAGNOSTICS
    path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------- entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="se3beam", description=__doc__.split("\n")[0])
    parser.add_argument("--quiet", action="store_true", help="only print errors")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None, help="override [scenario] output_dir")
    p_run.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p_rep = sub.add_parser("report", help="write diagnostics.json for a finished run")
    p_rep.add_argument("directory")
    p_rep.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(message)s")
    try:
        if args.command == "run":
            out = run(args.config, args.output_dir)
            log.info("outputs in %s", out)
        else:
            path = report(args.directory)
            res = json.loads(path.read_text())
            for name, chk in res["checks"].items():
                log.info("%-16s %.3e  %s", name, chk["value"], chk["status"])
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Se3BeamError as exc:
        print(f"simulation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
