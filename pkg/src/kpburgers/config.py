"""INI experiment configuration.

Example::

    [model]
    p = 2
    eps = 1
    nu = 1.0

    [grid]
    nx = 256
    ny = 384
    Lx = 80
    Ly = 120

    [solve]
    dt = 0.1
    T = 64
    stride = 4
    scheme = ETDRK2
    background = free
    boundary_tol = none

    [data]
    name = gaussian_dx
    amplitude = 0.05

Missing keys take the defaults below.  The output directory is resolved under
``$KPB_OUTPUT_ROOT`` (default ``./kpb_output``).
"""

from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError, GridError
from .evolution import SolveConfig
from .fieldio import read_field
from .initial_data import GaussianBump
from .kernels import ModelParams
from .spectral import Grid2D, PhysicalField

OUTPUT_ROOT_ENV = "KPB_OUTPUT_ROOT"
DATA_KINDS = ("gaussian_dx", "gaussian_dxdy", "custom_file")

DEFAULTS = {
    "model": {"p": "2", "eps": "1", "nu": "1.0"},
    "grid": {"nx": "256", "ny": "384", "Lx": "80", "Ly": "120"},
    "solve": {
        "dt": "0.1", "T": "64", "stride": "1", "scheme": "ETDRK2", "record_flux": "true",
        "background": "periodic", "boundary_tol": "1e-8", "blowup_factor": "10",
    },
    "data": {"name": "gaussian_dx", "amplitude": "0.05", "sx": "1.0", "sy": "1.0", "path": ""},
    "output": {"dir": "run"},
    "experiment": {"name": "custom", "criteria": ""},
}


@dataclass(frozen=True)
class DataSpec:
    name: str = "gaussian_dx"
    amplitude: float = 0.05
    sx: float = 1.0
    sy: float = 1.0
    path: str = ""

    def bump(self) -> Optional[GaussianBump]:
        if self.name == "gaussian_dx":
            return GaussianBump(self.amplitude, self.sx, self.sy, 0)
        if self.name == "gaussian_dxdy":
            return GaussianBump(self.amplitude, self.sx, self.sy, 1)
        return None

    def sample(self, grid: Grid2D) -> PhysicalField:
        b = self.bump()
        if b is not None:
            return b.sample(grid)
        f, _ = read_field(self.path)
        if f.grid != grid:
            raise ConfigError(f"[data] path: field grid {f.grid} differs from [grid] {grid}")
        return f


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    model: ModelParams
    grid: Grid2D
    solve: SolveConfig
    data: DataSpec
    output_dir: Path
    criteria: tuple = field(default_factory=tuple)


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "kpb_output"))


def _get(cp, section, key, conv, what):
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected {what}") from None


def _bool(raw):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _opt_float(raw):
    return None if raw.strip().lower() in ("none", "off", "") else float(raw)


def _int(raw):
    val = float(raw)
    if val != int(val):
        raise ValueError(raw)
    return int(val)


def parse_config(text: str, source="<string>") -> ExperimentConfig:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp.read_dict(DEFAULTS)
    try:
        cp.read_string(text, source=str(source))
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    known = set(DEFAULTS)
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"{source}: unknown section [{sec}]")
        extra = set(cp[sec]) - set(DEFAULTS[sec])
        if extra:
            raise ConfigError(f"{source}: unknown key(s) {sorted(extra)} in [{sec}]")

    try:
        model = ModelParams(_get(cp, "model", "p", _int, "an integer"),
                            _get(cp, "model", "eps", _int, "-1 or 1"),
                            _get(cp, "model", "nu", float, "a positive number"))
    except ConfigError as exc:
        raise ConfigError(f"[model] {exc}") from None
    try:
        grid = Grid2D(_get(cp, "grid", "nx", _int, "an even integer"),
                      _get(cp, "grid", "ny", _int, "an even integer"),
                      _get(cp, "grid", "Lx", float, "a positive number"),
                      _get(cp, "grid", "Ly", float, "a positive number"))
    except GridError as exc:
        raise ConfigError(f"[grid] {exc}") from None
    try:
        solve = SolveConfig(
            dt=_get(cp, "solve", "dt", float, "a number"),
            T=_get(cp, "solve", "T", float, "a number"),
            snapshot_stride=_get(cp, "solve", "stride", _int, "an integer"),
            scheme=cp.get("solve", "scheme").strip().upper(),
            record_flux=_get(cp, "solve", "record_flux", _bool, "a boolean"),
            background=cp.get("solve", "background").strip().lower(),
            boundary_tol=_get(cp, "solve", "boundary_tol", _opt_float, "a number or none"),
            blowup_factor=_get(cp, "solve", "blowup_factor", float, "a number"),
        )
    except ConfigError as exc:
        raise ConfigError(f"[solve] {exc}") from None
    name = cp.get("data", "name").strip().lower()
    if name not in DATA_KINDS:
        raise ConfigError(f"[data] name = {name!r}: expected one of {DATA_KINDS}")
    data = DataSpec(name, _get(cp, "data", "amplitude", float, "a number"),
                    _get(cp, "data", "sx", float, "a positive number"),
                    _get(cp, "data", "sy", float, "a positive number"),
                    cp.get("data", "path").strip())
    if name == "custom_file" and not data.path:
        raise ConfigError("[data] path is required for custom_file")
    if name != "custom_file" and (data.sx <= 0 or data.sy <= 0):
        raise ConfigError("[data] sx and sy must be positive")
    if solve.background == "free" and data.bump() is None:
        raise ConfigError("[solve] background = free needs built-in Gaussian data")
    out = output_root() / cp.get("output", "dir").strip()
    crit = tuple(c.strip() for c in cp.get("experiment", "criteria").split(",") if c.strip())
    return ExperimentConfig(cp.get("experiment", "name").strip(), model, grid, solve, data, out, crit)


def load_config(path, echo=True) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    cfg = parse_config(path.read_text(), source=path)
    if echo:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        (cfg.output_dir / "resolved_config.ini").write_text(render_config(cfg))
    return cfg


def render_config(cfg: ExperimentConfig) -> str:
    """INI text with every resolved value; parses back to an equal config."""
    s = cfg.solve
    d = cfg.data
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp["model"] = {"p": str(cfg.model.p), "eps": str(cfg.model.eps), "nu": repr(cfg.model.nu)}
    cp["grid"] = {"nx": str(cfg.grid.nx), "ny": str(cfg.grid.ny),
                  "Lx": repr(cfg.grid.Lx), "Ly": repr(cfg.grid.Ly)}
    cp["solve"] = {"dt": repr(s.dt), "T": repr(s.T), "stride": str(s.snapshot_stride),
                   "scheme": s.scheme, "record_flux": str(s.record_flux).lower(),
                   "background": s.background,
                   "boundary_tol": "none" if s.boundary_tol is None else repr(s.boundary_tol),
                   "blowup_factor": repr(s.blowup_factor)}
    cp["data"] = {"name": d.name, "amplitude": repr(d.amplitude), "sx": repr(d.sx),
                  "sy": repr(d.sy), "path": d.path}
    try:
        rel = cfg.output_dir.relative_to(output_root())
    except ValueError:
        rel = cfg.output_dir
    cp["output"] = {"dir": str(rel)}
    cp["experiment"] = {"name": cfg.name, "criteria": ",".join(cfg.criteria)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
