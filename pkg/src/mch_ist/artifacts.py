"""Run configuration, analytic profiles and JSON-header CSV files."""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grids import GridConfig

COMMANDS = ("forward", "evolve", "inverse", "roundtrip", "soliton", "validate")


@dataclass
class RunConfig:
    command: str = "roundtrip"
    grid: GridConfig = field(default_factory=GridConfig)
    profile: list = field(default_factory=lambda: [{"kind": "gauss", "amplitude": 0.1}])
    profile_csv: str | None = None  # two columns x, m0; overrides `profile`
    scattering_csv: str | None = None  # input of `inverse`
    kappa: float = 1.0
    times: list = field(default_factory=lambda: [0.0])
    y_spacing: float = 0.05
    x_window: float = 10.0  # |x| range of resampled fields
    n_x_out: int = 401
    solitons: list = field(default_factory=list)  # [[Re z, Im z, Re c, Im c], ...]
    tolerances: dict = field(default_factory=lambda: {"roundtrip": 1e-4})
    method: str = "auto"
    time_sign: float = 1.0  # -1 injects the time-flow mutation
    seed: int = 0
    out: str = "out"

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
            raise ConfigError("times must be a nonnegative ascending list")
        if any(not (v > 0) for v in self.tolerances.values()):
            raise ConfigError("tolerances must be positive")
        if not self.kappa > 0:
            raise ConfigError("kappa must be positive")
        if self.method not in ("auto", "neumann", "dense"):
            raise ConfigError("method must be auto, neumann or dense")
        for s in self.solitons:
            if len(s) != 4:
                raise ConfigError("each soliton seed is [Re z, Im z, Re c, Im c]")
        for term in self.profile:
            if term.get("kind") not in ("gauss", "sech2"):
                raise ConfigError(f"profile terms are gauss or sech2, got {term.get('kind')!r}")
        return self

    def to_dict(self):
        return asdict(self)

    @property
    def hash(self) -> str:
        """Hash of everything that determines the numbers (the output directory excluded)."""
        d = self.to_dict()
        d.pop("out")
        return config_hash(d)


def config_hash(d: dict) -> str:
    text = json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def load_config(path=None, overrides=None) -> RunConfig:
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    grid = raw.pop("grid", {})
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = RunConfig(grid=GridConfig(**grid), **raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def profile_samples(terms, x):
    """Sum of A exp(-((x-c)/w)^2) and A sech^2((x-c)/w) terms."""
    x = np.asarray(x, dtype=float)
    m = np.zeros_like(x)
    for term in terms:
        A = float(term.get("amplitude", 0.1))
        w = float(term.get("width", 1.0))
        c = float(term.get("center", 0.0))
        s = (x - c) / w
        if term["kind"] == "gauss":
            m += A * np.exp(-s * s)
        else:
            m += A / np.cosh(s) ** 2
    return m


def load_profile(cfg: RunConfig):
    if cfg.profile_csv:
        _, cols = read_table(cfg.profile_csv)
        return cols["x"], cols["m0"]
    g = cfg.grid
    x = np.linspace(-g.x_half_width, g.x_half_width, g.n_x)
    return x, profile_samples(cfg.profile, x)


def _fmt(v):
    return format(float(v), ".17g")


def write_table(path, header: dict, columns: dict):
    """First line '# {json header}', then a CSV header row and rows at 17 significant digits.
    Complex columns are written as name_re, name_im."""
    flat = {}
    for name, col in columns.items():
        col = np.asarray(col)
        if np.iscomplexobj(col):
            flat[name + "_re"], flat[name + "_im"] = col.real, col.imag
        else:
            flat[name] = col
    n = {len(c) for c in flat.values()}
    if len(n) > 1:
        raise ValueError("columns must have equal length")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True, default=str) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(flat.keys())
        for row in zip(*flat.values()):
            w.writerow([_fmt(v) for v in row])
    return path


def read_table(path):
    with Path(path).open() as fh:
        first = fh.readline()
        header = json.loads(first[1:]) if first.startswith("#") else {}
        if not first.startswith("#"):
            fh.seek(0)
        rows = list(csv.reader(fh))
    names, data = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    cols = {}
    for i, name in enumerate(names):
        if name.endswith("_im") and name[:-3] + "_re" in cols:
            cols[name[:-3]] = cols.pop(name[:-3] + "_re") + 1j * data[:, i]
        else:
            cols[name] = data[:, i]
    return header, cols


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)
