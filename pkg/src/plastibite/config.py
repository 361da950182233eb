"""INI run configuration.

Grammar (all sections optional except ``[params]``)::

    [params]        delta, eta, a_dagger, t_end, periodic_kernel
    [grid]          n_x, n_a, age_order
    [mortality]     family = constant | blowup | table
                    mu0, kappa (closed forms); table = CSV of age,rate
    [fertility]     family = constant | table; beta0; table = CSV of age,rate
                    scale (multiplies beta, default 1)
    [initial]       kind = zero | constant | cosine | table
                    value; amplitude, mode (cosine in x); table = snapshot CSV
    [simulation]    record_every
    [tolerances]    zero_tol, residual, drift
    [sweep]         axis1, axis2 = name start stop num; task = lambda0 | regime
                    axis names: eta, delta, beta_scale, mu_shift

Relative table paths resolve against the config file's directory. Unknown
sections or keys are errors that carry the line number.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, ValidationError
from .heatgrid import Grid
from .model import (
    BlowupMortality, ConstantFertility, ConstantMortality, ModelParams,
    TabulatedFertility, TabulatedMortality, VitalRates, validate,
)
from .simulate import SimConfig

SCHEMA = {
    "params": {"delta", "eta", "a_dagger", "t_end", "periodic_kernel"},
    "grid": {"n_x", "n_a", "age_order"},
    "mortality": {"family", "mu0", "kappa", "table"},
    "fertility": {"family", "beta0", "table", "scale"},
    "initial": {"kind", "value", "amplitude", "mode", "table"},
    "simulation": {"record_every"},
    "tolerances": {"zero_tol", "residual", "drift"},
    "sweep": {"axis1", "axis2", "task"},
}
SWEEP_AXES = ("eta", "delta", "beta_scale", "mu_shift")
MAX_SWEEP_POINTS = 10_000


class ConfigError(ValueError):
    """Malformed configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class Tolerances:
    zero_tol: float = 1e-6
    residual: float = 1e-3
    drift: float = 1e-2


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    task: str = "lambda0"

    @property
    def n_points(self):
        return int(np.prod([len(a.values) for a in self.axes]))


@dataclass(frozen=True, eq=False)
class RunConfig:
    params: ModelParams
    rates: VitalRates
    sim: SimConfig
    tolerances: Tolerances
    initial: dict = field(default_factory=lambda: {"kind": "constant", "value": 1.0})
    sweep: SweepSpec | None = None
    source: Path | None = None

    @property
    def grid(self):
        return self.sim.grid(self.params)

    def with_grid(self, n_x, n_a):
        return replace(self, sim=replace(self.sim, n_x=int(n_x), n_a=int(n_a)))

    def initial_field(self):
        return initial_field(self.initial, self.grid)


def _line_numbers(text):
    """Map (section, key) and (section, None) to 1-based line numbers."""
    out = {}
    section = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            out.setdefault((section, None), i)
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip().lower()), i)
    return out


class _Reader:
    def __init__(self, cp, lines):
        self.cp, self.lines = cp, lines

    def line(self, section, key=None):
        return self.lines.get((section, key))

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def get(self, section, key, default=None):
        if not self.cp.has_option(section, key):
            if default is None:
                raise ConfigError(f"[{section}] missing required key '{key}'",
                                  self.line(section))
            return default
        return self.cp.get(section, key).strip()

    def number(self, section, key, default=None, kind=float):
        raw = self.get(section, key, None if default is None else str(default))
        try:
            v = kind(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {kind.__name__}",
                              self.line(section, key)) from None
        if kind is float and not math.isfinite(v):
            raise ConfigError(f"[{section}] {key} must be finite", self.line(section, key))
        return v

    def boolean(self, section, key, default=False):
        if not self.cp.has_option(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be a boolean",
                              self.line(section, key)) from None


def _load_table(path, base, kind):
    p = Path(path)
    if not p.is_absolute() and base is not None:
        p = base / p
    if not p.exists():
        raise ConfigError(f"{kind} table {str(p)!r} does not exist")
    data = np.loadtxt(p, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ConfigError(f"{kind} table {str(p)!r} must have two columns age,rate")
    return data[:, 0], data[:, 1]


def _mortality(r, a_dagger, base):
    sec = "mortality"
    family = r.get(sec, "family", "blowup") if r.cp.has_section(sec) else "blowup"
    if family == "constant":
        return ConstantMortality(r.number(sec, "mu0"))
    if family == "blowup":
        if not r.cp.has_section(sec):
            return BlowupMortality(0.1, 1.0, a_dagger)
        return BlowupMortality(r.number(sec, "mu0", 0.1), r.number(sec, "kappa", 1.0), a_dagger)
    if family == "table":
        return TabulatedMortality(*_load_table(r.get(sec, "table"), base, "mortality"))
    raise ConfigError(f"[mortality] unknown family {family!r}", r.line(sec, "family"))


def _fertility(r, base):
    sec = "fertility"
    if not r.cp.has_section(sec):
        raise ConfigError("missing [fertility] section")
    family = r.get(sec, "family", "constant")
    if family == "constant":
        fert = ConstantFertility(r.number(sec, "beta0"))
    elif family == "table":
        fert = TabulatedFertility(*_load_table(r.get(sec, "table"), base, "fertility"))
    else:
        raise ConfigError(f"[fertility] unknown family {family!r}", r.line(sec, "family"))
    scale = r.number(sec, "scale", 1.0)
    return fert.scaled(scale) if scale != 1.0 else fert


def _initial(r, base):
    sec = "initial"
    if not r.cp.has_section(sec):
        return {"kind": "constant", "value": 1.0}
    kind = r.get(sec, "kind", "constant")
    if kind == "zero":
        return {"kind": "zero"}
    if kind == "constant":
        return {"kind": "constant", "value": r.number(sec, "value", 1.0)}
    if kind == "cosine":
        return {"kind": "cosine", "value": r.number(sec, "value", 1.0),
                "amplitude": r.number(sec, "amplitude", 0.5),
                "mode": r.number(sec, "mode", 1, int)}
    if kind == "table":
        p = Path(r.get(sec, "table"))
        if not p.is_absolute() and base is not None:
            p = base / p
        if not p.exists():
            raise ConfigError(f"initial table {str(p)!r} does not exist", r.line(sec, "table"))
        return {"kind": "table", "path": str(p)}
    raise ConfigError(f"[initial] unknown kind {kind!r}", r.line(sec, "kind"))


def initial_field(spec, grid):
    """Materialize an ``[initial]`` spec on ``grid`` (shape ``(n_a, n_x)``)."""
    shape = (grid.n_a, grid.n_x)
    kind = spec["kind"]
    if kind == "zero":
        return np.zeros(shape)
    if kind == "constant":
        return np.full(shape, float(spec["value"]))
    if kind == "cosine":
        x = grid.circle.x
        row = spec["value"] * (1.0 + spec["amplitude"] * np.cos(2 * np.pi * spec["mode"] * x / 24.0))
        return np.broadcast_to(row, shape).copy()
    if kind == "table":
        from .io import read_snapshot_csv

        _, _, values = read_snapshot_csv(spec["path"])
        if values.shape != shape:
            raise ConfigError(f"initial table has shape {values.shape}, grid needs {shape}")
        return values
    raise ConfigError(f"unknown initial kind {kind!r}")


def _sweep(r):
    sec = "sweep"
    if not r.cp.has_section(sec):
        return None
    axes = []
    for key in ("axis1", "axis2"):
        if not r.has(sec, key):
            continue
        parts = r.get(sec, key).split()
        line = r.line(sec, key)
        if len(parts) != 4 or parts[0] not in SWEEP_AXES:
            raise ConfigError(f"[sweep] {key} must be 'name start stop num' with name in "
                              f"{', '.join(SWEEP_AXES)}", line)
        try:
            start, stop, num = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            raise ConfigError(f"[sweep] {key} has a non-numeric range", line) from None
        if num < 1:
            raise ConfigError(f"[sweep] {key} needs at least one point", line)
        axes.append(SweepAxis(parts[0], tuple(np.linspace(start, stop, num).tolist())))
    if not axes:
        raise ConfigError("[sweep] needs axis1", r.line(sec))
    task = r.get(sec, "task", "lambda0")
    if task not in ("lambda0", "regime"):
        raise ConfigError(f"[sweep] task must be lambda0 or regime, got {task!r}",
                          r.line(sec, "task"))
    spec = SweepSpec(tuple(axes), task)
    if spec.n_points > MAX_SWEEP_POINTS:
        raise ConfigError(f"sweep has {spec.n_points} points (limit {MAX_SWEEP_POINTS})",
                          r.line(sec))
    return spec


def parse_config_text(text, base=None, source=None, check=True) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=str(source or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None
    lines = _line_numbers(text)
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", lines.get((sec, None)))
        for key in cp.options(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key '{key}' in [{sec}]", lines.get((sec, key)))
    r = _Reader(cp, lines)
    if not cp.has_section("params"):
        raise ConfigError("missing [params] section")

    try:
        params = ModelParams(
            delta=r.number("params", "delta"),
            eta=r.number("params", "eta"),
            a_dagger=r.number("params", "a_dagger"),
            t_end=r.number("params", "t_end", 50.0),
            periodic_kernel=r.boolean("params", "periodic_kernel"),
        )
        rates = VitalRates(_mortality(r, params.a_dagger, base), _fertility(r, base),
                           params.a_dagger)
        has_grid = cp.has_section("grid")
        sim = SimConfig(
            n_x=r.number("grid", "n_x", 64, int) if has_grid else 64,
            n_a=r.number("grid", "n_a", 200, int) if has_grid else 200,
            age_order=r.number("grid", "age_order", 4, int) if has_grid else 4,
            record_every=(r.number("simulation", "record_every", 50, int)
                          if cp.has_section("simulation") else 50),
        )
        Grid(sim.n_x, sim.n_a, params.a_dagger)
        if sim.record_every < 1 or sim.age_order < 1:
            raise ConfigError("record_every and age_order must be >= 1")
    except DomainError as exc:
        raise ValidationError(f"range error: {exc}", assumption="params") from None

    tol = Tolerances()
    if cp.has_section("tolerances"):
        tol = Tolerances(*(r.number("tolerances", k, getattr(tol, k))
                           for k in ("zero_tol", "residual", "drift")))
        if min(tol.zero_tol, tol.residual, tol.drift) <= 0:
            raise ValidationError("tolerances must be positive", assumption="params")

    cfg = RunConfig(params, rates, sim, tol, _initial(r, base), _sweep(r), source)
    if check:
        check_config(cfg)
    return cfg


def check_config(cfg: RunConfig):
    """Run the assumption checks; raise ``ValidationError`` naming the first failure."""
    p0 = cfg.initial_field()
    report = validate(cfg.params, cfg.rates, p0)
    if not report.ok:
        bad = report.failures[0]
        raise ValidationError(f"({bad.name}) {bad.detail}", assumption=bad.name)
    return report


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return parse_config_text(text, base=path.parent, source=path)
