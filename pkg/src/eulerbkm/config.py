"""Run configuration: flat ``dotted.key = value`` text.

Blank lines and lines starting with ``#`` are ignored. Every key must be
known, appear once, and parse to its type; failures raise
:class:`~eulerbkm.errors.ConfigError` carrying the 1-based line number.
Lengths accept ``pi`` expressions such as ``2*pi`` or ``pi/2``.

Example::

    domain.kind = torus3
    domain.n = 64
    solver.dt = 1e-3
    solver.t_end = 1.0
    init.kind = taylor_green
    monitor.every = 10
    output.dir = tg64
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .monitor import CRITERIA

_PI_EXPR = re.compile(r"^\s*([0-9.eE+-]+)?\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")
DOMAIN_ALIASES = {"torus3": "torus3", "torus": "torus3", "channel": "channel",
                  "slab-channel-periodic": "channel"}
INIT_KINDS = ("taylor_green", "channel_taylor_green", "random", "tubes", "shear", "zero")


def parse_length(text: str) -> float:
    text = text.strip()
    m = _PI_EXPR.match(text)
    if m:
        factor = float(m.group(1)) if m.group(1) else 1.0
        div = float(m.group(2)) if m.group(2) else 1.0
        return factor * math.pi / div
    return float(text)


def _int(v):
    if not re.fullmatch(r"[+-]?\d+", v.strip()):
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v)


def _pos_float(v):
    x = float(v)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"expected a positive number, got {v!r}")
    return x


def _nonneg_float(v):
    x = float(v)
    if x < 0 or not math.isfinite(x):
        raise ValueError(f"expected a non-negative number, got {v!r}")
    return x


def _bool(v):
    s = v.strip().lower()
    if s in ("true", "yes", "1", "on"):
        return True
    if s in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _triple(conv):
    def parse(v):
        parts = [conv(p) for p in v.split(",")]
        if len(parts) == 1:
            parts = parts * 3
        if len(parts) != 3:
            raise ValueError("expected one or three comma-separated values")
        return tuple(parts)
    return parse


def _domain(v):
    s = v.strip()
    if s not in DOMAIN_ALIASES:
        raise ValueError(f"domain.kind must be one of {sorted(DOMAIN_ALIASES)}, got {s!r}")
    return DOMAIN_ALIASES[s]


def _choice(options):
    def parse(v):
        s = v.strip()
        if s not in options:
            raise ValueError(f"expected one of {list(options)}, got {s!r}")
        return s
    return parse


def _criteria(v):
    names = tuple(p.strip() for p in v.split(",") if p.strip())
    bad = [n for n in names if n not in CRITERIA]
    if bad:
        raise ValueError(f"unknown criteria {bad}; known: {list(CRITERIA)}")
    return names


def _str(v):
    s = v.strip()
    if not s:
        raise ValueError("empty value")
    return s


SCHEMA = {
    "domain.kind": _domain,
    "domain.n": _triple(_int),
    "domain.extents": _triple(lambda p: _pos_float(parse_length(p))),
    "solver.dt": _pos_float,
    "solver.t_end": _nonneg_float,
    "solver.dealias": _choice(("2/3", "none")),
    "solver.cfl_max": _pos_float,
    "init.kind": _choice(INIT_KINDS),
    "init.amplitude": float,
    "init.noise": _nonneg_float,
    "init.spectrum_slope": float,
    "init.rms": _pos_float,
    "init.separation": lambda v: _pos_float(parse_length(v)),
    "init.core_radius": _pos_float,
    "init.circulation": float,
    "init.perturbation": _nonneg_float,
    "monitor.every": _int,
    "monitor.criteria": _criteria,
    "monitor.eps_dir": _pos_float,
    "triplet.a": _pos_float,
    "triplet.b": _pos_float,
    "atlas.n_caps": _int,
    "output.dir": _str,
    "output.snapshots": _bool,
    "seed": _int,
}

_INIT_PARAMS = {"amplitude", "noise", "spectrum_slope", "rms", "separation", "core_radius",
                "circulation", "perturbation"}


@dataclass
class RunConfig:
    values: dict
    lines: dict = field(default_factory=dict)
    source: str = "<config>"

    def get(self, key, default=None):
        return self.values.get(key, default)

    def line_of(self, key):
        return self.lines.get(key)

    @property
    def domain(self):
        return self.values.get("domain.kind", "torus3")

    @property
    def output_dir(self):
        return self.values.get("output.dir", "run")

    @property
    def criteria(self):
        return self.values.get("monitor.criteria", CRITERIA)

    def solver_config(self):
        from .solver import SolverConfig

        dom = self.domain
        if dom == "torus3":
            n = self.values.get("domain.n", (32, 32, 32))
            ext = self.values.get("domain.extents", (2 * math.pi,) * 3)
        else:
            n = self.values.get("domain.n", (32, 32, 33))
            ext = self.values.get("domain.extents", (2 * math.pi, 2 * math.pi, math.pi))
        default_init = "taylor_green" if dom == "torus3" else "channel_taylor_green"
        params = {k.split(".", 1)[1]: v for k, v in self.values.items()
                  if k.startswith("init.") and k.split(".", 1)[1] in _INIT_PARAMS}
        return SolverConfig(
            n=tuple(n), dt=self.values.get("solver.dt", 1e-3),
            t_end=self.values.get("solver.t_end", 1.0), domain=dom, lengths=tuple(ext),
            initial=self.values.get("init.kind", default_init), params=params,
            output_every=self.values.get("monitor.every", 10), seed=self.values.get("seed", 0),
            dealias=self.values.get("solver.dealias", "2/3"),
            cfl_max=self.values.get("solver.cfl_max", 0.5))

    def triplet(self, domain_spec):
        """Compatible triplet from ``triplet.a``/``triplet.b`` or None."""
        if "triplet.a" not in self.values and "triplet.b" not in self.values:
            return None
        from .domains import make_slab_triplet

        a, b = self.values.get("triplet.a"), self.values.get("triplet.b")
        if a is None or b is None:
            key = "triplet.b" if a is not None else "triplet.a"
            other = "triplet.a" if a is not None else "triplet.b"
            raise ConfigError(f"{key} is required together with {other}", self.line_of(other))
        try:
            return make_slab_triplet(domain_spec, a, b)
        except ValueError as exc:
            raise ConfigError(str(exc), self.line_of("triplet.a")) from exc

    def echo(self):
        out = {}
        for k in sorted(self.values):
            v = self.values[k]
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


def _validate(cfg: RunConfig):
    v = cfg.values
    dom = cfg.domain
    init = v.get("init.kind")
    if init is not None:
        torus_only = ("taylor_green", "tubes", "shear")
        if dom == "channel" and init in torus_only:
            raise ConfigError(f"init.kind = {init} needs domain.kind = torus3", cfg.line_of("init.kind"))
        if dom == "torus3" and init == "channel_taylor_green":
            raise ConfigError("channel_taylor_green needs domain.kind = channel", cfg.line_of("init.kind"))
    if "domain.n" in v:
        n = v["domain.n"]
        if min(n) < 8:
            raise ConfigError("domain.n must be at least 8 per axis", cfg.line_of("domain.n"))
        if max(n) > 129:
            raise ConfigError("domain.n is capped at 128 per axis (129 channel nodes)",
                              cfg.line_of("domain.n"))
    if v.get("monitor.every", 1) < 1:
        raise ConfigError("monitor.every must be >= 1", cfg.line_of("monitor.every"))
    if "atlas.n_caps" in v and v["atlas.n_caps"] < 1:
        raise ConfigError("atlas.n_caps must be >= 1", cfg.line_of("atlas.n_caps"))
    if "triplet.a" in v and "triplet.b" in v and not v["triplet.a"] < v["triplet.b"]:
        raise ConfigError("triplet.a must be smaller than triplet.b", cfg.line_of("triplet.b"))


def parse_config(text: str, source="<config>") -> RunConfig:
    values, lines = {}, {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", no)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.split(" #", 1)[0].strip()
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", no)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", no)
        try:
            values[key] = SCHEMA[key](val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{key}: {exc}", no) from None
        lines[key] = no
    cfg = RunConfig(values, lines, source)
    _validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not a text file") from None
    return parse_config(text, str(path))
