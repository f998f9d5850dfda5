"""Scenario files: sectioned ``key = value`` text.

Vectors are comma-separated; matrices are semicolon-separated rows of
comma-separated numbers.  ``Q``, ``R``, ``P0`` and ``delta`` also accept
a single number (``Q`` and ``R`` become multiples of the identity, ``delta``
is shared by every channel).
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .lti import ContinuousLTI
from .pipeline import ROLES, ChannelMeta, TransportStub
from .pocs import PocsConfig

__all__ = ["ConfigError", "ScenarioConfig", "BUILTIN_SCENARIOS", "parse_config", "load_text"]

log = logging.getLogger(__name__)

BUILTIN_SCENARIOS = ("paper-sec7",)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    model: ContinuousLTI
    x0: np.ndarray
    channels: tuple
    T: float
    duration: float
    pocs: PocsConfig | None
    delay_steps: int = 0
    drop_probability: float = 0.0
    seed: int = 0
    output: str = "out"
    x0_hat: np.ndarray | None = None
    P0: np.ndarray | None = None
    source: str = ""

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.T))

    @property
    def deltas(self):
        return np.array([c.delta for c in self.channels])

    def transport(self) -> TransportStub:
        return TransportStub(self.delay_steps, self.drop_probability)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, seed=int(seed))

    def with_delta(self, delta: float) -> "ScenarioConfig":
        channels = tuple(dataclasses.replace(c, delta=float(delta)) for c in self.channels)
        return dataclasses.replace(self, channels=channels)


def load_text(path) -> tuple[str, str]:
    """Return ``(text, label)`` for a file path or a built-in scenario name."""
    p = Path(path)
    if not p.exists() and str(path) in BUILTIN_SCENARIOS:
        res = resources.files("sodestimator") / "scenarios" / f"{path}.ini"
        return res.read_text(), f"<builtin {path}>"
    return p.read_text(), str(p)


class _Reader:
    def __init__(self, text, label):
        self.label = label
        self.cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
        self.cp.optionxform = str
        try:
            self.cp.read_string(text, source=label)
        except configparser.Error as exc:
            raise ConfigError(f"{label}: {exc}") from None
        self.lines = {}
        section = None
        for lineno, line in enumerate(text.splitlines(), 1):
            m = re.match(r"\s*\[([^\]]+)\]", line)
            if m:
                section = m.group(1).strip()
                continue
            m = re.match(r"\s*([^#=\s][^=]*?)\s*=", line)
            if m and section is not None:
                self.lines[(section, m.group(1))] = lineno

    def where(self, section, key):
        line = self.lines.get((section, key))
        at = f"line {line}" if line else "missing"
        return f"{self.label}: {section}.{key} ({at})"

    def raw(self, section, key, default=None):
        if self.cp.has_option(section, key):
            return self.cp.get(section, key).strip()
        if default is not None:
            return default
        raise ConfigError(f"{self.where(section, key)}: required key not found")

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def number(self, section, key, default=None, kind=float):
        text = self.raw(section, key, None if default is None else str(default))
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: not a number: {text!r}") from None
        if kind is not int:
            return value
        try:
            return int(text)
        except ValueError:
            if not value.is_integer():
                raise ConfigError(f"{self.where(section, key)}: not an integer: {text!r}") from None
            return int(value)

    def matrix(self, section, key, default=None):
        text = self.raw(section, key, default)
        try:
            rows = [[float(v) for v in row.split(",")] for row in text.split(";") if row.strip()]
        except ValueError:
            raise ConfigError(f"{self.where(section, key)}: non-numeric value in {text!r}") from None
        if not rows or len({len(r) for r in rows}) != 1:
            raise ConfigError(f"{self.where(section, key)}: ragged or empty matrix")
        return np.array(rows)

    def vector(self, section, key, default=None):
        m = self.matrix(section, key, default)
        if m.shape[0] != 1:
            raise ConfigError(f"{self.where(section, key)}: expected a vector, got {m.shape[0]} rows")
        return m[0]

    def words(self, section, key, default=None):
        return [w.strip() for w in self.raw(section, key, default).split(",") if w.strip()]


def _square_or_scalar(rd, section, key, size, default=None):
    m = rd.matrix(section, key, default)
    if m.shape == (1, 1):
        return float(m[0, 0]) * np.eye(size)
    if m.shape != (size, size):
        raise ConfigError(f"{rd.where(section, key)}: expected {size}x{size} or a scalar, got {m.shape}")
    return m


def parse_config(path) -> ScenarioConfig:
    """Read and validate a scenario file (or a built-in scenario name)."""
    try:
        text, label = load_text(path)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    rd = _Reader(text, label)

    A = rd.matrix("plant", "A")
    if A.shape[0] != A.shape[1]:
        raise ConfigError(f"{rd.where('plant', 'A')}: A must be square, got {A.shape}")
    n = A.shape[0]
    C = rd.matrix("plant", "C")
    if C.shape[1] != n:
        raise ConfigError(
            f"{rd.where('plant', 'C')}: C has {C.shape[1]} columns but "
            f"{rd.where('plant', 'A')} describes {n} states"
        )
    p = C.shape[0]
    Q = _square_or_scalar(rd, "plant", "Q", n)
    R = _square_or_scalar(rd, "plant", "R", p)
    x0 = rd.vector("plant", "x0")
    if len(x0) != n:
        raise ConfigError(f"{rd.where('plant', 'x0')}: length {len(x0)} but {rd.where('plant', 'A')} has {n} states")
    try:
        model = ContinuousLTI(A, C, Q, R)
    except ValueError as exc:
        raise ConfigError(f"{label}: [plant] {exc}") from None

    names = rd.words("channels", "names", ",".join(f"y{i + 1}" for i in range(p)))
    roles = rd.words("channels", "roles", ",".join(["generic"] * p))
    deltas = rd.vector("channels", "delta")
    if len(deltas) == 1:
        deltas = np.full(p, deltas[0])
    for key, seq in (("names", names), ("roles", roles), ("delta", deltas)):
        if len(seq) != p:
            raise ConfigError(
                f"{rd.where('channels', key)}: {len(seq)} entries but {rd.where('plant', 'C')} has {p} outputs"
            )
    bad = [r for r in roles if r not in ROLES]
    if bad:
        raise ConfigError(f"{rd.where('channels', 'roles')}: unknown role {bad[0]!r}; expected one of {ROLES}")
    if np.any(deltas < 0):
        raise ConfigError(f"{rd.where('channels', 'delta')}: thresholds must be >= 0")
    channels = tuple(ChannelMeta(nm, rl, float(d)) for nm, rl, d in zip(names, roles, deltas))

    T = rd.number("estimator", "T")
    duration = rd.number("estimator", "duration")
    if not T > 0:
        raise ConfigError(f"{rd.where('estimator', 'T')}: must be positive")
    steps = round(duration / T)
    if steps < 1 or abs(steps * T - duration) > 1e-9 * max(duration, 1.0):
        raise ConfigError(f"{rd.where('estimator', 'duration')}: must be a positive multiple of T")
    x0_hat = rd.vector("estimator", "x0_hat") if rd.has("estimator", "x0_hat") else None
    if x0_hat is not None and len(x0_hat) != n:
        raise ConfigError(f"{rd.where('estimator', 'x0_hat')}: length {len(x0_hat)}, expected {n}")
    P0 = _square_or_scalar(rd, "estimator", "P0", n) if rd.has("estimator", "P0") else None

    pocs = None
    enabled = rd.raw("pocs", "enabled", "true").lower()
    if enabled not in ("true", "false", "yes", "no", "1", "0"):
        raise ConfigError(f"{rd.where('pocs', 'enabled')}: expected true or false")
    if enabled in ("true", "yes", "1"):
        omega = rd.number("pocs", "omega") if rd.has("pocs", "omega") else None
        try:
            pocs = PocsConfig(
                omega=omega,
                iterations=rd.number("pocs", "iterations", 10, int),
                window=rd.number("pocs", "window", 4096, int),
                stride=rd.number("pocs", "stride", 1000, int),
            ).resolved(T)
        except ValueError as exc:
            raise ConfigError(f"{label}: [pocs] {exc}") from None
        if omega is None:
            log.info("pocs.omega not set; using 0.01*pi/T = %.9g rad/s", pocs.omega)

    delay = rd.number("transport", "delay_steps", 0, int)
    drop = rd.number("transport", "drop_probability", 0.0)
    if delay < 0:
        raise ConfigError(f"{rd.where('transport', 'delay_steps')}: must be >= 0")
    if not 0 <= drop <= 1:
        raise ConfigError(f"{rd.where('transport', 'drop_probability')}: must lie in [0, 1]")
    seed = rd.number("run", "seed", 0, int)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{rd.where('run', 'seed')}: must be a 64-bit unsigned integer")
    output = rd.raw("run", "output", "out")

    return ScenarioConfig(
        model=model,
        x0=x0,
        channels=channels,
        T=T,
        duration=duration,
        pocs=pocs,
        delay_steps=delay,
        drop_probability=drop,
        seed=seed,
        output=output,
        x0_hat=x0_hat,
        P0=P0,
        source=label,
    )
