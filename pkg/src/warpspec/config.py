"""Run configuration: sectioned ``key = value`` text with strict validation.

Functions are chosen by preset name plus numeric parameters; there is no
expression language.  Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields
from typing import List, Union

from . import geometry as geo
from .radial import GaussianWell, Potential, PowerLaw

OUTPUT_ENV = "WARPSPEC_OUTPUT_DIR"

GEOMETRIES = ("euclidean", "hyperbolic", "kappa_power", "profile")
PERTURBATIONS = ("zero", "sin_log", "sin")
Q_CHOICES = ("q1", "q_main")
SEEDS = ("regular", "decaying")


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


@dataclass
class ModelSection:
    dimension: int = 3
    geometry: str = "euclidean"
    r0: float = 1.0
    b: float = 1.0
    c: float = 0.0
    delta: float = 0.0
    pert: str = "zero"
    p: float = 0.0
    kappa: float = 1.0

    def validate(self):
        if self.dimension < 2:
            raise ConfigError("model.dimension must be at least 2")
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"model.geometry must be one of {GEOMETRIES}")
        if self.pert not in PERTURBATIONS:
            raise ConfigError(f"model.pert must be one of {PERTURBATIONS}")
        if self.r0 <= 0:
            raise ConfigError("model.r0 must be positive")
        if self.delta < 0:
            raise ConfigError("model.delta must be nonnegative")

    def build(self) -> geo.WarpedModel:
        if self.geometry == "euclidean":
            warp = geo.Euclidean()
        elif self.geometry == "hyperbolic":
            warp = geo.Hyperbolic()
        elif self.geometry == "kappa_power":
            warp = geo.KappaPower(self.p, self.kappa)
        else:
            pert = {"zero": geo.ZeroPert(), "sin_log": geo.SinLogPert(self.delta),
                    "sin": geo.SinPert(self.delta)}[self.pert]
            warp = geo.ProfileDriven(self.b, self.c, pert)
        return geo.WarpedModel(self.dimension, self.r0, warp)


@dataclass
class PotentialSection:
    """``V1 = coulomb_c1 r^-(1+coulomb_beta) - well``; ``V2 = slow_c2 r^-slow_beta``."""

    coulomb_c1: float = 0.0
    coulomb_beta: float = 0.5
    slow_c2: float = 0.0
    slow_beta: float = 0.5
    well_depth: float = 0.0
    well_center: float = 0.0
    well_width: float = 1.0

    def validate(self):
        if self.well_width <= 0:
            raise ConfigError("potential.well_width must be positive")
        if self.coulomb_beta <= 0 or self.slow_beta <= 0:
            raise ConfigError("potential decay exponents must be positive")

    def build(self) -> Potential:
        v1, v2 = [], []
        if self.coulomb_c1:
            v1.append(PowerLaw(self.coulomb_c1, 1.0 + self.coulomb_beta))
        if self.well_depth:
            v1.append(GaussianWell(self.well_depth, self.well_center, self.well_width))
        if self.slow_c2:
            v2.append(PowerLaw(self.slow_c2, self.slow_beta))
        return Potential(tuple(v1), tuple(v2))


@dataclass
class ModeSection:
    l: int = 0

    def validate(self):
        if self.l < 0:
            raise ConfigError("mode.l must be nonnegative")


@dataclass
class GaugeSection:
    b: Union[str, float] = "fit"
    c: Union[str, float] = "fit"
    delta: Union[str, float] = "fit"

    def validate(self):
        for k in ("b", "c", "delta"):
            v = getattr(self, k)
            if isinstance(v, str) and v != "fit":
                raise ConfigError(f"gauge.{k} must be a number or 'fit'")
        if isinstance(self.delta, float) and self.delta < 0:
            raise ConfigError("gauge.delta must be nonnegative")


@dataclass
class EnergySection:
    lam: float = 1.0
    m: float = 0.0
    s: Union[str, float] = "auto"
    mu: float = 1.0
    q_choice: str = "q_main"
    alpha: Union[str, float] = "auto"
    s0: Union[str, float] = "auto"
    eps: Union[str, float] = "auto"
    R: Union[str, float] = "auto"
    R_max: float = 1000.0
    seed: str = "regular"
    # tighter than the integrator default: dF_fd amplifies interpolation error by r/h
    tol: float = 1e-12
    trace_points: int = 400

    KEYMAP = {"lam": "lambda"}

    def validate(self):
        if self.q_choice not in Q_CHOICES:
            raise ConfigError(f"energy.q_choice must be one of {Q_CHOICES}")
        if self.seed not in SEEDS:
            raise ConfigError(f"energy.seed must be one of {SEEDS}")
        if self.m < 0 or self.mu <= 0:
            raise ConfigError("energy.m must be >= 0 and energy.mu > 0")
        if not 1e-13 <= self.tol <= 1e-6:
            raise ConfigError("energy.tol must lie in [1e-13, 1e-6]")
        if self.trace_points < 8:
            raise ConfigError("energy.trace_points must be at least 8")
        for k in ("s", "alpha", "s0", "eps", "R"):
            v = getattr(self, k)
            if isinstance(v, str) and v != "auto":
                raise ConfigError(f"energy.{k} must be a number or 'auto'")

    def r_inner(self, r0: float) -> float:
        return 50.0 * r0 if self.R == "auto" else float(self.R)


@dataclass
class ScanSection:
    lambda_min: float = 0.0
    lambda_max: float = 1.0
    steps: int = 50
    r_max: float = 200.0
    decay_criterion: float = 0.05
    refine: int = 40
    tol: float = 1e-10
    r_match: Union[str, float] = "auto"

    def validate(self):
        if not self.lambda_min < self.lambda_max:
            raise ConfigError("scan.lambda_min must be below scan.lambda_max")
        if self.steps < 2:
            raise ConfigError("scan.steps must be at least 2")
        if isinstance(self.r_match, str) and self.r_match != "auto":
            raise ConfigError("scan.r_match must be a number or 'auto'")


@dataclass
class BoundsSection:
    """Each key holds one value or a comma list; rows are the Cartesian product."""

    n: List[float] = field(default_factory=lambda: [3.0])
    kappa: List[float] = field(default_factory=list)
    a: List[float] = field(default_factory=lambda: [1.0])
    b: List[float] = field(default_factory=lambda: [1.0])
    c: List[float] = field(default_factory=lambda: [0.0])
    delta: List[float] = field(default_factory=lambda: [0.0])
    mu: List[float] = field(default_factory=lambda: [1.0])

    def validate(self):
        for k in ("n", "a", "b", "c", "delta", "mu"):
            if not getattr(self, k):
                raise ConfigError(f"bounds.{k} needs at least one value")
        if any(v < 2 or v != int(v) for v in self.n):
            raise ConfigError("bounds.n values must be integers >= 2")
        if any(v < 0 for v in self.delta) or any(v <= 0 for v in self.mu):
            raise ConfigError("bounds.delta must be >= 0 and bounds.mu > 0")


@dataclass
class OutputSection:
    directory: str = "out"
    formats: str = "csv"

    def validate(self):
        if self.formats != "csv":
            raise ConfigError("output.formats supports only 'csv'")


SECTIONS = {
    "model": ModelSection,
    "potential": PotentialSection,
    "mode": ModeSection,
    "gauge": GaugeSection,
    "energy": EnergySection,
    "scan": ScanSection,
    "bounds": BoundsSection,
    "output": OutputSection,
}


def _convert(raw: str, current, where: str):
    raw = raw.strip()
    try:
        if isinstance(current, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, list):
            return [float(x) for x in raw.split(",") if x.strip()]
        if isinstance(current, float):
            return float(raw)
        if isinstance(current, str):
            # string defaults may also accept numbers (b = fit | 0.5)
            if current in ("fit", "auto"):
                return raw if raw in ("fit", "auto") else float(raw)
            return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from exc
    raise ConfigError(f"{where}: unsupported value {raw!r}")


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    potential: PotentialSection = field(default_factory=PotentialSection)
    mode: ModeSection = field(default_factory=ModeSection)
    gauge: GaugeSection = field(default_factory=GaugeSection)
    energy: EnergySection = field(default_factory=EnergySection)
    scan: ScanSection = field(default_factory=ScanSection)
    bounds: BoundsSection = field(default_factory=BoundsSection)
    output: OutputSection = field(default_factory=OutputSection)

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, default_section="\0none",
                                       inline_comment_prefixes=(";",))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        cfg = cls()
        for name in cp.sections():
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}]")
            sec = getattr(cfg, name)
            keymap = {v: k for k, v in getattr(sec, "KEYMAP", {}).items()}
            names = {f.name for f in fields(sec)}
            for key, raw in cp.items(name):
                attr = keymap.get(key, key)
                if attr not in names or key in getattr(sec, "KEYMAP", {}):
                    raise ConfigError(f"unknown key {name}.{key}")
                setattr(sec, attr, _convert(raw, getattr(type(sec)(), attr), f"{name}.{key}"))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.parse(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc

    def validate(self):
        for name in SECTIONS:
            getattr(self, name).validate()

    def to_text(self) -> str:
        lines = []
        for name in SECTIONS:
            sec = getattr(self, name)
            keymap = getattr(sec, "KEYMAP", {})
            lines.append(f"[{name}]")
            for f in fields(sec):
                lines.append(f"{keymap.get(f.name, f.name)} = {_fmt(getattr(sec, f.name))}")
            lines.append("")
        return "\n".join(lines)

    def output_dir(self) -> str:
        return os.environ.get(OUTPUT_ENV) or self.output.directory
