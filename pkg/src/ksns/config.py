"""Run configuration: sectioned key-value text files and CLI overrides.

The format is INI (configparser) with one section per subsystem and typed
values handled by this module, so parse -> serialize -> parse is the
identity on the dataclasses.  Infinities are spelled "inf"; blob lists are
semicolon-separated "cx,cy,amplitude,width" tuples; level lists are
comma-separated numbers.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class GridSection:
    n_points: int = 64
    box_length: float = 16.0 * np.pi


@dataclass(frozen=True)
class ModelSection:
    d1: float = 1.0
    d2: float = 1.0
    d3: float = 1.0
    sensitivity: str = "prototype_linear"
    chi0: float = 1.0
    table_path: str = ""
    phi_amplitude: float = 0.0
    epsilon: float = 0.1
    cutoff_R: float = np.inf
    trunc_k: float = np.inf


@dataclass(frozen=True)
class InitialSection:
    # each blob is (center_x, center_y, amplitude, width)
    blobs: tuple[tuple[float, float, float, float], ...] = ()
    n0_floor: float = 0.0
    c0_max: float = 1.0
    c0_width: float = 6.0
    c0_floor_frac: float = 0.1
    u0_energy: float = 0.0
    u0_band_lo: int = 1
    u0_band_hi: int = 4
    u0_alpha: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class NoiseSection:
    kind: str = "off"
    strength: float = 0.0
    sigmas: tuple[float, ...] = ()
    n_modes: int = 1
    seed: int = 0


@dataclass(frozen=True)
class IntegratorSection:
    dt: float = 2e-3
    t_final: float = 1.0
    checkpoint_stride: int = 25
    scheme: str = "imex_em"
    cfl_override: bool = False


@dataclass(frozen=True)
class DynamicsSection:
    level: str = "full"
    dealias: bool = True
    blowup_threshold: float = 1e12


@dataclass(frozen=True)
class DiagnosticsSection:
    c_c0: float = 1.0
    lambda_gn: float = 1.0
    c_floor_frac: float = 1e-8


@dataclass(frozen=True)
class EnsembleSection:
    n_members: int = 4
    seed_base: int = 1000


@dataclass(frozen=True)
class ConvergeSection:
    axis: str = "dt"
    levels: tuple[float, ...] = (8e-3, 4e-3, 2e-3, 1e-3)
    uniqueness_delta: float = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    run_id: str = "run"
    kind: str = "simulate"
    out_dir: str = "out"
    grid: GridSection = field(default_factory=GridSection)
    model: ModelSection = field(default_factory=ModelSection)
    initial: InitialSection = field(default_factory=InitialSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    dynamics: DynamicsSection = field(default_factory=DynamicsSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    ensemble: EnsembleSection = field(default_factory=EnsembleSection)
    converge: ConvergeSection = field(default_factory=ConvergeSection)


KINDS = ("simulate", "ensemble", "converge", "uniqueness", "check-b2", "validate")

_SECTIONS = {
    "grid": GridSection,
    "model": ModelSection,
    "initial": InitialSection,
    "noise": NoiseSection,
    "integrator": IntegratorSection,
    "dynamics": DynamicsSection,
    "diagnostics": DiagnosticsSection,
    "ensemble": EnsembleSection,
    "converge": ConvergeSection,
}


class ConfigError(ValueError):
    """Malformed configuration file or override."""


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if np.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(",".join(repr(float(x)) for x in item) for item in value)
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _parse_typed(text: str, template):
    text = text.strip()
    if isinstance(template, bool):
        low = text.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if isinstance(template, int):
        return int(text)
    if isinstance(template, float):
        return float(text)
    if isinstance(template, tuple):
        if not text:
            return ()
        if template and isinstance(template[0], tuple) or ";" in text or (
            template == () and text.count(",") >= 3
        ):
            items = []
            for chunk in text.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                parts = [float(p) for p in chunk.split(",")]
                if len(parts) != 4:
                    raise ConfigError(f"blob entry needs 4 numbers, got {chunk!r}")
                items.append(tuple(parts))
            return tuple(items)
        return tuple(float(p) for p in text.split(",") if p.strip())
    return text


def to_ini(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    parser["experiment"] = {
        "run_id": cfg.run_id,
        "kind": cfg.kind,
        "out_dir": cfg.out_dir,
    }
    for name in _SECTIONS:
        section = getattr(cfg, name if name != "converge" else "converge")
        parser[name] = {
            key: _format_value(val) for key, val in asdict(section).items()
        }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def from_ini(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from exc

    kwargs = {}
    if parser.has_section("experiment"):
        exp = parser["experiment"]
        kwargs["run_id"] = exp.get("run_id", "run")
        kwargs["kind"] = exp.get("kind", "simulate")
        kwargs["out_dir"] = exp.get("out_dir", "out")
    for name, cls in _SECTIONS.items():
        defaults = cls()
        if not parser.has_section(name):
            kwargs[name] = defaults
            continue
        updates = {}
        for key, raw in parser[name].items():
            if not hasattr(defaults, key):
                raise ConfigError(f"unknown key [{name}] {key}")
            template = getattr(defaults, key)
            try:
                updates[key] = _parse_typed(raw, template)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for [{name}] {key}: {raw!r}") from exc
        kwargs[name] = replace(defaults, **updates)
    cfg = ExperimentConfig(**kwargs)
    if cfg.kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}; expected one of {KINDS}")
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return from_ini(fh.read())


def apply_override(cfg: ExperimentConfig, assignment: str) -> ExperimentConfig:
    """Apply one 'section.key=value' (or experiment-level 'key=value') override."""
    if "=" not in assignment:
        raise ConfigError(f"override must look like section.key=value, got {assignment!r}")
    target, raw = assignment.split("=", 1)
    target = target.strip()
    if "." not in target:
        if target in ("run_id", "kind", "out_dir"):
            return replace(cfg, **{target: raw.strip()})
        raise ConfigError(f"unknown top-level key {target!r}")
    section_name, key = target.split(".", 1)
    if section_name in ("experiment",):
        return replace(cfg, **{key: raw.strip()})
    if section_name not in _SECTIONS:
        raise ConfigError(f"unknown section {section_name!r}")
    section = getattr(cfg, section_name)
    if not hasattr(section, key):
        raise ConfigError(f"unknown key [{section_name}] {key}")
    template = getattr(section, key)
    try:
        value = _parse_typed(raw, template)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {target}: {raw!r}") from exc
    return replace(cfg, **{section_name: replace(section, **{key: value})})
