"""Scenario files: YAML mappings whose sections may name presets.

Angles are given in degrees through ``*_deg`` keys and speeds in knots
through ``*_kn`` keys; everything is converted to SI/radians on load.
Overrides use dotted paths into the preset-expanded mapping, e.g.
``controller.k_p=4.6`` or ``sea_state.seed=3``. Unknown keys are errors.
"""

from __future__ import annotations

import copy
import math
from pathlib import Path

import yaml

from . import presets
from .control import ControllerGains
from .fins import ActuatorParams, FinForceParams
from .ident import Maneuver, ManeuverStage, calibration_maneuver
from .sim import Scenario
from .vessel import LinearRollParams, VesselParams
from .waves import SeaStateSpec, WaveRealization

KNOT = 1852.0 / 3600.0


class ConfigError(ValueError):
    pass


SECTIONS = {
    "vessel": (presets.VESSELS, {"omega0", "nu_theta", "m", "h_theta", "quadratic_share",
                                 "reference_rate", "g", "V"}),
    "fins": (presets.FINS, {"k_02", "S_f", "l_f", "C_delta", "rho"}),
    "actuator": (presets.ACTUATORS, {"T_delta", "omega_f_max", "delta_f_max", "tau",
                                     "deadband", "K_v"}),
    "controller": (presets.GAINS, {"k_p", "k_d", "c", "T_delta"}),
    "sea_state": (presets.SEA_STATES, {"Hs", "Tz", "spectrum_kind", "gamma", "encounter_angle",
                                       "seed", "attenuation_depth"}),
    "initial": ({}, {"theta", "theta_dot", "delta_f"}),
    "command": ({}, {"kind", "stages", "amplitude", "period"}),
}
TOP_LEVEL = {"name", "vessel", "fins", "actuator", "controller", "sea_state", "waves",
             "n_harmonics", "fidelity", "dt", "duration", "initial", "command", "control_period"}


def _base_key(key: str) -> tuple[str, float]:
    if key.endswith("_deg"):
        return key[:-4], math.pi / 180.0
    if key.endswith("_kn"):
        return key[:-3], KNOT
    return key, 1.0


def _normalize(section: str, value):
    """Expand a preset name and convert suffixed units."""
    table, fields = SECTIONS[section]
    if value is None or value is False or value == "off":
        return None
    if isinstance(value, str):
        if value not in table:
            raise ConfigError(f"unknown {section} preset {value!r}; choose from {sorted(table)}")
        value = copy.deepcopy(table[value])
    if not isinstance(value, dict):
        raise ConfigError(f"{section} must be a preset name or a mapping, got {value!r}")
    if "preset" in value:
        value = dict(value)
        base = _normalize(section, value.pop("preset")) or {}
        base.update(_normalize_fields(section, value, fields))
        return base
    return _normalize_fields(section, value, fields)


def _normalize_fields(section, value, fields):
    out = {}
    for key, v in value.items():
        base, factor = _base_key(key)
        if base not in fields:
            raise ConfigError(f"unknown key {key!r} in {section}; allowed: {sorted(fields)}")
        out[base] = v * factor if factor != 1.0 and v is not None else v
    return out


def expand(raw: dict) -> dict:
    """Preset-expanded, unit-normalized copy of a scenario mapping."""
    if "preset" in raw:
        raw = dict(raw)
        name = raw.pop("preset")
        if name not in presets.SCENARIOS:
            raise ConfigError(f"unknown scenario preset {name!r}")
        raw = {**presets.SCENARIOS[name], **raw}
    unknown = set(raw) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}; allowed: {sorted(TOP_LEVEL)}")
    out = {}
    for key, value in raw.items():
        if key in SECTIONS:
            out[key] = _normalize(key, value)
        else:
            out[key] = value
    return out


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply ``key=value`` strings; values are parsed as YAML scalars."""
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, text = item.split("=", 1)
        value = yaml.safe_load(text)
        parts = path.strip().split(".")
        head = parts[0]
        if head not in TOP_LEVEL:
            raise ConfigError(f"unknown override key {path!r}")
        if len(parts) == 1:
            cfg[head] = _normalize(head, value) if head in SECTIONS else value
            continue
        if len(parts) != 2 or head not in SECTIONS:
            raise ConfigError(f"unknown override key {path!r}")
        if head not in cfg and not SECTIONS[head][0]:
            cfg[head] = {}
        section = cfg.get(head)
        if section is None:
            raise ConfigError(f"cannot set {path!r}: section {head!r} is off")
        key, factor = _base_key(parts[1])
        if key not in SECTIONS[head][1]:
            raise ConfigError(f"unknown override key {path!r}")
        section[key] = value * factor if factor != 1.0 else value
    return cfg


def _command(spec):
    if spec is None:
        return None
    kind = spec.get("kind", "maneuver")
    if kind == "maneuver":
        stages = spec.get("stages", "table-3")
        if stages == "table-3":
            return Maneuver(calibration_maneuver())
        if not isinstance(stages, list):
            raise ConfigError("command.stages must be 'table-3' or a list of stages")
        built = []
        for st in stages:
            st = dict(st)
            if "amplitude_deg" in st:
                st["amplitude"] = math.radians(st.pop("amplitude_deg"))
            try:
                built.append(ManeuverStage(**st))
            except TypeError as exc:
                raise ConfigError(f"bad maneuver stage {st}: {exc}") from exc
        return Maneuver(built)
    if kind == "harmonic":
        A, T = float(spec["amplitude"]), float(spec["period"])
        return _Harmonic(A, T)
    raise ConfigError(f"unknown command kind {kind!r}")


class _Harmonic:
    def __init__(self, amplitude, period):
        self.amplitude, self.period = amplitude, period

    def __call__(self, t):
        return self.amplitude * math.sin(2.0 * math.pi * t / self.period)


def build(cfg: dict, base_dir: Path | None = None) -> Scenario:
    """Construct a :class:`Scenario` from an expanded mapping."""
    try:
        vs = dict(cfg["vessel"])
        lin = LinearRollParams(omega0=vs["omega0"], nu_theta=vs["nu_theta"])
        vessel = VesselParams.from_linear(
            vs["omega0"], vs["nu_theta"], vs["m"], vs["h_theta"],
            quadratic_share=vs.get("quadratic_share", 0.0),
            reference_rate=vs.get("reference_rate", 1.0),
            g=vs.get("g", 9.81), V=vs.get("V", 0.0))
        fs = dict(cfg["fins"])
        fins = FinForceParams.from_gains(fs["k_02"], vessel.J_xx, fs["S_f"], fs["l_f"],
                                         fs["C_delta"], fs.get("rho", 1025.0))
        actuator = ActuatorParams(**cfg["actuator"])
        gains = None if cfg.get("controller") is None else ControllerGains(**cfg["controller"])
        sea = None if cfg.get("sea_state") is None else SeaStateSpec(**cfg["sea_state"])
        waves = None
        if cfg.get("waves"):
            path = Path(cfg["waves"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            waves = WaveRealization.from_csv(path)
        init = cfg.get("initial") or {}
        initial = (init.get("theta", 0.0), init.get("theta_dot", 0.0), init.get("delta_f", 0.0))
        return Scenario(vessel=vessel, linear=lin, fins=fins, actuator=actuator, gains=gains,
                        sea=sea, waves=waves, n_harmonics=int(cfg.get("n_harmonics", 10)),
                        fidelity=cfg.get("fidelity", "design"), dt=float(cfg.get("dt", 0.01)),
                        duration=float(cfg.get("duration", 600.0)), initial=initial,
                        command=_command(cfg.get("command")),
                        control_period=cfg.get("control_period"),
                        name=str(cfg.get("name", "scenario")))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def load(source, overrides=None) -> tuple[Scenario, dict]:
    """Load a scenario file or a built-in scenario name.

    Returns the scenario and its expanded configuration mapping.
    """
    path = Path(str(source))
    if path.is_file():
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: scenario file must contain a mapping")
        base_dir = path.parent
    elif str(source) in presets.SCENARIOS:
        raw, base_dir = copy.deepcopy(presets.SCENARIOS[str(source)]), None
    else:
        raise ConfigError(f"scenario file not found: {path}")
    cfg = apply_overrides(expand(raw), overrides)
    return build(cfg, base_dir), cfg
