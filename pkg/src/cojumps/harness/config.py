"""INI configuration for scenarios and experiments.

A file holds one ``[experiment]`` section and any number of
``[scenario:<name>]`` sections with flat keys::

    [scenario:mine]
    rho = 0.5
    sigma1 = 0.008944
    alpha3 = 0.01
    lambda3 = 5
    l3 = 0.05
    h3 = 0.3187

    [experiment]
    scenario = mine        ; or a preset name such as I-d0
    n_obs = 100, 1600
    replications = 1000
    levels = 0.01, 0.05, 0.1
    joint_methods = SIMULATED, NORMAL_QUANTILE
    disjoint_methods = SIMULATED:MULTIPOWER, MARKOV:MULTIPOWER
    keep_classes = DISJOINT
"""

from __future__ import annotations

import configparser
import io
from typing import Dict, List, Optional

from ..estimators import TruncationSpec, WindowSpec
from ..exceptions import ConfigError
from ..simulator import PRESETS, JumpSource, PathClass, ScenarioConfig
from ..testing import DisjointCutoffMethod, JointCutoffMethod, TestConfig
from .experiment import ExperimentSpec

__all__ = ["scenario_from_flat", "scenario_to_flat", "load_config", "experiment_from_config", "dump_presets"]

_SOURCE_KEYS = ("alpha", "lambda", "l", "h")


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    values = _floats(text)
    if any(v != int(v) for v in values):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def _names(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def scenario_from_flat(section: Dict[str, str], base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Build a scenario from flat keys, starting from ``base`` (default: no jumps)."""
    base = base or ScenarioConfig()
    d = base.to_dict()
    sources = [dict(s) for s in d.pop("sources")]
    known = {"rho", "sigma1", "sigma2", "x0", "horizon", "fine_steps_per_obs", "preset"}
    try:
        for key, value in section.items():
            if key in ("rho", "sigma1", "sigma2", "horizon"):
                d[key] = float(value)
            elif key == "fine_steps_per_obs":
                d[key] = _ints(value)[0]
            elif key == "x0":
                d[key] = tuple(_floats(value))
            elif key[:-1] in _SOURCE_KEYS and key[-1] in "123":
                field_name = "lam" if key[:-1] == "lambda" else key[:-1]
                sources[int(key[-1]) - 1][field_name] = float(value)
            elif key not in known:
                raise ConfigError(f"unknown scenario key {key!r}")
        return ScenarioConfig.from_dict({**d, "sources": [JumpSource(**s) for s in sources]})
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def scenario_to_flat(cfg: ScenarioConfig) -> Dict[str, str]:
    out = {
        "rho": repr(cfg.rho),
        "sigma1": repr(cfg.sigma1),
        "sigma2": repr(cfg.sigma2),
        "x0": ", ".join(repr(v) for v in cfg.x0),
        "horizon": repr(cfg.horizon),
        "fine_steps_per_obs": str(cfg.fine_steps_per_obs),
    }
    for s, src in enumerate(cfg.sources, start=1):
        out[f"alpha{s}"] = repr(src.alpha)
        out[f"lambda{s}"] = repr(src.lam)
        out[f"l{s}"] = repr(src.l)
        out[f"h{s}"] = repr(src.h)
    return out


def dump_presets() -> str:
    """The shipped scenario presets in the config file format."""
    parser = configparser.ConfigParser()
    for name, cfg in PRESETS.items():
        parser[f"scenario:{name}"] = scenario_to_flat(cfg)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def load_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path!r}: {exc}") from None
    return parser


def resolve_scenario(parser: Optional[configparser.ConfigParser], name: str) -> ScenarioConfig:
    """A ``[scenario:<name>]`` section (optionally based on ``preset = ...``) or a preset."""
    section = f"scenario:{name}"
    if parser is not None and parser.has_section(section):
        items = dict(parser[section])
        base = None
        if "preset" in items:
            base = resolve_scenario(None, items["preset"])
        return scenario_from_flat(items, base)
    if name in PRESETS:
        return PRESETS[name]
    raise ConfigError(f"unknown scenario {name!r}; presets are {', '.join(PRESETS)}")


def build_test_config(items: Dict[str, str]) -> TestConfig:
    """TestConfig from flat keys ``k, level, alpha, varpi, kn, draws, power_guard``."""
    try:
        trunc = TruncationSpec(alpha=float(items.get("alpha", 0.03)), varpi=float(items.get("varpi", 0.49)))
        guard = items.get("power_guard")
        kn = items.get("kn")
        draws = items.get("draws")
        return TestConfig(
            k=_ints(items.get("k", "2"))[0],
            level=float(items.get("level", 0.05)),
            trunc=trunc,
            window=WindowSpec(_ints(kn)[0]) if kn else None,
            n_draws=_ints(draws)[0] if draws else None,
            power_guard=tuple(_floats(guard)) if guard else None,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def experiment_from_config(parser: configparser.ConfigParser, section: str = "experiment") -> ExperimentSpec:
    if not parser.has_section(section):
        raise ConfigError(f"config has no [{section}] section")
    items = dict(parser[section])
    name = items.pop("scenario", None) or items.pop("preset", None)
    if name is None:
        raise ConfigError("experiment needs a 'scenario' (or 'preset') key")
    scenario = resolve_scenario(parser, name)
    try:
        joint = tuple(JointCutoffMethod(m.upper()) for m in _names(items.get("joint_methods", "SIMULATED")))
        disjoint = tuple(DisjointCutoffMethod.parse(m) for m in _names(items.get("disjoint_methods", "SIMULATED")))
        keep = items.get("keep_classes")
        keep_classes = frozenset(PathClass(c.upper()) for c in _names(keep)) if keep else None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentSpec(
        scenario=scenario,
        scenario_name=name,
        n_obs_list=tuple(_ints(items.get("n_obs", "100, 1600"))),
        replications=_ints(items.get("replications", "1000"))[0],
        levels=tuple(_floats(items.get("levels", "0.01, 0.05, 0.1"))),
        test_cfg=build_test_config(items),
        joint_methods=joint,
        disjoint_methods=disjoint,
        seed=_ints(items.get("seed", "0"))[0],
        keep_classes=keep_classes,
        max_attempts_factor=_ints(items.get("max_attempts_factor", "50"))[0],
    )
