"""Run configuration (``juryrig.toml``).

Every key has a built-in default, so the file is optional. Shape (stdlib
``tomllib``; string values support ``${ENV_VAR}`` expansion, and a string
given for a numeric key is expanded and then parsed as a decimal)::

    [analysis]
    tolerance = 1e-9            # share comparisons against 1/2
    tie = "favor-a"             # or "favor-b"

    [oracle]
    step = 0.005                # grid resolution, in (0, 0.01]

    [simulate]
    n_voters = 10001
    trials = 500
    seed = 0
    fixed_split = false         # exact round(lambda * n) low-accuracy voters

    [sweep]
    q_high = 0.7
    q_low = [0.5, 0.7, 0.01]    # start, stop, step
    lambda = [0.0, 1.0, 0.05]
    oracle_step = 0.005         # cross-check every cell (`sweep --no-oracle` skips)

    [public]
    step = 0.005

Resolution order (used by the CLI): explicit ``--config`` flag >
``$JURYRIG_CONFIG`` > ``./juryrig.toml`` > defaults. A path named by the flag
or the environment must exist; unknown tables or keys are refused.
"""

from __future__ import annotations

import os
import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: tomli is the backport of tomllib
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

from juryrig.model import ModelDomainError, TieRule, parse_tie
from juryrig.oracle import DEFAULT_STEP, check_step
from juryrig.simulate import SimConfig
from juryrig.sweep import SweepSpec, fit_q_low

CONFIG_ENV = "JURYRIG_CONFIG"
CONFIG_FILENAME = "juryrig.toml"


class ConfigError(Exception):
    """A missing, malformed, or out-of-domain configuration file."""


@dataclass(frozen=True)
class Config:
    path: Optional[Path] = None
    tolerance: float = 1e-9
    tie: TieRule = TieRule.FAVOR_A
    oracle_step: float = DEFAULT_STEP
    simulate: SimConfig = field(default_factory=SimConfig)
    sweep: SweepSpec = field(default_factory=lambda: SweepSpec(oracle_step=DEFAULT_STEP))
    public_step: float = DEFAULT_STEP
    # dotted keys the file set explicitly, e.g. "sweep.q_low"
    explicit: frozenset[str] = frozenset()

    def as_dict(self) -> dict:
        return {"path": None if self.path is None else str(self.path),
                "tolerance": self.tolerance, "tie": self.tie.value,
                "oracle_step": self.oracle_step,
                "simulate": self.simulate.as_dict(),
                "sweep": self.sweep.as_dict(),
                "public_step": self.public_step}


# --------------------------------------------------------------------------- #
# Loading
# --------------------------------------------------------------------------- #

_ENV_RE = re.compile(r"\$\{(\w+)\}")

_NUMBER = (int, float, str)


def _expand(text: str, context: str) -> str:
    """Expand ``${VAR}`` from the environment; an unset variable refuses."""
    def sub(m: re.Match) -> str:
        val = os.environ.get(m.group(1))
        if val is None:
            raise ConfigError(
                f"{context}: ${{{m.group(1)}}} is not set in the environment")
        return val
    return _ENV_RE.sub(sub, text)


def _check_keys(table: dict, allowed: dict[str, Union[type, tuple]],
                context: str) -> None:
    """Refuse unknown keys; type-check values (booleans are not numbers)."""
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"{context}: unknown key(s) {unknown} "
                          f"(allowed: {sorted(allowed)})")
    for key, typ in allowed.items():
        if key not in table:
            continue
        value = table[key]
        if (isinstance(value, bool) and typ is not bool) or not isinstance(value, typ):
            names = (typ.__name__ if isinstance(typ, type)
                     else " or ".join(t.__name__ for t in typ))
            raise ConfigError(f"{context}: '{key}' must be of type {names}, "
                              f"got {type(value).__name__}")


def _float(value, context: str) -> float:
    if isinstance(value, str):
        text = _expand(value, context)
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"{context}: {text!r} is not a decimal number") from None
    return float(value)


def _int(value, context: str) -> int:
    if isinstance(value, str):
        text = _expand(value, context)
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"{context}: {text!r} is not an integer") from None
    if isinstance(value, float):
        raise ConfigError(f"{context}: {value!r} is not an integer")
    return value


def _range(value, context: str) -> tuple[float, float, float]:
    if len(value) != 3:
        raise ConfigError(f"{context}: expected [start, stop, step], got {value}")
    return tuple(_float(v, context) for v in value)


def resolve_config_path(explicit: Optional[str] = None) -> Optional[Path]:
    """Resolution order: explicit (CLI flag) > $JURYRIG_CONFIG >
    ./juryrig.toml; ``None`` means built-in defaults."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(CONFIG_ENV)
    if env:
        return Path(env)
    cwd_config = Path(CONFIG_FILENAME)
    if cwd_config.is_file():
        return cwd_config
    return None


def load_config(path: Optional[Union[Path, str]] = None) -> Config:
    if path is None:
        return Config()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as f:
        try:
            data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from None
    name = path.name
    _check_keys(data, {"analysis": dict, "oracle": dict, "simulate": dict,
                       "sweep": dict, "public": dict}, name)
    try:
        return _build(data, path.resolve(), name)
    except ModelDomainError as e:
        raise ConfigError(f"{name}: {e}") from None


def _build(data: dict, path: Path, name: str) -> Config:
    cfg = Config(path=path)

    ctx = f"{name} [analysis]"
    tbl = data.get("analysis", {})
    _check_keys(tbl, {"tolerance": _NUMBER, "tie": str}, ctx)
    if "tolerance" in tbl:
        tol = _float(tbl["tolerance"], ctx)
        if not 0.0 <= tol < 1e-3:
            raise ConfigError(f"{ctx}: tolerance {tol} outside [0, 1e-3)")
        cfg = replace(cfg, tolerance=tol)
    if "tie" in tbl:
        cfg = replace(cfg, tie=parse_tie(_expand(tbl["tie"], ctx)))

    ctx = f"{name} [oracle]"
    tbl = data.get("oracle", {})
    _check_keys(tbl, {"step": _NUMBER}, ctx)
    if "step" in tbl:
        step = _float(tbl["step"], ctx)
        check_step(step)
        cfg = replace(cfg, oracle_step=step)

    ctx = f"{name} [simulate]"
    tbl = data.get("simulate", {})
    _check_keys(tbl, {"n_voters": (int, str), "trials": (int, str),
                      "seed": (int, str), "fixed_split": bool}, ctx)
    sim = {key: _int(tbl[key], ctx)
           for key in ("n_voters", "trials", "seed") if key in tbl}
    if "fixed_split" in tbl:
        sim["fixed_split"] = tbl["fixed_split"]
    cfg = replace(cfg, simulate=replace(cfg.simulate, tie=cfg.tie, **sim))

    ctx = f"{name} [sweep]"
    tbl = data.get("sweep", {})
    _check_keys(tbl, {"q_high": _NUMBER, "q_low": list, "lambda": list,
                      "oracle_step": _NUMBER}, ctx)
    sweep = {}
    if "q_high" in tbl:
        sweep["q_high"] = _float(tbl["q_high"], ctx)
    if "q_low" in tbl:
        sweep["q_low"] = _range(tbl["q_low"], ctx)
        cfg = replace(cfg, explicit=cfg.explicit | {"sweep.q_low"})
    elif "q_high" in sweep:
        sweep["q_low"] = fit_q_low(cfg.sweep.q_low, sweep["q_high"])
    if "lambda" in tbl:
        sweep["lam"] = _range(tbl["lambda"], ctx)
    if "oracle_step" in tbl:
        sweep["oracle_step"] = _float(tbl["oracle_step"], ctx)
    cfg = replace(cfg, sweep=replace(cfg.sweep, **sweep))

    ctx = f"{name} [public]"
    tbl = data.get("public", {})
    _check_keys(tbl, {"step": _NUMBER}, ctx)
    if "step" in tbl:
        step = _float(tbl["step"], ctx)
        check_step(step)
        cfg = replace(cfg, public_step=step)
    return cfg
