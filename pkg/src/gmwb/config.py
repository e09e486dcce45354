"""Run configuration files: UTF-8 ``key=value`` lines, ``#`` starts a comment."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .contract import GMWBContract
from .grids import MESHES, GridSpec
from .mc import DEFAULT_SEED, MCConfig
from .model import ModelParams

MODES = ("vanilla", "bond", "static", "dynamic", "deterministic", "fair-fee", "mc")
STRATEGIES = ("static", "dynamic", "deterministic-static", "deterministic-dynamic")
MODEL_KEYS = ("sigma_S", "rho", "kappa", "theta", "sigma_r", "S0", "r0")
REQUIRED = MODEL_KEYS + ("mode",)


class ConfigError(ValueError):
    """One or more configuration problems, each naming its line."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _bool(s):
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean")


def _choice(options):
    def conv(s):
        if s not in options:
            raise ValueError(f"not one of {', '.join(options)}")
        return s

    return conv


def _quad(s):
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ValueError("expected q1,q2")
    return _int(parts[0]), _int(parts[1])


def _in(lo, hi, closed=(True, True)):
    def check(v):
        ok_lo = v >= lo if closed[0] else v > lo
        ok_hi = v <= hi if closed[1] else v < hi
        return ok_lo and ok_hi

    return check


_pos = _in(0, math.inf, (False, True))
_nonneg = _in(0, math.inf)

# key -> (converter, range check or None, range text)
KEYS = {
    "sigma_S": (_float, _pos, "(0,inf)"),
    "rho": (_float, _in(-1, 1), "[-1,1]"),
    "kappa": (_float, _pos, "(0,inf)"),
    "theta": (_float, None, ""),
    "sigma_r": (_float, _nonneg, "[0,inf)"),
    "S0": (_float, _pos, "(0,inf)"),
    "r0": (_float, None, ""),
    "mode": (_choice(MODES), None, ""),
    "strategy": (_choice(STRATEGIES), None, ""),
    "premium": (_float, _pos, "(0,inf)"),
    "T": (_float, _pos, "(0,inf)"),
    "Nw": (_int, _in(1, math.inf), "[1,inf)"),
    "alpha": (_float, _in(0, 1), "[0,1]"),
    "alpha_bp": (_float, _in(0, 10000), "[0,10000]"),
    "beta": (_float, _in(0, 1), "[0,1]"),
    "mesh": (_choice(tuple(MESHES)), None, ""),
    "M": (_int, _in(3, math.inf), "[3,inf)"),
    "K": (_int, _in(0, math.inf), "[0,inf)"),
    "q1": (_int, _in(1, 64), "[1,64]"),
    "q2": (_int, _in(1, 64), "[1,64]"),
    "quad": (_quad, None, ""),
    "N_dt": (_int, _in(1, math.inf), "[1,inf)"),
    "n_sd": (_float, _pos, "(0,inf)"),
    "transform": (_choice(("rotation", "cholesky")), None, ""),
    "J": (_int, _in(2, math.inf), "[2,inf)"),
    "strike": (_float, _pos, "(0,inf)"),
    "kind": (_choice(("call", "put")), None, ""),
    "maturity": (_float, _pos, "(0,inf)"),
    "yield_rate": (_float, None, ""),
    "rate": (_float, None, ""),
    "n_paths": (_int, _in(2, math.inf), "[2,inf)"),
    "seed": (_int, _nonneg, "[0,inf)"),
    "antithetic": (_bool, None, ""),
    "threads": (_int, _in(1, math.inf), "[1,inf)"),
    "out": (str, None, ""),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs for one command-line job."""

    params: ModelParams
    mode: str
    contract: GMWBContract = field(default_factory=GMWBContract)
    spec: GridSpec = field(default_factory=lambda: MESHES["fine"])
    J: int = 100
    strategy: str = "static"
    strike: float = 1.0
    kind: str | None = None
    maturity: float = 1.0
    yield_rate: float = 0.0
    rate: float | None = None
    mc: MCConfig = field(default_factory=MCConfig)
    out: str | None = None

    @property
    def threads(self) -> int:
        return self.mc.threads


def _split(text: str):
    """Yield ``(line_no, key, value)``; malformed lines yield ``key=None``."""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            yield no, None, line
            continue
        k, v = line.split("=", 1)
        yield no, k.strip(), v.strip()


def parse_values(text: str) -> tuple[dict, dict]:
    """Convert and range-check every ``key=value``; returns ``(values, lines)``."""
    values, lines, errors = {}, {}, []
    for no, key, raw in _split(text):
        if key is None:
            errors.append(f"expected key=value at line {no}")
            continue
        if key not in KEYS:
            errors.append(f"unknown key '{key}' at line {no}")
            continue
        if key in values:
            errors.append(f"duplicate key '{key}' at line {no} (first at line {lines[key]})")
            continue
        conv, check, rng = KEYS[key]
        try:
            v = conv(raw)
        except ValueError as e:
            errors.append(f"invalid value for {key} ({e}) at line {no}")
            continue
        if check is not None and not check(v):
            errors.append(f"{key} out of {rng} at line {no}")
            continue
        values[key], lines[key] = v, no
    if errors:
        raise ConfigError(errors)
    return values, lines


def build_config(values: dict, lines: dict | None = None) -> RunConfig:
    """Assemble a :class:`RunConfig` from converted values, revalidating invariants."""
    lines = lines or {}
    at = lambda k: f" at line {lines[k]}" if k in lines else ""  # noqa: E731
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ConfigError([f"missing required key '{k}'" for k in missing])
    errors = []
    try:
        params = ModelParams(**{k: values[k] for k in MODEL_KEYS})
    except ValueError as e:
        raise ConfigError([str(e)]) from None
    if "alpha" in values and "alpha_bp" in values:
        errors.append(f"give alpha or alpha_bp, not both{at('alpha_bp')}")
    alpha = values.get("alpha", values.get("alpha_bp", 0.0) * 1e-4 if "alpha_bp" in values else 0.0)
    contract_kw = {k: values[k] for k in ("premium", "T", "Nw", "beta") if k in values}
    try:
        contract = GMWBContract(alpha=alpha, **contract_kw)
    except ValueError as e:
        errors.append(f"{e}{at('Nw') or at('T')}")
        contract = None
    default_mesh = "vanilla" if values["mode"] == "vanilla" else "fine"
    spec = MESHES[values.get("mesh", default_mesh)]
    grid_kw = {k: values[k] for k in ("M", "K", "q1", "q2", "N_dt", "n_sd", "transform") if k in values}
    if "quad" in values:
        grid_kw["q1"], grid_kw["q2"] = values["quad"]
    try:
        spec = replace(spec, **grid_kw)
    except ValueError as e:
        errors.append(str(e))
    try:
        mc = MCConfig(
            n_paths=values.get("n_paths", 1_000_000),
            seed=values.get("seed", DEFAULT_SEED),
            antithetic=values.get("antithetic", False),
            threads=values.get("threads", 1),
        )
    except ValueError as e:
        errors.append(f"{e}{at('n_paths')}")
        mc = None
    if errors:
        raise ConfigError(errors)
    return RunConfig(
        params=params,
        mode=values["mode"],
        contract=contract,
        spec=spec,
        J=values.get("J", 100),
        strategy=values.get("strategy", "static"),
        strike=values.get("strike", 1.0),
        kind=values.get("kind"),
        maturity=values.get("maturity", 1.0),
        yield_rate=values.get("yield_rate", 0.0),
        rate=values.get("rate"),
        mc=mc,
        out=values.get("out"),
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration file.

    Raises :class:`ConfigError` listing every problem with its line number.
    """
    values, lines = parse_values(text)
    return build_config(values, lines)
