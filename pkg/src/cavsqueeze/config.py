"""Run configuration: presets, flat ``key = value`` files and flag overrides."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .atomfield import PhysicalParams, derive_effective
from .errors import ConfigParseError, ConfigValidationError

EXPERIMENTS = ("table1", "effective-params", "ladder", "sdns", "sscs", "wigner", "validate", "sweep")

# Rydberg-atom microwave cavity; the cavity frequency (2 pi x 51.1 GHz) only
# enters the bare frame.
PRESETS = {
    "paper": {
        "omega": 2 * math.pi * 51.1e9,
        "lambda_g": 7e5,
        "lambda_e": 7e5,
        "Omega": 7e5,
        "delta": 1e7,
        "Delta": "resonant",
    },
}

PARAM_KEYS = ("omega", "lambda_g", "lambda_e", "Omega", "delta", "Delta")
COMPLEX_PARAMS = ("lambda_g", "lambda_e", "Omega")


def parse_complex(text: str) -> complex:
    """Parse ``"re,im"``, ``"re"`` or a Python complex literal."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip()
    if "," in s:
        re_s, im_s = s.split(",", 1)
        return complex(float(re_s), float(im_s))
    return complex(s.replace(" ", ""))


def _float(s):
    return float(s)


def _int(s):
    val = float(s)
    if val != int(val):
        raise ValueError(f"{s!r} is not an integer")
    return int(val)


def _floats(n):
    def conv(s):
        parts = [float(x) for x in str(s).split(",")]
        if len(parts) != n:
            raise ValueError(f"expected {n} comma-separated numbers, got {s!r}")
        return tuple(parts)

    return conv


def _choice(*opts):
    def conv(s):
        if s not in opts:
            raise ValueError(f"{s!r} not in {opts}")
        return s

    return conv


def _grid(s):
    vals = _floats(6)(s)
    return (vals[0], vals[1], vals[2], vals[3], int(vals[4]), int(vals[5]))


def _sweep_range(s):
    start, stop, num = _floats(3)(s)
    return (start, stop, int(num))


# experiment options: name -> (converter, default)
OPTIONS = {
    "n": (_int, 0),
    "alpha": (parse_complex, 0j),
    "t_squeeze": (_float, 1e-4),
    "r": (_float, None),
    "simulate": (_choice("ideal", "effective", "full"), "ideal"),
    "convention": (_choice("standard", "paper-literal"), "standard"),
    "m": (_int, 3),
    "mode": (_choice("deterministic", "monte-carlo"), "deterministic"),
    "trials": (_int, 0),
    "seed": (_int, None),
    "c_g": (parse_complex, 1 + 0j),
    "c_e": (parse_complex, 1 + 0j),
    "sign": (_choice("+", "-"), "+"),
    "grid": (_grid, (-4.0, 4.0, -4.0, 4.0, 81, 81)),
    "state": (_choice("sscs", "sdns"), "sscs"),
    "t": (_float, 1e-5),
    "samples": (_int, 10),
    "frame": (_choice("interaction", "rotating", "bare"), "interaction"),
    "delta_scale": (_float, 10.0),
    "validate_dim": (_int, 64),
    "sweep_var": (_choice("Omega", "lambda_g", "lambda_e", "delta", "t_squeeze"), "Omega"),
    "sweep_range": (_sweep_range, (0.0, 1e6, 11)),
    "workers": (_int, 1),
    "wigner": (lambda s: str(s).lower() in ("1", "true", "yes", "on"), False),
}

DEFAULT_DIM = 512
# the default sweep reaches r ~ 1.96, whose squeezed states need a larger basis
EXPERIMENT_DIM = {"sweep": 1024}
DEFAULT_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: PhysicalParams
    resonant: bool
    dim: int = DEFAULT_DIM
    tail_tol: float = DEFAULT_TAIL_TOL
    options: dict = field(default_factory=dict)
    preset: str | None = None

    def opt(self, name):
        if name in self.options:
            return self.options[name]
        return OPTIONS[name][1]

    def echo(self) -> dict:
        """JSON-friendly, canonical view of the configuration."""
        p = self.params
        return {
            "experiment": self.experiment,
            "preset": self.preset,
            "params": {k: _jsonable(getattr(p, k)) for k in PARAM_KEYS},
            "Delta_resonant": self.resonant,
            "dim": self.dim,
            "tail_tol": self.tail_tol,
            "options": {k: _jsonable(v) for k, v in sorted(self.options.items())},
        }

    def hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else [v.real, v.imag]
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise ConfigParseError(f"{path}: no such config file")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if not key:
            raise ConfigParseError(f"{path}:{lineno}: empty key")
        out[key] = (val, f"{path}:{lineno}")
    return out


def parse_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a validated RunConfig from defaults, an optional file and overrides.

    Precedence: preset < config file < overrides.  ``overrides`` values may be
    strings (as typed on a command line) or already-typed values; keys use
    underscores.
    """
    raw = {}
    if path is not None:
        raw.update(read_config_file(path))
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k.replace("-", "_")] = (v, f"--{k.replace('_', '-')}")

    def take(key):
        return raw.pop(key, (None, None))

    preset, _ = take("preset")
    values = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigParseError(f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
        values.update(PRESETS[preset])

    problems = []
    typed = {}
    for key, (val, where) in list(raw.items()):
        try:
            if key in PARAM_KEYS:
                if key == "Delta" and str(val).strip() == "resonant":
                    values[key] = "resonant"
                elif key in COMPLEX_PARAMS:
                    values[key] = parse_complex(val)
                else:
                    values[key] = float(val)
            elif key == "experiment":
                typed["experiment"] = str(val)
            elif key == "dim":
                typed["dim"] = _int(val)
            elif key == "tail_tol":
                typed["tail_tol"] = float(val)
            elif key in OPTIONS:
                conv = OPTIONS[key][0]
                typed.setdefault("options", {})[key] = val if not isinstance(val, str) else conv(val)
            else:
                raise ConfigParseError(f"{where}: unknown key {key!r}")
        except ConfigParseError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigParseError(f"{where}: cannot parse {key!r}: {exc}") from None

    experiment = typed.get("experiment")
    if experiment is None:
        problems.append("missing experiment")
    elif experiment not in EXPERIMENTS:
        problems.append(f"unknown experiment {experiment!r}; choose from {EXPERIMENTS}")
    for key in PARAM_KEYS:
        if key not in values:
            problems.append(f"missing parameter {key} (use --preset paper or set it)")
    dim = typed.get("dim", EXPERIMENT_DIM.get(experiment, DEFAULT_DIM))
    if dim < 2:
        problems.append(f"dim must be >= 2, got {dim}")
    tail_tol = typed.get("tail_tol", DEFAULT_TAIL_TOL)
    if not 0 < tail_tol < 1:
        problems.append(f"tail_tol must lie in (0, 1), got {tail_tol}")
    for key in PARAM_KEYS:
        v = values.get(key)
        if v is None or v == "resonant":
            continue
        if not (math.isfinite(abs(v))):
            problems.append(f"parameter {key} must be finite, got {v}")
    if values.get("delta") == 0:
        problems.append("delta must be nonzero")
    options = typed.get("options", {})
    for key in ("t_squeeze", "t"):
        if key in options and not (math.isfinite(options[key]) and options[key] >= 0):
            problems.append(f"{key} must be a finite time >= 0")
    if "m" in options and options["m"] < 1:
        problems.append("m must be >= 1")
    if problems:
        raise ConfigValidationError(problems)

    resonant = values["Delta"] == "resonant"
    p = PhysicalParams(
        omega=float(values["omega"]),
        lambda_g=complex(values["lambda_g"]),
        lambda_e=complex(values["lambda_e"]),
        Omega=complex(values["Omega"]),
        delta=float(values["delta"]),
        Delta=0.0 if resonant else float(values["Delta"]),
    )
    if resonant:
        p = p.with_resonant_drive()
    return RunConfig(experiment, p, resonant, dim, tail_tol, options, preset)


def effective_t_squeeze(cfg: RunConfig, params: PhysicalParams | None = None) -> float:
    """Squeeze time, derived from the ``r`` option when given (t = r / 2|xi|)."""
    r = cfg.opt("r")
    if r is None:
        return cfg.opt("t_squeeze")
    xi = abs(derive_effective(params or cfg.params).xi)
    if xi == 0:
        raise ConfigValidationError("option r needs a nonzero effective squeeze amplitude")
    return r / (2.0 * xi)
