"""Experiment configuration: plain ``key = value`` lines, one ``d = N`` line per degree."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..errors import ConfigError

KINDS = ("zeros", "crit", "minima", "fold", "cusp", "components", "semicont", "coupled",
         "knot", "kacrice", "scaling")

# option name -> (type, lower bound, upper bound); bounds are inclusive
OPTIONS = {
    "h": (float, 1e-4, 0.1),
    "dprime": (int, 1, 1000),
    "omega": (float, 0.0, 1000.0),
    "eps": (float, 0.0, 10.0),
    "mode": (str, None, None),
    "directions": (int, 0, 1000),
    "n_points": (int, 16, 1 << 16),
    "representation": (str, None, None),
    "mc_samples": (int, 100, 10 ** 7),
    "base": (str, None, None),
    "resolution_check": (bool, None, None),
    "D": (int, 1, 200),
}

_DEFAULT_MK = {
    "zeros": (1, 1), "crit": (1, 1), "minima": (1, 1), "fold": (2, 2), "cusp": (2, 2),
    "components": (2, 1), "semicont": (1, 1), "coupled": (2, 1), "knot": (2, 3),
    "kacrice": (1, 1), "scaling": (1, 1),
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    degrees: tuple
    trials: int
    seed: int = 0
    m: int | None = None
    k: int | None = None
    experiment_id: str | None = None
    options: dict = field(default_factory=dict)
    out: str = "out"
    timing: bool = False
    threads: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}", key="experiment")
        m, k = _DEFAULT_MK[self.kind]
        object.__setattr__(self, "m", m if self.m is None else self.m)
        object.__setattr__(self, "k", k if self.k is None else self.k)
        if self.experiment_id is None:
            object.__setattr__(self, "experiment_id", self.kind)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1", key="trials")
        if not self.degrees:
            raise ConfigError("at least one degree is required", key="d")
        if any(b <= a for a, b in zip(self.degrees, self.degrees[1:])):
            raise ConfigError("degree list must be strictly increasing", key="d")
        if min(self.degrees) < 1:
            raise ConfigError("degrees must be >= 1", key="d")
        if self.m < 1 or self.k < 1:
            raise ConfigError("m and k must be >= 1", key="m" if self.m < 1 else "k")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", key="seed")
        for key, value in self.options.items():
            _check_option(key, value)

    def option(self, key, default=None):
        return self.options.get(key, default)

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _check_option(key, value, line=None):
    if key not in OPTIONS:
        raise ConfigError("unknown key", line=line, key=key)
    _, lo, hi = OPTIONS[key]
    if lo is not None and not lo <= value <= hi:
        raise ConfigError(f"value {value!r} outside [{lo}, {hi}]", line=line, key=key)


def _convert(kind, raw, line, key):
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        return kind(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} as {kind.__name__}", line=line, key=key) from None


_CORE = {"experiment": str, "id": str, "m": int, "k": int, "trials": int, "seed": int,
         "out": str, "timing": bool, "threads": int}


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; errors carry the line number and key."""
    core, degrees, options = {}, [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError("missing value", line=lineno, key=key)
        if key == "d":
            degrees.append(_convert(int, value, lineno, key))
        elif key in _CORE:
            if key in core:
                raise ConfigError("duplicate key", line=lineno, key=key)
            core[key] = _convert(_CORE[key], value, lineno, key)
        elif key in OPTIONS:
            options[key] = _convert(OPTIONS[key][0], value, lineno, key)
            _check_option(key, options[key], lineno)
        else:
            raise ConfigError("unknown key", line=lineno, key=key)
    if "experiment" not in core:
        raise ConfigError("missing required key", key="experiment")
    if "trials" not in core:
        raise ConfigError("missing required key", key="trials")
    return ExperimentConfig(kind=core["experiment"], degrees=tuple(degrees),
                            trials=core["trials"], seed=core.get("seed", 0), m=core.get("m"),
                            k=core.get("k"), experiment_id=core.get("id"), options=options,
                            out=core.get("out", "out"), timing=core.get("timing", False),
                            threads=core.get("threads"))


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def format_config(cfg: ExperimentConfig) -> str:
    lines = [f"experiment = {cfg.kind}", f"id = {cfg.experiment_id}", f"m = {cfg.m}",
             f"k = {cfg.k}", f"trials = {cfg.trials}", f"seed = {cfg.seed}"]
    lines += [f"d = {d}" for d in cfg.degrees]
    lines += [f"{k} = {str(v).lower() if isinstance(v, bool) else v}"
              for k, v in sorted(cfg.options.items())]
    return "\n".join(lines) + "\n"
