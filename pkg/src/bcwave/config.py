"""Strict JSON run configuration.

Schema (defaults in brackets):

    {
      "potential": {"kind": ..., ...params},   # or "response_csv": path
      "T": number,            # control horizon; response data live on [0, 2T]
      "n": int,               # steps per horizon T (>= 8)
      "spectral": {"N": [4T], "bc": [[1,0,1,0]], "cutoff": [400],
                   "mesh": [2048]},
      "stages": [all],        # subset of kernels response connect krein gl
                              # spectral
      "out": ["out"],
      "sign": ["derived"],    # or "paper" (left half-line q convention)
      "seed": [0]             # RNG seed for generated test controls
    }

Unknown keys anywhere are rejected by name; parse(write(cfg)) is the
identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError

ALL_STAGES = ("kernels", "response", "connect", "krein", "gl", "spectral")


@dataclass
class SpectralOptions:
    half_length: float
    bc: tuple
    cutoff: int
    mesh: int


@dataclass
class RunConfig:
    T: float
    n: int
    potential: dict | None = None
    response_csv: str | None = None
    spectral: SpectralOptions | None = None
    stages: tuple = ALL_STAGES
    out: str = "out"
    sign: str = "derived"
    seed: int = 0

    def __post_init__(self):
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if self.n < 8:
            raise ConfigError("n must be at least 8")
        if (self.potential is None) == (self.response_csv is None):
            raise ConfigError(
                "exactly one of 'potential' and 'response_csv' is required")
        if self.sign not in ("derived", "paper"):
            raise ConfigError("sign must be 'derived' or 'paper'")
        for st in self.stages:
            if st not in ALL_STAGES:
                raise ConfigError("unknown stage '%s'" % st)
        if self.spectral is None:
            self.spectral = SpectralOptions(4.0 * self.T, (1.0, 0.0, 1.0, 0.0),
                                            400, 2048)
        if "spectral" in self.stages and self.spectral.half_length <= self.T:
            raise ConfigError("spectral.N must exceed T")
        if self.response_csv is not None:
            forward = ("kernels", "response", "spectral")
            bad = [s for s in self.stages if s in forward]
            if bad and tuple(self.stages) != ALL_STAGES:
                raise ConfigError(
                    "stage '%s' needs a potential, not a response CSV" % bad[0])
            self.stages = tuple(s for s in self.stages
                                if s not in ("kernels", "response", "spectral"))


def _take(d: dict, allowed, where: str) -> None:
    for key in d:
        if key not in allowed:
            raise ConfigError("unknown key '%s' in %s" % (key, where))


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("invalid JSON: %s" % exc)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _take(raw, {"potential", "response_csv", "T", "n", "spectral", "stages",
                "out", "sign", "seed"}, "config")
    if "T" not in raw or "n" not in raw:
        raise ConfigError("config requires 'T' and 'n'")
    spec = None
    if "spectral" in raw:
        s = raw["spectral"]
        if not isinstance(s, dict):
            raise ConfigError("'spectral' must be an object")
        _take(s, {"N", "bc", "cutoff", "mesh"}, "spectral")
        bc = s.get("bc", [1.0, 0.0, 1.0, 0.0])
        if len(bc) != 4:
            raise ConfigError("spectral.bc must have 4 entries")
        spec = SpectralOptions(float(s.get("N", 4.0 * float(raw["T"]))),
                               tuple(float(v) for v in bc),
                               int(s.get("cutoff", 400)),
                               int(s.get("mesh", 2048)))
    pot = raw.get("potential")
    if pot is not None and not isinstance(pot, dict):
        raise ConfigError("'potential' must be an object")
    return RunConfig(
        T=float(raw["T"]),
        n=int(raw["n"]),
        potential=pot,
        response_csv=raw.get("response_csv"),
        spectral=spec,
        stages=tuple(raw.get("stages", ALL_STAGES)),
        out=str(raw.get("out", "out")),
        sign=str(raw.get("sign", "derived")),
        seed=int(raw.get("seed", 0)),
    )


def config_to_dict(cfg: RunConfig) -> dict:
    d = {"T": cfg.T, "n": cfg.n,
         "spectral": {"N": cfg.spectral.half_length,
                      "bc": list(cfg.spectral.bc),
                      "cutoff": cfg.spectral.cutoff,
                      "mesh": cfg.spectral.mesh},
         "stages": list(cfg.stages), "out": cfg.out, "sign": cfg.sign,
         "seed": cfg.seed}
    if cfg.potential is not None:
        d["potential"] = cfg.potential
    else:
        d["response_csv"] = cfg.response_csv
    return d


def write_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
