"""Scenario configuration: JSON files validated against ``config_schema.json``."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .basis import MAX_INHOMOGENEOUS_IONS
from .errors import ConfigError

ANALYTIC_METHODS = ("direct_sum", "closed_form", "asymptotic", "max_leading", "saturation")
DYNAMIC_METHODS = ("schrodinger", "lindblad")


def load_schema() -> dict:
    text = resources.files(__package__).joinpath("config_schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class Pulses:
    delta0_hz: float = 45e3
    lambda0_hz: float = 20e3
    gamma_hz: float = 1e3


@dataclass(frozen=True)
class Tolerances:
    fock_eps: float = 1e-12
    sector_eps: float = 1e-10
    block_eps: float = 1e-12
    rtol: float = 1e-11
    atol: float = 1e-13


@dataclass(frozen=True)
class Sweep:
    n_ions: tuple[int, ...] = ()
    r: tuple[float, ...] = ()
    gamma: tuple[float, ...] = ()
    alpha: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    """One scenario; sweep axes, when present, replace the scalar values.

    ``gamma_deph`` is the collective dephasing rate in units of ``lambda0``.
    """

    n_ions: int
    r: float
    phi: float = 0.0
    alpha: tuple[float, float] = (0.0, 0.0)
    pulses: Pulses = field(default_factory=Pulses)
    gamma_deph: float = 0.0
    mode: str = "com"
    methods: tuple[str, ...] = ("closed_form",)
    integrator: str = "dop853"
    fixed_steps: int = 2000
    tolerances: Tolerances = field(default_factory=Tolerances)
    sweep: Sweep = field(default_factory=Sweep)
    output: str | None = None
    deterministic: bool = False
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        validator = jsonschema.Draft202012Validator(load_schema())
        errors = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}"
                  for e in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.path)))]
        if errors:
            raise ConfigError(errors)
        sq = data["squeeze"]
        disp = data.get("displacement", {"re": 0.0, "im": 0.0})
        integ = data.get("integrator", {})
        sw = data.get("sweep", {})
        cfg = cls(
            n_ions=data["n_ions"],
            r=float(sq["r"]),
            phi=float(sq.get("phi", 0.0)),
            alpha=(float(disp["re"]), float(disp["im"])),
            pulses=Pulses(**{k: float(v) for k, v in data.get("pulses", {}).items()}),
            gamma_deph=float(data.get("dephasing", {}).get("gamma", 0.0)),
            mode=data.get("mode", "com"),
            methods=tuple(data.get("methods", ("closed_form",))),
            integrator=integ.get("method", "dop853"),
            fixed_steps=int(integ.get("fixed_steps", 2000)),
            tolerances=Tolerances(**{k: float(v) for k, v in data.get("tolerances", {}).items()}),
            sweep=Sweep(
                n_ions=tuple(int(x) for x in sw.get("n_ions", ())),
                r=tuple(float(x) for x in sw.get("r", ())),
                gamma=tuple(float(x) for x in sw.get("gamma", ())),
                alpha=tuple((float(a), float(b)) for a, b in sw.get("alpha", ())),
            ),
            output=data.get("output"),
            deterministic=bool(data.get("deterministic", False)),
            workers=int(data.get("workers", 1)),
        )
        cfg.check()
        return cfg

    def check(self) -> None:
        """Cross-field rules the schema cannot express."""
        errors = []
        ns = self.sweep.n_ions or (self.n_ions,)
        if self.mode == "breathing":
            if "lindblad" in self.methods:
                errors.append("methods: lindblad is implemented for the com mode only")
            if max(ns) > MAX_INHOMOGENEOUS_IONS:
                errors.append(f"n_ions: breathing mode supports at most {MAX_INHOMOGENEOUS_IONS} ions")
            if min(ns) < 2:
                errors.append("n_ions: breathing mode needs at least two ions")
        if errors:
            raise ConfigError(errors)

    def to_dict(self) -> dict:
        out = {
            "n_ions": self.n_ions,
            "squeeze": {"r": self.r, "phi": self.phi},
            "displacement": {"re": self.alpha[0], "im": self.alpha[1]},
            "pulses": asdict(self.pulses),
            "dephasing": {"gamma": self.gamma_deph},
            "mode": self.mode,
            "methods": list(self.methods),
            "integrator": {"method": self.integrator, "fixed_steps": self.fixed_steps},
            "tolerances": asdict(self.tolerances),
            "sweep": {k: [list(x) if isinstance(x, tuple) else x for x in v]
                      for k, v in asdict(self.sweep).items() if v},
            "deterministic": self.deterministic,
            "workers": self.workers,
        }
        if self.output is not None:
            out["output"] = self.output
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from exc
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror}"]) from exc
    return ScenarioConfig.from_dict(data)
