"""Run configuration: flat key=value files with section prefixes, plus the
two experiment presets.

Unknown keys are configuration errors.  Every key has a default; presets
only override.  The `seed` key is parsed and reserved (the pipeline is
deterministic).
"""

from dataclasses import dataclass, field, replace
from pathlib import Path

from .integrators import SolverOptions
from .lattice import LatticeConfig


class ConfigError(ValueError):
    """Malformed, unknown, or inconsistent configuration input."""


@dataclass(frozen=True)
class PodSettings:
    """Basis truncation: energy tolerances, overridden by fixed mode counts."""

    kappa_state: float = 1e-4
    kappa_nonlin: float = 1e-6
    n_r: int | None = None
    n_d: int | None = None


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "custom"
    n_sites: int = 200
    half_length: float = 50.0
    gamma: float = 1.0
    mu: float = 0.0
    dt: float = 0.01
    t_final: float = 50.0
    eta: float = 0.05
    xi: float = 0.5
    phase: float = 20.0
    snapshot_stride: int = 5
    pod: PodSettings = field(default_factory=PodSettings)
    solver: SolverOptions = field(default_factory=SolverOptions)
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        if self.snapshot_stride < 1:
            raise ConfigError("snapshots.stride must be at least 1")
        if self.experiment not in ("conservative_soliton", "damped_soliton", "custom"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")

    def lattice(self) -> LatticeConfig:
        try:
            return LatticeConfig(
                n_sites=self.n_sites,
                half_length=self.half_length,
                gamma=self.gamma,
                mu=self.mu,
                dt=self.dt,
                t_final=self.t_final,
            )
        except ValueError as err:
            raise ConfigError(str(err)) from None

    def initial_state(self):
        from . import lattice

        if self.mu == 0.0:
            return lattice.initial_soliton_conservative(self.lattice(), self.eta, self.xi)
        return lattice.initial_soliton_damped(self.lattice(), self.phase)


# fixed mode counts 21/21: the state criterion at kappa = 1e-4 does give 21
# modes, but the nonlinearity snapshots are dominated by their constant
# offset and the energy criterion saturates at one mode, so the DEIM count
# is pinned explicitly
CONSERVATIVE_PRESET = RunConfig(
    experiment="conservative_soliton",
    n_sites=200,
    half_length=50.0,
    gamma=1.0,
    mu=0.0,
    dt=0.01,
    t_final=50.0,
    eta=0.05,
    xi=0.5,
    snapshot_stride=5,
    pod=PodSettings(kappa_state=1e-4, kappa_nonlin=1e-6, n_r=21, n_d=21),
)

# gamma = 0.5 makes the damped initial profile an exact one-soliton of the
# matching continuum equation (amplitude sqrt(2)*eta with eta = 1/2); with
# gamma = 1 the profile breathes and radiates instead of decaying cleanly
DAMPED_PRESET = RunConfig(
    experiment="damped_soliton",
    n_sites=512,
    half_length=64.0,
    gamma=0.5,
    mu=0.01,
    dt=0.01,
    t_final=60.0,
    phase=20.0,
    snapshot_stride=5,
    pod=PodSettings(kappa_state=1e-5, kappa_nonlin=1e-7, n_r=40, n_d=49),
)

PRESETS = {
    "conservative_soliton": CONSERVATIVE_PRESET,
    "damped_soliton": DAMPED_PRESET,
}

# key -> (target dataclass field, parser)
_KEYS = {
    "experiment": ("experiment", str),
    "lattice.n_sites": ("n_sites", int),
    "lattice.half_length": ("half_length", float),
    "lattice.gamma": ("gamma", float),
    "lattice.mu": ("mu", float),
    "lattice.dt": ("dt", float),
    "lattice.t_final": ("t_final", float),
    "initial.eta": ("eta", float),
    "initial.xi": ("xi", float),
    "initial.phase": ("phase", float),
    "snapshots.stride": ("snapshot_stride", int),
    "pod.kappa_state": ("kappa_state", float),
    "pod.kappa_nonlin": ("kappa_nonlin", float),
    "pod.n_r": ("n_r", int),
    "pod.n_d": ("n_d", int),
    "solver.abs_tol": ("abs_tol", float),
    "solver.max_iters": ("max_iters", int),
    "solver.strategy": ("strategy", str),
    "output_dir": ("output_dir", str),
    "seed": ("seed", int),
}

_POD_FIELDS = {"kappa_state", "kappa_nonlin", "n_r", "n_d"}
_SOLVER_FIELDS = {"abs_tol", "max_iters", "strategy"}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse key=value lines ('#' comments allowed) on top of `base`."""
    cfg = base if base is not None else RunConfig()
    plain: dict = {}
    pod: dict = {}
    solver: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, parser = _KEYS[key]
        try:
            parsed = parser(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: cannot parse {value!r} for {key}") from None
        if attr in _POD_FIELDS:
            pod[attr] = parsed
        elif attr in _SOLVER_FIELDS:
            solver[attr] = parsed
        else:
            plain[attr] = parsed
    try:
        if pod:
            plain["pod"] = replace(cfg.pod, **pod)
        if solver:
            plain["solver"] = replace(cfg.solver, **solver)
        return replace(cfg, **plain)
    except ValueError as err:
        raise ConfigError(str(err)) from None


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return parse_config(Path(path).read_text(), base=base)


def preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}") from None
