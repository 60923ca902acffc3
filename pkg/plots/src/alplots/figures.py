"""Figure rendering from the simulation pipeline's CSV outputs.

A FigureSpec names a figure kind, its input CSVs, and the output image.
Four kinds cover all figure analogues:

    spectrum                  normalized singular-value decay, log scale
    invariant_traces          H and I over time, normalized by initial value
    solution_profiles         initial/final moduli plus the error series
    damped_invariant_balance  log-scale invariant decay plus balance residuals

No physics is computed here; everything is read from CSV.  Rendering is
deterministic: fixed figure size, dpi, and axes.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("spectrum", "invariant_traces", "solution_profiles",
         "damped_invariant_balance")

FIGSIZE = (8.0, 4.5)
DPI = 150


class SchemaError(ValueError):
    """Missing file or missing column in an input CSV."""


@dataclass
class FigureSpec:
    kind: str
    inputs: dict[str, str]
    output: str
    title: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")

    @staticmethod
    def from_file(path) -> "FigureSpec":
        raw = json.loads(Path(path).read_text())
        return FigureSpec(
            kind=raw["kind"],
            inputs=raw["inputs"],
            output=raw["output"],
            title=raw.get("title", ""),
            options=raw.get("options", {}),
        )


def read_csv(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input CSV not found: {path}")
    lines = path.read_text().strip().splitlines()
    names = lines[0].split(",")
    for column in required:
        if column not in names:
            raise SchemaError(f"{path}: missing column {column!r}")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return {name: data[:, j] for j, name in enumerate(names)}


def fitted_log_slope(times: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of ln|Q| against t."""
    return float(np.polyfit(times, np.log(np.abs(values)), 1)[0])


def _render_spectrum(spec, axes):
    ax = axes[0]
    for label, path in sorted(spec.inputs.items()):
        data = read_csv(path, ("index", "normalized"))
        ax.semilogy(data["index"], data["normalized"], label=label)
    ax.set_xlabel("mode index")
    ax.set_ylabel("normalized singular value")
    ax.legend()
    return {}


def _render_invariant_traces(spec, axes):
    meta = {}
    for ax, column in zip(axes, ("hamiltonian", "momentum")):
        for label, path in sorted(spec.inputs.items()):
            data = read_csv(path, ("time", column))
            series = data[column] / data[column][0]
            ax.plot(data["time"], series, label=label)
            meta[f"{label}_{column}_max_drift"] = float(
                np.max(np.abs(series - 1.0)))
        ax.set_xlabel("t")
        ax.set_ylabel(f"{column} / initial")
        ax.legend()
    return meta


def _render_solution_profiles(spec, axes):
    for ax, stage in zip(axes, ("initial", "final")):
        for label in ("fom", "rom"):
            data = read_csv(spec.inputs[f"{label}_{stage}"], ("x", "modulus"))
            ax.plot(data["x"], data["modulus"],
                    label=f"{label} t={'0' if stage == 'initial' else 'T'}")
        ax.set_xlabel("x")
        ax.set_ylabel("|psi|")
        ax.legend()
    err = read_csv(spec.inputs["error_series"], ("time", "relative_error"))
    axes[2].semilogy(err["time"], np.maximum(err["relative_error"], 1e-17))
    axes[2].set_xlabel("t")
    axes[2].set_ylabel("relative error")
    return {}


def _render_damped_invariant_balance(spec, axes):
    quantity = spec.options.get("quantity", "hamiltonian")
    inv = read_csv(spec.inputs["invariants"], ("time", quantity))
    axes[0].semilogy(inv["time"], np.abs(inv[quantity]))
    axes[0].set_xlabel("t")
    axes[0].set_ylabel(f"|{quantity}|")
    bal = read_csv(spec.inputs["balance"], ("time", "residual"))
    axes[1].semilogy(bal["time"], np.maximum(np.abs(bal["residual"]), 1e-17))
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("|balance residual|")
    return {"log_slope": fitted_log_slope(inv["time"], inv[quantity])}


_PANELS = {"spectrum": 1, "invariant_traces": 2, "solution_profiles": 3,
           "damped_invariant_balance": 2}
_RENDERERS = {
    "spectrum": _render_spectrum,
    "invariant_traces": _render_invariant_traces,
    "solution_profiles": _render_solution_profiles,
    "damped_invariant_balance": _render_damped_invariant_balance,
}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns metadata (fitted slopes, drifts)."""
    n_panels = _PANELS[spec.kind]
    fig, axes = plt.subplots(1, n_panels, figsize=FIGSIZE, dpi=DPI)
    axes = np.atleast_1d(axes)
    try:
        meta = _RENDERERS[spec.kind](spec, axes)
        if spec.title:
            fig.suptitle(spec.title)
        fig.tight_layout()
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
    finally:
        plt.close(fig)
    meta["output"] = str(spec.output)
    return meta
