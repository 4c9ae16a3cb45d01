"""Experiment configuration, orchestration, and figure reproduction.

A run is fully described by a JSON document with the keys

    system, sigma, stepper, y0, h, T, n_paths, seed, truncation, tracks,
    output_dir

(unknown keys are rejected with their path).  Re-running the same config
produces byte-identical CSV/SVG output; the emitted manifest echoes the
config, hashes every artifact, and hashes the combination, so it suffices
to reproduce a run exactly.

Three canned configurations reproduce the long-term conservation studies:

* ``fig1`` -- pendulum, three proportional noises (0.01, 0.02, 0.03),
  implicit midpoint, y0 = (1, 2), T = 2000, h in {0.1, 0.2, 0.4, 0.8},
  tracking the Hamiltonian deviation;
* ``fig2`` -- double-well noise pair (0.01, 0.01), midpoint, y0 = (0, 1),
  T = 2000, h in {0.001, 0.01, 0.1}, tracking the cumulative
  random-Hamiltonian residual;
* ``fig3`` -- maxwell-bloch (0.01, 0.01), splitting scheme, y0 = (0, 0, 1),
  h = 0.1, T = 1e5, same tracking, plotted at exactly 1000 equidistant
  step points.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .brownian import SeedSpec, TruncationPolicy, sample_increments, truncate_increments
from .diagnostics import functional_drift, strong_order_estimate
from .emit import equidistant_indices, file_sha256, svg_line_plot, write_csv
from .errors import ConfigError
from .integrators import TRACK_NAMES, integrate, make_stepper
from .systems import make_system

__all__ = ["ExperimentConfig", "OutputBundle", "parse_config", "load_config",
           "run", "run_order_study", "reproduce", "FIGURES", "default_output_dir"]

_TOP_KEYS = {"system", "sigma", "stepper", "y0", "h", "T", "n_paths", "seed",
             "truncation", "tracks", "output_dir"}
_TRUNC_KEYS = {"enabled", "rho"}
_MAX_STEPS = 2 ** 31


def default_output_dir() -> Path:
    return Path(os.environ.get("SPINT_OUT", "spint-out"))


@dataclass(frozen=True)
class ExperimentConfig:
    system: str
    stepper: str
    y0: tuple[float, ...]
    h_values: tuple[float, ...]
    T: float
    sigma: tuple[float, ...] | None = None
    n_paths: int = 1
    seed: int = 12345
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    tracks: tuple[str, ...] = ()
    output_dir: Path = field(default_factory=default_output_dir)

    def as_dict(self) -> dict:
        return {
            "system": self.system,
            "sigma": list(self.sigma) if self.sigma is not None else None,
            "stepper": self.stepper,
            "y0": list(self.y0),
            "h": list(self.h_values),
            "T": self.T,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "truncation": {"enabled": self.truncation.enabled,
                           "rho": self.truncation.rho},
            "tracks": list(self.tracks),
            "output_dir": str(self.output_dir),
        }


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a JSON document; unknown or ill-typed keys fail with a path."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", key="$")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}",
                          key=sorted(unknown)[0])
    for required in ("system", "stepper", "y0", "h", "T"):
        if required not in doc:
            raise ConfigError(f"missing required key {required!r}", key=required)

    sigma = doc.get("sigma")
    if sigma is not None:
        sigma = tuple(float(s) for s in sigma)
        if any(s < 0 for s in sigma):
            raise ConfigError("sigma entries must be >= 0", key="sigma")

    h_raw = doc["h"]
    h_values = tuple(float(v) for v in (h_raw if isinstance(h_raw, (list, tuple))
                                        else [h_raw]))
    if any(h <= 0 for h in h_values):
        raise ConfigError("step sizes must be positive", key="h")

    t_final = float(doc["T"])
    if t_final <= 0:
        raise ConfigError("T must be positive", key="T")
    for h in h_values:
        if round(t_final / h) > _MAX_STEPS:
            raise ConfigError(f"T/h = {t_final / h:.3g} exceeds the step budget",
                              key="T")

    n_paths = int(doc.get("n_paths", 1))
    if n_paths < 1:
        raise ConfigError("n_paths must be >= 1", key="n_paths")

    trunc_doc = doc.get("truncation", {})
    if not isinstance(trunc_doc, dict):
        raise ConfigError("truncation must be an object", key="truncation")
    bad = set(trunc_doc) - _TRUNC_KEYS
    if bad:
        raise ConfigError(f"unknown truncation keys {sorted(bad)}",
                          key=f"truncation.{sorted(bad)[0]}")
    try:
        truncation = TruncationPolicy(rho=float(trunc_doc.get("rho", 1.0)),
                                      enabled=bool(trunc_doc.get("enabled", False)))
    except ValueError as exc:
        raise ConfigError(str(exc), key="truncation.rho") from exc

    tracks = tuple(doc.get("tracks", ()))
    bad_tracks = set(tracks) - set(TRACK_NAMES)
    if bad_tracks:
        raise ConfigError(f"unknown tracks {sorted(bad_tracks)}; "
                          f"available: {TRACK_NAMES}", key="tracks")

    return ExperimentConfig(
        system=str(doc["system"]),
        sigma=sigma,
        stepper=str(doc["stepper"]),
        y0=tuple(float(v) for v in doc["y0"]),
        h_values=h_values,
        T=t_final,
        n_paths=n_paths,
        seed=int(doc.get("seed", 12345)),
        truncation=truncation,
        tracks=tracks,
        output_dir=Path(doc["output_dir"]) if "output_dir" in doc
        else default_output_dir())


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}", key="$") from exc
    return parse_config(doc)


@dataclass
class OutputBundle:
    """Paths produced by a run plus the manifest that reproduces it."""

    csv_paths: list[Path]
    svg_paths: list[Path]
    manifest_path: Path

    @property
    def all_paths(self):
        return self.csv_paths + self.svg_paths + [self.manifest_path]


def _h_tag(h: float) -> str:
    return f"h{h:g}"


def _drift_label(functional: str) -> str:
    return {"hamiltonian": "hamiltonian",
            "rh-cum": "random-hamiltonian"}.get(functional, functional)


def run(config: ExperimentConfig, out_dir: Path | None = None,
        csv_points: int | None = None, svg_points: int | None = 2000,
        tag: str = "run") -> OutputBundle:
    """Integrate every (h, trajectory) cell and emit CSVs, SVGs, manifest.

    ``csv_points``/``svg_points`` subsample emitted series to at most that
    many equidistant step points (None = full resolution / default cap).
    """
    sys = make_system(config.system, sigma=config.sigma)
    stepper = make_stepper(config.stepper)
    out = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    csv_paths: list[Path] = []
    svg_paths: list[Path] = []
    for h in config.h_values:
        n_steps = int(round(config.T / h))
        drift_rows = []
        for path_id in range(config.n_paths):
            batch = sample_increments(SeedSpec(config.seed, path_id), h, sys.m, n_steps)
            batch = truncate_increments(batch, config.truncation)
            traj = integrate(sys, stepper, np.asarray(config.y0), h, n_steps,
                             batch, tracks=config.tracks)
            if not config.tracks:
                rows = np.column_stack([traj.t, traj.states])
                csv_paths.append(write_csv(
                    out / f"{tag}_states_{_h_tag(h)}_traj{path_id}.csv",
                    ["t"] + [f"y{i + 1}" for i in range(sys.d)], rows))
                continue
            for name in sorted(traj.functionals):
                if name == "rh-step":
                    continue
                series = functional_drift(traj, "random-hamiltonian"
                                          if name == "rh-cum" else name)
                idx = (equidistant_indices(len(series.t), csv_points)
                       if csv_points else np.arange(len(series.t)))
                label = _drift_label(name)
                drift_rows.extend(
                    (series.t[i], series.values[i], path_id, label) for i in idx)
                svg_paths.append(out / f"{tag}_{label}_{_h_tag(h)}_traj{path_id}.svg")
                svg_line_plot(svg_paths[-1], series.t[idx], series.values[idx],
                              f"{config.system} {config.stepper} {label} h={h:g}",
                              max_points=svg_points)
            if "rh-step" in traj.functionals and "random-hamiltonian" in config.tracks:
                # raw per-step residuals ride along for the step-local reading
                steps = traj.functionals["rh-step"]
                idx = (equidistant_indices(len(steps), csv_points)
                       if csv_points else np.arange(len(steps)))
                drift_rows.extend(
                    (traj.t[i + 1], steps[i], path_id, "rh-step") for i in idx)
        if drift_rows:
            csv_paths.append(write_csv(
                out / f"{tag}_drift_{_h_tag(h)}.csv",
                ["t", "value", "trajectory_id", "functional"], drift_rows))

    manifest_path = _write_manifest(out / f"{tag}_manifest.json", config,
                                    csv_paths + svg_paths)
    return OutputBundle(csv_paths=csv_paths, svg_paths=svg_paths,
                        manifest_path=manifest_path)


def run_order_study(config: ExperimentConfig, out_dir: Path | None = None,
                    tag: str = "order") -> tuple[OutputBundle, object]:
    """Strong-order estimate over the config's h list; emits the order CSV."""
    sys = make_system(config.system, sigma=config.sigma)
    stepper = make_stepper(config.stepper)
    out = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    estimate = strong_order_estimate(sys, stepper, np.asarray(config.y0), config.T,
                                     config.h_values, n_paths=config.n_paths,
                                     seed=config.seed)
    rows = [(h, e, w, estimate.n_paths) for h, e, w in
            zip(estimate.h_values, estimate.errors, estimate.half_widths)]
    csv_path = write_csv(out / f"{tag}.csv",
                         ["h", "mean_error", "half_width", "n_paths"], rows)
    manifest = _write_manifest(out / f"{tag}_manifest.json", config, [csv_path])
    return OutputBundle(csv_paths=[csv_path], svg_paths=[],
                        manifest_path=manifest), estimate


def _write_manifest(path: Path, config: ExperimentConfig, outputs) -> Path:
    config_doc = config.as_dict()
    hashes = {str(p.name): file_sha256(p) for p in outputs}
    combined = hashlib.sha256(
        (json.dumps(config_doc, sort_keys=True)
         + json.dumps(hashes, sort_keys=True)).encode()).hexdigest()
    doc = {"config": config_doc, "seed": config.seed, "outputs": hashes,
           "content_hash": combined}
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# canned figure configurations
# ---------------------------------------------------------------------------

def _fig1_config(output_dir) -> ExperimentConfig:
    return ExperimentConfig(
        system="pendulum", sigma=(0.01, 0.02, 0.03), stepper="midpoint",
        y0=(1.0, 2.0), h_values=(0.1, 0.2, 0.4, 0.8), T=2000.0,
        seed=1001, tracks=("hamiltonian",), output_dir=Path(output_dir))


def _fig2_config(output_dir) -> ExperimentConfig:
    return ExperimentConfig(
        system="double-well", sigma=(0.01, 0.01), stepper="midpoint",
        y0=(0.0, 1.0), h_values=(0.001, 0.01, 0.1), T=2000.0,
        seed=1002, tracks=("random-hamiltonian",), output_dir=Path(output_dir))


def _fig3_config(output_dir) -> ExperimentConfig:
    return ExperimentConfig(
        system="maxwell-bloch", sigma=(0.01, 0.01), stepper="mb-splitting",
        y0=(0.0, 0.0, 1.0), h_values=(0.1,), T=1e5,
        seed=1003, tracks=("random-hamiltonian",), output_dir=Path(output_dir))


FIGURES = {"fig1": _fig1_config, "fig2": _fig2_config, "fig3": _fig3_config}


def reproduce(figure: str, out_dir: Path | None = None) -> OutputBundle:
    """Run one of the canned long-term conservation studies.

    ``fig3`` emits exactly 1000 equidistant step points; ``fig2`` output is
    capped at 2000 points per series to keep artifacts desk-scale (the
    underlying runs are full-resolution either way).
    """
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}; known: {sorted(FIGURES)}",
                          key="figure")
    base = out_dir if out_dir is not None else default_output_dir()
    config = FIGURES[figure](Path(base))
    if figure == "fig1":
        return run(config, csv_points=None, svg_points=2000, tag=figure)
    if figure == "fig2":
        return run(config, csv_points=2000, svg_points=2000, tag=figure)
    return run(config, csv_points=1000, svg_points=1000, tag=figure)
