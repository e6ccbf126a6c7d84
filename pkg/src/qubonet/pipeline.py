"""Run orchestration: normalized configs in, JSON-able artifact bundles out.

Every default is echoed into the returned metadata so a run is reproducible
from its metadata alone.
"""

from __future__ import annotations

import hashlib
import json
from typing import Mapping

import numpy as np

from . import __version__
from .compiler import CompiledModel, compile_model, decode_solution
from .data import Dataset, GENERATORS, gen_dataset, dumps_csv, loads_csv
from .errors import ConfigError, SolverError
from .evaluate import (
    classical_train,
    compare,
    decision_grid,
    grid_csv,
    roc_auc,
)
from .network import ACTIVATION_PRESETS, ActivationPoly, NetworkShape, activation_preset
from .polynomial import MultilinearPoly, Basis
from .quadratize import quadratize, verify_reduction
from .solvers import (
    AnnealSchedule,
    Sample,
    SamplerConfig,
    best_of,
    exact_solve,
    remote_sample,
    sa_sample,
)

VERIFY_MAX_VARS = 22

_SHAPE_DEFAULTS: dict = {
    "features": 2,
    "hidden": 2,
    "bits": 1,
    "activation": "square",
    "first_layer_bias": False,
    "last_bias_levels": [-0.5, 0.0],
}

_DATASET_DEFAULTS: dict = {
    "kind": "generated",
    "name": "circles",
    "n": 200,
    "noise": 0.1,
    "seed": 0,
}

_CSV_DATASET_DEFAULTS: dict = {
    "kind": "csv",
    "text": "",
    "label_col": "label",
    "feature_cols": None,
    "label_map": None,
}

_COMPILE_DEFAULTS: dict = {
    **_SHAPE_DEFAULTS,
    "dataset": _DATASET_DEFAULTS,
    "lambda": None,
    "path": "auto",
}

_TRAIN_DEFAULTS: dict = {
    **_COMPILE_DEFAULTS,
    "solver": "exact",
    "reads": 300,
    "seed": 0,
    "sweeps": 1000,
    "beta_range": None,
    "schedule": AnnealSchedule.with_pause().to_doc(),
    "max_vars": 28,
    "endpoint": None,
    "resolution": 41,
}

_COMPARE_DEFAULTS: dict = {
    **_TRAIN_DEFAULTS,
    "omega": 5.0,
    "runs": 10,
    "classical_seed": 0,
    "lr": 0.05,
    "steps": 3000,
}

TASK_DEFAULTS = {
    "compile": _COMPILE_DEFAULTS,
    "train": _TRAIN_DEFAULTS,
    "compare": _COMPARE_DEFAULTS,
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def normalize_config(task: str, overrides: Mapping | None = None) -> dict:
    """Defaults filled in and unknown keys rejected by name."""
    if task not in TASK_DEFAULTS:
        raise ConfigError(f"unknown task {task!r}")
    defaults = TASK_DEFAULTS[task]
    overrides = dict(overrides or {})
    cfg = json.loads(json.dumps(defaults))  # deep copy
    ds_over = overrides.pop("dataset", None)
    unknown = [k for k in overrides if k not in defaults]
    if unknown:
        raise ConfigError(f"unknown config fields for {task}: {sorted(unknown)}")
    for k, v in overrides.items():
        if v is not None or defaults[k] is None:
            cfg[k] = v
    if ds_over is not None:
        ds_over = dict(ds_over)
        kind = ds_over.get("kind", "generated")
        base = dict(_DATASET_DEFAULTS if kind == "generated" else _CSV_DATASET_DEFAULTS)
        bad = [k for k in ds_over if k not in base]
        if bad:
            raise ConfigError(f"unknown dataset fields: {sorted(bad)}")
        base.update({k: v for k, v in ds_over.items() if v is not None})
        cfg["dataset"] = base
    return cfg


def shape_from_config(cfg: Mapping) -> NetworkShape:
    act = cfg["activation"]
    if isinstance(act, str):
        if act not in ACTIVATION_PRESETS:
            raise ConfigError(
                f"activation {act!r} unknown; presets are "
                f"{', '.join(ACTIVATION_PRESETS)} (or give coefficients)"
            )
        activation = activation_preset(act)
    else:
        activation = ActivationPoly(tuple(float(c) for c in act), name="custom")
    try:
        return NetworkShape(
            n_features=int(cfg["features"]),
            n_hidden=int(cfg["hidden"]),
            n_bits=int(cfg["bits"]),
            first_layer_bias=bool(cfg["first_layer_bias"]),
            activation=activation,
            last_bias_levels=tuple(cfg["last_bias_levels"]),
        )
    except ValueError as exc:
        raise ConfigError(f"bad shape: {exc}") from exc


def dataset_from_config(spec: Mapping) -> Dataset:
    kind = spec.get("kind", "generated")
    if kind == "generated":
        name = spec["name"]
        if name not in GENERATORS:
            raise ConfigError(
                f"dataset {name!r} unknown; generators are {', '.join(GENERATORS)}"
            )
        try:
            return gen_dataset(
                name, n=int(spec["n"]), noise=float(spec["noise"]),
                seed=int(spec["seed"]),
            )
        except ValueError as exc:
            raise ConfigError(f"bad dataset: {exc}") from exc
    if kind == "csv":
        if not spec.get("text"):
            raise ConfigError("csv dataset needs its text inline")
        label_map = spec.get("label_map")
        if label_map is not None:
            label_map = {str(k): int(v) for k, v in label_map.items()}
        try:
            return loads_csv(
                spec["text"],
                feature_cols=spec.get("feature_cols"),
                label_col=spec.get("label_col", "label"),
                label_map=label_map,
            )
        except ValueError as exc:
            raise ConfigError(f"bad csv dataset: {exc}") from exc
    raise ConfigError(f"unknown dataset kind {kind!r}")


def _metadata(task: str, cfg: dict, hashes: dict) -> dict:
    return {
        "task": task,
        "config": cfg,
        "package": {"name": "qubonet", "version": __version__},
        "artifact_hashes": hashes,
    }


def compile_run(overrides: Mapping | None = None) -> dict:
    cfg = normalize_config("compile", overrides)
    shape = shape_from_config(cfg)
    dataset = dataset_from_config(cfg["dataset"])
    try:
        model = compile_model(shape, dataset, lam=cfg["lambda"], path=cfg["path"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = model.to_doc()
    hashes = {"model": doc["content_hash"]}
    return {
        "model": doc,
        "counts": doc["counts"],
        "metadata": _metadata("compile", cfg, hashes),
    }


def _solve(model: CompiledModel, cfg: dict) -> tuple[list[Sample], dict]:
    solver = cfg["solver"]
    schedule = (
        AnnealSchedule.from_doc(cfg["schedule"]) if cfg["schedule"] else None
    )
    beta_range = tuple(cfg["beta_range"]) if cfg["beta_range"] else None
    extra: dict = {}
    if solver == "exact":
        energy, assignments = exact_solve(model.qubo, max_vars=int(cfg["max_vars"]))
        samples = [Sample(a, energy, 1) for a in assignments]
        extra["n_minima"] = len(assignments)
    elif solver == "sa":
        sampler_cfg = SamplerConfig(
            num_reads=int(cfg["reads"]),
            seed=int(cfg["seed"]),
            sweeps=int(cfg["sweeps"]),
            beta_range=beta_range,
            schedule=schedule,
        )
        samples = sa_sample(model.qubo, sampler_cfg)
    elif solver == "remote":
        sampler_cfg = SamplerConfig(
            num_reads=int(cfg["reads"]),
            seed=int(cfg["seed"]),
            sweeps=int(cfg["sweeps"]),
            beta_range=beta_range,
            schedule=schedule,
        )
        samples = remote_sample(model.qubo, sampler_cfg, endpoint=cfg["endpoint"])
    else:
        raise ConfigError(f"unknown solver {solver!r}; choose exact, sa, or remote")
    return samples, extra


def _boundary(net, dataset: Dataset, resolution: int) -> str | None:
    if dataset.n_features != 2:
        return None
    mins = dataset.features.min(axis=0)
    maxs = dataset.features.max(axis=0)
    pads = [0.05 * (hi - lo) if hi > lo else 0.5 for lo, hi in zip(mins, maxs)]
    bounds = (
        (float(mins[0] - pads[0]), float(maxs[0] + pads[0])),
        (float(mins[1] - pads[1]), float(maxs[1] + pads[1])),
    )
    grid = decision_grid(net.output, bounds, resolution)
    return grid_csv(bounds, resolution, grid)


def train_run(overrides: Mapping | None = None) -> dict:
    cfg = normalize_config("train", overrides)
    shape = shape_from_config(cfg)
    dataset = dataset_from_config(cfg["dataset"])
    try:
        model = compile_model(shape, dataset, lam=cfg["lambda"], path=cfg["path"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    samples, extra = _solve(model, cfg)
    best = best_of(samples)
    net = decode_solution(model, best.assignment)
    auc = roc_auc(net.output(dataset.features), dataset.labels)
    boundary = _boundary(net, dataset, int(cfg["resolution"]))

    model_doc = model.to_doc()
    samples_doc = [
        {
            "assignment": list(s.assignment),
            "energy": s.energy,
            "occurrences": s.occurrences,
        }
        for s in samples
    ]
    metrics = {
        "auc": auc,
        "best_energy": best.energy,
        "training_loss": best.energy + model.offset,
        "n_samples": len(samples),
        "solver": cfg["solver"],
        "dataset": dataset.name or "csv",
        "counts": model_doc["counts"],
        "lambda": model.lam,
        "decoded": {
            "w": net.w.tolist(),
            "v": net.v.tolist(),
            "v0": net.v0,
        },
        **extra,
    }
    hashes = {
        "model": model_doc["content_hash"],
        "metrics": text_hash(canonical_json(metrics)),
        "samples": text_hash(canonical_json(samples_doc)),
    }
    if boundary is not None:
        hashes["boundary_csv"] = text_hash(boundary)
    return {
        "model": model_doc,
        "samples": samples_doc,
        "metrics": metrics,
        "boundary_csv": boundary,
        "metadata": _metadata("train", cfg, hashes),
    }


def compare_run(overrides: Mapping | None = None) -> dict:
    cfg = normalize_config("compare", overrides)
    train_cfg = {k: cfg[k] for k in _TRAIN_DEFAULTS}
    bundle = train_run(train_cfg)
    shape = shape_from_config(cfg)
    dataset = dataset_from_config(cfg["dataset"])
    runs = classical_train(
        shape,
        dataset,
        omega=float(cfg["omega"]),
        runs=int(cfg["runs"]),
        seed=int(cfg["classical_seed"]),
        lr=float(cfg["lr"]),
        steps=int(cfg["steps"]),
    )
    if not runs:
        raise SolverError("all classical runs diverged")
    report = compare(bundle["metrics"]["auc"], runs)
    metrics = dict(bundle["metrics"])
    metrics["classical"] = {
        "aucs": list(report.classical_aucs),
        "median": report.median,
        "p20": report.p20,
        "p80": report.p80,
        "omega": float(cfg["omega"]),
        "requested_runs": int(cfg["runs"]),
        "completed_runs": len(runs),
    }
    hashes = dict(bundle["metadata"]["artifact_hashes"])
    hashes["metrics"] = text_hash(canonical_json(metrics))
    bundle["metrics"] = metrics
    bundle["metadata"] = _metadata("compare", cfg, hashes)
    return bundle


def reduce_run(
    polynomial_text: str,
    lam: float | None = None,
    verify: bool = True,
    max_vars: int = VERIFY_MAX_VARS,
) -> dict:
    try:
        poly = MultilinearPoly.from_text(polynomial_text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    unit = poly.to_unit() if poly.basis is Basis.SPIN else poly
    try:
        qmodel = quadratize(unit, lam=lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report: dict
    if not verify:
        report = {"skipped": True, "reason": "verification disabled"}
    elif qmodel.n_vars > max_vars:
        report = {
            "skipped": True,
            "reason": (
                f"{qmodel.n_vars} total variables exceed the exhaustive "
                f"verification bound of {max_vars}"
            ),
        }
    else:
        r = verify_reduction(unit, qmodel, max_vars=max_vars)
        report = {
            "skipped": False,
            "passed": r.passed,
            "min_energy_original": r.min_energy_original,
            "min_energy_reduced": r.min_energy_reduced,
            "n_minima_original": r.n_minima_original,
            "n_minima_reduced": r.n_minima_reduced,
            "message": r.message,
        }
    model_text = qmodel.to_text()
    cfg = {
        "lambda": lam,
        "verify": verify,
        "max_vars": max_vars,
        "input_hash": text_hash(polynomial_text),
    }
    hashes = {
        "reduced": text_hash(model_text),
        "report": text_hash(canonical_json(report)),
    }
    return {
        "model_text": model_text,
        "report": report,
        "n_aux": qmodel.n_aux,
        "metadata": _metadata("reduce", cfg, hashes),
    }


def dataset_gen_run(
    name: str = "circles", n: int = 200, noise: float = 0.1, seed: int = 0
) -> dict:
    if name not in GENERATORS:
        raise ConfigError(
            f"dataset {name!r} unknown; generators are {', '.join(GENERATORS)}"
        )
    ds = gen_dataset(name, n=n, noise=noise, seed=seed)
    csv_text = dumps_csv(ds)
    cfg = {"name": name, "n": n, "noise": noise, "seed": seed}
    hashes = {"csv": text_hash(csv_text)}
    return {"csv": csv_text, "metadata": _metadata("dataset", cfg, hashes)}
