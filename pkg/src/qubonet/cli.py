"""Command-line client: builds service requests and persists run artifacts.

Every command talks to the HTTP service layer; by default an in-process
instance, or a remote one via --server.  Exit codes: 0 success, 2 config
error, 3 solver error, 4 I/O error.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import click
import httpx

with warnings.catch_warnings():
    # the in-process client is an implementation detail; keep the
    # starlette/httpx pairing notice out of every command's stderr
    warnings.filterwarnings("ignore", message=r"Using `httpx` with")
    from starlette.testclient import TestClient

from .pipeline import canonical_json
from .service.app import create_app


class CliError(click.ClickException):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    return TestClient(create_app(), raise_server_exceptions=False)


def _post(client, path: str, payload: dict) -> dict:
    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliError(f"cannot reach server: {exc}", 3) from exc
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
        detail = body.get("detail", resp.text)
        kind = body.get("kind", "")
    except ValueError:
        detail, kind = resp.text[:300], ""
    if not isinstance(detail, str):
        detail = json.dumps(detail)
    code = 2 if (kind == "config" or resp.status_code in (400, 422)) else 3
    raise CliError(detail, code)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", 4) from exc


def _write_text(out_dir: str, name: str, text: str) -> None:
    try:
        p = Path(out_dir)
        p.mkdir(parents=True, exist_ok=True)
        (p / name).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {name} to {out_dir}: {exc}", 4) from exc


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}", 4) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}", 2) from exc
    if not isinstance(doc, dict):
        raise CliError(f"config {path} must hold a JSON object", 2)
    return doc


def _merge_flags(base: dict, flags: dict) -> dict:
    out = dict(base)
    for k, v in flags.items():
        if v is not None:
            out[k] = v
    return out


def _parse_label_map(text: str | None) -> dict | None:
    if text is None:
        return None
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise CliError(
                f"label map entries look like value=label, got {part!r}", 2
            )
        key, val = part.split("=", 1)
        try:
            out[key.strip()] = int(val)
        except ValueError:
            raise CliError(f"label {val!r} must be -1 or 1", 2) from None
    return out


def _dataset_spec(
    file_cfg: dict,
    dataset: str | None,
    n: int | None,
    noise: float | None,
    dataset_seed: int | None,
    csv: str | None,
    label_col: str | None,
    feature_cols: str | None,
    label_map: str | None,
) -> dict | None:
    spec = dict(file_cfg.get("dataset") or {})
    if csv:
        spec = {
            "kind": "csv",
            "text": _read_text(csv),
            "label_col": label_col or spec.get("label_col") or "label",
        }
        cols = (
            [c.strip() for c in feature_cols.split(",")]
            if feature_cols
            else file_cfg.get("dataset", {}).get("feature_cols")
        )
        if cols:
            spec["feature_cols"] = cols
        lm = _parse_label_map(label_map)
        if lm:
            spec["label_map"] = lm
        return spec
    flags = {"name": dataset, "n": n, "noise": noise, "seed": dataset_seed}
    if any(v is not None for v in flags.values()) or spec:
        spec.setdefault("kind", "generated")
        return _merge_flags(spec, flags)
    return None


def _shape_payload(file_cfg: dict, **flags) -> dict:
    payload = {
        k: v
        for k, v in file_cfg.items()
        if k not in ("dataset",)
    }
    return _merge_flags(payload, flags)


def shape_options(f):
    f = click.option("--features", type=int, default=None, help="Input features.")(f)
    f = click.option("--hidden", type=int, default=None, help="Hidden units.")(f)
    f = click.option("--bits", type=int, default=None, help="Bits per parameter.")(f)
    f = click.option(
        "--activation", default=None,
        help="Activation preset: square, relu2, or sigmoid-fit.",
    )(f)
    f = click.option(
        "--first-layer-bias/--no-first-layer-bias", "first_layer_bias",
        default=None, help="Give the hidden layer bias inputs.",
    )(f)
    return f


def dataset_options(f):
    f = click.option(
        "--dataset", default=None, help="Generator: circles, quadrants, bands."
    )(f)
    f = click.option("--n", type=int, default=None, help="Generated points.")(f)
    f = click.option("--noise", type=float, default=None, help="Generator noise.")(f)
    f = click.option(
        "--dataset-seed", type=int, default=None, help="Generator seed."
    )(f)
    f = click.option("--csv", default=None, help="Load the dataset from a CSV file.")(f)
    f = click.option("--label-col", default=None, help="CSV label column.")(f)
    f = click.option(
        "--feature-cols", default=None, help="Comma-separated CSV feature columns."
    )(f)
    f = click.option(
        "--label-map", default=None,
        help="CSV label mapping, e.g. signal=1,background=-1.",
    )(f)
    return f


def common_options(f):
    f = click.option("--config", "config_path", default=None,
                     help="JSON config file; explicit flags win.")(f)
    f = click.option("--server", default=None,
                     help="Remote service URL (default: in-process).")(f)
    return f


def solver_options(f):
    f = click.option("--solver", default=None,
                     type=click.Choice(["exact", "sa", "remote"]),
                     help="Solver backend.")(f)
    f = click.option("--reads", type=int, default=None, help="Sampler reads.")(f)
    f = click.option("--seed", type=int, default=None, help="Sampler seed.")(f)
    f = click.option("--sweeps", type=int, default=None, help="SA sweeps.")(f)
    f = click.option("--max-vars", type=int, default=None,
                     help="Exact-solver variable cap.")(f)
    f = click.option("--resolution", type=int, default=None,
                     help="Boundary grid resolution.")(f)
    return f


@click.group()
@click.version_option(package_name="qubonet")
def main():
    """Compile, solve, and evaluate binary-weight network training."""


def _compile_payload(config_path, server, lam, path, dataset_flags, shape_flags):
    file_cfg = _load_config_file(config_path)
    payload = _shape_payload(
        {k: v for k, v in file_cfg.items() if k not in ("out",)}, **shape_flags
    )
    payload = _merge_flags(payload, {"lambda": lam, "path": path})
    spec = _dataset_spec(file_cfg, **dataset_flags)
    if spec is not None:
        payload["dataset"] = spec
    payload.pop("dataset_seed", None)
    return payload


@main.command("compile")
@shape_options
@dataset_options
@common_options
@click.option("--lambda", "lam", type=float, default=None, help="Penalty strength.")
@click.option("--path", default=None,
              type=click.Choice(["auto", "structured", "generic"]),
              help="Compilation route.")
@click.option("--out", default="runs/compile", show_default=True,
              help="Artifact directory.")
def compile_cmd(features, hidden, bits, activation, first_layer_bias,
                dataset, n, noise, dataset_seed, csv, label_col, feature_cols,
                label_map, config_path, server, lam, path, out):
    """Compile the training problem and report auxiliary counts."""
    payload = _compile_payload(
        config_path, server, lam, path,
        dict(dataset=dataset, n=n, noise=noise, dataset_seed=dataset_seed,
             csv=csv, label_col=label_col, feature_cols=feature_cols,
             label_map=label_map),
        dict(features=features, hidden=hidden, bits=bits,
             activation=activation, first_layer_bias=first_layer_bias),
    )
    bundle = _post(_client(server), "/api/compile", payload)
    _write_text(out, "model.json", canonical_json(bundle["model"]))
    _write_text(out, "metadata.json", canonical_json(bundle["metadata"]))
    counts = bundle["counts"]
    click.echo(
        "compiled: "
        + " ".join(f"{k}={counts[k]}" for k in sorted(counts))
    )
    click.echo(f"artifacts in {out}")


def _train_payload(config_path, server, lam, path, dataset_flags, shape_flags,
                   solver_flags):
    payload = _compile_payload(config_path, server, lam, path, dataset_flags,
                               shape_flags)
    return _merge_flags(payload, solver_flags)


def _write_train_bundle(out: str, bundle: dict) -> None:
    _write_text(out, "model.json", canonical_json(bundle["model"]))
    _write_text(out, "samples.json", canonical_json(bundle["samples"]))
    _write_text(out, "metrics.json", canonical_json(bundle["metrics"]))
    if bundle.get("boundary_csv"):
        _write_text(out, "boundary.csv", bundle["boundary_csv"])
    _write_text(out, "metadata.json", canonical_json(bundle["metadata"]))


@main.command("train")
@shape_options
@dataset_options
@solver_options
@common_options
@click.option("--lambda", "lam", type=float, default=None, help="Penalty strength.")
@click.option("--path", default=None,
              type=click.Choice(["auto", "structured", "generic"]),
              help="Compilation route.")
@click.option("--out", default="runs/train", show_default=True,
              help="Artifact directory.")
def train_cmd(features, hidden, bits, activation, first_layer_bias,
              dataset, n, noise, dataset_seed, csv, label_col, feature_cols,
              label_map, solver, reads, seed, sweeps, max_vars, resolution,
              config_path, server, lam, path, out):
    """Compile, solve, decode, and score one training run."""
    payload = _train_payload(
        config_path, server, lam, path,
        dict(dataset=dataset, n=n, noise=noise, dataset_seed=dataset_seed,
             csv=csv, label_col=label_col, feature_cols=feature_cols,
             label_map=label_map),
        dict(features=features, hidden=hidden, bits=bits,
             activation=activation, first_layer_bias=first_layer_bias),
        dict(solver=solver, reads=reads, seed=seed, sweeps=sweeps,
             max_vars=max_vars, resolution=resolution),
    )
    bundle = _post(_client(server), "/api/train", payload)
    _write_train_bundle(out, bundle)
    m = bundle["metrics"]
    click.echo(
        f"auc={m['auc']:.4f} training_loss={m['training_loss']:.6f} "
        f"solver={m['solver']} samples={m['n_samples']}"
    )
    click.echo(f"artifacts in {out}")


@main.command("compare")
@shape_options
@dataset_options
@solver_options
@common_options
@click.option("--lambda", "lam", type=float, default=None, help="Penalty strength.")
@click.option("--path", default=None,
              type=click.Choice(["auto", "structured", "generic"]),
              help="Compilation route.")
@click.option("--omega", type=float, default=None,
              help="Classical level-pinning penalty weight.")
@click.option("--runs", type=int, default=None, help="Classical restarts.")
@click.option("--classical-seed", type=int, default=None,
              help="Classical init seed.")
@click.option("--out", default="runs/compare", show_default=True,
              help="Artifact directory.")
def compare_cmd(features, hidden, bits, activation, first_layer_bias,
                dataset, n, noise, dataset_seed, csv, label_col, feature_cols,
                label_map, solver, reads, seed, sweeps, max_vars, resolution,
                config_path, server, lam, path, omega, runs, classical_seed,
                out):
    """Train once and compare against the penalized classical baseline."""
    payload = _train_payload(
        config_path, server, lam, path,
        dict(dataset=dataset, n=n, noise=noise, dataset_seed=dataset_seed,
             csv=csv, label_col=label_col, feature_cols=feature_cols,
             label_map=label_map),
        dict(features=features, hidden=hidden, bits=bits,
             activation=activation, first_layer_bias=first_layer_bias),
        dict(solver=solver, reads=reads, seed=seed, sweeps=sweeps,
             max_vars=max_vars, resolution=resolution),
    )
    payload = _merge_flags(
        payload,
        {"omega": omega, "runs": runs, "classical_seed": classical_seed},
    )
    bundle = _post(_client(server), "/api/compare", payload)
    _write_train_bundle(out, bundle)
    m = bundle["metrics"]
    c = m["classical"]
    click.echo(
        f"quantum auc={m['auc']:.4f} | classical median={c['median']:.4f} "
        f"p20={c['p20']:.4f} p80={c['p80']:.4f} ({c['completed_runs']} runs)"
    )
    click.echo(f"artifacts in {out}")


@main.command("reduce")
@click.argument("poly_file")
@common_options
@click.option("--lambda", "lam", type=float, default=None,
              help="Fixed penalty strength (default: adaptive).")
@click.option("--verify/--no-verify", default=True, show_default=True,
              help="Exhaustively verify the reduction when small enough.")
@click.option("--max-vars", type=int, default=22, show_default=True,
              help="Verification size cap.")
@click.option("--out", default="runs/reduce", show_default=True,
              help="Artifact directory.")
def reduce_cmd(poly_file, config_path, server, lam, verify, max_vars, out):
    """Quadratize a polynomial file and verify the reduction."""
    text = _read_text(poly_file)
    payload = _merge_flags(
        _load_config_file(config_path),
        {"polynomial": text, "lambda": lam, "verify": verify,
         "max_vars": max_vars},
    )
    bundle = _post(_client(server), "/api/reduce", payload)
    _write_text(out, "reduced.txt", bundle["model_text"])
    _write_text(out, "report.json", canonical_json(bundle["report"]))
    _write_text(out, "metadata.json", canonical_json(bundle["metadata"]))
    rep = bundle["report"]
    if rep.get("skipped"):
        click.echo(f"quadratized with {bundle['n_aux']} aux variables; "
                   f"verification skipped: {rep['reason']}")
    elif rep["passed"]:
        click.echo(f"pass, {rep['n_minima_original']} minima")
    else:
        click.echo(f"FAIL: {rep['message']}")
    click.echo(f"artifacts in {out}")


@main.group("dataset")
def dataset_group():
    """Dataset utilities."""


@dataset_group.command("gen")
@common_options
@click.option("--dataset", "name", default="circles", show_default=True,
              type=click.Choice(["circles", "quadrants", "bands"]),
              help="Generator.")
@click.option("--n", type=int, default=200, show_default=True)
@click.option("--noise", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="runs/dataset", show_default=True,
              help="Artifact directory.")
def dataset_gen_cmd(config_path, server, name, n, noise, seed, out):
    """Generate a synthetic dataset as CSV."""
    payload = _merge_flags(
        _load_config_file(config_path),
        {"name": name, "n": n, "noise": noise, "seed": seed},
    )
    bundle = _post(_client(server), "/api/datasets/generate", payload)
    _write_text(out, "data.csv", bundle["csv"])
    _write_text(out, "metadata.json", canonical_json(bundle["metadata"]))
    click.echo(f"wrote {n} points to {out}/data.csv")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_cmd(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
