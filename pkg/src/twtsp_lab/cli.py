"""Thin command-line client for the twtsp-lab service.

Without --server the CLI talks to an in-process copy of the FastAPI app, so
no server needs to be running; with --server URL it targets a live
instance (`uvicorn twtsp_lab.service:app`). Exit codes: 0 success,
2 validation failure, 3 state budget exceeded.
"""

from __future__ import annotations

import csv as csv_mod
import io
import json
import sys
from pathlib import Path

import click
import httpx


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # starlette testclient import warns on some versions
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _fail_from_response(resp) -> None:
    if resp.status_code == 409:
        body = resp.json()
        click.echo(f"error: state budget exceeded (required {body.get('required')})", err=True)
        sys.exit(3)
    if resp.status_code >= 400:
        click.echo(f"error: {resp.text}", err=True)
        sys.exit(2)


def _write(data: dict, out: str | None, fmt: str):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv_mod.writer(buf)
        flat = _flatten(data)
        writer.writerow(flat.keys())
        writer.writerow(flat.values())
        text = buf.getvalue()
    else:
        text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _flatten(obj, prefix=""):
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}{k}." if prefix else f"{k}."))
    else:
        out[prefix.rstrip(".")] = json.dumps(obj) if isinstance(obj, (list, dict)) else obj
    return out


def _load(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _split_top_level(text: str) -> list[str]:
    parts = []
    depth = 0
    cur = []
    for ch in text:
        if ch in "[{(":
            depth += 1
        elif ch in "]})":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return parts


def _parse_params(text: str) -> dict:
    params = {}
    if not text:
        return params
    for part in _split_top_level(text):
        k, _, v = part.partition("=")
        k = k.strip()
        v = v.strip()
        try:
            params[k] = json.loads(v)
        except json.JSONDecodeError:
            params[k] = v
    return params


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; defaults to in-process.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--state-budget", type=int, default=10**8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def main(ctx, server, fmt, state_budget, seed):
    """Laboratory for the time-windows TSP with predictions."""
    ctx.ensure_object(dict)
    ctx.obj.update(server=server, fmt=fmt, state_budget=state_budget, seed=seed)


@main.command()
@click.option("--kind", type=click.Choice(["random", "chain", "chain0", "uniform", "line-service", "line0"]), required=True)
@click.option("--params", default="", help="Comma-separated k=v pairs, JSON values allowed.")
@click.option("--seed", type=int, default=None, help="Overrides the global --seed.")
@click.option("--perturb", default=None, help="random kind: k=v targets (lambda, tau, rho_num, rho_den, conforming).")
@click.option("--out-instance", required=True, type=click.Path())
@click.option("--out-predictions", default=None, type=click.Path())
@click.option("--out-matching", default=None, type=click.Path())
@click.pass_context
def gen(ctx, kind, params, seed, perturb, out_instance, out_predictions, out_matching):
    """Generate an instance (and optionally predictions + matching)."""
    body = {
        "kind": kind,
        "params": _parse_params(params),
        "seed": ctx.obj["seed"] if seed is None else seed,
    }
    if perturb is not None:
        body["perturb"] = _parse_params(perturb)
    with _client(ctx.obj["server"]) as client:
        resp = client.post("/gen", json=body)
        _fail_from_response(resp)
        data = resp.json()
    Path(out_instance).write_text(json.dumps(data["instance"], indent=2, sort_keys=True) + "\n")
    if out_predictions:
        if data.get("predictions") is None:
            click.echo("error: generator produced no predictions", err=True)
            sys.exit(2)
        Path(out_predictions).write_text(json.dumps(data["predictions"], indent=2, sort_keys=True) + "\n")
    if out_matching:
        if data.get("matching") is None:
            click.echo("error: generator produced no matching", err=True)
            sys.exit(2)
        Path(out_matching).write_text(json.dumps(data["matching"], indent=2, sort_keys=True) + "\n")


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--service", type=int, default=None)
@click.option("--root", type=int, default=None)
@click.option("--budget", type=int, default=None, help="State budget; defaults to the global --state-budget.")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def oracle(ctx, instance_path, service, root, budget, out):
    """Exact optimum walk for an instance file."""
    body = {
        "instance": _load(instance_path),
        "service": service,
        "root": root,
        "budget": budget if budget is not None else ctx.obj["state_budget"],
    }
    with _client(ctx.obj["server"]) as client:
        resp = client.post("/oracle", json=body)
        _fail_from_response(resp)
        _write(resp.json(), out, ctx.obj["fmt"])


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--service", type=int, default=None)
@click.option("--exact-orienteering/--greedy-orienteering", default=True)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def offline(ctx, instance_path, service, exact_orienteering, out):
    """Approximation-pipeline walk for an instance file."""
    body = {
        "instance": _load(instance_path),
        "service": service,
        "exact_orienteering": exact_orienteering,
    }
    with _client(ctx.obj["server"]) as client:
        resp = client.post("/offline", json=body)
        _fail_from_response(resp)
        _write(resp.json(), out, ctx.obj["fmt"])


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--predictions", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--lambda", "lambda_bound", type=int, default=None, help="Location-error bound.")
@click.option("--guess-lambda", is_flag=True, default=False)
@click.option("--epsilon", type=click.Choice(["-1", "0", "1", "all"]), default="all")
@click.option("--mode", type=click.Choice(["one2one", "many2one"]), default="one2one")
@click.option("--seed", type=int, default=None)
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def simulate(ctx, instance_path, pred_path, lambda_bound, guess_lambda, epsilon, mode, seed, out):
    """Run the prediction-following algorithm and report exact expectations."""
    if guess_lambda == (lambda_bound is not None):
        click.echo("error: provide exactly one of --lambda or --guess-lambda", err=True)
        sys.exit(2)
    body = {
        "instance": _load(instance_path),
        "predictions": _load(pred_path),
        "lambda": "guess" if guess_lambda else lambda_bound,
        "mode": mode,
        "epsilon": "all" if epsilon == "all" else int(epsilon),
        "seed": ctx.obj["seed"] if seed is None else seed,
        "state_budget": ctx.obj["state_budget"],
    }
    with _client(ctx.obj["server"]) as client:
        resp = client.post("/simulate", json=body)
        _fail_from_response(resp)
        _write(resp.json(), out, ctx.obj["fmt"])


@main.command()
@click.option("--suite", "suite_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--workers", type=int, default=1)
@click.pass_context
def bench(ctx, suite_path, out_dir, workers):
    """Run a benchmark suite and write bench.csv plus .dat files."""
    body = {"suite": _load(suite_path), "state_budget": ctx.obj["state_budget"], "workers": workers}
    with _client(ctx.obj["server"]) as client:
        resp = client.post("/bench", json=body)
        _fail_from_response(resp)
        data = resp.json()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in data["files"].items():
        (out / name).write_text(text)
    click.echo(json.dumps(data["aggregates"], indent=2, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the service in the foreground (uvicorn)."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


@main.command()
@click.option("--instance", "instance_path", default=None, type=click.Path(exists=True))
@click.option("--graph", "graph_path", default=None, type=click.Path(exists=True))
@click.option("--walk", "walk_path", default=None, type=click.Path(exists=True))
@click.pass_context
def validate(ctx, instance_path, graph_path, walk_path):
    """Validate instance / graph / walk files; exit 2 on violations."""
    body = {}
    if instance_path:
        body["instance"] = _load(instance_path)
    if graph_path:
        body["graph"] = _load(graph_path)
    if walk_path:
        body["walk"] = _load(walk_path)
    if not body:
        click.echo("error: nothing to validate", err=True)
        sys.exit(2)
    with _client(ctx.obj["server"]) as client:
        resp = client.post("/validate", json=body)
        _fail_from_response(resp)
        data = resp.json()
    click.echo(json.dumps(data, indent=2, sort_keys=True))
    if not data["ok"]:
        sys.exit(2)


if __name__ == "__main__":
    main()
