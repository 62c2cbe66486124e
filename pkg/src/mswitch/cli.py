"""Command-line client for the mswitch service.

Requests go to an in-process app by default, or to ``--server URL`` over HTTP.
Exit codes: 0 every verdict passed, 1 some verdict failed, 2 usage or config error.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import warnings
from pathlib import Path
from typing import Any

import click
import httpx

from . import __version__

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Client:
    def __init__(self, server: str | None):
        if server:
            self._http = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app
            self._http = TestClient(app)

    def post(self, path: str, body: dict) -> dict:
        try:
            r = self._http.post(path, json=body)
        except httpx.HTTPError as e:
            raise ServiceProblem(f"cannot reach server: {e}") from None
        if r.status_code == 422:
            raise UsageProblem(_detail(r.json()))
        if r.status_code != 200:
            raise ServiceProblem(f"server error {r.status_code}: {r.text[:500]}")
        return r.json()


class UsageProblem(click.UsageError):
    pass


class ServiceProblem(click.ClickException):
    exit_code = EXIT_USAGE


def _detail(body: Any) -> str:
    d = body.get("detail", body) if isinstance(body, dict) else body
    if isinstance(d, list):
        return "; ".join(f"{'.'.join(map(str, e.get('loc', [])[1:]))}: {e.get('msg')}" for e in d)
    return str(d)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError(f"cannot read config {path}: {e}") from None
    if not isinstance(data, dict):
        raise click.UsageError("config file must hold a JSON object")
    return data


def _merge(file_cfg: dict, **flags) -> dict:
    """Flags override the config file; unset flags fall back to it."""
    out = dict(file_cfg)
    for k, v in flags.items():
        if v is not None:
            out[k] = v
    return out


def _parse_params(text: str | None) -> dict:
    if not text:
        return {}
    try:
        src = Path(text).read_text() if os.path.exists(text) else text
        data = json.loads(src)
    except json.JSONDecodeError as e:
        raise click.UsageError(f"--params is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise click.UsageError("--params must be a JSON object")
    return data


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _config(command: str, cfg: dict, parameters: dict) -> dict:
    return {"command": command, "parameters": parameters, "master_seed": cfg.get("seed", 0),
            "params": cfg.get("params", {}), "out": cfg.get("out"), "format": cfg.get("format", "json"),
            "jobs": cfg.get("jobs", 1), "version": __version__}


@click.group()
@click.version_option(__version__, prog_name="mswitch")
@click.option("--server", envvar="MSWITCH_SERVER", default=None, help="Base URL of a running service.")
@click.pass_context
def main(ctx, server):
    """Pseudorandom restriction laboratory: generators, verification suites and sweeps."""
    ctx.obj = Client(server)


@main.command()
@click.argument("cls", type=click.Choice(["ac0", "f2"]))
@click.option("--n", "n", type=int, default=None)
@click.option("--M", "M", type=int, default=None, help="Circuit size (ac0).")
@click.option("--d", "d", type=int, default=None, help="Circuit depth (ac0).")
@click.option("--S", "S", type=int, default=None, help="Sparsity (f2).")
@click.option("--eps", type=float, default=None)
@click.option("--seed", type=int, default=None, help="Master seed, expanded to a full generator seed.")
@click.option("--raw-seed", type=str, default=None, help="Explicit generator seed in hex.")
@click.option("--count", type=int, default=None, help="Number of outputs to emit.")
@click.option("--params", "params_text", default=None, help="JSON object (or file) of Params overrides.")
@click.option("--config", "config_path", default=None, help="JSON config file; flags override it.")
@click.option("--out", default=None, help="Write the descriptor JSON here.")
@click.option("--format", "fmt", type=click.Choice(["bits", "hex", "json"]), default=None)
@click.pass_obj
def generate(client, cls, n, M, d, S, eps, seed, raw_seed, count, params_text, config_path, out, fmt):
    """Print Gen(seed) for the chosen class and write its descriptor."""
    file_cfg = _load_config(config_path)
    cfg = _merge(file_cfg, n=n, M=M, d=d, S=S, eps=eps, seed=seed, raw_seed=raw_seed, count=count,
                 params=_parse_params(params_text) or None, out=out, format=fmt)
    body = {k: cfg[k] for k in ("n", "M", "d", "S", "eps", "seed", "raw_seed", "count", "params") if k in cfg}
    body["cls"] = cls
    body["config"] = _config("generate", cfg, {**body})
    res = client.post("/generate", body)
    fmt = cfg.get("format") or "bits"
    if fmt == "json":
        click.echo(json.dumps(res, indent=2))
    else:
        for o in res["outputs"]:
            click.echo(o if fmt == "bits" else f"{int(o[::-1], 2):0{(len(o) + 3) // 4}x}")
    if cfg.get("out"):
        Path(cfg["out"]).write_text(json.dumps(res, indent=2))
    sys.exit(EXIT_PASS)


@main.command()
@click.argument("suite", type=click.Choice(["fooling", "switching", "encdec", "circuit", "all"]))
@click.option("--seed", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--params", "params_text", default=None)
@click.option("--config", "config_path", default=None)
@click.option("--out", default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None)
@click.pass_obj
def verify(client, suite, seed, trials, params_text, config_path, out, fmt):
    """Run a verification suite; exit 0 iff every verdict passes."""
    file_cfg = _load_config(config_path)
    cfg = _merge(file_cfg, seed=seed, trials=trials, params=_parse_params(params_text) or None, out=out, format=fmt)
    if cfg.get("trials") is not None and int(cfg["trials"]) < 1:
        raise click.BadParameter("must be >= 1", param_hint="--trials")
    body = {"suite": suite, "seed": cfg.get("seed", 7), "trials": cfg.get("trials"), "params": cfg.get("params", {})}
    body["config"] = _config("verify", {**cfg, "seed": body["seed"]}, {"suite": suite, "trials": body["trials"]})
    res = client.post("/verify", body)
    for c in res["checks"]:
        click.echo(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} ({c['elapsed_s']:.1f}s)", err=bool(cfg.get("out")))
    if cfg.get("format", "json") == "csv":
        text = _csv([{"name": c["name"], "passed": c["passed"], "elapsed_s": c["elapsed_s"]} for c in res["checks"]],
                    ["name", "passed", "elapsed_s"], res["config"])
    else:
        text = json.dumps(res, indent=2) + "\n"
    if cfg.get("out"):
        _emit(text, cfg["out"])
    sys.exit(EXIT_PASS if res["passed"] else EXIT_FAIL)


def _csv(rows: list[dict], columns: list[str], config: dict) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _axis(text: str) -> tuple[str, list[str]]:
    if "=" not in text:
        raise click.BadParameter(f"expected name=v1,v2,... got {text!r}", param_hint="--axis")
    name, vals = text.split("=", 1)
    items = [v for v in vals.split(",") if v]
    if not items:
        raise click.BadParameter(f"axis {name} has no values", param_hint="--axis")
    return name.strip(), items


@main.command()
@click.option("--kind", type=click.Choice(["switching", "bias"]), default=None)
@click.option("--axis", "axes", multiple=True, help="name=v1,v2,...; repeat for a cartesian product.")
@click.option("--seed", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--mode", type=click.Choice(["exact", "sampled"]), default=None)
@click.option("--jobs", type=int, default=None, help="Worker processes; results do not depend on it.")
@click.option("--config", "config_path", default=None)
@click.option("--out", default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None)
@click.pass_obj
def sweep(client, kind, axes, seed, trials, mode, jobs, config_path, out, fmt):
    """Cartesian sweep emitting one report row per cell."""
    file_cfg = _load_config(config_path)
    axis_map = dict(file_cfg.get("axes", {}))
    axis_map.update(dict(_axis(a) for a in axes))
    cfg = _merge(file_cfg, kind=kind, seed=seed, trials=trials, mode=mode, jobs=jobs, out=out, format=fmt)
    if cfg.get("trials") is not None and int(cfg["trials"]) < 1:
        raise click.BadParameter("must be >= 1", param_hint="--trials")
    body = {"kind": cfg.get("kind", "switching"), "axes": axis_map, "seed": cfg.get("seed", 0),
            "trials": cfg.get("trials", 10_000), "mode": cfg.get("mode", "exact"),
            "jobs": cfg.get("jobs") or os.cpu_count() or 1}
    body["config"] = _config("sweep", {**cfg, "seed": body["seed"], "jobs": body["jobs"], "format": cfg.get("format", "csv")},
                             {k: body[k] for k in ("kind", "axes", "trials", "mode")})
    res = client.post("/sweep", body)
    if cfg.get("format", "csv") == "csv":
        text = _csv(res["rows"], res["columns"], res["config"])
    else:
        text = json.dumps(res, indent=2) + "\n"
    _emit(text, cfg.get("out"))
    sys.exit(EXIT_PASS if res["passed"] else EXIT_FAIL)


if __name__ == "__main__":
    main()
