"""HTTP service over the generators and the verification suites.

The CLI talks to this app either in-process or over HTTP, so both paths share
one request schema and one set of validation rules.
"""

from __future__ import annotations

import concurrent.futures as cf
import itertools
import math
import os
import random
from fractions import Fraction
from typing import Any, Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, field_validator

from . import __version__
from .dist import (
    BitstringRestrictionSpace,
    MaxAttemptsExceeded,
    bits_to_int,
    bits_to_ints,
    kwise,
    random_seed_bits,
)
from .prg import Params, ac0_prg, f2_prg, fool_simple_prg
from .verify import (
    SUITES,
    PseudoBits,
    TrueRp,
    measure_bias,
    random_f2_tree,
    random_family,
    run_suite,
    switching_failure,
)

app = FastAPI(title="mswitch", version=__version__)


class RunConfig(BaseModel):
    command: str
    parameters: dict[str, Any] = {}
    master_seed: int = 0
    params: dict[str, Any] = {}
    out: str | None = None
    format: str = "json"
    jobs: int = 1
    version: str = __version__


def _effective(cfg: RunConfig | None, command: str, parameters: dict, seed: int, params: dict) -> RunConfig:
    """The caller's RunConfig with the fully resolved request parameters filled in."""
    cfg = cfg or RunConfig(command=command)
    return cfg.model_copy(update={"command": command, "parameters": parameters, "master_seed": seed,
                                  "params": {**Params().as_dict(), **params}})


def _params(overrides: dict[str, Any]) -> Params:
    try:
        return Params().with_overrides(overrides)
    except (TypeError, ValueError) as e:
        raise HTTPException(status_code=422, detail=f"bad params: {e}") from None


class GenerateRequest(BaseModel):
    cls: Literal["ac0", "f2"]
    n: int = Field(12, ge=1, le=62)
    M: int = Field(8, ge=2)
    d: int = Field(2, ge=1, le=8)
    S: int = Field(8, ge=1)
    eps: float = Field(0.1, gt=0, lt=1)
    seed: int = Field(0, ge=0, description="master seed, expanded to a full generator seed")
    raw_seed: str | None = Field(None, description="explicit generator seed as hex; overrides seed")
    count: int = Field(1, ge=1, le=100_000)
    params: dict[str, Any] = {}
    config: RunConfig | None = None


class GenerateResponse(BaseModel):
    outputs: list[str]
    generator_seeds: list[str]
    seed_bits: int
    descriptor: dict[str, Any]
    config: RunConfig


def build_prg(req: GenerateRequest):
    p = _params(req.params)
    if req.cls == "ac0":
        return ac0_prg(req.n, req.M, req.d, req.eps, p)
    return f2_prg(req.n, req.S, req.eps, p)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/generate")
def generate(req: GenerateRequest) -> GenerateResponse:
    try:
        g = build_prg(req)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e)) from None
    if req.raw_seed is not None:
        try:
            first = int(req.raw_seed, 16)
        except ValueError:
            raise HTTPException(status_code=422, detail="raw_seed must be hex") from None
        if first < 0 or first >> g.r:
            raise HTTPException(status_code=422, detail=f"raw_seed does not fit in {g.r} bits")
        seeds = [(first + j) % (1 << g.r) for j in range(req.count)]
    else:
        rows = random_seed_bits(np.random.default_rng(req.seed), g.r, req.count)
        seeds = [bits_to_int(b) for b in rows]
    outs = []
    for s in seeds:
        x = g.generate(s)
        outs.append("".join(str((x >> i) & 1) for i in range(g.n_out)))
    cfg = _effective(req.config, "generate", req.model_dump(exclude={"config", "params"}), req.seed, req.params)
    return GenerateResponse(outputs=outs, generator_seeds=[f"{s:x}" for s in seeds], seed_bits=g.r, descriptor=g.descriptor(), config=cfg)


class VerifyRequest(BaseModel):
    suite: str
    seed: int = 7
    trials: int | None = Field(None, ge=1)
    params: dict[str, Any] = {}
    config: RunConfig | None = None

    @field_validator("suite")
    @classmethod
    def known_suite(cls, v):
        if v not in SUITES:
            raise ValueError(f"unknown suite {v!r}; choose from {', '.join(SUITES)}")
        return v


class CheckOut(BaseModel):
    name: str
    passed: bool
    elapsed_s: float
    detail: dict[str, Any]


class VerifyResponse(BaseModel):
    passed: bool
    checks: list[CheckOut]
    config: RunConfig


@app.post("/verify")
def verify(req: VerifyRequest) -> VerifyResponse:
    checks = run_suite(req.suite, req.seed, req.trials, _params(req.params))
    cfg = _effective(req.config, "verify", {"suite": req.suite, "trials": req.trials}, req.seed, req.params)
    return VerifyResponse(passed=all(c.passed for c in checks),
                          checks=[CheckOut(**_jsonable(c.as_dict())) for c in checks], config=cfg)


SWITCHING_AXES = {"n": 16, "M": 4, "k": 2, "Q": 6, "ell": 2, "t": 3, "p": 2.0 ** -8, "source": "true", "r": 40}
BIAS_AXES = {"n": 8, "t": 2, "k": 2, "delta": 0.2, "corpus": 20}
SWITCHING_COLUMNS = ["row", "n", "M", "k", "Q", "ell", "t", "p", "source", "r", "trials", "failures",
                     "rate", "sigma", "bound", "vacuous", "verdict"]
BIAS_COLUMNS = ["row", "n", "t", "k", "delta", "corpus", "mode", "seed_bits", "max_bias", "ci99_halfwidth", "verdict"]


class SweepRequest(BaseModel):
    kind: Literal["switching", "bias"] = "switching"
    axes: dict[str, list[Any]] = {}
    seed: int = 0
    trials: int = Field(10_000, ge=1)
    mode: Literal["exact", "sampled"] = "exact"
    jobs: int = Field(1, ge=1)
    config: RunConfig | None = None


class SweepResponse(BaseModel):
    columns: list[str]
    rows: list[dict[str, Any]]
    passed: bool
    config: RunConfig


def _switching_row(args) -> dict:
    i, cell, seed, trials = args
    rng = random.Random(seed * 1_000_003 + i)
    fam = random_family(rng, cell["n"], cell["M"], cell["k"], cell["Q"], exact_width=True)
    q = max(1, round(-math.log2(cell["p"])))
    if cell["source"] == "true":
        src = TrueRp(cell["p"])
    elif cell["source"] == "pseudo":
        src = PseudoBits(kwise(BitstringRestrictionSpace(cell["n"], q).size, cell["r"]), q)
    else:
        raise ValueError(f"source must be true or pseudo, got {cell['source']!r}")
    rep = switching_failure(fam, cell["ell"], cell["t"], src, trials, seed + i)
    return {"row": i, **cell, "p": src.p if isinstance(src, TrueRp) else 2.0 ** -q, "trials": rep.trials,
            "failures": rep.failures, "rate": rep.rate, "sigma": rep.sigma, "bound": rep.bound,
            "vacuous": rep.vacuous, "verdict": rep.verdict}


def _bias_row(args) -> dict:
    i, cell, seed, trials, mode = args
    rng = random.Random(seed * 1_000_003 + i)
    d = fool_simple_prg(cell["n"], cell["t"], cell["k"], cell["delta"])
    outs = None if mode == "exact" else bits_to_ints(d.sample(np.random.default_rng(seed + i), trials))
    reps = [measure_bias(random_f2_tree(rng, cell["n"], cell["t"], cell["k"]), d, mode, trials, outputs=outs)
            for _ in range(cell["corpus"])]
    worst = max(reps, key=lambda r: r.bias)
    ok = worst.bias <= cell["delta"] + (worst.ci_halfwidth if mode == "sampled" else 0.0)
    return {"row": i, **cell, "mode": mode, "seed_bits": d.r, "max_bias": worst.bias,
            "ci99_halfwidth": worst.ci_halfwidth, "verdict": ok}


def _coerce(default, v):
    if isinstance(default, str):
        return str(v)
    if isinstance(default, float):
        return float(Fraction(str(v)))
    return int(v)


def _cells(defaults: dict, axes: dict[str, list[Any]]) -> list[dict]:
    unknown = set(axes) - set(defaults)
    if unknown:
        raise HTTPException(status_code=422, detail=f"unknown sweep axes: {sorted(unknown)}")
    names = list(axes)
    out = []
    for combo in itertools.product(*(axes[k] for k in names)):
        cell = dict(defaults)
        for k, v in zip(names, combo):
            try:
                cell[k] = _coerce(defaults[k], v)
            except (TypeError, ValueError, ZeroDivisionError):
                raise HTTPException(status_code=422, detail=f"bad value {v!r} for axis {k}") from None
        out.append(cell)
    return out


@app.post("/sweep")
def sweep(req: SweepRequest) -> SweepResponse:
    if req.kind == "switching":
        cells, cols, fn = _cells(SWITCHING_AXES, req.axes), SWITCHING_COLUMNS, _switching_row
        jobs_args = [(i, c, req.seed, req.trials) for i, c in enumerate(cells)]
    else:
        cells, cols, fn = _cells(BIAS_AXES, req.axes), BIAS_COLUMNS, _bias_row
        jobs_args = [(i, c, req.seed, req.trials, req.mode) for i, c in enumerate(cells)]
    try:
        if req.jobs > 1 and len(jobs_args) > 1:
            with cf.ProcessPoolExecutor(max_workers=min(req.jobs, os.cpu_count() or 1)) as ex:
                rows = list(ex.map(fn, jobs_args))
        else:
            rows = [fn(a) for a in jobs_args]
    except (ValueError, MaxAttemptsExceeded) as e:
        raise HTTPException(status_code=422, detail=str(e)) from None
    cfg = _effective(req.config, "sweep", {"kind": req.kind, "axes": req.axes, "trials": req.trials,
                                           "mode": req.mode}, req.seed, {}).model_copy(update={"jobs": req.jobs})
    rows = [_jsonable({c: r[c] for c in cols}) for r in rows]
    return SweepResponse(columns=cols, rows=rows, passed=all(r["verdict"] for r in rows), config=cfg)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x
