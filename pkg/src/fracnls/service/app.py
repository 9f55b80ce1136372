"""FastAPI wiring around the job layer.

Error mapping: invalid configs -> 400 with error kind "config", numerical
blowup -> 422 with kind "blowup", filesystem trouble -> 500 with kind "io".
The CLI translates the same kinds into its exit codes.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..dynamics import BlowupError
from .jobs import (ConfigError, execute_case, execute_compat, execute_run,
                   execute_sweep, execute_unique, run_selftest)
from .schemas import (CaseRequest, HealthResponse, ManifestResponse,
                      RunRequest, SelftestResponse)

app = FastAPI(title="fracnls", version=__version__)


def _guarded(fn, *args, **kwargs) -> dict:
    try:
        return fn(*args, **kwargs)
    except ConfigError as exc:
        raise HTTPException(status_code=400,
                            detail={"kind": "config", "message": str(exc)})
    except BlowupError as exc:
        raise HTTPException(status_code=422,
                            detail={"kind": "blowup", "message": str(exc),
                                    "step": exc.step})
    except OSError as exc:
        raise HTTPException(status_code=500,
                            detail={"kind": "io", "message": str(exc)})


def _manifest_response(out_dir: str, manifest: dict) -> ManifestResponse:
    return ManifestResponse(out_dir=out_dir, manifest=manifest,
                            warnings=manifest.get("warnings", []))


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/run", response_model=ManifestResponse)
def post_run(req: RunRequest) -> ManifestResponse:
    manifest = _guarded(execute_run, req.config, Path(req.out_dir), req.dealias)
    return _manifest_response(req.out_dir, manifest)


@app.post("/sweep", response_model=ManifestResponse)
def post_sweep(req: RunRequest) -> ManifestResponse:
    manifest = _guarded(execute_sweep, req.config, Path(req.out_dir),
                        req.dealias, req.jobs)
    return _manifest_response(req.out_dir, manifest)


@app.post("/compat", response_model=ManifestResponse)
def post_compat(req: RunRequest) -> ManifestResponse:
    manifest = _guarded(execute_compat, req.config, Path(req.out_dir),
                        req.dealias, req.jobs)
    return _manifest_response(req.out_dir, manifest)


@app.post("/unique", response_model=ManifestResponse)
def post_unique(req: RunRequest) -> ManifestResponse:
    manifest = _guarded(execute_unique, req.config, Path(req.out_dir),
                        req.dealias, req.jobs)
    return _manifest_response(req.out_dir, manifest)


@app.post("/case", response_model=ManifestResponse)
def post_case(req: CaseRequest) -> ManifestResponse:
    manifest = _guarded(execute_case, req.label, Path(req.out_dir),
                        req.overrides, req.dealias, req.jobs)
    return _manifest_response(req.out_dir, manifest)


@app.post("/selftest", response_model=SelftestResponse)
def post_selftest(seed: int = 0) -> SelftestResponse:
    return run_selftest(seed=seed)
