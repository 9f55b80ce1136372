"""Command-line client for the solver service.

Subcommands mirror the service endpoints (run, sweep, compat, unique, case,
selftest) plus `serve` to start the HTTP server.  By default requests execute
in-process through the same job layer the endpoints use; with --url they are
POSTed to a running server instead.

Exit codes: 0 success, 2 config error, 3 numerical blowup, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .dynamics import BlowupError
from .service.jobs import (ConfigError, execute_case, execute_compat,
                           execute_run, execute_sweep, execute_unique,
                           run_selftest)
from .service.schemas import CaseOverridesModel, RunConfigModel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


def _load_config(path: str) -> RunConfigModel:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    try:
        return RunConfigModel.model_validate(raw)
    except ValidationError as exc:
        lines = [f"config {path} failed validation:"]
        for err in exc.errors():
            key = ".".join(str(x) for x in err["loc"])
            lines.append(f"  {key}: {err['msg']}")
        raise ConfigError("\n".join(lines)) from exc


def _load_overrides(path: str | None) -> CaseOverridesModel | None:
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"overrides file not found: {path}")
    try:
        raw = json.loads(p.read_text())
        return CaseOverridesModel.model_validate(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"overrides {path} is not valid JSON: {exc.msg}") from exc
    except ValidationError as exc:
        raise ConfigError(f"overrides {path} failed validation: {exc}") from exc


def _post_remote(url: str, endpoint: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(url.rstrip("/") + endpoint, json=payload, timeout=None)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", {})
        except Exception:
            detail = {}
        kind = detail.get("kind", "config") if isinstance(detail, dict) else "config"
        message = detail.get("message", resp.text) if isinstance(detail, dict) else resp.text
        if kind == "blowup":
            raise BlowupError(detail.get("step", -1), -1.0)
        if kind == "io":
            raise OSError(message)
        raise ConfigError(message)
    return resp.json()


def _summarize(manifest: dict, out_dir: str) -> None:
    files = manifest.get("files", [])
    print(f"wrote {len(files)} files to {out_dir}")
    for w in manifest.get("warnings", []):
        print(f"warning: {w}", file=sys.stderr)


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "selftest":
        report = run_selftest(seed=args.seed)
        for c in report.checks:
            print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        return EXIT_OK if report.passed else 1

    if args.command == "serve":
        import uvicorn

        from .service.app import app
        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    if args.command == "case":
        overrides = _load_overrides(args.config)
        if args.url:
            payload = {"label": args.label, "out_dir": args.out,
                       "overrides": None if overrides is None
                       else overrides.model_dump(mode="json"),
                       "dealias": args.dealias, "jobs": args.jobs}
            manifest = _post_remote(args.url, "/case", payload)["manifest"]
        else:
            manifest = execute_case(args.label, Path(args.out), overrides,
                                    args.dealias, args.jobs)
        _summarize(manifest, args.out)
        return EXIT_OK

    config = _load_config(args.config)
    if args.url:
        payload = {"config": config.model_dump(mode="json"), "out_dir": args.out,
                   "dealias": args.dealias, "jobs": args.jobs}
        manifest = _post_remote(args.url, f"/{args.command}", payload)["manifest"]
    else:
        fn = {"run": execute_run, "sweep": execute_sweep,
              "compat": execute_compat, "unique": execute_unique}[args.command]
        if args.command == "run":
            manifest = fn(config, Path(args.out), args.dealias)
        else:
            manifest = fn(config, Path(args.out), args.dealias, args.jobs)
    _summarize(manifest, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracnls",
        description="Pseudospectral fractional-NLS solver with "
                    "epsilon-regularized singular coefficients")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to the JSON run configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel per-epsilon runs")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for ensemble diagnostics")
        p.add_argument("--dealias", action="store_true",
                       help="enable the 2/3-rule spectral filter")
        p.add_argument("--url", default=None,
                       help="send the request to a running service instead")

    common(sub.add_parser("run", help="single-epsilon run"))
    common(sub.add_parser("sweep", help="epsilon sweep with moderateness fit"))
    common(sub.add_parser("compat", help="convergence to the classical solution"))
    common(sub.add_parser("unique", help="negligibility of injected perturbations"))

    p_case = sub.add_parser("case", help="run one of the paper case presets")
    p_case.add_argument("label", choices=["case1", "case2", "case3", "case4"])
    common(p_case, config_required=False)

    p_self = sub.add_parser("selftest", help="fast invariant battery")
    p_self.add_argument("--seed", type=int, default=0)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowupError as exc:
        print(f"numerical blowup: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
