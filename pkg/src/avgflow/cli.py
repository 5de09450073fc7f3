"""Command-line client for the experiment service.

By default the commands talk to an in-process application, so no server
needs to run; ``--server URL`` targets a live instance instead.  The
service returns artifacts inline and this client writes them to disk,
which keeps output bytes independent of the transport.

Exit codes: 0 success, 1 verification found failures, 2 config or parse
error, 3 numerical divergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import httpx
from pydantic import ValidationError

from .experiments import ExperimentConfig

OUTPUT_ENV = "AVGFLOW_OUT"

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4


def _client(server: Optional[str]):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # some starlette builds deprecate their httpx-based test client;
        # it is our in-process transport, not a test shim, so keep quiet
        warnings.filterwarnings(
            "ignore", message="Using `httpx` with `starlette.testclient`")
        from starlette.testclient import TestClient

    from .service import create_app
    return TestClient(create_app())


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _error_exit(response) -> int:
    """Map an error response to an exit code, printing its message."""
    try:
        detail = response.json().get("detail")
    except ValueError:
        detail = response.text
    if isinstance(detail, dict):
        kind = detail.get("kind")
        message = detail.get("message", "")
    else:
        kind, message = "parse", json.dumps(detail)
    code = EXIT_DIVERGENCE if kind == "divergence" else EXIT_PARSE
    if response.status_code not in (400, 409, 422):
        code = EXIT_IO
    return _fail(f"error ({response.status_code}): {message}", code)


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        return _fail(f"cannot read config: {exc}", EXIT_IO)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        return _fail(f"config is not valid JSON: {exc}", EXIT_PARSE)
    if not isinstance(doc, dict):
        return _fail("config must be a JSON object", EXIT_PARSE)
    if args.out is not None:
        doc["output_dir"] = args.out
    try:
        config = ExperimentConfig.model_validate(doc)
    except ValidationError as exc:
        return _fail(f"config rejected:\n{exc}", EXIT_PARSE)

    out_dir = config.output_dir or os.environ.get(OUTPUT_ENV) or "."
    try:
        with _client(args.server) as client:
            response = client.post(
                "/experiments/run",
                json={"config": json.loads(config.model_dump_json()),
                      "jobs": args.jobs})
    except httpx.HTTPError as exc:
        return _fail(f"transport failure: {exc}", EXIT_IO)
    if response.status_code != 200:
        return _error_exit(response)

    body = response.json()
    try:
        os.makedirs(out_dir, exist_ok=True)
        for artifact in body["artifacts"]:
            with open(os.path.join(out_dir, artifact["name"]), "w") as fh:
                fh.write(artifact["text"])
    except OSError as exc:
        return _fail(f"cannot write outputs: {exc}", EXIT_IO)

    for point in body["points"]:
        state = "pass" if point["passed"] else "FAIL"
        print(f"{point['label']}: suite {point['suite']} {state}")
    print(f"wrote {len(body['artifacts'])} files to {out_dir}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        with _client(args.server) as client:
            response = client.post(
                "/verify",
                json={"suites": args.suites or None, "jobs": args.jobs})
    except httpx.HTTPError as exc:
        return _fail(f"transport failure: {exc}", EXIT_IO)
    if response.status_code != 200:
        return _error_exit(response)
    body = response.json()
    print(body["table"])
    return EXIT_OK if body["all_passed"] else EXIT_VERIFY_FAILED


def _cmd_list(args) -> int:
    try:
        with _client(args.server) as client:
            response = client.get("/catalog")
    except httpx.HTTPError as exc:
        return _fail(f"transport failure: {exc}", EXIT_IO)
    if response.status_code != 200:
        return _error_exit(response)
    body = response.json()
    if args.json:
        print(json.dumps(body, indent=2, sort_keys=True))
        return EXIT_OK
    for section in ("dynamics", "algorithms", "problems", "suites"):
        print(f"{section}:")
        for entry in body[section]:
            print(f"  {entry['name']:<20} {entry['tag']}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avgflow",
        description="Run averaged-flow experiments and verification batteries.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured experiment sweep")
    run.add_argument("config", help="path to a JSON experiment config")
    run.add_argument("--jobs", type=int, default=1,
                     help="concurrent sweep points")
    run.add_argument("--out", default=None,
                     help=f"output directory (overrides config and "
                          f"${OUTPUT_ENV})")
    run.add_argument("--server", default=None,
                     help="base URL of a running service")
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify", help="run the verification battery")
    verify.add_argument("suites", nargs="*",
                        help="suite names to run (default: all)")
    verify.add_argument("--jobs", type=int, default=4,
                        help="concurrent battery points")
    verify.add_argument("--server", default=None,
                        help="base URL of a running service")
    verify.set_defaults(func=_cmd_verify)

    lst = sub.add_parser("list", help="list dynamics, algorithms, problems, "
                                      "and suites")
    lst.add_argument("--json", action="store_true",
                     help="machine-readable output")
    lst.add_argument("--server", default=None,
                     help="base URL of a running service")
    lst.set_defaults(func=_cmd_list)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        return _fail("--jobs must be >= 1", EXIT_PARSE)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
