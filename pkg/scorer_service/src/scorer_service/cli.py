"""Serve the scoring API: `scorer-service --model lexical --port 8000`."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .backends import make_backend, sanity_check


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scorer-service")
    parser.add_argument(
        "--model",
        default="lexical",
        help="'lexical' or 'hf:<model-name>' for a transformers NLI classifier",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--device", default="cpu")
    parser.add_argument(
        "--skip-sanity-check",
        action="store_true",
        help="skip the identity-pair check run before the model is accepted",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    def backend_factory():
        backend = make_backend(args.model, device=args.device)
        if not args.skip_sanity_check:
            sanity_check(backend)
        return backend

    uvicorn.run(create_app(backend_factory), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
