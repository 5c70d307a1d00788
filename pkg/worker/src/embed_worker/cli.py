"""Start the worker: load the requested backends, then serve."""

from __future__ import annotations

import argparse
import os
import sys

from .backends import BACKEND_IDS, load_backend


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embed-worker", description="embedding worker service")
    parser.add_argument(
        "--backends",
        default=BACKEND_IDS[0],
        help="comma-separated backend ids to load (default: %(default)s)",
    )
    parser.add_argument("--default", dest="default_backend", default=None,
                        help="backend used when a request names none (default: first loaded)")
    parser.add_argument("--bind", default=os.environ.get("BIND_ADDR", "127.0.0.1:8800"),
                        help="host:port (env BIND_ADDR, default 127.0.0.1:8800)")
    parser.add_argument("--seed", type=int, default=0, help="weight init seed (default: 0)")
    parser.add_argument("--max-concurrent", type=int, default=2,
                        help="encode requests allowed to run at once (default: 2)")
    args = parser.parse_args(argv)

    wanted = [b.strip() for b in args.backends.split(",") if b.strip()]
    for b in wanted:
        if b not in BACKEND_IDS:
            print(f"error: unknown backend {b!r}, supported: {', '.join(BACKEND_IDS)}",
                  file=sys.stderr)
            return 2
    if args.default_backend and args.default_backend not in wanted:
        print(f"error: default backend {args.default_backend!r} is not being loaded",
              file=sys.stderr)
        return 2

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        print(f"error: bad bind address {args.bind!r}, expected host:port", file=sys.stderr)
        return 2

    backends = {}
    for b in wanted:
        print(f"loading {b} ...", file=sys.stderr)
        backends[b] = load_backend(b, seed=args.seed)
        print(f"loaded {b}: dim {backends[b].dim}, {backends[b].parameters:,} parameters",
              file=sys.stderr)

    from .service import create_app
    import uvicorn

    app = create_app(backends, default_backend=args.default_backend or wanted[0],
                     max_concurrent=args.max_concurrent)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
