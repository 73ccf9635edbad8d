"""Entry point: ``embed-bridge --model hash:64 --stdio`` or ``--http PORT``."""

import argparse
import sys

from .encoders import BridgeConfig, load_encoder
from .server import make_http_server, serve_stdio


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="embed-bridge",
        description="Sentence-embedding server speaking newline-delimited JSON: "
        '{"id", "op": "embed", "texts": [...]} -> {"id", "dim", "embeddings"}',
    )
    ap.add_argument(
        "--model",
        default="hash:64",
        help="hash:<dim>[:<seed>] for the built-in encoder, or a "
        "sentence-transformers model identifier",
    )
    ap.add_argument("--batch-size", type=int, default=32)
    ap.add_argument("--device", default=None, help="device hint for real models")
    transport = ap.add_mutually_exclusive_group()
    transport.add_argument("--stdio", action="store_true", help="serve on stdin/stdout (default)")
    transport.add_argument("--http", type=int, metavar="PORT", help="serve over HTTP on PORT")
    args = ap.parse_args(argv)

    config = BridgeConfig(model=args.model, batch_size=args.batch_size, device=args.device)
    try:
        encoder = load_encoder(config)
    except Exception as exc:
        print(f"error: cannot load model {config.model!r}: {exc}", file=sys.stderr)
        return 2

    if args.http is not None:
        server = make_http_server(encoder, port=args.http)
        print(f"serving on http://127.0.0.1:{server.server_address[1]}", file=sys.stderr)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        return 0
    serve_stdio(encoder)
    return 0


if __name__ == "__main__":
    sys.exit(main())
