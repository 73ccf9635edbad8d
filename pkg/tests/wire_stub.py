"""Protocol stub server for wire-client tests; behavior picked by --mode."""

import argparse
import json
import sys

from sentmark.embedding import toy_embed
from sentmark.toylm import GeneratorHandle, toy_next_sentence


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mode", default="toy")
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--seed", type=int, default=901)
    args = ap.parse_args()

    def embed_payload(obj, scale=1.0, dim=None, drop=0):
        vecs = [
            [v * scale for v in toy_embed(t, args.dim, args.seed)] for t in obj["texts"]
        ]
        if drop:
            vecs = vecs[:-drop]
        return {"dim": dim if dim is not None else args.dim, "embeddings": vecs}

    def respond(obj):
        if args.mode == "error":
            return {"id": obj.get("id"), "error": "synthetic failure"}
        if obj.get("op") == "continue":
            lm = GeneratorHandle("toy", args.seed)
            return {
                "id": obj["id"],
                "sentence": toy_next_sentence(lm, obj["context"], obj["try"]),
            }
        kwargs = {}
        if args.mode == "badcount":
            kwargs["drop"] = 1
        elif args.mode == "baddim":
            kwargs["dim"] = args.dim + 1
        elif args.mode == "nonunit":
            kwargs["scale"] = 3.0
        return {"id": obj["id"], **embed_payload(obj, **kwargs)}

    if args.mode == "garbage":
        sys.stdin.readline()
        sys.stdout.write("this is not json\n")
        sys.stdout.flush()
        sys.stdin.read()
        return

    if args.mode == "reverse-pairs":
        pending = []
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            pending.append(json.loads(line))
            if len(pending) == 2:
                for obj in reversed(pending):
                    sys.stdout.write(json.dumps(respond(obj)) + "\n")
                sys.stdout.flush()
                pending.clear()
        return

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        sys.stdout.write(json.dumps(respond(obj)) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
