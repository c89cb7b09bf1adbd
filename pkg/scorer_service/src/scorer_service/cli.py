"""Entry point: train a checkpoint or serve one."""

from __future__ import annotations

import argparse
import json
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="scorer-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a classifier checkpoint")
    p.add_argument("--config", required=True, help="TrainingConfig JSON file")

    p = sub.add_parser("serve", help="serve a checkpoint over HTTP")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8900)

    args = parser.parse_args(argv)
    if args.command == "train":
        from .training import TrainingConfig, train
        report = train(TrainingConfig.from_path(args.config))
        print(json.dumps(
            {k: report[k] for k in
             ("n_train_pairs", "train_accuracy", "validation_accuracy",
              "duration_s")},
            indent=2,
        ))
        return 0
    if args.command == "serve":
        import uvicorn
        from .service import create_app
        uvicorn.run(create_app(args.checkpoint), host=args.host, port=args.port)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
