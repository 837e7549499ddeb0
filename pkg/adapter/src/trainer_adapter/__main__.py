"""Process entry point: flags, logging, then the request loop."""

from __future__ import annotations

import argparse
import logging
import sys

import torch

from .proxy_data import SYNTHETIC_SOURCE, ProxyDataset
from .protocol import serve
from .service import BATCH_SIZE, LEARNING_RATE, TrainerService


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="trainer-adapter",
        description="External evaluator speaking newline-delimited JSON on "
        "stdin/stdout; trains one weight-shared supernet per data "
        "configuration on a small two-class image task.")
    parser.add_argument("--dataset", default=SYNTHETIC_SOURCE,
                        help="'synthetic' or a path to a saved tensor dict "
                        "{'images': (N,3,H,W) float, 'labels': (N,) int64}")
    parser.add_argument("--device", default="cpu", help="torch device string")
    parser.add_argument("--checkpoint-dir", default=None,
                        help="persist supernets here and reload them on demand")
    parser.add_argument("--step-scale", type=float, default=1.0,
                        help="multiply requested training steps, e.g. 0.01 "
                        "to desk-scale a full pretraining request")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="trainer-adapter: %(message)s")
    # Tiny models gain nothing from intra-op parallelism; pinning one
    # thread keeps per-step cost predictable.
    torch.set_num_threads(1)
    log = logging.getLogger("trainer_adapter")
    log.info("dataset=%s device=%s step_scale=%g seed=%d "
             "optimizer=Adam lr=%g batch_size=%d loss=cross_entropy",
             args.dataset, args.device, args.step_scale, args.seed,
             LEARNING_RATE, BATCH_SIZE)
    try:
        dataset = ProxyDataset(args.dataset, args.seed)
    except (OSError, ValueError, KeyError) as error:
        print(f"trainer-adapter: cannot load dataset: {error}", file=sys.stderr)
        return 1
    service = TrainerService(
        dataset, device=args.device, checkpoint_dir=args.checkpoint_dir,
        step_scale=args.step_scale, seed=args.seed)
    return serve(service)


if __name__ == "__main__":
    sys.exit(main())
