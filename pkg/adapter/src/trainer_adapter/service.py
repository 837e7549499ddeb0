"""Pretraining and evaluation behind the wire protocol.

The service holds one supernet checkpoint per data configuration.
Pretraining builds a fresh maximal network for the configuration and
trains it with randomly sampled sub-network slices, so every candidate
later shares those weights. Evaluation extracts the candidate's slice
into a standalone copy, fine-tunes the copy briefly, and scores it on the
validation split; the checkpoint itself is never mutated by evaluation.

Training choices (logged at startup): Adam at learning rate 5e-4,
cross-entropy loss, batch size 16, one sampled sub-network per step.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .proxy_data import ProxyDataset
from .supernet import (
    ALPHAS,
    COLORS,
    DEPTH_LIMITS,
    ElasticSupernet,
    RESOLUTIONS,
    effective_width,
    extract_subnetwork,
    validate_depths,
)

log = logging.getLogger("trainer_adapter")

BATCH_SIZE = 16
# 1e-3 destabilizes the deepest full-width stacks; 5e-4 trains every
# depth in the space on the proxy task.
LEARNING_RATE = 5e-4


class AdapterError(Exception):
    """Recoverable request failure, reported as an ok:false response."""


@dataclass
class SupernetCheckpoint:
    resolution: int
    color: str
    model: ElasticSupernet
    steps_trained: int


def _derive_seed(*parts: object) -> int:
    text = ":".join(str(part) for part in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _sample_depths(rng: random.Random) -> tuple[int, ...]:
    """Random legal depth tuple, uniform over the truncation point."""
    last = rng.randint(2, 2 + len(DEPTH_LIMITS))
    return tuple(
        rng.randint(1, limit) if stage <= last else 0
        for stage, limit in enumerate(DEPTH_LIMITS, start=3)
    )


def _sample_subnetwork(rng: random.Random) -> tuple[float, tuple[int, ...]]:
    """Sandwich-style sampling: anchor the extremes, randomize the middle.

    Purely random sampling almost never visits the deepest widest paths,
    which would leave their later blocks untrained; giving the maximal
    and minimal configurations fixed shares of the steps keeps every
    slice of the shared weights in the optimization.
    """
    roll = rng.random()
    if roll < 0.25:
        return 1.0, DEPTH_LIMITS
    if roll < 0.5:
        return ALPHAS[0], (0,) * len(DEPTH_LIMITS)
    return rng.choice(ALPHAS), _sample_depths(rng)


class TrainerService:
    def __init__(self, dataset: ProxyDataset, *, device: str = "cpu",
                 checkpoint_dir: str | None = None, step_scale: float = 1.0,
                 seed: int = 0) -> None:
        if step_scale <= 0:
            raise ValueError("step scale must be positive")
        self.dataset = dataset
        self.device = torch.device(device)
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.step_scale = step_scale
        self.seed = seed
        self.checkpoints: dict[tuple[int, str], SupernetCheckpoint] = {}

    def _scaled(self, steps: int) -> int:
        if steps <= 0:
            return 0
        return max(1, round(steps * self.step_scale))

    def _checkpoint_path(self, resolution: int, color: str) -> Path | None:
        if self.checkpoint_dir is None:
            return None
        return self.checkpoint_dir / f"supernet-{resolution}-{color}.pt"

    def pretrain(self, resolution: int, color: str, steps: int) -> None:
        if resolution not in RESOLUTIONS:
            raise AdapterError(f"resolution {resolution} not in {RESOLUTIONS}")
        if color not in COLORS:
            raise AdapterError(f"unknown color mode {color!r}")
        scaled = self._scaled(steps)
        torch.manual_seed(_derive_seed(self.seed, "init", resolution, color))
        model = ElasticSupernet(color).to(self.device)
        optimizer = torch.optim.Adam(model.parameters(), lr=LEARNING_RATE)
        rng = random.Random(_derive_seed(self.seed, "pretrain", resolution, color))
        batches = torch.Generator().manual_seed(
            _derive_seed(self.seed, "batches", resolution, color))
        model.train()
        for step in range(scaled):
            images, labels = self.dataset.train_batch(
                BATCH_SIZE, resolution, color, batches)
            alpha, depths = _sample_subnetwork(rng)
            logits = model(images.to(self.device), effective_width(alpha, color), depths)
            loss = F.cross_entropy(logits, labels.to(self.device))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            if step == 0 or (step + 1) % 50 == 0:
                log.info("pretrain %dx%d %s step %d/%d loss %.4f",
                         resolution, resolution, color, step + 1, scaled, loss.item())
        checkpoint = SupernetCheckpoint(resolution, color, model, scaled)
        self.checkpoints[(resolution, color)] = checkpoint
        path = self._checkpoint_path(resolution, color)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            torch.save({"state": model.state_dict(), "steps": scaled,
                        "resolution": resolution, "color": color}, path)
            log.info("saved checkpoint %s", path)

    def _checkpoint_for(self, resolution: int, color: str) -> SupernetCheckpoint:
        key = (resolution, color)
        if key in self.checkpoints:
            return self.checkpoints[key]
        path = self._checkpoint_path(resolution, color)
        if path is not None and path.exists():
            payload = torch.load(path, map_location=self.device, weights_only=True)
            model = ElasticSupernet(color).to(self.device)
            model.load_state_dict(payload["state"])
            checkpoint = SupernetCheckpoint(resolution, color, model, int(payload["steps"]))
            self.checkpoints[key] = checkpoint
            log.info("loaded checkpoint %s", path)
            return checkpoint
        raise AdapterError("supernet not trained")

    def evaluate(self, candidate: dict, finetune_steps: int) -> dict[str, float]:
        resolution = candidate["resolution"]
        color = candidate["color"]
        depths = tuple(candidate[f"b{stage}"] for stage in range(3, 8))
        alpha = candidate["alpha"]
        if resolution not in RESOLUTIONS:
            raise AdapterError(f"invalid candidate: resolution {resolution}")
        if color not in COLORS:
            raise AdapterError(f"invalid candidate: color {color!r}")
        if alpha not in ALPHAS:
            raise AdapterError(f"invalid candidate: alpha {alpha}")
        try:
            validate_depths(depths)
        except ValueError as error:
            raise AdapterError(f"invalid candidate: {error}") from error
        checkpoint = self._checkpoint_for(resolution, color)

        model = extract_subnetwork(checkpoint.model, depths, alpha).to(self.device)
        scaled = self._scaled(finetune_steps)
        genes = (resolution, color, *depths, alpha)
        batches = torch.Generator().manual_seed(
            _derive_seed(self.seed, "finetune", *genes))
        optimizer = torch.optim.Adam(model.parameters(), lr=LEARNING_RATE)
        model.train()
        for _ in range(scaled):
            images, labels = self.dataset.train_batch(
                BATCH_SIZE, resolution, color, batches)
            loss = F.cross_entropy(model(images.to(self.device)), labels.to(self.device))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

        model.eval()
        images, labels = self.dataset.validation(resolution, color)
        with torch.no_grad():
            predictions = model(images.to(self.device)).argmax(dim=1).cpu()
        true_positive = int(((predictions == 1) & (labels == 1)).sum())
        false_positive = int(((predictions == 1) & (labels == 0)).sum())
        false_negative = int(((predictions == 0) & (labels == 1)).sum())
        accuracy = float((predictions == labels).float().mean())
        predicted = true_positive + false_positive
        actual = true_positive + false_negative
        precision = true_positive / predicted if predicted else 0.0
        recall = true_positive / actual if actual else 0.0
        log.info("evaluate %s: accuracy %.3f precision %.3f recall %.3f",
                 genes, accuracy, precision, recall)
        return {"accuracy": accuracy, "precision": precision, "recall": recall}
