"""Small two-class image task for supernet training.

The default source synthesizes striped images whose orientation encodes
the class: horizontal stripes for class 0, vertical for class 1, with
random phase and additive noise. Orientation is invisible to global
statistics (both classes share mean and variance) but trivially visible
to a 3x3 convolution, so the score measures whether the network learned
features rather than a brightness shortcut. A file source loads a saved
tensor dict instead: ``{"images": float tensor (N, 3, H, W) in [0, 1],
"labels": int64 tensor (N,)}``, of which the last quarter becomes the
validation split.

Images are stored once at their native size; batches are resized and
color-converted on demand for whatever data configuration the engine is
exercising, with the validation split cached per configuration.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

SYNTHETIC_SOURCE = "synthetic"
_SYNTHETIC_SIZE = 32
_SYNTHETIC_TRAIN = 256
_SYNTHETIC_VAL = 128
_PERIOD = 8.0
_AMPLITUDE = 0.35
_NOISE = 0.15


def _synthesize(count: int, generator: torch.Generator) -> tuple[torch.Tensor, torch.Tensor]:
    labels = torch.randint(0, 2, (count,), generator=generator)
    phase = torch.rand((count, 1), generator=generator) * _PERIOD
    coords = torch.arange(_SYNTHETIC_SIZE, dtype=torch.float32)
    waves = 0.5 + _AMPLITUDE * torch.sin(
        2.0 * torch.pi * (coords.unsqueeze(0) + phase) / _PERIOD)
    rows = waves.unsqueeze(2).expand(-1, -1, _SYNTHETIC_SIZE)  # varies along y
    columns = waves.unsqueeze(1).expand(-1, _SYNTHETIC_SIZE, -1)  # varies along x
    pattern = torch.where(labels.view(-1, 1, 1).bool(), columns, rows)
    noise = _NOISE * (torch.rand(
        (count, 1, _SYNTHETIC_SIZE, _SYNTHETIC_SIZE), generator=generator) - 0.5)
    images = (pattern.unsqueeze(1) + noise).expand(-1, 3, -1, -1)
    return images.clamp(0.0, 1.0).contiguous(), labels


class ProxyDataset:
    def __init__(self, source: str, seed: int) -> None:
        self.source = source
        if source == SYNTHETIC_SOURCE:
            generator = torch.Generator().manual_seed(seed)
            self.train_images, self.train_labels = _synthesize(_SYNTHETIC_TRAIN, generator)
            self.val_images, self.val_labels = _synthesize(_SYNTHETIC_VAL, generator)
        else:
            payload = torch.load(source, map_location="cpu", weights_only=True)
            images = payload["images"].float()
            labels = payload["labels"].long()
            if images.ndim != 4 or images.shape[1] != 3:
                raise ValueError("dataset images must have shape (N, 3, H, W)")
            if labels.shape != (images.shape[0],):
                raise ValueError("dataset labels must be one int64 per image")
            split = max(1, (3 * len(images)) // 4)
            self.train_images, self.train_labels = images[:split], labels[:split]
            self.val_images, self.val_labels = images[split:], labels[split:]
        if not len(self.train_images) or not len(self.val_images):
            raise ValueError("dataset too small to split")
        self._val_cache: dict[tuple[int, str], torch.Tensor] = {}

    @staticmethod
    def _prepare(images: torch.Tensor, resolution: int, color: str) -> torch.Tensor:
        if images.shape[-1] != resolution:
            images = F.interpolate(images, size=(resolution, resolution),
                                   mode="bilinear", align_corners=False)
        if color == "monochrome":
            images = images.mean(dim=1, keepdim=True)
        return images

    def train_batch(self, batch_size: int, resolution: int, color: str,
                    generator: torch.Generator) -> tuple[torch.Tensor, torch.Tensor]:
        indices = torch.randint(0, len(self.train_images), (batch_size,),
                                generator=generator)
        images = self._prepare(self.train_images[indices], resolution, color)
        return images, self.train_labels[indices]

    def validation(self, resolution: int, color: str) -> tuple[torch.Tensor, torch.Tensor]:
        key = (resolution, color)
        if key not in self._val_cache:
            self._val_cache[key] = self._prepare(self.val_images, resolution, color)
        return self._val_cache[key], self.val_labels
