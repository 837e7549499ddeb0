"""Reference computations used only by the tests.

Everything here is recomputed from first principles with plain Python
arithmetic, deliberately sharing no helpers with the package under test.
"""

from __future__ import annotations

import math


def walk_layers(
    resolution: int,
    color: str,
    depths: tuple[int, int, int, int, int],
    alpha: float,
) -> list[tuple[int, int]]:
    """Return (weight_count, activation_in + activation_out) per layer.

    The architecture is rebuilt step by step: a strided 3x3 stem, seven
    inverted-bottleneck stages (two fixed, five searched), a pointwise
    head, global pooling, and a two-way dense classifier. Convolutions
    carry biases; batch normalization contributes nothing.
    """
    alpha_eff = alpha if color == "rgb" else alpha * (2.0 / 3.0)

    def channels(base: int) -> int:
        return max(1, round(base * alpha_eff))

    layers: list[tuple[int, int]] = []
    h = w = resolution
    c = 3 if color == "rgb" else 1

    def emit(params: int, h2: int, w2: int, c2: int) -> None:
        nonlocal h, w, c
        layers.append((params, h * w * c + h2 * w2 * c2))
        h, w, c = h2, w2, c2

    # stem
    out_c = channels(32)
    emit(3 * 3 * c * out_c + out_c, math.ceil(h / 2), math.ceil(w / 2), out_c)

    stage_table = [
        (1, 1, 16, 1),
        (2, 6, 24, 2),
        (depths[0], 6, 32, 2),
        (depths[1], 6, 64, 2),
        (depths[2], 6, 96, 1),
        (depths[3], 6, 160, 2),
        (depths[4], 6, 320, 1),
    ]
    for blocks, expansion, base, stride in stage_table:
        out_c = channels(base)
        for block in range(blocks):
            s = stride if block == 0 else 1
            mid = c * expansion
            emit(1 * 1 * c * mid + mid, h, w, mid)
            emit(3 * 3 * mid + mid, math.ceil(h / s), math.ceil(w / s), mid)
            emit(1 * 1 * mid * out_c + out_c, h, w, out_c)

    head = max(8, round(1280 * alpha_eff))
    emit(1 * 1 * c * head + head, h, w, head)
    emit(0, 1, 1, head)  # global average pooling
    emit(head * 2 + 2, 1, 1, 2)  # dense classifier
    return layers


def parameter_count(resolution, color, depths, alpha) -> int:
    return sum(p for p, _ in walk_layers(resolution, color, depths, alpha))


def flash_bytes(resolution, color, depths, alpha, bytes_per_element=1, overhead=0) -> int:
    return parameter_count(resolution, color, depths, alpha) * bytes_per_element + overhead


def ram_bytes(resolution, color, depths, alpha, bytes_per_element=1) -> int:
    layers = walk_layers(resolution, color, depths, alpha)
    return max(act for _, act in layers) * bytes_per_element


def pareto_front_indices(points: list[tuple[float, int, int]]) -> set[int]:
    """O(n^2) non-dominance over (accuracy up, ram down, flash down)."""

    def dominates(a, b):
        no_worse = a[0] >= b[0] and a[1] <= b[1] and a[2] <= b[2]
        better = a[0] > b[0] or a[1] < b[1] or a[2] < b[2]
        return no_worse and better

    return {
        i
        for i, p in enumerate(points)
        if not any(dominates(q, p) for j, q in enumerate(points) if j != i)
    }


def surrogate_accuracy(resolution, color, depths, alpha) -> float:
    """Noise-free accuracy from the published coefficient values."""
    alpha_eff = alpha if color == "rgb" else alpha * (2.0 / 3.0)
    z = (
        -1.0
        + 0.35 * math.log2(resolution / 32)
        + 1.2 * alpha_eff
        + 0.08 * sum(depths)
        + (0.25 if color == "rgb" else 0.0)
    )
    return 0.5 + 0.45 / (1.0 + math.exp(-z))
