"""Candidate -> concrete layer graph with tensor shapes and parameter counts.

The backbone follows the standard MobileNetV2 recipe: a strided stem
convolution, seven stages of inverted bottleneck blocks, then a 1x1 head
convolution, global average pooling, and a two-way dense classifier.
Stages 1-2 are always present at standard depth; stages 3-7 take their
block counts from the candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .search_space import Candidate, effective_width, validate

STEM_FILTERS = 32
HEAD_FILTERS = 1280
HEAD_MIN_CHANNELS = 8
NUM_CLASSES = 2

# (blocks, expansion, base channels, stride) for the fixed stages 1-2.
FIXED_STAGES: tuple[tuple[int, int, int, int], ...] = (
    (1, 1, 16, 1),
    (2, 6, 24, 2),
)

# (expansion, base channels, stride) for the searchable stages 3-7.
SEARCHED_STAGES: tuple[tuple[int, int, int], ...] = (
    (6, 32, 2),
    (6, 64, 2),
    (6, 96, 1),
    (6, 160, 2),
    (6, 320, 1),
)


@dataclass(frozen=True)
class LayerSpec:
    """One layer: kind, input/output (h, w, c) shapes, and weight+bias count."""

    kind: str  # standard-conv | depthwise-conv | pointwise-conv | pooling | dense
    input_shape: tuple[int, int, int]
    output_shape: tuple[int, int, int]
    param_count: int

    @property
    def input_elements(self) -> int:
        h, w, c = self.input_shape
        return h * w * c

    @property
    def output_elements(self) -> int:
        h, w, c = self.output_shape
        return h * w * c


@dataclass(frozen=True)
class LayerGraph:
    """Ordered layers of an instantiated architecture."""

    layers: tuple[LayerSpec, ...]

    @property
    def input_size(self) -> int:
        """Element count of the network input tensor."""
        return self.layers[0].input_elements

    @property
    def first_layer_output(self) -> int:
        return self.layers[0].output_elements


def _round_channels(base: int, alpha_eff: float) -> int:
    return max(1, round(base * alpha_eff))


def _strided(extent: int, stride: int) -> int:
    # same-padding convolution: out = ceil(in / stride)
    return -(-extent // stride)


def instantiate(candidate: Candidate) -> LayerGraph:
    """Build the layer graph for a valid candidate.

    Every inverted bottleneck contributes three layers: a pointwise
    expansion (by the stage's expansion factor), a 3x3 depthwise
    convolution (strided only on a stage's first block), and a pointwise
    projection to the stage's channel count. Channel counts are the stage
    base scaled by the effective width and rounded, with a floor of 1
    (head floor 8). Parameter counts cover weights and biases; batch-norm
    parameters are not modeled.
    """
    problem = validate(candidate)
    if problem is not None:
        raise ValueError(f"invalid candidate: {problem}")

    alpha_eff = effective_width(candidate.model.alpha, candidate.data.color)
    layers: list[LayerSpec] = []

    h = w = candidate.data.resolution
    channels = candidate.data.channels
    stem_out = _round_channels(STEM_FILTERS, alpha_eff)
    nh, nw = _strided(h, 2), _strided(w, 2)
    layers.append(
        LayerSpec(
            "standard-conv",
            (h, w, channels),
            (nh, nw, stem_out),
            3 * 3 * channels * stem_out + stem_out,
        )
    )
    h, w, channels = nh, nw, stem_out

    stages = list(FIXED_STAGES) + [
        (blocks, expansion, base, stride)
        for blocks, (expansion, base, stride) in zip(candidate.model.depths, SEARCHED_STAGES)
    ]
    for blocks, expansion, base, stride in stages:
        stage_out = _round_channels(base, alpha_eff)
        for block in range(blocks):
            block_stride = stride if block == 0 else 1
            expanded = channels * expansion
            layers.append(
                LayerSpec(
                    "pointwise-conv",
                    (h, w, channels),
                    (h, w, expanded),
                    channels * expanded + expanded,
                )
            )
            nh, nw = _strided(h, block_stride), _strided(w, block_stride)
            layers.append(
                LayerSpec(
                    "depthwise-conv",
                    (h, w, expanded),
                    (nh, nw, expanded),
                    3 * 3 * expanded + expanded,
                )
            )
            layers.append(
                LayerSpec(
                    "pointwise-conv",
                    (nh, nw, expanded),
                    (nh, nw, stage_out),
                    expanded * stage_out + stage_out,
                )
            )
            h, w, channels = nh, nw, stage_out

    head_out = max(HEAD_MIN_CHANNELS, round(HEAD_FILTERS * alpha_eff))
    layers.append(
        LayerSpec(
            "pointwise-conv",
            (h, w, channels),
            (h, w, head_out),
            channels * head_out + head_out,
        )
    )
    layers.append(LayerSpec("pooling", (h, w, head_out), (1, 1, head_out), 0))
    layers.append(
        LayerSpec(
            "dense",
            (1, 1, head_out),
            (1, 1, NUM_CLASSES),
            head_out * NUM_CLASSES + NUM_CLASSES,
        )
    )
    return LayerGraph(tuple(layers))


def count_parameters(graph: LayerGraph) -> int:
    """Total weight+bias count across all layers."""
    return sum(layer.param_count for layer in graph.layers)
