"""Elastic weight-shared supernet and sub-network extraction.

One supernet per data configuration holds every layer at its maximal
channel count (width multiplier 1.0 for the configuration's color mode)
and maximal depth. Narrower or shallower candidates run as slices of the
same parameter tensors: the lowest-index channels and the first blocks of
each stage. Extraction copies those slices into a plain standalone module
whose parameter count equals what the search engine computes for the same
candidate.

The architecture tables below mirror the engine's published recipe; they
are part of the process boundary contract, and the consistency test suite
checks the two sides stay in lockstep. Nothing here imports the engine.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from torch import nn

RESOLUTIONS = (32, 64, 96, 128, 160, 192, 224)
COLORS = ("monochrome", "rgb")
ALPHAS = tuple(i / 10 for i in range(1, 11))
DEPTH_LIMITS = (3, 4, 3, 3, 1)

MONO_WIDTH_FACTOR = 2 / 3
STEM_FILTERS = 32
# (blocks, expansion, base channels, stride)
FIXED_STAGES = ((1, 1, 16, 1), (2, 6, 24, 2))
# (expansion, base channels, stride), one per searched stage
SEARCHED_STAGES = ((6, 32, 2), (6, 64, 2), (6, 96, 1), (6, 160, 2), (6, 320, 1))
HEAD_FILTERS = 1280
HEAD_MIN_CHANNELS = 8
NUM_CLASSES = 2


def effective_width(alpha: float, color: str) -> float:
    """Monochrome trades channel capacity for the dropped color planes."""
    return alpha * MONO_WIDTH_FACTOR if color == "monochrome" else alpha


def round_channels(base: int, alpha_eff: float) -> int:
    return max(1, round(base * alpha_eff))


def head_channels(alpha_eff: float) -> int:
    return max(HEAD_MIN_CHANNELS, round(HEAD_FILTERS * alpha_eff))


def input_channels(color: str) -> int:
    return 1 if color == "monochrome" else 3


def validate_depths(depths: tuple[int, ...]) -> None:
    if len(depths) != len(DEPTH_LIMITS):
        raise ValueError(f"expected {len(DEPTH_LIMITS)} stage depths, got {len(depths)}")
    for depth, limit in zip(depths, DEPTH_LIMITS):
        if not 0 <= depth <= limit:
            raise ValueError(f"stage depth {depth} outside [0, {limit}]")
    seen_zero = False
    for depth in depths:
        if seen_zero and depth:
            raise ValueError("block after removed stage")
        seen_zero = seen_zero or depth == 0


@dataclass(frozen=True)
class BlockPlan:
    """Static description of one inverted-residual block position."""

    in_base: int
    out_base: int
    expansion: int
    stride: int


def block_plans(depths: tuple[int, ...]) -> list[BlockPlan]:
    """Blocks of the architecture with the given searched-stage depths.

    Base channel counts chain from the stem through every present stage;
    the actual counts come from scaling each base by the effective width.
    """
    plans: list[BlockPlan] = []
    in_base = STEM_FILTERS
    stages = list(FIXED_STAGES) + [
        (blocks, expansion, base, stride)
        for blocks, (expansion, base, stride) in zip(depths, SEARCHED_STAGES)
    ]
    for blocks, expansion, base, stride in stages:
        for index in range(blocks):
            plans.append(BlockPlan(in_base, base, expansion, stride if index == 0 else 1))
            in_base = base
    return plans


def _conv(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor,
          stride: int = 1, padding: int = 0, groups: int = 1) -> torch.Tensor:
    return F.conv2d(x, weight, bias, stride=stride, padding=padding, groups=groups)


def _norm(x: torch.Tensor) -> torch.Tensor:
    """Parameter-free per-sample normalization.

    Without it the no-norm stack attenuates activations into the noise
    floor within a dozen layers and nothing trains. A single-group
    group norm with no affine terms keeps signals O(1) at any depth while
    adding zero parameters, so extracted parameter counts still equal the
    engine's, and zero state, so weight sharing stays clean.
    """
    return F.group_norm(x, 1)


class _MaxBlock(nn.Module):
    """Maximal-width storage for one block position.

    The expansion conv is always present, including expansion factor 1,
    matching the engine's parameter accounting.
    """

    def __init__(self, plan: BlockPlan, alpha_max: float) -> None:
        super().__init__()
        self.plan = plan
        in_max = round_channels(plan.in_base, alpha_max)
        out_max = round_channels(plan.out_base, alpha_max)
        expanded_max = in_max * plan.expansion
        self.expand = nn.Conv2d(in_max, expanded_max, 1)
        self.depthwise = nn.Conv2d(
            expanded_max, expanded_max, 3,
            stride=plan.stride, padding=1, groups=expanded_max,
        )
        self.project = nn.Conv2d(expanded_max, out_max, 1)

    def forward_slice(self, x: torch.Tensor, in_count: int, out_count: int) -> torch.Tensor:
        expanded = in_count * self.plan.expansion
        h = F.relu6(_norm(_conv(x, self.expand.weight[:expanded, :in_count],
                                self.expand.bias[:expanded])))
        h = F.relu6(_norm(_conv(h, self.depthwise.weight[:expanded],
                                self.depthwise.bias[:expanded],
                                stride=self.plan.stride, padding=1, groups=expanded)))
        h = _norm(_conv(h, self.project.weight[:out_count, :expanded],
                        self.project.bias[:out_count]))
        if self.plan.stride == 1 and in_count == out_count:
            return x + h
        return h


class ElasticSupernet(nn.Module):
    """Maximal network for one color mode, runnable at any width and depth.

    `forward` takes the candidate's effective width and searched-stage
    depths and routes the input through the corresponding slices. Training
    steps on sampled sub-networks update the shared underlying tensors,
    which is what lets one pretraining serve every candidate of the data
    configuration.
    """

    def __init__(self, color: str) -> None:
        super().__init__()
        if color not in COLORS:
            raise ValueError(f"unknown color mode {color!r}")
        self.color = color
        self.alpha_max = effective_width(1.0, color)
        stem_max = round_channels(STEM_FILTERS, self.alpha_max)
        self.stem = nn.Conv2d(input_channels(color), stem_max, 3, stride=2, padding=1)
        self.blocks = nn.ModuleList(
            _MaxBlock(plan, self.alpha_max) for plan in block_plans(DEPTH_LIMITS)
        )
        head_max = head_channels(self.alpha_max)
        project_in_max = round_channels(SEARCHED_STAGES[-1][1], self.alpha_max)
        self.head = nn.Conv2d(project_in_max, head_max, 1)
        self.classifier = nn.Linear(head_max, NUM_CLASSES)

    def forward(self, x: torch.Tensor, alpha_eff: float,
                depths: tuple[int, ...]) -> torch.Tensor:
        validate_depths(depths)
        stem_count = round_channels(STEM_FILTERS, alpha_eff)
        x = F.relu6(_norm(_conv(x, self.stem.weight[:stem_count],
                                self.stem.bias[:stem_count], stride=2, padding=1)))
        count = stem_count
        used = block_plans(depths)
        # Present blocks occupy the first slots of their stage in the
        # maximal layout; walk both lists in step, skipping absent slots.
        slot = 0
        max_plans = [block.plan for block in self.blocks]
        for plan in used:
            while max_plans[slot] != plan:
                slot += 1
            out_count = round_channels(plan.out_base, alpha_eff)
            x = self.blocks[slot].forward_slice(x, count, out_count)
            count = out_count
            slot += 1
        head_count = head_channels(alpha_eff)
        x = F.relu6(_norm(_conv(x, self.head.weight[:head_count, :count],
                                self.head.bias[:head_count])))
        x = F.adaptive_avg_pool2d(x, 1).flatten(1)
        return F.linear(x, self.classifier.weight[:, :head_count], self.classifier.bias)


class SubNetwork(nn.Module):
    """Standalone candidate network with its own (copied) parameters."""

    def __init__(self, color: str, depths: tuple[int, ...], alpha: float) -> None:
        super().__init__()
        validate_depths(depths)
        alpha_eff = effective_width(alpha, color)
        self.plans = block_plans(depths)
        count = round_channels(STEM_FILTERS, alpha_eff)
        self.stem = nn.Conv2d(input_channels(color), count, 3, stride=2, padding=1)
        convs = []
        self.residual: list[bool] = []
        for plan in self.plans:
            in_count = count
            out_count = round_channels(plan.out_base, alpha_eff)
            expanded = in_count * plan.expansion
            convs.append(nn.ModuleDict({
                "expand": nn.Conv2d(in_count, expanded, 1),
                "depthwise": nn.Conv2d(expanded, expanded, 3, stride=plan.stride,
                                       padding=1, groups=expanded),
                "project": nn.Conv2d(expanded, out_count, 1),
            }))
            self.residual.append(plan.stride == 1 and in_count == out_count)
            count = out_count
        self.blocks = nn.ModuleList(convs)
        head_count = head_channels(alpha_eff)
        self.head = nn.Conv2d(count, head_count, 1)
        self.classifier = nn.Linear(head_count, NUM_CLASSES)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = F.relu6(_norm(self.stem(x)))
        for block, skip in zip(self.blocks, self.residual):
            h = F.relu6(_norm(block["expand"](x)))
            h = F.relu6(_norm(block["depthwise"](h)))
            h = _norm(block["project"](h))
            x = x + h if skip else h
        x = F.relu6(_norm(self.head(x)))
        x = F.adaptive_avg_pool2d(x, 1).flatten(1)
        return self.classifier(x)


def _copy_slice(dst: nn.Module, src: nn.Module, out_count: int, in_count: int | None) -> None:
    with torch.no_grad():
        if in_count is None:  # depthwise: weight shape (out, 1, k, k)
            dst.weight.copy_(src.weight[:out_count])
        else:
            dst.weight.copy_(src.weight[:out_count, :in_count])
        dst.bias.copy_(src.bias[:out_count])


def extract_subnetwork(supernet: ElasticSupernet, depths: tuple[int, ...],
                       alpha: float) -> SubNetwork:
    """Copy the candidate's weight slices out into a standalone module.

    The supernet is read, never written; fine-tuning the returned module
    leaves the shared checkpoint untouched.
    """
    color = supernet.color
    alpha_eff = effective_width(alpha, color)
    sub = SubNetwork(color, depths, alpha)
    _copy_slice(sub.stem, supernet.stem, sub.stem.out_channels, sub.stem.in_channels)
    max_plans = [block.plan for block in supernet.blocks]
    slot = 0
    for plan, block in zip(sub.plans, sub.blocks):
        while max_plans[slot] != plan:
            slot += 1
        source = supernet.blocks[slot]
        expanded = block["expand"].out_channels
        _copy_slice(block["expand"], source.expand, expanded, block["expand"].in_channels)
        _copy_slice(block["depthwise"], source.depthwise, expanded, None)
        _copy_slice(block["project"], source.project, block["project"].out_channels, expanded)
        slot += 1
    head_count = head_channels(alpha_eff)
    _copy_slice(sub.head, supernet.head, head_count, sub.head.in_channels)
    with torch.no_grad():
        sub.classifier.weight.copy_(supernet.classifier.weight[:, :head_count])
        sub.classifier.bias.copy_(supernet.classifier.bias)
    return sub


def count_parameters(module: nn.Module) -> int:
    return sum(parameter.numel() for parameter in module.parameters())
