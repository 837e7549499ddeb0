"""Joint data + model search space: genome types, validation, sampling.

A candidate couples an input-data configuration (square resolution, color
encoding) with a MobileNetV2-style model configuration (per-stage block
counts for the searchable stages 3-7, plus a width multiplier alpha).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

RESOLUTIONS: tuple[int, ...] = (32, 64, 96, 128, 160, 192, 224)
COLORS: tuple[str, ...] = ("monochrome", "rgb")
ALPHAS: tuple[float, ...] = tuple(i / 10 for i in range(1, 11))

# Upper block count per searchable stage (stages 3..7).
DEPTH_LIMITS: tuple[int, ...] = (3, 4, 3, 3, 1)

# Monochrome input carries a third of the information of rgb; the model
# width is shrunk by the same third.
MONO_WIDTH_FACTOR = 2 / 3

FIRST_SEARCHED_STAGE = 3


@dataclass(frozen=True)
class DataConfig:
    """Input-data configuration: square image side length and color encoding."""

    resolution: int
    color: str

    @property
    def channels(self) -> int:
        return 1 if self.color == "monochrome" else 3


@dataclass(frozen=True)
class ModelConfig:
    """Model configuration: block counts for stages 3-7 and width multiplier."""

    depths: tuple[int, int, int, int, int]
    alpha: float

    @property
    def total_depth(self) -> int:
        return sum(self.depths)


@dataclass(frozen=True)
class Candidate:
    """A search point: data configuration plus model configuration.

    ``uid`` tags the candidate within a run for bookkeeping; two candidates
    with equal genomes compare equal regardless of their uids.
    """

    data: DataConfig
    model: ModelConfig
    uid: int | None = field(default=None, compare=False)


def effective_width(alpha: float, color: str) -> float:
    """Width multiplier after the monochrome reduction, applied before rounding."""
    return alpha * MONO_WIDTH_FACTOR if color == "monochrome" else alpha


def validate(candidate: Candidate) -> str | None:
    """Return ``None`` if the candidate is in-space, else the first violated rule."""
    data, model = candidate.data, candidate.model
    if data.resolution not in RESOLUTIONS:
        return f"resolution {data.resolution!r} not one of {RESOLUTIONS}"
    if data.color not in COLORS:
        return f"color {data.color!r} not one of {COLORS}"
    depths = tuple(model.depths)
    if len(depths) != len(DEPTH_LIMITS):
        return f"depths must have {len(DEPTH_LIMITS)} entries, got {len(depths)}"
    for i, (b, limit) in enumerate(zip(depths, DEPTH_LIMITS)):
        stage = FIRST_SEARCHED_STAGE + i
        if not isinstance(b, int) or not 0 <= b <= limit:
            return f"stage {stage} depth {b!r} outside 0..{limit}"
    for i in range(len(depths) - 1):
        if depths[i] == 0 and depths[i + 1] > 0:
            return (
                "block after removed stage: stage "
                f"{FIRST_SEARCHED_STAGE + i + 1} has {depths[i + 1]} blocks but "
                f"stage {FIRST_SEARCHED_STAGE + i} is removed"
            )
    if model.alpha not in ALPHAS:
        return f"alpha {model.alpha!r} not one of {ALPHAS}"
    return None


def repair_depths(depths: tuple[int, ...]) -> tuple[int, int, int, int, int]:
    """Zero every stage after the first removed one (suffix-zero feasibility)."""
    repaired = []
    removed = False
    for b in depths:
        removed = removed or b == 0
        repaired.append(0 if removed else b)
    return tuple(repaired)


def random_candidate(
    rng: random.Random,
    *,
    fixed_resolution: int | None = None,
    fixed_color: str | None = None,
    uid: int | None = None,
) -> Candidate:
    """Sample a uniformly spread valid candidate.

    Depth sampling is two-stage: first the truncation point (last non-empty
    stage, uniform over "none" plus stages 3..7), then each kept stage's
    block count uniform over 1..limit. Sampling truncation first keeps deep
    genomes as likely as shallow ones despite the suffix-zero rule.
    """
    resolution = fixed_resolution if fixed_resolution is not None else rng.choice(RESOLUTIONS)
    color = fixed_color if fixed_color is not None else rng.choice(COLORS)
    last_stage = rng.randint(FIRST_SEARCHED_STAGE - 1, FIRST_SEARCHED_STAGE + len(DEPTH_LIMITS) - 1)
    depths = tuple(
        rng.randint(1, limit) if FIRST_SEARCHED_STAGE + i <= last_stage else 0
        for i, limit in enumerate(DEPTH_LIMITS)
    )
    alpha = rng.choice(ALPHAS)
    return Candidate(DataConfig(resolution, color), ModelConfig(depths, alpha), uid=uid)


def enumerate_data_configs() -> list[DataConfig]:
    """All data configurations, resolution ascending, monochrome before rgb."""
    return [DataConfig(r, c) for r in RESOLUTIONS for c in COLORS]


def candidate_record(candidate: Candidate) -> dict:
    """Flat serialization of the genome used by run artifacts and the wire protocol."""
    b3, b4, b5, b6, b7 = candidate.model.depths
    return {
        "resolution": candidate.data.resolution,
        "color": candidate.data.color,
        "b3": b3,
        "b4": b4,
        "b5": b5,
        "b6": b6,
        "b7": b7,
        "alpha": candidate.model.alpha,
    }


def candidate_from_record(record: dict, *, uid: int | None = None) -> Candidate:
    """Inverse of :func:`candidate_record`."""
    depths = tuple(int(record[f"b{i}"]) for i in range(3, 8))
    return Candidate(
        DataConfig(int(record["resolution"]), str(record["color"])),
        ModelConfig(depths, float(record["alpha"])),
        uid=uid,
    )
