import random
from collections import Counter

import pytest

from datanas import (
    ALPHAS,
    COLORS,
    RESOLUTIONS,
    Candidate,
    DataConfig,
    ModelConfig,
    effective_width,
    enumerate_data_configs,
    random_candidate,
    repair_depths,
    validate,
)
from datanas.search_space import candidate_from_record, candidate_record


def make(resolution=96, color="rgb", depths=(1, 1, 1, 1, 1), alpha=0.5) -> Candidate:
    return Candidate(DataConfig(resolution, color), ModelConfig(depths, alpha))


class TestValidate:
    def test_full_size_is_in_space(self):
        assert validate(make(224, "rgb", (3, 4, 3, 3, 1), 1.0)) is None

    def test_truncated_monochrome_is_in_space(self):
        assert validate(make(96, "monochrome", (2, 2, 0, 0, 0), 0.5)) is None

    def test_block_after_removed_stage(self):
        problem = validate(make(depths=(0, 1, 0, 0, 0)))
        assert problem is not None
        assert problem.startswith("block after removed stage")

    def test_bad_resolution(self):
        assert "resolution" in validate(make(resolution=100))

    def test_bad_color(self):
        assert "color" in validate(make(color="grayscale"))

    def test_depth_above_stage_limit(self):
        assert "stage 4" in validate(make(depths=(1, 5, 0, 0, 0)))

    def test_negative_depth(self):
        assert "stage 3" in validate(make(depths=(-1, 0, 0, 0, 0)))

    def test_wrong_depth_arity(self):
        assert "entries" in validate(make(depths=(1, 1, 1)))

    def test_alpha_off_grid(self):
        assert "alpha" in validate(make(alpha=0.15))

    def test_all_stages_removed_is_legal(self):
        assert validate(make(depths=(0, 0, 0, 0, 0))) is None


class TestEffectiveWidth:
    def test_rgb_identity(self):
        assert effective_width(0.5, "rgb") == 0.5

    def test_monochrome_reduction_exact(self):
        for alpha in ALPHAS:
            assert effective_width(alpha, "monochrome") == alpha * (2 / 3)


class TestRepairDepths:
    def test_zeroes_after_first_gap(self):
        assert repair_depths((3, 0, 2, 1, 0)) == (3, 0, 0, 0, 0)

    def test_leading_zero_clears_everything(self):
        assert repair_depths((0, 4, 3, 3, 1)) == (0, 0, 0, 0, 0)

    def test_feasible_tuple_untouched(self):
        assert repair_depths((2, 2, 1, 0, 0)) == (2, 2, 1, 0, 0)


class TestRandomCandidate:
    def test_always_valid(self):
        rng = random.Random(1)
        for _ in range(2000):
            assert validate(random_candidate(rng)) is None

    def test_deterministic_given_seed(self):
        a = random_candidate(random.Random(42))
        b = random_candidate(random.Random(42))
        assert a == b

    def test_truncation_point_uniform(self):
        # Last non-empty stage is drawn first, uniform over {2..7} where
        # 2 stands for "all searched stages removed".
        rng = random.Random(7)
        counts = Counter()
        n = 12000
        for _ in range(n):
            depths = random_candidate(rng).model.depths
            last = max((3 + i for i, b in enumerate(depths) if b > 0), default=2)
            counts[last] += 1
        assert set(counts) == {2, 3, 4, 5, 6, 7}
        for stage in counts:
            assert counts[stage] / n == pytest.approx(1 / 6, abs=0.02)

    def test_fixed_genes_respected(self):
        rng = random.Random(5)
        for _ in range(200):
            c = random_candidate(rng, fixed_resolution=224, fixed_color="rgb")
            assert c.data.resolution == 224
            assert c.data.color == "rgb"
            assert validate(c) is None


class TestEnumerateDataConfigs:
    def test_count(self):
        assert len(enumerate_data_configs()) == 14

    def test_ordering(self):
        configs = enumerate_data_configs()
        assert configs[0] == DataConfig(32, "monochrome")
        assert configs[1] == DataConfig(32, "rgb")
        assert configs[-1] == DataConfig(224, "rgb")

    def test_each_pair_once(self):
        configs = enumerate_data_configs()
        assert len(set(configs)) == 14
        assert configs.count(DataConfig(160, "rgb")) == 1


class TestCandidateRecord:
    def test_round_trip(self):
        rng = random.Random(11)
        for _ in range(100):
            c = random_candidate(rng)
            assert candidate_from_record(candidate_record(c)) == c

    def test_flat_keys(self):
        record = candidate_record(make(64, "monochrome", (2, 1, 0, 0, 0), 0.3))
        assert record == {
            "resolution": 64,
            "color": "monochrome",
            "b3": 2,
            "b4": 1,
            "b5": 0,
            "b6": 0,
            "b7": 0,
            "alpha": 0.3,
        }


def test_uid_does_not_affect_equality():
    a = Candidate(DataConfig(96, "rgb"), ModelConfig((1, 0, 0, 0, 0), 0.4), uid=1)
    b = Candidate(DataConfig(96, "rgb"), ModelConfig((1, 0, 0, 0, 0), 0.4), uid=2)
    assert a == b


def test_channel_counts():
    assert DataConfig(96, "monochrome").channels == 1
    assert DataConfig(96, "rgb").channels == 3
