import random

import pytest

import oracle
from datanas import (
    Candidate,
    DataConfig,
    DatatypeSize,
    ModelConfig,
    estimate,
    estimate_flash,
    estimate_ram,
    instantiate,
    random_candidate,
)
from datanas.arch_model import LayerGraph, LayerSpec


def single_layer_graph() -> LayerGraph:
    layer = LayerSpec(
        kind="standard-conv",
        input_shape=(4, 4, 1),
        output_shape=(2, 2, 1),
        param_count=224,
    )
    return LayerGraph(layers=(layer,))


def test_datatype_size_must_be_positive():
    with pytest.raises(ValueError):
        DatatypeSize(bytes_per_element=0)


def test_flash_is_parameters_times_datatype():
    graph = single_layer_graph()
    assert estimate_flash(graph, DatatypeSize(1)) == 224
    assert estimate_flash(graph, DatatypeSize(4)) == 896


def test_flash_overhead_is_added_once():
    graph = single_layer_graph()
    assert estimate_flash(graph, DatatypeSize(1), overhead_bytes=1000) == 1224


def test_flash_of_parameterless_graph():
    layer = LayerSpec("pooling", (2, 2, 4), (1, 1, 4), 0)
    assert estimate_flash(LayerGraph(layers=(layer,))) == 0


def test_ram_single_layer():
    # 16-element input, 4-element output: both max terms equal 20
    assert estimate_ram(single_layer_graph(), DatatypeSize(1)) == 20
    assert estimate_ram(single_layer_graph(), DatatypeSize(2)) == 40


def test_ram_rejects_empty_graph():
    with pytest.raises(ValueError):
        estimate_ram(LayerGraph(layers=()))


def test_ram_at_least_input_sample():
    graph = instantiate(Candidate(DataConfig(32, "rgb"), ModelConfig((1, 0, 0, 0, 0), 0.5)))
    assert estimate_ram(graph) >= 32 * 32 * 3


def test_ram_nondecreasing_in_resolution():
    model = ModelConfig((2, 2, 1, 0, 0), 0.5)
    sizes = [
        estimate_ram(instantiate(Candidate(DataConfig(r, "rgb"), model)))
        for r in (32, 64, 96, 128, 160, 192, 224)
    ]
    assert sizes == sorted(sizes)


def test_estimates_linear_in_datatype_size():
    graph = instantiate(Candidate(DataConfig(96, "rgb"), ModelConfig((2, 1, 1, 0, 0), 0.6)))
    for scale in (2, 4):
        assert estimate_flash(graph, DatatypeSize(scale)) == scale * estimate_flash(graph)
        assert estimate_ram(graph, DatatypeSize(scale)) == scale * estimate_ram(graph)


def test_estimate_bundles_both_figures():
    graph = instantiate(Candidate(DataConfig(64, "monochrome"), ModelConfig((1, 1, 0, 0, 0), 0.4)))
    bundle = estimate(graph)
    assert bundle.flash_bytes == estimate_flash(graph)
    assert bundle.ram_bytes == estimate_ram(graph)


def test_oracle_equivalence_on_random_candidates():
    rng = random.Random(23)
    for _ in range(200):
        c = random_candidate(rng)
        graph = instantiate(c)
        args = (c.data.resolution, c.data.color, c.model.depths, c.model.alpha)
        assert estimate_flash(graph) == oracle.flash_bytes(*args)
        assert estimate_ram(graph) == oracle.ram_bytes(*args)


def test_full_size_ram_matches_oracle():
    graph = instantiate(Candidate(DataConfig(224, "rgb"), ModelConfig((3, 4, 3, 3, 1), 1.0)))
    assert estimate_ram(graph) == oracle.ram_bytes(224, "rgb", (3, 4, 3, 3, 1), 1.0)
