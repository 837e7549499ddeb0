"""Flash and peak-RAM estimation for an instantiated layer graph.

Flash is the parameter count times the storage datatype size (plus an
optional application-stack overhead). Peak RAM assumes the streaming
paradigm, where exactly one input sample is resident: it is the largest
per-layer input+output footprint, floored by input-plus-first-activation,
in elements, converted to bytes once.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arch_model import LayerGraph, count_parameters


@dataclass(frozen=True)
class DatatypeSize:
    """Bytes per stored element; defaults to 1 (8-bit deployment)."""

    bytes_per_element: int = 1

    def __post_init__(self) -> None:
        if self.bytes_per_element < 1:
            raise ValueError("bytes_per_element must be >= 1")


@dataclass(frozen=True)
class ResourceEstimate:
    flash_bytes: int
    ram_bytes: int


DEFAULT_DTYPE = DatatypeSize()


def estimate_flash(
    graph: LayerGraph,
    dtype: DatatypeSize = DEFAULT_DTYPE,
    *,
    overhead_bytes: int = 0,
) -> int:
    """Model storage footprint in bytes."""
    return count_parameters(graph) * dtype.bytes_per_element + overhead_bytes


def estimate_ram(graph: LayerGraph, dtype: DatatypeSize = DEFAULT_DTYPE) -> int:
    """Peak working-memory footprint in bytes under the streaming paradigm."""
    if not graph.layers:
        raise ValueError("cannot estimate RAM of an empty layer graph")
    peak_elements = max(
        graph.input_size + graph.first_layer_output,
        max(layer.input_elements + layer.output_elements for layer in graph.layers),
    )
    return peak_elements * dtype.bytes_per_element


def estimate(
    graph: LayerGraph,
    *,
    param_dtype: DatatypeSize = DEFAULT_DTYPE,
    tensor_dtype: DatatypeSize = DEFAULT_DTYPE,
    flash_overhead_bytes: int = 0,
) -> ResourceEstimate:
    """Both estimates at once; parameter and tensor datatypes may differ."""
    return ResourceEstimate(
        flash_bytes=estimate_flash(graph, param_dtype, overhead_bytes=flash_overhead_bytes),
        ram_bytes=estimate_ram(graph, tensor_dtype),
    )
