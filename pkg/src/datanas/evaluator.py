"""Evaluation backends: the deterministic surrogate and the external-process client.

A backend provides two operations: ``pretrain(data_config, steps)`` and
``evaluate(candidate, finetune_steps)``. Evaluating a candidate is only
valid once its data configuration's supernet has been pretrained; the
supernet cache enforces that ordering.
"""

from __future__ import annotations

import hashlib
import json
import math
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Protocol

from .fitness import EvalMetrics
from .search_space import Candidate, DataConfig, candidate_record, effective_width, validate

BASE_RESOLUTION = 32


class BackendError(RuntimeError):
    """Base class for evaluation-backend failures."""


class PretrainError(BackendError):
    """Supernet pretraining failed or is known to have failed."""


class EvaluationError(BackendError):
    """A candidate evaluation failed."""


class Backend(Protocol):
    def pretrain(self, data_config: DataConfig, steps: int) -> None: ...

    def evaluate(self, candidate: Candidate, finetune_steps: int) -> EvalMetrics: ...


@dataclass(frozen=True)
class SurrogateParams:
    """Coefficients of the deterministic accuracy surrogate.

    The linear score rewards resolution (per doubling over 32), effective
    width, searched depth, and rgb encoding; accuracy squashes the score
    into (0.5, 0.95). Noise and the precision/recall offsets are derived
    from a stable hash, so results depend only on (seed, genome).
    """

    bias: float = -1.0
    resolution_gain: float = 0.35
    width_gain: float = 1.2
    depth_gain: float = 0.08
    rgb_gain: float = 0.25
    noise_amplitude: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.noise_amplitude < 0:
            raise ValueError("noise_amplitude must be non-negative")


METRIC_OFFSET_AMPLITUDE = 0.02


def _unit_interval(seed: int, candidate: Candidate, label: str) -> float:
    """Stable hash of (seed, genome, label) mapped into [0, 1)."""
    record = candidate_record(candidate)
    key = "|".join(
        [
            str(seed),
            label,
            str(record["resolution"]),
            record["color"],
            ",".join(str(record[f"b{i}"]) for i in range(3, 8)),
            f"{record['alpha']:.1f}",
        ]
    )
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def _signed_unit(seed: int, candidate: Candidate, label: str) -> float:
    return 2.0 * _unit_interval(seed, candidate, label) - 1.0


def surrogate_evaluate(candidate: Candidate, params: SurrogateParams) -> EvalMetrics:
    """Deterministic stand-in for trained-model evaluation."""
    problem = validate(candidate)
    if problem is not None:
        raise ValueError(f"invalid candidate: {problem}")
    alpha_eff = effective_width(candidate.model.alpha, candidate.data.color)
    score = (
        params.bias
        + params.resolution_gain * math.log2(candidate.data.resolution / BASE_RESOLUTION)
        + params.width_gain * alpha_eff
        + params.depth_gain * candidate.model.total_depth
        + (params.rgb_gain if candidate.data.color == "rgb" else 0.0)
        + params.noise_amplitude * _signed_unit(params.seed, candidate, "noise")
    )
    accuracy = 0.5 + 0.45 / (1.0 + math.exp(-score))
    precision = accuracy + METRIC_OFFSET_AMPLITUDE * _signed_unit(params.seed, candidate, "precision")
    recall = accuracy + METRIC_OFFSET_AMPLITUDE * _signed_unit(params.seed, candidate, "recall")
    clamp = lambda x: min(1.0, max(0.0, x))
    return EvalMetrics(accuracy=accuracy, precision=clamp(precision), recall=clamp(recall))


class SurrogateBackend:
    """In-process backend backed by :func:`surrogate_evaluate`.

    Pretraining is a bookkeeping no-op (the step count is recorded so run
    artifacts look the same across backends), but the pretrain-before-
    evaluate ordering is still enforced to keep cache tests honest.
    """

    def __init__(self, params: SurrogateParams | None = None):
        self.params = params or SurrogateParams()
        self.pretrained: dict[DataConfig, int] = {}

    def pretrain(self, data_config: DataConfig, steps: int) -> None:
        self.pretrained[data_config] = steps

    def evaluate(self, candidate: Candidate, finetune_steps: int) -> EvalMetrics:
        if candidate.data not in self.pretrained:
            raise EvaluationError(
                f"no pretrained supernet for {candidate.data.resolution}x"
                f"{candidate.data.resolution} {candidate.data.color}"
            )
        return surrogate_evaluate(candidate, self.params)


class ExternalBackend:
    """Client for an external evaluator process speaking line-delimited JSON.

    One request is in flight at a time. Requests carry a ``request_id``
    the process must echo; a missing, mismatched, or malformed response,
    a dead process, or a timeout surfaces as a backend error. The child's
    stderr passes through for diagnostics.
    """

    def __init__(
        self,
        command: str | list[str],
        *,
        pretrain_timeout: float = 24 * 3600.0,
        evaluate_timeout: float = 3600.0,
    ):
        self._command = shlex.split(command) if isinstance(command, str) else list(command)
        self._pretrain_timeout = pretrain_timeout
        self._evaluate_timeout = evaluate_timeout
        try:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BackendError(f"cannot start evaluator {self._command!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        self._lock = threading.Lock()
        self._request_counter = 0
        self._dead = False

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _kill(self) -> None:
        self._dead = True
        if self._proc.poll() is None:
            self._proc.kill()

    def _request(self, payload: dict, timeout: float, error_cls: type[BackendError], doing: str) -> dict:
        with self._lock:
            if self._dead:
                raise BackendError(f"evaluator backend is closed ({doing})")
            self._request_counter += 1
            request_id = f"req-{self._request_counter}"
            message = dict(payload, request_id=request_id)
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.write(json.dumps(message) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                self._kill()
                raise error_cls(f"evaluator process closed its pipe while {doing}")
            try:
                line = self._lines.get(timeout=timeout)
            except queue.Empty:
                self._kill()
                raise error_cls(f"timeout after {timeout:.0f}s while {doing}")
            if line is None:
                self._kill()
                raise error_cls(f"evaluator process exited while {doing}")
            try:
                response = json.loads(line)
            except ValueError:
                self._kill()
                raise error_cls(f"malformed evaluator response while {doing}: {line!r}")
            if not isinstance(response, dict) or "ok" not in response:
                self._kill()
                raise error_cls(f"protocol violation while {doing}: {response!r}")
            if response.get("request_id") != request_id:
                self._kill()
                raise error_cls(
                    f"response id {response.get('request_id')!r} does not match "
                    f"{request_id!r} while {doing}"
                )
            if not response["ok"]:
                raise error_cls(f"{doing}: {response.get('error', 'unspecified backend error')}")
            return response

    def pretrain(self, data_config: DataConfig, steps: int) -> None:
        self._request(
            {
                "op": "pretrain",
                "resolution": data_config.resolution,
                "color": data_config.color,
                "steps": steps,
            },
            self._pretrain_timeout,
            PretrainError,
            f"pretraining supernet for {data_config.resolution}x{data_config.resolution} "
            f"{data_config.color}",
        )

    def evaluate(self, candidate: Candidate, finetune_steps: int) -> EvalMetrics:
        doing = f"evaluating candidate {candidate_record(candidate)}"
        response = self._request(
            {
                "op": "evaluate",
                "candidate": candidate_record(candidate),
                "finetune_steps": finetune_steps,
            },
            self._evaluate_timeout,
            EvaluationError,
            doing,
        )
        try:
            values = {k: float(response[k]) for k in ("accuracy", "precision", "recall")}
        except (KeyError, TypeError, ValueError):
            raise EvaluationError(f"incomplete metrics in response while {doing}: {response!r}")
        for name, value in values.items():
            if not 0.0 <= value <= 1.0:
                raise EvaluationError(f"{name}={value} outside [0, 1] while {doing}")
        return EvalMetrics(**values)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                assert self._proc.stdin is not None
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._dead = True

    def __enter__(self) -> "ExternalBackend":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
