"""Lazy, at-most-once supernet preparation per data configuration.

All candidate evaluations go through the cache: the first evaluation for a
data configuration triggers exactly one pretrain request, later ones reuse
it. A failed pretrain is terminal for the run; evaluations against it fail
fast instead of retrying a long training job mid-search.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .evaluator import Backend, PretrainError
from .fitness import EvalMetrics
from .search_space import Candidate, DataConfig, validate

UNTRAINED = "untrained"
TRAINING = "training"
READY = "ready"
FAILED = "failed"

DEFAULT_PRETRAIN_STEPS = 30_000
DEFAULT_FINETUNE_STEPS = 100


@dataclass
class SupernetState:
    data_config: DataConfig
    status: str
    pretrain_steps: int


class _Entry:
    __slots__ = ("status", "done", "error")

    def __init__(self) -> None:
        self.status = TRAINING
        self.done = threading.Event()
        self.error: str | None = None


class SupernetCache:
    """Thread-safe map from DataConfig to supernet status, mediating a backend.

    Concurrent ``ensure_supernet`` calls for the same configuration
    coalesce into a single backend pretrain; waiters block until the
    claimer reaches a terminal status.
    """

    def __init__(
        self,
        backend: Backend,
        *,
        pretrain_steps: int = DEFAULT_PRETRAIN_STEPS,
        finetune_steps: int = DEFAULT_FINETUNE_STEPS,
    ):
        self.backend = backend
        self.pretrain_steps = pretrain_steps
        self.finetune_steps = finetune_steps
        self._lock = threading.Lock()
        self._entries: dict[DataConfig, _Entry] = {}
        self._pretrain_count = 0
        self._evaluation_count = 0

    @property
    def pretrain_count(self) -> int:
        """Backend pretrain invocations issued so far (including failed ones)."""
        return self._pretrain_count

    @property
    def evaluation_count(self) -> int:
        """Backend evaluate invocations issued so far."""
        return self._evaluation_count

    def statuses(self) -> dict[DataConfig, SupernetState]:
        with self._lock:
            return {
                dc: SupernetState(dc, entry.status, self.pretrain_steps)
                for dc, entry in self._entries.items()
            }

    def ensure_supernet(self, data_config: DataConfig) -> None:
        """Block until the supernet for ``data_config`` is ready; idempotent.

        Raises :class:`PretrainError` if pretraining failed, now or earlier.
        """
        with self._lock:
            entry = self._entries.get(data_config)
            if entry is None:
                entry = _Entry()
                self._entries[data_config] = entry
                self._pretrain_count += 1
                claimed = True
            else:
                claimed = False
        if claimed:
            try:
                self.backend.pretrain(data_config, self.pretrain_steps)
            except Exception as exc:
                entry.status = FAILED
                entry.error = str(exc)
                entry.done.set()
            else:
                entry.status = READY
                entry.done.set()
        else:
            entry.done.wait()
        if entry.status == FAILED:
            raise PretrainError(
                f"supernet for {data_config.resolution}x{data_config.resolution} "
                f"{data_config.color} failed to pretrain: {entry.error}"
            )

    def evaluate(self, candidate: Candidate) -> EvalMetrics:
        """Evaluate a candidate against its (lazily pretrained) supernet."""
        problem = validate(candidate)
        if problem is not None:
            raise ValueError(f"invalid candidate: {problem}")
        self.ensure_supernet(candidate.data)
        with self._lock:
            self._evaluation_count += 1
        return self.backend.evaluate(candidate, self.finetune_steps)
