"""Newline-delimited JSON request loop over stdin/stdout.

Requests arrive one per line; every line gets exactly one response line
carrying the request's `request_id`. A successful evaluation reports its
three metrics as top-level response fields. Failures the evaluator can
survive (bad request shape, unknown candidate, training errors) come
back as `ok: false` with an error string; the process only exits when
its input closes. Nothing but responses is ever written to stdout.
"""

from __future__ import annotations

import json
import logging
import sys
from typing import IO

from .service import AdapterError, TrainerService

log = logging.getLogger("trainer_adapter")

CANDIDATE_KEYS = frozenset(
    {"resolution", "color", "b3", "b4", "b5", "b6", "b7", "alpha"})


def _require_int(request: dict, key: str) -> int:
    value = request.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise AdapterError(f"field {key!r} must be an integer")
    return value


def _check_candidate(candidate: object) -> dict:
    if not isinstance(candidate, dict):
        raise AdapterError("field 'candidate' must be an object")
    if set(candidate) != CANDIDATE_KEYS:
        raise AdapterError(f"candidate must have exactly the keys {sorted(CANDIDATE_KEYS)}")
    for key in ("resolution", "b3", "b4", "b5", "b6", "b7"):
        _require_int(candidate, key)
    if not isinstance(candidate["color"], str):
        raise AdapterError("field 'color' must be a string")
    if isinstance(candidate["alpha"], bool) or not isinstance(candidate["alpha"], (int, float)):
        raise AdapterError("field 'alpha' must be a number")
    return candidate


def _dispatch(service: TrainerService, request: dict) -> dict:
    op = request.get("op")
    if op == "pretrain":
        resolution = _require_int(request, "resolution")
        color = request.get("color")
        if not isinstance(color, str):
            raise AdapterError("field 'color' must be a string")
        steps = _require_int(request, "steps")
        service.pretrain(resolution, color, steps)
        return {"ok": True}
    if op == "evaluate":
        candidate = _check_candidate(request.get("candidate"))
        finetune_steps = _require_int(request, "finetune_steps")
        metrics = service.evaluate(candidate, finetune_steps)
        return {"ok": True, **metrics}
    raise AdapterError(f"unknown op {op!r}")


def serve(service: TrainerService, stdin: IO[str] = sys.stdin,
          stdout: IO[str] = sys.stdout) -> int:
    def respond(payload: dict) -> None:
        stdout.write(json.dumps(payload) + "\n")
        stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as error:
            respond({"request_id": None, "ok": False,
                     "error": f"malformed request: {error}"})
            continue
        if not isinstance(request, dict):
            respond({"request_id": None, "ok": False,
                     "error": "malformed request: not an object"})
            continue
        request_id = request.get("request_id")
        try:
            result = _dispatch(service, request)
        except AdapterError as error:
            respond({"request_id": request_id, "ok": False, "error": str(error)})
            continue
        except Exception:
            log.exception("request failed")
            respond({"request_id": request_id, "ok": False,
                     "error": "internal error, see process log"})
            continue
        respond({"request_id": request_id, **result})
    return 0
