"""Wire protocol conformance, exercised over a real child process.

The conversations are scripted up front and fed through one
`communicate` call; the protocol guarantees exactly one response line per
request line, in order, which the assertions then verify shape by shape.
"""

import json
import subprocess
import sys

CANDIDATE = {"resolution": 32, "color": "rgb", "b3": 1, "b4": 1, "b5": 0,
             "b6": 0, "b7": 0, "alpha": 0.2}


def run_conversation(lines: list[str], timeout: float = 300.0) -> tuple[list[dict], str]:
    proc = subprocess.run(
        [sys.executable, "-m", "trainer_adapter", "--step-scale", "0.1", "--seed", "0"],
        input="".join(line + "\n" for line in lines),
        capture_output=True, text=True, timeout=timeout)
    assert proc.returncode == 0, proc.stderr
    responses = [json.loads(line) for line in proc.stdout.splitlines()]
    return responses, proc.stderr


def request(op: str, request_id: str, **fields: object) -> str:
    return json.dumps({"op": op, "request_id": request_id, **fields})


def test_scripted_conversation_shapes():
    """Pretrain, evaluate, malformed line, evaluate without pretraining."""
    missing = dict(CANDIDATE, resolution=96)
    lines = [
        request("pretrain", "r1", resolution=32, color="rgb", steps=20),
        request("evaluate", "r2", candidate=CANDIDATE, finetune_steps=2),
        "{not json",
        request("evaluate", "r4", candidate=missing, finetune_steps=2),
    ]
    responses, stderr = run_conversation(lines)
    assert len(responses) == len(lines)

    pretrain, evaluate, malformed, untrained = responses
    assert pretrain == {"request_id": "r1", "ok": True}

    assert set(evaluate) == {"request_id", "ok", "accuracy", "precision", "recall"}
    assert evaluate["request_id"] == "r2"
    assert evaluate["ok"] is True
    for name in ("accuracy", "precision", "recall"):
        value = evaluate[name]
        assert isinstance(value, float) and 0.0 <= value <= 1.0

    assert set(malformed) == {"request_id", "ok", "error"}
    assert malformed["request_id"] is None
    assert malformed["ok"] is False
    assert "malformed" in malformed["error"]

    assert set(untrained) == {"request_id", "ok", "error"}
    assert untrained["request_id"] == "r4"
    assert untrained["ok"] is False
    assert untrained["error"] == "supernet not trained"

    # diagnostics go to stderr, never to the protocol stream
    assert "pretrain" in stderr
    print("PASS protocol conformance: scripted conversation, exact shapes")


def test_repeat_pretrain_retrains():
    lines = [
        request("pretrain", "a", resolution=32, color="monochrome", steps=10),
        request("pretrain", "b", resolution=32, color="monochrome", steps=10),
        request("evaluate", "c", candidate=dict(CANDIDATE, color="monochrome"),
                finetune_steps=1),
    ]
    responses, _ = run_conversation(lines)
    assert [r["ok"] for r in responses] == [True, True, True]
    assert [r["request_id"] for r in responses] == ["a", "b", "c"]


def test_bad_requests_are_recoverable():
    lines = [
        request("transmogrify", "a"),
        request("pretrain", "b", resolution=33, color="rgb", steps=5),
        request("pretrain", "c", resolution=32, color="sepia", steps=5),
        request("pretrain", "d", resolution=32, color="rgb", steps="many"),
        request("evaluate", "e", candidate={"resolution": 32}, finetune_steps=1),
        request("evaluate", "f",
                candidate=dict(CANDIDATE, b3=0, b4=2), finetune_steps=1),
        json.dumps(["not", "an", "object"]),
        request("pretrain", "g", resolution=32, color="rgb", steps=5),
    ]
    responses, _ = run_conversation(lines)
    assert len(responses) == len(lines)
    assert [r["ok"] for r in responses] == [False] * 7 + [True]
    assert "unknown op" in responses[0]["error"]
    assert "resolution" in responses[1]["error"]
    assert "color" in responses[2]["error"]
    assert "steps" in responses[3]["error"]
    assert "exactly the keys" in responses[4]["error"]
    assert "invalid candidate" in responses[5]["error"]
    assert responses[6]["request_id"] is None
    # the process survived six failures and served the final request
    assert responses[7] == {"request_id": "g", "ok": True}


def test_blank_lines_are_ignored():
    lines = [
        "",
        request("pretrain", "only", resolution=32, color="rgb", steps=5),
        "   ",
    ]
    responses, _ = run_conversation(lines)
    assert len(responses) == 1
    assert responses[0] == {"request_id": "only", "ok": True}
