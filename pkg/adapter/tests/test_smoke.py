"""End-to-end run: the search engine driving this adapter as its evaluator."""

import json
import shlex
import subprocess
import sys
import time


def test_engine_search_through_adapter(tmp_path):
    out = tmp_path / "run"
    adapter = f"{shlex.quote(sys.executable)} -m trainer_adapter --step-scale 0.2 --seed 0"
    started = time.monotonic()
    proc = subprocess.run(
        [sys.executable, "-m", "datanas", "search",
         "--preset", "large", "--budget-evals", "20", "--seed", "3",
         "--evaluator", "external", "--external-command", adapter,
         "--fixed-resolution", "32",
         "--pretrain-steps", "50", "--finetune-steps", "5",
         "--output-dir", str(out)],
        capture_output=True, text=True, timeout=870)
    elapsed = time.monotonic() - started
    assert proc.returncode == 0, proc.stderr

    history = [json.loads(line) for line in
               (out / "history.jsonl").read_text().splitlines()]
    assert len(history) == 20
    assert all(record["error"] is None for record in history)
    for record in history:
        assert record["resolution"] == 32
        for metric in ("accuracy", "precision", "recall"):
            assert 0.0 <= record[metric] <= 1.0

    summary = json.loads((out / "summary.json").read_text())
    assert summary["totals"]["evaluations"] == 20
    assert summary["totals"]["failures"] == 0
    # resolution pinned to 32: at most the two color modes get pretrained
    assert 1 <= summary["counters"]["pretrains"] <= 2
    assert (out / "pareto.json").exists()
    print(f"PASS end-to-end smoke: 20 evaluations through the adapter "
          f"in {elapsed:.1f}s, {summary['counters']['pretrains']} pretrains")
