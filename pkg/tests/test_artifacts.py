import json
import random

import pytest

from datanas import (
    Constraints,
    SearchConfig,
    SurrogateParams,
    pareto_front,
    run_search,
    surrogate_evaluate,
)
from datanas.artifacts import (
    ArtifactError,
    HistoryWriter,
    load_history,
    record_from_dict,
    record_to_dict,
    write_frontier_csv,
    write_history,
    write_pareto,
    write_series_csv,
)

LARGE = Constraints(max_ram_bytes=512 * 1024, max_flash_bytes=2048 * 1024)


@pytest.fixture(scope="module")
def history_records():
    config = SearchConfig(constraints=LARGE, max_evaluations=120, seed=2)
    params = SurrogateParams(seed=2)
    history = run_search(config, lambda c: surrogate_evaluate(c, params))
    return history.records


def test_record_dict_round_trip(history_records):
    for record in history_records:
        row = record_to_dict(record)
        again = record_to_dict(record_from_dict(row))
        assert again == row


def test_round_trip_preserves_json_bytes(history_records):
    for record in history_records[:20]:
        line = json.dumps(record_to_dict(record))
        reparsed = json.dumps(record_to_dict(record_from_dict(json.loads(line))))
        assert reparsed == line


def test_history_file_round_trip(tmp_path, history_records):
    path = tmp_path / "history.jsonl"
    write_history(path, history_records)
    loaded = load_history(path)
    assert [record_to_dict(r) for r in loaded] == [record_to_dict(r) for r in history_records]


def test_history_writer_flushes_incrementally(tmp_path, history_records):
    path = tmp_path / "history.jsonl"
    with HistoryWriter(path) as writer:
        writer.append(history_records[0])
        assert len(path.read_text().splitlines()) == 1
        writer.append(history_records[1])
        assert len(path.read_text().splitlines()) == 2


def test_failed_record_round_trip():
    from datanas import EvaluatedCandidate, ResourceEstimate
    from datanas.search_space import candidate_from_record

    failed = EvaluatedCandidate(
        candidate=candidate_from_record(
            {"resolution": 64, "color": "rgb", "b3": 1, "b4": 0, "b5": 0, "b6": 0,
             "b7": 0, "alpha": 0.2}
        ),
        metrics=None,
        estimate=ResourceEstimate(flash_bytes=10, ram_bytes=20),
        fitness_value=None,
        eval_index=7,
        wall_time=0.0,
        error="backend died",
    )
    row = record_to_dict(failed)
    assert row["accuracy"] is None and row["fitness"] is None
    again = record_from_dict(row)
    assert not again.ok
    assert again.error == "backend died"


def test_load_missing_file_names_the_path(tmp_path):
    with pytest.raises(ArtifactError, match="gone.jsonl"):
        load_history(tmp_path / "gone.jsonl")


def test_load_malformed_line_names_file_and_line(tmp_path, history_records):
    path = tmp_path / "history.jsonl"
    lines = [json.dumps(record_to_dict(r)) for r in history_records[:3]]
    lines.insert(2, "{broken")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ArtifactError, match=r"history\.jsonl:3"):
        load_history(path)


def test_load_empty_history_is_an_error(tmp_path):
    path = tmp_path / "history.jsonl"
    path.write_text("")
    with pytest.raises(ArtifactError, match="empty"):
        load_history(path)


def test_pareto_rewrite_is_byte_identical(tmp_path, history_records):
    history_path = tmp_path / "history.jsonl"
    write_history(history_path, history_records)
    first = tmp_path / "pareto-a.json"
    second = tmp_path / "pareto-b.json"
    write_pareto(first, pareto_front(history_records))
    write_pareto(second, pareto_front(load_history(history_path)))
    assert first.read_bytes() == second.read_bytes()


def test_series_csv_shape(tmp_path):
    path = tmp_path / "series.csv"
    write_series_csv(path, ("eval_index", "mean_fitness"), [(0, 0.5), (1, 0.75)])
    assert path.read_text() == "eval_index,mean_fitness\n0,0.5\n1,0.75\n"


def test_frontier_csv_sorted_by_accuracy(tmp_path, history_records):
    path = tmp_path / "frontier.csv"
    front = pareto_front(history_records)
    write_frontier_csv(path, front)
    rows = path.read_text().splitlines()
    assert rows[0] == "accuracy,ram_bytes,flash_bytes,resolution,color,b3,b4,b5,b6,b7,alpha,fitness"
    accuracies = [float(line.split(",")[0]) for line in rows[1:]]
    assert accuracies == sorted(accuracies)
    assert len(accuracies) == len(front)
