import json
from datetime import datetime, timezone

import numpy as np
import pytest

from hostrisk.dataio import (
    FORMAT_VERSION,
    ModelFileError,
    RowError,
    format_time,
    load_model,
    parse_event_log,
    parse_event_log_detailed,
    parse_time,
    read_dataset,
    read_events,
    read_notes,
    read_scores,
    save_model,
    write_dataset,
    write_events,
    write_notes,
    write_scores,
)
from hostrisk.features import FeatureDescriptor, FeatureMatrix, FeatureSchema
from hostrisk.nnet import FinetuneConfig
from hostrisk.records import AnalystNote, EventRecord
from hostrisk.train import score_model, train_model

UTC = timezone.utc
T0 = datetime(2024, 1, 8, 12, 0, tzinfo=UTC)


class TestTime:
    def test_round_trip(self):
        assert parse_time(format_time(T0)) == T0

    def test_z_suffix(self):
        assert format_time(T0) == "2024-01-08T12:00:00Z"

    def test_offset_converted_to_utc(self):
        t = parse_time("2024-01-08T14:00:00+02:00")
        assert t == T0

    def test_naive_rejected(self):
        with pytest.raises(ValueError, match="timezone"):
            parse_time("2024-01-08T12:00:00")


GOOD_LOG = (
    "host_id,event_id,time,severity\n"
    "hB,AV0012,2024-01-08T10:00:00Z,3\n"
    "hA,SYS0206,2024-01-08T09:00:00Z,8\n"
)


class TestEventLog:
    def test_parse_sorts_by_time(self):
        events = parse_event_log(GOOD_LOG)
        assert [e.host_id for e in events] == ["hA", "hB"]
        assert events[0].severity == 8

    def test_header_optional(self):
        events = parse_event_log(GOOD_LOG.split("\n", 1)[1])
        assert len(events) == 2

    def test_fail_policy_reports_line_number(self):
        bad = GOOD_LOG + "hC,IDS0103,2024-01-08T11:00:00Z,11\n"
        with pytest.raises(RowError, match="line 4"):
            parse_event_log(bad, on_error="fail")

    def test_skip_policy_counts_bad_rows(self):
        bad = GOOD_LOG + "hC,IDS0103,not-a-time,5\nhD,FW0007\n"
        events, skipped = parse_event_log_detailed(bad, on_error="skip")
        assert len(events) == 2
        assert skipped == 2

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError, match="on_error"):
            parse_event_log(GOOD_LOG, on_error="ignore")

    def test_file_round_trip(self, tmp_path):
        events = parse_event_log(GOOD_LOG)
        path = tmp_path / "events.csv"
        write_events(events, path)
        assert read_events(path) == events


class TestNotes:
    def test_round_trip_with_commas_and_quotes(self, tmp_path):
        notes = [
            AnalystNote("hA", T0, 'escalated, "confirmed compromise"'),
            AnalystNote("hB", T0, "benign activity"),
        ]
        path = tmp_path / "notes.csv"
        write_notes(notes, path)
        assert read_notes(path) == notes

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "notes.csv"
        path.write_text("host_id,time,text\nhA,2024-01-08T12:00:00Z\n")
        with pytest.raises(RowError, match="line 2"):
            read_notes(path)


def small_matrix(labels=None):
    schema = FeatureSchema((
        FeatureDescriptor("a", "total_count", (("window_hours", 24),)),
        FeatureDescriptor("b", "arrival_rate", (("window_hours", 24),)),
    ))
    values = np.array([[1.0, 0.1234567890123456], [3.0, 2.0 / 3.0]])
    return FeatureMatrix(("h1", "h2"), values, schema, T0, T0,
                         None if labels is None else np.array(labels))


class TestDataset:
    def test_round_trip_bit_exact(self, tmp_path):
        fm = small_matrix([1.0, float("nan")])
        path = tmp_path / "dataset.csv"
        write_dataset(fm, path)
        hosts, values, labels, names = read_dataset(path, fm.schema)
        assert hosts == ["h1", "h2"]
        assert np.array_equal(values, fm.values)  # repr round trip is exact
        assert labels[0] == 1.0 and np.isnan(labels[1])
        assert names == fm.schema.names

    def test_unlabeled_column_empty(self, tmp_path):
        fm = small_matrix()
        path = tmp_path / "dataset.csv"
        write_dataset(fm, path)
        assert path.read_text().splitlines()[1].endswith(",")

    def test_schema_mismatch_rejected(self, tmp_path):
        fm = small_matrix()
        path = tmp_path / "dataset.csv"
        write_dataset(fm, path)
        other = FeatureSchema((
            FeatureDescriptor("z", "total_count", (("window_hours", 24),)),
            FeatureDescriptor("b", "arrival_rate", (("window_hours", 24),)),
        ))
        with pytest.raises(ValueError, match="schema"):
            read_dataset(path, other)


class TestScores:
    def test_ranked_descending_with_host_tiebreak(self, tmp_path):
        path = tmp_path / "scores.csv"
        write_scores(["hC", "hA", "hB"], np.array([0.5, 0.9, 0.5]), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "host_id,risk_score,rank"
        assert [l.split(",")[0] for l in lines[1:]] == ["hA", "hB", "hC"]
        assert [l.split(",")[2] for l in lines[1:]] == ["1", "2", "3"]

    def test_round_trip_bit_exact(self, tmp_path):
        path = tmp_path / "scores.csv"
        scores = np.array([1 / 3, 2 / 7, 0.9999999999999999])
        write_scores(["a", "b", "c"], scores, path)
        hosts, got = read_scores(path)
        assert set(hosts) == {"a", "b", "c"}
        assert set(got) == set(scores)


def trained(kind, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((30, 5)) * 4
    y = (X[:, 0] > 2).astype(int)
    if len(np.unique(y)) < 2:
        y[0] = 1 - y[0]
    return train_model(kind, X, y, seed, schema_id="abc123",
                       ft=FinetuneConfig(epochs=3, seed=seed),
                       pretrain_epochs=1), X


class TestModelFiles:
    @pytest.mark.parametrize("kind", ["dbn", "mnn", "dnn", "lr"])
    def test_save_load_scores_bit_exact(self, tmp_path, kind):
        model, X = trained(kind)
        path = tmp_path / f"model-{kind}.dbn.json"
        save_model(model, path)
        again = load_model(path)
        assert np.array_equal(score_model(model, X), score_model(again, X))

    def test_schema_id_preserved(self, tmp_path):
        model, _ = trained("dbn")
        path = tmp_path / "m.dbn.json"
        save_model(model, path)
        assert load_model(path).schema_id == "abc123"

    def test_truncated_file_fails_checksum(self, tmp_path):
        model, _ = trained("lr")
        path = tmp_path / "m.dbn.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        doc["head"]["intercepts"][0] += 1e-9
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFileError, match="checksum"):
            load_model(path)

    def test_garbage_is_corrupt(self, tmp_path):
        path = tmp_path / "m.dbn.json"
        path.write_text("not json at all{{{")
        with pytest.raises(ModelFileError, match="corrupt"):
            load_model(path)

    def test_future_version_unsupported(self, tmp_path):
        model, _ = trained("lr")
        path = tmp_path / "m.dbn.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        doc["format_version"] = FORMAT_VERSION + 1
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFileError, match="unsupported version"):
            load_model(path)

    def test_version_field_written(self, tmp_path):
        model, _ = trained("mnn")
        path = tmp_path / "m.dbn.json"
        save_model(model, path)
        doc = json.loads(path.read_text())
        assert doc["format_version"] == FORMAT_VERSION
        assert doc["checksum"].startswith("sha256:")
