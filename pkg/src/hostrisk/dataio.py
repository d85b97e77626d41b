"""File formats: event/note CSVs, the modeling dataset, score tables, and
versioned model serialization with a whole-file checksum.

All timestamps are ISO-8601 UTC with a trailing Z.  Model files are JSON with
floats written in shortest round-trip form, so load(save(m)) reproduces every
score bit-for-bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .baselines import BaselineKind, BaselineModel
from .dbn import DbnArchitecture, DbnModel, Normalization
from .features import FeatureMatrix, FeatureSchema
from .nnet import SoftmaxHead
from .rbm import RbmParams
from .records import AnalystNote, EventRecord

__all__ = [
    "parse_time", "format_time",
    "parse_event_log", "write_events", "read_events",
    "write_notes", "read_notes",
    "write_dataset", "read_dataset",
    "write_scores", "read_scores",
    "save_model", "load_model",
    "ModelFileError", "RowError",
]

FORMAT_VERSION = 1
MODEL_SUFFIX = ".dbn.json"


class RowError(ValueError):
    """A malformed row, carrying its 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ModelFileError(ValueError):
    pass


def parse_time(text: str) -> datetime:
    t = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if t.tzinfo is None:
        raise ValueError(f"timestamp {text!r} lacks a timezone")
    return t.astimezone(timezone.utc)


def format_time(t: datetime) -> str:
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------- events

def parse_event_log(stream, on_error: str = "fail") -> list[EventRecord]:
    """Parse events.csv content; returns records sorted by time (stable on
    host id).  on_error: "fail" raises on the first bad row, "skip" drops
    bad rows; parse_event_log_detailed also reports the skipped count.
    """
    events, _ = parse_event_log_detailed(stream, on_error)
    return events


def parse_event_log_detailed(stream, on_error: str = "fail"):
    if on_error not in ("fail", "skip"):
        raise ValueError("on_error must be 'fail' or 'skip'")
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    events: list[EventRecord] = []
    skipped = 0
    for line_no, row in enumerate(reader, start=1):
        if line_no == 1 and row and row[0] == "host_id":
            continue
        if not row:
            continue
        try:
            if len(row) != 4:
                raise ValueError(f"expected 4 fields, got {len(row)}")
            host_id, event_id, time_s, sev_s = row
            severity = int(sev_s)
            if not 1 <= severity <= 10:
                raise ValueError(f"severity {severity} outside 1-10")
            events.append(EventRecord(host_id, event_id,
                                      parse_time(time_s), severity))
        except ValueError as exc:
            if on_error == "fail":
                raise RowError(line_no, str(exc)) from exc
            skipped += 1
    events.sort(key=lambda e: (e.time, e.host_id))
    return events, skipped


def write_events(events: list[EventRecord], path: Path):
    with open(path, "w", newline="") as f:
        f.write("host_id,event_id,time,severity\n")
        for e in events:
            f.write(f"{e.host_id},{e.event_id},{format_time(e.time)},"
                    f"{e.severity}\n")


def read_events(path: Path, on_error: str = "fail") -> list[EventRecord]:
    with open(path, newline="") as f:
        return parse_event_log(f, on_error)


# ----------------------------------------------------------------- notes

def write_notes(notes: list[AnalystNote], path: Path):
    with open(path, "w", newline="") as f:
        f.write("host_id,time,text\n")
        for n in notes:
            quoted = '"' + n.text.replace('"', '""') + '"'
            f.write(f"{n.host_id},{format_time(n.time)},{quoted}\n")


def read_notes(path: Path) -> list[AnalystNote]:
    notes = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        for line_no, row in enumerate(reader, start=1):
            if line_no == 1 and row and row[0] == "host_id":
                continue
            if not row:
                continue
            if len(row) != 3:
                raise RowError(line_no, f"expected 3 fields, got {len(row)}")
            notes.append(AnalystNote(row[0], parse_time(row[1]), row[2]))
    return notes


# --------------------------------------------------------------- dataset

def write_dataset(fm: FeatureMatrix, path: Path):
    """dataset.csv: host_id, feature columns, label (empty = unlabeled)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["host_id", *fm.schema.names, "label"])
        labels = fm.labels
        for i, host in enumerate(fm.host_ids):
            row = [host, *(repr(float(v)) for v in fm.values[i])]
            if labels is None or math.isnan(labels[i]):
                row.append("")
            else:
                row.append(str(int(labels[i])))
            writer.writerow(row)


def read_dataset(path: Path, schema: FeatureSchema | None = None):
    """Returns (host_ids, values, labels, feature_names); labels use NaN for
    unlabeled rows.  When a schema is given, the header must match it."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header[0] != "host_id" or header[-1] != "label":
            raise ValueError("dataset header must be host_id,...,label")
        names = header[1:-1]
        if schema is not None and names != schema.names:
            raise ValueError("dataset columns do not match feature schema")
        hosts, rows, labels = [], [], []
        for row in reader:
            if not row:
                continue
            hosts.append(row[0])
            rows.append([float(v) for v in row[1:-1]])
            labels.append(float(row[-1]) if row[-1] != "" else float("nan"))
    return hosts, np.array(rows), np.array(labels), names


# ---------------------------------------------------------------- scores

def write_scores(host_ids, scores, path: Path):
    """scores.csv ranked by descending score, host id breaking ties."""
    order = sorted(range(len(host_ids)),
                   key=lambda i: (-scores[i], host_ids[i]))
    with open(path, "w", newline="") as f:
        f.write("host_id,risk_score,rank\n")
        for rank, i in enumerate(order, start=1):
            f.write(f"{host_ids[i]},{float(scores[i])!r},{rank}\n")


def read_scores(path: Path):
    hosts, scores = [], []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        next(reader)
        for row in reader:
            if not row:
                continue
            hosts.append(row[0])
            scores.append(float(row[1]))
    return hosts, np.array(scores)


# ----------------------------------------------------------- model files

def _arr(a: np.ndarray):
    return np.asarray(a, dtype=float).tolist()


def _model_payload(model) -> dict:
    norm = model.normalization
    base = {
        "format_version": FORMAT_VERSION,
        "normalization": {"min": _arr(norm.minimums), "max": _arr(norm.maximums)},
        "schema_id": model.schema_id,
    }
    if isinstance(model, DbnModel):
        base["kind"] = "dbn"
        base["architecture"] = list(model.architecture.layer_sizes)
        base["layers"] = [
            {"weights": _arr(l.weights), "visible_bias": _arr(l.visible_bias),
             "hidden_bias": _arr(l.hidden_bias)}
            for l in model.rbm_layers
        ]
        base["head"] = {"coefficients": _arr(model.head.coefficients),
                        "intercepts": _arr(model.head.intercepts)}
    elif isinstance(model, BaselineModel):
        base["kind"] = model.kind.value
        if model.kind is BaselineKind.LR:
            base["architecture"] = [int(model.coef.size), 2]
            base["layers"] = []
            base["head"] = {"coefficients": [_arr(model.coef)],
                            "intercepts": [float(model.intercept)]}
        else:
            sizes = [model.weights[0].shape[1]] \
                + [w.shape[0] for w in model.weights] + [2]
            base["architecture"] = sizes
            base["layers"] = [
                {"weights": _arr(w), "hidden_bias": _arr(b)}
                for w, b in zip(model.weights, model.biases)
            ]
            base["head"] = {"coefficients": _arr(model.head.coefficients),
                            "intercepts": _arr(model.head.intercepts)}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return base


def _checksum(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


def save_model(model, path: Path):
    payload = _model_payload(model)
    payload["checksum"] = _checksum({k: v for k, v in payload.items()})
    with open(path, "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def load_model(path: Path):
    try:
        with open(path) as f:
            doc = json.load(f)
    except (json.JSONDecodeError, OSError) as exc:
        raise ModelFileError(f"corrupt model file: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ModelFileError("corrupt model file: missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise ModelFileError(
            f"unsupported version {doc['format_version']} "
            f"(supported: {FORMAT_VERSION})"
        )
    stored = doc.pop("checksum", None)
    if stored != _checksum(doc):
        raise ModelFileError("checksum mismatch: file corrupt or truncated")

    norm = Normalization(np.array(doc["normalization"]["min"]),
                         np.array(doc["normalization"]["max"]))
    kind = doc["kind"]
    head_doc = doc["head"]
    if kind == "dbn":
        layers = tuple(
            RbmParams(np.array(l["weights"]), np.array(l["visible_bias"]),
                      np.array(l["hidden_bias"]))
            for l in doc["layers"]
        )
        return DbnModel(
            layers,
            SoftmaxHead(np.array(head_doc["coefficients"]),
                        np.array(head_doc["intercepts"])),
            DbnArchitecture(tuple(doc["architecture"])),
            norm, doc["schema_id"],
        )
    if kind == "lr":
        return BaselineModel(
            BaselineKind.LR, (), (), None,
            np.array(head_doc["coefficients"][0]),
            float(head_doc["intercepts"][0]),
            norm, doc["schema_id"],
        )
    if kind in ("mnn", "dnn"):
        weights = tuple(np.array(l["weights"]) for l in doc["layers"])
        biases = tuple(np.array(l["hidden_bias"]) for l in doc["layers"])
        return BaselineModel(
            BaselineKind(kind), weights, biases,
            SoftmaxHead(np.array(head_doc["coefficients"]),
                        np.array(head_doc["intercepts"])),
            None, None, norm, doc["schema_id"],
        )
    raise ModelFileError(f"unknown model kind {kind!r}")
