"""Newline-delimited JSON scoring service over a stream socket.

One request per line: {"host_id": "...", "features": [...]} answered with
{"host_id": "...", "risk_score": r} or {"error": "..."}.  The model snapshot
is immutable; {"cmd": "reload", "path": "..."} swaps it atomically.
"""

from __future__ import annotations

import json
import socketserver
import threading

import numpy as np

from .baselines import BaselineModel, score_baseline_many
from .dbn import DbnModel, score_many
from .dataio import load_model

__all__ = ["ModelHolder", "ScoringServer", "serve_forever", "handle_line"]


class ModelHolder:
    """Thread-safe holder for the current model snapshot."""

    def __init__(self, model):
        self._model = model
        self._lock = threading.Lock()

    def get(self):
        with self._lock:
            return self._model

    def reload(self, path: str):
        model = load_model(path)  # parse fully before swapping
        with self._lock:
            self._model = model


def _score_one(model, features: list) -> float:
    x = np.asarray(features, dtype=float)
    if x.ndim != 1:
        raise ValueError("features must be a flat list of numbers")
    if isinstance(model, DbnModel):
        expected = model.architecture.n_features
        if x.size != expected:
            raise ValueError(
                f"feature vector length {x.size}, expected {expected}"
            )
        return float(score_many(model, x[None, :])[0])
    if isinstance(model, BaselineModel):
        expected = model.n_features
        if x.size != expected:
            raise ValueError(
                f"feature vector length {x.size}, expected {expected}"
            )
        return float(score_baseline_many(model, x[None, :])[0])
    raise TypeError("unsupported model type")


def handle_line(line: str, holder: ModelHolder) -> str:
    """Process one request line; never raises."""
    try:
        msg = json.loads(line)
    except json.JSONDecodeError:
        return json.dumps({"error": "malformed JSON"})
    if not isinstance(msg, dict):
        return json.dumps({"error": "request must be a JSON object"})
    if msg.get("cmd") == "reload":
        try:
            holder.reload(msg["path"])
            return json.dumps({"ok": "reloaded"})
        except Exception as exc:
            return json.dumps({"error": f"reload failed: {exc}"})
    if "features" not in msg:
        return json.dumps({"error": "missing 'features'"})
    host_id = msg.get("host_id", "")
    try:
        score = _score_one(holder.get(), msg["features"])
    except (ValueError, TypeError) as exc:
        return json.dumps({"host_id": host_id, "error": str(exc)})
    return json.dumps({"host_id": host_id, "risk_score": score})


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        holder = self.server.holder
        try:
            for raw in self.rfile:
                reply = handle_line(raw.decode("utf-8", "replace"), holder)
                self.wfile.write(reply.encode() + b"\n")
                self.wfile.flush()
        except (ConnectionError, BrokenPipeError, OSError):
            pass  # client went away; never take the service down


class ScoringServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, holder: ModelHolder):
        super().__init__(address, _Handler)
        self.holder = holder


def serve_forever(model_path: str, host: str = "127.0.0.1", port: int = 7787):
    holder = ModelHolder(load_model(model_path))
    with ScoringServer((host, port), holder) as server:
        server.serve_forever()
