import csv
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest

from hostrisk.features import (
    FeatureDescriptor,
    FeatureSchema,
    assemble_feature_matrix,
    default_schema,
    indicator_features,
    summary_features,
    temporal_features,
)
from hostrisk.graph import (
    HostEventGraph,
    PageRankDivergence,
    build_host_event_graph,
    weighted_pagerank,
)
from hostrisk.records import EventRecord

UTC = timezone.utc
AS_OF = datetime(2024, 1, 8, 0, 0, 0, tzinfo=UTC)  # a Monday


def ev(host, code, when, sev=5):
    return EventRecord(host, code, when, sev)


def desc(name, kind, **params):
    return FeatureDescriptor(name, kind, tuple(params.items()))


class TestSummary:
    def test_direct_count(self):
        events = [ev("h1", "SYS0206", AS_OF - timedelta(hours=2))
                  for _ in range(3)]
        d = desc("c", "event_count", event_id="SYS0206", window_hours=24)
        assert summary_features(events, "h1", [d], AS_OF) == [3.0]

    def test_no_events_all_zero(self):
        d = desc("c", "total_count", window_hours=24)
        assert summary_features([], "h1", [d], AS_OF) == [0.0]

    def test_severity_strictly_over_threshold(self):
        sevs = (3, 8, 9, 7, 10)
        events = [ev("h1", "X", AS_OF - timedelta(hours=len(sevs) - i), s)
                  for i, s in enumerate(sevs)]
        d = desc("c", "severity_count", threshold=7, window_hours=24)
        assert summary_features(events, "h1", [d], AS_OF) == [3.0]

    def test_unsorted_input_rejected(self):
        events = [ev("h1", "X", AS_OF - timedelta(hours=1)),
                  ev("h1", "X", AS_OF - timedelta(hours=2))]
        d = desc("c", "total_count", window_hours=24)
        with pytest.raises(ValueError, match="sorted"):
            summary_features(events, "h1", [d], AS_OF)


class TestIndicator:
    def test_saturday_event_sets_flag(self):
        d = desc("w", "weekend_indicator", event_id="X", window_hours=168)
        sat = datetime(2024, 1, 6, 12, tzinfo=UTC)
        assert indicator_features([ev("h1", "X", sat)], "h1", [d],
                                  AS_OF) == [1.0]

    def test_weekday_only_is_zero(self):
        d = desc("w", "weekend_indicator", event_id="X", window_hours=168)
        events = [ev("h1", "X", datetime(2024, 1, d_, 9, tzinfo=UTC))
                  for d_ in (1, 2, 3, 4, 5)]  # Mon-Fri
        assert indicator_features(events, "h1", [d], AS_OF) == [0.0]

    def test_utc_weekend_boundary(self):
        d = desc("w", "weekend_indicator", event_id="X", window_hours=168)
        friday_last_second = datetime(2024, 1, 5, 23, 59, 59, tzinfo=UTC)
        saturday_midnight = datetime(2024, 1, 6, 0, 0, 0, tzinfo=UTC)
        assert indicator_features([ev("h1", "X", friday_last_second)],
                                  "h1", [d], AS_OF) == [0.0]
        assert indicator_features([ev("h1", "X", saturday_midnight)],
                                  "h1", [d], AS_OF) == [1.0]


class TestTemporal:
    def test_uniform_spacing(self):
        t0 = AS_OF - timedelta(hours=5)
        events = [ev("h1", "X", t0 + timedelta(hours=k)) for k in range(3)]
        rate = desc("r", "arrival_rate", window_hours=24)
        gap = desc("g", "mean_gap", window_hours=24)
        assert temporal_features(events, "h1", [rate, gap], AS_OF) == \
            [1.0, 1.0]

    def test_single_event_is_zero(self):
        events = [ev("h1", "X", AS_OF - timedelta(hours=1))]
        rate = desc("r", "arrival_rate", window_hours=24)
        gap = desc("g", "mean_gap", window_hours=24)
        assert temporal_features(events, "h1", [rate, gap], AS_OF) == \
            [0.0, 0.0]

    def test_harmonic_mean_uneven_gaps(self):
        # gaps 0.5h and 1.5h: harmonic mean 2/(1/0.5 + 1/1.5) = 0.75
        t0 = AS_OF - timedelta(hours=5)
        events = [ev("h1", "X", t0),
                  ev("h1", "X", t0 + timedelta(hours=0.5)),
                  ev("h1", "X", t0 + timedelta(hours=2))]
        rate = desc("r", "arrival_rate", window_hours=24)
        gap = desc("g", "mean_gap", window_hours=24)
        got = temporal_features(events, "h1", [rate, gap], AS_OF)
        assert got[0] == pytest.approx(1.0)
        assert got[1] == pytest.approx(0.75)


class TestGraph:
    def test_empty_events_empty_graph(self):
        g = build_host_event_graph([])
        assert g.n_nodes == 0

    def test_direct_construction(self):
        events = [ev("A", "E1", AS_OF), ev("A", "E1", AS_OF),
                  ev("A", "E2", AS_OF)]
        g = build_host_event_graph(events)
        assert g.edges[("A", "E1")] == 2
        assert g.edges[("A", "E2")] == 1

    def test_shared_event_node(self):
        events = [ev("A", "E1", AS_OF), ev("B", "E1", AS_OF)]
        g = build_host_event_graph(events)
        assert len([e for e in g.edges if e[1] == "E1"]) == 2


def pagerank_oracle(g: HostEventGraph, damping=0.85):
    """Dense linear solve: pr = (1-d)/n 1 + d A pr."""
    nodes = sorted(g.host_nodes) + sorted(g.event_nodes)
    idx = {n: i for i, n in enumerate(nodes)}
    n = len(nodes)
    W = np.zeros((n, n))
    for (h, e), w in g.edges.items():
        W[idx[h], idx[e]] += w
        W[idx[e], idx[h]] += w
    out = W.sum(axis=1)
    A = np.zeros((n, n))
    for v in range(n):
        A[:, v] = 1.0 / n if out[v] == 0 else W[v, :] / out[v]
    pr = np.linalg.solve(np.eye(n) - damping * A,
                         (1 - damping) / n * np.ones(n))
    return {nodes[i]: pr[i] for i in range(n)}


class TestPageRank:
    def test_single_node(self):
        g = HostEventGraph()
        g.add_node("A")
        assert weighted_pagerank(g) == {"A": pytest.approx(1.0)}

    def test_two_node_symmetry(self):
        g = HostEventGraph()
        g.add_edge("A", "E1", 4)
        pr = weighted_pagerank(g)
        assert pr["A"] == pytest.approx(0.5, abs=1e-9)
        assert pr["E1"] == pytest.approx(0.5, abs=1e-9)

    def test_star_hand_solution(self):
        g = HostEventGraph()
        g.add_edge("H", "E1", 2)
        g.add_edge("H", "E2", 2)
        pr = weighted_pagerank(g)
        assert pr["H"] == pytest.approx(0.9 / 1.85, abs=1e-6)
        assert pr["E1"] == pytest.approx(0.256757, abs=1e-6)

    def test_random_graphs_match_dense_solve(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            g = HostEventGraph()
            n_hosts = int(rng.integers(1, 8))
            n_events = int(rng.integers(1, 8))
            for h in range(n_hosts):
                g.add_node(f"h{h}")
            for _ in range(int(rng.integers(1, 20))):
                g.add_edge(f"h{rng.integers(n_hosts)}",
                           f"e{rng.integers(n_events)}",
                           int(rng.integers(1, 5)))
            pr = weighted_pagerank(g)
            assert sum(pr.values()) == pytest.approx(1.0, abs=1e-10)
            oracle = pagerank_oracle(g)
            for node, v in pr.items():
                assert v == pytest.approx(oracle[node], abs=1e-8)

    def test_nonconvergence_error_carries_residual(self):
        g = HostEventGraph()
        g.add_edge("A", "E1", 1)
        g.add_edge("B", "E1", 1)
        with pytest.raises(PageRankDivergence) as exc:
            weighted_pagerank(g, tol=1e-16, max_iter=2)
        assert exc.value.residual > 0


class TestAssemble:
    def small_schema(self):
        return FeatureSchema((
            desc("c_sys_24h", "event_count", event_id="SYS0206",
                 window_hours=24),
            desc("sev7_24h", "severity_count", threshold=7, window_hours=24),
            desc("wk_sys", "weekend_indicator", event_id="SYS0206",
                 window_hours=168),
            desc("rate", "arrival_rate", window_hours=24),
            desc("gap", "mean_gap", window_hours=24),
            FeatureDescriptor("pagerank", "pagerank"),
        ))

    def golden_events(self):
        return [
            ev("hA", "SYS0206", datetime(2024, 1, 6, 10, tzinfo=UTC), 8),
            ev("hA", "SYS0206", datetime(2024, 1, 7, 10, tzinfo=UTC), 5),
            ev("hA", "SYS0206", datetime(2024, 1, 7, 12, tzinfo=UTC), 9),
            ev("hA", "FW0007", datetime(2024, 1, 7, 18, tzinfo=UTC), 3),
            ev("hB", "AV0012", datetime(2024, 1, 7, 6, tzinfo=UTC), 2),
            ev("hB", "AV0012", datetime(2024, 1, 7, 9, tzinfo=UTC), 10),
            ev("hB", "SYS0206", datetime(2024, 1, 1, 0, 30, tzinfo=UTC), 4),
            ev("hC", "VPN0005", datetime(2024, 1, 7, 23, tzinfo=UTC), 1),
            ev("hC", "VPN0005", datetime(2024, 1, 7, 23, 30, tzinfo=UTC), 1),
            ev("hC", "SCAN0001", datetime(2024, 1, 3, 12, tzinfo=UTC), 6),
        ]

    def test_shape_and_alignment(self):
        schema = self.small_schema()
        fm = assemble_feature_matrix(self.golden_events()[:4], ["hA", "hB"],
                                     schema, AS_OF)
        assert fm.values.shape == (2, 6)
        assert fm.host_ids == ("hA", "hB")

    def test_deterministic(self):
        schema = self.small_schema()
        a = assemble_feature_matrix(self.golden_events(),
                                    ["hA", "hB", "hC"], schema, AS_OF)
        b = assemble_feature_matrix(self.golden_events(),
                                    ["hA", "hB", "hC"], schema, AS_OF)
        assert np.array_equal(a.values, b.values)

    def test_golden_fixture(self):
        schema = self.small_schema()
        fm = assemble_feature_matrix(self.golden_events(),
                                     ["hA", "hB", "hC"], schema, AS_OF)
        path = Path(__file__).parent / "data" / "golden_features.csv"
        with open(path) as f:
            rows = list(csv.reader(f))
        expect = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
        assert [r[0] for r in rows[1:]] == list(fm.host_ids)
        assert np.allclose(fm.values, expect, atol=1e-8)

    def test_duplicate_hosts_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            assemble_feature_matrix([], ["hA", "hA"], self.small_schema(),
                                    AS_OF)

    def test_zero_event_host_gets_teleport_share_only(self):
        schema = self.small_schema()
        fm = assemble_feature_matrix(self.golden_events(),
                                     ["hA", "hB", "hC", "hZ"], schema, AS_OF)
        row = fm.values[list(fm.host_ids).index("hZ")]
        assert np.all(row[:-1] == 0)
        assert row[-1] > 0  # teleport share from being an isolated node

    def test_events_outside_windows_do_not_matter(self):
        schema = self.small_schema()
        base = self.golden_events()
        extra = base + [
            ev("hA", "SYS0206", AS_OF - timedelta(hours=200), 10)]
        a = assemble_feature_matrix(base, ["hA", "hB", "hC"], schema, AS_OF)
        b = assemble_feature_matrix(sorted(extra, key=lambda e: e.time),
                                    ["hA", "hB", "hC"], schema, AS_OF)
        assert np.array_equal(a.values, b.values)

    def test_all_features_non_negative_and_indicators_binary(self, bench):
        fm = bench["fm"]
        assert np.all(fm.values >= 0)
        cols = [i for i, d in enumerate(fm.schema.descriptors)
                if d.category == "indicator"]
        assert np.all(np.isin(fm.values[:, cols], (0.0, 1.0)))


class TestSchema:
    def test_default_has_40_descriptors_across_categories(self):
        s = default_schema()
        assert len(s) == 40
        cats = {d.category for d in s.descriptors}
        assert cats == {"summary", "indicator", "temporal", "relational"}

    def test_schema_id_stable_and_sensitive(self):
        a = default_schema()
        b = default_schema()
        assert a.schema_id == b.schema_id
        trimmed = FeatureSchema(a.descriptors[:-1])
        assert trimmed.schema_id != a.schema_id

    def test_json_round_trip(self):
        s = default_schema()
        s2 = FeatureSchema.from_json(s.to_json())
        assert s2.schema_id == s.schema_id
        assert s2.names == s.names

    def test_duplicate_names_rejected(self):
        d = desc("same", "total_count", window_hours=24)
        with pytest.raises(ValueError, match="unique"):
            FeatureSchema((d, d))
