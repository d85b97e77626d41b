import numpy as np
import pytest

from hostrisk.features import assemble_feature_matrix, default_schema
from hostrisk.labels import attach_labels, default_lexicon
from hostrisk.synth import SynthConfig, generate_synthetic


@pytest.fixture(scope="session")
def bench():
    """Default desk-scale benchmark: generated, featurized, labeled once."""
    cfg = SynthConfig(seed=0)
    events, notes, truth = generate_synthetic(cfg)
    fm = assemble_feature_matrix(
        events, sorted(truth), default_schema(), cfg.as_of
    )
    labeled, _ = attach_labels(fm, notes, default_lexicon())
    mask = ~np.isnan(labeled.labels)
    return {
        "cfg": cfg,
        "events": events,
        "notes": notes,
        "truth": truth,
        "fm": labeled,
        "X": fm.values[mask],
        "y": labeled.labels[mask].astype(int),
        "hosts": [h for h, m in zip(fm.host_ids, mask) if m],
    }


@pytest.fixture(scope="session")
def small_data(tmp_path_factory):
    """Small synthetic corpus on disk for CLI tests."""
    from hostrisk import dataio

    out = tmp_path_factory.mktemp("small")
    cfg = SynthConfig(n_hosts=300, risky_fraction=0.04, days=7, seed=7)
    events, notes, truth = generate_synthetic(cfg)
    dataio.write_events(events, out / "events.csv")
    dataio.write_notes(notes, out / "notes.csv")
    fm = assemble_feature_matrix(
        events, sorted(truth), default_schema(), cfg.as_of
    )
    labeled, _ = attach_labels(fm, notes, default_lexicon())
    dataio.write_dataset(labeled, out / "dataset.csv")
    cfg_text = "\n".join([
        "[train]",
        "pretrain_epochs = 5",
        "epochs = 30",
        "",
        "[pipeline]",
        "days = 3",
        "",
    ])
    (out / "fast.cfg").write_text(cfg_text)
    return out
