"""Command-line surface for the risky-host detection pipeline.

Subcommands: gen, featurize, label, train, score, eval, pipeline, sweep,
serve.  Options resolve as CLI flag > config file > built-in default; the
config file is flat key=value text with one section per stage (configparser
syntax).
"""

from __future__ import annotations

import configparser
import os
import shutil
import time
from datetime import timedelta
from pathlib import Path

import click
import numpy as np

from . import dataio, report
from .dataio import format_time, parse_time
from .dbn import DbnModel
from .features import assemble_feature_matrix, default_schema, FeatureSchema
from .labels import LabelLexicon, attach_labels, default_lexicon
from .metrics import DEFAULT_TOP_PERCENTS, ScoredHost, evaluate
from .nnet import FinetuneConfig
from .rbm import CdConfig
from .synth import SynthConfig, generate_synthetic
from .train import score_model, split_labeled, train_model

MODEL_KINDS = ("dbn", "mnn", "dnn", "lr")


class Settings:
    """Config-file values with CLI-override resolution."""

    def __init__(self, path: str | None):
        self.parser = configparser.ConfigParser()
        if path:
            with open(path) as f:
                self.parser.read_file(f)

    def get(self, section: str, key: str, cli_value, default,
            cast=str):
        if cli_value is not None:
            return cli_value
        if self.parser.has_option(section, key):
            return cast(self.parser.get(section, key))
        return default


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Config file (key=value sections).")
@click.option("--seed", type=int, default=None, help="Master RNG seed.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory.")
@click.pass_context
def main(ctx, config_path, seed, out_dir):
    """Risky-host detection: data generation, features, training, scoring."""
    ctx.ensure_object(dict)
    settings = Settings(config_path)
    ctx.obj["settings"] = settings
    ctx.obj["seed"] = settings.get("global", "seed", seed, 0, int)
    ctx.obj["out"] = Path(settings.get("global", "out", out_dir, "out"))


def _outdir(ctx) -> Path:
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    return out


@main.command()
@click.option("--n-hosts", type=int, default=None)
@click.option("--risky-fraction", type=float, default=None)
@click.option("--days", type=int, default=None)
@click.pass_context
def gen(ctx, n_hosts, risky_fraction, days):
    """Generate synthetic events, analyst notes, and ground truth."""
    s = ctx.obj["settings"]
    cfg = SynthConfig(
        n_hosts=s.get("gen", "n_hosts", n_hosts, 4000, int),
        risky_fraction=s.get("gen", "risky_fraction", risky_fraction,
                             0.02, float),
        days=s.get("gen", "days", days, 14, int),
        seed=ctx.obj["seed"],
    )
    out = _outdir(ctx)
    events, notes, truth = generate_synthetic(cfg)
    dataio.write_events(events, out / "events.csv")
    dataio.write_notes(notes, out / "notes.csv")
    with open(out / "truth.csv", "w") as f:
        f.write("host_id,label\n")
        for host in sorted(truth):
            f.write(f"{host},{truth[host]}\n")
    (out / "lexicon.txt").write_text(default_lexicon().to_text())
    click.echo(f"wrote {len(events)} events, {len(notes)} notes to {out}")


def _load_schema(path: str | None) -> FeatureSchema:
    if path:
        return FeatureSchema.from_json(Path(path).read_text())
    return default_schema()


@main.command()
@click.option("--events", "events_path", type=click.Path(exists=True),
              required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True),
              default=None)
@click.option("--as-of", "as_of_s", type=str, default=None,
              help="Window end, ISO-8601 UTC; default = last event time.")
@click.pass_context
def featurize(ctx, events_path, schema_path, as_of_s):
    """Build the per-host feature matrix from an event log."""
    out = _outdir(ctx)
    schema = _load_schema(schema_path)
    events = dataio.read_events(events_path)
    if not events:
        raise click.ClickException("event log is empty")
    as_of = parse_time(as_of_s) if as_of_s else events[-1].time
    hosts = sorted({e.host_id for e in events})
    fm = assemble_feature_matrix(events, hosts, schema, as_of)
    dataio.write_dataset(fm, out / "dataset.csv")
    (out / "schema.json").write_text(schema.to_json())
    click.echo(f"featurized {len(hosts)} hosts x {len(schema)} features "
               f"(schema {schema.schema_id})")


@main.command()
@click.option("--dataset", "dataset_path", type=click.Path(exists=True),
              required=True)
@click.option("--notes", "notes_path", type=click.Path(exists=True),
              required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True),
              default=None)
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True),
              default=None)
@click.pass_context
def label(ctx, dataset_path, notes_path, schema_path, lexicon_path):
    """Attach 0/1 labels mined from analyst notes to the dataset."""
    out = _outdir(ctx)
    schema = _load_schema(schema_path)
    hosts, X, _, names = dataio.read_dataset(dataset_path)
    if names != schema.names:
        raise click.ClickException("dataset columns do not match schema")
    notes = dataio.read_notes(notes_path)
    lex = (LabelLexicon.from_text(Path(lexicon_path).read_text())
           if lexicon_path else default_lexicon())
    from .features import FeatureMatrix
    from .synth import DEFAULT_AS_OF
    fm = FeatureMatrix(tuple(hosts), X, schema, DEFAULT_AS_OF, DEFAULT_AS_OF)
    labeled, unknown = attach_labels(fm, notes, lex)
    dataio.write_dataset(labeled, out / "dataset.csv")
    n_lab = int(np.sum(~np.isnan(labeled.labels)))
    if unknown:
        click.echo(f"warning: ignored {unknown} notes for unknown hosts",
                   err=True)
    click.echo(f"labeled {n_lab}/{len(hosts)} hosts "
               f"({int(np.nansum(labeled.labels))} risky)")


def _train_and_report(dataset_path, kind, seed, out, settings,
                      hidden=None, batch_size=None, epochs=None,
                      train_fraction=None):
    hosts, X, y, names = dataio.read_dataset(dataset_path)
    labeled = ~np.isnan(y)
    if labeled.sum() < 4:
        raise click.ClickException("too few labeled rows to train")
    Xl, yl = X[labeled], y[labeled].astype(int)
    hl = [h for h, m in zip(hosts, labeled) if m]

    frac = settings.get("train", "train_fraction", train_fraction, 0.75, float)
    bs = settings.get("train", "batch_size", batch_size, 50, int)
    ep = settings.get("train", "epochs", epochs, 100, int)
    lr = settings.get("train", "learning_rate", None, 0.01, float)
    cd_lr = settings.get("train", "cd_learning_rate", None, 0.1, float)
    pre_ep = settings.get("train", "pretrain_epochs", None, 30, int)
    hidden = hidden or tuple(
        int(v) for v in settings.get(
            "train", "hidden", None, "20,10").split(",")
    )

    tr, te = split_labeled(yl, frac, seed)
    t0 = time.perf_counter()
    model = train_model(
        kind, Xl[tr], yl[tr], seed,
        dbn_hidden=hidden,
        cd=CdConfig(learning_rate=cd_lr, seed=seed),
        ft=FinetuneConfig(epochs=ep, batch_size=bs, learning_rate=lr,
                          seed=seed),
        pretrain_epochs=pre_ep,
    )
    train_seconds = time.perf_counter() - t0

    test_scores = score_model(model, Xl[te])
    test_hosts = [hl[i] for i in te]
    dataio.write_scores(test_hosts, test_scores, out / "scores.csv")
    scored = [ScoredHost(h, float(s), int(l))
              for h, s, l in zip(test_hosts, test_scores, yl[te])]
    curves = evaluate(scored, DEFAULT_TOP_PERCENTS)
    report.write_curves(curves, out)
    report.render_curves(curves, out)
    report.write_metrics_report(curves, out / "metrics.txt", kind)
    return model, curves, train_seconds


@main.command()
@click.option("--dataset", "dataset_path", type=click.Path(exists=True),
              required=True)
@click.option("--model-kind", type=click.Choice(MODEL_KINDS), default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--train-fraction", type=float, default=None)
@click.pass_context
def train(ctx, dataset_path, model_kind, epochs, batch_size, train_fraction):
    """Split, train a model, and write model + scores + metrics report."""
    out = _outdir(ctx)
    s = ctx.obj["settings"]
    kind = s.get("train", "model_kind", model_kind, "dbn")
    model, curves, _ = _train_and_report(
        dataset_path, kind, ctx.obj["seed"], out, s,
        batch_size=batch_size, epochs=epochs, train_fraction=train_fraction,
    )
    dataio.save_model(model, out / f"model{dataio.MODEL_SUFFIX}")
    click.echo(f"{kind} test AUC {curves.auc:.4f}; outputs in {out}")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True),
              required=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True),
              required=True)
@click.pass_context
def score(ctx, model_path, dataset_path):
    """Score every host in a dataset with a saved model."""
    out = _outdir(ctx)
    model = dataio.load_model(model_path)
    hosts, X, _, _ = dataio.read_dataset(dataset_path)
    scores = score_model(model, X)
    dataio.write_scores(hosts, scores, out / "scores.csv")
    click.echo(f"scored {len(hosts)} hosts -> {out / 'scores.csv'}")


@main.command("eval")
@click.option("--scores", "scores_path", type=click.Path(exists=True),
              required=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True),
              required=True, help="Labeled dataset supplying ground truth.")
@click.pass_context
def eval_cmd(ctx, scores_path, dataset_path):
    """Recompute metrics offline from a scores file plus labels."""
    out = _outdir(ctx)
    hosts, scores = dataio.read_scores(scores_path)
    dhosts, _, y, _ = dataio.read_dataset(dataset_path)
    label_by_host = {h: l for h, l in zip(dhosts, y)}
    scored = []
    for h, sc in zip(hosts, scores):
        l = label_by_host.get(h)
        if l is not None and not np.isnan(l):
            scored.append(ScoredHost(h, float(sc), int(l)))
    if not scored:
        raise click.ClickException("no labeled hosts among the scores")
    curves = evaluate(scored, DEFAULT_TOP_PERCENTS)
    report.write_curves(curves, out)
    report.render_curves(curves, out)
    report.write_metrics_report(curves, out / "metrics.txt", "offline")
    click.echo(f"AUC {curves.auc:.4f} over {len(scored)} labeled hosts")


@main.command()
@click.option("--events", "events_path", type=click.Path(exists=True),
              required=True)
@click.option("--notes", "notes_path", type=click.Path(exists=True),
              required=True)
@click.option("--days", type=int, default=None, help="Ticks to simulate.")
@click.option("--model-kind", type=click.Choice(MODEL_KINDS), default=None)
@click.pass_context
def pipeline(ctx, events_path, notes_path, days, model_kind):
    """Simulate the daily refresh loop: featurize, label, retrain, score.

    Each tick is atomic: outputs are staged and renamed into place only when
    the whole tick succeeds.
    """
    out = _outdir(ctx)
    s = ctx.obj["settings"]
    n_days = s.get("pipeline", "days", days, 3, int)
    kind = s.get("pipeline", "model_kind", model_kind, "dbn")
    seed = ctx.obj["seed"]
    schema = _load_schema(None)
    lex = default_lexicon()
    events = dataio.read_events(events_path)
    notes = dataio.read_notes(notes_path)
    if not events:
        raise click.ClickException("event log is empty")
    final_as_of = events[-1].time

    for tick in range(n_days):
        as_of = final_as_of - timedelta(days=n_days - 1 - tick)
        tag = as_of.strftime("%Y%m%d")
        staging = out / f".tick-{tag}.tmp"
        target = out / f"day-{tag}"
        if staging.exists():
            shutil.rmtree(staging)
        staging.mkdir(parents=True)
        try:
            tick_events = [e for e in events if e.time <= as_of]
            tick_notes = [n for n in notes if n.time <= as_of]
            hosts = sorted({e.host_id for e in tick_events})
            fm = assemble_feature_matrix(tick_events, hosts, schema, as_of)
            labeled, _ = attach_labels(fm, tick_notes, lex)
            dataio.write_dataset(labeled, staging / "dataset.csv")
            model, curves, _ = _train_and_report(
                staging / "dataset.csv", kind, seed + tick, staging, s)
            dataio.save_model(model, staging / f"model{dataio.MODEL_SUFFIX}")
            all_scores = score_model(model, fm.values)
            dataio.write_scores(list(fm.host_ids), all_scores,
                                staging / "all_scores.csv")
            if target.exists():
                shutil.rmtree(target)
            os.replace(staging, target)
            click.echo(f"tick {tag}: AUC {curves.auc:.4f}, "
                       f"{len(hosts)} hosts scored")
        except Exception:
            shutil.rmtree(staging, ignore_errors=True)
            raise


@main.command()
@click.option("--dataset", "dataset_path", type=click.Path(exists=True),
              required=True)
@click.option("--kind", "sweep_kind",
              type=click.Choice(["hidden_neurons", "batch_size"]),
              required=True)
@click.option("--grid", type=str, default=None,
              help="Comma-separated grid values.")
@click.pass_context
def sweep(ctx, dataset_path, sweep_kind, grid):
    """Hyperparameter sweep emitting value,auc,train_seconds rows."""
    out = _outdir(ctx)
    s = ctx.obj["settings"]
    default_grid = "5,10,25,50" if sweep_kind == "hidden_neurons" \
        else "10,25,50,100,200"
    values = [int(v) for v in
              s.get("sweep", "grid", grid, default_grid).split(",")]
    rows = []
    for v in values:
        if sweep_kind == "hidden_neurons":
            _, curves, secs = _train_and_report(
                dataset_path, "dbn", ctx.obj["seed"], out, s,
                hidden=(v, max(v // 2, 1)))
        else:
            _, curves, secs = _train_and_report(
                dataset_path, "dbn", ctx.obj["seed"], out, s, batch_size=v)
        rows.append((float(v), curves.auc, secs))
        click.echo(f"{sweep_kind}={v}: AUC {curves.auc:.4f} "
                   f"({secs:.1f}s)")
    with open(out / "sweep.csv", "w") as f:
        f.write("value,auc,train_seconds\n")
        for v, a, secs in rows:
            f.write(f"{v!r},{a!r},{secs!r}\n")
    report.render_sweep(rows, out / "sweep.png", sweep_kind)


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True),
              required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=None)
@click.pass_context
def serve(ctx, model_path, host, port):
    """Line-protocol scoring service (newline-delimited JSON over TCP)."""
    from .serve import serve_forever
    s = ctx.obj["settings"]
    port = s.get("serve", "port", port, 7787, int)
    click.echo(f"serving {model_path} on {host}:{port}")
    serve_forever(model_path, host, port)


if __name__ == "__main__":
    main()
