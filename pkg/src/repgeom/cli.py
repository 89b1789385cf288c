"""Command-line surface: corpus generation, RSA experiment runs, normality
reports, Q-Q plots, and diagnostic probes.

Exit codes: 0 success, 1 usage/configuration, 2 data integrity,
3 numeric failure. All artifacts are byte-stable given identical inputs and
seeds; wall-clock timestamps go only to the run.log sidecar.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import re
import sys
import time
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import click
import numpy as np

from . import diagnostic, embedstore, grammar, models, plots, rsa, stats
from .errors import ConfigurationError, RepgeomError


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name)


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _echo(msg: str) -> None:
    click.echo(msg)


@dataclass(frozen=True)
class ExperimentSpec:
    corpus_path: Path
    dataset_path: Path | None
    lexicon_path: Path | None
    lexicon_dim: int
    reference: models.ModelRecipe
    hypotheses: tuple[models.ModelRecipe, ...]
    config: rsa.RSAConfig
    output_dir: Path | None


def load_experiment_spec(path: str | Path) -> ExperimentSpec:
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"experiment spec not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"experiment spec {p} is not valid JSON: {exc}")
    try:
        reference = models.recipe_from_dict(doc["reference"], "reference")
        hyps = tuple(models.recipe_from_dict(h, f"hypothesis_{i}")
                     for i, h in enumerate(doc["hypotheses"]))
        r = doc["rsa"]
        config = rsa.RSAConfig(
            n=int(r["n"]), m=int(r["m"]), seed=int(r["seed"]),
            on_constant=r.get("on_constant", "error"),
            reference_name=reference.name,
            hypothesis_names=tuple(h.name for h in hyps),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed experiment spec: {exc}") from exc
    if not hyps:
        raise ConfigurationError("experiment spec lists no hypotheses")
    names = [h.name for h in hyps]
    if len(set(names)) != len(names):
        raise ConfigurationError("hypothesis names must be unique")
    base = p.parent
    resolve = lambda key: (base / doc[key]) if key in doc and doc[key] else None
    corpus_path = resolve("corpus")
    if corpus_path is None:
        raise ConfigurationError("experiment spec must name a corpus file")
    return ExperimentSpec(
        corpus_path=corpus_path,
        dataset_path=resolve("dataset"),
        lexicon_path=resolve("lexicon"),
        lexicon_dim=int(doc.get("lexicon_dim", 300)),
        reference=reference,
        hypotheses=hyps,
        config=config,
        output_dir=resolve("output_dir"),
    )


def _reseed_spec(spec: ExperimentSpec, master: int) -> ExperimentSpec:
    """Derive every stochastic input (RSA sampling, null-model draws) from one
    master seed."""
    null_recipes = [h for h in spec.hypotheses
                    if h.kind in ("null_concat", "null_single")]
    draws = np.random.SeedSequence(int(master)).generate_state(
        1 + len(null_recipes), dtype=np.uint64)
    it = iter(int(v) for v in draws)
    config = rsa.RSAConfig(n=spec.config.n, m=spec.config.m, seed=next(it),
                           on_constant=spec.config.on_constant,
                           reference_name=spec.config.reference_name,
                           hypothesis_names=spec.config.hypothesis_names)
    hyps = []
    for h in spec.hypotheses:
        if h.kind in ("null_concat", "null_single"):
            hyps.append(models.ModelRecipe(
                kind=h.kind, name=h.name, role=h.role,
                anchor_role=h.anchor_role, context_role=h.context_role,
                distractor_pool=h.distractor_pool, seed=next(it)))
        else:
            hyps.append(h)
    return ExperimentSpec(
        corpus_path=spec.corpus_path, dataset_path=spec.dataset_path,
        lexicon_path=spec.lexicon_path, lexicon_dim=spec.lexicon_dim,
        reference=spec.reference, hypotheses=tuple(hyps), config=config,
        output_dir=spec.output_dir)


# ---------------------------------------------------------------------------
# commands


@click.group()
def cli():
    """Representational-geometry comparison toolkit."""


@cli.command("generate")
@click.option("--grammar", "grammar_path", required=True,
              type=click.Path(), help="grammar JSON file")
@click.option("--count", default="2000", show_default=True,
              help="number of raw draws, or 'all' for exhaustive enumeration")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(), help="corpus file to write")
def cmd_generate(grammar_path, count, seed, out):
    """Generate a role-annotated corpus from a template grammar."""
    g = grammar.load_grammar(grammar_path)
    if count == "all":
        corpus = grammar.enumerate_corpus(g)
    else:
        try:
            n = int(count)
        except ValueError:
            raise ConfigurationError(f"--count must be an integer or 'all', "
                                     f"got {count!r}")
        corpus = grammar.generate_corpus(g, n, seed)
    grammar.save_corpus(corpus, out)
    _echo(f"{len(corpus)} sentences after filtering -> {out}")


@cli.command("run")
@click.option("--spec", "spec_path", required=True, type=click.Path(),
              help="experiment spec JSON file")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="output directory (overrides the spec's output_dir)")
@click.option("--seed", "master_seed", type=int, default=None,
              help="derive all sampling seeds from this master seed")
@click.option("--n", "n_override", type=int, default=None,
              help="override the spec's sample size")
@click.option("--m", "m_override", type=int, default=None,
              help="override the spec's sample count")
def cmd_run(spec_path, out_dir, master_seed, n_override, m_override):
    """Run the full repeated-sample comparison and write the report."""
    spec = load_experiment_spec(spec_path)
    if n_override is not None or m_override is not None:
        config = rsa.RSAConfig(
            n=n_override if n_override is not None else spec.config.n,
            m=m_override if m_override is not None else spec.config.m,
            seed=spec.config.seed, on_constant=spec.config.on_constant,
            reference_name=spec.config.reference_name,
            hypothesis_names=spec.config.hypothesis_names)
        spec = dataclasses.replace(spec, config=config)
    if master_seed is not None:
        spec = _reseed_spec(spec, master_seed)
    out = Path(out_dir) if out_dir else spec.output_dir
    if out is None:
        raise ConfigurationError("no output directory: pass --out or set "
                                 "output_dir in the spec")
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()

    corpus = grammar.load_corpus(spec.corpus_path)
    dataset = embedstore.read_dataset(spec.dataset_path) \
        if spec.dataset_path else None
    lexicon = embedstore.load_static_lexicon(spec.lexicon_path, spec.lexicon_dim) \
        if spec.lexicon_path else None
    if dataset is not None:
        dataset.validate_against(corpus)

    reference = models.build_model(spec.reference, corpus, dataset, lexicon)
    hypotheses = [models.build_model(h, corpus, dataset, lexicon)
                  for h in spec.hypotheses]
    series = rsa.run_rsa(corpus, reference, hypotheses, spec.config)

    ordered = [series[h.name] for h in hypotheses]
    comparisons = [rsa.compare(a, b) for a, b in combinations(ordered, 2)]

    # scores.csv: one row per sample, one column per hypothesis, audit ids last
    with (out / "scores.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sample"] + [s.hypothesis for s in ordered] + ["sentence_ids"])
        for j in range(spec.config.m):
            w.writerow([j] + [f"{s.scores[j]:.12g}" for s in ordered]
                       + [" ".join(str(i) for i in ordered[0].samples[j])])

    with (out / "comparisons.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["hypothesis_a", "hypothesis_b", "mean_a", "mean_b",
                    "positives", "negatives", "zeros", "p_value",
                    "median_difference", "direction"])
        for c in comparisons:
            w.writerow([c.hypothesis_a, c.hypothesis_b, f"{c.mean_a:.12g}",
                        f"{c.mean_b:.12g}", c.positives, c.negatives, c.zeros,
                        f"{c.p_value:.6g}", f"{c.median_difference:.12g}",
                        c.direction])

    histograms = {}
    for a, b in combinations(ordered, 2):
        edges, counts = rsa.difference_histogram(a, b)
        key = f"{_slug(a.hypothesis)}_vs_{_slug(b.hypothesis)}"
        histograms[key] = {"edges": [float(e) for e in edges],
                           "counts": [int(c) for c in counts]}
        with (out / f"hist_{key}.csv").open("w", newline="",
                                            encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "count"])
            for left, right, count in zip(edges[:-1], edges[1:], counts):
                w.writerow([f"{left:.12g}", f"{right:.12g}", int(count)])
        fig = plots.difference_histogram_figure(edges, counts,
                                                a.hypothesis, b.hypothesis)
        plots.save_figure(fig, out / f"hist_{key}")

    fig = plots.score_series_figure({s.hypothesis: s.scores for s in ordered})
    plots.save_figure(fig, out / "scores")

    results = {
        "config": {
            "n": spec.config.n,
            "m": spec.config.m,
            "seed": spec.config.seed,
            "on_constant": spec.config.on_constant,
            "reference": reference.name,
            "hypotheses": [h.name for h in hypotheses],
            "corpus_fingerprint": corpus.fingerprint(),
        },
        "means": {s.hypothesis: s.mean for s in ordered},
        "comparisons": [
            {
                "hypothesis_a": c.hypothesis_a, "hypothesis_b": c.hypothesis_b,
                "mean_a": c.mean_a, "mean_b": c.mean_b,
                "positives": c.positives, "negatives": c.negatives,
                "zeros": c.zeros, "p_value": c.p_value,
                "median_difference": c.median_difference,
                "direction": c.direction,
            }
            for c in comparisons
        ],
        "histograms": histograms,
    }
    _write_json(out / "results.json", results)
    with (out / "run.log").open("a", encoding="utf-8") as fh:
        fh.write(f"run finished at {time.strftime('%Y-%m-%dT%H:%M:%S')} "
                 f"in {time.time() - started:.1f}s\n")

    for s in ordered:
        _echo(f"mean similarity {s.hypothesis}: {s.mean:.4f}")
    for c in comparisons:
        _echo(f"{c.hypothesis_a} vs {c.hypothesis_b}: "
              f"{c.positives}+/{c.negatives}-/{c.zeros}0, p={c.p_value:.3g}, "
              f"direction {c.direction}")
    _echo(f"report written to {out}")


def _parse_roles(roles: str | None) -> set[str] | None:
    if not roles:
        return None
    return {r.strip() for r in roles.split(",") if r.strip()}


@cli.command("normality")
@click.option("--dataset", "dataset_path", required=True, type=click.Path())
@click.option("--roles", default=None,
              help="comma-separated role filter (default: every record)")
@click.option("--subsample", "subsample_k", default=300, show_default=True,
              type=int, help="subsample size; 0 disables the subsampled pass")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_normality(dataset_path, roles, subsample_k, seed, out_dir):
    """Shapiro-Wilk normality report over a dataset's embeddings."""
    wanted = _parse_roles(roles)
    records = []
    for kind, key, vec in embedstore.iter_records(dataset_path):
        if kind != "record":
            continue
        sid, role = key
        if wanted is None or role in wanted:
            records.append(((sid, role), vec))
    if not records:
        raise ConfigurationError("no matching embedding records in the dataset")
    report = stats.normality_report(records,
                                    subsample_k if subsample_k > 0 else None,
                                    seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "normality.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sentence_id", "role", "w_full", "p_full", "w_sub", "p_sub"])
        for e in report.entries:
            w.writerow([e.sentence_id, e.role, f"{e.w_full:.9g}",
                        f"{e.p_full:.6g}",
                        "" if e.w_sub is None else f"{e.w_sub:.9g}",
                        "" if e.p_sub is None else f"{e.p_sub:.6g}"])
    _write_json(out / "normality.json", {
        "alpha": report.alpha,
        "subsample_k": report.subsample_k,
        "count": report.count,
        "nonnormal_full": report.nonnormal_full,
        "frac_nonnormal_full": report.frac_nonnormal_full,
        "nonnormal_sub": report.nonnormal_sub,
        "frac_nonnormal_sub": report.frac_nonnormal_sub,
    })
    _echo(f"{report.count} embeddings, "
          f"{100 * report.frac_nonnormal_full:.2f}% non-normal (full)"
          + (f", {100 * report.frac_nonnormal_sub:.2f}% non-normal "
             f"(subsample {report.subsample_k})"
             if report.subsample_k else ""))


@cli.command("qq")
@click.option("--dataset", "dataset_path", required=True, type=click.Path())
@click.option("--sentence", "sentence_id", required=True, type=int)
@click.option("--role", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def cmd_qq(dataset_path, sentence_id, role, out_dir):
    """Q-Q plot data and figure for one Z-normalized embedding."""
    dataset = embedstore.read_dataset(dataset_path)
    vec = dataset.vector(sentence_id, role)
    points = stats.qq_points(stats.z_normalize(vec))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = f"qq_{sentence_id}_{_slug(role)}"
    with (out / f"{base}.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theoretical", "sample"])
        for t, s in points:
            w.writerow([f"{t:.12g}", f"{s:.12g}"])
    fig = plots.qq_figure(points, f"sentence {sentence_id}, role {role}")
    plots.save_figure(fig, out / base)
    _echo(f"wrote {base}.csv and figures to {out}")


@cli.command("probe")
@click.option("--spec", "spec_path", required=True, type=click.Path(),
              help="probe spec JSON file")
@click.option("--out", "out_dir", type=click.Path(), default=None)
def cmd_probe(spec_path, out_dir):
    """Train a diagnostic logistic-regression probe and report its metrics."""
    p = Path(spec_path)
    if not p.exists():
        raise ConfigurationError(f"probe spec not found: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
        corpus_path = p.parent / doc["corpus"]
        dataset_path = p.parent / doc["dataset"]
        lexicon_path = p.parent / doc["lexicon"]
        lexicon_dim = int(doc.get("lexicon_dim", 300))
        target_role = str(doc["target_role"])
        positive_role = str(doc["positive_role"])
        split_seed = int(doc.get("split_seed", 0))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"malformed probe spec: {exc}") from exc

    corpus = grammar.load_corpus(corpus_path)
    dataset = embedstore.read_dataset(dataset_path)
    lexicon = embedstore.load_static_lexicon(lexicon_path, lexicon_dim)
    instances = diagnostic.build_probe_dataset(corpus, dataset, lexicon,
                                               target_role, positive_role)
    report = diagnostic.train_probe(instances, split_seed)

    doc_out = {
        "target_role": target_role,
        "positive_role": positive_role,
        "split_seed": split_seed,
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "majority_accuracy": report.majority_accuracy,
        "train_size": report.train_size,
        "test_size": report.test_size,
    }
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "probe_report.json", doc_out)
    _echo(f"{'':16s}Accuracy  Precision  Recall")
    _echo(f"{positive_role:<16s}{report.accuracy:<10.3f}"
          f"{report.precision:<11.3f}{report.recall:.3f}")
    _echo(f"{'majority class':<16s}{report.majority_accuracy:.3f}")


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except RepgeomError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
