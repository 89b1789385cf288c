"""Command line: extract contextual embeddings to EMB1, and filter static
word-vector tables to a corpus vocabulary."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .corpus_io import CorpusFormatError, read_corpus
from .emb1 import Emb1Error
from .encode import AlignmentError, extract
from .lexicon import export_lexicon


@click.group()
def cli():
    """Embedding extraction for the representational-geometry toolkit."""


@cli.command("extract")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--model-id", default="bert-base-uncased", show_default=True,
              help="encoder name or local model directory")
@click.option("--layer", default=-1, show_default=True, type=int,
              help="hidden-state index; -1 is the encoder's last layer")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--batch-size", default=32, show_default=True, type=int)
@click.option("--device", default="cpu", show_default=True)
@click.option("--append-period/--no-append-period", default=True,
              show_default=True,
              help="encode sentences with a trailing period")
def cmd_extract(corpus_path, model_id, layer, out_path, batch_size, device,
                append_period):
    """Write one vector per (sentence, role) plus the sentence vector."""
    manifest = extract(corpus_path, model_id, out_path, layer=layer,
                       batch_size=batch_size, append_period=append_period,
                       device=device)
    click.echo(f"wrote {out_path} (layer {manifest.layer}/"
               f"{manifest.num_layers - 1}, hidden size "
               f"{manifest.hidden_size}, roles: "
               f"{', '.join(manifest.roles)} + sentence)")


@cli.command("export-lexicon")
@click.option("--corpus", "corpus_path", type=click.Path(), default=None,
              help="take the word list from this corpus's vocabulary")
@click.option("--words", "words_path", type=click.Path(), default=None,
              help="additional words, one per line (e.g. distractor pools)")
@click.option("--glove", "glove_path", required=True, type=click.Path(),
              help="source static-vector table (word v1 ... vd lines)")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--miss-report", "miss_path", type=click.Path(), default=None,
              help="where to list words absent from the source table")
def cmd_export_lexicon(corpus_path, words_path, glove_path, out_path,
                       miss_path):
    """Filter a static-vector table down to the words an experiment needs."""
    words: set[str] = set()
    if corpus_path:
        words.update(read_corpus(corpus_path).vocabulary())
    if words_path:
        words.update(w.strip() for w in
                     Path(words_path).read_text(encoding="utf-8").splitlines()
                     if w.strip())
    if not words:
        raise click.UsageError("pass --corpus and/or --words")
    result = export_lexicon(words, glove_path, out_path,
                            miss_report_path=miss_path)
    click.echo(f"kept {result.kept} words"
               + (f", {len(result.misses)} missing" if result.misses else ""))
    if result.misses and miss_path is None:
        for w in result.misses:
            click.echo(f"  missing: {w}", err=True)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except (CorpusFormatError, Emb1Error, AlignmentError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
