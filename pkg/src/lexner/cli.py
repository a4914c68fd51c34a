"""Command-line interface: one binary, one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error (bad files, malformed
input, shape mismatches), 3 numeric failure (non-finite loss, failed
gradient check).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import model as model_mod
from . import trainer as trainer_mod
from .data import (
    CorpusError,
    allowed_transitions,
    corpus_stats,
    evaluate,
    load_corpus,
    make_tagset,
)
from .encoding import EmbeddingTable
from .graph import GRAPH_VARIANTS, serialize_graph
from .matching import build_trie, load_lexicon, match_sentence
from .model import ModelParams, prepare_corpus, prepare_sentence
from .synthetic import make_overfit_corpus
from .trainer import NumericError, TrainConfig, grad_check, train


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage errors to 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lexner", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("match",
                       help="emit matched lexicon words per sentence")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--input", required=True, help="plain text, one sentence per line")
    p.add_argument("--out", default=None)

    p = sub.add_parser("graph",
                       help="emit the serialized lattice graph per sentence")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--variant", default="standard", choices=GRAPH_VARIANTS)
    p.add_argument("--out", default=None)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--variant", default=None, choices=GRAPH_VARIANTS)

    p = sub.add_parser("eval",
                       help="strict span+type evaluation of predictions")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)

    p = sub.add_parser("predict",
                       help="tag an input file with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--lexicon", default=None,
                   help="defaults to the lexicon stored in the checkpoint")
    p.add_argument("--out", default=None)

    p = sub.add_parser("gradcheck",
                       help="verify gradients against finite differences")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("stats",
                       help="corpus statistics and lexicon coverage")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    return parser


def _open_out(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _cmd_match(args) -> int:
    trie = build_trie(load_lexicon(args.lexicon))
    out = _open_out(args.out)
    try:
        for sid, line in enumerate(Path(args.input).read_text(encoding="utf-8").splitlines()):
            if not line:
                continue
            words, _ = match_sentence(trie, line)
            for w in words:
                out.write(f"{sid}\t{w.head}\t{w.tail}\t{w.surface}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_graph(args) -> int:
    trie = build_trie(load_lexicon(args.lexicon))
    out = _open_out(args.out)
    try:
        for sid, line in enumerate(Path(args.input).read_text(encoding="utf-8").splitlines()):
            if not line:
                continue
            sent = prepare_sentence(line, trie, variant=args.variant)
            out.write(f"sentence {sid}\n")
            out.write(serialize_graph(sent.graph))
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _load_embeddings(path: str, vocab, dim: int, rng, dtype):
    if path:
        table = EmbeddingTable.from_file(path, vocab=vocab, rng=rng, dtype=dtype)
        if table.dim != dim:
            raise CorpusError(f"{path}: embedding dim {table.dim} does not match config {dim}")
        return table
    return EmbeddingTable.random(vocab, dim, rng, dtype=dtype)


def _cmd_train(args) -> int:
    cfg = TrainConfig.from_file(
        args.config, overrides={"seed": args.seed, "variant": args.variant}
    )
    if not cfg.train_file or not cfg.lexicon_file:
        raise CorpusError("config must set train_file and lexicon_file")
    corpus = load_corpus(cfg.train_file, cfg.tag_scheme)
    dev = load_corpus(cfg.dev_file, cfg.tag_scheme) if cfg.dev_file else None
    lexicon = load_lexicon(cfg.lexicon_file)
    trie = build_trie(lexicon, cfg.max_word_len or None)
    char_vocab = sorted({c for s in corpus.sentences for c in s.chars})
    types = set(corpus.entity_types()) | (set(dev.entity_types()) if dev else set())
    rng = np.random.default_rng(cfg.seed)
    char_table = _load_embeddings(cfg.char_emb_file, char_vocab, cfg.d_c, rng, np.float32)
    word_table = _load_embeddings(cfg.word_emb_file, trie.words, cfg.d_w, rng, np.float32)
    model = ModelParams.build(
        cfg.dims(), char_vocab, trie.words, sorted(types), rng,
        scheme=cfg.tag_scheme, dtype=np.float32,
        char_table=char_table, word_table=word_table,
    )
    train_sents = prepare_corpus(corpus, trie, model.tagset, cfg.variant)
    dev_sents = prepare_corpus(dev, trie, model.tagset, cfg.variant) if dev else None
    train(
        model, train_sents, cfg,
        dev_sents=dev_sents, dev_corpus=dev,
        checkpoint_dir=cfg.checkpoint_dir or None,
        log=print,
    )
    return 0


def _cmd_eval(args) -> int:
    gold = load_corpus(args.gold)
    pred = load_corpus(args.pred)
    report = evaluate([s.tags for s in pred.sentences], gold)
    print(report.format())
    return 0


def _read_prediction_input(path: str) -> list[list[str]]:
    """Corpus-format input; tags optional and ignored."""
    sentences: list[list[str]] = []
    chars: list[str] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if not raw.strip():
            if chars:
                sentences.append(chars)
                chars = []
            continue
        chars.append(raw.split("\t", 1)[0])
    if chars:
        sentences.append(chars)
    return sentences


def _cmd_predict(args) -> int:
    model = ModelParams.load(args.checkpoint)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else model.word_table.tokens
    trie = build_trie(lexicon)
    sentences = _read_prediction_input(args.input)
    out = _open_out(args.out)
    try:
        for chars in sentences:
            sent = prepare_sentence(chars, trie)
            tags = model_mod.decode_tags(model, sent)
            for c, t in zip(chars, tags):
                out.write(f"{c}\t{t}\n")
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_gradcheck(args) -> int:
    cfg = TrainConfig.from_file(args.config, overrides={"seed": args.seed})
    corpus, lexicon = make_overfit_corpus(seed=13)
    trie = build_trie(lexicon)
    tagset = make_tagset(corpus.entity_types(), corpus.scheme)
    # pick a sentence with a healthy word set
    sent_src = max(corpus.sentences, key=lambda s: len(match_sentence(trie, s.chars)[0]))
    report = None
    for attempt in range(8):  # re-seed if a relu input sits on its kink
        rng = np.random.default_rng(cfg.seed + attempt)
        model = ModelParams.build(
            cfg.dims(),
            sorted({c for s in corpus.sentences for c in s.chars}),
            trie.words,
            corpus.entity_types(),
            rng,
            dtype=np.float64,
        )
        sent = prepare_sentence(sent_src.chars, trie, tagset, sent_src.tags)
        try:
            report = grad_check(model, sent, lam=0.3)
            break
        except NumericError as exc:
            if "kink" not in str(exc) and "relu" not in str(exc):
                raise
    if report is None:
        raise NumericError("could not find a kink-free configuration")
    print(report.format())
    if not report.ok:
        w = report.worst
        print(
            f"gradient mismatch in tensor {w.tensor} at index {list(w.index)}",
            file=sys.stderr,
        )
        return 3
    return 0


def _cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    trie = build_trie(load_lexicon(args.lexicon))
    print(corpus_stats(corpus, trie).format())
    return 0


_COMMANDS = {
    "match": _cmd_match,
    "graph": _cmd_graph,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "predict": _cmd_predict,
    "gradcheck": _cmd_gradcheck,
    "stats": _cmd_stats,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (CorpusError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
