"""Command-line entry point.

Subcommands: gen, stats, train, eval, search, reason, clone, qa, caption,
viz. Every run is reproducible from (config, seed): no hidden state, and
repeated invocations with the same inputs write byte-identical files.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import os
import sys
import typing

import numpy as np

from . import datagen, evaluate, index as index_mod, training
from .autodiff import NonFiniteError
from .catalog import load_answer_catalog
from .checkpoint import (
    CheckpointError,
    checkpoint_fingerprint,
    load_checkpoint,
    save_checkpoint,
)
from .datagen import GenConfig
from .graph import (
    GraphParseError,
    GraphValidationError,
    NodeVocab,
    parse_graph,
    to_dot,
)
from .model import Model, ModelConfig
from .text import TextVocab, build_vocab, tokenize
from .training import TrainConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# config file handling

_MODEL_KEYS = {f.name for f in dataclasses.fields(ModelConfig)} - {
    "node_vocab_size", "text_vocab_size"}
_GEN_KEYS = {f.name for f in dataclasses.fields(GenConfig)}
_TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)}


def _coerce(raw: str, typ):
    if typ is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if typ is int:
        return int(raw)
    if typ is float:
        return float(raw)
    return raw


def load_config_file(path: str | None) -> dict[str, dict]:
    """INI-style key=value sections [gen], [model], [train]; unknown keys
    are rejected."""
    sections: dict[str, dict] = {"gen": {}, "model": {}, "train": {}}
    if path is None:
        return sections
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"config file not found: {path}")
    gen_hints = typing.get_type_hints(GenConfig)
    model_hints = typing.get_type_hints(ModelConfig)
    train_hints = typing.get_type_hints(TrainConfig)
    allowed = {"gen": (_GEN_KEYS, gen_hints), "model": (_MODEL_KEYS, model_hints),
               "train": (_TRAIN_KEYS, train_hints)}
    for section in parser.sections():
        if section not in allowed:
            raise ValueError(f"unknown config section [{section}]")
        keys, hints = allowed[section]
        for key, raw in parser.items(section):
            if key not in keys:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            if key == "ops":
                sections[section][key] = tuple(x.strip() for x in raw.split(",") if x.strip())
            else:
                sections[section][key] = _coerce(raw, hints[key])
    return sections


def _gen_config(args, file_cfg: dict) -> GenConfig:
    kwargs = dict(file_cfg["gen"])
    if args.seed is not None:
        kwargs["rng_seed"] = args.seed
    return GenConfig(**kwargs)


_ABLATION_FLAGS = ("no_mam", "no_cross_encoder", "no_shape", "no_edge",
                   "text_only", "arch_only")


def _apply_ablations(cfg: ModelConfig, args) -> ModelConfig:
    updates = {}
    for flag in _ABLATION_FLAGS:
        if getattr(args, flag, False):
            updates[flag] = True
    if getattr(args, "alpha", None) is not None:
        updates["alpha"] = args.alpha
    if getattr(args, "tau", None) is not None:
        updates["tau"] = args.tau
    return dataclasses.replace(cfg, **updates) if updates else cfg


# ---------------------------------------------------------------------------
# checkpoint bundles (directory with model.abkt + vocabularies + config)

CKPT_FILE = "model.abkt"
TEXT_VOCAB_FILE = "text_vocab.txt"
NODE_VOCAB_FILE = "node_vocab.txt"
CONFIG_FILE = "config.json"
LOG_FILE = "loss_log.jsonl"


def _bundle_dir(checkpoint: str) -> str:
    if os.path.isdir(checkpoint):
        return checkpoint
    return os.path.dirname(os.path.abspath(checkpoint))


def save_bundle(out_dir: str, model: Model, text_vocab: TextVocab,
                node_vocab: NodeVocab, log: list[dict]) -> str:
    os.makedirs(out_dir, exist_ok=True)
    ckpt_path = os.path.join(out_dir, CKPT_FILE)
    save_checkpoint(model.params, ckpt_path)
    text_vocab.save(os.path.join(out_dir, TEXT_VOCAB_FILE))
    node_vocab.save(os.path.join(out_dir, NODE_VOCAB_FILE))
    with open(os.path.join(out_dir, CONFIG_FILE), "w", encoding="utf-8") as f:
        json.dump(model.cfg.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    with open(os.path.join(out_dir, LOG_FILE), "w", encoding="utf-8") as f:
        for rec in log:
            f.write(json.dumps(rec) + "\n")
    return ckpt_path


def load_bundle(checkpoint: str) -> tuple[Model, TextVocab, NodeVocab, str]:
    bundle = _bundle_dir(checkpoint)
    ckpt_path = os.path.join(bundle, CKPT_FILE)
    for required in (ckpt_path, os.path.join(bundle, CONFIG_FILE)):
        if not os.path.exists(required):
            raise ValueError(f"checkpoint bundle incomplete: missing {required}")
    with open(os.path.join(bundle, CONFIG_FILE), encoding="utf-8") as f:
        cfg = ModelConfig(**json.load(f))
    text_vocab = TextVocab.load(os.path.join(bundle, TEXT_VOCAB_FILE))
    node_vocab = NodeVocab.load(os.path.join(bundle, NODE_VOCAB_FILE))
    model = Model.initialized(cfg, seed=0)
    from .model import set_params

    set_params(model.params, load_checkpoint(ckpt_path))
    return model, text_vocab, node_vocab, ckpt_path


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen(args) -> int:
    file_cfg = load_config_file(args.config)
    cfg = _gen_config(args, file_cfg)
    vocab = cfg.node_vocab()
    n = cfg.n_val_archs if args.split == "val" else cfg.n_train_archs
    task = "tvhf" if args.task == "tvhf-mine" else args.task
    if task == "autonet":
        samples = datagen.gen_autonet(cfg, n, args.split)
    elif task == "aqa":
        samples = datagen.gen_autonet_aqa(cfg, n, args.split)
    elif task == "acd":
        samples = datagen.gen_acd_dataset(cfg)
    elif task == "tvhf":
        samples = datagen.gen_tvhf(cfg)
    elif task == "bacd":
        samples = datagen.gen_bacd_dataset(cfg)
    else:
        raise UsageError(f"unknown gen task {args.task!r}")
    datagen.write_jsonl(samples, vocab, args.out)
    print(f"wrote {len(samples)} records to {args.out}")
    return 0


def _cmd_stats(args) -> int:
    stats = datagen.compute_stats(args.dataset)
    text = json.dumps(stats, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_train(args) -> int:
    file_cfg = load_config_file(args.config)
    gen_cfg = _gen_config(args, file_cfg)
    train_kwargs = dict(file_cfg["train"])
    train_kwargs["task"] = args.task
    if args.seed is not None:
        train_kwargs["seed"] = args.seed
    if args.epochs is not None:
        train_kwargs["epochs"] = args.epochs
    if args.lr is not None:
        train_kwargs["lr"] = args.lr
    if args.batch_size is not None:
        train_kwargs["batch_size"] = args.batch_size
    if args.alpha is not None:
        train_kwargs["alpha"] = args.alpha
    tcfg = TrainConfig(**train_kwargs)

    if args.checkpoint:
        model, text_vocab, node_vocab, _ = load_bundle(args.checkpoint)
        model.cfg = _apply_ablations(model.cfg, args)
    else:
        node_vocab = gen_cfg.node_vocab()
        if args.task == "aqa":
            samples_for_vocab = [s.question for s in datagen.load_aqa(args.dataset, node_vocab)]
        else:
            samples_for_vocab = [s.text for s in datagen.load_bimodal(args.dataset, node_vocab)]
        text_vocab = build_vocab(samples_for_vocab, max_size=args.vocab_size)
        model_kwargs = dict(file_cfg["model"])
        cfg = ModelConfig(node_vocab_size=len(node_vocab),
                          text_vocab_size=len(text_vocab), **model_kwargs)
        cfg = _apply_ablations(cfg, args)
        model = Model.initialized(cfg, seed=tcfg.seed)

    if args.task == "pretrain":
        samples = datagen.load_bimodal(args.dataset, node_vocab)
        log = training.pretrain(samples, model, tcfg, text_vocab)
    elif args.task == "aqa":
        aqa_samples = datagen.load_aqa(args.dataset, node_vocab)
        log = training.finetune_aqa(aqa_samples, model, tcfg, text_vocab)
    else:
        ac_samples = datagen.load_ac(args.dataset, node_vocab)
        log = training.finetune_ac(ac_samples, model, tcfg, text_vocab)

    ckpt_path = save_bundle(args.out, model, text_vocab, node_vocab, log)
    print(f"checkpoint written to {ckpt_path} ({len(log)} steps)")
    return 0


def _cmd_eval(args) -> int:
    if not args.checkpoint and not args.baseline:
        raise UsageError("--checkpoint is required (or pass --baseline)")
    tau = args.tau if args.tau is not None else 0.5
    result: dict = {"task": args.task}
    if args.baseline:
        result["model"] = "baseline"
        node_vocab = NodeVocab(list(_gen_config(args, load_config_file(args.config)).ops))
        if args.task == "ar":
            samples = datagen.load_bimodal(args.dataset, node_vocab)
            preds = [evaluate.ar_name_baseline(s.graph.name or "", s.text)
                     if s.graph.name else False for s in samples]
            labels = [s.y >= 0.5 for s in samples]
            metrics = evaluate.accuracy_f1(preds, labels)
        elif args.task == "acd":
            pairs = datagen.load_acd(args.dataset, node_vocab)
            preds = [evaluate.jaccard_similarity(p.g1, p.g2, node_vocab) > tau
                     for p in pairs]
            labels = [p.label == 1 for p in pairs]
            metrics = evaluate.accuracy_f1(preds, labels)
        else:
            raise UsageError(f"no baseline for task {args.task!r}")
        result.update(metrics.to_dict())
    else:
        model, text_vocab, node_vocab, _ = load_bundle(args.checkpoint)
        model.cfg = _apply_ablations(model.cfg, args)
        result["model"] = "archtext"
        if args.task == "ar":
            metrics = evaluate.run_ar(model, datagen.load_bimodal(args.dataset, node_vocab),
                                      tau, text_vocab)
            result.update(metrics.to_dict())
        elif args.task == "acd":
            metrics = evaluate.run_acd(model, datagen.load_acd(args.dataset, node_vocab), tau)
            result.update(metrics.to_dict())
        elif args.task == "bacd":
            metrics = evaluate.run_bacd(model, datagen.load_bacd(args.dataset, node_vocab),
                                        tau, text_vocab)
            result.update(metrics.to_dict())
        elif args.task == "aqa":
            metrics = evaluate.run_aqa(model, datagen.load_aqa(args.dataset, node_vocab),
                                       text_vocab)
            result.update(metrics.to_dict())
        elif args.task == "ac":
            rouge = evaluate.run_ac(model, datagen.load_ac(args.dataset, node_vocab),
                                    text_vocab, beam=args.beam)
            result.update(rouge.to_dict())
        else:
            raise UsageError(f"unknown eval task {args.task!r}")
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_search(args) -> int:
    model, text_vocab, node_vocab, ckpt_path = load_bundle(args.checkpoint)
    fingerprint = checkpoint_fingerprint(ckpt_path)
    if args.action == "build":
        samples = datagen.load_bimodal(args.dataset, node_vocab)
        graphs: list = []
        seen = set()
        for s in samples:
            gid = s.graph.name or f"arch{len(graphs):05d}"
            if gid in seen:
                continue
            seen.add(gid)
            graphs.append((gid, s.graph))
        idx = index_mod.build_index(model, graphs, fingerprint)
        index_mod.save_index(idx, args.out)
        print(f"indexed {len(idx.entries)} architectures into {args.out}")
        return 0
    idx = index_mod.load_index(args.index)
    hits = index_mod.search(idx, args.query, model, args.k, text_vocab, fingerprint)
    print(json.dumps([{"id": i, "score": s} for i, s in hits], indent=2))
    return 0


def _load_graph_file(path: str, node_vocab: NodeVocab):
    with open(path, encoding="utf-8") as f:
        return parse_graph(f.read(), node_vocab)


def _cmd_reason(args) -> int:
    model, text_vocab, node_vocab, _ = load_bundle(args.checkpoint)
    model.cfg = _apply_ablations(model.cfg, args)
    g = _load_graph_file(args.graph, node_vocab)
    from .model import cosine, encode_graph, encode_text

    fm = Model(cfg=model.cfg, params=model.params)
    seq = tokenize(args.text, text_vocab, fm.cfg.max_tokens)
    _, j_t = encode_text(seq, fm.params, fm.cfg)
    _, j_g = encode_graph(g, fm.params, fm.cfg)
    tau = args.tau if args.tau is not None else fm.cfg.tau
    score = cosine(j_t, j_g, fm.cfg.eps_cos).item()
    print(json.dumps({"score": score,
                      "verdict": "correct" if score > tau else "incorrect"}, indent=2))
    return 0


def _cmd_clone(args) -> int:
    model, text_vocab, node_vocab, _ = load_bundle(args.checkpoint)
    model.cfg = _apply_ablations(model.cfg, args)
    g1 = _load_graph_file(args.g1, node_vocab)
    g2 = _load_graph_file(args.g2, node_vocab)
    tau = args.tau if args.tau is not None else model.cfg.tau
    from .model import cosine, encode_graph

    _, j1 = encode_graph(g1, model.params, model.cfg)
    _, j2 = encode_graph(g2, model.params, model.cfg)
    if args.text:
        sample = datagen.BACDSample(g1=g1, g2=g2, label=0, text=args.text)
        score = evaluate.bacd_score(model, sample, text_vocab)
    else:
        score = cosine(j1, j2, model.cfg.eps_cos).item()
    print(json.dumps({"score": score,
                      "verdict": "similar" if score > tau else "dissimilar"}, indent=2))
    return 0


def _cmd_qa(args) -> int:
    model, text_vocab, node_vocab, _ = load_bundle(args.checkpoint)
    model.cfg = _apply_ablations(model.cfg, args)
    g = _load_graph_file(args.graph, node_vocab)
    from .model import aqa_logits, encode_graph, encode_text

    seq = tokenize(args.question, text_vocab, model.cfg.max_tokens)
    _, j_t = encode_text(seq, model.params, model.cfg)
    _, j_g = encode_graph(g, model.params, model.cfg)
    logits = aqa_logits(j_t, j_g, model.params).data[0]
    probs = 1.0 / (1.0 + np.exp(-logits))
    answers = load_answer_catalog()
    chosen = [i for i in range(len(answers)) if probs[i] > 0.5]
    if not chosen:
        chosen = [int(np.argmax(probs))]
    print(json.dumps({"answers": [{"id": i, "text": answers[i], "prob": float(probs[i])}
                                  for i in chosen]}, indent=2))
    return 0


def _cmd_caption(args) -> int:
    model, text_vocab, node_vocab, _ = load_bundle(args.checkpoint)
    model.cfg = _apply_ablations(model.cfg, args)
    g = _load_graph_file(args.graph, node_vocab)
    text = evaluate.caption_graph(model, g, text_vocab, beam=args.beam)
    print(json.dumps({"caption": text}, indent=2))
    return 0


def _cmd_viz(args) -> int:
    if args.kind == "dot":
        file_cfg = load_config_file(args.config)
        node_vocab = NodeVocab(list(_gen_config(args, file_cfg).ops))
        g = _load_graph_file(args.graph, node_vocab)
        dot = to_dot(g, node_vocab)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                f.write(dot)
        else:
            print(dot, end="")
        return 0
    # PCA of text and graph embeddings over a bi-modal dataset
    model, text_vocab, node_vocab, _ = load_bundle(args.checkpoint)
    model.cfg = _apply_ablations(model.cfg, args)
    from .model import encode_graph, encode_text

    samples = datagen.load_bimodal(args.dataset, node_vocab)
    labels, vectors = [], []
    seen_graphs = set()
    for i, s in enumerate(samples):
        seq = tokenize(s.text, text_vocab, model.cfg.max_tokens)
        _, j_t = encode_text(seq, model.params, model.cfg)
        labels.append(f"text:{i}:y={s.y:g}")
        vectors.append(j_t.data[0])
        gid = s.graph.name or f"arch{i}"
        if gid not in seen_graphs:
            seen_graphs.add(gid)
            _, j_g = encode_graph(s.graph, model.params, model.cfg)
            labels.append(f"arch:{gid}")
            vectors.append(j_g.data[0])
    coords = evaluate.pca_project(np.stack(vectors), k=2)
    lines = ["label,x,y"]
    for label, row in zip(labels, coords):
        x = row[0]
        y = row[1] if coords.shape[1] > 1 else 0.0
        lines.append(f"{label},{x:.8f},{y:.8f}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="INI config file (default: none)")
    p.add_argument("--seed", type=int, default=None, help="master RNG seed (default: config value)")
    p.add_argument("--tau", type=float, default=None, help="decision threshold (default 0.5)")
    p.add_argument("--alpha", type=float, default=None, help="masked-node loss weight (default 0.05)")
    for flag in _ABLATION_FLAGS:
        p.add_argument(f"--{flag.replace('_', '-')}", action="store_true",
                       dest=flag, help=f"ablation switch {flag} (default off)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="archtext",
                     description="architecture-language joint learning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a dataset")
    p.add_argument("--task", required=True,
                   choices=["autonet", "aqa", "acd", "tvhf", "tvhf-mine", "bacd"])
    p.add_argument("--out", required=True, help="output JSONL path")
    p.add_argument("--split", default="train", choices=["train", "val"],
                   help="which split size to use (default train)")
    _add_common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("dataset", help="JSONL dataset path")
    p.add_argument("--out", default=None, help="write JSON here (default: stdout)")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("train", help="train or fine-tune")
    p.add_argument("--task", required=True, choices=["pretrain", "aqa", "ac"])
    p.add_argument("--dataset", required=True, help="training JSONL")
    p.add_argument("--out", required=True, help="output checkpoint directory")
    p.add_argument("--checkpoint", default=None, help="initialize from this bundle (default: fresh init)")
    p.add_argument("--epochs", type=int, default=None, help="training epochs (default 10)")
    p.add_argument("--lr", type=float, default=None, help="Adam learning rate (default 2e-5)")
    p.add_argument("--batch-size", type=int, default=None, help="batch size (default 8)")
    p.add_argument("--vocab-size", type=int, default=4096,
                   help="max text vocabulary size when built fresh (default 4096)")
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="run a task over a dataset")
    p.add_argument("--task", required=True, choices=["ar", "acd", "bacd", "aqa", "ac"])
    p.add_argument("--dataset", required=True, help="evaluation JSONL")
    p.add_argument("--checkpoint", default=None, help="checkpoint bundle (default: none; required unless --baseline)")
    p.add_argument("--baseline", action="store_true",
                   help="use the uni-modal baseline instead of the model (default off)")
    p.add_argument("--beam", type=int, default=10, help="beam width for captioning (default 10)")
    p.add_argument("--out", default=None, help="write metrics JSON here (default: stdout)")
    _add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("search", help="build or query the retrieval index")
    p.add_argument("action", choices=["build", "query"])
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", default=None, help="bi-modal JSONL for build (default: none)")
    p.add_argument("--index", default=None, help="index file for query (default: none)")
    p.add_argument("--out", default=None, help="index output path for build (default: none)")
    p.add_argument("--query", default=None, help="text query (default: none)")
    p.add_argument("--k", type=int, default=5, help="results to return (default 5)")
    _add_common(p)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("reason", help="score one statement against one graph")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--text", required=True, help="statement")
    _add_common(p)
    p.set_defaults(func=_cmd_reason)

    p = sub.add_parser("clone", help="compare two graphs")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--g1", required=True, help="first graph JSON file")
    p.add_argument("--g2", required=True, help="second graph JSON file")
    p.add_argument("--text", default=None, help="optional supporting text (default: none)")
    _add_common(p)
    p.set_defaults(func=_cmd_clone)

    p = sub.add_parser("qa", help="answer one question about one graph")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--question", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_qa)

    p = sub.add_parser("caption", help="generate a caption for one graph")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--beam", type=int, default=10, help="beam width (default 10)")
    _add_common(p)
    p.set_defaults(func=_cmd_caption)

    p = sub.add_parser("viz", help="export PCA CSV or DOT text")
    p.add_argument("kind", choices=["pca", "dot"])
    p.add_argument("--checkpoint", default=None, help="checkpoint bundle for pca (default: none)")
    p.add_argument("--dataset", default=None, help="bi-modal JSONL for pca (default: none)")
    p.add_argument("--graph", default=None, help="graph JSON file for dot (default: none)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    _add_common(p)
    p.set_defaults(func=_cmd_viz)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    try:
        _validate_args(args)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, FileNotFoundError, GraphParseError,
            GraphValidationError, CheckpointError, index_mod.IndexError_) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NonFiniteError as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {e}", file=sys.stderr)
        return 3


def _validate_args(args) -> None:
    if args.command == "eval" and not args.baseline and not args.checkpoint:
        raise UsageError("--checkpoint is required for model evaluation")
    if args.command == "search":
        if args.action == "build" and (not args.dataset or not args.out):
            raise UsageError("search build requires --dataset and --out")
        if args.action == "query" and (not args.index or args.query is None):
            raise UsageError("search query requires --index and --query")
    if args.command == "viz":
        if args.kind == "pca" and (not args.checkpoint or not args.dataset):
            raise UsageError("viz pca requires --checkpoint and --dataset")
        if args.kind == "dot" and not args.graph:
            raise UsageError("viz dot requires --graph")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
