"""Command-line orchestration of the full pipeline.

Subcommands cover each stage (ingest, stats, merge, pairs, pca-fit,
pca-transform, train-lr, train-fewshot, predict, ensemble, evaluate) plus
``pipeline``, which runs the three-branch wiring end to end from a config
file and reports macro F1 on the validation split.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import corpus, embedstore, ensemble, fewshot, glmnet, metrics, pairgen, pca
from .config import Config
from .errors import SubjPipeError


def atomic_write(path: str | Path, data: bytes | str) -> None:
    """Write via a temp file + rename so interrupted runs never leave halves."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_dataset(path: str, split=corpus.Split.TRAIN, language="en", name=None) -> corpus.LabeledDataset:
    raw = Path(path).read_bytes()
    return corpus.parse_dataset(raw, language=language, split=split, name=name or Path(path).stem)


def _load_embeddings(path: str) -> embedstore.EmbeddingMatrix:
    return embedstore.read_embeddings(Path(path).read_bytes())


def _predictions_from_model(
    model: glmnet.ElasticNetLogistic,
    features: np.ndarray,
    ids: list[str],
    name: str,
) -> ensemble.PredictionSet:
    proba = model.predict_proba(features)
    labels = model.predict_labels(features)
    return ensemble.PredictionSet(
        model_name=name,
        predictions=dict(zip(ids, labels)),
        probabilities={sid: float(p) for sid, p in zip(ids, proba)},
    )


def cmd_ingest(args) -> None:
    ds = _load_dataset(args.input, split=corpus.Split[args.split.upper()], language=args.language, name=args.name)
    atomic_write(args.out, corpus.serialize_dataset(ds))
    print(f"ingest: {len(ds)} sentences -> {args.out}")


def cmd_stats(args) -> None:
    ds = _load_dataset(args.input)
    st = corpus.dataset_stats(ds)
    for label in corpus.Label:
        print(f"{label.value.lower()}_count = {st.count_per_class[label]}")
        print(f"{label.value.lower()}_fraction = {st.class_fraction[label]:.6f}")
    print(f"mean_word_count = {st.mean_word_count:.6f}")
    print(f"word_count_p90 = {st.word_count_quantile(0.9)}")


def cmd_merge(args) -> None:
    parts = [_load_dataset(p) for p in args.input]
    exclusion = _load_dataset(args.exclude) if args.exclude else None
    merged = corpus.merge_datasets(parts, exclusion, name=args.name)
    atomic_write(args.out, corpus.serialize_dataset(merged))
    print(f"merge: {len(merged)} sentences -> {args.out}")


def cmd_pairs(args) -> None:
    ds = _load_dataset(args.dataset)
    m = _load_embeddings(args.embeddings)
    cfg = pairgen.PairGenConfig(n_per_class=args.n, similarity_weight=args.similarity_weight, seed=args.seed)
    pairs = pairgen.generate_pairs(ds, m, cfg)
    atomic_write(args.out, pairgen.write_pairs(pairs))
    print(f"pairs: {len(pairs)} pairs -> {args.out}")


def cmd_pca_fit(args) -> None:
    m = _load_embeddings(args.embeddings)
    if args.dataset:
        m = embedstore.subset(m, _load_dataset(args.dataset).ids)
    model = pca.PcaReducer(n_components=args.k).fit(m.rows.astype(np.float64))
    atomic_write(args.out, pca.save_pca(model))
    print(f"pca-fit: k={args.k} explained_variance_ratio={model.explained_variance_ratio():.6f} -> {args.out}")


def cmd_pca_transform(args) -> None:
    model = pca.load_pca(Path(args.model).read_bytes())
    m = _load_embeddings(args.embeddings)
    reduced = model.transform_embeddings(m)
    atomic_write(args.out, embedstore.write_embeddings(reduced))
    print(f"pca-transform: {len(reduced)}x{reduced.dim} -> {args.out}")


def _train_config(args, seed: int) -> glmnet.TrainConfig:
    mode = glmnet.ClassWeightMode.BALANCED if args.class_weight == "balanced" else glmnet.ClassWeightMode.NONE
    return glmnet.TrainConfig(
        c=args.c,
        l1_ratio=args.l1_ratio,
        class_weight_mode=mode,
        max_epochs=args.max_epochs,
        tolerance=args.tolerance,
        seed=seed,
    )


def cmd_train_lr(args) -> None:
    ds = _load_dataset(args.dataset)
    m = _load_embeddings(args.embeddings)
    features = embedstore.aligned_rows(ds, m)
    if args.pca:
        features = pca.load_pca(Path(args.pca).read_bytes()).transform(features)
    model = glmnet.fit_saga(features, [s.label for s in ds], _train_config(args, args.seed))
    atomic_write(args.out, glmnet.save_model(model))
    status = "converged" if model.converged_ else f"NOT converged after {model.n_epochs_} epochs"
    print(f"train-lr: {status} -> {args.out}")


def cmd_train_fewshot(args) -> None:
    ds = _load_dataset(args.dataset)
    m = _load_embeddings(args.embeddings)
    cfg = fewshot.FewShotConfig(
        n_per_class=args.n,
        regime=fewshot.Regime[args.regime.upper()],
        adapter_epochs=args.adapter_epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
        head_config=_train_config(args, args.seed),
    )
    adapter, head = fewshot.train_fewshot(ds, m, cfg)
    atomic_write(args.out_adapter, fewshot.save_adapter(adapter))
    atomic_write(args.out_model, glmnet.save_model(head))
    print(
        f"train-fewshot: {cfg.regime.value} N={args.n} adapter_loss={adapter.final_loss:.6f}"
        f" -> {args.out_adapter}, {args.out_model}"
    )


def cmd_predict(args) -> None:
    ds = _load_dataset(args.dataset)
    m = _load_embeddings(args.embeddings)
    features = embedstore.aligned_rows(ds, m)
    if args.adapter:
        features = fewshot.adapter_forward(fewshot.load_adapter(Path(args.adapter).read_bytes()), features)
    if args.pca:
        features = pca.load_pca(Path(args.pca).read_bytes()).transform(features)
    model = glmnet.load_model(Path(args.model).read_bytes())
    ps = _predictions_from_model(model, features, ds.ids, args.name)
    atomic_write(args.out, ensemble.write_predictions(ps))
    print(f"predict: {len(ds)} predictions -> {args.out}")


def cmd_ensemble(args) -> None:
    voters = [
        ensemble.read_predictions(Path(p).read_bytes(), model_name=Path(p).stem) for p in args.input
    ]
    combined = ensemble.majority_vote(voters)
    atomic_write(args.out, ensemble.write_predictions(combined))
    print(f"ensemble: {len(voters)} voters -> {args.out}")


def cmd_evaluate(args) -> None:
    pred = ensemble.read_predictions(Path(args.predictions).read_bytes(), model_name="eval")
    gold = _load_dataset(args.gold)
    rep = metrics.report(metrics.confusion(pred, gold))
    if args.out:
        atomic_write(args.out, metrics.format_report_tsv(rep))
    print(f"macro_f1 = {rep.macro_f1:.6f}")


def cmd_pipeline(args) -> None:
    cfg = Config.from_text(Path(args.config).read_text())
    seed = args.seed if args.seed is not None else cfg.get_int("seed", 0)
    out_dir = Path(args.out or cfg.require("out"))

    train = _load_dataset(cfg.require("data.train"), split=corpus.Split.TRAIN)
    val = _load_dataset(cfg.require("data.val"), split=corpus.Split.VAL)
    m = _load_embeddings(cfg.require("embeddings.file"))

    train_features = embedstore.aligned_rows(train, m)
    val_features = embedstore.aligned_rows(val, m)
    train_labels = [s.label for s in train]

    head_cfg = glmnet.TrainConfig(
        c=cfg.get_float("lr.c", 0.5),
        l1_ratio=cfg.get_float("lr.l1_ratio", 0.5),
        class_weight_mode=(
            glmnet.ClassWeightMode.BALANCED
            if cfg.get("lr.class_weight", "balanced") == "balanced"
            else glmnet.ClassWeightMode.NONE
        ),
        max_epochs=cfg.get_int("lr.max_epochs", 1000),
        tolerance=cfg.get_float("lr.tolerance", 1e-6),
        seed=seed,
        standardize=cfg.get_bool("lr.standardize", False),
    )

    # branch 1: dimensionality reduction + elastic-net head
    reducer = pca.PcaReducer(n_components=cfg.get_int("pca.k", 110)).fit(train_features)
    atomic_write(out_dir / "pca.spca", pca.save_pca(reducer))
    lr_model = glmnet.fit_saga(reducer.transform(train_features), train_labels, head_cfg)
    atomic_write(out_dir / "lr.sglm", glmnet.save_model(lr_model))
    branch_lr = _predictions_from_model(
        lr_model, reducer.transform(val_features), val.ids, "pca_elasticnet"
    )
    atomic_write(out_dir / "branch_pca_lr.tsv", ensemble.write_predictions(branch_lr))

    # branch 2: dual-stage few-shot
    fs_cfg = fewshot.FewShotConfig(
        n_per_class=cfg.get_int("fewshot.n_per_class", 20),
        regime=fewshot.Regime[cfg.get("fewshot.regime", "dual_stage").upper()],
        adapter_epochs=cfg.get_int("fewshot.adapter_epochs", 50),
        learning_rate=cfg.get_float("fewshot.learning_rate", 1e-2),
        seed=seed,
        head_config=head_cfg,
    )
    adapter, fs_head = fewshot.train_fewshot(train, m, fs_cfg)
    atomic_write(out_dir / "adapter.sadp", fewshot.save_adapter(adapter))
    atomic_write(out_dir / "fewshot.sglm", glmnet.save_model(fs_head))
    branch_fs = _predictions_from_model(
        fs_head, fewshot.adapter_forward(adapter, val_features), val.ids, "fewshot"
    )
    atomic_write(out_dir / "branch_fewshot.tsv", ensemble.write_predictions(branch_fs))

    # branch 3: external prediction files (e.g. a transformer classifier)
    voters = [branch_lr, branch_fs]
    for path in cfg.get_list("ensemble.external"):
        voters.append(ensemble.read_predictions(Path(path).read_bytes(), model_name=Path(path).stem))

    combined = ensemble.majority_vote(voters)
    atomic_write(out_dir / "ensemble.tsv", ensemble.write_predictions(combined))

    rep = metrics.report(metrics.confusion(combined, val))
    atomic_write(out_dir / "report.tsv", metrics.format_report_tsv(rep))
    atomic_write(out_dir / "report.txt", metrics.format_report_text(rep))
    print(f"pipeline: {len(voters)} voters, macro_f1 = {rep.macro_f1:.6f} -> {out_dir}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subjpipe", description="Subjectivity classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a dataset TSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--language", default="en")
    p.add_argument("--split", default="train", choices=["train", "val", "test"])
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="print dataset statistics")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("merge", help="concatenate datasets with a leakage exclusion set")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--exclude", default=None)
    p.add_argument("--name", default="merged")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("pairs", help="generate contrastive training pairs")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--n", type=int, required=True, help="samples per class")
    p.add_argument("--similarity-weight", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("pca-fit", help="fit the dimensionality reducer")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--dataset", default=None, help="restrict fit rows to this dataset's ids")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pca_fit)

    p = sub.add_parser("pca-transform", help="reduce an embedding file")
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pca_transform)

    def add_train_opts(p):
        p.add_argument("--c", type=float, default=0.5)
        p.add_argument("--l1-ratio", type=float, default=0.5)
        p.add_argument("--class-weight", default="balanced", choices=["balanced", "none"])
        p.add_argument("--max-epochs", type=int, default=1000)
        p.add_argument("--tolerance", type=float, default=1e-6)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train-lr", help="train the elastic-net classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--pca", default=None)
    add_train_opts(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_lr)

    p = sub.add_parser("train-fewshot", help="dual- or single-stage few-shot training")
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--regime", default="dual_stage", choices=["single_stage", "dual_stage"])
    p.add_argument("--adapter-epochs", type=int, default=50)
    p.add_argument("--learning-rate", type=float, default=1e-2)
    add_train_opts(p)
    p.add_argument("--out-adapter", required=True)
    p.add_argument("--out-model", required=True)
    p.set_defaults(func=cmd_train_fewshot)

    p = sub.add_parser("predict", help="predict labels for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--adapter", default=None)
    p.add_argument("--pca", default=None)
    p.add_argument("--dataset", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--name", default="model")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("ensemble", help="majority-vote prediction files")
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("evaluate", help="score predictions against gold labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run the full three-branch pipeline from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--out", default=None, help="overrides the config output dir")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SubjPipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
