"""Toy-scale trainer: AdamW + one-cycle schedule, AUC/ACC metrics, CLI.

Multilabel-binary tasks use binary cross-entropy with logits; everything
else uses cross-entropy.  A fixed seed makes runs reproducible on one
device.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np
import torch
import torch.nn as nn
from sklearn.metrics import roc_auc_score
from torch.utils.data import DataLoader, TensorDataset

from .config import NetConfig, layers_from_variance
from .data import ArchiveData, load_decomposed, normalize_tensors, per_class_mean_intensity
from .model import build_model, parameter_count

WEIGHT_DECAY = 1e-5
LEARNING_RATE = 1e-3


def select_loss(task: str) -> nn.Module:
    if task == "multilabel-binary":
        return nn.BCEWithLogitsLoss()
    return nn.CrossEntropyLoss()


def compute_metrics(logits: np.ndarray, labels: np.ndarray, task: str) -> dict:
    """AUC and ACC; AUC columns without both label values are skipped."""
    if task == "multilabel-binary":
        probs = 1.0 / (1.0 + np.exp(-logits))
        acc = float(((probs > 0.5) == (labels > 0.5)).mean())
        aucs = [
            roc_auc_score(labels[:, j], probs[:, j])
            for j in range(labels.shape[1])
            if len(np.unique(labels[:, j])) == 2
        ]
        auc = float(np.mean(aucs)) if aucs else float("nan")
        return {"auc": auc, "acc": acc}
    acc = float((logits.argmax(axis=1) == labels).mean())
    probs = np.exp(logits - logits.max(axis=1, keepdims=True))
    probs /= probs.sum(axis=1, keepdims=True)
    present = np.unique(labels)
    if len(present) < 2:
        auc = float("nan")
    elif logits.shape[1] == 2:
        auc = float(roc_auc_score(labels, probs[:, 1]))
    else:
        auc = float(
            roc_auc_score(labels, probs[:, present], multi_class="ovr",
                          average="macro", labels=present)
        )
    return {"auc": auc, "acc": acc}


def _loader(data: ArchiveData, indices, batch_size: int, shuffle: bool, seed: int):
    x = torch.from_numpy(normalize_tensors(data.tensors[indices]))
    y = torch.from_numpy(data.labels[indices])
    gen = torch.Generator().manual_seed(seed)
    return DataLoader(
        TensorDataset(x, y), batch_size=batch_size, shuffle=shuffle, generator=gen
    )


@torch.no_grad()
def evaluate(model: nn.Module, loader: DataLoader, task: str) -> dict:
    model.eval()
    logit_chunks, label_chunks = [], []
    for x, y in loader:
        logit_chunks.append(model(x).numpy())
        label_chunks.append(y.numpy())
    return compute_metrics(np.concatenate(logit_chunks), np.concatenate(label_chunks), task)


def train(
    config: NetConfig,
    data: ArchiveData,
    epochs: int = 10,
    batch_size: int = 32,
    seed: int = 0,
    eval_fraction: float = 0.25,
    max_steps: int | None = None,
    log=None,
) -> dict:
    """Train on the archive; returns per-epoch metrics and the final model."""
    if config.task != data.task or config.num_classes != data.num_classes:
        raise ValueError(
            f"config task/classes ({config.task}/{config.num_classes}) do not match "
            f"archive ({data.task}/{data.num_classes})"
        )
    torch.manual_seed(seed)
    np.random.seed(seed)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(data))
    n_eval = max(1, int(len(data) * eval_fraction)) if eval_fraction > 0 else 0
    eval_idx, train_idx = order[:n_eval], order[n_eval:]
    if n_eval == 0:
        eval_idx = train_idx
    train_loader = _loader(data, train_idx, batch_size, shuffle=True, seed=seed)
    eval_loader = _loader(data, eval_idx, batch_size, shuffle=False, seed=seed)

    model = build_model(config)
    loss_fn = select_loss(config.task)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=LEARNING_RATE, weight_decay=WEIGHT_DECAY
    )
    steps_per_epoch = max(1, len(train_loader))
    total_steps = max_steps if max_steps else epochs * steps_per_epoch
    scheduler = torch.optim.lr_scheduler.OneCycleLR(
        optimizer, max_lr=LEARNING_RATE, total_steps=total_steps
    )

    history = []
    step = 0
    started = time.time()
    for epoch in range(epochs):
        model.train()
        epoch_loss, batches = 0.0, 0
        for x, y in train_loader:
            optimizer.zero_grad()
            loss = loss_fn(model(x), y)
            loss.backward()
            optimizer.step()
            if step + 1 < total_steps:
                scheduler.step()
            epoch_loss += float(loss.detach())
            batches += 1
            step += 1
            if max_steps and step >= max_steps:
                break
        entry = {
            "epoch": epoch + 1,
            "loss": epoch_loss / max(batches, 1),
            "train": evaluate(model, train_loader, config.task),
            "eval": evaluate(model, eval_loader, config.task),
        }
        history.append(entry)
        if log:
            log(
                f"epoch {entry['epoch']}: loss={entry['loss']:.4f} "
                f"train acc={entry['train']['acc']:.3f} eval auc={entry['eval']['auc']:.3f}"
            )
        if max_steps and step >= max_steps:
            break
    return {
        "parameters": parameter_count(model),
        "steps": step,
        "elapsed_s": time.time() - started,
        "history": history,
        "final": history[-1] if history else {},
        "model": model,
    }


def config_from_archive(
    data: ArchiveData,
    hidden_channels: int | None = None,
    heads: int = 4,
    groups: int | None = None,
    layers: int | None = None,
) -> NetConfig:
    """Sensible defaults: channel/group conventions plus the variance rule."""
    d = data.spatial_dims
    C = hidden_channels if hidden_channels else (72 if d == 2 else 64)
    if groups is None:
        # 18 channels = three channel-pair decompositions of a color image
        groups = 3 if (d == 2 and data.tensors.shape[1] >= 18) else 1
    if layers is None:
        if data.task == "multiclass":
            layers = layers_from_variance(per_class_mean_intensity(data), d)
        else:
            layers = 5
    return NetConfig(
        in_channels=data.tensors.shape[1],
        num_classes=data.num_classes,
        hidden_channels=C,
        heads=heads,
        groups=groups,
        layers=layers,
        spatial_dims=d,
        task=data.task,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="decompnet", description="Train the decomposed-tensor classifier."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("train", help="train on a decomposed archive")
    p.add_argument("--archive", required=True, help="NPZ with decomposed/labels")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layers", type=int, help="override the variance rule")
    p.add_argument("--hidden-channels", type=int)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--groups", type=int)
    p.add_argument("--eval-fraction", type=float, default=0.25)
    p.add_argument("--metrics", help="write metrics JSON here (default stdout)")

    args = parser.parse_args(argv)
    try:
        data = load_decomposed(args.archive)
        config = config_from_archive(
            data, args.hidden_channels, args.heads, args.groups, args.layers
        )
        result = train(
            config, data, epochs=args.epochs, batch_size=args.batch_size,
            seed=args.seed, eval_fraction=args.eval_fraction,
            log=lambda msg: print(msg, file=sys.stderr),
        )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result.pop("model")
    text = json.dumps(result, indent=1, sort_keys=True)
    if args.metrics:
        with open(args.metrics, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
