"""Versioned JSON model file holding the classifier chain and the gamma model."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classifiers import (ClassifierChain, ClassifierConfig, LogisticRegressionGD,
                          Standardizer)
from .gamma import GammaModel

FORMAT = "ecorev-model"
VERSION = 1


class ModelFileError(ValueError):
    pass


def _arr(a):
    return np.asarray(a, dtype=float).tolist()


def chain_to_dict(chain: ClassifierChain) -> dict:
    models = []
    for m in chain.models:
        if not isinstance(m, LogisticRegressionGD):
            raise ModelFileError(f"cannot serialise classifier of type {type(m).__name__}")
        models.append(m.get_params())
    return {
        "checkpoints": list(chain.checkpoints),
        "config": vars(chain.config),
        "models": models,
        "standardizers": [{"mean": _arr(s.mean), "scale": _arr(s.scale)}
                          for s in chain.standardizers],
    }


def chain_from_dict(d) -> ClassifierChain:
    config = ClassifierConfig(**d["config"])
    hyper = dict(learning_rate=config.learning_rate, n_iter=config.n_iter, l2=config.l2)
    return ClassifierChain(
        tuple(int(c) for c in d["checkpoints"]),
        [LogisticRegressionGD.from_params(p, **hyper) for p in d["models"]],
        [Standardizer(np.asarray(s["mean"]), np.asarray(s["scale"])) for s in d["standardizers"]],
        config,
    )


def gamma_to_dict(model: GammaModel) -> dict:
    return {
        "K": model.K,
        "smoothing": model.smoothing,
        "T": model.T,
        "partition": [_arr(e) for e in model.edges],
        "transitions": [_arr(m) for m in model.transitions],
        "prior": [_arr(p) for p in model.prior],
        "confusion": [_arr(c) for c in model.confusion],
        "change": [_arr(c) for c in model.change],
    }


def gamma_from_dict(d, chain: ClassifierChain) -> GammaModel:
    n = len(chain.checkpoints)

    def shaped(a, shape):
        out = np.asarray(a, dtype=float)
        return out.reshape(shape) if out.size == 0 else out

    edges = [np.asarray(e, dtype=float) for e in d["partition"]]
    sizes = [len(e) + 1 for e in edges]
    return GammaModel(
        chain=chain, K=int(d["K"]), smoothing=float(d["smoothing"]), T=int(d["T"]),
        edges=edges,
        transitions=[np.asarray(m, dtype=float) for m in d["transitions"]],
        prior=[np.asarray(p, dtype=float) for p in d["prior"]],
        confusion=[np.asarray(c, dtype=float) for c in d["confusion"]],
        change=[shaped(c, (sizes[j], 2, n - 1 - j, 2)) for j, c in enumerate(d["change"])],
    )


def dumps_model(model: GammaModel, extra: dict | None = None) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "chain": chain_to_dict(model.chain),
        "gamma": gamma_to_dict(model),
        "extra": extra or {},
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def save_model(path, model: GammaModel, extra: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps_model(model, extra))
    return path


def load_model(path) -> tuple[GammaModel, dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"{path}: unreadable model file ({exc})") from None
    if doc.get("format") != FORMAT:
        raise ModelFileError(f"{path}: not an {FORMAT} file")
    if doc.get("version") != VERSION:
        raise ModelFileError(f"{path}: unsupported version {doc.get('version')}")
    chain = chain_from_dict(doc["chain"])
    return gamma_from_dict(doc["gamma"], chain), doc.get("extra", {})
