"""JSON persistence for every fitted model type.

Each payload carries a ``model`` tag, the fitting hyperparameters, the
feature names seen at fit time, and the learned structure: trees as nested
split/leaf objects, networks as row-major weight matrices with their input
standardisation.  Stacked models embed their base models whole.  Dumps are
key-sorted, so identical models serialise to identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import numpy as np

from .adaboost import AdaBoostMode, AdaBoostModel, Stump
from .boosting import GradientBoostModel
from .forest import RandomForestModel
from .neural import ActivationKind, MLPModel
from .stacking import LearnerSpec, StackedModel, _MeanLearner
from .tree import Leaf, RegressionTree, Split, TreeNode

AnyModel = Union[RegressionTree, RandomForestModel, GradientBoostModel,
                 AdaBoostModel, StackedModel, MLPModel]


def _node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"kind": "leaf", "value": node.value}
    return {"kind": "split", "feature": node.feature, "threshold": node.threshold,
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(d: dict) -> TreeNode:
    if d["kind"] == "leaf":
        return Leaf(value=float(d["value"]))
    return Split(feature=int(d["feature"]), threshold=float(d["threshold"]),
                 left=_node_from_dict(d["left"]), right=_node_from_dict(d["right"]))


def _names(model) -> Any:
    return list(model.feature_names) if model.feature_names is not None else None


def model_to_dict(model: AnyModel) -> dict:
    if isinstance(model, RegressionTree):
        return {"model": "regression_tree", "min_leaf_size": model.min_leaf_size,
                "n_features": model.n_features, "feature_names": _names(model),
                "root": _node_to_dict(model.root)}
    if isinstance(model, RandomForestModel):
        return {"model": "random_forest", "seed": model.bootstrap_seed,
                "mtry": model.mtry, "min_leaf_size": model.min_leaf_size,
                "oob_error": model.oob_error, "n_features": model.n_features,
                "feature_names": _names(model),
                "trees": [_node_to_dict(t.root) for t in model.trees]}
    if isinstance(model, GradientBoostModel):
        return {"model": "gradient_boost", "init_value": model.init_value,
                "learning_rate": model.learning_rate,
                "min_leaf_size": model.min_leaf_size, "n_features": model.n_features,
                "feature_names": _names(model),
                "trees": [_node_to_dict(t.root) for t in model.trees]}
    if isinstance(model, AdaBoostModel):
        if model.mode is AdaBoostMode.BINARY_CLASSIFIER:
            learners = [{"feature": s.feature, "threshold": s.threshold,
                         "polarity": s.polarity} for s in model.weak_learners]
        else:
            learners = [_node_to_dict(t.root) for t in model.weak_learners]
        return {"model": "adaboost", "mode": model.mode.value,
                "alphas": list(model.alphas), "round_errors": model.round_errors,
                "n_features": model.n_features, "feature_names": _names(model),
                "learners": learners}
    if isinstance(model, StackedModel):
        return {"model": "stacked", "weights": [float(w) for w in model.weights],
                "specs": [{"kind": s.kind, "name": s.name, "params": s.params}
                          for s in model.specs],
                "n_features": model.n_features, "feature_names": _names(model),
                "base_models": [model_to_dict(m) for m in model.final_base_learners]}
    if isinstance(model, _MeanLearner):
        return {"model": "constant", "value": model.value}
    if isinstance(model, MLPModel):
        return {"model": "mlp", "layer_sizes": list(model.layer_sizes),
                "hidden_activation": model.hidden_activation.value,
                "output_activation": model.output_activation.value,
                "weights": [w.tolist() for w in model.weights],
                "biases": [b.tolist() for b in model.biases],
                "x_mean": model.x_mean.tolist(), "x_std": model.x_std.tolist(),
                "feature_names": _names(model)}
    raise TypeError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(d: dict) -> AnyModel:
    kind = d.get("model")
    names = tuple(d["feature_names"]) if d.get("feature_names") is not None else None
    if kind == "regression_tree":
        return RegressionTree(root=_node_from_dict(d["root"]),
                              min_leaf_size=int(d["min_leaf_size"]),
                              n_features=int(d["n_features"]), feature_names=names)
    if kind == "random_forest":
        trees = [RegressionTree(root=_node_from_dict(n),
                                min_leaf_size=int(d["min_leaf_size"]),
                                n_features=int(d["n_features"]), feature_names=names)
                 for n in d["trees"]]
        return RandomForestModel(trees=trees, mtry=int(d["mtry"]),
                                 min_leaf_size=int(d["min_leaf_size"]),
                                 bootstrap_seed=int(d["seed"]),
                                 oob_error=d["oob_error"],
                                 n_features=int(d["n_features"]), feature_names=names)
    if kind == "gradient_boost":
        trees = [RegressionTree(root=_node_from_dict(n),
                                min_leaf_size=int(d["min_leaf_size"]),
                                n_features=int(d["n_features"]), feature_names=names)
                 for n in d["trees"]]
        return GradientBoostModel(init_value=float(d["init_value"]), trees=trees,
                                  learning_rate=float(d["learning_rate"]),
                                  min_leaf_size=int(d["min_leaf_size"]),
                                  n_features=int(d["n_features"]), feature_names=names)
    if kind == "adaboost":
        mode = AdaBoostMode(d["mode"])
        if mode is AdaBoostMode.BINARY_CLASSIFIER:
            learners = [Stump(int(s["feature"]), float(s["threshold"]), int(s["polarity"]))
                        for s in d["learners"]]
        else:
            learners = [RegressionTree(root=_node_from_dict(n), min_leaf_size=1,
                                       n_features=int(d["n_features"]),
                                       feature_names=names)
                        for n in d["learners"]]
        return AdaBoostModel(weak_learners=learners,
                             alphas=[float(a) for a in d["alphas"]], mode=mode,
                             n_features=int(d["n_features"]), feature_names=names,
                             round_errors=d.get("round_errors"))
    if kind == "stacked":
        specs = tuple(LearnerSpec(kind=s["kind"], params=dict(s["params"]),
                                  name=s.get("name")) for s in d["specs"])
        return StackedModel(
            final_base_learners=[model_from_dict(m) for m in d["base_models"]],
            weights=np.asarray(d["weights"], dtype=float), specs=specs,
            n_features=int(d["n_features"]), feature_names=names)
    if kind == "constant":
        return _MeanLearner(float(d["value"]))
    if kind == "mlp":
        return MLPModel(layer_sizes=tuple(int(s) for s in d["layer_sizes"]),
                        weights=[np.asarray(w, dtype=float) for w in d["weights"]],
                        biases=[np.asarray(b, dtype=float) for b in d["biases"]],
                        hidden_activation=ActivationKind(d["hidden_activation"]),
                        output_activation=ActivationKind(d["output_activation"]),
                        x_mean=np.asarray(d["x_mean"], dtype=float),
                        x_std=np.asarray(d["x_std"], dtype=float),
                        feature_names=names)
    raise ValueError(f"unknown model tag {kind!r}")


def save_model(model: AnyModel, path: Union[str, Path]) -> None:
    payload = json.dumps(model_to_dict(model), sort_keys=True, indent=1)
    Path(path).write_text(payload + "\n")


def load_model(path: Union[str, Path]) -> AnyModel:
    return model_from_dict(json.loads(Path(path).read_text()))
