"""JSON persistence for fitted classifiers and CSV output for gate trajectories."""

import csv
import json

import numpy as np

from .data import NormalizationStats
from .errors import DataFormatError
from .model import TSKModel
from .pipeline import FittedClassifier
from .rulebase import FuzzyPartition, IndexMatrix

MODEL_FORMAT = "adatsk-model"
MODEL_VERSION = 1


def model_to_dict(clf):
    m = clf.model
    sel = clf.selected_features
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "tnorm": m.tnorm,
        "softmin_q": int(m.softmin_q),
        "n_classes": int(clf.n_classes),
        "label_names": list(clf.label_names),
        "feature_names": list(clf.feature_names),
        "selected_features": [int(i) for i in sel],
        "selected_feature_names": [clf.feature_names[i] for i in sel],
        "normalization": clf.stats.to_dict(),
        "partition": {"centers": m.partition.centers.tolist(), "spread": 1.0},
        "index_matrix": {"kind": m.index.kind, "n_sets": int(m.index.n_sets),
                         "rows": m.index.rows.tolist()},
        "consequents": m.consequents.tolist(),
    }


def model_from_dict(d):
    if d.get("format") != MODEL_FORMAT:
        raise DataFormatError(f"not an {MODEL_FORMAT} file (format={d.get('format')!r})")
    if d.get("version") != MODEL_VERSION:
        raise DataFormatError(f"unsupported model version {d.get('version')!r}")
    rows = np.asarray(d["index_matrix"]["rows"], dtype=int)
    index = IndexMatrix(rows, d["index_matrix"]["kind"], int(d["index_matrix"]["n_sets"]))
    partition = FuzzyPartition(np.asarray(d["partition"]["centers"], dtype=float))
    p = np.asarray(d["consequents"], dtype=float)
    model = TSKModel(partition, index, p, d["tnorm"], int(d["softmin_q"]),
                     np.asarray(d["selected_features"], dtype=int))
    return FittedClassifier(model, NormalizationStats.from_dict(d["normalization"]),
                            int(d["n_classes"]), list(d["feature_names"]), list(d["label_names"]))


def save_model(clf, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(clf), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_gate_history(history, names, path):
    """One row per iteration: ``iteration, gate_<name>...`` with the gate values after each update."""
    history = np.asarray(history, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration"] + list(names))
        for k, row in enumerate(history, start=1):
            w.writerow([k] + [repr(float(v)) for v in row])


def read_gate_history(path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row[1:]] for row in r]
    return header[1:], np.array(data).reshape(len(data), len(header) - 1)
