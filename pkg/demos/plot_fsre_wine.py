"""
Feature selection and rule extraction on Wine
=============================================

The three training phases on a single stratified split of the bundled Wine
data, followed by a look at what each phase produced.
"""

import numpy as np

from adatsk.data import kfold_split, load_bundled
from adatsk.pipeline import run_pipeline
from adatsk.training import TrainConfig

ds = load_bundled("wine")
fold = kfold_split(ds.labels, 5, seed=0)
train, test = np.flatnonzero(fold != 0), np.flatnonzero(fold == 0)

##############################################################################
# A learning rate of 0.1 converges within the default 1000 steps per phase;
# 0.01 needs many more.

cfg = TrainConfig(eta=0.1, seed=0)
clf = run_pipeline(ds, cfg, train_rows=train)
fs, re, ft = clf.phases

##############################################################################
# Phase (i): one gate per feature on a ten-set compact rule base.

order = np.argsort(-np.abs(fs.gate_values))
for d in order:
    mark = "*" if d in fs.selected else " "
    print(f"{mark} {ds.feature_names[d]:30s} |M| = {abs(fs.gate_values[d]):.3f}")
print(f"threshold {fs.threshold:.3f}: {fs.selected.size} of {ds.n_features} features kept")

##############################################################################
# Phase (ii): one gate per rule on the enhanced rule base over the kept
# features, then phase (iii) fine-tunes the surviving rules without gates.

print(f"{re.model.n_rules} candidate rules, {re.retained.size} retained")
for ph in clf.phases:
    print(f"{ph.name:18s} loss {ph.losses[0]:.4f} -> {ph.losses[-1]:.4f} in {ph.seconds:.1f}s")

##############################################################################
# Test accuracy, and the same system fine-tuned by least squares instead.

print("test accuracy (GD):", clf.accuracy(ds.features[test], ds.labels[test]))
lse = run_pipeline(ds, TrainConfig(eta=0.1, fine_tune_mode="LSE"), train_rows=train)
print("test accuracy (LSE):", lse.accuracy(ds.features[test], ds.labels[test]))
