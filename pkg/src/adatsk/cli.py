"""Command-line front end.

Usage::

    adatsk fsre --config run.cfg [--seed N] [--out DIR]
    adatsk compare-tnorms --config run.cfg [--seed N] [--out DIR]
    adatsk gate-demo --config run.cfg [--seed N] [--out DIR]
    adatsk predict --model DIR/model.json --input data.csv [--out DIR]

Config files are flat ``key = value`` lines (``#`` starts a comment).
Relative paths are resolved against the config file's directory, and
``dataset = bundled:iris`` / ``bundled:wine`` selects a bundled dataset.

Exit codes: 0 success, 1 internal error, 2 usage or I/O error.
"""

import argparse
import configparser
import csv
from dataclasses import asdict, dataclass, field
import logging
import os
from pathlib import Path
import sys
import typing

import numpy as np

from . import core
from .data import fit_normalization, load_bundled, load_csv, minmax_normalize, one_hot, read_feature_csv
from .errors import AdaTSKError, DataFormatError, DegenerateFiringError, TrainingDivergedError
from .io import load_model, save_model, write_gate_history, write_json
from .model import TNORMS
from .pipeline import cross_validate, run_phase_fs, run_pipeline
from .training import TrainConfig

log = logging.getLogger("adatsk")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2

_TRAIN_FIELDS = typing.get_type_hints(TrainConfig)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    dataset: str = ""
    label_column: str = "class"
    folds: int = 10
    repeats: int = 1
    out: str = "out"
    train: TrainConfig = field(default_factory=TrainConfig)
    compare_tnorms: tuple = TNORMS
    gate_demo_iterations: int = 1000
    gate_demo_sets: int = 3
    gate_demo_init_value: float = 0.05
    gate_demo_runs: tuple = (("proposed", 0.01), ("exp-sq", 0.01), ("exp-sq", 0.05))
    base_dir: Path = Path(".")

    def load_dataset(self):
        if not self.dataset:
            raise UsageError("config: 'dataset' is required")
        if self.dataset.startswith("bundled:"):
            try:
                return load_bundled(self.dataset.split(":", 1)[1])
            except AdaTSKError as exc:
                raise UsageError(str(exc)) from None
        path = self.base_dir / self.dataset
        if not path.is_file():
            raise UsageError(f"dataset file not found: {path}")
        return load_csv(path, self.label_column)


def _coerce(raw, typ, key):
    raw = raw.strip()
    args = typing.get_args(typ)
    if type(None) in args:  # Optional[...]
        if raw.lower() in ("none", ""):
            return None
        typ = next(a for a in args if a is not type(None))
    try:
        if typ is bool:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ in (int, float):
            return typ(raw)
        return raw
    except ValueError:
        raise UsageError(f"config: bad value for {key!r}: {raw!r}") from None


def parse_config(text, base_dir="."):
    """Parse the flat key/value config format into a :class:`RunConfig`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"config: {exc}") from None
    cfg = RunConfig(base_dir=Path(base_dir))
    train = {}
    for key, raw in cp["run"].items():
        if key in _TRAIN_FIELDS:
            train[key] = _coerce(raw, _TRAIN_FIELDS[key], key)
        elif key in ("dataset", "label_column", "out"):
            setattr(cfg, key, raw.strip())
        elif key in ("folds", "repeats", "gate_demo_iterations", "gate_demo_sets"):
            setattr(cfg, key, _coerce(raw, int, key))
        elif key == "gate_demo_init_value":
            cfg.gate_demo_init_value = _coerce(raw, float, key)
        elif key == "compare_tnorms":
            cfg.compare_tnorms = tuple(t.strip() for t in raw.split(",") if t.strip())
        elif key == "gate_demo_runs":
            runs = []
            for item in raw.split(","):
                kind, _, eta = item.strip().partition("@")
                runs.append((kind.strip(), _coerce(eta, float, key)))
            cfg.gate_demo_runs = tuple(runs)
        else:
            raise UsageError(f"config: unknown key {key!r}")
    cfg.train = TrainConfig(**train)
    _validate(cfg)
    return cfg


def _validate(cfg):
    try:
        cfg.train.validate()
    except AdaTSKError as exc:
        raise UsageError(f"config: {exc}") from None
    if cfg.train.tnorm not in TNORMS:
        raise UsageError(f"config: tnorm must be one of {TNORMS}")
    if cfg.train.gate_kind not in core.GATE_KINDS:
        raise UsageError(f"config: gate_kind must be one of {core.GATE_KINDS}")
    for t in cfg.compare_tnorms:
        if t not in TNORMS:
            raise UsageError(f"config: unknown t-norm {t!r} in compare_tnorms")
    for kind, _ in cfg.gate_demo_runs:
        if kind not in core.GATE_KINDS:
            raise UsageError(f"config: unknown gate kind {kind!r} in gate_demo_runs")
    if cfg.folds < 0 or cfg.repeats < 1:
        raise UsageError("config: folds must be >= 0 and repeats >= 1")


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent)


def _prepare_out(cfg, override):
    out = Path(override) if override else cfg.base_dir / cfg.out
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc}") from None
    return out


def _config_summary(cfg):
    d = asdict(cfg.train)
    return {"train": d, "folds": cfg.folds, "repeats": cfg.repeats, "dataset": cfg.dataset}


# -- commands ----------------------------------------------------------------

def cmd_fsre(cfg, out):
    ds = cfg.load_dataset()
    report = {"config": _config_summary(cfg),
              "dataset": {"n_samples": ds.n_samples, "n_features": ds.n_features,
                          "n_classes": ds.n_classes}}
    timing = {}
    if cfg.folds >= 2:
        cv = cross_validate(ds, cfg.train, cfg.folds, cfg.repeats)
        report["cross_validation"] = cv.to_dict()
        timing["cross_validation"] = [
            {"repeat": r["repeat"], "fold": r["fold"], "seconds": r["seconds"]} for r in cv.runs
        ]
    clf = run_pipeline(ds, cfg.train, record_gates=True)
    fs, re_, ft = clf.phases
    report["final_model"] = {
        "train_accuracy": clf.accuracy(ds.features, ds.labels),
        "selected_features": [ds.feature_names[i] for i in clf.selected_features],
        "n_features": int(clf.selected_features.size),
        "n_rules": int(clf.model.n_rules),
        "losses": {ph.name: [ph.losses[0], ph.losses[-1]] for ph in clf.phases},
        "threshold_lambda": fs.threshold,
        "threshold_theta": re_.threshold,
    }
    timing["final_model"] = {ph.name: ph.seconds for ph in clf.phases}
    write_json(report, out / "report.json")
    write_json(timing, out / "timing.json")
    save_model(clf, out / "model.json")
    write_gate_history(fs.gate_history, ds.feature_names, out / "gates_fs.csv")
    write_gate_history(re_.gate_history, [f"rule_{r}" for r in range(re_.model.n_rules)],
                       out / "gates_re.csv")
    if "cross_validation" in report:
        cvr = report["cross_validation"]
        print(f"CV accuracy {cvr['mean_accuracy']:.4f}  #F {cvr['mean_features']:.2f}  "
              f"#R {cvr['mean_rules']:.2f}")
    print(f"final model: {report['final_model']['n_features']} features, "
          f"{report['final_model']['n_rules']} rules; wrote {out}")
    return EXIT_OK


def cmd_compare_tnorms(cfg, out):
    """Plain compact TSK (no gates) under each firing operator; failures are results."""
    ds = cfg.load_dataset()
    v = [0.5, 0.55, 0.49, 0.48]
    u = [1.1e-26, 1.8e-22, 1.5e-9]
    probes = {
        "fake_minimum": {"values": v, "softmin_q-12": float(core.fixed_softmin(v, -12)),
                         "ada_qhat": int(core.adaptive_exponent(v)),
                         "ada_softmin": float(core.ada_softmin_firing(v))},
        "underflow": {"values": u, "softmin_q-12": float(core.fixed_softmin(u, -12)),
                      "ada_qhat": int(core.adaptive_exponent(u)),
                      "ada_softmin": float(core.ada_softmin_firing(u))},
    }
    log.info("fake-minimum probe: softmin(q=-12) = %.4f (true min 0.48)",
             probes["fake_minimum"]["softmin_q-12"])
    results = {}
    folds = max(cfg.folds, 2)
    for tnorm in cfg.compare_tnorms:
        try:
            cv = cross_validate(ds, cfg.train, folds, cfg.repeats, method="plain", tnorm=tnorm)
            results[tnorm] = {"status": "ok", "mean_accuracy": cv.mean_accuracy,
                              "accuracies": [r["accuracy"] for r in cv.runs]}
        except DegenerateFiringError as exc:
            results[tnorm] = {"status": "failed", "failure": "underflow", "detail": str(exc)}
        except TrainingDivergedError as exc:
            results[tnorm] = {"status": "failed", "failure": "diverged", "detail": str(exc)}
        r = results[tnorm]
        print(f"{tnorm:12s} " + (f"{r['mean_accuracy']:.4f}" if r["status"] == "ok"
                                  else f"- ({r['failure']})"))
    write_json({"config": _config_summary(cfg), "probes": probes, "results": results},
               out / "tnorm_report.json")
    return EXIT_OK


def cmd_gate_demo(cfg, out):
    """Phase (i) with different gate functions; writes per-iteration gate trajectories."""
    ds = cfg.load_dataset()
    if ds.n_features < 2:
        raise UsageError("gate-demo needs a dataset with at least 2 features")
    X = minmax_normalize(ds.features, fit_normalization(ds.features, cfg.train.normalization))
    T = one_hot(ds.labels, ds.n_classes)
    summary = []
    for kind, eta in cfg.gate_demo_runs:
        tc = TrainConfig(**{**asdict(cfg.train), "eta": eta, "gate_kind": kind,
                            "s_fs": cfg.gate_demo_sets,
                            "iterations_fs": cfg.gate_demo_iterations,
                            "gate_init": core.gate_parameter_for(kind, cfg.gate_demo_init_value)})
        res = run_phase_fs(X, T, tc, record_gates=True)
        name = f"gates_{kind}_eta{eta:g}.csv"
        write_gate_history(res.gate_history, ds.feature_names, out / name)
        spread = np.ptp(np.abs(res.gate_history), axis=1)
        summary.append({"gate": kind, "eta": eta, "file": name,
                        "final_spread": float(spread[-1]) if spread.size else 0.0,
                        "spread_every_100": [float(s) for s in spread[99::100]]})
        print(f"{kind:14s} eta={eta:<6g} final |M| spread {summary[-1]['final_spread']:.4f}")
    write_json({"config": _config_summary(cfg), "runs": summary}, out / "gate_demo.json")
    return EXIT_OK


def cmd_predict(model_path, input_path, out=None):
    try:
        clf = load_model(model_path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read model {model_path}: {exc}") from None
    names = [clf.feature_names[i] for i in clf.selected_features]
    if not Path(input_path).is_file():
        raise UsageError(f"input file not found: {input_path}")
    try:
        X = read_feature_csv(input_path, names)
    except DataFormatError as exc:
        raise UsageError(str(exc)) from None
    labels = [clf.label_names[k] for k in clf.predict_selected(X)] if len(X) else []
    if out is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["prediction"])
        w.writerows([lab] for lab in labels)
    else:
        out = Path(out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "predictions.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["prediction"])
                w.writerows([lab] for lab in labels)
        except OSError as exc:
            raise UsageError(f"cannot write predictions to {out}: {exc}") from None
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="adatsk", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("fsre", "three-phase feature selection / rule extraction with CV"),
                        ("compare-tnorms", "plain TSK under product, softmin and adaptive softmin"),
                        ("gate-demo", "gate-opening trajectories for different gate functions")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
    p = sub.add_parser("predict", help="predict class labels with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    return parser


_COMMANDS = {"fsre": cmd_fsre, "compare-tnorms": cmd_compare_tnorms, "gate-demo": cmd_gate_demo}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "predict":
            return cmd_predict(args.model, args.input, args.out)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.train.seed = args.seed
        out = _prepare_out(cfg, args.out)
        return _COMMANDS[args.command](cfg, out)
    except (UsageError, DataFormatError) as exc:
        print(f"adatsk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AdaTSKError, FloatingPointError) as exc:
        print(f"adatsk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - top-level guard
        log.exception("internal error")
        print(f"adatsk: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
