"""Training loop (SGD with momentum over the minmax objective), evaluation,
and experiment orchestration with persisted reports.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import dataio, infometrics, scm as scm_mod
from .attack import AttackSpec, pgd_attack, random_ball
from .dataio import DatasetSpec, Split, batch_iter, split_three_way
from .model import ModelParams, encode, init_params, predict, softmax
from .numkit import ConfigurationError, Rng
from .objective import METHODS, loss_and_grads

__all__ = ["RunConfig", "MetricsReport", "train", "evaluate", "run_experiment",
           "sweep", "TrainingError"]


class TrainingError(RuntimeError):
    """Loss diverged; message carries the epoch/batch context."""


_MODES = ("standard", "robust")


@dataclass(frozen=True)
class RunConfig:
    method: str = "carr"
    training_mode: str = "robust"
    attack: AttackSpec = field(default_factory=lambda: AttackSpec(p="2", beta=0.3))
    eval_attack: AttackSpec = field(default_factory=lambda: AttackSpec(p="2", beta=0.3))
    lam: float = 0.001
    b: float = 0.8
    neg_weight: float = 1.0
    lr: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 60
    patience: int = 10
    seed: int = 0
    d_z: int = 64
    stop_grad_negative: bool = False
    dataset: dict = field(default_factory=lambda: {"kind": "synthetic", "beta": 0.3,
                                                   "n": 500})

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.training_mode not in _MODES:
            raise ConfigurationError(f"unknown training mode {self.training_mode!r}")
        if self.training_mode == "standard" and self.attack.beta != 0.0:
            raise ConfigurationError(
                "standard training mode requires a zero training-attack radius"
            )
        if self.training_mode == "robust" and self.attack.beta == 0.0:
            raise ConfigurationError(
                "robust training mode requires a positive training-attack radius"
            )

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "training_mode": self.training_mode,
            "attack": self.attack.to_dict(),
            "eval_attack": self.eval_attack.to_dict(),
            "lam": self.lam,
            "b": self.b,
            "neg_weight": self.neg_weight,
            "lr": self.lr,
            "momentum": self.momentum,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "patience": self.patience,
            "seed": self.seed,
            "d_z": self.d_z,
            "stop_grad_negative": self.stop_grad_negative,
            "dataset": dict(self.dataset),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(doc) - allowed
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        for key in ("attack", "eval_attack"):
            if key in doc and isinstance(doc[key], dict):
                spec = dict(doc[key])
                unknown = set(spec) - {"p", "beta", "steps", "step_size", "seed"}
                if unknown:
                    raise ConfigurationError(
                        f"unknown {key} keys: {sorted(unknown)}"
                    )
                doc[key] = AttackSpec(**spec)
        return cls(**doc)


@dataclass
class MetricsReport:
    auc: float
    acc: float
    adv_auc: float
    adv_acc: float
    dcor_pa: float | None = None
    dcor_nd: float | None = None
    dcor_dc: float | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def _standardize(cfg: RunConfig) -> RunConfig:
    """Force the training-time radius to zero in standard mode."""
    if cfg.training_mode == "standard":
        return replace(cfg, attack=replace(cfg.attack, beta=0.0))
    return cfg


def train(config: RunConfig, train_split: Split, val_split: Split | None = None):
    """Optimize the configured objective; returns (params, history).

    history is a list of per-epoch dicts with the mean loss breakdown and,
    when a validation split is given, the validation AUC used for early
    stopping (patience in epochs, best parameters restored).
    """
    cfg = config
    rng_init = Rng(cfg.seed, stream=1)
    rng_eps = Rng(cfg.seed, stream=2)
    rng_neg = Rng(cfg.seed, stream=3)

    if train_split.x.dtype.kind in "iu" and train_split.x.shape[1] == 2:
        vocab = config.dataset.get("vocab")
        if vocab is None:
            vocab = dataio.infer_vocab({"train": train_split})
        params = init_params(rng_init, vocab=tuple(vocab), d_z=cfg.d_z)
    else:
        params = init_params(rng_init, d_in=train_split.x.shape[1], d_z=cfg.d_z)

    vec = params.to_vector()
    velocity = np.zeros_like(vec)
    robust = cfg.training_mode == "robust"
    history = []
    best_val = -np.inf
    best_vec = vec.copy()
    stale = 0

    for epoch in range(cfg.epochs):
        sums = {"total": 0.0, "positive_ll": 0.0, "kl": 0.0, "negative_ll": 0.0}
        n_batches = 0
        for batch_no, (xb, yb) in enumerate(
            batch_iter(train_split.x, train_split.y, cfg.batch_size,
                       seed=cfg.seed * 100003 + epoch)
        ):
            enc = encode(params, xb, rng=rng_eps)
            attack_delta = None
            if robust:
                z_adv = pgd_attack(params, enc.z, yb, cfg.attack)
                attack_delta = z_adv - enc.z
                assert _ball_ok(attack_delta, cfg.attack), "attack left its ball"
            neg_delta = None
            if cfg.method == "carr":
                neg_delta = random_ball(np.zeros_like(enc.z), cfg.attack.p,
                                        cfg.attack.beta, rng_neg)
            breakdown, grad = loss_and_grads(
                params, xb, yb, cfg.method, lam=cfg.lam, b=cfg.b,
                neg_weight=cfg.neg_weight, eps_std=enc.eps_std,
                attack_delta=attack_delta, neg_delta=neg_delta,
                stop_grad_negative=cfg.stop_grad_negative,
            )
            if not np.isfinite(breakdown.total):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {batch_no}"
                )
            velocity = cfg.momentum * velocity - cfg.lr * grad
            vec = vec + velocity
            params.from_vector(vec)
            sums["total"] += breakdown.total
            sums["positive_ll"] += breakdown.positive_ll
            sums["kl"] += breakdown.kl or 0.0
            sums["negative_ll"] += breakdown.negative_ll or 0.0
            n_batches += 1

        entry = {k: v / n_batches for k, v in sums.items()}
        entry["epoch"] = epoch
        if val_split is not None and len(val_split) > 0:
            entry["val_auc"] = _clean_auc(params, val_split)
            if entry["val_auc"] > best_val + 1e-12:
                best_val = entry["val_auc"]
                best_vec = vec.copy()
                stale = 0
            else:
                stale += 1
        history.append(entry)
        if val_split is not None and stale > cfg.patience:
            break

    if val_split is not None:
        params.from_vector(best_vec)
    return params, history


def _ball_ok(delta: np.ndarray, spec: AttackSpec) -> bool:
    if spec.p == "inf":
        return bool(np.abs(delta).max(initial=0.0) <= spec.beta + 1e-9)
    return bool(np.linalg.norm(delta, axis=1).max(initial=0.0) <= spec.beta + 1e-9)


def _scores(params: ModelParams, z: np.ndarray) -> np.ndarray:
    return softmax(predict(params, z))[:, 1]


def _clean_auc(params: ModelParams, split: Split) -> float:
    enc = encode(params, split.x, deterministic=True)
    return infometrics.auc(_scores(params, enc.z), split.y)


def evaluate(params: ModelParams, split: Split,
             eval_attack: AttackSpec) -> MetricsReport:
    """Clean and adversarial metrics on deterministic representations."""
    enc = encode(params, split.x, deterministic=True)
    z = enc.mean
    clean = _scores(params, z)
    z_adv = pgd_attack(params, z, split.y, eval_attack)
    adv = _scores(params, z_adv)
    report = MetricsReport(
        auc=infometrics.auc(clean, split.y),
        acc=infometrics.acc(clean, split.y),
        adv_auc=infometrics.auc(adv, split.y),
        adv_acc=infometrics.acc(adv, split.y),
    )
    if split.pa is not None:
        report.dcor_pa = infometrics.distance_correlation(z, split.pa)
        report.dcor_nd = infometrics.distance_correlation(z, split.nd)
        report.dcor_dc = infometrics.distance_correlation(z, split.dc)
    return report


def _resolve_dataset(cfg: RunConfig):
    """Materialize train/val/test splits from the dataset stanza."""
    ds = dict(cfg.dataset)
    kind = ds.pop("kind", "synthetic")
    if kind == "synthetic":
        allowed = {"beta", "n", "seed", "q", "noise_mean", "weight_seed",
                   "shared_noise", "nc_cols"}
        unknown = set(ds) - allowed
        if unknown:
            raise ConfigurationError(f"unknown dataset keys: {sorted(unknown)}")
        ds.setdefault("seed", cfg.seed)
        data = scm_mod.generate(scm_mod.SynthConfig(**ds))
        split = Split(x=data.x, y=data.y, pa=data.pa, nd=data.nd, dc=data.dc)
        return split_three_way(split, seed=cfg.seed + 777)
    # file-backed datasets
    spec = DatasetSpec(kind=kind, paths=ds.pop("paths"),
                       rating_threshold=ds.pop("rating_threshold", 4.0),
                       vocab=tuple(ds["vocab"]) if ds.get("vocab") else None)
    ds.pop("vocab", None)
    if ds:
        raise ConfigurationError(f"unknown dataset keys: {sorted(ds)}")
    splits = dataio.load(spec)
    train_split = splits.get("train")
    if train_split is None:
        raise ConfigurationError("file-backed datasets need a 'train' split")
    val = splits.get("val_ood", splits.get("val_iid"))
    test = splits.get("test_ood", splits.get("test_iid"))
    if val is None or test is None:
        # fall back to carving val/test out of train
        train_split, fallback_val, fallback_test = split_three_way(
            train_split, seed=spec_seed(cfg)
        )
        val = val or fallback_val
        test = test or fallback_test
    return train_split, val, test


def spec_seed(cfg: RunConfig) -> int:
    return cfg.seed + 777


def run_experiment(config: RunConfig, out_path=None, aggregate_path=None) -> dict:
    """Synthesize/load data, train, evaluate, and persist the report."""
    cfg = _standardize(config)
    start = time.time()
    train_split, val_split, test_split = _resolve_dataset(cfg)
    params, history = train(cfg, train_split, val_split)
    metrics = evaluate(params, test_split, cfg.eval_attack)
    report = {
        "config": config.to_dict(),
        "metrics": metrics.to_dict(),
        "history": history,
        "wall_clock_s": time.time() - start,
    }
    if out_path is not None:
        dataio.save_report(report, out_path)
    if aggregate_path is not None:
        row = {"method": cfg.method, "mode": cfg.training_mode,
               "p": cfg.eval_attack.p, "seed": cfg.seed}
        row.update({k: v for k, v in metrics.to_dict().items() if v is not None})
        dataio.append_aggregate_row(aggregate_path, row)
    return report


def sweep(config: RunConfig, n_seeds: int, out_dir=None) -> dict:
    """Run ``n_seeds`` independent seeds and aggregate mean/std per metric."""
    import os

    reports = []
    for k in range(n_seeds):
        cfg = replace(config, seed=config.seed + k)
        out_path = None
        agg_path = None
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            out_path = os.path.join(out_dir, f"run_seed{cfg.seed}.json")
            agg_path = os.path.join(out_dir, "aggregate.csv")
        reports.append(run_experiment(cfg, out_path, agg_path))

    keys = [k for k, v in reports[0]["metrics"].items() if v is not None]
    aggregate = {}
    for key in keys:
        vals = np.array([r["metrics"][key] for r in reports], dtype=float)
        aggregate[key] = {"mean": float(vals.mean()), "std": float(vals.std(ddof=0))}
    summary = {"config": config.to_dict(), "n_seeds": n_seeds,
               "aggregate": aggregate}
    if out_dir is not None:
        dataio.save_report(summary, os.path.join(out_dir, "sweep_summary.json"))
    return {"reports": reports, "summary": summary}
