"""Structural causal model machinery.

Two halves live here:

* a continuous synthetic-data simulator whose observation vector mixes the
  label's parents, non-descendants and descendants, and
* finite-domain SCMs with exact joint enumeration and counterfactual
  (abduction-action-prediction) queries, used as oracles for the
  information-theoretic checks.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from .numkit import Rng

__all__ = [
    "SynthConfig",
    "SCMDataset",
    "kappa1",
    "kappa2",
    "kappa3",
    "generate",
    "write_csv",
    "DiscreteSCM",
    "enumerate_joint",
    "counterfactual_query",
    "random_scm",
    "CapacityError",
    "InferenceError",
]

PA_DIM = 5
ND_DIM = 5
DC_DIM = 5


class CapacityError(RuntimeError):
    """Discrete state space too large to enumerate."""


class InferenceError(ValueError):
    """Conditioning on a zero-probability event."""


# ---------------------------------------------------------------------------
# Continuous simulator
# ---------------------------------------------------------------------------


def kappa1(x):
    """x - 0.5 where x > 0, else 0."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x - 0.5, 0.0)


def kappa2(x):
    """x where x > 0, else 0 (ReLU)."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x, 0.0)


def kappa3(x):
    """x + 0.5 where x < 0, else 0."""
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, x + 0.5, 0.0)


@dataclass(frozen=True)
class SynthConfig:
    beta: float = 0.3  # exogenous noise variance
    n: int = 500
    seed: int = 0
    q: float = 0.3  # additive offset in the mixing step
    noise_mean: float = 0.3
    weight_seed: int = 12345  # mixing vectors are drawn separately from samples
    shared_noise: bool = False  # one draw reused for all three noises
    nc_cols: int = 0  # extra uncorrelated Uniform(-1,1) columns

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass
class SCMDataset:
    """Samples from the continuous simulator with ground truth retained."""

    pa: np.ndarray  # (n, 5)
    nd: np.ndarray  # (n, 5)
    dc: np.ndarray  # (n, 5)
    x: np.ndarray  # (n, 15 + nc_cols)
    y: np.ndarray  # (n,) in {0, 1}
    config: SynthConfig

    def __len__(self) -> int:
        return self.x.shape[0]


def _mix(a_rows: np.ndarray, u: np.ndarray, q: float) -> np.ndarray:
    """Row j of the output is a_rows[j] . u + q, batched over samples.

    u: (n, width), a_rows: (k, width) -> (n, k)
    """
    return u @ a_rows.T + q


def _two_branch(a_rows: np.ndarray, base: np.ndarray, noise: np.ndarray,
                q: float) -> np.ndarray:
    """The simulator's shared two-branch nonlinearity.

    v1 = A . k1(k2([base, noise])) + q,  v2 = A . k3(k2([-base, -noise])) + q,
    output = sigmoid(v1 + v1 * v2), elementwise per output coordinate.
    """
    u = np.concatenate([base, noise], axis=1)
    v1 = _mix(a_rows, kappa1(kappa2(u)), q)
    v2 = _mix(a_rows, kappa3(kappa2(-u)), q)
    return _sigmoid(v1 + v1 * v2)


def _sigmoid(x):
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def generate(config: SynthConfig) -> SCMDataset:
    """Draw n samples from the nonlinear synthetic causal system.

    pa ~ Uniform(-1,1)^5 drives the binary label y through one two-branch
    composition; nd is a non-descendant sibling driven by pa; dc is a
    descendant driven by y alone.  The label thresholds the pre-sigmoid
    sum at 0 (a strict "sigmoid output > 0" indicator would always fire).
    """
    cfg = config
    wrng = Rng(cfg.weight_seed)
    a_nd = wrng.normal(size=(ND_DIM, PA_DIM * 2))
    a_y = wrng.normal(size=(1, PA_DIM * 2))
    a_dc = wrng.normal(size=(DC_DIM, 1 + PA_DIM))

    rng = Rng(cfg.seed)
    n = cfg.n
    pa = rng.uniform(-1.0, 1.0, size=(n, PA_DIM))
    sd = np.sqrt(cfg.beta)
    eps1 = cfg.noise_mean + sd * rng.normal(size=(n, PA_DIM))
    if cfg.shared_noise:
        eps2 = eps1
        eps3 = eps1
    else:
        eps2 = cfg.noise_mean + sd * rng.normal(size=(n, PA_DIM))
        eps3 = cfg.noise_mean + sd * rng.normal(size=(n, PA_DIM))

    nd = _two_branch(a_nd, pa, eps2, cfg.q)

    u = np.concatenate([pa, eps1], axis=1)
    y1 = _mix(a_y, kappa1(kappa2(u)), cfg.q)[:, 0]
    y2 = _mix(a_y, kappa3(kappa2(-u)), cfg.q)[:, 0]
    y = (y1 + y1 * y2 > 0).astype(int)

    dc = _two_branch(a_dc, y[:, None].astype(float), eps3, cfg.q)

    cols = [pa, nd, dc]
    if cfg.nc_cols > 0:
        cols.append(rng.uniform(-1.0, 1.0, size=(n, cfg.nc_cols)))
    x = np.concatenate(cols, axis=1)
    return SCMDataset(pa=pa, nd=nd, dc=dc, x=x, y=y, config=cfg)


def write_csv(dataset: SCMDataset, path) -> None:
    """Persist a synthetic dataset: pa_0..pa_4,nd_0..nd_4,dc_0..dc_4[,nc_*],y."""
    header = (
        [f"pa_{i}" for i in range(PA_DIM)]
        + [f"nd_{i}" for i in range(ND_DIM)]
        + [f"dc_{i}" for i in range(DC_DIM)]
        + [f"nc_{i}" for i in range(dataset.config.nc_cols)]
        + ["y"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row, label in zip(dataset.x, dataset.y):
            writer.writerow([f"{v:.9g}" for v in row] + [int(label)])


# ---------------------------------------------------------------------------
# Finite-domain SCMs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteSCM:
    """Finite-domain structural model with one exogenous variable per node.

    ``tables[v]`` maps (parent values..., exogenous value) to the value of v;
    it is an integer ndarray of shape (*parent domain sizes, exo domain size).
    ``exo_dists[v]`` is the pmf of v's exogenous input.  Exogenous variables
    are mutually independent; ``order`` must be topological.
    """

    order: tuple
    domains: dict
    parents: dict
    tables: dict
    exo_dists: dict

    def __post_init__(self):
        seen = set()
        for v in self.order:
            for p in self.parents[v]:
                if p not in seen:
                    raise ValueError(f"order is not topological: {p} after {v}")
            seen.add(v)
            table = np.asarray(self.tables[v])
            expected = tuple(self.domains[p] for p in self.parents[v]) + (
                len(self.exo_dists[v]),
            )
            if table.shape != expected:
                raise ValueError(
                    f"table for {v} has shape {table.shape}, expected {expected}"
                )
            if table.min() < 0 or table.max() >= self.domains[v]:
                raise ValueError(f"table for {v} leaves its domain")
            pmf = np.asarray(self.exo_dists[v], dtype=float)
            if pmf.min() < 0 or abs(pmf.sum() - 1.0) > 1e-9:
                raise ValueError(f"exogenous pmf for {v} is not a distribution")

    def evaluate(self, exo: dict, intervention: dict | None = None) -> dict:
        """Deterministic world given exogenous values and optional do()."""
        intervention = intervention or {}
        values = {}
        for v in self.order:
            if v in intervention:
                values[v] = intervention[v]
                continue
            idx = tuple(values[p] for p in self.parents[v]) + (exo[v],)
            values[v] = int(np.asarray(self.tables[v])[idx])
        return values

    def exo_worlds(self):
        """Yield (exogenous assignment, probability) over all worlds."""
        names = list(self.order)
        sizes = [len(self.exo_dists[v]) for v in names]
        for combo in itertools.product(*(range(s) for s in sizes)):
            p = 1.0
            for v, e in zip(names, combo):
                p *= float(self.exo_dists[v][e])
            if p == 0.0:
                continue
            yield dict(zip(names, combo)), p


def enumerate_joint(scm: DiscreteSCM, max_states: int = 10 ** 6):
    """Exact joint distribution over all endogenous variables.

    Returns a :class:`carr.infometrics.JointTable`.  Sums over every
    exogenous configuration, so the total exogenous state space must stay
    below ``max_states``.
    """
    from .infometrics import JointTable  # local import to avoid a cycle

    total = 1
    for v in scm.order:
        total *= len(scm.exo_dists[v])
        if total > max_states:
            raise CapacityError(f"exogenous state space exceeds {max_states}")

    shape = tuple(scm.domains[v] for v in scm.order)
    probs = np.zeros(shape)
    for exo, p in scm.exo_worlds():
        values = scm.evaluate(exo)
        probs[tuple(values[v] for v in scm.order)] += p
    return JointTable(names=tuple(scm.order), probs=probs)


def _match(values: dict, evidence: dict) -> bool:
    for var, want in evidence.items():
        v = values[var]
        if isinstance(want, (set, frozenset, tuple, list)):
            if v not in want:
                return False
        elif v != want:
            return False
    return True


def counterfactual_query(scm: DiscreteSCM, evidence: dict, intervention: dict,
                         target: str) -> np.ndarray:
    """Exact counterfactual distribution of ``target``.

    Abduction: posterior over exogenous worlds given the evidence (values may
    be single values or sets of admissible values).  Action: apply the do()
    intervention.  Prediction: push the posterior through the mutated model.
    """
    post = []
    z = 0.0
    for exo, p in scm.exo_worlds():
        if _match(scm.evaluate(exo), evidence):
            post.append((exo, p))
            z += p
    if z <= 0.0:
        raise InferenceError(f"evidence {evidence} has zero probability")
    dist = np.zeros(scm.domains[target])
    for exo, p in post:
        values = scm.evaluate(exo, intervention)
        dist[values[target]] += p / z
    return dist


def random_scm(rng: Rng, shape: str = "a", max_domain: int = 4,
               deterministic: bool = False) -> DiscreteSCM:
    """Random four-node SCM in the pa/nd/y/dc causal shapes.

    shape "a": pa -> y, pa -> nd, y -> dc.
    shape "b": additionally pa -> dc (pa confounds y and dc).
    ``deterministic`` collapses every exogenous pmf to a point mass.
    """
    if shape not in ("a", "b"):
        raise ValueError(f"shape must be 'a' or 'b', got {shape!r}")

    def dom():
        return int(rng.integers(2, max_domain + 1))

    domains = {"pa": dom(), "nd": dom(), "y": dom(), "dc": dom()}
    parents = {
        "pa": (),
        "nd": ("pa",),
        "y": ("pa",),
        "dc": ("pa", "y") if shape == "b" else ("y",),
    }

    def pmf(k):
        if deterministic:
            out = np.zeros(k)
            out[int(rng.integers(0, k))] = 1.0
            return out
        w = rng.uniform(0.05, 1.0, size=k)
        return w / w.sum()

    exo_sizes = {v: (1 if deterministic else int(rng.integers(2, 4))) for v in domains}
    exo_dists = {v: pmf(exo_sizes[v]) for v in domains}
    tables = {}
    for v in ("pa", "nd", "y", "dc"):
        shape_v = tuple(domains[p] for p in parents[v]) + (exo_sizes[v],)
        tables[v] = rng.integers(0, domains[v], size=shape_v)
    return DiscreteSCM(order=("pa", "nd", "y", "dc"), domains=domains,
                       parents=parents, tables=tables, exo_dists=exo_dists)
