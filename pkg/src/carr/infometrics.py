"""Exact information measures on finite distributions, causal-inequality
checkers, PNS enumeration, distance correlation, and classification metrics.

Entropies are in nats throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from .scm import DiscreteSCM, counterfactual_query, enumerate_joint

__all__ = [
    "JointTable",
    "entropy",
    "mutual_info",
    "check_lemma1",
    "check_lemma2",
    "pns",
    "distance_correlation",
    "auc",
    "acc",
    "random_markov_chain",
    "QueryError",
    "MetricError",
]

_SLACK = 1e-10


class QueryError(ValueError):
    """Invalid variable subset or degenerate input for a query."""


class MetricError(ValueError):
    """Metric undefined on the given data (e.g. single-class AUC)."""


@dataclass(frozen=True)
class JointTable:
    """Joint probability table over named finite variables."""

    names: tuple
    probs: np.ndarray  # shape = one axis per variable

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != len(self.names):
            raise QueryError("probs must have one axis per variable")
        if probs.min() < -1e-12 or abs(probs.sum() - 1.0) > 1e-9:
            raise QueryError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", probs)

    def axes(self, variables) -> tuple:
        try:
            return tuple(self.names.index(v) for v in variables)
        except ValueError as exc:
            raise QueryError(str(exc)) from None

    def marginal(self, variables) -> np.ndarray:
        keep = self.axes(variables)
        drop = tuple(i for i in range(len(self.names)) if i not in keep)
        m = self.probs.sum(axis=drop)
        # sum() collapses axes in index order; restore the requested order
        order = tuple(sorted(keep).index(a) for a in keep)
        return np.transpose(m, order)


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def entropy(table: JointTable, variables) -> float:
    """Shannon entropy of the marginal over ``variables``, in nats."""
    variables = tuple(variables)
    if not variables:
        raise QueryError("entropy of an empty variable set")
    return _h(table.marginal(variables).ravel())


def mutual_info(table: JointTable, vars_a, vars_b) -> float:
    """I(A;B) = H(A) + H(B) - H(A,B), clipped at 0 against roundoff."""
    vars_a, vars_b = tuple(vars_a), tuple(vars_b)
    if set(vars_a) & set(vars_b):
        raise QueryError("variable subsets must be disjoint")
    value = (
        entropy(table, vars_a)
        + entropy(table, vars_b)
        - entropy(table, vars_a + vars_b)
    )
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# Causal-inequality checkers
# ---------------------------------------------------------------------------

_ROLES = ("pa", "nd", "y", "dc")


def _role_table(scm: DiscreteSCM) -> JointTable:
    missing = [r for r in _ROLES if r not in scm.order]
    if missing:
        raise QueryError(f"SCM lacks designated roles: {missing}")
    return enumerate_joint(scm)


def check_lemma1(scm: DiscreteSCM):
    """I(pa; nd, dc) <= I(pa; nd, y) on a pa/nd/y/dc structured model."""
    table = _role_table(scm)
    lhs = mutual_info(table, ("pa",), ("nd", "dc"))
    rhs = mutual_info(table, ("pa",), ("nd", "y"))
    return lhs, rhs, lhs <= rhs + _SLACK


def check_lemma2(scm: DiscreteSCM):
    """Two inequalities with X read as the tuple (pa, nd, dc).

    1. I(pa; nd, dc) <= I(pa; X) where I(pa; X) = H(pa) since pa is part
       of X (the mixing function is injective).
    2. I(pa; y) <= I(pa; nd, y).
    """
    table = _role_table(scm)
    lhs1 = mutual_info(table, ("pa",), ("nd", "dc"))
    rhs1 = entropy(table, ("pa",))  # I(pa; pa, nd, dc) = H(pa)
    lhs2 = mutual_info(table, ("pa",), ("y",))
    rhs2 = mutual_info(table, ("pa",), ("nd", "y"))
    return (lhs1, rhs1, lhs1 <= rhs1 + _SLACK), (lhs2, rhs2, lhs2 <= rhs2 + _SLACK)


def pns(scm: DiscreteSCM, z_var: str, z_val: int, y_var: str, y_val: int,
        z_alt: int, weighted: bool = True):
    """Probability of necessity and sufficiency via exact counterfactuals.

    sufficient = P(Z!=z, Y!=y) * P(Y(do Z=z) = y | Z!=z, Y!=y)
    necessary  = P(Z=z, Y=y)  * P(Y(do Z=z_alt) != y | Z=z, Y=y)

    Returns (sufficient, necessary, combined, alternative) where
    ``combined = sufficient + necessary`` and ``alternative`` subtracts the
    positive-counterfactual necessary term instead; the two differ by
    exactly P(Z=z, Y=y).  "Z != z" as an intervention target is realized
    by the single designated alternative value ``z_alt``.  ``weighted``
    False drops the outer event probabilities.
    """
    table = enumerate_joint(scm)
    joint_zy = table.marginal((z_var, y_var))
    not_z = frozenset(range(scm.domains[z_var])) - {z_val}
    not_y = frozenset(range(scm.domains[y_var])) - {y_val}

    mask = np.ones_like(joint_zy, dtype=bool)
    mask[z_val, :] = False
    mask[:, y_val] = False
    p_event_suff = float(joint_zy[mask].sum())
    p_event_nec = float(joint_zy[z_val, y_val])

    if p_event_suff <= 0 or p_event_nec <= 0:
        raise QueryError("PNS conditioning events must have nonzero probability")

    cf_suff = counterfactual_query(
        scm, {z_var: not_z, y_var: not_y}, {z_var: z_val}, y_var
    )
    cf_nec = counterfactual_query(
        scm, {z_var: z_val, y_var: y_val}, {z_var: z_alt}, y_var
    )

    w_suff = p_event_suff if weighted else 1.0
    w_nec = p_event_nec if weighted else 1.0
    sufficient = w_suff * float(cf_suff[y_val])
    # exogenous-posterior sums can overshoot 1 by an ulp or two
    necessary = w_nec * max(0.0, 1.0 - float(cf_nec[y_val]))
    pns_combined = sufficient + necessary
    pns_alt = sufficient - w_nec * float(cf_nec[y_val])
    return sufficient, necessary, pns_combined, pns_alt


def random_markov_chain(rng, sizes=(3, 3, 3)) -> JointTable:
    """Random joint over a chain X - Z - Y: p(x) p(z|x) p(y|z)."""
    kx, kz, ky = sizes
    px = rng.uniform(0.05, 1.0, size=kx)
    px /= px.sum()
    pzx = rng.uniform(0.05, 1.0, size=(kx, kz))
    pzx /= pzx.sum(axis=1, keepdims=True)
    pyz = rng.uniform(0.05, 1.0, size=(kz, ky))
    pyz /= pyz.sum(axis=1, keepdims=True)
    probs = px[:, None, None] * pzx[:, :, None] * pyz[None, :, :]
    return JointTable(names=("x", "z", "y"), probs=probs)


# ---------------------------------------------------------------------------
# Sample statistics
# ---------------------------------------------------------------------------


def distance_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Sample distance correlation (biased V-statistic) between two blocks.

    Rows are joint observations; returns a value in [0, 1], with 0 when
    either argument has zero distance variance (constant rows).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] == 1:
        a = a.T
    if b.shape[0] == 1:
        b = b.T
    n = a.shape[0]
    if n < 2 or b.shape[0] != n:
        raise QueryError("need n >= 2 paired observations")

    def centered(m):
        d = cdist(m, m)
        return d - d.mean(axis=0) - d.mean(axis=1)[:, None] + d.mean()

    ca, cb = centered(a), centered(b)
    dcov2 = (ca * cb).mean()
    dvar_a = (ca * ca).mean()
    dvar_b = (cb * cb).mean()
    if dvar_a <= 0 or dvar_b <= 0:
        return 0.0
    r2 = dcov2 / np.sqrt(dvar_a * dvar_b)
    return float(np.sqrt(max(r2, 0.0)))


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative; midranks
    for ties."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC needs both classes present")
    ranks = rankdata(scores)
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0)
                 / (n_pos * n_neg))


def acc(scores, labels, threshold: float = 0.5) -> float:
    """Accuracy of thresholded scores."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    pred = (scores >= threshold).astype(int)
    return float((pred == labels).mean())
