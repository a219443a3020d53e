"""Information measures, inequality checkers, PNS, and sample statistics."""

import numpy as np
import pytest

from carr.infometrics import (
    JointTable,
    MetricError,
    QueryError,
    acc,
    auc,
    check_lemma1,
    check_lemma2,
    distance_correlation,
    entropy,
    mutual_info,
    pns,
    random_markov_chain,
)
from carr.numkit import Rng
from carr.scm import DiscreteSCM, enumerate_joint, random_scm


def test_joint_table_validation():
    with pytest.raises(QueryError):
        JointTable(names=("a",), probs=np.array([[0.5, 0.5]]))
    with pytest.raises(QueryError):
        JointTable(names=("a", "b"), probs=np.array([[0.5, 0.6], [0.0, 0.0]]))


def test_marginal_restores_axis_order():
    probs = Rng(0).uniform(0.1, 1.0, size=(2, 3, 4))
    probs /= probs.sum()
    table = JointTable(names=("a", "b", "c"), probs=probs)
    m = table.marginal(("c", "a"))
    assert m.shape == (4, 2)
    assert np.allclose(m, probs.sum(axis=1).T)


def test_entropy_uniform():
    table = JointTable(names=("a",), probs=np.full(8, 1 / 8))
    assert abs(entropy(table, ("a",)) - np.log(8)) < 1e-12
    with pytest.raises(QueryError):
        entropy(table, ())


def test_mutual_info_independent_and_copy():
    indep = JointTable(names=("a", "b"), probs=np.full((2, 2), 0.25))
    assert mutual_info(indep, ("a",), ("b",)) == 0.0
    copy = JointTable(names=("a", "b"), probs=np.array([[0.5, 0.0], [0.0, 0.5]]))
    assert abs(mutual_info(copy, ("a",), ("b",)) - np.log(2)) < 1e-12
    with pytest.raises(QueryError):
        mutual_info(copy, ("a",), ("a",))


def test_dpi_on_random_chains():
    # information never grows along x - z - y
    for i in range(50):
        table = random_markov_chain(Rng(0, stream=100 + i))
        assert (mutual_info(table, ("x",), ("z",))
                >= mutual_info(table, ("x",), ("y",)) - 1e-10)


def _confounded_counterexample():
    """Shape (b) model where the label ignores pa but dc copies it.

    Then I(pa; nd, dc) = H(pa) = ln 2 while I(pa; nd, y) = 0, so the
    first inequality checker must report a violation.
    """
    return DiscreteSCM(
        order=("pa", "nd", "y", "dc"),
        domains={"pa": 2, "nd": 2, "y": 2, "dc": 2},
        parents={"pa": (), "nd": ("pa",), "y": ("pa",), "dc": ("pa", "y")},
        tables={
            "pa": np.array([0, 1]),
            "nd": np.zeros((2, 1), dtype=int),
            "y": np.array([[0, 1], [0, 1]]),
            "dc": np.array([[[0], [0]], [[1], [1]]]),
        },
        exo_dists={
            "pa": np.array([0.5, 0.5]),
            "nd": np.array([1.0]),
            "y": np.array([0.5, 0.5]),
            "dc": np.array([1.0]),
        },
    )


def test_lemma1_holds_on_chain_shape():
    for i in range(50):
        lhs, rhs, ok = check_lemma1(random_scm(Rng(1, stream=10 + i), shape="a"))
        assert ok, (lhs, rhs)


def test_lemma1_violated_under_confounding():
    lhs, rhs, ok = check_lemma1(_confounded_counterexample())
    assert not ok
    assert abs(lhs - np.log(2)) < 1e-12 and abs(rhs) < 1e-12


def test_lemma2_holds_both_shapes():
    for shape in ("a", "b"):
        for i in range(50):
            ineq1, ineq2 = check_lemma2(random_scm(Rng(2, stream=10 + i), shape))
            assert ineq1[2] and ineq2[2]


def test_lemma_checkers_require_roles():
    chain = DiscreteSCM(order=("x",), domains={"x": 2}, parents={"x": ()},
                        tables={"x": np.array([0, 1])},
                        exo_dists={"x": np.array([0.5, 0.5])})
    with pytest.raises(QueryError):
        check_lemma1(chain)


def _identity_scm():
    """Z uniform binary, Y = Z deterministically."""
    return DiscreteSCM(
        order=("z", "y"), domains={"z": 2, "y": 2},
        parents={"z": (), "y": ("z",)},
        tables={"z": np.array([0, 1]), "y": np.array([[0], [1]])},
        exo_dists={"z": np.array([0.5, 0.5]), "y": np.array([1.0])},
    )


def test_pns_identity_scm_exact():
    suff, nec, combined, alt = pns(_identity_scm(), "z", 1, "y", 1, z_alt=0)
    assert abs(suff - 0.5) < 1e-12
    assert abs(nec - 0.5) < 1e-12
    assert abs(combined - 1.0) < 1e-12
    # combined - alt = P(Z=1, Y=1) = 0.5
    assert abs((combined - alt) - 0.5) < 1e-12


def test_pns_unweighted_reading():
    suff, nec, combined, _ = pns(_identity_scm(), "z", 1, "y", 1, z_alt=0,
                                 weighted=False)
    assert abs(suff - 1.0) < 1e-12 and abs(nec - 1.0) < 1e-12


def test_pns_difference_identity_random():
    checked = 0
    for i in range(80):
        scm = random_scm(Rng(3, stream=10 + i), shape="a")
        try:
            _, _, combined, alt = pns(scm, "pa", 0, "y", 0, z_alt=1)
        except QueryError:
            continue
        joint = JointTable(names=("pa", "y"),
                           probs=enumerate_joint(scm).marginal(("pa", "y")))
        assert abs((combined - alt) - joint.probs[0, 0]) < 1e-10
        checked += 1
    assert checked > 10  # zero-probability events skip the rest


def test_pns_zero_probability_event():
    # Z constant 0 makes the (Z=1, Y=1) event impossible
    scm = DiscreteSCM(order=("z", "y"), domains={"z": 2, "y": 2},
                      parents={"z": (), "y": ("z",)},
                      tables={"z": np.array([0]), "y": np.array([[0], [1]])},
                      exo_dists={"z": np.array([1.0]), "y": np.array([1.0])})
    with pytest.raises(QueryError):
        pns(scm, "z", 1, "y", 1, z_alt=0)


# ---- sample statistics ----


def test_distance_correlation_affine():
    rng = Rng(4)
    a = rng.normal(size=(120, 3))
    b = 2.0 * a + 1.0
    assert abs(distance_correlation(a, b) - 1.0) < 1e-10


def test_distance_correlation_independent_small():
    rng = Rng(5)
    a = rng.normal(size=(400, 2))
    b = rng.normal(size=(400, 2))
    assert distance_correlation(a, b) < 0.15


def test_distance_correlation_degenerate():
    a = np.zeros((10, 2))
    b = Rng(6).normal(size=(10, 2))
    assert distance_correlation(a, b) == 0.0
    with pytest.raises(QueryError):
        distance_correlation(np.zeros(1), np.zeros(1))


def test_distance_correlation_accepts_1d():
    rng = Rng(7)
    a = rng.normal(size=50)
    assert abs(distance_correlation(a, -3.0 * a) - 1.0) < 1e-10


def test_auc_textbook_example():
    assert abs(auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) - 0.75) < 1e-12


def test_auc_ties_midrank():
    assert abs(auc([0.5, 0.5], [0, 1]) - 0.5) < 1e-12


def test_auc_single_class():
    with pytest.raises(MetricError):
        auc([0.1, 0.2], [1, 1])


def test_acc_threshold():
    assert acc([0.9, 0.4, 0.6, 0.1], [1, 0, 0, 0]) == 0.75
    assert acc([0.9, 0.1], [1, 0], threshold=0.95) == 0.5
