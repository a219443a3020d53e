"""Exact discrete oracles at work: information inequalities, the data
processing inequality, and necessity/sufficiency probabilities.

The interesting part is the second inequality audit: on the confounded
graph (pa -> dc in addition to pa -> y -> dc) the claimed inequality
I(pa; nd, dc) <= I(pa; nd, y) is simply not a theorem, and random search
finds violations easily.  A minimal counterexample is spelled out below.

Run:  python demos/oracle_audits.py
"""

import numpy as np

from carr.cli import run_audit
from carr.infometrics import check_lemma1, pns
from carr.scm import DiscreteSCM


def counterexample():
    """Label ignores pa entirely; dc copies pa.  Then the left side is
    H(pa) = ln 2 while the right side is 0."""
    return DiscreteSCM(
        order=("pa", "nd", "y", "dc"),
        domains={"pa": 2, "nd": 2, "y": 2, "dc": 2},
        parents={"pa": (), "nd": ("pa",), "y": ("pa",), "dc": ("pa", "y")},
        tables={
            "pa": np.array([0, 1]),
            "nd": np.zeros((2, 1), dtype=int),
            "y": np.array([[0, 1], [0, 1]]),  # y = coin flip, pa unused
            "dc": np.array([[[0], [0]], [[1], [1]]]),  # dc = pa
        },
        exo_dists={"pa": np.array([0.5, 0.5]), "nd": np.array([1.0]),
                   "y": np.array([0.5, 0.5]), "dc": np.array([1.0])},
    )


def main():
    print("=== random-model audits (200 draws each) ===")
    for what, shape in [("dpi", "a"), ("lemma1", "a"), ("lemma1", "b"),
                        ("lemma2", "a"), ("lemma2", "b"), ("pns", "a")]:
        failures, worst = run_audit(what, 200, seed=0, shape=shape)
        tag = f"{what} (shape {shape})" if what != "dpi" else what
        print(f"{tag:18s} violations {failures:>3}/200, worst margin {worst:.3e}")

    print()
    print("=== why shape (b) fails: a two-line counterexample ===")
    lhs, rhs, ok = check_lemma1(counterexample())
    print(f"y = coin flip, dc = pa  ->  I(pa; nd, dc) = {lhs:.6f} nats "
          f"(= ln 2), I(pa; nd, y) = {rhs:.6f}, inequality holds: {ok}")
    print("the confounding edge pa -> dc carries information about pa that "
          "never passes through (nd, y)")

    print()
    print("=== necessity and sufficiency on the identity model ===")
    identity = DiscreteSCM(
        order=("z", "y"), domains={"z": 2, "y": 2},
        parents={"z": (), "y": ("z",)},
        tables={"z": np.array([0, 1]), "y": np.array([[0], [1]])},
        exo_dists={"z": np.array([0.5, 0.5]), "y": np.array([1.0])},
    )
    suff, nec, combined, alt = pns(identity, "z", 1, "y", 1, z_alt=0)
    print(f"z uniform, y = z: sufficient = {suff}, necessary = {nec}, "
          f"combined = {combined}")
    print(f"alternative reading = {alt}; the two differ by "
          f"P(z=1, y=1) = {combined - alt}")


if __name__ == "__main__":
    main()
