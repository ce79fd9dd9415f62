"""Seeded random instance generation and the layered unrolling transformer."""

from __future__ import annotations

import random

from .lts import Lts

__all__ = ["gen_random", "unroll"]


def _label_names(n_labels: int) -> list[str]:
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    if n_labels <= len(alphabet):
        return [alphabet[i] for i in range(n_labels)]
    return [f"a{i}" for i in range(n_labels)]


def gen_random(
    n_states: int,
    n_labels: int,
    density: float,
    seed: int,
    *,
    strongly_connected: bool = False,
) -> Lts:
    """Seeded random system: every (x, a, y) appears with probability
    ``density``, drawn in fixed (x, a, y) order so the same seed always
    yields the same system; I is one seeded-random state.

    With ``strongly_connected`` a seeded random cycle over all states is laid
    down first, so the whole system is one strongly connected component.
    """
    if n_states < 1:
        raise ValueError("need at least one state")
    if n_labels < 1:
        raise ValueError("need at least one label")
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    rng = random.Random(seed)
    transitions: list[tuple[int, int, int]] = []
    if strongly_connected:
        order = list(range(n_states))
        rng.shuffle(order)
        for i, x in enumerate(order):
            transitions.append((x, rng.randrange(n_labels), order[(i + 1) % n_states]))
    for x in range(n_states):
        for a in range(n_labels):
            for y in range(n_states):
                if rng.random() < density:
                    transitions.append((x, a, y))
    initial = rng.randrange(n_states)
    return Lts(n_states, _label_names(n_labels), transitions, [initial])


def unroll(lts: Lts, k: int) -> Lts:
    """k+1 layered copies with cross edges one layer up; I moves to layer k.

    State x of layer j becomes ``j*n + x``.  Every original transition
    (x, a, y) yields the in-layer copies (x_j, a, y_j) for all j and the
    cross edges (x_j, a, y_{j+1}) for j < k, so layers 0..k-1 cannot be
    reached from the initial states, which live in layer k.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    n = lts.n_states
    transitions: list[tuple[int, int, int]] = []
    for x, a, y in lts.transitions():
        for j in range(k + 1):
            transitions.append((j * n + x, a, j * n + y))
        for j in range(k):
            transitions.append((j * n + x, a, (j + 1) * n + y))
    initial = [k * n + i for i in lts.initial]
    return Lts((k + 1) * n, lts.labels, transitions, initial)
