"""Finite labeled transition systems and their concrete pre/post operators.

The Aldebaran ``.aut`` text format is the on-disk representation::

    des (first_init, n_transitions, n_states)
    (src, "label", dst)
    ...

A sidecar ``NAME.init`` file (one decimal state id per line) overrides the
header's single initial state, since initial-state *sets* are part of the
model but ``.aut`` headers carry only one id.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, Sequence

from .statesets import StateSet, ids_from_mask, mask_from_ids

__all__ = [
    "Lts",
    "LtsError",
    "AutParseError",
    "parse_aut",
    "serialize_aut",
    "load_lts",
    "save_lts",
    "post_a",
    "pre_a",
    "post_star",
]


class LtsError(ValueError):
    """Invalid transition-system construction or use."""


class AutParseError(LtsError):
    """Malformed ``.aut`` input; carries a 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_HEADER = re.compile(r"^des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_TRANS = re.compile(r'^\(\s*(\d+)\s*,\s*"([^"]*)"\s*,\s*(\d+)\s*\)\s*$')


class Lts:
    """Immutable finite LTS with dense state indices and dual adjacency.

    ``fwd[a][x]`` is the sorted tuple of a-successors of ``x`` and
    ``bwd[a][y]`` the sorted tuple of a-predecessors of ``y``; the two views
    always describe the same transition set.
    """

    def __init__(
        self,
        n_states: int,
        labels: Sequence[str],
        transitions: Iterable[tuple[int, int, int]],
        initial: Iterable[int],
    ):
        if n_states < 0:
            raise LtsError("negative state count")
        if len(set(labels)) != len(labels):
            raise LtsError("duplicate label strings")
        self.n_states = n_states
        self.labels = tuple(labels)
        n_labels = len(self.labels)

        seen: set[tuple[int, int, int]] = set()
        fwd: list[list[list[int]]] = [[[] for _ in range(n_states)] for _ in range(n_labels)]
        bwd: list[list[list[int]]] = [[[] for _ in range(n_states)] for _ in range(n_labels)]
        count = 0
        for x, a, y in transitions:
            if not (0 <= x < n_states and 0 <= y < n_states):
                raise LtsError(f"transition endpoint out of range: ({x}, {a}, {y})")
            if not 0 <= a < n_labels:
                raise LtsError(f"label index out of range: ({x}, {a}, {y})")
            if (x, a, y) in seen:
                continue  # the transition relation is a set
            seen.add((x, a, y))
            fwd[a][x].append(y)
            bwd[a][y].append(x)
            count += 1
        self.n_transitions = count
        self.fwd = tuple(tuple(tuple(sorted(row)) for row in per_label) for per_label in fwd)
        self.bwd = tuple(tuple(tuple(sorted(row)) for row in per_label) for per_label in bwd)

        init_ids = sorted(set(initial))
        if init_ids and not (0 <= init_ids[0] and init_ids[-1] < n_states):
            raise LtsError("initial state out of range")
        self.initial = StateSet.of(n_states, init_ids)

        self._full_mask = (1 << n_states) - 1
        # lazy per-(label, state) successor masks and value-keyed pre memo
        self._fwd_masks: list[dict[int, int]] = [{} for _ in range(n_labels)]
        self._pre_memo: dict[tuple[int, int], int] = {}
        self._post_all_memo: dict[int, int] = {}
        self._pre_kernels: list = [None] * n_labels  # sparse matvec, built lazily

    # -- identity ---------------------------------------------------------

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LtsError(f"unknown label {label!r}") from None

    def transitions(self) -> list[tuple[int, int, int]]:
        """All (src, label, dst) triples, sorted canonically."""
        out = []
        for a, per_label in enumerate(self.fwd):
            for x, row in enumerate(per_label):
                for y in row:
                    out.append((x, a, y))
        out.sort()
        return out

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Lts)
            and self.n_states == other.n_states
            and self.labels == other.labels
            and self.fwd == other.fwd
            and self.initial == other.initial
        )

    def __repr__(self) -> str:
        return f"Lts(states={self.n_states}, labels={len(self.labels)}, transitions={self.n_transitions})"

    # -- mask-level operators (engine plumbing) ----------------------------

    def fwd_mask(self, a: int, x: int) -> int:
        cache = self._fwd_masks[a]
        m = cache.get(x)
        if m is None:
            m = mask_from_ids(self.fwd[a][x])
            cache[x] = m
        return m

    def post_all_mask(self, x: int) -> int:
        """Successors of ``x`` under every label, as a mask."""
        m = self._post_all_memo.get(x)
        if m is None:
            m = 0
            for a in range(len(self.labels)):
                m |= self.fwd_mask(a, x)
            self._post_all_memo[x] = m
        return m

    def _pre_kernel(self, a: int):
        """scipy boolean matvec for pre_a on large systems; None if unusable."""
        kernel = self._pre_kernels[a]
        if kernel is None:
            try:
                import numpy as np
                from scipy.sparse import csr_matrix
            except ImportError:
                kernel = False
            else:
                rows: list[int] = []
                cols: list[int] = []
                for x, row in enumerate(self.fwd[a]):
                    rows.extend([x] * len(row))
                    cols.extend(row)
                nbytes = (self.n_states + 7) // 8
                matrix = csr_matrix(
                    (np.ones(len(rows), dtype=np.int32), (rows, cols)),
                    shape=(self.n_states, self.n_states),
                )
                kernel = (np, matrix, nbytes)
            self._pre_kernels[a] = kernel
        return kernel or None

    def pre_mask_raw(self, a: int, mask: int) -> int:
        """pre_a of a mask-coded set, computed fresh (no memo)."""
        if self.n_states > 512:
            kernel = self._pre_kernel(a)
            if kernel is not None:
                np, matrix, nbytes = kernel
                bits = np.unpackbits(
                    np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8),
                    bitorder="little",
                )[: self.n_states]
                hits = matrix.dot(bits) > 0
                packed = np.packbits(hits, bitorder="little")
                return int.from_bytes(packed.tobytes(), "little")
        bwd_a = self.bwd[a]
        ids: list[int] = []
        for y in ids_from_mask(mask):
            ids.extend(bwd_a[y])
        return mask_from_ids(ids)

    def pre_mask(self, a: int, mask: int) -> int:
        """pre_a of a mask-coded set, memoized by the set value."""
        key = (a, mask)
        out = self._pre_memo.get(key)
        if out is None:
            out = self.pre_mask_raw(a, mask)
            self._pre_memo[key] = out
            if len(self._pre_memo) > 200_000:
                self._pre_memo.clear()
        return out

    def post_mask(self, a: int, mask: int) -> int:
        fwd_a = self.fwd[a]
        ids: list[int] = []
        for x in ids_from_mask(mask):
            ids.extend(fwd_a[x])
        return mask_from_ids(ids)


# -- the three §2-style operators ------------------------------------------


def post_a(lts: Lts, a: int, xs: StateSet) -> StateSet:
    """States reachable from ``xs`` by one a-transition."""
    return StateSet(lts.n_states, lts.post_mask(a, xs.mask))


def pre_a(lts: Lts, a: int, ys: StateSet) -> StateSet:
    """States with an a-transition into ``ys``."""
    return StateSet(lts.n_states, lts.pre_mask(a, ys.mask))


def post_star(lts: Lts) -> StateSet:
    """Least fixpoint of X -> I u post(X), by worklist."""
    seen = lts.initial.mask
    work = lts.initial.to_ids()
    while work:
        x = work.pop()
        succ = lts.post_all_mask(x) & ~seen
        if succ:
            seen |= succ
            rest = succ
            while rest:
                low = rest & -rest
                work.append(low.bit_length() - 1)
                rest ^= low
    return StateSet(lts.n_states, seen)


# -- Aldebaran format --------------------------------------------------------


def parse_aut(text: str) -> Lts:
    """Parse ``.aut`` text into an Lts (initial = the header's first_init)."""
    lines = text.splitlines()
    header_idx = None
    for idx, line in enumerate(lines):
        if line.strip():
            header_idx = idx
            break
    if header_idx is None:
        raise AutParseError("empty input, expected 'des (i, t, s)' header", 1)
    m = _HEADER.match(lines[header_idx].strip())
    if not m:
        raise AutParseError("malformed header, expected 'des (i, t, s)'", header_idx + 1)
    first_init, n_trans, n_states = (int(g) for g in m.groups())
    if first_init >= n_states and n_states > 0:
        raise AutParseError(f"initial state {first_init} out of range [0, {n_states})", header_idx + 1)

    labels: list[str] = []
    label_ids: dict[str, int] = {}
    transitions: list[tuple[int, int, int]] = []
    for idx in range(header_idx + 1, len(lines)):
        line = lines[idx].strip()
        if not line:
            continue
        tm = _TRANS.match(line)
        if not tm:
            raise AutParseError("malformed transition, expected '(src, \"label\", dst)'", idx + 1)
        src, label, dst = int(tm.group(1)), tm.group(2), int(tm.group(3))
        if src >= n_states or dst >= n_states:
            raise AutParseError(f"state id out of range [0, {n_states})", idx + 1)
        a = label_ids.get(label)
        if a is None:
            a = len(labels)
            label_ids[label] = a
            labels.append(label)
        transitions.append((src, a, dst))
    if len(transitions) != n_trans:
        raise AutParseError(
            f"header declares {n_trans} transitions but {len(transitions)} were given",
            header_idx + 1,
        )
    initial = [first_init] if n_states > 0 else []
    return Lts(n_states, labels, transitions, initial)


def serialize_aut(lts: Lts) -> tuple[str, str | None]:
    """Canonical ``.aut`` text plus sidecar text when |initial| != 1.

    Transitions are sorted by (src, label, dst); labels keep their interned
    spelling, so parse -> serialize -> parse is the identity.
    """
    init_ids = lts.initial.to_ids()
    first = init_ids[0] if init_ids else 0
    rows = [f"des ({first},{lts.n_transitions},{lts.n_states})"]
    for x, a, y in lts.transitions():
        rows.append(f'({x},"{lts.labels[a]}",{y})')
    aut = "\n".join(rows) + "\n"
    sidecar = None
    if init_ids != [first]:
        sidecar = "\n".join(str(i) for i in init_ids) + "\n"
    return aut, sidecar


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".init")


def load_lts(path: str | Path) -> Lts:
    """Load an ``.aut`` file, applying a ``.init`` sidecar when present."""
    path = Path(path)
    lts = parse_aut(path.read_text())
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        ids = []
        for ln, raw in enumerate(sidecar.read_text().splitlines(), start=1):
            raw = raw.strip()
            if not raw:
                continue
            if not raw.isdigit():
                raise LtsError(f"{sidecar}: line {ln}: expected a decimal state id")
            i = int(raw)
            if i >= lts.n_states:
                raise LtsError(f"{sidecar}: line {ln}: state {i} out of range")
            ids.append(i)
        lts = Lts(lts.n_states, lts.labels, lts.transitions(), ids)
    return lts


def save_lts(lts: Lts, path: str | Path) -> None:
    path = Path(path)
    aut, sidecar = serialize_aut(lts)
    path.write_text(aut)
    side = _sidecar_path(path)
    if sidecar is not None:
        side.write_text(sidecar)
    elif side.exists():
        side.unlink()
