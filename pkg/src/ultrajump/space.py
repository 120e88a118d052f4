"""Truncated ultrametric tree spaces.

A space is a finite rooted tree with levels ``k_min .. K``.  Level ``k_min``
holds the single root, level ``K`` holds the leaves; a node at level ``k``
stands for the ball of radius ``q**-k`` around any leaf below it.  Leaves are
addressed by digit words ``(d_{k_min+1}, ..., d_K)``, one digit per level
step, and the metric between two leaves is ``q**-r`` where ``r`` is the first
digit position at which they differ.  That metric satisfies the strong
triangle inequality by construction, so balls of equal radius are either
disjoint or identical and each level partitions the leaf set.

Ball masses come from per-node child fractions and are carried in exact
rational arithmetic alongside float mirrors, so additivity of the measure
(parent mass == sum of child masses) is exact, not approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    ConfigParseError,
    EmptyWindow,
    InconsistentWeights,
    LevelOrderViolation,
    LevelOutOfWindow,
    MixedSpaces,
    NonPositiveMass,
)

__all__ = [
    "BallAddress",
    "TreeSpace",
    "QuotientLevel",
    "build_space",
    "separation_index",
    "project",
    "enumerate_level",
]


def _to_fraction(x) -> Fraction:
    """Parse a mass/weight value exactly; decimal strings keep decimal meaning."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float) or isinstance(x, str):
        return Fraction(str(x))
    raise ConfigParseError(f"cannot interpret {x!r} as an exact number")


@dataclass(frozen=True)
class BallAddress:
    """A node of the tree: a level plus the digit word leading down to it.

    Two addresses at the same level are equal iff their digit words are
    equal.  The owning space is carried for validation but excluded from
    equality and hashing.
    """

    level: int
    digits: tuple[int, ...]
    space: "TreeSpace" = field(repr=False, compare=False)

    def word(self) -> str:
        """Digit word as a string, '' for the root; dot-separated if any digit > 9."""
        if any(d > 9 for d in self.digits):
            return ".".join(str(d) for d in self.digits)
        return "".join(str(d) for d in self.digits)

    def __str__(self) -> str:
        return self.word() or "<root>"


class TreeSpace:
    """Finite multibranching tree with exact ball masses.

    Nodes at each level are kept in lexicographic digit order; children of
    one node occupy a contiguous index range at the next level, and so do
    the leaves below any node.  All query methods are read-only, the object
    is immutable after construction and safe to share between workers.
    """

    def __init__(self, q: float, window: tuple[int, int],
                 children: list[list[int]], weights: list[list[list[Fraction]]],
                 root_mass: Fraction):
        k_min, k_max = int(window[0]), int(window[1])
        if k_min >= k_max:
            raise EmptyWindow(f"window [{k_min}, {k_max}] has no refinement step")
        if not q > 1:
            raise ValueError(f"base q must exceed 1, got {q}")
        if root_mass <= 0:
            raise NonPositiveMass(f"root mass {root_mass} is not positive")

        self.q = float(q)
        self.q_exact = Fraction(str(q))
        self.k_min = k_min
        self.k_max = k_max
        depth = k_max - k_min
        self._sep_matrix: np.ndarray | None = None

        if len(children) != depth:
            raise ConfigParseError(
                f"branching specifies {len(children)} levels, window needs {depth}")

        # Per level-offset L: node count, parent/child indices, digit, masses.
        self._sizes: list[int] = [1]
        self._parent: list[np.ndarray | None] = [None]
        self._digit: list[np.ndarray | None] = [None]
        self._child_start: list[np.ndarray | None] = []
        self._n_children: list[np.ndarray | None] = []
        self._mass_exact: list[list[Fraction]] = [[root_mass]]

        for L in range(depth):
            counts = children[L]
            if len(counts) != self._sizes[L]:
                raise ConfigParseError(
                    f"level {k_min + L}: {len(counts)} child counts for "
                    f"{self._sizes[L]} nodes")
            if any(c < 1 for c in counts):
                raise ConfigParseError("every node needs at least one child")
            if max(counts) < 2:
                raise ConfigParseError(
                    f"level {k_min + L} never branches; quotient would be trivial")
            starts = np.zeros(len(counts), dtype=np.int64)
            if len(counts) > 1:
                starts[1:] = np.cumsum(counts[:-1])
            n_next = int(sum(counts))
            parent = np.repeat(np.arange(len(counts), dtype=np.int64), counts)
            digit = np.concatenate([np.arange(c, dtype=np.int64) for c in counts])

            w_level = weights[L]
            masses_next: list[Fraction] = []
            for i, c in enumerate(counts):
                w = w_level[i]
                if len(w) != c:
                    raise InconsistentWeights(
                        f"node {i} at level {k_min + L}: {len(w)} weights for {c} children")
                if any(f <= 0 for f in w):
                    raise NonPositiveMass(
                        f"node {i} at level {k_min + L} has a non-positive child fraction")
                if sum(w) != 1:
                    raise InconsistentWeights(
                        f"node {i} at level {k_min + L}: child fractions sum to {sum(w)}")
                m = self._mass_exact[L][i]
                masses_next.extend(m * f for f in w)

            self._sizes.append(n_next)
            self._parent.append(parent)
            self._digit.append(digit)
            self._child_start.append(starts)
            self._n_children.append(np.asarray(counts, dtype=np.int64))
            self._mass_exact.append(masses_next)
        self._child_start.append(None)
        self._n_children.append(None)

        self._mass = [np.array([float(m) for m in ms]) for ms in self._mass_exact]

        # Digit words per node and leaf->ancestor index tables.
        self._words: list[list[tuple[int, ...]]] = [[()]]
        for L in range(1, depth + 1):
            prev = self._words[L - 1]
            par, dig = self._parent[L], self._digit[L]
            self._words.append([prev[par[i]] + (int(dig[i]),)
                                for i in range(self._sizes[L])])
        self._word_index = [{w: i for i, w in enumerate(ws)} for ws in self._words]

        anc = [np.arange(self._sizes[depth], dtype=np.int64)]
        for L in range(depth, 0, -1):
            anc.append(self._parent[L][anc[-1]])
        anc.reverse()
        self._leaf_ancestor = anc  # leaf_ancestor[L][leaf] = node index at offset L

        # Leaves below node i at offset L form the range leaf_span[L][i] .. [i+1].
        self._leaf_span: list[np.ndarray] = []
        for L in range(depth + 1):
            bounds = np.searchsorted(anc[L], np.arange(self._sizes[L] + 1))
            self._leaf_span.append(bounds)

    # -- basic geometry -----------------------------------------------------

    @property
    def window(self) -> tuple[int, int]:
        return (self.k_min, self.k_max)

    @property
    def depth(self) -> int:
        return self.k_max - self.k_min

    @property
    def levels(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def _offset(self, k: int) -> int:
        if not (self.k_min <= k <= self.k_max):
            raise LevelOutOfWindow(
                f"level {k} outside window [{self.k_min}, {self.k_max}]")
        return k - self.k_min

    def level_size(self, k: int) -> int:
        return self._sizes[self._offset(k)]

    @property
    def n_leaves(self) -> int:
        return self._sizes[self.depth]

    def address(self, k: int, index: int) -> BallAddress:
        return BallAddress(k, self._words[self._offset(k)][index], self)

    def index_of(self, addr: BallAddress) -> int:
        if addr.space is not self:
            raise MixedSpaces("address belongs to a different space")
        return self._word_index[self._offset(addr.level)][addr.digits]

    def parse_address(self, k: int, word: str) -> BallAddress:
        digits = () if word in ("", "<root>") else (
            tuple(int(d) for d in word.split(".")) if "." in word
            else tuple(int(c) for c in word))
        L = self._offset(k)
        if digits not in self._word_index[L]:
            raise ConfigParseError(f"no ball '{word}' at level {k}")
        return BallAddress(k, digits, self)

    def leaves(self) -> list[BallAddress]:
        return [BallAddress(self.k_max, w, self) for w in self._words[self.depth]]

    # -- masses -------------------------------------------------------------

    def masses(self, k: int) -> np.ndarray:
        return self._mass[self._offset(k)]

    def masses_exact(self, k: int) -> list[Fraction]:
        return self._mass_exact[self._offset(k)]

    @property
    def total_mass(self) -> float:
        return float(self._mass_exact[0][0])

    # -- projections and sections --------------------------------------------

    def ancestor_index(self, leaf_index: int, k: int) -> int:
        return int(self._leaf_ancestor[self._offset(k)][leaf_index])

    def ancestor_indices(self, k: int) -> np.ndarray:
        """Vector of level-k ancestor indices, one entry per leaf."""
        return self._leaf_ancestor[self._offset(k)]

    def leaf_span(self, k: int, index: int) -> tuple[int, int]:
        """Index range [start, stop) of the leaves below ball ``index`` at level k."""
        b = self._leaf_span[self._offset(k)]
        return int(b[index]), int(b[index + 1])

    def radius(self, k: int) -> float:
        return self.q ** (-k)

    def distance(self, x: BallAddress, y: BallAddress) -> float:
        r = separation_index(x, y)
        return 0.0 if r == math.inf else self.q ** (-r)


def separation_index(x: BallAddress, y: BallAddress) -> int | float:
    """First digit position at which two same-level addresses differ.

    Returns ``math.inf`` for equal addresses; the metric is ``q**-r``.
    Positions are labelled by level: the digit leading from level ``m-1``
    down to level ``m`` sits at position ``m``.
    """
    if x.space is not y.space:
        raise MixedSpaces("addresses from different spaces")
    if x.level != y.level:
        raise LevelOrderViolation(
            f"separation needs same-level addresses, got {x.level} and {y.level}")
    base = x.space.k_min + 1
    for pos, (a, b) in enumerate(zip(x.digits, y.digits)):
        if a != b:
            return base + pos
    return math.inf


def project(x: BallAddress, k: int) -> BallAddress:
    """Ancestor of ``x`` at level ``k``: truncate the digit word."""
    space = x.space
    space._offset(k)  # window check
    if k > x.level:
        raise LevelOrderViolation(f"cannot project level {x.level} down to finer level {k}")
    return BallAddress(k, x.digits[: k - space.k_min], space)


@dataclass(frozen=True)
class QuotientLevel:
    """All balls of one level, in canonical lexicographic order.

    ``section`` picks one representative leaf inside each ball; the default
    choice extends every address by zero digits.  Quantities reported by the
    rest of the package must not depend on that choice.
    """

    level: int
    members: tuple[BallAddress, ...]
    section: tuple[BallAddress, ...]

    @property
    def space(self) -> TreeSpace:
        return self.members[0].space

    def masses(self) -> np.ndarray:
        return self.space.masses(self.level)

    def index_of(self, addr: BallAddress) -> int:
        return self.space.index_of(addr)


def enumerate_level(space: TreeSpace, k: int,
                    section_rng: np.random.Generator | None = None) -> QuotientLevel:
    """Level-k quotient: members partition the leaves, plus a chosen section.

    With ``section_rng`` the representative leaf of each ball is drawn
    uniformly from the ball instead of the canonical zero-extension.
    """
    L = space._offset(k)
    members = tuple(space.address(k, i) for i in range(space._sizes[L]))
    leaves = space.leaves()
    reps = []
    for i in range(space._sizes[L]):
        lo, hi = space.leaf_span(k, i)
        pick = lo if section_rng is None else int(section_rng.integers(lo, hi))
        reps.append(leaves[pick])
    return QuotientLevel(k, members, tuple(reps))


def _normalize_branching(branching, depth: int, sizes_hint=None) -> list[list[int]]:
    """Accept an int, a per-level list, or per-level per-node lists."""
    if isinstance(branching, int):
        out, size = [], 1
        for _ in range(depth):
            out.append([branching] * size)
            size *= branching
        return out
    if not isinstance(branching, (list, tuple)) or len(branching) != depth:
        raise ConfigParseError(f"branching must cover {depth} levels")
    out, size = [], 1
    for entry in branching:
        if isinstance(entry, int):
            out.append([entry] * size)
            size *= entry
        else:
            row = [int(c) for c in entry]
            if len(row) != size:
                raise ConfigParseError(
                    f"branching row of length {len(row)} for {size} nodes")
            out.append(row)
            size = sum(row)
    return out


def _normalize_weights(weights, children: list[list[int]]) -> list[list[list[Fraction]]]:
    if weights in (None, "uniform"):
        return [[[Fraction(1, c)] * c for c in row] for row in children]
    out = []
    if len(weights) != len(children):
        raise ConfigParseError("weights must cover the same levels as branching")
    for row_w, row_c in zip(weights, children):
        if len(row_w) != len(row_c):
            raise InconsistentWeights("one weight list per node is required")
        out.append([[_to_fraction(f) for f in w] for w in row_w])
    return out


def build_space(config: dict) -> TreeSpace:
    """Build a space from a config mapping.

    ``{"type": "padic", "p": 2, "window": [0, 2]}`` gives the base-p ring
    truncation: p children per node, uniform mass split, level-0 balls of
    mass one.  ``{"type": "tree", "q": ..., "window": ..., "branching": ...,
    "weights": ..., "root_mass": ...}`` spells everything out.
    """
    try:
        kind = config["type"]
        window = (int(config["window"][0]), int(config["window"][1]))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ConfigParseError(f"bad space config: {exc}") from exc
    if window[0] >= window[1]:
        raise EmptyWindow(f"window {list(window)} has no refinement step")
    depth = window[1] - window[0]

    if kind == "padic":
        p = int(config.get("p", 2))
        if p < 2:
            raise ConfigParseError(f"p-adic base must be >= 2, got {p}")
        children = _normalize_branching(p, depth)
        weights = _normalize_weights(None, children)
        root_mass = Fraction(p) ** (-window[0])
        return TreeSpace(float(p), window, children, weights, root_mass)

    if kind == "tree":
        if "q" not in config or "branching" not in config:
            raise ConfigParseError("tree config needs 'q' and 'branching'")
        children = _normalize_branching(config["branching"], depth)
        weights = _normalize_weights(config.get("weights"), children)
        root_mass = _to_fraction(config.get("root_mass", 1))
        return TreeSpace(float(config["q"]), window, children, weights, root_mass)

    raise ConfigParseError(f"unknown space type {kind!r}")
