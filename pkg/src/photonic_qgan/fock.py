"""Fock states, click patterns and their canonical integer orderings.

Occupation vectors are plain tuples of ints, click patterns tuples of 0/1.
The integer assigned to an outcome is its position in the canonical list:

* photon-number-resolving (PNR): ascending lexicographic order of the
  occupation tuple, so states heavy in the rightmost modes come first;
* threshold: ascending binary value of the click pattern, leftmost mode
  being the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

FockState = tuple[int, ...]
ClickPattern = tuple[int, ...]


class BasisError(ValueError):
    """Raised when a state does not belong to the requested basis."""


@dataclass(frozen=True)
class FockBasis:
    """All Fock states of ``n`` photons in ``m`` modes, in canonical order."""

    m: int
    n: int
    states: tuple[FockState, ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._index:
            self._index.update({s: r for r, s in enumerate(self.states)})

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, r: int) -> FockState:
        return self.states[r]

    def __contains__(self, s) -> bool:
        return tuple(s) in self._index


def _compositions(m: int, n: int):
    # lexicographic: first mode takes 0..n, remainder recursively
    if m == 1:
        yield (n,)
        return
    for k in range(n + 1):
        for rest in _compositions(m - 1, n - k):
            yield (k, *rest)


@lru_cache(maxsize=None)
def enumerate_basis(m: int, n: int) -> FockBasis:
    """Return every state of ``n`` photons in ``m`` modes in lexicographic order.

    The index of a state in ``basis.states`` is its PNR integer.

    >>> enumerate_basis(3, 3).states[:3]
    ((0, 0, 3), (0, 1, 2), (0, 2, 1))
    """
    if m < 1:
        raise ValueError(f"mode count must be >= 1, got {m}")
    if n < 0:
        raise ValueError(f"photon count must be >= 0, got {n}")
    return FockBasis(m, n, tuple(_compositions(m, n)))


def state_index(basis: FockBasis, s) -> int:
    """Rank of ``s`` within ``basis``."""
    try:
        return basis._index[tuple(s)]
    except KeyError:
        raise BasisError(
            f"state {tuple(s)} is not in the basis of {basis.n} photons in {basis.m} modes"
        ) from None


def threshold_collapse(s) -> ClickPattern:
    """What a bank of click/no-click detectors reports for state ``s``."""
    return tuple(int(k > 0) for k in s)


def _pattern_value(p: ClickPattern) -> int:
    v = 0
    for bit in p:
        v = (v << 1) | bit
    return v


@lru_cache(maxsize=None)
def enumerate_patterns(m: int, n: int, lossy: bool = False) -> tuple[ClickPattern, ...]:
    """Distinguishable click patterns for ``n`` photons on ``m`` threshold detectors.

    Without loss every pattern with 1..min(n, m) clicks can occur. With loss a
    bunched event cannot be told apart from a lossy one, so only the
    collision-free patterns with exactly ``n`` clicks are kept.
    """
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    if lossy:
        if n > m:
            raise ValueError(
                f"lossy threshold detection needs n <= m (got n={n}, m={m}): "
                "no collision-free pattern exists"
            )
        clicks = [n]
    else:
        clicks = range(1, min(n, m) + 1)
    patterns = []
    for k in clicks:
        for on in combinations(range(m), k):
            patterns.append(tuple(int(i in on) for i in range(m)))
    return tuple(sorted(patterns, key=_pattern_value))


def basis_size(m: int, n: int) -> int:
    return comb(m + n - 1, n)


def format_state(s) -> str:
    """Ket label, e.g. ``|0,1,2>``."""
    return "|" + ",".join(str(k) for k in s) + ">"


def format_pattern(p) -> str:
    """Ket label with ``click`` for fired detectors, e.g. ``|0,click,click>``."""
    return "|" + ",".join("click" if b else "0" for b in p) + ">"
