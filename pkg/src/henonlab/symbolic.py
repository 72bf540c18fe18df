"""Binary symbol sequences, the shift, word counting and entropy estimates.

Bounded orbits in the full-horseshoe regime are coded by the sign of
Re(x) along the orbit; the coded sequences form the full 2-shift, so the
number S(n) of admissible length-n words grows like 2^n and the word
entropy lim (1/n) log S(n) equals log 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .dynamics import MapParams, PointC2, Region, classify_region, henon_apply, \
    henon_inverse, is_horseshoe_regime
from .errors import CodingError, ContractError

# Support cutoff for metric sums over bi-infinite sequences; the tail beyond
# |j| = 64 is bounded by 2^-63, beneath double resolution of the sum.
_METRIC_CUTOFF = 64

ANCHOR_MARK = "."


@dataclass(frozen=True)
class SymbolWord:
    """Finite block of symbols; position j maps to bits[anchor + j]."""

    bits: tuple[int, ...]
    anchor: int = 0

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ContractError("symbols must be 0 or 1")
        if not 0 <= self.anchor <= len(self.bits):
            raise ContractError("anchor outside the word")

    def __len__(self) -> int:
        return len(self.bits)

    def support(self) -> range:
        return range(-self.anchor, len(self.bits) - self.anchor)

    def symbol(self, j: int) -> int:
        if j not in self.support():
            raise ContractError(f"position {j} outside support")
        return self.bits[self.anchor + j]

    def to_text(self) -> str:
        s = "".join(str(b) for b in self.bits)
        return s[: self.anchor] + ANCHOR_MARK + s[self.anchor:]

    @classmethod
    def from_text(cls, text: str) -> "SymbolWord":
        if text.count(ANCHOR_MARK) != 1:
            raise ContractError("word text needs exactly one anchor mark")
        head, tail = text.split(ANCHOR_MARK)
        digits = head + tail
        if not digits or set(digits) - {"0", "1"}:
            raise ContractError(f"not a binary word: {text!r}")
        return cls(tuple(int(c) for c in digits), anchor=len(head))


@dataclass(frozen=True)
class PeriodicSequence:
    """Bi-infinite periodic extension of a word; s_j = bits[(anchor + j) mod p]."""

    word: SymbolWord

    def __post_init__(self):
        if len(self.word) == 0:
            raise ContractError("empty period block")

    @property
    def period(self) -> int:
        return len(self.word)

    def symbol(self, j: int) -> int:
        p = self.period
        return self.word.bits[(self.word.anchor + j) % p]

    def minimal_period(self) -> int:
        p = self.period
        for d in range(1, p + 1):
            if p % d == 0 and all(self.symbol(j) == self.symbol(j + d) for j in range(p)):
                return d
        return p

    def unroll(self, lo: int, hi: int) -> SymbolWord:
        """Finite window over positions lo..hi-1."""
        if hi <= lo:
            raise ContractError("empty window")
        return SymbolWord(tuple(self.symbol(j) for j in range(lo, hi)), anchor=-lo)


def shift(s, k: int = 1):
    """Left shift by k: the new symbol at position j is the old one at j + k."""
    if isinstance(s, PeriodicSequence):
        p = s.period
        w = s.word
        return PeriodicSequence(SymbolWord(w.bits, anchor=(w.anchor + k) % p))
    new_anchor = s.anchor + k
    if not 0 <= new_anchor <= len(s.bits):
        raise ContractError("shift moves the anchor off the word")
    return SymbolWord(s.bits, anchor=new_anchor)


def sequence_metric(s, t) -> float:
    """Sum of |s_j - t_j| 2^-|j| over positions where both sequences are defined."""
    lo, hi = -_METRIC_CUTOFF, _METRIC_CUTOFF + 1
    for seq in (s, t):
        if isinstance(seq, SymbolWord):
            sup = seq.support()
            lo, hi = max(lo, sup.start), min(hi, sup.stop)
    total = 0.0
    for j in range(lo, hi):
        if s.symbol(j) != t.symbol(j):
            total += 2.0 ** (-abs(j))
    return total


def count_admissible_words(observed_orbits: Iterable, n: int) -> int:
    """Number of distinct length-n blocks occurring in the given sequences.

    Periodic sequences contribute their cyclic blocks (the window wraps
    around the period); finite words contribute plain sliding windows.
    """
    if n < 1:
        raise ContractError("block length must be >= 1")
    seen: set[tuple[int, ...]] = set()
    for s in observed_orbits:
        if isinstance(s, PeriodicSequence):
            ext = tuple(s.symbol(j) for j in range(s.period + n - 1))
            limit = s.period
        else:
            ext = s.bits
            limit = len(ext) - n + 1
        for i in range(max(limit, 0)):
            seen.add(ext[i: i + n])
    return len(seen)


@dataclass(frozen=True)
class EntropyEstimate:
    point: float
    slope: float
    n_max: int


def entropy_estimate(word_counts: Mapping[int, int], n_max: int) -> EntropyEstimate:
    """Entropy proxy (1/n_max) log S(n_max), plus the least-squares slope of
    log S over the last three block lengths as a trend check."""
    if n_max < 3:
        raise ContractError("need n_max >= 3 for a slope estimate")
    logs = {}
    for n in (n_max - 2, n_max - 1, n_max):
        if n not in word_counts:
            raise ContractError(f"word_counts missing n = {n}")
        if word_counts[n] < 1:
            raise ContractError(f"S({n}) must be positive")
        logs[n] = math.log(word_counts[n])
    return EntropyEstimate(
        point=logs[n_max] / n_max,
        slope=0.5 * (logs[n_max] - logs[n_max - 2]),
        n_max=n_max,
    )


def cylinder_mass(word: SymbolWord, level: int) -> Fraction:
    """Mass 4^-level of the itinerary box pinned down by a length-2*level word."""
    if level < 1:
        raise ContractError("level must be >= 1")
    if len(word) != 2 * level:
        raise ContractError(f"level-{level} box needs a word of length {2 * level}")
    return Fraction(1, 4 ** level)


@dataclass(frozen=True)
class CylinderMeasure:
    """Equal weight on the 2^(2n) level-n itinerary boxes."""

    level: int

    def __post_init__(self):
        if self.level < 1:
            raise ContractError("level must be >= 1")

    @property
    def box_count(self) -> int:
        return 4 ** self.level

    @property
    def weight_per_box(self) -> Fraction:
        return Fraction(1, self.box_count)

    def mass(self, word: SymbolWord) -> Fraction:
        return cylinder_mass(word, self.level)

    def total_mass(self) -> Fraction:
        return self.weight_per_box * self.box_count


def code_orbit(p: PointC2, m: MapParams, n_back: int, n_fwd: int) -> SymbolWord:
    """Itinerary of p over positions -n_back .. n_fwd-1; symbol 1 iff Re(x) >= 0.

    Every visited iterate must stay in the bidisk B; leaving it means p is
    not on the invariant set and has no itinerary.
    """
    if not is_horseshoe_regime(m):
        raise CodingError("sign coding is only validated in the horseshoe regime")
    if n_back < 0 or n_fwd < 0 or n_back + n_fwd < 1:
        raise ContractError("window must cover at least one position")
    bits = []
    q = p
    for _ in range(n_back):
        q = henon_inverse(q, m)
        if classify_region(q, m.R) is not Region.B:
            raise CodingError("backward orbit leaves the bidisk")
        bits.append(_sign_symbol(q))
    bits.reverse()
    q = p
    for j in range(n_fwd):
        if j > 0:
            q = henon_apply(q, m)
        if classify_region(q, m.R) is not Region.B:
            raise CodingError("forward orbit leaves the bidisk")
        bits.append(_sign_symbol(q))
    return SymbolWord(tuple(bits), anchor=n_back)


def _sign_symbol(q: PointC2) -> int:
    return 0 if q.x.real < 0 else 1


def necklaces(n: int) -> list[tuple[int, ...]]:
    """Binary necklaces of length n: lexicographically minimal cyclic words."""
    if n < 1:
        raise ContractError("length must be >= 1")
    out = []
    for v in range(2 ** n):
        bits = tuple((v >> (n - 1 - i)) & 1 for i in range(n))
        if bits == min(bits[i:] + bits[:i] for i in range(n)):
            out.append(bits)
    return out


def minimal_period(bits: tuple[int, ...]) -> int:
    n = len(bits)
    for d in range(1, n + 1):
        if n % d == 0 and all(bits[i] == bits[(i + d) % n] for i in range(n)):
            return d
    return n
