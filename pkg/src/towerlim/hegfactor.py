"""Finite-horizon calculus for the inverse limit of the free groups F_n.

Elements are truncated to coherent word sequences: one word per level,
with level i living in F_i and the deletion projection carrying each
level onto the one below.  The central operation splits such a sequence
into an ordered tail word (a loop class winding each circle a fixed
number of times, hence realizable in the wedge limit) times a levelwise
exponent-free remainder, certifying at the horizon that the remainder
lies in the inverse limit of the commutator subgroups.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import words
from .words import Word


@dataclass(frozen=True)
class CoherentWordSeq:
    """Words w_1..w_h with w_i in F_i and deletion(w_{i+1}) == w_i."""

    levels: tuple[Word, ...]

    def __post_init__(self) -> None:
        for i, w in enumerate(self.levels):
            if w.rank != i + 1:
                raise ValueError(f"level {i + 1} word must have rank {i + 1}, got {w.rank}")

    @property
    def horizon(self) -> int:
        return len(self.levels)

    def violations(self) -> list[int]:
        """Levels i where deletion of level i+1 disagrees with level i (1-based)."""
        bad = []
        for i in range(self.horizon - 1):
            proj = words.deletion(i + 2, i + 1).apply(self.levels[i + 1])
            if proj != self.levels[i]:
                bad.append(i + 1)
        return bad

    @property
    def is_coherent(self) -> bool:
        return not self.violations()


def coherent_from_top(top: Word) -> CoherentWordSeq:
    """Coherent sequence with the given top word, projections below."""
    levels = [top]
    for r in range(top.rank - 1, 0, -1):
        levels.append(words.deletion(r + 1, r).apply(levels[-1]))
    return CoherentWordSeq(tuple(reversed(levels)))


def validate_coherent(seq: CoherentWordSeq) -> list[int]:
    """Projection-compatibility violations, empty when coherent."""
    return seq.violations()


def exponent_profile(seq: CoherentWordSeq) -> tuple[int, ...]:
    """Exponent sum of each generator, read at the top level.

    Coherence makes entry i agree with the exponent sum computed at any
    level >= i, so the profile is the abelianized image in Z^horizon.
    """
    if not seq.is_coherent:
        raise ValueError("sequence is not coherent")
    if not seq.levels:
        return ()
    return words.exponent_vector(seq.levels[-1])


@dataclass(frozen=True)
class TailWord:
    """The ordered product x1^e1 x2^e2 ... with an implicit zero tail."""

    exponents: tuple[int, ...]

    def at_level(self, level: int) -> Word:
        letters: list[words.Letter] = []
        for i, e in enumerate(self.exponents[:level]):
            letters += [(i + 1, 1 if e > 0 else -1)] * abs(e)
        return words.reduce(letters, level)

    def as_sequence(self, horizon: int) -> CoherentWordSeq:
        return CoherentWordSeq(tuple(self.at_level(i + 1) for i in range(horizon)))

    def __str__(self) -> str:
        return str(self.at_level(len(self.exponents)))


def factor_tail_kernel(seq: CoherentWordSeq) -> tuple[TailWord, CoherentWordSeq]:
    """Split a coherent sequence as (tail word) * (exponent-free part).

    The tail word winds circle i exactly profile[i] times; the remainder
    k_i = g_i^-1 w_i then has zero exponent vector at every level, which
    certifies through the horizon that it is a coherent sequence of
    commutator-subgroup elements.  Reconstruction g_i * k_i == w_i holds
    levelwise by construction and is asserted.
    """
    profile = exponent_profile(seq)
    tail = TailWord(profile)
    kernel_levels = []
    for i, w in enumerate(seq.levels):
        g = tail.at_level(i + 1)
        k = g.inverse() * w
        if any(words.exponent_vector(k)):
            raise AssertionError("kernel part has a nonzero exponent vector")
        if g * k != w:
            raise AssertionError("factorization does not reconstruct the input")
        kernel_levels.append(k)
    return tail, CoherentWordSeq(tuple(kernel_levels))


@dataclass(frozen=True)
class OccurrenceReport:
    """Per-generator letter counts at the top level plus growth flags."""

    counts: tuple[int, ...]
    growth_flags: tuple[int, ...]  # generators whose counts keep strictly growing


def letter_occurrence_report(seq: CoherentWordSeq, window: int = 4) -> OccurrenceReport:
    """Occurrence counts at the horizon, flagging unbounded-growth patterns.

    A generator whose occurrence count strictly increases across the last
    ``window`` levels is flagged: such growth is incompatible with the
    letter appearing finitely often in a single limit loop, so membership
    of the sequence in the wedge fundamental group is doubtful.  Only a
    diagnostic; the full membership question is not decided here.
    """
    if not seq.is_coherent:
        raise ValueError("sequence is not coherent")
    h = seq.horizon
    counts_at = []
    for w in seq.levels:
        c = [0] * h
        for gen, _ in w.letters:
            c[gen - 1] += 1
        counts_at.append(c)
    top = tuple(counts_at[-1]) if counts_at else ()
    flags = []
    for g in range(h):
        first = max(g, h - window)
        run = [counts_at[j][g] for j in range(first, h)]
        if len(run) >= 2 and all(a < b for a, b in zip(run, run[1:])):
            flags.append(g + 1)
    return OccurrenceReport(top, tuple(flags))
