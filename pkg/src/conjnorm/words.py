"""
Free-group words

Exact arithmetic in finitely generated free groups. A word is a tuple of
nonzero signed integers: letter +i is the free generator x_{i-1} and -i
its inverse. Every word carries its rank so that words from free groups
of different rank cannot be mixed silently.
"""

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple

from .errors import MalformedWordError, RankMismatchError, ResourceLimitError

logger = logging.getLogger(__name__)

IDENTITY_TOKEN = "e"

_TOKEN = re.compile(r"[^\s,]+")


def _check_letters(letters: Sequence[int], rank: int) -> None:
    if rank < 1:
        raise MalformedWordError(f"rank must be positive, got {rank}")
    for position, letter in enumerate(letters):
        if isinstance(letter, bool) or not isinstance(letter, int):
            raise MalformedWordError(
                f"letter {letter!r} at position {position} is not an integer"
            )
        if letter == 0:
            raise MalformedWordError(f"letter 0 at position {position}")
        if abs(letter) > rank:
            raise MalformedWordError(
                f"letter {letter} at position {position} exceeds rank {rank}"
            )


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word of a rank-n free group.

    Use reduce_word() to build a word from an arbitrary letter sequence;
    the constructor only accepts letters that are already reduced.
    """

    letters: Tuple[int, ...]
    rank: int

    def __post_init__(self) -> None:
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        _check_letters(letters, self.rank)
        for j in range(len(letters) - 1):
            if letters[j] == -letters[j + 1]:
                raise MalformedWordError(
                    f"letters {letters[j]}, {letters[j + 1]} at position {j} cancel"
                )

    @classmethod
    def identity(cls, rank: int) -> "ReducedWord":
        return cls((), rank)

    @classmethod
    def generator(cls, index: int, rank: int) -> "ReducedWord":
        """The free generator x_index (0-based)."""
        return cls((index + 1,), rank)

    def __len__(self) -> int:
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def _check_rank(self, other: "ReducedWord") -> None:
        if not isinstance(other, ReducedWord):
            raise TypeError(f"expected a ReducedWord, got {type(other).__name__}")
        if other.rank != self.rank:
            raise RankMismatchError(
                f"words of rank {self.rank} and {other.rank} cannot be combined"
            )

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        self._check_rank(other)
        left, right = self.letters, other.letters
        # Cancel the overlap between the tail of left and the head of right
        cut = 0
        limit = min(len(left), len(right))
        while cut < limit and left[len(left) - 1 - cut] == -right[cut]:
            cut += 1
        return ReducedWord(left[: len(left) - cut] + right[cut:], self.rank)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(-letter for letter in reversed(self.letters)), self.rank)

    def conjugate(self, by: "ReducedWord") -> "ReducedWord":
        """The conjugate self^by = by^-1 * self * by."""
        self._check_rank(by)
        return by.inverse() * self * by

    def __pow__(self, exponent: int) -> "ReducedWord":
        base = self if exponent >= 0 else self.inverse()
        result = ReducedWord.identity(self.rank)
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def shortlex_key(self) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
        """Sort key: length first, then letters with x_i before x_i^-1."""
        return (len(self.letters), tuple((abs(a), 0 if a > 0 else 1) for a in self.letters))

    def max_generator(self) -> int:
        """Number of leading basis elements the word uses."""
        return max((abs(a) for a in self.letters), default=0)

    def __str__(self) -> str:
        if not self.letters:
            return IDENTITY_TOKEN
        return " ".join(str(a) for a in self.letters)


def reduce_word(letters: Iterable[int], rank: int) -> ReducedWord:
    """Freely reduce a raw letter sequence.

    Raises:
        MalformedWordError: letter 0 or a letter beyond the rank
    """
    raw = list(letters)
    _check_letters(raw, rank)
    stack: List[int] = []
    for letter in raw:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return ReducedWord(tuple(stack), rank)


def product(a: ReducedWord, b: ReducedWord) -> ReducedWord:
    return a * b


def inverse(a: ReducedWord) -> ReducedWord:
    return a.inverse()


def conjugate(a: ReducedWord, b: ReducedWord) -> ReducedWord:
    """a^b = b^-1 a b."""
    return a.conjugate(b)


def parse_word(text: str, rank: int) -> ReducedWord:
    """Parse "1 2 -1 -2" (or "e" / "" for the identity) into a reduced word."""
    stripped = str(text).strip()
    if stripped in ("", IDENTITY_TOKEN):
        return ReducedWord.identity(rank)
    letters: List[int] = []
    for match in _TOKEN.finditer(stripped):
        token = match.group(0)
        try:
            letters.append(int(token))
        except ValueError:
            raise MalformedWordError(
                f"'{token}' is not a signed integer letter", column=match.start() + 1
            ) from None
    return reduce_word(letters, rank)


@dataclass(frozen=True)
class SymmetricWordSet:
    """A finite inverse-closed set of nontrivial words."""

    words: frozenset
    rank: int

    def __post_init__(self) -> None:
        words = frozenset(self.words)
        object.__setattr__(self, "words", words)
        for word in words:
            if word.rank != self.rank:
                raise RankMismatchError(
                    f"word {word} has rank {word.rank}, set has rank {self.rank}"
                )
            if word.is_identity():
                raise MalformedWordError("the identity is not allowed in a generating set")
            if word.inverse() not in words:
                raise MalformedWordError(f"set is not closed under inverse: missing ({word})^-1")

    @classmethod
    def closure(cls, words: Iterable[ReducedWord], rank: int) -> "SymmetricWordSet":
        """Add inverses and drop the identity."""
        members = set()
        for word in words:
            if word.is_identity():
                continue
            members.add(word)
            members.add(word.inverse())
        return cls(frozenset(members), rank)

    @classmethod
    def standard_basis(cls, rank: int) -> "SymmetricWordSet":
        return cls.closure((ReducedWord.generator(i, rank) for i in range(rank)), rank)

    def sorted_words(self) -> List[ReducedWord]:
        return sorted(self.words, key=lambda w: w.shortlex_key())

    def __iter__(self) -> Iterator[ReducedWord]:
        return iter(self.sorted_words())

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self.words


@dataclass(frozen=True)
class AbelianVector:
    """Exponent-sum vector of a word."""

    exponents: Tuple[int, ...]

    def __add__(self, other: "AbelianVector") -> "AbelianVector":
        if len(other.exponents) != len(self.exponents):
            raise RankMismatchError("abelian vectors of different length")
        return AbelianVector(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __neg__(self) -> "AbelianVector":
        return AbelianVector(tuple(-a for a in self.exponents))

    def is_zero(self) -> bool:
        return not any(self.exponents)

    def l1(self) -> int:
        return sum(abs(a) for a in self.exponents)

    def __str__(self) -> str:
        return "(" + ", ".join(str(a) for a in self.exponents) + ")"


def abelianize(w: ReducedWord) -> AbelianVector:
    exponents = [0] * w.rank
    for letter in w.letters:
        exponents[abs(letter) - 1] += 1 if letter > 0 else -1
    return AbelianVector(tuple(exponents))


def ball_size(rank: int, n: int) -> int:
    """Number of reduced words of length <= n: 1 + sum 2r(2r-1)^(j-1)."""
    return 1 + sum(2 * rank * (2 * rank - 1) ** (j - 1) for j in range(1, n + 1))


def _alphabet(rank: int) -> List[int]:
    letters: List[int] = []
    for i in range(1, rank + 1):
        letters.extend((i, -i))
    return letters


def enumerate_ball(rank: int, n: int, cap: int = 200_000) -> List[ReducedWord]:
    """All reduced words of length <= n, in breadth-first (shortlex) order.

    Raises:
        ResourceLimitError: the ball holds more than cap words
    """
    if rank < 1:
        raise MalformedWordError(f"rank must be positive, got {rank}")
    if n < 0:
        raise MalformedWordError(f"radius must be non-negative, got {n}")
    size = ball_size(rank, n)
    if size > cap:
        raise ResourceLimitError("free-group ball size", cap, size)

    alphabet = _alphabet(rank)
    ball = [ReducedWord.identity(rank)]
    frontier: List[Tuple[int, ...]] = [()]
    for _ in range(n):
        extended: List[Tuple[int, ...]] = []
        for letters in frontier:
            for letter in alphabet:
                if letters and letters[-1] == -letter:
                    continue
                extended.append(letters + (letter,))
        ball.extend(ReducedWord(letters, rank) for letters in extended)
        frontier = extended
    logger.debug(f"Enumerated ball of radius {n} in rank {rank}: {len(ball)} words")
    return ball
