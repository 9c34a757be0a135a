"""
Bounds on conjugacy-invariant word norms in free groups

Upper bounds come from explicit decompositions into conjugates of the
generating set, found by a bounded meet-in-the-middle search. Lower bounds
come from word norms in finite quotients and from the abelianization.
When both sides meet the value is exact.

With relators, the same machinery bounds the norm of the coset wN: upper
bounds rewrite w by products of relator conjugates, lower bounds only use
probes that kill every relator.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import CertificateError, ContractError, RankMismatchError
from .groups import ElementSet, QuotientSpec, apply_word, kills
from .words import (
    AbelianVector,
    ReducedWord,
    SymmetricWordSet,
    abelianize,
    ball_size,
    enumerate_ball,
)

logger = logging.getLogger(__name__)

ABELIANIZATION = "abelianization"


@dataclass(frozen=True)
class SearchBudget:
    """Limits of the decomposition and abelianization searches."""

    max_factors: int = 4
    max_conjugator_length: int = 2
    max_relator_factors: int = 1
    max_candidates: int = 250_000
    max_ball_size: int = 200_000

    def __post_init__(self) -> None:
        if min(self.max_factors, self.max_conjugator_length, self.max_candidates, self.max_ball_size) <= 0:
            raise ContractError("search budgets must be positive", invariant="budget")
        if self.max_relator_factors < 0:
            raise ContractError("relator factor budget is negative", invariant="budget")


@dataclass(frozen=True)
class Factor:
    """The conjugate base^conjugator = conjugator^-1 base conjugator."""

    base: ReducedWord
    conjugator: ReducedWord

    @property
    def value(self) -> ReducedWord:
        return self.base.conjugate(self.conjugator)

    def sort_key(self) -> Tuple:
        return (self.value.shortlex_key(), self.base.shortlex_key(), self.conjugator.shortlex_key())

    def __str__(self) -> str:
        if self.conjugator.is_identity():
            return f"({self.base})"
        return f"({self.base})^({self.conjugator})"

    def to_record(self) -> Dict[str, str]:
        return {"base": str(self.base), "conjugator": str(self.conjugator)}


def _multiply_out(factors: Sequence[Factor], rank: int) -> ReducedWord:
    result = ReducedWord.identity(rank)
    for f in factors:
        result = result * f.value
    return result


@dataclass(frozen=True)
class NormBound:
    """Certified interval [lower, upper] for the norm of a word (or coset).

    Attributes:
        word: The bounded word
        lower: Certified lower bound
        upper: Certified upper bound, None when unknown
        certificate_up: Factors whose product, times the kernel part, is word
        kernel_certificate: Relator conjugates used to rewrite word modulo N
        certificate_low: Source of the lower bound
        relators: Relators of the coset mode, empty for plain words
    """

    word: ReducedWord
    lower: int = 0
    upper: Optional[int] = None
    certificate_up: Optional[Tuple[Factor, ...]] = None
    kernel_certificate: Tuple[Factor, ...] = ()
    certificate_low: str = "trivial"
    relators: Tuple[ReducedWord, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.lower < 0:
            raise ContractError("lower bound is negative", invariant="bounds")
        if self.upper is not None:
            if self.lower > self.upper:
                raise ContractError(
                    f"lower bound {self.lower} exceeds upper bound {self.upper} for {self.word}",
                    invariant="bounds",
                )
            if self.certificate_up is None:
                raise CertificateError(f"upper bound {self.upper} has no certificate")
        if self.certificate_up is not None:
            self.verify()

    def verify(self) -> None:
        """Re-multiply the certificate.

        Raises:
            CertificateError: the factors do not give the word
        """
        factors = self.certificate_up or ()
        if self.upper is None or len(factors) != self.upper:
            raise CertificateError(
                f"certificate has {len(factors)} factors for upper bound {self.upper}"
            )
        rank = self.word.rank
        allowed = {r for r in self.relators} | {r.inverse() for r in self.relators}
        for k in self.kernel_certificate:
            if k.base not in allowed:
                raise CertificateError(f"kernel factor {k} is not a relator conjugate")
        product = _multiply_out(factors, rank) * _multiply_out(self.kernel_certificate, rank)
        if product != self.word:
            raise CertificateError(f"certificate multiplies to {product}, not {self.word}")

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper

    def merge(self, other: "NormBound") -> "NormBound":
        """Tightest combination of two bounds on the same word."""
        if other.word != self.word:
            raise ContractError("bounds on different words", invariant="same-word")
        lower_source = self if self.lower >= other.lower else other
        upper_source = self
        if other.upper is not None and (self.upper is None or other.upper < self.upper):
            upper_source = other
        return NormBound(
            word=self.word,
            lower=lower_source.lower,
            upper=upper_source.upper,
            certificate_up=upper_source.certificate_up,
            kernel_certificate=upper_source.kernel_certificate,
            certificate_low=lower_source.certificate_low,
            relators=self.relators or other.relators,
        )

    def describe(self) -> str:
        upper = "unknown" if self.upper is None else str(self.upper)
        text = f"{self.word}: lower {self.lower} ({self.certificate_low}), upper {upper}"
        if self.certificate_up:
            text += " = " + " * ".join(str(f) for f in self.certificate_up)
        if self.kernel_certificate:
            text += " * [" + " * ".join(str(f) for f in self.kernel_certificate) + "]"
        if self.exact:
            text += " (exact)"
        return text

    def to_record(self) -> Dict[str, object]:
        return {
            "word": str(self.word),
            "lower": self.lower,
            "upper": "unknown" if self.upper is None else self.upper,
            "exact": self.exact,
            "certificate_up": (
                None
                if self.certificate_up is None
                else [f.to_record() for f in self.certificate_up]
            ),
            "kernel_certificate": [f.to_record() for f in self.kernel_certificate],
            "certificate_low": self.certificate_low,
            "relators": [str(r) for r in self.relators],
        }


def _check_ranks(w: ReducedWord, S: SymmetricWordSet, relators: Sequence[ReducedWord]) -> None:
    if S.rank != w.rank:
        raise RankMismatchError(f"word of rank {w.rank} with a generating set of rank {S.rank}")
    for r in relators:
        if r.rank != w.rank:
            raise RankMismatchError(f"relator {r} has rank {r.rank}, word has rank {w.rank}")


def conjugator_radius(rank: int, budget: SearchBudget) -> int:
    """Longest conjugator length whose ball fits max_ball_size."""
    radius = budget.max_conjugator_length
    while radius > 0 and ball_size(rank, radius) > budget.max_ball_size:
        radius -= 1
    if radius < budget.max_conjugator_length:
        logger.warning(
            f"Conjugator length {budget.max_conjugator_length} exceeds the ball cap "
            f"{budget.max_ball_size} in rank {rank}; searching conjugators up to length {radius}"
        )
    return radius


def conjugate_candidates(
    bases: Iterable[ReducedWord], rank: int, budget: SearchBudget
) -> List[Factor]:
    """Distinct conjugates base^u with |u| <= the conjugator budget, in shortlex order.

    The conjugator radius shrinks to the largest ball within max_ball_size.
    """
    radius = conjugator_radius(rank, budget)
    conjugators = enumerate_ball(rank, radius, budget.max_ball_size)
    best: Dict[ReducedWord, Factor] = {}
    for base in bases:
        for u in conjugators:
            factor = Factor(base, u)
            current = best.get(factor.value)
            if current is None or factor.sort_key() < current.sort_key():
                best[factor.value] = factor
    return sorted(best.values(), key=lambda f: f.sort_key())


class _ProductLevels:
    """P_j: words that are products of exactly j candidates, built lazily."""

    def __init__(self, candidates: List[Factor], rank: int, max_candidates: int):
        self.candidates = candidates
        self.max_candidates = max_candidates
        self.levels: List[Dict[ReducedWord, Tuple[Factor, ...]]] = [
            {ReducedWord.identity(rank): ()}
        ]
        self.truncated = False

    def get(self, j: int) -> Optional[Dict[ReducedWord, Tuple[Factor, ...]]]:
        while len(self.levels) <= j and not self.truncated:
            previous = self.levels[-1]
            if len(previous) * len(self.candidates) > self.max_candidates:
                self.truncated = True
                logger.debug(
                    f"Product level {len(self.levels)} would exceed {self.max_candidates} entries"
                )
                break
            level: Dict[ReducedWord, Tuple[Factor, ...]] = {}
            for word, factors in previous.items():
                for c in self.candidates:
                    product = word * c.value
                    if product not in level:
                        level[product] = factors + (c,)
            self.levels.append(level)
        return self.levels[j] if j < len(self.levels) else None

    def decompose(self, target: ReducedWord, k: int) -> Optional[Tuple[Factor, ...]]:
        """A k-factor decomposition of target, or None (also when out of budget)."""
        left_size, right_size = (k + 1) // 2, k // 2
        left = self.get(left_size)
        right = self.get(right_size)
        if left is None or right is None:
            return None
        for x, right_factors in right.items():
            left_factors = left.get(target * x.inverse())
            if left_factors is not None:
                return left_factors + right_factors
        return None


def _kernel_rewrites(
    relators: Sequence[ReducedWord], rank: int, budget: SearchBudget
) -> List[Tuple[ReducedWord, Tuple[Factor, ...]]]:
    """Products kappa of at most max_relator_factors relator conjugates."""
    rewrites: List[Tuple[ReducedWord, Tuple[Factor, ...]]] = [(ReducedWord.identity(rank), ())]
    if not relators or budget.max_relator_factors == 0:
        return rewrites
    bases = {r for r in relators if not r.is_identity()}
    bases |= {r.inverse() for r in bases}
    candidates = conjugate_candidates(sorted(bases, key=lambda r: r.shortlex_key()), rank, budget)
    seen = {ReducedWord.identity(rank)}
    frontier = list(rewrites)
    for _ in range(budget.max_relator_factors):
        extended = []
        for kappa, factors in frontier:
            for c in candidates:
                product = kappa * c.value
                if product not in seen:
                    seen.add(product)
                    extended.append((product, factors + (c,)))
                    if len(seen) > budget.max_candidates:
                        logger.debug("Kernel rewrite set truncated at the candidate budget")
                        return rewrites + extended
        rewrites.extend(extended)
        frontier = extended
    return rewrites


def upper_bound(
    w: ReducedWord,
    S: SymmetricWordSet,
    budget: Optional[SearchBudget] = None,
    relators: Sequence[ReducedWord] = (),
) -> NormBound:
    """Least number of conjugate factors found within the search budget.

    An exhausted budget yields an unknown upper bound, never an exception.
    """
    budget = budget or SearchBudget()
    _check_ranks(w, S, relators)
    relators = tuple(relators)
    rank = w.rank
    if w.is_identity():
        return NormBound(w, 0, 0, (), (), relators=relators)

    candidates = conjugate_candidates(S.sorted_words(), rank, budget)
    levels = _ProductLevels(candidates, rank, budget.max_candidates)
    rewrites = _kernel_rewrites(relators, rank, budget)

    for k in range(0, budget.max_factors + 1):
        for kappa, kernel_factors in rewrites:
            target = w * kappa.inverse()
            if k == 0:
                if target.is_identity():
                    return NormBound(w, 0, 0, (), kernel_factors, relators=relators)
                continue
            factors = levels.decompose(target, k)
            if factors is not None:
                logger.debug(f"Found {k}-factor decomposition of {w}")
                return NormBound(w, 0, k, factors, kernel_factors, relators=relators)

    logger.debug(f"No decomposition of {w} within budget (truncated={levels.truncated})")
    return NormBound(w, 0, None, relators=relators)


def abelianization_bound(
    w: ReducedWord, S: SymmetricWordSet, budget: Optional[SearchBudget] = None
) -> int:
    """Least k with abelianize(w) a sum of k vectors abelianize(s), s in S.

    Conjugation does not change the abelianization, so this bounds the
    norm from below. When the budget runs out before the target is
    reached, the last fully searched level plus one is returned.
    """
    budget = budget or SearchBudget()
    target = abelianize(w)
    if target.is_zero():
        return 0
    vectors = sorted(
        {abelianize(s).exponents for s in S if not abelianize(s).is_zero()}
    )
    if not vectors:
        return 0
    if all(sum(abs(a) for a in v) == 1 for v in vectors):
        units = {v for v in vectors}
        if all(
            tuple(1 if j == i else 0 for j in range(w.rank)) in units
            and tuple(-1 if j == i else 0 for j in range(w.rank)) in units
            for i, a in enumerate(target.exponents)
            if a
        ):
            return target.l1()

    steps = [AbelianVector(v) for v in vectors]
    reached: Set[Tuple[int, ...]] = {AbelianVector(tuple([0] * w.rank)).exponents}
    frontier = set(reached)
    max_level = max(target.l1(), budget.max_factors)
    for level in range(1, max_level + 1):
        frontier = {
            (AbelianVector(x) + step).exponents for x in frontier for step in steps
        } - reached
        if target.exponents in frontier:
            return level
        reached |= frontier
        if not frontier or len(reached) > budget.max_candidates:
            return level + 1
    return max_level + 1


def lower_bound(
    w: ReducedWord,
    S: SymmetricWordSet,
    probes: Sequence[QuotientSpec] = (),
    relators: Sequence[ReducedWord] = (),
    budget: Optional[SearchBudget] = None,
) -> NormBound:
    """Best lower bound from the abelianization and finite quotient probes.

    Probes not killing every relator are skipped; the abelianization only
    counts when every relator abelianizes to zero.
    """
    from .norms import word_norm

    _check_ranks(w, S, relators)
    relators = tuple(relators)
    best, source = 0, "trivial"
    if all(abelianize(r).is_zero() for r in relators):
        value = abelianization_bound(w, S, budget)
        if value > best:
            best, source = value, ABELIANIZATION

    for probe in probes:
        if probe.rank != w.rank:
            raise RankMismatchError(f"probe {probe.label} has rank {probe.rank}")
        if relators and not kills(probe, relators):
            logger.debug(f"Skipping probe {probe.label}: relators survive")
            continue
        G = probe.group
        images = ElementSet(G, [apply_word(probe, s) for s in S])
        table = word_norm(G, images, conjugacy_invariant=True, pad=True)
        value = int(table[apply_word(probe, w)])
        if value > best:
            best, source = value, probe.label
    return NormBound(w, best, None, certificate_low=source, relators=relators)


def estimate_norm(
    w: ReducedWord,
    S: SymmetricWordSet,
    budget: Optional[SearchBudget] = None,
    probes: Sequence[QuotientSpec] = (),
    relators: Sequence[ReducedWord] = (),
) -> NormBound:
    """Merged lower and upper bound; exact when they meet."""
    budget = budget or SearchBudget()
    low = lower_bound(w, S, probes, relators, budget)
    high = upper_bound(w, S, budget, relators)
    return low.merge(high)
