"""
Norm tables on finite groups

Constructs and validates (pseudo-)norms on enumerated finite groups:
word norms over conjugacy closures, weighted word norms, restrictions,
quotient norms, chain norms, integer rounding, the word-norm recognizer
and metric balls. All values are exact Fractions.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import isprime

from .errors import (
    ChainNotDescendingError,
    ContractError,
    GenerationError,
    GroupMismatchError,
)
from .groups import (
    DEFAULT_MAX_ORDER,
    ElementSet,
    FiniteGroup,
    QuotientGroup,
    QuotientSpec,
    apply_word,
    class_union,
    coset_group,
    kernel_contained,
    subgroup,
)
from .models import Verdict, Violation, WitnessReport, format_value
from .words import ReducedWord

logger = logging.getLogger(__name__)

Value = Union[Fraction, int]


class DomainKind(Enum):
    RATIONALS = "rationals"
    INTEGERS = "integers"
    INTERVAL = "interval"


@dataclass(frozen=True)
class ValueDomain:
    """The value set of a norm: nonnegative rationals, naturals or [0, c]."""

    kind: DomainKind = DomainKind.RATIONALS
    bound: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.kind == DomainKind.INTERVAL:
            if self.bound is None or Fraction(self.bound) < 0:
                raise ContractError("an interval domain needs a bound >= 0", invariant="domain")
            object.__setattr__(self, "bound", Fraction(self.bound))

    @classmethod
    def interval(cls, bound: Value) -> "ValueDomain":
        return cls(DomainKind.INTERVAL, Fraction(bound))

    def __contains__(self, value: object) -> bool:
        if not isinstance(value, (int, Fraction)):
            return False
        v = Fraction(value)
        if v < 0:
            return False
        if self.kind == DomainKind.INTEGERS:
            return v.denominator == 1
        if self.kind == DomainKind.INTERVAL:
            return self.bound is not None and v <= self.bound
        return True

    def __str__(self) -> str:
        if self.kind == DomainKind.INTERVAL:
            return f"[0, {format_value(self.bound)}]"
        return self.kind.value


RATIONALS = ValueDomain(DomainKind.RATIONALS)
INTEGERS = ValueDomain(DomainKind.INTEGERS)


@dataclass(frozen=True, eq=False)
class NormTable:
    """A total map element id -> value on an enumerated group."""

    group: FiniteGroup
    values: Tuple[Fraction, ...]
    domain: ValueDomain = RATIONALS
    notes: Tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        values = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.group.order:
            raise ContractError(
                f"table has {len(values)} values for a group of order {self.group.order}",
                invariant="total",
            )

    def __getitem__(self, g: int) -> Fraction:
        return self.values[g]

    def __len__(self) -> int:
        return len(self.values)

    def is_integer_valued(self) -> bool:
        return all(v.denominator == 1 for v in self.values)

    def max_value(self) -> Fraction:
        return max(self.values)

    def scaled(self) -> Tuple[np.ndarray, int]:
        """Values times their common denominator, as exact integers."""
        common = math.lcm(*(v.denominator for v in self.values))
        ints = [v.numerator * (common // v.denominator) for v in self.values]
        if max(abs(i) for i in ints) < 2**61:
            return np.array(ints, dtype=np.int64), common
        return np.array(ints, dtype=object), common

    def rows(self) -> List[Tuple[int, str, str]]:
        """(id, element, value) rows for reports."""
        return [
            (g, self.group.format_element(g), format_value(v))
            for g, v in enumerate(self.values)
        ]


class _ViolationLog:
    """Collects violations, listing at most a few per condition."""

    def __init__(self, group: FiniteGroup, max_reported: int):
        self.group = group
        self.max_reported = max_reported
        self.violations: List[Violation] = []
        self.counts: Dict[str, int] = {}

    def add(self, condition: str, elements: Sequence[int], measured: Optional[Fraction]) -> None:
        self.counts[condition] = self.counts.get(condition, 0) + 1
        if self.counts[condition] <= self.max_reported:
            subject = tuple(self.group.format_element(int(g)) for g in elements)
            self.violations.append(Violation(condition, subject, measured))

    def notes(self) -> List[str]:
        return [
            f"{count - self.max_reported} further '{condition}' violations not listed"
            for condition, count in sorted(self.counts.items())
            if count > self.max_reported
        ]


def validate_norm(
    t: NormTable,
    require: str = "pseudo",
    require_invariant: bool = False,
    max_reported: int = 20,
) -> WitnessReport:
    """Check the norm axioms exhaustively.

    Args:
        t: Table to check
        require: "pseudo" for axioms (i)-(iii), "norm" to add definiteness
        require_invariant: Also check invariance under conjugation
        max_reported: Violations listed per condition

    Returns:
        Report naming a violating element, pair or triple per failure
    """
    if require not in ("pseudo", "norm"):
        raise ContractError(f"require must be 'pseudo' or 'norm', got '{require}'")
    G = t.group
    scaled, common = t.scaled()
    log = _ViolationLog(G, max_reported)

    for g, v in enumerate(t.values):
        if v not in t.domain:
            log.add("domain", [g], v)

    if t.values[G.identity] != 0:
        log.add("identity", [G.identity], t.values[G.identity])

    if require == "norm":
        for g in np.flatnonzero(scaled == 0):
            if g != G.identity:
                log.add("definite", [g], Fraction(0))

    inverse = G.inverses()
    for g in np.flatnonzero(scaled != scaled[inverse]):
        if g < inverse[g]:
            log.add("symmetry", [g, inverse[g]], abs(t.values[g] - t.values[inverse[g]]))

    for h in range(G.order):
        products = G.right_translation(h)
        excess = scaled[products] - (scaled + scaled[h])
        for x in np.flatnonzero(excess > 0):
            log.add("triangle", [x, h], Fraction(int(excess[x]), common))

    if require_invariant:
        for h in G.generator_ids:
            conj = G.conjugation(h)
            for g in np.flatnonzero(scaled[conj] != scaled):
                log.add("invariance", [g, h], abs(t.values[int(conj[g])] - t.values[g]))

    report = WitnessReport.from_violations(
        "norm-axioms",
        log.violations,
        parameters={
            "require": require,
            "invariant": str(require_invariant).lower(),
            "domain": str(t.domain),
        },
        notes=log.notes() + list(t.notes),
    )
    logger.debug(f"Validated norm on {G.name}: {report.verdict.value}")
    return report


def is_invariant(t: NormTable) -> bool:
    scaled, _ = t.scaled()
    return all(
        bool(np.array_equal(scaled[t.group.conjugation(h)], scaled))
        for h in t.group.generator_ids
    )


def is_definite(t: NormTable) -> bool:
    """Only the identity has value zero."""
    G = t.group
    return all(v != 0 for g, v in enumerate(t.values) if g != G.identity)


def _generating_ids(G: FiniteGroup, seeds: Sequence[int], conjugacy_invariant: bool) -> List[int]:
    base = {int(g) for g in seeds} | {G.inverse(int(g)) for g in seeds}
    if conjugacy_invariant:
        base = set(class_union(G, base))
    base.discard(G.identity)
    return sorted(base)


def word_norm(
    G: FiniteGroup,
    S: ElementSet,
    conjugacy_invariant: bool = True,
    pad: bool = False,
) -> NormTable:
    """Minimal number of factors from S-bar (or S and inverses) per element.

    Breadth-first search on the Cayley graph of the closed generating set.
    With pad, elements outside the generated subgroup get |G| + 1.

    Raises:
        GenerationError: the set does not generate G and pad is off
    """
    if S.group is not G:
        raise GroupMismatchError(f"generating set does not belong to {G.name}")
    gens = _generating_ids(G, list(S), conjugacy_invariant)
    translations = [G.right_translation(s) for s in gens]

    dist = np.full(G.order, -1, dtype=np.int64)
    dist[G.identity] = 0
    frontier = np.array([G.identity], dtype=np.int64)
    level = 0
    while frontier.size and translations:
        level += 1
        reached = np.unique(np.concatenate([t[frontier] for t in translations]))
        reached = reached[dist[reached] < 0]
        dist[reached] = level
        frontier = reached

    notes: Tuple[str, ...] = ()
    unreached = int(np.count_nonzero(dist < 0))
    if unreached:
        if not pad:
            raise GenerationError(
                f"the closed set generates a subgroup of order {G.order - unreached} "
                f"in {G.name} of order {G.order}"
            )
        dist[dist < 0] = G.order + 1
        notes = (f"padded {unreached} elements with value {G.order + 1}",)
    return NormTable(G, tuple(Fraction(int(d)) for d in dist), INTEGERS, notes)


@dataclass(frozen=True, eq=False)
class WeightedGenSet:
    """Generators with positive weights, closed under inverse with equal weight."""

    group: FiniteGroup
    entries: Tuple[Tuple[int, Fraction], ...]

    def __post_init__(self) -> None:
        entries = tuple((int(g), Fraction(w)) for g, w in self.entries)
        object.__setattr__(self, "entries", entries)
        for g, w in entries:
            if w <= 0:
                raise ContractError(f"weight {w} is not positive", invariant="positive-weights")
            if g == self.group.identity:
                raise ContractError("the identity cannot be a weighted generator")
        weights = self.weight_map()
        for g, w in weights.items():
            if weights.get(self.group.inverse(g)) != w:
                raise ContractError(
                    f"{self.group.format_element(g)} and its inverse have different weights",
                    invariant="inverse-closed",
                )

    @classmethod
    def symmetric(cls, group: FiniteGroup, weights: Mapping[int, Value]) -> "WeightedGenSet":
        """Add inverses, keeping the smaller weight of each pair."""
        merged: Dict[int, Fraction] = {}
        for g, w in weights.items():
            for x in (int(g), group.inverse(int(g))):
                merged[x] = min(merged.get(x, Fraction(w)), Fraction(w))
        return cls(group, tuple(sorted(merged.items())))

    def weight_map(self) -> Dict[int, Fraction]:
        weights: Dict[int, Fraction] = {}
        for g, w in self.entries:
            weights[g] = min(weights.get(g, w), w)
        return weights


def weighted_word_norm(
    G: FiniteGroup,
    gens: WeightedGenSet,
    conjugacy_invariant: bool = True,
    pad: bool = False,
) -> NormTable:
    """Least total weight of a factorization into (conjugates of) generators.

    Shortest weighted paths with a priority queue; ties broken by id.
    """
    if gens.group is not G:
        raise GroupMismatchError(f"weighted generators do not belong to {G.name}")
    weights = gens.weight_map()
    if conjugacy_invariant:
        closed: Dict[int, Fraction] = {}
        for g, w in sorted(weights.items()):
            for c in class_union(G, [g]):
                closed[c] = min(closed.get(c, w), w)
        weights = closed
    edges = [(G.right_translation(s), w) for s, w in sorted(weights.items())]

    dist: List[Optional[Fraction]] = [None] * G.order
    dist[G.identity] = Fraction(0)
    heap: List[Tuple[Fraction, int]] = [(Fraction(0), G.identity)]
    done = np.zeros(G.order, dtype=bool)
    while heap:
        d, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        for translation, w in edges:
            y = int(translation[x])
            candidate = d + w
            current = dist[y]
            if current is None or candidate < current:
                dist[y] = candidate
                heapq.heappush(heap, (candidate, y))

    notes: Tuple[str, ...] = ()
    missing = [g for g, d in enumerate(dist) if d is None]
    if missing:
        if not pad:
            raise GenerationError(
                f"weighted generators miss {len(missing)} elements of {G.name}"
            )
        padding = (G.order + 1) * max(weights.values(), default=Fraction(1))
        for g in missing:
            dist[g] = padding
        notes = (f"padded {len(missing)} elements with value {format_value(padding)}",)
    return NormTable(G, tuple(d if d is not None else Fraction(0) for d in dist), RATIONALS, notes)


def rescaled_kernel_norm(
    G: FiniteGroup,
    generators: ElementSet,
    kernel: ElementSet,
    eps: Value,
    pad: bool = True,
) -> NormTable:
    """Invariant word norm where kernel elements cost eps and the rest cost 1."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ContractError("eps must be positive", invariant="positive-eps")
    weights: Dict[int, Fraction] = {}
    for g in generators:
        if g != G.identity:
            weights[g] = Fraction(1)
    for h in kernel:
        if h != G.identity:
            weights[h] = min(weights.get(h, eps), eps)
    return weighted_word_norm(G, WeightedGenSet.symmetric(G, weights), True, pad)


def restrict_norm(t: NormTable, H: ElementSet) -> NormTable:
    """The norm restricted to a subgroup, as a table on that subgroup."""
    if H.group is not t.group:
        raise GroupMismatchError("subgroup does not belong to the table's group")
    inner = subgroup(t.group, H)
    return NormTable(
        inner.group, tuple(t.values[int(g)] for g in inner.embedding), t.domain, t.notes
    )


def quotient_norm(t: NormTable, N: Union[ElementSet, QuotientGroup]) -> NormTable:
    """Value of each coset is the minimum of t over the coset."""
    quotient = N if isinstance(N, QuotientGroup) else coset_group(t.group, N)
    if quotient.source is not t.group:
        raise GroupMismatchError("quotient was not taken of the table's group")
    best: List[Optional[Fraction]] = [None] * quotient.group.order
    for g, v in enumerate(t.values):
        q = quotient.project(g)
        current = best[q]
        if current is None or v < current:
            best[q] = v
    return NormTable(
        quotient.group, tuple(b if b is not None else Fraction(0) for b in best), t.domain
    )


def round_norm(t: NormTable) -> NormTable:
    """Integer values unchanged; a non-integer v becomes floor(v) + 1.

    The rounded table is validated with the axioms t itself satisfies
    (definiteness and invariance carry over).

    Raises:
        ContractError: the rounded table breaks a norm axiom, so t was no norm
    """
    rounded = NormTable(t.group, tuple(Fraction(math.ceil(v)) for v in t.values), INTEGERS, t.notes)
    report = validate_norm(rounded, "norm" if is_definite(t) else "pseudo", is_invariant(t))
    if not report.passed:
        raise ContractError(
            f"rounded table fails {', '.join(report.conditions())}", invariant="norm-axioms"
        )
    return rounded


def is_word_norm(t: NormTable) -> bool:
    """True iff t is the word norm over its unit ball minus the identity.

    Raises:
        ContractError: the table is not integer-valued
    """
    if not t.is_integer_valued():
        raise ContractError("the table is not integer-valued", invariant="integer-valued")
    G = t.group
    unit_ball = [g for g in range(G.order) if g != G.identity and t.values[g] <= 1]
    try:
        candidate = word_norm(G, ElementSet(G, unit_ball), conjugacy_invariant=False)
    except GenerationError:
        return False
    return candidate.values == t.values


def ball(t: NormTable, r: Value, g: int = 0, strict: bool = False) -> ElementSet:
    """B_r(g) = {h : t(h g^-1) <= r}; with strict, the open ball (< r)."""
    r = Fraction(r)
    if r < 0:
        raise ContractError("radius must be non-negative", invariant="radius")
    G = t.group
    scaled, common = t.scaled()
    distances = scaled[G.right_translation(G.inverse(g))] * r.denominator
    limit = r.numerator * common
    mask = distances < limit if strict else distances <= limit
    return ElementSet.from_mask(G, np.asarray(mask, dtype=bool))


@dataclass(frozen=True)
class ChainValue:
    """Value of a chain norm on one word."""

    word: ReducedWord
    prime: int
    value: Fraction
    level: Optional[int]
    depth: int

    @property
    def finite_depth_zero(self) -> bool:
        """A zero for a nontrivial word: only a pseudo-norm at this depth."""
        return self.value == 0 and not self.word.is_identity()

    def verdict(self, strict_depth: bool = False) -> Verdict:
        if strict_depth and self.finite_depth_zero:
            return Verdict.INCONCLUSIVE
        return Verdict.PASS

    def to_record(self) -> Dict[str, object]:
        return {
            "word": str(self.word),
            "prime": self.prime,
            "value": format_value(self.value),
            "level": self.level,
            "depth": self.depth,
            "finite_depth_zero": self.finite_depth_zero,
        }


class ChainNorm:
    """l(g) = max{1/p^s : g not in ker(chain[s])}, levels counted from 1.

    The chain is checked to descend once, on construction.
    """

    def __init__(
        self,
        chain: Sequence[QuotientSpec],
        prime: int,
        max_order: int = DEFAULT_MAX_ORDER,
    ):
        if not isprime(prime):
            raise ContractError(f"{prime} is not prime", invariant="prime")
        if not chain:
            raise ContractError("the chain has no levels", invariant="nonempty-chain")
        self.chain = tuple(chain)
        self.prime = prime
        for s in range(len(self.chain) - 1):
            if not kernel_contained(self.chain[s + 1], self.chain[s], max_order):
                raise ChainNotDescendingError(
                    f"the kernel at level {s + 2} is not inside the kernel at level {s + 1}"
                )
        logger.debug(f"Validated chain of depth {len(self.chain)} for p={prime}")

    def __call__(self, w: ReducedWord) -> ChainValue:
        for level, spec in enumerate(self.chain, start=1):
            if apply_word(spec, w) != spec.group.identity:
                return ChainValue(w, self.prime, Fraction(1, self.prime**level), level, len(self.chain))
        return ChainValue(w, self.prime, Fraction(0), None, len(self.chain))


def chain_norm(
    chain: Sequence[QuotientSpec],
    p: int,
    w: ReducedWord,
    max_order: int = DEFAULT_MAX_ORDER,
) -> ChainValue:
    return ChainNorm(chain, p, max_order)(w)
