"""
Test helpers for Conjnorm

Small builders shared by the test modules: words from strings, cyclic
quotient specs and generator word norms.
"""

from conjnorm.groups import ElementSet, FiniteGroup, QuotientSpec, apply_word
from conjnorm.norms import NormTable, word_norm
from conjnorm.words import ReducedWord, SymmetricWordSet, parse_word


def words(texts: list[str], rank: int) -> list[ReducedWord]:
    return [parse_word(t, rank) for t in texts]


def basis(rank: int) -> SymmetricWordSet:
    return SymmetricWordSet.standard_basis(rank)


def cycle(n: int, offset: int = 0) -> str:
    """The n-cycle on offset, ..., offset + n - 1 in cycle notation."""
    return "(" + " ".join(str(offset + i) for i in range(n)) + ")"


def cyclic_spec(n: int) -> QuotientSpec:
    """x_0 -> generator of Z/n."""
    return QuotientSpec.from_strings([cycle(n)], name=f"Z/{n}")


def torus_spec(n: int) -> QuotientSpec:
    """x_0, x_1 -> generators of (Z/n)^2 acting on disjoint blocks."""
    return QuotientSpec.from_strings([cycle(n), cycle(n, n)], degree=2 * n, name=f"(Z/{n})^2")


def s3_spec() -> QuotientSpec:
    """x_0 -> (0 1), x_1 -> (1 2): onto the symmetric group on three points."""
    return QuotientSpec.from_strings(["(0 1)", "(1 2)"], degree=3, name="S3")


def generator_norm(G: FiniteGroup, invariant: bool = True) -> NormTable:
    """Word norm over the group's own generators."""
    return word_norm(G, ElementSet(G, G.generator_ids), conjugacy_invariant=invariant)


def spec_norm(spec: QuotientSpec, rank: int) -> NormTable:
    """Invariant word norm on the spec's group over the images of the basis."""
    G = spec.group
    return word_norm(G, ElementSet(G, [apply_word(spec, s) for s in basis(rank)]))
