"""
Finite permutation groups

Enumerates finite groups from permutation generators and answers the
questions the norm and probe layers ask of them: conjugacy classes, set
products, normal closures, coset groups, homomorphisms and kernel
containment between quotient specifications.

Permutations are sympy Permutation objects; an enumerated group keeps its
elements as rows of a numpy array. Multiplication follows sympy's
convention: a * b applies a first, then b.
"""

import logging
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy.combinatorics import Permutation, PermutationGroup
from sympy.combinatorics.group_constructs import DirectProduct
from sympy.combinatorics.named_groups import (
    AbelianGroup,
    AlternatingGroup,
    CyclicGroup,
    DihedralGroup,
    SymmetricGroup,
)

from .errors import (
    ContractError,
    GroupMismatchError,
    MalformedInputError,
    NotNormalSubgroupError,
    PermutationParseError,
    RankMismatchError,
    ResourceLimitError,
)
from .words import ReducedWord

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 100_000

_DTYPE = np.int32
_CYCLE = re.compile(r"\(([^()]*)\)")

Perm = Permutation


def _parse_point(token: str, column: int) -> int:
    try:
        point = int(token)
    except ValueError:
        raise PermutationParseError(f"'{token}' is not a point", column=column) from None
    if point < 0:
        raise PermutationParseError(f"negative point {point}", column=column)
    return point


def _parse_cycles(text: str, degree: Optional[int]) -> Permutation:
    cycles: List[List[int]] = []
    seen = set()
    position = 0
    for match in _CYCLE.finditer(text):
        gap = text[position : match.start()].strip()
        if gap:
            raise PermutationParseError(f"unexpected text '{gap}'", column=position + 1)
        position = match.end()
        cycle = []
        for token in match.group(1).replace(",", " ").split():
            point = _parse_point(token, match.start() + 1)
            if point in seen:
                raise PermutationParseError(
                    f"point {point} appears twice", column=match.start() + 1
                )
            seen.add(point)
            cycle.append(point)
        if len(cycle) > 1:
            cycles.append(cycle)
    if position == 0 or text[position:].strip():
        raise PermutationParseError(f"'{text}' is not in cycle notation")

    largest = max(seen, default=-1)
    size = degree if degree is not None else max(largest + 1, 1)
    if largest >= size:
        raise PermutationParseError(f"point {largest} is outside degree {size}")
    if not cycles:
        return Permutation(list(range(size)))
    return Permutation(cycles, size=size)


def _parse_array_form(text: str, degree: Optional[int]) -> Permutation:
    if not text.endswith("]"):
        raise PermutationParseError(f"'{text}' is missing a closing bracket")
    tokens = text[1:-1].replace(",", " ").split()
    if not tokens:
        raise PermutationParseError("empty permutation")
    images = [_parse_point(token, 1) for token in tokens]
    seen = set()
    for image in images:
        if image >= len(images):
            raise PermutationParseError(
                f"image point {image} is outside 0..{len(images) - 1}"
            )
        if image in seen:
            raise PermutationParseError(f"image point {image} is repeated")
        seen.add(image)
    if degree is not None and degree != len(images):
        raise PermutationParseError(
            f"array form has {len(images)} points, expected degree {degree}"
        )
    return Permutation(images)


def parse_permutation(text: str, degree: Optional[int] = None) -> Permutation:
    """Parse "(0 1)(2 3)", "()" or "[1, 0, 2]" on 0-based points.

    Raises:
        PermutationParseError: repeated points, bad tokens or degree overflow
    """
    stripped = str(text).strip()
    if stripped.startswith("["):
        return _parse_array_form(stripped, degree)
    return _parse_cycles(stripped, degree)


def format_permutation(perm: Permutation) -> str:
    """Cycle notation with fixed points omitted; "()" for the identity."""
    cycles = perm.cyclic_form
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(p) for p in cycle) + ")" for cycle in cycles)


def identity_permutation(degree: int) -> Permutation:
    return Permutation(list(range(max(degree, 1))))


class FiniteGroup:
    """A finite permutation group with enumerated elements.

    Element ids follow breadth-first discovery order from the generators,
    id 0 being the identity.
    """

    def __init__(
        self,
        degree: int,
        generators: Sequence[Permutation],
        rows: np.ndarray,
        name: str = "",
    ):
        self.degree = degree
        self.generators = tuple(generators)
        self.name = name or f"<{', '.join(format_permutation(g) for g in self.generators)}>"
        rows = np.ascontiguousarray(rows, dtype=_DTYPE)
        rows.setflags(write=False)
        self._rows = rows
        self._index: Dict[bytes, int] = {row.tobytes(): i for i, row in enumerate(rows)}
        self.generator_ids: Tuple[int, ...] = tuple(
            self.id_of(g) for g in self.generators
        )
        self._inverse = self.lookup(np.argsort(rows, axis=1))
        self._right: Dict[int, np.ndarray] = {}
        self._conjugation: Dict[int, np.ndarray] = {}

    identity = 0

    @property
    def order(self) -> int:
        return len(self._rows)

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={self.order})"

    @property
    def rows(self) -> np.ndarray:
        """Read-only (order x degree) array of element images."""
        return self._rows

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        """Element ids of a stack of permutation rows."""
        rows = np.ascontiguousarray(rows, dtype=_DTYPE)
        try:
            return np.fromiter(
                (self._index[row.tobytes()] for row in rows),
                dtype=np.int64,
                count=len(rows),
            )
        except KeyError:
            raise ContractError(
                f"permutation is not an element of {self.name}", invariant="membership"
            ) from None

    def id_of(self, element: Union[Permutation, Sequence[int]]) -> int:
        images = element.array_form if isinstance(element, Permutation) else list(element)
        if len(images) != self.degree:
            raise ContractError(
                f"permutation of degree {len(images)} in a group of degree {self.degree}",
                invariant="membership",
            )
        return int(self.lookup(np.asarray([images]))[0])

    def element(self, g: int) -> Permutation:
        return Permutation([int(x) for x in self._rows[g]])

    def format_element(self, g: int) -> str:
        return format_permutation(self.element(g))

    def multiply(self, a: int, b: int) -> int:
        """Id of a * b (a applied first)."""
        return self._index[self._rows[b][self._rows[a]].tobytes()]

    def inverse(self, g: int) -> int:
        return int(self._inverse[g])

    def conjugate(self, g: int, h: int) -> int:
        """Id of h^-1 * g * h."""
        return self.multiply(self.multiply(self.inverse(h), g), h)

    def power(self, g: int, exponent: int) -> int:
        base = g if exponent >= 0 else self.inverse(g)
        result = self.identity
        for _ in range(abs(exponent)):
            result = self.multiply(result, base)
        return result

    def right_translation(self, g: int) -> np.ndarray:
        """Array t with t[x] = x * g."""
        cached = self._right.get(g)
        if cached is not None:
            return cached
        result = self.lookup(self._rows[g][self._rows])
        if g in self.generator_ids:
            self._right[g] = result
        return result

    def left_translation(self, g: int) -> np.ndarray:
        """Array t with t[x] = g * x."""
        return self.lookup(self._rows[:, self._rows[g]])

    def conjugation(self, h: int) -> np.ndarray:
        """Array c with c[x] = h^-1 * x * h."""
        cached = self._conjugation.get(h)
        if cached is not None:
            return cached
        result = self.right_translation(h)[self.left_translation(self.inverse(h))]
        if h in self.generator_ids:
            self._conjugation[h] = result
        return result

    def inverses(self) -> np.ndarray:
        return self._inverse


def enumerate_group(
    generators: Sequence[Permutation],
    max_order: int = DEFAULT_MAX_ORDER,
    name: str = "",
) -> FiniteGroup:
    """Enumerate the group generated by permutations.

    Raises:
        ContractError: empty generator list or unequal degrees
        ResourceLimitError: group order above max_order
    """
    gens = list(generators)
    if not gens:
        raise ContractError("at least one generator is required", invariant="nonempty")
    degree = gens[0].size
    for g in gens:
        if g.size != degree:
            raise ContractError(
                f"generators of degree {degree} and {g.size}", invariant="equal-degree"
            )

    # Schreier-Sims gives the order before any enumeration happens
    order = int(PermutationGroup(gens).order())
    if order > max_order:
        raise ResourceLimitError("group order", max_order, order)

    gen_rows = [np.asarray(g.array_form, dtype=_DTYPE) for g in gens]
    identity = np.arange(degree, dtype=_DTYPE)
    rows = [identity]
    seen = {identity.tobytes()}
    i = 0
    while i < len(rows):
        x = rows[i]
        for g in gen_rows:
            y = g[x]
            key = y.tobytes()
            if key not in seen:
                seen.add(key)
                rows.append(y)
        i += 1

    group = FiniteGroup(degree, gens, np.vstack(rows), name)
    logger.debug(f"Enumerated {group.name}: order {group.order}, degree {degree}")
    return group


def group_from_strings(
    generators: Sequence[str],
    degree: Optional[int] = None,
    name: str = "",
    max_order: int = DEFAULT_MAX_ORDER,
) -> FiniteGroup:
    return enumerate_group(_parse_uniform(generators, degree), max_order, name)


def _parse_uniform(texts: Sequence[str], degree: Optional[int]) -> List[Permutation]:
    """Parse permutations, padding cycle notation to a common degree."""
    if degree is None:
        degree = max((parse_permutation(t).size for t in texts), default=1)
    return [parse_permutation(t, degree) for t in texts]


class ElementSet:
    """An immutable subset of a finite group, stored as a boolean mask."""

    __slots__ = ("group", "_mask")

    def __init__(self, group: FiniteGroup, members: Iterable[int] = ()):
        mask = np.zeros(group.order, dtype=bool)
        ids = np.fromiter((int(m) for m in members), dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= group.order):
            raise ContractError(
                f"element ids outside 0..{group.order - 1}", invariant="membership"
            )
        mask[ids] = True
        self._init(group, mask)

    def _init(self, group: FiniteGroup, mask: np.ndarray) -> None:
        mask.setflags(write=False)
        self.group = group
        self._mask = mask

    @classmethod
    def from_mask(cls, group: FiniteGroup, mask: np.ndarray) -> "ElementSet":
        if mask.shape != (group.order,):
            raise ContractError("mask does not match the group order", invariant="membership")
        result = cls.__new__(cls)
        result._init(group, np.array(mask, dtype=bool))
        return result

    @classmethod
    def whole(cls, group: FiniteGroup) -> "ElementSet":
        return cls.from_mask(group, np.ones(group.order, dtype=bool))

    @classmethod
    def trivial(cls, group: FiniteGroup) -> "ElementSet":
        return cls(group, [group.identity])

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    def __contains__(self, g: object) -> bool:
        return isinstance(g, (int, np.integer)) and 0 <= g < len(self._mask) and bool(self._mask[g])

    def __len__(self) -> int:
        return int(np.count_nonzero(self._mask))

    def __iter__(self) -> Iterator[int]:
        return (int(g) for g in np.flatnonzero(self._mask))

    def ids(self) -> Tuple[int, ...]:
        return tuple(self)

    def _check_same(self, other: "ElementSet") -> None:
        if other.group is not self.group:
            raise GroupMismatchError(
                f"sets of {self.group.name} and {other.group.name} cannot be combined"
            )

    def union(self, other: "ElementSet") -> "ElementSet":
        self._check_same(other)
        return ElementSet.from_mask(self.group, self._mask | other._mask)

    def intersection(self, other: "ElementSet") -> "ElementSet":
        self._check_same(other)
        return ElementSet.from_mask(self.group, self._mask & other._mask)

    def issubset(self, other: "ElementSet") -> bool:
        self._check_same(other)
        return not bool(np.any(self._mask & ~other._mask))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ElementSet):
            return NotImplemented
        return other.group is self.group and bool(np.array_equal(self._mask, other._mask))

    def __hash__(self) -> int:
        return hash((id(self.group), self._mask.tobytes()))

    def __repr__(self) -> str:
        return f"ElementSet({self.group.name}, size={len(self)})"

    def describe(self) -> List[str]:
        return [self.group.format_element(g) for g in self]


@dataclass(frozen=True)
class QuotientSpec:
    """Images of the free generators; defines psi: F -> H onto its image."""

    rank: int
    images: Tuple[Permutation, ...]
    name: str = field(default="", compare=False)
    max_order: int = field(default=DEFAULT_MAX_ORDER, compare=False, repr=False)

    def __post_init__(self) -> None:
        images = tuple(self.images)
        object.__setattr__(self, "images", images)
        if self.rank < 1:
            raise MalformedInputError(f"rank must be positive, got {self.rank}")
        if len(images) != self.rank:
            raise ContractError(
                f"{len(images)} images for rank {self.rank}", invariant="one-image-per-generator"
            )
        if len({p.size for p in images}) > 1:
            raise ContractError("images have different degrees", invariant="equal-degree")

    @classmethod
    def from_strings(
        cls,
        images: Sequence[str],
        degree: Optional[int] = None,
        name: str = "",
        max_order: int = DEFAULT_MAX_ORDER,
    ) -> "QuotientSpec":
        return cls(len(images), tuple(_parse_uniform(images, degree)), name, max_order)

    @property
    def degree(self) -> int:
        return int(self.images[0].size)

    @cached_property
    def group(self) -> FiniteGroup:
        """The image H = psi(F)."""
        return enumerate_group(self.images, self.max_order, name=self.label)

    @property
    def generator_ids(self) -> Tuple[int, ...]:
        return self.group.generator_ids

    @property
    def label(self) -> str:
        return self.name or "[" + ", ".join(self.describe()) + "]"

    def describe(self) -> List[str]:
        return [format_permutation(p) for p in self.images]

    def to_record(self) -> Dict[str, object]:
        return {
            "rank": self.rank,
            "degree": self.degree,
            "images": self.describe(),
            "name": self.name,
        }


def apply_word(spec: QuotientSpec, w: ReducedWord) -> int:
    """Element id of psi(w) in spec.group."""
    if w.rank != spec.rank:
        raise RankMismatchError(f"word of rank {w.rank} applied to a rank-{spec.rank} spec")
    group = spec.group
    generator_ids = spec.generator_ids
    current = group.identity
    for letter in w.letters:
        g = generator_ids[abs(letter) - 1]
        if letter < 0:
            g = group.inverse(g)
        current = group.multiply(current, g)
    return current


def kills(spec: QuotientSpec, relators: Iterable[ReducedWord]) -> bool:
    """True when every relator maps to the identity."""
    return all(apply_word(spec, r) == spec.group.identity for r in relators)


def conjugacy_class(G: FiniteGroup, g: int) -> ElementSet:
    """The orbit {h^-1 g h : h in G}."""
    members = {g}
    queue = deque([g])
    maps = [G.conjugation(h) for h in G.generator_ids]
    while queue:
        x = queue.popleft()
        for conj in maps:
            y = int(conj[x])
            if y not in members:
                members.add(y)
                queue.append(y)
    return ElementSet(G, members)


def class_union(G: FiniteGroup, seeds: Iterable[int]) -> ElementSet:
    """Union of the conjugacy classes of seeds."""
    mask = np.zeros(G.order, dtype=bool)
    for g in seeds:
        if not mask[g]:
            mask |= conjugacy_class(G, g).mask
    return ElementSet.from_mask(G, mask)


def set_product(A: ElementSet, B: ElementSet) -> ElementSet:
    """{a * b : a in A, b in B}."""
    A._check_same(B)
    G = A.group
    mask = np.zeros(G.order, dtype=bool)
    if len(A) <= len(B):
        b_ids = np.flatnonzero(B.mask)
        for a in A:
            mask[G.left_translation(a)[b_ids]] = True
    else:
        a_ids = np.flatnonzero(A.mask)
        for b in B:
            mask[G.right_translation(b)[a_ids]] = True
    return ElementSet.from_mask(G, mask)


def generated_subgroup(G: FiniteGroup, generators: Iterable[int]) -> ElementSet:
    gens = sorted(set(int(g) for g in generators))
    members = {G.identity}
    queue = deque([G.identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = G.multiply(x, s)
            if y not in members:
                members.add(y)
                queue.append(y)
    return ElementSet(G, members)


def is_subgroup(G: FiniteGroup, H: ElementSet) -> bool:
    if H.group is not G:
        raise GroupMismatchError(f"set does not belong to {G.name}")
    return G.identity in H and generated_subgroup(G, H) == H


def is_normal(G: FiniteGroup, N: ElementSet) -> bool:
    """True when N is a subgroup stable under conjugation."""
    if not is_subgroup(G, N):
        return False
    ids = np.flatnonzero(N.mask)
    return all(bool(np.all(N.mask[G.conjugation(h)[ids]])) for h in G.generator_ids)


def normal_closure(G: FiniteGroup, seeds: ElementSet) -> ElementSet:
    """Smallest normal subgroup containing seeds."""
    if seeds.group is not G:
        raise GroupMismatchError(f"seeds do not belong to {G.name}")
    if not len(seeds):
        return ElementSet.trivial(G)
    return generated_subgroup(G, class_union(G, seeds))


@dataclass(frozen=True, eq=False)
class FiniteHom:
    """A homomorphism between enumerated groups, as an array of image ids."""

    source: FiniteGroup
    target: FiniteGroup
    images: np.ndarray

    @classmethod
    def from_generator_images(
        cls, source: FiniteGroup, target: FiniteGroup, generator_images: Sequence[int]
    ) -> "FiniteHom":
        """Extend generator images to the whole source group.

        Raises:
            ContractError: the images do not define a homomorphism
        """
        if len(generator_images) != len(source.generator_ids):
            raise ContractError(
                f"{len(generator_images)} images for {len(source.generator_ids)} generators",
                invariant="one-image-per-generator",
            )
        phi = np.full(source.order, -1, dtype=np.int64)
        phi[source.identity] = target.identity
        # ids are in discovery order, so every x is assigned before it is expanded
        for x in range(source.order):
            for g, image in zip(source.generator_ids, generator_images):
                y = source.multiply(x, g)
                value = target.multiply(int(phi[x]), int(image))
                if phi[y] < 0:
                    phi[y] = value
                elif phi[y] != value:
                    raise ContractError(
                        "generator images do not define a homomorphism",
                        invariant="homomorphism",
                    )
        return cls(source, target, phi)

    def __call__(self, g: int) -> int:
        return int(self.images[g])

    def is_injective(self) -> bool:
        return len(np.unique(self.images)) == self.source.order

    def kernel(self) -> ElementSet:
        return ElementSet(self.source, np.flatnonzero(self.images == self.target.identity))


@dataclass(frozen=True, eq=False)
class QuotientGroup:
    """G/N realised as a permutation group on the cosets of N."""

    source: FiniteGroup
    kernel: ElementSet
    group: FiniteGroup
    projection: np.ndarray
    coset_of: np.ndarray

    def project(self, g: int) -> int:
        return int(self.projection[g])

    def preimage(self, q: int) -> ElementSet:
        return ElementSet(self.source, np.flatnonzero(self.projection == q))

    def projection_hom(self) -> FiniteHom:
        return FiniteHom(self.source, self.group, self.projection)


def coset_group(
    G: FiniteGroup, N: ElementSet, max_order: int = DEFAULT_MAX_ORDER
) -> QuotientGroup:
    """The quotient G/N with its canonical projection.

    Raises:
        NotNormalSubgroupError: N is not a normal subgroup of G
    """
    if N.group is not G:
        raise GroupMismatchError(f"subgroup does not belong to {G.name}")
    if not is_subgroup(G, N):
        raise NotNormalSubgroupError("the set is not a subgroup")
    if not is_normal(G, N):
        raise NotNormalSubgroupError("the subgroup is not stable under conjugation")

    n_ids = N.ids()
    coset_of = np.full(G.order, -1, dtype=np.int64)
    representatives: List[int] = []
    for g in range(G.order):
        if coset_of[g] < 0:
            for n in n_ids:
                coset_of[G.multiply(g, n)] = len(representatives)
            representatives.append(g)

    def action(g: int) -> Permutation:
        return Permutation([int(coset_of[G.multiply(r, g)]) for r in representatives])

    quotient = enumerate_group(
        [action(h) for h in G.generator_ids], max_order, name=f"{G.name}/N"
    )
    by_coset = np.array(
        [quotient.id_of(action(r)) for r in representatives], dtype=np.int64
    )
    projection = by_coset[coset_of]
    logger.debug(
        f"Quotient of {G.name} by a normal subgroup of order {len(N)}: order {quotient.order}"
    )
    return QuotientGroup(G, N, quotient, projection, coset_of)


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup enumerated as a group of its own, with its embedding."""

    group: FiniteGroup
    embedding: np.ndarray


def subgroup(G: FiniteGroup, H: ElementSet, max_order: int = DEFAULT_MAX_ORDER) -> Subgroup:
    if not is_subgroup(G, H):
        raise ContractError("the set is not a subgroup", invariant="subgroup")
    gens: List[int] = []
    covered = ElementSet.trivial(G)
    for h in H:
        if h not in covered:
            gens.append(h)
            covered = generated_subgroup(G, gens)
    perms = [G.element(h) for h in gens] or [identity_permutation(G.degree)]
    inner = enumerate_group(perms, max_order, name=f"subgroup of {G.name}")
    return Subgroup(inner, G.lookup(inner.rows))


def kernel_contained(
    a: QuotientSpec, b: QuotientSpec, max_order: int = DEFAULT_MAX_ORDER
) -> bool:
    """True iff ker(a) is contained in ker(b).

    The pairs (psi_a(x), psi_b(x)) generate a subgroup of H_a x H_b; the
    containment holds exactly when that subgroup is the graph of a map
    H_a -> H_b, i.e. has no element (1, h) with h != 1.

    Raises:
        ResourceLimitError: the paired group is larger than max_order
    """
    if a.rank != b.rank:
        raise RankMismatchError(f"specs of rank {a.rank} and {b.rank}")
    da, db = a.degree, b.degree
    paired = [
        Permutation(list(pa.array_form) + [x + da for x in pb.array_form])
        for pa, pb in zip(a.images, b.images)
    ]
    graph = enumerate_group(paired, max_order, name="graph")
    rows = graph.rows
    first_trivial = np.all(rows[:, :da] == np.arange(da), axis=1)
    second_nontrivial = np.any(rows[:, da:] != np.arange(da, da + db), axis=1)
    return not bool(np.any(first_trivial & second_nontrivial))


_NAMED = {
    "cyclic": CyclicGroup,
    "dihedral": DihedralGroup,
    "symmetric": SymmetricGroup,
    "alternating": AlternatingGroup,
    "abelian": AbelianGroup,
}


def named_group(kind: str, *params: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """Build cyclic, dihedral, symmetric, alternating or abelian groups."""
    constructor = _NAMED.get(kind.lower())
    if constructor is None:
        raise MalformedInputError(
            f"unknown group family '{kind}', expected one of: {', '.join(_NAMED)}"
        )
    if not params or any(p < 1 for p in params):
        raise MalformedInputError(f"group family '{kind}' needs positive parameters")
    pg = constructor(*params)
    label = f"{kind.lower()} {' '.join(str(p) for p in params)}"
    return enumerate_group(list(pg.generators), max_order, name=label)


def direct_product(*groups: FiniteGroup, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    pg = DirectProduct(*[PermutationGroup(list(g.generators)) for g in groups])
    return enumerate_group(
        list(pg.generators), max_order, name=" x ".join(g.name for g in groups)
    )
