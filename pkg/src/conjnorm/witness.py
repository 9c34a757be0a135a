"""
Approximation witnesses

Checks finite witnesses for the approximation properties of normed
groups: metric weak soficity (and its non-metric form with a separation
radius), metric and isometric homomorphisms, D-Q-almost-homomorphisms,
metric RF / LEF witnesses, and the extension of basis images used for
LEF stability of free groups.

A witness is a PartialMap: finitely many source elements (free words taken
as coset representatives, or element ids of a finite group) sent to
elements of a finite target group. Products of word descriptors are free
products, so only triples g, h, gh that all appear in the domain as words
are checked.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import (
    ContractError,
    GroupMismatchError,
    NonInjectiveMapError,
    RankMismatchError,
    RelatorNotKilledError,
)
from .free_bounds import NormBound, SearchBudget, estimate_norm
from .groups import ElementSet, FiniteGroup, FiniteHom, QuotientSpec, apply_word, kills
from .models import Verdict, Violation, WitnessReport, format_value
from .norms import NormTable, is_invariant, word_norm
from .words import ReducedWord, SymmetricWordSet

logger = logging.getLogger(__name__)

Descriptor = Union[ReducedWord, int]


@dataclass(frozen=True)
class ThresholdSet:
    """Finite set of nonnegative rationals containing 0."""

    values: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        values = tuple(sorted({Fraction(v) for v in self.values}))
        object.__setattr__(self, "values", values)
        if Fraction(0) not in values:
            raise ContractError("threshold set must contain 0", invariant="zero-threshold")
        if values[0] < 0:
            raise ContractError("thresholds must be nonnegative", invariant="nonnegative")

    @classmethod
    def of(cls, values: Sequence[Union[int, Fraction]]) -> "ThresholdSet":
        """Threshold set from values, adding 0."""
        return cls(tuple(values) + (Fraction(0),))

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)

    def __contains__(self, value: object) -> bool:
        return value in self.values

    def __str__(self) -> str:
        return "{" + ", ".join(format_value(v) for v in self.values) + "}"


@dataclass(frozen=True, eq=False)
class PartialMap:
    """A map from finitely many source elements into a finite group.

    Attributes:
        domain: Free words (representatives) or element ids of source_group
        images: Element ids in target
        target: The finite target group
        source_norms: Source norm per domain entry, None when unknown
        source_group: Set when the domain holds element ids
    """

    domain: Tuple[Descriptor, ...]
    images: Tuple[int, ...]
    target: FiniteGroup
    source_norms: Tuple[Optional[Fraction], ...] = ()
    source_group: Optional[FiniteGroup] = field(default=None)

    def __post_init__(self) -> None:
        domain = tuple(self.domain)
        images = tuple(int(i) for i in self.images)
        norms = tuple(None if v is None else Fraction(v) for v in self.source_norms)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "source_norms", norms or (None,) * len(domain))
        if len(images) != len(domain) or len(self.source_norms) != len(domain):
            raise ContractError(
                f"{len(domain)} domain entries, {len(images)} images, "
                f"{len(self.source_norms)} norms",
                invariant="aligned",
            )
        if len(set(domain)) != len(domain):
            raise ContractError("domain entries are not pairwise distinct", invariant="distinct")
        for image in images:
            if not 0 <= image < self.target.order:
                raise ContractError(f"image id {image} outside {self.target.name}")
        if self.source_group is None:
            ranks = {d.rank for d in domain if isinstance(d, ReducedWord)}
            if len(ranks) > 1 or any(not isinstance(d, ReducedWord) for d in domain):
                raise RankMismatchError("word domain must hold words of one rank")
        elif any(not isinstance(d, int) or not 0 <= d < self.source_group.order for d in domain):
            raise ContractError(f"domain entries must be element ids of {self.source_group.name}")

    @classmethod
    def from_spec(
        cls,
        spec: QuotientSpec,
        words: Sequence[ReducedWord],
        norms: Sequence[Optional[Fraction]] = (),
    ) -> "PartialMap":
        """The map w -> psi(w) induced by a quotient spec."""
        return cls(tuple(words), tuple(apply_word(spec, w) for w in words), spec.group, tuple(norms))

    @classmethod
    def from_hom(
        cls,
        hom: FiniteHom,
        source_norm: Optional[NormTable] = None,
        ids: Optional[Sequence[int]] = None,
    ) -> "PartialMap":
        """A finite homomorphism restricted to ids (default: the whole source)."""
        domain = tuple(range(hom.source.order)) if ids is None else tuple(int(g) for g in ids)
        norms: Tuple[Optional[Fraction], ...] = ()
        if source_norm is not None:
            if source_norm.group is not hom.source:
                raise GroupMismatchError("source norm is not defined on the homomorphism's source")
            norms = tuple(source_norm[g] for g in domain)
        return cls(domain, tuple(hom(g) for g in domain), hom.target, norms, hom.source)

    def __len__(self) -> int:
        return len(self.domain)

    def label(self, i: int) -> str:
        d = self.domain[i]
        if self.source_group is not None:
            return self.source_group.format_element(int(d))
        return str(d)

    def image_label(self, i: int) -> str:
        return self.target.format_element(self.images[i])

    def is_identity(self, i: int) -> bool:
        d = self.domain[i]
        if isinstance(d, ReducedWord):
            return d.is_identity()
        return d == FiniteGroup.identity

    def product(self, a: Descriptor, b: Descriptor) -> Descriptor:
        if isinstance(a, ReducedWord) and isinstance(b, ReducedWord):
            return a * b
        assert self.source_group is not None
        return self.source_group.multiply(int(a), int(b))

    def triples(self) -> List[Tuple[int, int, int]]:
        """Positions (i, j, k) with domain[i] * domain[j] == domain[k]."""
        position = {d: k for k, d in enumerate(self.domain)}
        found = []
        for i, a in enumerate(self.domain):
            for j, b in enumerate(self.domain):
                k = position.get(self.product(a, b))
                if k is not None:
                    found.append((i, j, k))
        return found

    def collisions(self) -> List[Tuple[int, int]]:
        first: Dict[int, int] = {}
        pairs = []
        for i, image in enumerate(self.images):
            if image in first:
                pairs.append((first[image], i))
            else:
                first[image] = i
        return pairs

    def is_injective(self) -> bool:
        return not self.collisions()


def _check_target(m: PartialMap, target_norm: NormTable) -> None:
    if target_norm.group is not m.target:
        raise GroupMismatchError("target norm is not defined on the map's target group")


def _multiplicative_defect(m: PartialMap, t: NormTable, i: int, j: int, k: int, mode: str) -> Fraction:
    G = m.target
    a, b, c = m.images[i], m.images[j], m.images[k]
    if mode == "gr":
        return t[G.multiply(c, G.inverse(G.multiply(a, b)))]
    return t[G.multiply(G.inverse(c), G.multiply(a, b))]


def _missing_norm(m: PartialMap, i: int, condition: str = "norm") -> Violation:
    return Violation(
        condition,
        (m.label(i),),
        conclusive=False,
        detail="no exact source norm",
    )


def check_mws_witness(
    m: PartialMap,
    eps: Union[int, Fraction],
    target_norm: NormTable,
    mode: str = "metric",
    r: Optional[Union[int, Fraction]] = None,
) -> WitnessReport:
    """Check an eps-witness of metric weak soficity, exhaustively over the domain.

    In "gr" mode the norm clause is replaced by the separation clause
    l_C(phi(g)) > r for g != 1.

    Raises:
        NonInjectiveMapError: two domain entries share an image
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ContractError("eps must be positive", invariant="positive-eps")
    if mode not in ("metric", "gr"):
        raise ContractError(f"mode must be 'metric' or 'gr', got '{mode}'")
    if mode == "gr" and r is None:
        raise ContractError("gr mode needs a separation radius r", invariant="radius")
    _check_target(m, target_norm)
    collisions = m.collisions()
    if collisions:
        i, j = collisions[0]
        raise NonInjectiveMapError(
            f"{m.label(i)} and {m.label(j)} both map to {m.image_label(i)}"
        )

    violations: List[Violation] = []
    worst_mult = Fraction(0)
    for i, j, k in m.triples():
        defect = _multiplicative_defect(m, target_norm, i, j, k, mode)
        worst_mult = max(worst_mult, defect)
        if defect >= eps:
            violations.append(Violation("multiplicative", (m.label(i), m.label(j)), defect))

    for i in range(len(m)):
        if m.is_identity(i) and target_norm[m.images[i]] >= eps:
            violations.append(Violation("identity", (m.label(i),), target_norm[m.images[i]]))

    measurements = {"max_multiplicative_defect": format_value(worst_mult)}
    parameters = {"epsilon": format_value(eps), "mode": mode}
    if mode == "metric":
        worst_norm = Fraction(0)
        for i, source in enumerate(m.source_norms):
            if source is None:
                violations.append(_missing_norm(m, i))
                continue
            defect = abs(source - target_norm[m.images[i]])
            worst_norm = max(worst_norm, defect)
            if defect >= eps:
                violations.append(Violation("norm", (m.label(i),), defect))
        measurements["max_norm_defect"] = format_value(worst_norm)
    else:
        radius = Fraction(r)  # type: ignore[arg-type]
        parameters["r"] = format_value(radius)
        for i in range(len(m)):
            value = target_norm[m.images[i]]
            if not m.is_identity(i) and value <= radius:
                violations.append(Violation("separation", (m.label(i),), value))

    return WitnessReport.from_violations(
        "mws-witness", violations, parameters, measurements
    )


def measure_mws_epsilon(m: PartialMap, target_norm: NormTable) -> Fraction:
    """Largest defect of the map; it passes the metric check for every larger eps.

    Raises:
        NonInjectiveMapError: two domain entries share an image
        ContractError: a source norm is unknown
    """
    _check_target(m, target_norm)
    if not m.is_injective():
        i, j = m.collisions()[0]
        raise NonInjectiveMapError(f"{m.label(i)} and {m.label(j)} share an image")
    defects = [Fraction(0)]
    defects.extend(
        _multiplicative_defect(m, target_norm, i, j, k, "metric") for i, j, k in m.triples()
    )
    for i, source in enumerate(m.source_norms):
        if source is None:
            raise ContractError(f"no source norm for {m.label(i)}", invariant="source-norms")
        defects.append(abs(source - target_norm[m.images[i]]))
        if m.is_identity(i):
            defects.append(target_norm[m.images[i]])
    return max(defects)


def check_metric_hom(
    m: PartialMap, target_norm: NormTable, isometric: bool = False
) -> WitnessReport:
    """Check l_C(phi(h)) <= l(h) (or equality) on the map's domain.

    The map is assumed to be a homomorphism (built from a FiniteHom or a
    quotient spec). Isometric mode also checks injectivity.
    """
    _check_target(m, target_norm)
    violations: List[Violation] = []
    for i, source in enumerate(m.source_norms):
        if source is None:
            violations.append(_missing_norm(m, i))
            continue
        value = target_norm[m.images[i]]
        if value > source:
            violations.append(Violation("metric", (m.label(i),), value - source))
        elif isometric and value != source:
            violations.append(Violation("isometric", (m.label(i),), source - value))
    if isometric:
        for i, j in m.collisions():
            violations.append(
                Violation("injective", (m.label(i), m.label(j)), detail=m.image_label(i))
            )
    return WitnessReport.from_violations(
        "metric-hom",
        violations,
        parameters={"isometric": str(isometric).lower(), "checked": str(len(m))},
    )


def _multiplicative_violations(m: PartialMap) -> List[Violation]:
    G = m.target
    return [
        Violation("multiplicative", (m.label(i), m.label(j)))
        for i, j, k in m.triples()
        if G.multiply(m.images[i], m.images[j]) != m.images[k]
    ]


def structure_violations(m: PartialMap) -> List[Violation]:
    """Injectivity and exact multiplicativity on triples in the domain."""
    violations = [
        Violation("injective", (m.label(i), m.label(j)), detail=m.image_label(i))
        for i, j in m.collisions()
    ]
    return violations + _multiplicative_violations(m)


def check_norm_equality(m: PartialMap, target_norm: NormTable) -> WitnessReport:
    """Simplified almost-homomorphism check: injective, multiplicative, norms equal."""
    _check_target(m, target_norm)
    violations = structure_violations(m)
    for i, source in enumerate(m.source_norms):
        if source is None:
            violations.append(_missing_norm(m, i))
        elif source != target_norm[m.images[i]]:
            violations.append(
                Violation("norm", (m.label(i),), abs(source - target_norm[m.images[i]]))
            )
    return WitnessReport.from_violations("norm-equality", violations)


_SYMBOLS = (
    ("<", lambda a, b: a < b),
    (">", lambda a, b: a > b),
    ("=", lambda a, b: a == b),
)


def check_almost_hom(
    m: PartialMap, Q: ThresholdSet, target_norm: NormTable
) -> WitnessReport:
    """Check a D-Q-almost-homomorphism.

    When every source norm lies in Q, the threshold clause is equivalent
    to equality of norms and only that is compared.
    """
    _check_target(m, target_norm)
    violations = structure_violations(m)
    known = [v for v in m.source_norms if v is not None]
    fast = len(known) == len(m) and all(v in Q for v in known)
    for i, source in enumerate(m.source_norms):
        if source is None:
            violations.append(_missing_norm(m, i, "threshold"))
            continue
        value = target_norm[m.images[i]]
        if fast:
            if source != value:
                violations.append(
                    Violation("threshold", (m.label(i), format_value(source), "="), value)
                )
            continue
        for q in Q:
            for symbol, compare in _SYMBOLS:
                if compare(source, q) != compare(value, q):
                    violations.append(
                        Violation("threshold", (m.label(i), format_value(q), symbol), value)
                    )
    return WitnessReport.from_violations(
        "almost-hom",
        violations,
        parameters={"Q": str(Q)},
        notes=["threshold clause compared as norm equality"] if fast else [],
    )


def _weak_norm_report(m: PartialMap, target_norm: NormTable) -> WitnessReport:
    violations = structure_violations(m)
    for i, source in enumerate(m.source_norms):
        if source is None:
            violations.append(_missing_norm(m, i, "weak-norm"))
        elif target_norm[m.images[i]] > source:
            violations.append(
                Violation("weak-norm", (m.label(i),), target_norm[m.images[i]] - source)
            )
    return WitnessReport.from_violations("weak-almost-hom", violations)


def metric_generators_certified(
    spec: QuotientSpec, S: SymmetricWordSet, target_norm: NormTable
) -> bool:
    """Invariant target norm with every generator image of norm <= 1.

    Then the induced homomorphism is metric on all of F/N, not only on
    the checked domain.
    """
    if target_norm.group is not spec.group:
        raise GroupMismatchError("target norm is not defined on the spec's group")
    if not is_invariant(target_norm):
        return False
    return all(target_norm[apply_word(spec, s)] <= 1 for s in S)


def check_lef_witness(
    m: PartialMap,
    Q: ThresholdSet,
    target_norm: NormTable,
    spec: Optional[QuotientSpec] = None,
    relators: Sequence[ReducedWord] = (),
    S: Optional[SymmetricWordSet] = None,
    hom_required: bool = False,
    metric: bool = False,
    weak_inequality: bool = False,
) -> WitnessReport:
    """Composite metric LEF / RF witness check.

    Args:
        m: Map on coset representatives
        Q: Threshold set
        target_norm: Norm on the target group
        spec: Generator images, required when hom_required
        relators: Relators the homomorphism must kill
        S: Generating set, for the metric-generators certificate
        hom_required: The map must extend to a homomorphism of F/N
        metric: The homomorphism must be metric
        weak_inequality: Replace the threshold clause by l_C(phi(g)) <= ||g||
    """
    _check_target(m, target_norm)
    reports = [
        _weak_norm_report(m, target_norm) if weak_inequality else check_almost_hom(m, Q, target_norm)
    ]
    extra: List[Violation] = []
    if hom_required:
        if spec is None:
            raise ContractError("a homomorphism witness needs generator images", invariant="spec")
        if spec.group is not m.target:
            raise GroupMismatchError("the spec's group is not the map's target")
        for r in relators:
            if apply_word(spec, r) != spec.group.identity:
                extra.append(Violation("kills-relators", (str(r),)))
        for i, d in enumerate(m.domain):
            if not isinstance(d, ReducedWord):
                raise ContractError("homomorphism witnesses need word domains", invariant="spec")
            if apply_word(spec, d) != m.images[i]:
                extra.append(Violation("extends", (m.label(i),), detail=m.image_label(i)))
        if metric:
            reports.append(check_metric_hom(m, target_norm))
            if S is None or not metric_generators_certified(spec, S, target_norm):
                extra.append(
                    Violation(
                        "metric-generators",
                        (),
                        conclusive=False,
                        detail="metric property certified on the domain only",
                    )
                )
    return WitnessReport.combine(
        "lef-witness",
        reports,
        parameters={
            "hom_required": str(hom_required).lower(),
            "metric": str(metric).lower(),
            "weak_inequality": str(weak_inequality).lower(),
            "Q": str(Q),
        },
        extra=extra,
    )


@dataclass
class LefWitness:
    """Constructed witness: target norm, induced map, verdict and source bounds."""

    norm: NormTable
    map: PartialMap
    report: WitnessReport
    bounds: List[NormBound] = field(default_factory=list)


def build_lef_witness(
    relators: Sequence[ReducedWord],
    S: SymmetricWordSet,
    D: Sequence[ReducedWord],
    Q: ThresholdSet,
    spec: QuotientSpec,
    source_norms: Optional[Sequence[Optional[Fraction]]] = None,
    budget: Optional[SearchBudget] = None,
    probes: Sequence[QuotientSpec] = (),
    weak_inequality: bool = False,
) -> LefWitness:
    """Build the invariant word norm on spec's image and check the induced map.

    Source norms default to bound estimates; inexact ones make the verdict
    inconclusive.

    Raises:
        RelatorNotKilledError: spec does not kill every relator
    """
    relators = tuple(relators)
    if not kills(spec, relators):
        survivors = [str(r) for r in relators if apply_word(spec, r) != spec.group.identity]
        raise RelatorNotKilledError(f"{spec.label} does not kill {', '.join(survivors)}")
    G = spec.group
    norm = word_norm(G, ElementSet(G, [apply_word(spec, s) for s in S]), True, pad=True)

    bounds: List[NormBound] = []
    if source_norms is None:
        norms: List[Optional[Fraction]] = []
        for w in D:
            bound = estimate_norm(w, S, budget, tuple(probes) + (spec,), relators)
            bounds.append(bound)
            norms.append(Fraction(bound.lower) if bound.exact else None)
        source_norms = norms

    m = PartialMap.from_spec(spec, D, source_norms)
    report = check_lef_witness(
        m, Q, norm, spec, relators, S,
        hom_required=True, metric=True, weak_inequality=weak_inequality,
    )
    logger.info(f"LEF witness via {spec.label}: {report.verdict.value}")
    return LefWitness(norm, m, report, bounds)


def basis_images_from_map(m: PartialMap, rank: int) -> Tuple[int, ...]:
    """Images of x_0, ..., x_{rank-1} read off a word-domain map."""
    images = []
    for index in range(rank):
        generator = ReducedWord.generator(index, rank)
        if generator not in m.domain:
            raise ContractError(f"basis element {generator} is not in the domain", invariant="basis")
        images.append(m.images[m.domain.index(generator)])
    return tuple(images)


def _evaluate(target: FiniteGroup, basis_images: Sequence[int], w: ReducedWord) -> int:
    current = target.identity
    for letter in w.letters:
        g = basis_images[abs(letter) - 1]
        current = target.multiply(current, g if letter > 0 else target.inverse(g))
    return current


def stability_extend(
    basis_images: Sequence[int],
    D: Sequence[ReducedWord],
    target_norm: NormTable,
    eps: Union[int, Fraction],
    norms: Sequence[Optional[Fraction]],
) -> WitnessReport:
    """Extend basis images to a homomorphism and verify the 3k*eps defect bound.

    k is the least radius of a word-length ball containing D over the
    first n basis elements, n being the largest generator used in D.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ContractError("eps must be nonnegative", invariant="nonnegative-eps")
    if len(norms) != len(D):
        raise ContractError(f"{len(D)} words but {len(norms)} norms", invariant="aligned")
    G = target_norm.group
    segment = max((w.max_generator() for w in D), default=0)
    if segment > len(basis_images):
        raise ContractError(
            f"D uses {segment} basis elements, only {len(basis_images)} images given",
            invariant="basis",
        )
    k = max((len(w) for w in D), default=0)
    bound = 3 * k * eps

    psi = PartialMap(
        tuple(D),
        tuple(_evaluate(G, basis_images, w) for w in D),
        G,
        tuple(norms),
    )
    # psi need not be injective on D; only multiplicativity is checked
    violations = _multiplicative_violations(psi)
    worst = Fraction(0)
    for i, source in enumerate(psi.source_norms):
        if source is None:
            violations.append(_missing_norm(psi, i))
            continue
        defect = abs(source - target_norm[psi.images[i]])
        worst = max(worst, defect)
        if defect != 0 and defect >= bound:
            violations.append(Violation("bound", (psi.label(i),), defect))

    report = WitnessReport.from_violations(
        "stability-extension",
        violations,
        parameters={"epsilon": format_value(eps), "k": str(k), "basis_segment": str(segment)},
        measurements={
            "bound": format_value(bound),
            "max_defect": format_value(worst),
            "margin": format_value(bound - worst),
        },
        notes=[f"bound 3k*eps with k = {k}, the least word-length radius containing D"],
    )
    if report.verdict == Verdict.PASS:
        logger.debug(f"Basis extension within 3k*eps = {format_value(bound)}")
    return report
