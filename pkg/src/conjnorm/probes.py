"""
Profinite probes in finite quotients

A quotient spec psi: F -> H separates w from a set X when psi(w) is not in
psi(X). The probes here compute images of norm balls modulo N, of products
of conjugacy classes, and check partial isomorphisms on finite sets of
coset representatives. quotient_search scans a catalog of specs for the
first separating one.

A finite catalog can only ever certify separations. Exhausting it proves
nothing about non-closedness.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from sympy.combinatorics import Permutation

from .errors import CertificateError, ContractError, MalformedInputError, RankMismatchError
from .free_bounds import Factor, NormBound
from .groups import (
    DEFAULT_MAX_ORDER,
    ElementSet,
    FiniteGroup,
    QuotientSpec,
    apply_word,
    class_union,
    kills,
    normal_closure,
    set_product,
)
from .models import Verdict, Violation, WitnessReport
from .norms import NormTable, rescaled_kernel_norm
from .witness import PartialMap, structure_violations
from .words import ReducedWord, SymmetricWordSet, parse_word

logger = logging.getLogger(__name__)

GOALS = ("rf-separation", "lef-separation", "product-membership-no")

EXHAUSTION_CAVEAT = (
    "no spec in the catalog separates; this says nothing about the "
    "profinite closure beyond the catalog"
)


def _multiply_out(factors: Sequence[Factor], rank: int) -> ReducedWord:
    result = ReducedWord.identity(rank)
    for f in factors:
        result = result * f.value
    return result


@dataclass(frozen=True)
class KernelWord:
    """A word certified to lie in N as a product of relator conjugates."""

    word: ReducedWord
    factors: Tuple[Factor, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        product = _multiply_out(self.factors, self.word.rank)
        if product != self.word:
            raise CertificateError(
                f"kernel certificate multiplies to {product}, not {self.word}"
            )

    def check_bases(self, relators: Sequence[ReducedWord]) -> None:
        allowed = set(relators) | {r.inverse() for r in relators}
        for f in self.factors:
            if f.base not in allowed:
                raise CertificateError(f"kernel factor {f} is not a relator conjugate")

    def to_record(self) -> Dict[str, Any]:
        return {"word": str(self.word), "factors": [f.to_record() for f in self.factors]}


@dataclass(frozen=True)
class ClassWord:
    """A word certified to have norm at most 1 modulo N: base^conjugator * kernel."""

    word: ReducedWord
    base: ReducedWord
    conjugator: ReducedWord
    kernel: Optional[KernelWord] = None

    def __post_init__(self) -> None:
        product = self.base.conjugate(self.conjugator)
        if self.kernel is not None:
            product = product * self.kernel.word
        if product != self.word:
            raise CertificateError(f"class certificate multiplies to {product}, not {self.word}")

    def to_record(self) -> Dict[str, Any]:
        return {
            "word": str(self.word),
            "base": str(self.base),
            "conjugator": str(self.conjugator),
            "kernel": None if self.kernel is None else self.kernel.to_record(),
        }


@dataclass(frozen=True)
class ProbeProblem:
    """A word w, a radius m and the data of F/N and of a class product."""

    rank: int
    S: SymmetricWordSet
    relators: Tuple[ReducedWord, ...]
    w: ReducedWord
    m: int
    kernel_words: Tuple[KernelWord, ...] = ()
    class_words: Tuple[ClassWord, ...] = ()
    D: Tuple[ReducedWord, ...] = ()

    def __post_init__(self) -> None:
        for attr in ("relators", "kernel_words", "class_words", "D"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if self.m < 0:
            raise ContractError(f"radius m must be nonnegative, got {self.m}", invariant="radius")
        words = [self.w, *self.relators, *self.D]
        words += [k.word for k in self.kernel_words] + [c.word for c in self.class_words]
        if self.S.rank != self.rank or any(word.rank != self.rank for word in words):
            raise RankMismatchError(f"problem of rank {self.rank} holds words of another rank")
        for k in self.kernel_words:
            k.check_bases(self.relators)
        for c in self.class_words:
            if c.base not in self.S:
                raise CertificateError(f"class word base {c.base} is not in S")
            if c.kernel is not None:
                c.kernel.check_bases(self.relators)

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "ProbeProblem":
        """Build a problem from a plain mapping of word strings."""
        try:
            rank = int(record["rank"])
            parse = lambda text: parse_word(text, rank)  # noqa: E731

            def kernel(entry: Mapping[str, Any]) -> KernelWord:
                factors = tuple(
                    Factor(parse(f["base"]), parse(f.get("conjugator", "")))
                    for f in entry.get("factors", [])
                )
                return KernelWord(parse(entry["word"]), factors)

            S_words = [parse(s) for s in record.get("S") or []]
            S = (
                SymmetricWordSet.closure(S_words, rank)
                if S_words
                else SymmetricWordSet.standard_basis(rank)
            )
            return cls(
                rank=rank,
                S=S,
                relators=tuple(parse(r) for r in record.get("relators") or []),
                w=parse(record.get("w", "")),
                m=int(record.get("m", 0)),
                kernel_words=tuple(kernel(k) for k in record.get("kernel_words") or []),
                class_words=tuple(
                    ClassWord(
                        parse(c["word"]),
                        parse(c["base"]),
                        parse(c.get("conjugator", "")),
                        kernel(c["kernel"]) if c.get("kernel") else None,
                    )
                    for c in record.get("class_words") or []
                ),
                D=tuple(parse(d) for d in record.get("D") or []),
            )
        except KeyError as e:
            raise MalformedInputError(f"problem record is missing {e}") from None

    def to_record(self) -> Dict[str, Any]:
        return {
            "rank": self.rank,
            "S": [str(s) for s in self.S],
            "relators": [str(r) for r in self.relators],
            "w": str(self.w),
            "m": self.m,
            "kernel_words": [k.to_record() for k in self.kernel_words],
            "class_words": [c.to_record() for c in self.class_words],
            "D": [str(d) for d in self.D],
        }


def spec_from_record(record: Mapping[str, Any], max_order: int = DEFAULT_MAX_ORDER) -> QuotientSpec:
    try:
        return QuotientSpec.from_strings(
            list(record["images"]),
            record.get("degree"),
            name=record.get("name", ""),
            max_order=max_order,
        )
    except KeyError as e:
        raise MalformedInputError(f"spec record is missing {e}") from None


@dataclass
class SeparationCertificate:
    """Outcome of one probe in one quotient, replayable from its record."""

    kind: str
    problem: ProbeProblem
    spec: QuotientSpec
    verdict: Verdict
    image: str = ""
    checked_set: List[str] = field(default_factory=list)
    details: Dict[str, str] = field(default_factory=dict)
    reason: str = ""

    def get_summary(self) -> str:
        text = f"{self.verdict.symbol} {self.verdict.value.upper()}: {self.kind} in {self.spec.label}"
        if self.reason:
            text += f" ({self.reason})"
        return text

    def key(self) -> str:
        """Identity of the inputs, for spotting contradictory certificates."""
        return json.dumps(
            {"kind": self.kind, "problem": self.problem.to_record(), "spec": self.spec.to_record()},
            sort_keys=True,
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "problem": self.problem.to_record(),
            "spec": self.spec.to_record(),
            "verdict": self.verdict.value,
            "image": self.image,
            "checked_set": list(self.checked_set),
            "checked_size": len(self.checked_set),
            "details": dict(self.details),
            "reason": self.reason,
        }

    @classmethod
    def from_record(
        cls, record: Mapping[str, Any], max_order: int = DEFAULT_MAX_ORDER
    ) -> "SeparationCertificate":
        try:
            return cls(
                kind=record["kind"],
                problem=ProbeProblem.from_record(record["problem"]),
                spec=spec_from_record(record["spec"], max_order),
                verdict=Verdict(record["verdict"]),
                image=record.get("image", ""),
                checked_set=list(record.get("checked_set", [])),
                details=dict(record.get("details", {})),
                reason=record.get("reason", ""),
            )
        except (KeyError, ValueError) as e:
            raise MalformedInputError(f"malformed certificate record: {e}") from None


def _images(spec: QuotientSpec, words: Sequence[ReducedWord]) -> ElementSet:
    return ElementSet(spec.group, [apply_word(spec, w) for w in words])


def _power(base: ElementSet, m: int) -> ElementSet:
    """base^m for a set containing the identity, stopping once it saturates."""
    result = ElementSet.trivial(base.group)
    for _ in range(m):
        grown = set_product(result, base)
        if grown == result:
            break
        result = grown
    return result


def unit_ball_image(spec: QuotientSpec, S: SymmetricWordSet) -> ElementSet:
    """psi(B_1(1)) = classes of psi(S) plus the identity (psi is onto H)."""
    G = spec.group
    return class_union(G, [apply_word(spec, s) for s in S]).union(ElementSet.trivial(G))


def ball_image(
    spec: QuotientSpec, S: SymmetricWordSet, relators: Sequence[ReducedWord], m: int
) -> ElementSet:
    """psi(B_m(1) N) as a subset of H."""
    if m < 0:
        raise ContractError(f"radius m must be nonnegative, got {m}", invariant="radius")
    G = spec.group
    kernel = normal_closure(G, _images(spec, relators))
    return set_product(_power(unit_ball_image(spec, S), m), kernel)


def _certificate(
    kind: str,
    problem: ProbeProblem,
    spec: QuotientSpec,
    verdict: Verdict,
    checked: Optional[ElementSet] = None,
    details: Optional[Dict[str, str]] = None,
    reason: str = "",
) -> SeparationCertificate:
    image = spec.group.format_element(apply_word(spec, problem.w))
    return SeparationCertificate(
        kind=kind,
        problem=problem,
        spec=spec,
        verdict=verdict,
        image=image,
        checked_set=checked.describe() if checked is not None else [],
        details=dict(details or {}),
        reason=reason,
    )


def separation_check_rf(problem: ProbeProblem, spec: QuotientSpec) -> SeparationCertificate:
    """Separated iff psi kills N and psi(w) is outside psi(B_m(1) N)."""
    if not kills(spec, problem.relators):
        return _certificate(
            "rf-separation", problem, spec, Verdict.INCONCLUSIVE,
            reason="the spec does not kill every relator",
        )
    X = ball_image(spec, problem.S, problem.relators, problem.m)
    inside = apply_word(spec, problem.w) in X
    return _certificate(
        "rf-separation", problem, spec,
        Verdict.CONTAINED if inside else Verdict.SEPARATED,
        checked=X,
    )


def class_product_image(spec: QuotientSpec, problem: ProbeProblem) -> ElementSet:
    """Image of g_1^F ... g_k^F h_1^F ... h_l^F."""
    G = spec.group
    product = ElementSet.trivial(G)
    for word in [c.word for c in problem.class_words] + [k.word for k in problem.kernel_words]:
        product = set_product(product, class_union(G, [apply_word(spec, word)]))
    return product


def dagger_set(spec: QuotientSpec, problem: ProbeProblem) -> ElementSet:
    """psi(B_1(1))^m psi(h_1^F) ... psi(h_l^F)."""
    G = spec.group
    result = _power(unit_ball_image(spec, problem.S), problem.m)
    for k in problem.kernel_words:
        result = set_product(result, class_union(G, [apply_word(spec, k.word)]))
    return result


def closure_product_check(problem: ProbeProblem, spec: QuotientSpec) -> SeparationCertificate:
    """Membership of psi(w) in the class product, and containment in the ball image.

    Separated iff psi(w) is not in the image of the class product.
    Containment failure in one quotient refutes nothing, since images only
    shrink sets; it is reported as "violated-in-image".
    """
    product = class_product_image(spec, problem)
    x = apply_word(spec, problem.w)
    member = x in product
    contained = product.issubset(ball_image(spec, problem.S, problem.relators, problem.m))
    details = {
        "membership": "yes" if member else "no",
        "containment": "consistent" if contained else "violated-in-image",
        "dagger": "holds" if x not in dagger_set(spec, problem) else "fails",
        "kills_relators": str(kills(spec, problem.relators)).lower(),
    }
    return _certificate(
        "product-membership", problem, spec,
        Verdict.CONTAINED if member else Verdict.SEPARATED,
        checked=product,
        details=details,
    )


def lef_separation_check(
    problem: ProbeProblem,
    spec: QuotientSpec,
    D: Optional[Sequence[ReducedWord]] = None,
) -> SeparationCertificate:
    """Partial isomorphism on D plus separation of w from psi(B_m(1) N).

    A failing partial-isomorphism clause makes the certificate
    inconclusive; otherwise separated iff psi(w) is outside the ball image.
    """
    if D is not None and tuple(D) != problem.D:
        problem = ProbeProblem(
            problem.rank, problem.S, problem.relators, problem.w, problem.m,
            problem.kernel_words, problem.class_words, tuple(D),
        )
    m = PartialMap.from_spec(spec, problem.D)
    broken = structure_violations(m)
    X = ball_image(spec, problem.S, problem.relators, problem.m)
    inside = apply_word(spec, problem.w) in X
    details = {
        "partial_isomorphism": "holds" if not broken else "fails",
        "separation": "contained" if inside else "separated",
    }
    if broken:
        return _certificate(
            "lef-separation", problem, spec, Verdict.INCONCLUSIVE,
            checked=X, details=details,
            reason="; ".join(v.describe() for v in broken),
        )
    return _certificate(
        "lef-separation", problem, spec,
        Verdict.CONTAINED if inside else Verdict.SEPARATED,
        checked=X, details=details,
    )


_PROBES = {
    "rf-separation": separation_check_rf,
    "lef-separation": lef_separation_check,
    "product-membership-no": closure_product_check,
}

_KINDS = {
    "rf-separation": separation_check_rf,
    "lef-separation": lef_separation_check,
    "product-membership": closure_product_check,
}


@dataclass
class SearchReport:
    """Outcome of a catalog scan: the first success, or exhaustion."""

    goal: str
    verdict: Verdict
    certificate: Optional[SeparationCertificate]
    outcomes: List[Tuple[str, str]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def get_summary(self) -> str:
        if self.certificate is not None:
            return (
                f"{self.verdict.symbol} {self.goal}: separated by {self.certificate.spec.label} "
                f"after {len(self.outcomes)} specs"
            )
        return f"{self.verdict.symbol} {self.goal}: catalog of {len(self.outcomes)} specs exhausted"

    def to_record(self) -> Dict[str, Any]:
        return {
            "goal": self.goal,
            "verdict": self.verdict.value,
            "certificate": None if self.certificate is None else self.certificate.to_record(),
            "outcomes": [{"spec": label, "verdict": v} for label, v in self.outcomes],
            "notes": list(self.notes),
        }


def quotient_search(
    problem: ProbeProblem, catalog: Sequence[QuotientSpec], goal: str
) -> SearchReport:
    """Scan the catalog in order; the first separating spec wins."""
    probe = _PROBES.get(goal)
    if probe is None:
        raise ContractError(f"unknown goal '{goal}', expected one of: {', '.join(GOALS)}")
    outcomes: List[Tuple[str, str]] = []
    for spec in catalog:
        cert = probe(problem, spec)
        outcomes.append((spec.label, cert.verdict.value))
        logger.debug(f"{goal} in {spec.label}: {cert.verdict.value}")
        if cert.verdict == Verdict.SEPARATED:
            return SearchReport(goal, Verdict.SEPARATED, cert, outcomes)
    return SearchReport(goal, Verdict.EXHAUSTED, None, outcomes, [EXHAUSTION_CAVEAT])


def cyclic_catalog(rank: int, orders: Sequence[int], max_order: int = DEFAULT_MAX_ORDER) -> List[QuotientSpec]:
    """Specs onto (Z/n)^rank, generator i acting as an n-cycle on its own block."""
    catalog = []
    for n in orders:
        if n < 1:
            raise ContractError(f"cyclic order must be positive, got {n}")
        degree = rank * n
        images = []
        for i in range(rank):
            array = list(range(degree))
            for j in range(n):
                array[i * n + j] = i * n + (j + 1) % n
            images.append(Permutation(array))
        name = f"Z/{n}" if rank == 1 else f"(Z/{n})^{rank}"
        catalog.append(QuotientSpec(rank, tuple(images), name, max_order))
    return catalog


def _evaluate(G: FiniteGroup, image_ids: Sequence[int], w: ReducedWord) -> int:
    current = G.identity
    for letter in w.letters:
        g = image_ids[abs(letter) - 1]
        current = G.multiply(current, g if letter > 0 else G.inverse(g))
    return current


def homomorphism_catalog(
    rank: int,
    targets: Sequence[FiniteGroup],
    relators: Sequence[ReducedWord] = (),
    max_specs: int = 1000,
) -> List[QuotientSpec]:
    """All generator-image tuples into the targets that kill the relators.

    Tuples are enumerated lexicographically by element id, target by target,
    until max_specs specs have been collected.
    """
    catalog: List[QuotientSpec] = []
    for G in targets:
        for ids in itertools.product(range(G.order), repeat=rank):
            if all(_evaluate(G, ids, r) == G.identity for r in relators):
                images = tuple(G.element(g) for g in ids)
                label = f"{G.name}:{','.join(str(g) for g in ids)}"
                catalog.append(QuotientSpec(rank, images, label))
                if len(catalog) >= max_specs:
                    logger.debug(f"Homomorphism catalog stopped at {max_specs} specs")
                    return catalog
    return catalog


def kernel_rescaled_norm(
    spec: QuotientSpec,
    S: SymmetricWordSet,
    relators: Sequence[ReducedWord],
    eps: Fraction,
) -> NormTable:
    """Invariant norm on H where images of N cost eps and images of S cost 1."""
    G = spec.group
    kernel = normal_closure(G, _images(spec, relators))
    return rescaled_kernel_norm(G, _images(spec, list(S)), kernel, eps)


def verify_certificate(cert: SeparationCertificate) -> WitnessReport:
    """Recompute a certificate from its problem and spec alone."""
    probe = _KINDS.get(cert.kind)
    if probe is None:
        raise MalformedInputError(f"unknown certificate kind '{cert.kind}'")
    replay = probe(cert.problem, cert.spec)
    violations = []
    if replay.verdict != cert.verdict:
        violations.append(
            Violation("verdict", (cert.verdict.value, replay.verdict.value))
        )
    if replay.image != cert.image:
        violations.append(Violation("image", (cert.image, replay.image)))
    if replay.checked_set != cert.checked_set:
        violations.append(
            Violation("checked-set", (str(len(cert.checked_set)), str(len(replay.checked_set))))
        )
    return WitnessReport.from_violations(
        "certificate-replay",
        violations,
        parameters={"kind": cert.kind, "spec": cert.spec.label},
        measurements={"verdict": replay.verdict.value},
    )


def audit_certificates(
    certs: Sequence[SeparationCertificate], bounds: Sequence[NormBound] = ()
) -> WitnessReport:
    """Look for contradictions among certificates and free-word upper bounds.

    Two certificates for identical inputs must agree. A word separated from
    B_m(1) with N = 1 cannot have a decomposition into at most m conjugates.
    """
    violations: List[Violation] = []
    seen: Dict[str, SeparationCertificate] = {}
    for cert in certs:
        key = cert.key()
        first = seen.setdefault(key, cert)
        if first.verdict != cert.verdict:
            violations.append(
                Violation(
                    "contradiction",
                    (cert.kind, cert.spec.label),
                    detail=f"{first.verdict.value} vs {cert.verdict.value}",
                )
            )
    for cert in certs:
        if cert.kind != "rf-separation" or cert.verdict != Verdict.SEPARATED:
            continue
        if cert.problem.relators:
            continue
        for bound in bounds:
            if (
                bound.word == cert.problem.w
                and not bound.relators
                and bound.upper is not None
                and bound.certificate_up is not None
                and bound.upper <= cert.problem.m
                and all(f.base in cert.problem.S for f in bound.certificate_up)
            ):
                violations.append(
                    Violation(
                        "certificate-conflict",
                        (str(cert.problem.w), cert.spec.label),
                        Fraction(bound.upper),
                        detail=f"decomposition with {bound.upper} <= m = {cert.problem.m} factors",
                    )
                )
    return WitnessReport.from_violations(
        "certificate-audit",
        violations,
        parameters={"certificates": str(len(certs)), "bounds": str(len(bounds))},
    )
