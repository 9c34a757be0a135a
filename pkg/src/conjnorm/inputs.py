"""
Input files for Conjnorm

YAML documents validated by pydantic models and turned into domain
objects. Words are strings of signed integers ("1 2 -1 -2", "e" for the
identity), permutations are 0-based cycle strings ("(0 1)(2 3)") or array
forms ("[1, 0, 2]"), rationals are integers or "p/q" strings.
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, validator

from .errors import ContractError, MalformedInputError
from .free_bounds import SearchBudget, estimate_norm
from .groups import (
    DEFAULT_MAX_ORDER,
    ElementSet,
    FiniteGroup,
    QuotientSpec,
    apply_word,
    direct_product,
    group_from_strings,
    kills,
    named_group,
    parse_permutation,
)
from .norms import (
    INTEGERS,
    RATIONALS,
    DomainKind,
    NormTable,
    ValueDomain,
    WeightedGenSet,
    weighted_word_norm,
    word_norm,
)
from .probes import ProbeProblem, SeparationCertificate, cyclic_catalog, homomorphism_catalog
from .words import ReducedWord, SymmetricWordSet, parse_word

logger = logging.getLogger(__name__)

Rational = Union[int, str]
Model = TypeVar("Model", bound=BaseModel)


def parse_rational(value: Rational, what: str = "value") -> Fraction:
    """Parse an integer or a "p/q" string exactly."""
    if isinstance(value, bool):
        raise MalformedInputError(f"{what} must be a rational, got {value!r}")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise MalformedInputError(f"{what} '{value}' is not an integer or p/q rational") from None


def _words(texts: Sequence[Union[str, int]], rank: int) -> List[ReducedWord]:
    return [parse_word(str(t), rank) for t in texts]


class InputModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GroupModel(InputModel):
    """A group by permutation generators, by family name, or as a direct product."""

    generators: Optional[List[str]] = None
    degree: Optional[int] = None
    name: str = ""
    named: Optional[str] = None
    product: Optional[List["GroupModel"]] = None

    @validator("named")
    def validate_named(cls, v: Optional[str]) -> Optional[str]:
        """Family name followed by integer parameters."""
        if v is not None:
            parts = v.split()
            if len(parts) < 2 or not all(p.isdigit() for p in parts[1:]):
                raise ValueError("named groups look like 'symmetric 3' or 'abelian 2 2'")
        return v

    def build(self, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
        given = [self.generators is not None, self.named is not None, self.product is not None]
        if sum(given) != 1:
            raise MalformedInputError("a group needs exactly one of: generators, named, product")
        if self.named is not None:
            kind, *params = self.named.split()
            return named_group(kind, *(int(p) for p in params), max_order=max_order)
        if self.product is not None:
            return direct_product(*(g.build(max_order) for g in self.product), max_order=max_order)
        return group_from_strings(self.generators or [], self.degree, self.name, max_order)


class SpecModel(InputModel):
    """Images of the free generators."""

    images: List[str]
    degree: Optional[int] = None
    name: str = ""

    def build(self, max_order: int = DEFAULT_MAX_ORDER) -> QuotientSpec:
        return QuotientSpec.from_strings(self.images, self.degree, self.name, max_order)


class NormModel(InputModel):
    """A norm on a finite group: explicit values, a word norm or a weighted word norm."""

    values: Optional[Dict[str, Rational]] = None
    word_norm: Optional[List[str]] = None
    weighted: Optional[Dict[str, Rational]] = None
    invariant: bool = True
    pad: bool = False
    domain: str = "rationals"
    bound: Optional[Rational] = None

    @validator("domain")
    def validate_domain(cls, v: str) -> str:
        valid = [k.value for k in DomainKind]
        if v.lower() not in valid:
            raise ValueError(f"domain must be one of: {', '.join(valid)}")
        return v.lower()

    def value_domain(self) -> ValueDomain:
        kind = DomainKind(self.domain)
        if kind == DomainKind.INTERVAL:
            if self.bound is None:
                raise MalformedInputError("an interval domain needs a bound")
            return ValueDomain.interval(parse_rational(self.bound, "bound"))
        return INTEGERS if kind == DomainKind.INTEGERS else RATIONALS

    def build(self, G: FiniteGroup) -> NormTable:
        given = [self.values is not None, self.word_norm is not None, self.weighted is not None]
        if sum(given) != 1:
            raise MalformedInputError("a norm needs exactly one of: values, word_norm, weighted")
        if self.word_norm is not None:
            S = ElementSet(G, [G.id_of(parse_permutation(p, G.degree)) for p in self.word_norm])
            return word_norm(G, S, self.invariant, self.pad)
        if self.weighted is not None:
            weights = {
                G.id_of(parse_permutation(p, G.degree)): parse_rational(w, f"weight of {p}")
                for p, w in self.weighted.items()
            }
            return weighted_word_norm(
                G, WeightedGenSet.symmetric(G, weights), self.invariant, self.pad
            )
        values: List[Optional[Fraction]] = [None] * G.order
        for p, v in (self.values or {}).items():
            values[G.id_of(parse_permutation(p, G.degree))] = parse_rational(v, f"value of {p}")
        missing = [G.format_element(g) for g, v in enumerate(values) if v is None]
        if missing:
            raise ContractError(
                f"no value for {len(missing)} elements, e.g. {missing[0]}", invariant="total"
            )
        return NormTable(G, tuple(v for v in values if v is not None), self.value_domain())


GroupModel.model_rebuild()


class NormFile(InputModel):
    group: GroupModel
    norm: NormModel
    kernel: Optional[List[str]] = None

    def build(self, max_order: int = DEFAULT_MAX_ORDER) -> NormTable:
        return self.norm.build(self.group.build(max_order))

    def kernel_set(self, G: FiniteGroup) -> ElementSet:
        """The kernel elements listed in the file."""
        if not self.kernel:
            raise MalformedInputError("the norm file lists no kernel elements")
        return ElementSet(G, [G.id_of(parse_permutation(p, G.degree)) for p in self.kernel])


class ChainFile(InputModel):
    rank: int = Field(gt=0)
    prime: int
    levels: List[SpecModel]
    words: List[Union[str, int]]

    def specs(self, max_order: int = DEFAULT_MAX_ORDER) -> List[QuotientSpec]:
        return [level.build(max_order) for level in self.levels]

    def word_list(self) -> List[ReducedWord]:
        return _words(self.words, self.rank)


class KernelFactorModel(InputModel):
    base: Union[str, int]
    conjugator: Union[str, int] = ""


class KernelWordModel(InputModel):
    word: Union[str, int]
    factors: List[KernelFactorModel] = Field(default_factory=list)


class ClassWordModel(InputModel):
    word: Union[str, int]
    base: Union[str, int]
    conjugator: Union[str, int] = ""
    kernel: Optional[KernelWordModel] = None


class ProblemFile(InputModel):
    """A free-group problem: words, relators and the quotients to probe with."""

    rank: int = Field(gt=0)
    S: List[Union[str, int]] = Field(default_factory=list)
    relators: List[Union[str, int]] = Field(default_factory=list)
    w: Union[str, int] = ""
    m: int = Field(default=0, ge=0)
    kernel_words: List[KernelWordModel] = Field(default_factory=list)
    class_words: List[ClassWordModel] = Field(default_factory=list)
    D: List[Union[str, int]] = Field(default_factory=list)
    words: List[Union[str, int]] = Field(default_factory=list)
    probes: List[SpecModel] = Field(default_factory=list)
    specs: List[SpecModel] = Field(default_factory=list)
    cyclic_orders: List[int] = Field(default_factory=list)
    targets: List[GroupModel] = Field(default_factory=list)
    max_specs: int = Field(default=1000, gt=0)

    def generating_set(self) -> SymmetricWordSet:
        if self.S:
            return SymmetricWordSet.closure(_words(self.S, self.rank), self.rank)
        return SymmetricWordSet.standard_basis(self.rank)

    def relator_words(self) -> List[ReducedWord]:
        return _words(self.relators, self.rank)

    def word_list(self) -> List[ReducedWord]:
        """Words to bound: the listed words, else w."""
        return _words(self.words or [self.w], self.rank)

    def problem(self) -> ProbeProblem:
        record = self.model_dump(include={"rank", "S", "relators", "w", "m", "kernel_words", "class_words", "D"})
        return ProbeProblem.from_record(record)

    def catalog(self, max_order: int = DEFAULT_MAX_ORDER) -> List[QuotientSpec]:
        """Explicit specs, then cyclic specs, then homomorphisms into targets."""
        specs = [s.build(max_order) for s in self.specs]
        specs += cyclic_catalog(self.rank, self.cyclic_orders, max_order)
        if self.targets:
            specs += homomorphism_catalog(
                self.rank,
                [t.build(max_order) for t in self.targets],
                self.relator_words(),
                self.max_specs,
            )
        return specs


class WitnessFile(InputModel):
    """A witness: domain words, their images and the target norm."""

    check: str = "mws"
    rank: int = Field(gt=0)
    S: List[Union[str, int]] = Field(default_factory=list)
    relators: List[Union[str, int]] = Field(default_factory=list)
    domain: List[Union[str, int]]
    norms: Optional[List[Optional[Rational]]] = None
    Q: List[Rational] = Field(default_factory=list)
    epsilon: Optional[Rational] = None
    r: Optional[Rational] = None
    spec: Optional[SpecModel] = None
    target: Optional[GroupModel] = None
    images: Optional[List[str]] = None
    target_norm: Optional[NormModel] = None
    basis: Optional[List[str]] = None
    probes: List[SpecModel] = Field(default_factory=list)
    hom_required: bool = False
    metric: bool = False
    weak: bool = False
    isometric: bool = False

    @validator("check")
    def validate_check(cls, v: str) -> str:
        valid = ["mws", "gr", "almost-hom", "norm-equality", "metric-hom", "lef", "stability"]
        if v.lower() not in valid:
            raise ValueError(f"check must be one of: {', '.join(valid)}")
        return v.lower()

    def generating_set(self) -> SymmetricWordSet:
        if self.S:
            return SymmetricWordSet.closure(_words(self.S, self.rank), self.rank)
        return SymmetricWordSet.standard_basis(self.rank)

    def relator_words(self) -> List[ReducedWord]:
        return _words(self.relators, self.rank)

    def domain_words(self) -> List[ReducedWord]:
        return _words(self.domain, self.rank)

    def thresholds(self) -> List[Fraction]:
        return [parse_rational(q, "threshold") for q in self.Q]

    def build_spec(self, max_order: int = DEFAULT_MAX_ORDER) -> Optional[QuotientSpec]:
        return self.spec.build(max_order) if self.spec is not None else None

    def target_group(
        self, spec: Optional[QuotientSpec], max_order: int = DEFAULT_MAX_ORDER
    ) -> FiniteGroup:
        if spec is not None:
            return spec.group
        if self.target is None:
            raise MalformedInputError("a witness needs a spec or a target group")
        return self.target.build(max_order)

    def image_ids(self, G: FiniteGroup, spec: Optional[QuotientSpec]) -> Tuple[int, ...]:
        """Images of the domain words: listed explicitly or through the spec."""
        if self.images is not None:
            if len(self.images) != len(self.domain):
                raise MalformedInputError(
                    f"{len(self.images)} images for {len(self.domain)} domain words"
                )
            return tuple(G.id_of(parse_permutation(p, G.degree)) for p in self.images)
        if spec is None:
            raise MalformedInputError("a witness needs images or a spec")
        return tuple(
            G.id_of(spec.group.element(apply_word(spec, w))) for w in self.domain_words()
        )

    def basis_ids(self, G: FiniteGroup) -> Tuple[int, ...]:
        if not self.basis:
            raise MalformedInputError("a stability check needs basis images")
        return tuple(G.id_of(parse_permutation(p, G.degree)) for p in self.basis)

    def build_target_norm(self, G: FiniteGroup, spec: Optional[QuotientSpec]) -> NormTable:
        """The given target norm, or the invariant word norm of the S images."""
        if self.target_norm is not None:
            return self.target_norm.build(G)
        if spec is not None:
            images = [apply_word(spec, s) for s in self.generating_set()]
        else:
            images = list(G.generator_ids)
        return word_norm(G, ElementSet(G, images), conjugacy_invariant=True, pad=True)

    def source_norms(
        self,
        budget: SearchBudget,
        spec: Optional[QuotientSpec],
        max_order: int = DEFAULT_MAX_ORDER,
    ) -> List[Optional[Fraction]]:
        """Given norms, else exact bound estimates (None where inexact)."""
        if self.norms is not None:
            if len(self.norms) != len(self.domain):
                raise MalformedInputError(f"{len(self.norms)} norms for {len(self.domain)} domain words")
            return [None if v is None else parse_rational(v, "norm") for v in self.norms]
        relators = self.relator_words()
        probes = [p.build(max_order) for p in self.probes]
        if spec is not None and kills(spec, relators):
            probes.append(spec)
        S = self.generating_set()
        norms: List[Optional[Fraction]] = []
        for w in self.domain_words():
            bound = estimate_norm(w, S, budget, probes, relators)
            norms.append(Fraction(bound.lower) if bound.exact else None)
        return norms


def _read_document(path: Union[str, Path]) -> Any:
    with open(path) as f:
        try:
            return yaml.safe_load(f)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise MalformedInputError(
                str(getattr(e, "problem", e)),
                line=mark.line + 1 if mark else None,
                column=mark.column + 1 if mark else None,
                source=str(path),
            ) from None


def load_input(path: Union[str, Path], model: Type[Model]) -> Model:
    """Read a YAML file into a validated model.

    Raises:
        MalformedInputError: YAML syntax or schema violations
    """
    data = _read_document(path)
    if not isinstance(data, dict):
        raise MalformedInputError("the document must be a mapping", source=str(path))
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        raise MalformedInputError(
            f"{location}: {first['msg']} ({e.error_count()} errors)", source=str(path)
        ) from None


def load_certificates(path: Union[str, Path], max_order: int = DEFAULT_MAX_ORDER) -> List[SeparationCertificate]:
    """Read certificate records, one JSON object per line.

    Search reports are accepted too; their certificate is taken.
    """
    certificates = []
    with open(path) as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedInputError(e.msg, line=number, column=e.colno, source=str(path)) from None
            if not isinstance(record, dict):
                raise MalformedInputError("a certificate must be an object", line=number, source=str(path))
            if "goal" in record:
                record = record.get("certificate")
                if record is None:
                    continue
            certificates.append(SeparationCertificate.from_record(record, max_order))
    logger.debug(f"Loaded {len(certificates)} certificates from {path}")
    return certificates
