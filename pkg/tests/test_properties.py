"""
Property suites over a corpus of small groups.

Oracle comparisons, randomized norm and witness instances, and the
replay/consistency audit of certificates. Randomized suites draw from
random.Random(config.seed) so every run sees the same instances.
"""

import json
import random
from fractions import Fraction
from typing import Optional

import pytest

from conjnorm.free_bounds import SearchBudget, estimate_norm, upper_bound
from conjnorm.groups import (
    ElementSet,
    FiniteGroup,
    apply_word,
    class_union,
    conjugacy_class,
    direct_product,
    generated_subgroup,
    named_group,
    normal_closure,
    set_product,
)
from conjnorm.models import Verdict
from conjnorm.norms import (
    ChainNorm,
    WeightedGenSet,
    ball,
    quotient_norm,
    restrict_norm,
    round_norm,
    validate_norm,
    weighted_word_norm,
    word_norm,
)
from conjnorm.probes import (
    EXHAUSTION_CAVEAT,
    ProbeProblem,
    SeparationCertificate,
    audit_certificates,
    ball_image,
    closure_product_check,
    cyclic_catalog,
    homomorphism_catalog,
    lef_separation_check,
    quotient_search,
    separation_check_rf,
    verify_certificate,
)
from conjnorm.witness import (
    PartialMap,
    ThresholdSet,
    build_lef_witness,
    check_almost_hom,
    check_lef_witness,
    check_mws_witness,
    check_norm_equality,
    measure_mws_epsilon,
    stability_extend,
    structure_violations,
)
from conjnorm.words import enumerate_ball, parse_word, reduce_word
from tests.fixtures import basis, cyclic_spec, generator_norm, s3_spec, spec_norm, torus_spec

COMMUTATOR = parse_word("-1 -2 1 2", 2)
LETTERS = (1, -1, 2, -2)


@pytest.fixture(scope="module")
def corpus() -> list[FiniteGroup]:
    """Groups of order at most 60."""
    return [
        named_group("cyclic", 7),
        named_group("dihedral", 5),
        named_group("dihedral", 6),
        named_group("symmetric", 3),
        named_group("symmetric", 4),
        named_group("alternating", 4),
        named_group("abelian", 2, 4),
        direct_product(named_group("cyclic", 2), named_group("symmetric", 3)),
    ]


@pytest.fixture
def rng(test_config) -> random.Random:
    return random.Random(test_config.seed)


def oracle_word_norm(G: FiniteGroup, gens: list[int]) -> list[Optional[int]]:
    """Word norm by iterated products with the conjugacy closure; None if unreached."""
    closure = class_union(G, gens + [G.inverse(g) for g in gens])
    values = {G.identity: 0}
    reached = ElementSet.trivial(G)
    level = 0
    while True:
        level += 1
        grown = reached.union(set_product(reached, closure))
        if grown == reached:
            break
        for g in grown:
            values.setdefault(g, level)
        reached = grown
    return [values.get(g) for g in range(G.order)]


def torus_word(a: int, b: int):
    """x_0^a x_1^b, the normal form of (a, b) in Z^2."""
    letters = [1 if a > 0 else -1] * abs(a) + [2 if b > 0 else -2] * abs(b)
    return reduce_word(letters, 2)


def torus_ball(radius: int) -> list[tuple[int, int]]:
    return [
        (a, b)
        for a in range(-radius, radius + 1)
        for b in range(-radius, radius + 1)
        if abs(a) + abs(b) <= radius
    ]


def evaluate(G: FiniteGroup, images: tuple[int, ...], w) -> int:
    current = G.identity
    for letter in w.letters:
        g = images[abs(letter) - 1]
        current = G.multiply(current, g if letter > 0 else G.inverse(g))
    return current


class TestNormConstructors:
    """Every constructor yields a norm with the expected flags."""

    def test_word_norm_matches_oracle(self, corpus):
        for G in corpus:
            table = generator_norm(G)
            assert [int(v) for v in table.values] == oracle_word_norm(G, list(G.generator_ids)), G.name

    def test_word_norm_over_random_sets_matches_oracle(self, corpus, rng):
        for G in corpus:
            gens = sorted({rng.randrange(G.order) for _ in range(2)} | set(G.generator_ids[:1]))
            table = word_norm(G, ElementSet(G, gens), pad=True)
            oracle = oracle_word_norm(G, gens)
            for g, value in enumerate(table.values):
                expected = G.order + 1 if oracle[g] is None else oracle[g]
                assert value == expected, G.name

    def test_quotient_and_restriction(self, corpus, rng):
        for G in corpus:
            table = generator_norm(G)
            g = rng.randrange(G.order)
            N = normal_closure(G, ElementSet(G, [g]))
            quotient = quotient_norm(table, N)
            assert validate_norm(quotient, "norm", require_invariant=True).passed, G.name

            H = generated_subgroup(G, [g])
            restricted = restrict_norm(table, H)
            assert validate_norm(restricted, "norm", require_invariant=True).passed, G.name

    @pytest.mark.slow
    def test_rounding_contract(self, corpus, rng):
        for index in range(500):
            G = corpus[index % len(corpus)]
            weights = {g: Fraction(rng.randint(1, 8), 4) for g in G.generator_ids}
            for _ in range(2):
                g = rng.randrange(1, G.order)
                weights[g] = Fraction(rng.randint(1, 8), 4)
            table = weighted_word_norm(G, WeightedGenSet.symmetric(G, weights))
            assert validate_norm(table, "norm", require_invariant=True).passed

            rounded = round_norm(table)
            assert validate_norm(rounded, "norm", require_invariant=True).passed
            for before, after in zip(table.values, rounded.values):
                assert before <= after < before + 1

    def test_rounding_fixes_integer_norms(self, corpus):
        for G in corpus:
            table = generator_norm(G)
            assert round_norm(table).values == table.values


class TestGroupLaws:
    """Set products and conjugacy classes on random instances."""

    def test_set_product_is_associative(self, corpus, rng):
        for _ in range(100):
            G = rng.choice(corpus)
            A, B, C = (
                ElementSet(G, rng.sample(range(G.order), rng.randint(1, min(4, G.order))))
                for _ in range(3)
            )
            assert set_product(set_product(A, B), C) == set_product(A, set_product(B, C)), G.name

    def test_conjugacy_classes_partition_the_group(self, corpus):
        for G in corpus:
            classes = {conjugacy_class(G, g) for g in range(G.order)}
            assert sum(len(c) for c in classes) == G.order, G.name
            covered = set()
            for c in classes:
                assert G.order % len(c) == 0, G.name
                covered.update(c.ids())
            assert covered == set(range(G.order))
            for g in range(G.order):
                assert g in conjugacy_class(G, g)


class TestBallLaws:
    """Metric balls grow with the radius."""

    def test_balls_are_monotone(self, corpus, rng):
        radii = [Fraction(k, 2) for k in range(0, 13)]
        for G in corpus:
            table = generator_norm(G)
            g = rng.randrange(G.order)
            for r, larger in zip(radii, radii[1:]):
                closed = ball(table, r, g)
                assert closed.issubset(ball(table, larger, g)), (G.name, r)
                assert ball(table, r, g, strict=True).issubset(closed), (G.name, r)
            assert len(ball(table, table.max_value(), g)) == G.order


class TestChainTopology:
    """Small chain values are exactly the deep kernels."""

    def test_powers_of_the_generator(self):
        norm = ChainNorm([cyclic_spec(3 ** s) for s in range(1, 5)], 2)
        for k in range(-200, 201):
            value = norm(reduce_word([1 if k > 0 else -1] * abs(k), 1)).value
            assert value <= 1
            for s in range(1, 5):
                assert (value < Fraction(1, 2 ** s)) == (k % 3 ** s == 0), (k, s)


class TestAbelianWitnesses:
    """Z^2 is metrically residually finite through (Z/n)^2."""

    def test_torus_catalog_builds_witnesses(self, rng):
        reps = torus_ball(4)
        catalog = cyclic_catalog(2, range(2, 12))
        Q = ThresholdSet.of(range(6))
        for _ in range(20):
            chosen = rng.sample(reps, rng.randint(1, 8))
            D = [torus_word(a, b) for a, b in chosen]
            norms = [Fraction(abs(a) + abs(b)) for a, b in chosen]

            first = None
            for spec in catalog:
                result = build_lef_witness([COMMUTATOR], basis(2), D, Q, spec, norms)
                if result.report.passed:
                    first = spec
                    assert validate_norm(result.norm, "norm", require_invariant=True).passed
                    break
            assert first is not None, chosen
            assert first.group.order <= 121

    def test_order_eleven_suffices(self):
        reps = torus_ball(4)
        D = [torus_word(a, b) for a, b in reps]
        norms = [Fraction(abs(a) + abs(b)) for a, b in reps]
        result = build_lef_witness(
            [COMMUTATOR], basis(2), D, ThresholdSet.of(range(6)), torus_spec(11), norms
        )
        assert result.report.verdict == Verdict.PASS

    @pytest.mark.slow
    def test_witness_implications(self, rng):
        cache = {}
        Q = ThresholdSet.of(range(7))
        reps = torus_ball(3)
        passing = 0
        for _ in range(200):
            n = rng.randrange(3, 13)
            if n not in cache:
                spec = cyclic_catalog(2, [n])[0]
                cache[n] = (spec, spec_norm(spec, 2))
            spec, target = cache[n]
            chosen = rng.sample(reps, rng.randint(1, 10))
            m = PartialMap.from_spec(
                spec,
                [torus_word(a, b) for a, b in chosen],
                [Fraction(abs(a) + abs(b)) for a, b in chosen],
            )
            rf = check_lef_witness(
                m, Q, target, spec, [COMMUTATOR], basis(2), hom_required=True, metric=True
            )
            if not rf.passed:
                continue
            passing += 1
            assert check_lef_witness(m, Q, target).passed
            for eps in (Fraction(1, 10), Fraction(1, 100)):
                assert check_mws_witness(m, eps, target).passed
        assert passing > 0


class TestWitnessModes:
    """Almost-homomorphism and gr-mode checks against their simpler forms."""

    @staticmethod
    def random_map(G: FiniteGroup, table, rng: random.Random) -> PartialMap:
        """The identity map on a few elements, sometimes with a moved image or norm."""
        ids = rng.sample(range(G.order), rng.randint(1, min(G.order, 8)))
        images = list(ids)
        norms = [table[g] for g in ids]
        if rng.random() < 0.3:
            images[rng.randrange(len(ids))] = rng.randrange(G.order)
        if rng.random() < 0.3:
            i = rng.randrange(len(ids))
            norms[i] += rng.choice([Fraction(1), Fraction(1, 2)])
        return PartialMap(tuple(ids), tuple(images), G, tuple(norms), source_group=G)

    def test_almost_hom_agrees_with_norm_equality(self, corpus, rng):
        outcomes = set()
        for _ in range(200):
            G = rng.choice(corpus)
            table = generator_norm(G)
            m = self.random_map(G, table, rng)
            Q = ThresholdSet.of(sorted(set(m.source_norms)))
            report = check_almost_hom(m, Q, table)
            assert report.notes == ["threshold clause compared as norm equality"]
            assert report.passed == check_norm_equality(m, table).passed
            outcomes.add(report.passed)
        assert outcomes == {True, False}

    def test_almost_hom_without_the_fast_path(self, corpus, rng):
        def cell(x, Q):
            return tuple((x < q, x == q) for q in Q)

        slow = 0
        for _ in range(200):
            G = rng.choice(corpus)
            table = generator_norm(G)
            m = self.random_map(G, table, rng)
            nonzero = sorted({v for v in m.source_norms if v != 0})
            if not nonzero:
                continue
            omitted = rng.choice(nonzero)
            Q = ThresholdSet.of([v for v in m.source_norms if v != omitted])
            report = check_almost_hom(m, Q, table)
            assert report.notes == []
            slow += 1

            expected = not structure_violations(m) and all(
                cell(source, Q) == cell(table[image], Q)
                for source, image in zip(m.source_norms, m.images)
            )
            assert report.passed == expected
            if check_norm_equality(m, table).passed:
                assert report.passed
        assert slow > 0

    def test_metric_pass_implies_gr_pass(self, rng):
        reps = torus_ball(3)
        cache = {}
        implied = 0
        for _ in range(100):
            n = rng.randrange(3, 13)
            if n not in cache:
                spec = cyclic_catalog(2, [n])[0]
                cache[n] = (spec, spec_norm(spec, 2))
            spec, target = cache[n]
            chosen = rng.sample(reps, rng.randint(2, 8))
            m = PartialMap.from_spec(
                spec,
                [torus_word(a, b) for a, b in chosen],
                [Fraction(abs(a) + abs(b)) for a, b in chosen],
            )
            if not m.is_injective():
                continue
            for eps in (Fraction(1, 4), Fraction(1, 2)):
                smallest = min(v for i, v in enumerate(m.source_norms) if not m.is_identity(i))
                r = smallest - eps - Fraction(1, 100)
                metric = check_mws_witness(m, eps, target)
                gr = check_mws_witness(m, eps, target, mode="gr", r=r)
                if metric.passed:
                    implied += 1
                    assert gr.passed, (n, chosen, eps)
        assert implied > 0


class TestStability:
    """Extensions of basis images stay within 3k*eps."""

    @staticmethod
    def prefix_closed_domain(rng: random.Random, size: int) -> list:
        """e, the four letters, then one-letter extensions of words already present."""
        D = [reduce_word([], 2)] + [reduce_word([a], 2) for a in LETTERS]
        present = set(D)
        while len(D) < size:
            w = rng.choice(D)
            extended = w * reduce_word([rng.choice(LETTERS)], 2)
            if len(extended) == len(w) + 1 and extended not in present:
                present.add(extended)
                D.append(extended)
        return D

    @pytest.mark.slow
    def test_randomized_extensions(self, corpus, rng):
        groups = [G for G in corpus if G.order >= 12] + [named_group("symmetric", 5)]
        norms_by_group = {id(G): generator_norm(G) for G in groups}
        basis_words = {reduce_word([1], 2), reduce_word([2], 2)}
        checked, moved, attempts = 0, 0, 0
        while checked < 300 and attempts < 5000:
            attempts += 1
            G = rng.choice(groups)
            target = norms_by_group[id(G)]
            basis_images = (rng.randrange(G.order), rng.randrange(G.order))
            D = self.prefix_closed_domain(rng, rng.randint(5, min(10, G.order // 2)))

            # phi: the homomorphic images, some moved by one generator step
            images, perturbed = [], False
            for w in D:
                image = evaluate(G, basis_images, w)
                if not w.is_identity() and w not in basis_words and rng.random() < 0.4:
                    step = rng.choice(G.generator_ids)
                    image = G.multiply(image, step if rng.random() < 0.5 else G.inverse(step))
                    perturbed = True
                images.append(image)
            norms = []
            for w, image in zip(D, images):
                if w.is_identity():
                    norms.append(Fraction(0))
                    continue
                noise = rng.choice([Fraction(-1, 2), Fraction(0), Fraction(1, 4)])
                norms.append(max(Fraction(0), target[image] + noise))

            m = PartialMap(tuple(D), tuple(images), G, tuple(norms))
            if not m.is_injective():
                continue
            eps = measure_mws_epsilon(m, target) + Fraction(1, 100)
            assert check_mws_witness(m, eps, target).passed

            report = stability_extend(basis_images, D, target, eps, norms)
            assert report.passed, report.violations
            k = max(len(w) for w in D)
            defect = Fraction(report.measurements["max_defect"])
            assert defect < 3 * k * eps
            checked += 1
            if perturbed and defect > 0:
                moved += 1
        assert checked == 300
        assert moved > 0


class TestFreeNorms:
    """Exact norms of a fixed list of short words."""

    DESK = {
        "e": 0,
        "1": 1,
        "-1": 1,
        "2": 1,
        "1 2": 2,
        "1 1": 2,
        "1 -2": 2,
        "2 1 -2": 1,
        "-2 1 2": 1,
        "-1 -2 1 2": 2,
        "1 2 -1 -2": 2,
        "1 -2 -1 2": 2,
        "1 1 1": 3,
        "1 2 1": 3,
        "-1 -1 -2": 3,
        "2 2 1 1": 4,
        "1 2 1 2": 4,
        "2 -1 -2": 1,
        "1 2 -1": 1,
        "-1 -2 1 2 1": 1,
    }

    def test_desk_list_is_exact(self):
        for text, value in self.DESK.items():
            bound = estimate_norm(parse_word(text, 2), basis(2), probes=[s3_spec()])
            assert bound.exact, text
            assert bound.upper == value, text
            bound.verify()

    def test_larger_budgets_only_tighten(self):
        budgets = [
            SearchBudget(max_factors=1, max_conjugator_length=1),
            SearchBudget(max_factors=2, max_conjugator_length=1),
            SearchBudget(max_factors=3, max_conjugator_length=1),
            SearchBudget(max_factors=3, max_conjugator_length=2),
        ]
        unknown = float("inf")
        for w in enumerate_ball(2, 3):
            bounds = [estimate_norm(w, basis(2), budget, [s3_spec()]) for budget in budgets]
            lowers = [b.lower for b in bounds]
            uppers = [unknown if b.upper is None else b.upper for b in bounds]
            assert lowers == sorted(lowers), str(w)
            assert uppers == sorted(uppers, reverse=True), str(w)

    def test_conjugates_get_the_same_bounds(self):
        budget = SearchBudget(max_factors=3, max_conjugator_length=2)
        for w in enumerate_ball(2, 2):
            bound = estimate_norm(w, basis(2), budget, [s3_spec()])
            for u in enumerate_ball(2, 1):
                conjugate = estimate_norm(w.conjugate(u), basis(2), budget, [s3_spec()])
                assert conjugate.lower == bound.lower, (str(w), str(u))
                if bound.exact and conjugate.exact:
                    assert conjugate.upper == bound.upper
                # conjugating every factor of the certificate stays within budget
                if bound.upper is not None and all(
                    len(f.conjugator * u) <= budget.max_conjugator_length
                    for f in bound.certificate_up
                ):
                    assert conjugate.upper is not None
                    assert conjugate.upper <= bound.upper, (str(w), str(u))


class TestQuotientBalls:
    """Images of free-group balls in finite quotients."""

    def test_ball_images_grow_with_the_radius(self):
        cases = [
            (cyclic_spec(9), 1, []),
            (cyclic_spec(9), 1, [parse_word("1 1 1", 1)]),
            (s3_spec(), 2, []),
            (torus_spec(4), 2, [COMMUTATOR]),
        ]
        for spec, rank, relators in cases:
            previous = ball_image(spec, basis(rank), relators, 0)
            assert previous == normal_closure(
                spec.group, ElementSet(spec.group, [apply_word(spec, r) for r in relators])
            )
            for m in range(1, 6):
                current = ball_image(spec, basis(rank), relators, m)
                assert previous.issubset(current), (spec.label, m)
                previous = current


class TestCertificateConsistency:
    """Certificates replay from records and never contradict each other."""

    def certificates(self) -> list[SeparationCertificate]:
        certs = []
        for exponent, m in [(5, 3), (4, 2), (2, 1)]:
            problem = ProbeProblem.from_record(
                {"rank": 1, "w": " ".join(["1"] * exponent), "m": m}
            )
            certs += [separation_check_rf(problem, spec) for spec in cyclic_catalog(1, range(2, 13))]
        lef = ProbeProblem.from_record({"rank": 2, "w": "1 1 1", "m": 2, "D": ["e", "1", "2", "1 2"]})
        certs += [lef_separation_check(lef, torus_spec(n)) for n in range(3, 9)]
        product = ProbeProblem.from_record(
            {
                "rank": 2,
                "w": "-1 -2 1 2",
                "m": 1,
                "class_words": [{"word": "-2 1 2", "base": "1", "conjugator": "2"}],
            }
        )
        targets = [named_group("symmetric", 3), named_group("cyclic", 4)]
        certs += [closure_product_check(product, spec) for spec in homomorphism_catalog(2, targets)]
        return certs

    @pytest.mark.slow
    def test_replay_from_serialized_records(self):
        certs = self.certificates()
        assert {c.verdict for c in certs} >= {Verdict.SEPARATED, Verdict.CONTAINED}
        for cert in certs:
            restored = SeparationCertificate.from_record(json.loads(json.dumps(cert.to_record())))
            assert verify_certificate(restored).passed, cert.get_summary()

    @pytest.mark.slow
    def test_audit_finds_no_contradictions(self):
        certs = self.certificates()
        bounds = [
            upper_bound(parse_word(" ".join(["1"] * k), 1), basis(1), SearchBudget(max_factors=5))
            for k in (5, 4, 2)
        ]
        assert audit_certificates(certs, bounds).passed

    def test_exhausted_closure_search_carries_the_caveat(self):
        problem = ProbeProblem.from_record(
            {"rank": 2, "w": "1", "m": 1, "class_words": [{"word": "1", "base": "1"}]}
        )
        catalog = cyclic_catalog(2, [2, 3, 4]) + homomorphism_catalog(
            2, [named_group("symmetric", 3)], max_specs=10
        )
        report = quotient_search(problem, catalog, "product-membership-no")
        assert report.verdict == Verdict.EXHAUSTED
        assert report.notes == [EXHAUSTION_CAVEAT]
        assert len(report.outcomes) == len(catalog)
