"""
Sub-commands for Conjnorm

Each command reads one input file, runs one operation and reports its
verdict. Exit status: 0 pass/separated, 1 fail/contained, 2
inconclusive/exhausted, 3 input or contract errors.
"""

import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, TypeVar

import click

from .config import ConjnormConfig
from .errors import ConjnormError, MalformedInputError
from .free_bounds import estimate_norm
from .groups import parse_permutation
from .inputs import (
    ChainFile,
    NormFile,
    ProblemFile,
    WitnessFile,
    load_certificates,
    load_input,
    parse_rational,
)
from .logging_config import OperationLog
from .models import INPUT_ERROR_EXIT, Verdict, WitnessReport
from .norms import (
    ChainNorm,
    ball,
    is_definite,
    is_invariant,
    is_word_norm,
    quotient_norm,
    round_norm,
    validate_norm,
)
from .probes import (
    GOALS,
    SeparationCertificate,
    audit_certificates,
    closure_product_check,
    lef_separation_check,
    quotient_search,
    separation_check_rf,
    verify_certificate,
)
from .reports import (
    emit_lines,
    emit_records,
    render_bounds,
    render_certificate,
    render_chain,
    render_report,
    render_search,
    render_set,
    render_table,
    set_record,
    table_record,
)
from .witness import (
    PartialMap,
    ThresholdSet,
    build_lef_witness,
    check_almost_hom,
    check_lef_witness,
    check_metric_hom,
    check_mws_witness,
    check_norm_equality,
    stability_extend,
)

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])

INPUT_PATH = click.Path(dir_okay=False, path_type=Path)


def reports_input_errors(func: F) -> F:
    """Map input and contract errors to exit status 3."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except ConjnormError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(INPUT_ERROR_EXIT)
        except OSError as e:
            click.echo(f"❌ Cannot read input: {e}", err=True)
            sys.exit(INPUT_ERROR_EXIT)

    return wrapper  # type: ignore[return-value]


def _output(config: ConjnormConfig, lines: List[str], records: Sequence[Dict[str, Any]]) -> None:
    if config.output_format == "records":
        click.echo(emit_records(records))
    else:
        click.echo(emit_lines(lines))


def _best(verdicts: Sequence[Verdict]) -> Verdict:
    """Overall verdict of several probes: any separation wins."""
    if Verdict.SEPARATED in verdicts:
        return Verdict.SEPARATED
    if verdicts and all(v == Verdict.CONTAINED for v in verdicts):
        return Verdict.CONTAINED
    return Verdict.INCONCLUSIVE


@click.command("norm")
@click.argument("norm_file", type=INPUT_PATH)
@click.option(
    "--require",
    type=click.Choice(["pseudo", "norm"]),
    default="pseudo",
    help="Axioms to check: pseudo-norm, or norm (adds definiteness)",
)
@click.option("--invariant", is_flag=True, help="Also check conjugation invariance")
@click.pass_context
@reports_input_errors
def norm_command(ctx: click.Context, norm_file: Path, require: str, invariant: bool) -> None:
    """Build a norm table and check the norm axioms."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("norm"):
        table = load_input(norm_file, NormFile).build(config.max_group_order)
        report = validate_norm(table, require, invariant)
    _output(
        config,
        render_table(table) + render_report(report),
        [{"norm": table_record(table), "report": report.to_record()}],
    )
    sys.exit(report.verdict.exit_code)


@click.command("quotient-norm")
@click.argument("norm_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def quotient_norm_command(ctx: click.Context, norm_file: Path) -> None:
    """Quotient norm by the normal subgroup listed under 'kernel'."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("quotient-norm"):
        spec = load_input(norm_file, NormFile)
        table = spec.build(config.max_group_order)
        result = quotient_norm(table, spec.kernel_set(table.group))
        # the quotient of a norm on a finite group is again a norm
        require = "norm" if is_definite(table) else "pseudo"
        report = validate_norm(result, require, is_invariant(table))
    _output(
        config,
        render_table(result) + render_report(report),
        [{"norm": table_record(result), "report": report.to_record()}],
    )
    sys.exit(report.verdict.exit_code)


@click.command("round")
@click.argument("norm_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def round_command(ctx: click.Context, norm_file: Path) -> None:
    """Round a norm up to integers and test whether it is a word norm."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("round"):
        table = load_input(norm_file, NormFile).build(config.max_group_order)
        rounded = round_norm(table)
        require = "norm" if is_definite(table) else "pseudo"
        report = validate_norm(rounded, require, is_invariant(table))
        word = is_word_norm(rounded)
    _output(
        config,
        render_table(rounded) + render_report(report) + [f"word norm: {'yes' if word else 'no'}"],
        [{"norm": table_record(rounded), "report": report.to_record(), "word_norm": word}],
    )
    sys.exit(report.verdict.exit_code)


@click.command("chain")
@click.argument("chain_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def chain_command(ctx: click.Context, chain_file: Path) -> None:
    """Evaluate the chain norm of a descending chain of quotients."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("chain"):
        spec = load_input(chain_file, ChainFile)
        norm = ChainNorm(spec.specs(config.max_group_order), spec.prime, config.max_group_order)
        values = [norm(w) for w in spec.word_list()]
    _output(config, render_chain(values), [v.to_record() for v in values])
    verdicts = [v.verdict(config.strict_chain_depth) for v in values]
    sys.exit(Verdict.INCONCLUSIVE.exit_code if Verdict.INCONCLUSIVE in verdicts else 0)


@click.command("ball")
@click.argument("norm_file", type=INPUT_PATH)
@click.option("--radius", required=True, help="Radius, integer or p/q")
@click.option("--center", default="()", help="Center element (permutation)")
@click.option("--strict", is_flag=True, help="Open ball: values < radius")
@click.pass_context
@reports_input_errors
def ball_command(
    ctx: click.Context, norm_file: Path, radius: str, center: str, strict: bool
) -> None:
    """List the elements of a metric ball."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("ball"):
        table = load_input(norm_file, NormFile).build(config.max_group_order)
        G = table.group
        g = G.id_of(parse_permutation(center, G.degree))
        members = ball(table, parse_rational(radius, "radius"), g, strict)
    title = f"{'Open b' if strict else 'B'}all of radius {radius} at {G.format_element(g)}"
    _output(config, render_set(members, title), [set_record(members, "ball")])


@click.command("estimate-free-norm")
@click.argument("problem_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def estimate_free_norm_command(ctx: click.Context, problem_file: Path) -> None:
    """Bound the conjugation-invariant norm of free words (modulo relators)."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("estimate-free-norm"):
        problem = load_input(problem_file, ProblemFile)
        words = problem.word_list()
        probes = [p.build(config.max_group_order) for p in problem.probes]
        bounds = [
            estimate_norm(w, problem.generating_set(), config.budget(), probes, problem.relator_words())
            for w in words
        ]
    _output(config, render_bounds(bounds), [b.to_record() for b in bounds])
    sys.exit(0 if all(b.exact for b in bounds) else Verdict.INCONCLUSIVE.exit_code)


def _check_witness(config: ConjnormConfig, witness: WitnessFile) -> WitnessReport:
    max_order = config.max_group_order
    spec = witness.build_spec(max_order)
    G = witness.target_group(spec, max_order)
    target_norm = witness.build_target_norm(G, spec)
    norms = witness.source_norms(config.budget(), spec, max_order)
    eps = parse_rational(witness.epsilon, "epsilon") if witness.epsilon is not None else None

    if witness.check == "stability":
        if eps is None:
            raise MalformedInputError("a stability check needs epsilon")
        return stability_extend(witness.basis_ids(G), witness.domain_words(), target_norm, eps, norms)

    m = PartialMap(tuple(witness.domain_words()), witness.image_ids(G, spec), G, tuple(norms))
    Q = ThresholdSet.of(witness.thresholds())
    if witness.check in ("mws", "gr"):
        if eps is None:
            raise MalformedInputError(f"a {witness.check} check needs epsilon")
        if witness.check == "gr":
            if witness.r is None:
                raise MalformedInputError("a gr check needs r")
            return check_mws_witness(m, eps, target_norm, "gr", parse_rational(witness.r, "r"))
        return check_mws_witness(m, eps, target_norm)
    if witness.check == "almost-hom":
        return check_almost_hom(m, Q, target_norm)
    if witness.check == "norm-equality":
        return check_norm_equality(m, target_norm)
    if witness.check == "metric-hom":
        return check_metric_hom(m, target_norm, witness.isometric)
    return check_lef_witness(
        m,
        Q,
        target_norm,
        spec,
        witness.relator_words(),
        witness.generating_set(),
        hom_required=witness.hom_required,
        metric=witness.metric,
        weak_inequality=witness.weak,
    )


@click.command("check-witness")
@click.argument("witness_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def check_witness_command(ctx: click.Context, witness_file: Path) -> None:
    """Check a finite approximation witness."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("check-witness"):
        report = _check_witness(config, load_input(witness_file, WitnessFile))
    _output(config, render_report(report), [report.to_record()])
    sys.exit(report.verdict.exit_code)


@click.command("build-lef")
@click.argument("witness_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def build_lef_command(ctx: click.Context, witness_file: Path) -> None:
    """Build the word-norm witness induced by a quotient spec and check it."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("build-lef"):
        witness = load_input(witness_file, WitnessFile)
        spec = witness.build_spec(config.max_group_order)
        if spec is None:
            raise MalformedInputError("build-lef needs a spec")
        result = build_lef_witness(
            witness.relator_words(),
            witness.generating_set(),
            witness.domain_words(),
            ThresholdSet.of(witness.thresholds()),
            spec,
            witness.source_norms(config.budget(), spec, config.max_group_order)
            if witness.norms is not None
            else None,
            config.budget(),
            [p.build(config.max_group_order) for p in witness.probes],
            weak_inequality=witness.weak,
        )
    _output(
        config,
        render_table(result.norm) + render_report(result.report) + render_bounds(result.bounds),
        [
            {
                "norm": table_record(result.norm),
                "report": result.report.to_record(),
                "bounds": [b.to_record() for b in result.bounds],
            }
        ],
    )
    sys.exit(result.report.verdict.exit_code)


def _run_probe(
    ctx: click.Context,
    problem_file: Path,
    operation: str,
    probe: Callable[..., SeparationCertificate],
) -> None:
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog(operation):
        problem_input = load_input(problem_file, ProblemFile)
        problem = problem_input.problem()
        catalog = problem_input.catalog(config.max_group_order)
        if not catalog:
            raise MalformedInputError("the problem lists no quotient specs")
        certificates = [probe(problem, spec) for spec in catalog]
    lines: List[str] = []
    for cert in certificates:
        lines.extend(render_certificate(cert))
    _output(config, lines, [c.to_record() for c in certificates])
    sys.exit(_best([c.verdict for c in certificates]).exit_code)


@click.command("probe-rf")
@click.argument("problem_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def probe_rf_command(ctx: click.Context, problem_file: Path) -> None:
    """Separate w from the ball B_m(1)N in each listed quotient."""
    _run_probe(ctx, problem_file, "probe-rf", separation_check_rf)


@click.command("probe-product")
@click.argument("problem_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def probe_product_command(ctx: click.Context, problem_file: Path) -> None:
    """Test w against the product of conjugacy classes in each listed quotient."""
    _run_probe(ctx, problem_file, "probe-product", closure_product_check)


@click.command("probe-lef")
@click.argument("problem_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def probe_lef_command(ctx: click.Context, problem_file: Path) -> None:
    """Partial isomorphism on D plus ball separation in each listed quotient."""
    _run_probe(ctx, problem_file, "probe-lef", lef_separation_check)


@click.command("search")
@click.argument("problem_file", type=INPUT_PATH)
@click.option(
    "--goal",
    type=click.Choice(list(GOALS)),
    default="rf-separation",
    help="What a successful spec must achieve",
)
@click.pass_context
@reports_input_errors
def search_command(ctx: click.Context, problem_file: Path, goal: str) -> None:
    """Scan the catalog for the first separating quotient."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("search"):
        problem_input = load_input(problem_file, ProblemFile)
        report = quotient_search(
            problem_input.problem(), problem_input.catalog(config.max_group_order), goal
        )
    _output(config, render_search(report), [report.to_record()])
    sys.exit(report.verdict.exit_code)


@click.command("verify")
@click.argument("certificate_file", type=INPUT_PATH)
@click.pass_context
@reports_input_errors
def verify_command(ctx: click.Context, certificate_file: Path) -> None:
    """Replay certificate records and audit them for contradictions."""
    config: ConjnormConfig = ctx.obj["config"]
    with OperationLog("verify"):
        certificates = load_certificates(certificate_file, config.max_group_order)
        if not certificates:
            raise MalformedInputError("no certificates to verify", source=str(certificate_file))
        replays = [verify_certificate(c) for c in certificates]
        audit = audit_certificates(certificates)
        overall = WitnessReport.combine("verify", replays + [audit])
    lines: List[str] = []
    for report in replays + [audit]:
        lines.extend(render_report(report))
    _output(config, lines, [r.to_record() for r in replays + [audit]])
    sys.exit(overall.verdict.exit_code)


ALL_COMMANDS = [
    norm_command,
    quotient_norm_command,
    round_command,
    chain_command,
    ball_command,
    estimate_free_norm_command,
    check_witness_command,
    build_lef_command,
    probe_rf_command,
    probe_product_command,
    probe_lef_command,
    search_command,
    verify_command,
]
