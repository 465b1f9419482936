"""Command line front end: batch utilities plus a server launcher.

Every subcommand is a thin wrapper over the library; the only logic
here is argument handling and output formatting. Results go to stdout,
progress and diagnostics to stderr, and exit codes follow the usual
convention (validate additionally exits nonzero on a dirty report).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .agents import Session, load_registry, mentalist_turn, run_to_completion
from .gateway import GatewayError, ModelRoles, ScriptedGateway
from .ir import (
    PipelineParseError,
    load_catalog,
    parse_pipeline_json,
    pipeline_to_dict,
    serialize_pipeline_json,
)
from .metrics import MatchConfig, evaluate_dataset, exact_match, ged
from .synthesis import DatasetError, SynthesisConfig, expand_pipeline, read_dataset
from .validation import apply_mechanical_fixes, validate


@click.group()
def main():
    """Build, check, and score AI processing pipelines."""


def _read_pipeline(path: str):
    catalog = load_catalog()
    try:
        return parse_pipeline_json(Path(path).read_text(encoding="utf-8"), catalog), catalog
    except FileNotFoundError:
        raise click.ClickException(f"{path}: no such file")
    except PipelineParseError as exc:
        raise click.ClickException(f"{path}: {exc}")


def _write_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command("validate")
@click.argument("pipeline_file")
@click.pass_context
def validate_cmd(ctx, pipeline_file):
    """Check PIPELINE_FILE; exit 0 only when it is clean."""
    p, catalog = _read_pipeline(pipeline_file)
    report = validate(p, catalog)
    click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False))
    ctx.exit(0 if report.is_valid else 1)


@main.command("fix")
@click.argument("pipeline_file")
@click.option("-o", "--out", default=None, help="Write the fixed pipeline here (default stdout).")
def fix_cmd(pipeline_file, out):
    """Apply the mechanical fixes to PIPELINE_FILE."""
    p, catalog = _read_pipeline(pipeline_file)
    report = validate(p, catalog)
    fixed, applied = apply_mechanical_fixes(p, report)
    for fix in applied:
        click.echo(f"fixed {fix.code} at {fix.location}: {fix.description}", err=True)
    remaining = validate(fixed, catalog)
    if not remaining.is_valid:
        click.echo(f"{len(remaining.issues)} issue(s) remain after fixing", err=True)
    _write_text(serialize_pipeline_json(fixed), out)


@main.command("em")
@click.argument("generated_file")
@click.argument("reference_file")
@click.option("--json", "as_json", is_flag=True, help="Print the full result as JSON.")
def em_cmd(generated_file, reference_file, as_json):
    """Structural exact match between two pipeline files."""
    gen, _ = _read_pipeline(generated_file)
    ref, _ = _read_pipeline(reference_file)
    result = exact_match(gen, ref)
    if as_json:
        doc = {"exact_match": bool(result), "mapping": result.mapping if result else None}
        click.echo(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(f"exact_match {'true' if result else 'false'}")


@main.command("ged")
@click.argument("generated_file")
@click.argument("reference_file")
@click.option("--edit-cost", default=1.0, show_default=True, help="Cost per edit operation.")
@click.option("--time-budget", default=60.0, show_default=True, help="Search budget in seconds.")
@click.option("--json", "as_json", is_flag=True, help="Print the full result as JSON.")
def ged_cmd(generated_file, reference_file, edit_cost, time_budget, as_json):
    """Graph edit distance between two pipeline files."""
    gen, _ = _read_pipeline(generated_file)
    ref, _ = _read_pipeline(reference_file)
    cfg = MatchConfig(edit_cost=edit_cost, time_budget=time_budget)
    result = ged(gen, ref, cfg)
    if as_json:
        click.echo(json.dumps(result.to_dict(), indent=2, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(f"distance {result.distance:g}")
        click.echo(f"normalized {result.normalized:.4f}")
        click.echo(f"timed_out {'true' if result.timed_out else 'false'}")


@main.command("eval")
@click.option("--dataset", required=True, help="Reference corpus (JSONL of dataset entries).")
@click.option("--generated", "generated_file", required=True,
              help='Generated pipelines (JSONL of {"id", "pipeline"}).')
@click.option("-o", "--out", default=None, help="Write the report here (default stdout).")
@click.option("--time-budget", default=60.0, show_default=True,
              help="Per-pair distance budget in seconds.")
def eval_cmd(dataset, generated_file, out, time_budget):
    """Score generated pipelines against a reference corpus."""
    catalog = load_catalog()
    try:
        entries = read_dataset(dataset, catalog)
    except (FileNotFoundError, DatasetError) as exc:
        raise click.ClickException(str(exc))
    generated = {}
    try:
        with open(generated_file, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                doc = json.loads(line)
                pid = doc["id"]
                if pid in generated:
                    raise click.ClickException(f"{generated_file}:{lineno}: duplicate id {pid!r}")
                generated[pid] = parse_pipeline_json(json.dumps(doc["pipeline"]), catalog)
    except FileNotFoundError:
        raise click.ClickException(f"{generated_file}: no such file")
    except (json.JSONDecodeError, KeyError, PipelineParseError) as exc:
        raise click.ClickException(f"{generated_file}: {exc}")
    try:
        report = evaluate_dataset(entries, generated, MatchConfig(time_budget=time_budget))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _write_text(json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n", out)


@main.command("synth")
@click.option("--functions", default=4, show_default=True, help="Function nodes per pipeline.")
@click.option("--count", default=1, show_default=True, help="How many pipelines.")
@click.option("--seed", default=0, show_default=True, help="Seed of the first pipeline.")
@click.option("--inputs", default=1, show_default=True, help="Input nodes per pipeline.")
@click.option("--max-children", default=2, show_default=True,
              help="Consumer bound per output port.")
@click.option("-o", "--out", default=None, help="Write JSONL here (default stdout).")
def synth_cmd(functions, count, seed, inputs, max_children, out):
    """Synthesize random valid pipelines, one JSON document per line."""
    catalog = load_catalog()
    lines = []
    for i in range(count):
        cfg = SynthesisConfig(
            n_function_nodes=functions,
            catalog=catalog,
            max_children=max_children,
            n_inputs=inputs,
            seed=seed + i,
        )
        p = expand_pipeline(cfg)
        lines.append(json.dumps(pipeline_to_dict(p), sort_keys=True, ensure_ascii=False))
    _write_text("\n".join(lines) + "\n", out)


@main.command("build")
@click.option("--query", required=True, help="The opening user message.")
@click.option("--answer", "answers", multiple=True,
              help="Follow-up user replies, in order (repeatable).")
@click.option("--transcript", required=True,
              help="Scripted gateway transcript (JSON array of responses).")
@click.option("-o", "--out", default=None, help="Write the final pipeline here (default stdout).")
@click.option("--max-iterations", default=3, show_default=True)
def build_cmd(query, answers, transcript, out, max_iterations):
    """Run the full conversation-to-pipeline flow offline."""
    catalog = load_catalog()
    registry = load_registry()
    roles = ModelRoles.from_env()
    try:
        gw = ScriptedGateway.from_file(transcript)
    except (FileNotFoundError, GatewayError) as exc:
        raise click.ClickException(str(exc))

    def emit(event: dict) -> None:
        click.echo(json.dumps(event, sort_keys=True, ensure_ascii=False), err=True)

    session = Session(id="cli")
    try:
        refined = mentalist_turn(session, query, gw, roles, emit=emit)
        for answer in answers:
            if refined is not None:
                raise click.ClickException("unused --answer: the query is already refined")
            refined = mentalist_turn(session, answer, gw, roles, emit=emit)
        if session.refined_query is None:
            raise click.ClickException(
                "the clarifier still has questions; pass more --answer values"
            )
        final = run_to_completion(
            session, gw, roles, catalog, registry, max_iterations=max_iterations, emit=emit
        )
    except GatewayError as exc:
        raise click.ClickException(f"transcript problem: {exc}")
    if session.status != "done" or final is None:
        raise click.ClickException(session.failure_reason or "build did not finish")
    _write_text(serialize_pipeline_json(final), out)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--data-dir", default="./pipesmith-data", show_default=True,
              help="Where session logs and attachment blobs live.")
@click.option("--transcript", default=None,
              help="Serve with a scripted gateway replaying this transcript per session.")
@click.option("--ui", "ui_dir", default=None,
              help="Directory with a built web client, served at /ui.")
def serve_cmd(host, port, data_dir, transcript, ui_dir):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    factory = None
    if transcript:
        factory = lambda: ScriptedGateway.from_file(transcript)  # noqa: E731
    app = create_app(data_dir, gateway_factory=factory, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main(prog_name="pipesmith")
