"""Command-line front end: validate policy files, evaluate request files
offline, run the latency benchmark, generate synthetic fixtures, and serve
the HTTP API.

Exit codes: 0 success, 1 validation failure, 2 I/O error, 3 verification
mismatch.
"""

from __future__ import annotations

import json
import statistics
import sys
import time
from pathlib import Path

import click

from .dsl import ParseError, PolicyDocument, parse_capture_csv, parse_policy_doc, serialize_policy_doc
from .geo import RegionError, RegionStore, load_regions
from .model import Taxonomy
from .reasoner import RequestError, evaluate_batch
from .store import IntegrityError, make_snapshot, load_taxonomy
from .synth import make_bench_corpus
from .wire import (
    WireError,
    batch_item_to_json,
    dump_stable,
    request_from_json,
    request_to_json,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_VERIFY = 3


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)


def _load_regions(path: str | None) -> RegionStore:
    if path is None:
        return RegionStore.empty()
    try:
        return load_regions(path)
    except RegionError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION if "region" in str(exc) else EXIT_IO)


def _load_taxonomy(path: str | None) -> Taxonomy:
    if path is None:
        return Taxonomy.empty()
    try:
        return load_taxonomy(path)
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_IO)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _parse_policy_file(path: str, regions: RegionStore) -> PolicyDocument:
    text = _read_text(path)
    try:
        if path.endswith(".csv"):
            return parse_capture_csv(text, regions)
        return parse_policy_doc(text, regions)
    except ParseError as exc:
        click.echo(f"{path}:{exc.line}:{exc.column}: {exc.message}", err=True)
        sys.exit(EXIT_VALIDATION)


def _read_requests(path: str) -> list:
    requests = []
    for line_no, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            requests.append(request_from_json(json.loads(line)))
        except json.JSONDecodeError as exc:
            click.echo(f"{path}:{line_no}: bad JSON: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except WireError as exc:
            click.echo(f"{path}:{line_no}: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
    return requests


@click.group()
def main() -> None:
    """Spectrum policy engine."""


@main.command()
@click.argument("policy_file", type=click.Path())
@click.option("--taxonomy", "taxonomy_file", type=click.Path(), default=None)
@click.option("--regions", "region_file", type=click.Path(), default=None)
def validate(policy_file: str, taxonomy_file: str | None, region_file: str | None):
    """Parse and referentially validate a policy file (DSL or capture CSV)."""
    regions = _load_regions(region_file)
    taxonomy = _load_taxonomy(taxonomy_file)
    doc = _parse_policy_file(policy_file, regions)
    if not doc.policies:
        click.echo("warning: zero policies in document")
        sys.exit(EXIT_OK)
    try:
        make_snapshot(0, {p.id: p for p in doc.policies}, taxonomy, regions)
    except IntegrityError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    pending = sorted(doc.referenced_class_ids - taxonomy.classes)
    if pending:
        click.echo(f"note: pending curation terms: {', '.join(pending)}")
    click.echo(f"ok: {len(doc.policies)} policies")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--policies", "policy_file", type=click.Path(), required=True)
@click.option("--taxonomy", "taxonomy_file", type=click.Path(), required=True)
@click.option("--regions", "region_file", type=click.Path(), required=True)
@click.option("--requests", "request_file", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table")
def evaluate(policy_file, taxonomy_file, region_file, request_file, fmt):
    """Evaluate a JSON-lines request file against a policy file."""
    regions = _load_regions(region_file)
    taxonomy = _load_taxonomy(taxonomy_file)
    doc = _parse_policy_file(policy_file, regions)
    try:
        snapshot = make_snapshot(
            1, {p.id: p for p in doc.policies}, taxonomy, regions
        )
    except IntegrityError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    requests = _read_requests(request_file)
    outcomes = evaluate_batch(requests, snapshot)
    if fmt == "json":
        click.echo(
            dump_stable({"results": [batch_item_to_json(o) for o in outcomes]})
        )
    else:
        for outcome in outcomes:
            if isinstance(outcome, RequestError):
                click.echo(f"{outcome.request_id or '?'}: error: {outcome.message}")
                continue
            trigger = outcome.triggering_policy or "-"
            reasons = "; ".join(r.text for r in outcome.reasons)
            click.echo(
                f"{outcome.request_id}: {outcome.effect.kind.value}"
                f" via {trigger}: {reasons}"
            )
    sys.exit(EXIT_OK)


@main.command()
@click.option("--policies", "policy_file", type=click.Path(), default=None)
@click.option("--requests", "request_file", type=click.Path(), default=None)
@click.option("--taxonomy", "taxonomy_file", type=click.Path(), default=None)
@click.option("--regions", "region_file", type=click.Path(), default=None)
@click.option("--policy-count", type=int, default=165, show_default=True)
@click.option("--request-count", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=2020, show_default=True)
@click.option("--workers", type=int, default=4, show_default=True)
@click.option("--repeat", type=int, default=3, show_default=True)
@click.option("--verify", is_flag=True, help="check parallel output equals sequential")
def bench(
    policy_file,
    request_file,
    taxonomy_file,
    region_file,
    policy_count,
    request_count,
    seed,
    workers,
    repeat,
    verify,
):
    """Batch-evaluation latency benchmark (synthetic corpus by default)."""
    if policy_file:
        regions = _load_regions(region_file)
        taxonomy = _load_taxonomy(taxonomy_file)
        doc = _parse_policy_file(policy_file, regions)
        policies = {p.id: p for p in doc.policies}
        requests = _read_requests(request_file) if request_file else []
    else:
        corpus = make_bench_corpus(policy_count, request_count, seed)
        taxonomy, regions = corpus.universe.taxonomy, corpus.universe.regions
        policies = corpus.policies
        requests = list(corpus.requests)
    snapshot = make_snapshot(1, policies, taxonomy, regions)

    wall_times = []
    parallel = []
    for _ in range(max(1, repeat)):
        started = time.perf_counter()
        parallel = evaluate_batch(requests, snapshot, workers=workers)
        wall_times.append((time.perf_counter() - started) * 1000)

    per_request: list[float] = []
    for request in requests:
        item_start = time.perf_counter()
        evaluate_batch([request], snapshot)
        per_request.append((time.perf_counter() - item_start) * 1000)

    if verify:
        sequential = evaluate_batch(requests, snapshot, workers=1)
        if sequential != parallel:
            for index, (a, b) in enumerate(zip(sequential, parallel)):
                if a != b:
                    click.echo(f"mismatch at index {index}:", err=True)
                    click.echo(f"  sequential: {a}", err=True)
                    click.echo(f"  parallel:   {b}", err=True)
            sys.exit(EXIT_VERIFY)

    ranked = sorted(per_request) or [0.0]
    report = {
        "policy_count": len(policies),
        "request_count": len(requests),
        "wall_time_ms": round(max(statistics.median(wall_times), 0.001), 3),
        "per_request_p50_ms": round(statistics.median(ranked), 3),
        "per_request_p95_ms": round(ranked[max(0, int(len(ranked) * 0.95) - 1)], 3),
        "worker_count": workers,
        "verified": bool(verify),
    }
    click.echo(dump_stable(report))
    sys.exit(EXIT_OK)


@main.command()
@click.option("--policy-count", type=int, default=165, show_default=True)
@click.option("--request-count", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=2020, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def gen(policy_count, request_count, seed, out_dir):
    """Write a reproducible synthetic corpus (policies, taxonomy, regions,
    requests) into a directory."""
    corpus = make_bench_corpus(policy_count, request_count, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ordered = [corpus.policies[pid] for pid in sorted(corpus.policies)]
    (out / "policies.dsl").write_text(serialize_policy_doc(ordered))
    (out / "taxonomy.json").write_text(
        json.dumps(
            {
                "classes": [
                    {
                        "class_id": class_id,
                        "parent_ids": list(
                            corpus.universe.taxonomy.parents.get(class_id, ())
                        ),
                        "affiliation": (
                            corpus.universe.taxonomy.affiliation_of[class_id].value
                            if class_id in corpus.universe.taxonomy.affiliation_of
                            else None
                        ),
                    }
                    for class_id in sorted(corpus.universe.taxonomy.classes)
                ]
            },
            indent=2,
        )
    )
    (out / "regions.json").write_text(
        json.dumps(
            {
                "features": [
                    {
                        "properties": {"id": region.id, "name": region.name},
                        "geometry": {
                            "type": "Polygon",
                            "coordinates": [
                                [[p.longitude, p.latitude] for p in ring]
                                for ring in region.polygons
                            ],
                        },
                    }
                    for region in (
                        corpus.universe.regions.regions[rid]
                        for rid in sorted(corpus.universe.regions.regions)
                    )
                ]
            },
            indent=2,
        )
    )
    with (out / "requests.jsonl").open("w") as handle:
        for request in corpus.requests:
            handle.write(json.dumps(request_to_json(request)) + "\n")
    click.echo(f"wrote corpus to {out}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--listen", default="127.0.0.1:8000", show_default=True, envvar="DSA_LISTEN")
@click.option("--store", "store_file", type=click.Path(), envvar="DSA_STORE", default=None)
@click.option("--taxonomy", "taxonomy_file", type=click.Path(), envvar="DSA_TAXONOMY", default=None)
@click.option("--regions", "region_file", type=click.Path(), envvar="DSA_REGIONS", default=None)
@click.option("--batch-cap", type=int, default=1000, show_default=True, envvar="DSA_BATCH_CAP")
@click.option("--workers", type=int, default=None, envvar="DSA_WORKERS")
@click.option("--ui", "ui_dir", type=click.Path(), envvar="DSA_UI", default=None,
              help="directory of built web UI assets to serve at /ui")
def serve(listen, store_file, taxonomy_file, region_file, batch_cap, workers, ui_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app
    from .store import PolicyStore

    regions = _load_regions(region_file)
    taxonomy = _load_taxonomy(taxonomy_file)
    store = PolicyStore(taxonomy, regions, path=store_file)
    app = create_app(store, batch_cap=batch_cap, workers=workers)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    host, _, port = listen.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":
    main()
