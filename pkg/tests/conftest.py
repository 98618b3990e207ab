"""Shared fixtures: the US91 policy family, training-range regions, and the
device taxonomy used across the suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from dsapolicy.dsl import parse_capture_csv, parse_policy_doc
from dsapolicy.geo import RegionStore, load_regions
from dsapolicy.model import Taxonomy
from dsapolicy.store import PolicyStore, StoreSnapshot, load_taxonomy, make_snapshot

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def regions() -> RegionStore:
    return load_regions(FIXTURES / "regions.json")


@pytest.fixture(scope="session")
def taxonomy() -> Taxonomy:
    return load_taxonomy(FIXTURES / "taxonomy.json")


@pytest.fixture()
def us91_doc(regions):
    return parse_policy_doc((FIXTURES / "us91.dsl").read_text(), regions)


@pytest.fixture()
def us91_local_doc(regions):
    return parse_policy_doc((FIXTURES / "us91_local.dsl").read_text(), regions)


@pytest.fixture()
def us91_csv_doc(regions):
    return parse_capture_csv(FIXTURES / "us91.csv", regions)


@pytest.fixture()
def us91_snapshot(us91_doc, us91_local_doc, taxonomy, regions) -> StoreSnapshot:
    """Listings transcription: US91 family plus the local deny policy."""
    policies = {p.id: p for p in us91_doc.policies + us91_local_doc.policies}
    return make_snapshot(1, policies, taxonomy, regions)


@pytest.fixture()
def us91_store(us91_doc, us91_local_doc, taxonomy, regions) -> PolicyStore:
    store = PolicyStore(taxonomy, regions)
    store.add_policies(us91_doc, actor="capture-team")
    store.add_policies(us91_local_doc, actor="spectrum-manager")
    return store
