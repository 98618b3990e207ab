"""Policy language parsing, serialization round-trips, and capture-sheet
CSV ingestion."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone
from fractions import Fraction

import pytest

from dsapolicy.dsl import (
    ParseError,
    derive_parent_id,
    parse_capture_csv,
    parse_policy_doc,
    serialize_policy_doc,
)
from dsapolicy.model import (
    ActiveDuring,
    Affiliation,
    AffiliationIs,
    Effect,
    EffectKind,
    FrequencyRange,
    FrequencyWithin,
    LocationWithinAny,
    Policy,
    RequesterIsA,
    TimeWindow,
    frequency_hz,
)

UTC = timezone.utc


class TestParsePolicyDoc:
    def test_us91_family(self, us91_doc):
        assert [p.id for p in us91_doc.policies] == ["US91", "US91-3", "US91-3.1"]
        us91, us91_3, us91_31 = us91_doc.policies
        assert us91.parent is None
        assert us91.effect is None
        assert us91.restrictions == (
            FrequencyWithin(
                FrequencyRange(frequency_hz(1755, "MHz"), frequency_hz(1780, "MHz"))
            ),
        )
        assert us91_3.parent == "US91"
        assert us91_3.restrictions == (RequesterIsA("JointTacticalRadioSystem"),)
        assert us91_31.parent == "US91-3"
        assert us91_31.effect == Effect(EffectKind.PERMIT)
        (location,) = us91_31.restrictions
        assert isinstance(location, LocationWithinAny)
        assert len(location.region_ids) == 6
        assert "Yuma_Proving_Ground" in location.region_ids

    def test_empty_document(self):
        doc = parse_policy_doc("")
        assert doc.policies == []
        assert doc.referenced_class_ids == set()

    def test_local_policy(self, us91_local_doc):
        (local,) = us91_local_doc.policies
        assert local.id == "US91-3.1-Local"
        assert local.parent == "US91-3.1"
        assert local.effect == Effect(EffectKind.DENY)
        assert local.precedence == 1
        (active,) = local.restrictions
        assert active == ActiveDuring(
            TimeWindow(
                datetime(2019, 10, 1, 11, tzinfo=UTC),
                datetime(2019, 10, 1, 17, tzinfo=UTC),
            )
        )

    def test_permit_with_obligations(self):
        doc = parse_policy_doc(
            "policy P {\n"
            "  effect permit-with-obligations [coordinate-with-wsmr, log-usage];\n"
            "}\n"
        )
        (p,) = doc.policies
        assert p.effect.kind is EffectKind.PERMIT_WITH_OBLIGATIONS
        assert p.effect.obligation_ids == ("coordinate-with-wsmr", "log-usage")
        assert p.obligations == ("coordinate-with-wsmr", "log-usage")

    def test_unknown_region_with_store(self, regions):
        text = "policy P {\n  location within-any [Atlantis];\n}\n"
        with pytest.raises(ParseError, match="unknown region 'Atlantis'"):
            parse_policy_doc(text, regions)

    def test_region_resolution_by_display_name_not_supported_in_dsl(self, regions):
        # DSL references regions by identifier; display names live in CSV.
        doc = parse_policy_doc(
            "policy P {\n  location within-any [Ft_Hood];\n}\n", regions
        )
        assert doc.referenced_region_ids == {"Ft_Hood"}

    def test_error_carries_line_number(self):
        text = "policy P {\n  frequency within 10..5 MHz;\n}\n"
        with pytest.raises(ParseError) as err:
            parse_policy_doc(text)
        assert err.value.line == 2

    def test_unknown_clause(self):
        with pytest.raises(ParseError, match="unknown or malformed clause"):
            parse_policy_doc("policy P {\n  bandwidth 5 MHz;\n}\n")

    def test_missing_semicolon(self):
        with pytest.raises(ParseError, match="';'"):
            parse_policy_doc("policy P {\n  priority 3\n}\n")

    def test_duplicate_policy_id(self):
        with pytest.raises(ParseError, match="duplicate policy id"):
            parse_policy_doc("policy P {\n}\npolicy P {\n}\n")

    def test_duplicate_clause(self):
        with pytest.raises(ParseError, match="duplicate priority"):
            parse_policy_doc("policy P {\n  priority 1;\n  priority 2;\n}\n")

    def test_unterminated_policy(self):
        with pytest.raises(ParseError, match="unterminated"):
            parse_policy_doc("policy P {\n  priority 1;\n")

    def test_self_extension_rejected(self):
        with pytest.raises(ParseError, match="extends itself"):
            parse_policy_doc("policy P extends P {\n}\n")

    def test_comments_and_blank_lines(self):
        text = "# leading comment\n\npolicy P {\n  priority 2; # trailing\n}\n"
        (p,) = parse_policy_doc(text).policies
        assert p.precedence == 2

    def test_hash_inside_meta_value(self):
        text = 'policy P {\n  meta note "frequency plan #7";\n}\n'
        (p,) = parse_policy_doc(text).policies
        assert p.metadata["note"] == "frequency plan #7"


def random_policy(rng: random.Random, policy_id: str, parent: str | None) -> Policy:
    restrictions = []
    if rng.random() < 0.7:
        lo = Fraction(rng.randint(100, 5000)) + Fraction(rng.randint(0, 99), 100)
        hi = lo + rng.randint(0, 500)
        restrictions.append(
            FrequencyWithin(
                FrequencyRange(frequency_hz(lo, "MHz"), frequency_hz(hi, "MHz"))
            )
        )
    if rng.random() < 0.6:
        restrictions.append(RequesterIsA(f"Class{rng.randint(0, 30)}"))
    if rng.random() < 0.3:
        restrictions.append(
            AffiliationIs(rng.choice([Affiliation.FEDERAL, Affiliation.NONFEDERAL]))
        )
    if rng.random() < 0.5:
        restrictions.append(
            LocationWithinAny(
                frozenset(f"Region{rng.randint(0, 20)}" for _ in range(rng.randint(1, 4)))
            )
        )
    if rng.random() < 0.4:
        base = datetime(2019, 10, 1, tzinfo=UTC) + timedelta(
            hours=rng.randint(0, 5000)
        )
        restrictions.append(
            ActiveDuring(TimeWindow(base, base + timedelta(hours=rng.randint(0, 72))))
        )
    rng.shuffle(restrictions)

    effect = None
    roll = rng.random()
    if roll < 0.3:
        effect = Effect(EffectKind.PERMIT)
    elif roll < 0.5:
        effect = Effect(EffectKind.DENY)
    elif roll < 0.6:
        effect = Effect(
            EffectKind.PERMIT_WITH_OBLIGATIONS,
            tuple(f"ob-{rng.randint(0, 9)}" for _ in range(rng.randint(1, 3))),
        )
    metadata = {}
    if rng.random() < 0.5:
        metadata["original_text"] = rng.choice(
            [
                "plain text",
                'quoted "text" with escapes',
                "backslash \\ and # hash",
                "trailing space ",
            ]
        )
    if rng.random() < 0.3:
        metadata["source_document"] = "NTIA Redbook"
    return Policy(
        id=policy_id,
        parent=parent,
        restrictions=tuple(restrictions),
        effect=effect,
        precedence=rng.choice([0, 0, 0, 1, 2, 7]),
        metadata=metadata,
    )


class TestSerializeRoundTrip:
    def test_us91_family_round_trip(self, us91_doc):
        text = serialize_policy_doc(us91_doc.policies)
        reparsed = parse_policy_doc(text)
        assert reparsed.policies == us91_doc.policies

    def test_policy_with_no_restrictions(self):
        policy = Policy(id="Empty", effect=Effect(EffectKind.DENY))
        reparsed = parse_policy_doc(serialize_policy_doc([policy]))
        assert reparsed.policies == [policy]

    def test_200_randomized_policies_round_trip(self):
        rng = random.Random(1234)
        policies = []
        ids: list[str] = []
        for n in range(200):
            parent = rng.choice(ids) if ids and rng.random() < 0.5 else None
            policy = random_policy(rng, f"Pol-{n}", parent)
            policies.append(policy)
            ids.append(policy.id)
        reparsed = parse_policy_doc(serialize_policy_doc(policies))
        assert reparsed.policies == policies

    def test_serialized_form_is_stable(self, us91_doc):
        once = serialize_policy_doc(us91_doc.policies)
        twice = serialize_policy_doc(parse_policy_doc(once).policies)
        assert once == twice


class TestDeriveParentId:
    @pytest.mark.parametrize(
        "policy_id,parent",
        [
            ("US91", None),
            ("US91-3", "US91"),
            ("US91-3.1", "US91-3"),
            ("US91-3.1-Local", "US91-3.1"),
            ("US91-3.1.2", "US91-3.1"),
        ],
    )
    def test_naming_convention(self, policy_id, parent):
        assert derive_parent_id(policy_id) == parent


class TestParseCaptureCsv:
    def test_us91_sheet_equals_dsl_document(self, us91_csv_doc, us91_doc):
        assert us91_csv_doc.policies == us91_doc.policies

    def test_blank_effect_becomes_constraint_node(self, us91_csv_doc):
        us91 = next(p for p in us91_csv_doc.policies if p.id == "US91")
        assert us91.effect is None

    def test_requester_cell(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99,AWS,,,,,,,,,\n"
        )
        doc = parse_capture_csv(text, regions)
        (p,) = doc.policies
        assert p.restrictions == (RequesterIsA("AWS"),)

    def test_single_frequency_cell(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99,,,1755 MHz,,,,,,,\n"
        )
        (p,) = parse_capture_csv(text, regions).policies
        (freq,) = p.restrictions
        assert freq.range.min_hz == freq.range.max_hz == frequency_hz(1755, "MHz")

    def test_affiliation_spelling_variants(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99,,Non-Federal,,,,,,,,\n"
        )
        (p,) = parse_capture_csv(text, regions).policies
        assert p.restrictions == (AffiliationIs(Affiliation.NONFEDERAL),)

    def test_unknown_region_name(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99,,,,Narnia,,,,,,\n"
        )
        with pytest.raises(ParseError, match="unknown region name 'Narnia'"):
            parse_capture_csv(text, regions)

    def test_unparseable_frequency(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99,,,around 1755,,,,,,,\n"
        )
        with pytest.raises(ParseError, match="unparseable frequency"):
            parse_capture_csv(text, regions)

    def test_orphan_sub_policy(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99-1,,,,,,,,,,\n"
        )
        with pytest.raises(ParseError, match="orphan sub-policy"):
            parse_capture_csv(text, regions)

    def test_orphan_allowed_with_known_ids(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99-1,,,,,,,,,,\n"
        )
        doc = parse_capture_csv(text, regions, known_policy_ids={"US99"})
        assert doc.policies[0].parent == "US99"

    def test_bad_header(self, regions):
        with pytest.raises(ParseError, match="bad header"):
            parse_capture_csv("Id,Name\n1,2\n", regions)

    def test_obligations_with_permit_with_obligations(self, regions):
        text = (
            "Policy,Requester,Affiliation,Frequency,Location,Effect,Obligations,"
            "OriginalText,SourceDocument,URL,Page\n"
            "US99,,,,,Permit with Obligations,coordinate; log-usage,,,,\n"
        )
        (p,) = parse_capture_csv(text, regions).policies
        assert p.effect.kind is EffectKind.PERMIT_WITH_OBLIGATIONS
        assert p.effect.obligation_ids == ("coordinate", "log-usage")
