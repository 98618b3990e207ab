"""Core type invariants and restriction satisfaction semantics."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone
from fractions import Fraction

import pytest

from dsapolicy.model import (
    ActiveDuring,
    Affiliation,
    AffiliationIs,
    Effect,
    EffectKind,
    EvalContext,
    FrequencyRange,
    FrequencyWithin,
    GeoPoint,
    LocationWithinAny,
    Policy,
    PolicyCycleError,
    RequesterIsA,
    SpectrumRequest,
    Taxonomy,
    TimeWindow,
    UnknownPolicyError,
    effective_restrictions,
    format_instant,
    frequency_hz,
    hz_to_unit_str,
    parse_instant,
    satisfies,
)

UTC = timezone.utc


def mhz(value) -> Fraction:
    return frequency_hz(value, "MHz")


def window(start_hour: int, end_hour: int, day: int = 1) -> TimeWindow:
    return TimeWindow(
        datetime(2019, 10, day, start_hour, tzinfo=UTC),
        datetime(2019, 10, day, end_hour, tzinfo=UTC),
    )


def request(
    freq_min="1755",
    freq_max="1756.25",
    requester="GenericJTRS",
    time=None,
    affiliation=None,
) -> SpectrumRequest:
    return SpectrumRequest(
        id="r1",
        requester_class=requester,
        location=GeoPoint(-114.23, 33.20),
        frequency=FrequencyRange(mhz(freq_min), mhz(freq_max)),
        time=time or window(8, 9),
        affiliation=affiliation,
    )


@pytest.fixture()
def small_taxonomy() -> Taxonomy:
    return Taxonomy(
        {"Device", "Radio", "JTRS", "GenericJTRS", "AWS"},
        {
            "Radio": ("Device",),
            "JTRS": ("Radio",),
            "GenericJTRS": ("JTRS",),
            "AWS": ("Device",),
        },
        {"JTRS": Affiliation.FEDERAL, "AWS": Affiliation.NONFEDERAL},
    )


def ctx(taxonomy: Taxonomy, within=frozenset()) -> EvalContext:
    return EvalContext(taxonomy=taxonomy, within_regions=frozenset(within))


class TestFrequencyRange:
    def test_exact_decimal_conversion(self):
        assert mhz("1756.25") == Fraction(1_756_250_000)
        assert frequency_hz("1.755", "GHz") == Fraction(1_755_000_000)

    def test_single_frequency_is_degenerate_range(self):
        r = FrequencyRange(mhz(1755), mhz(1755))
        assert r.min_hz == r.max_hz

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            FrequencyRange(mhz(1780), mhz(1755))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            FrequencyRange(Fraction(0), Fraction(1))

    def test_round_trip_rendering(self):
        assert hz_to_unit_str(mhz("1756.25"), "MHz") == "1756.25"
        assert hz_to_unit_str(mhz(1780), "MHz") == "1780"


class TestTimeWindow:
    def test_rejects_reversed(self):
        with pytest.raises(ValueError):
            window(17, 11)

    def test_normalizes_to_utc(self):
        offset = timezone(timedelta(hours=-4))
        w = TimeWindow(
            datetime(2019, 10, 1, 7, tzinfo=offset),
            datetime(2019, 10, 1, 13, tzinfo=offset),
        )
        assert w.start == datetime(2019, 10, 1, 11, tzinfo=UTC)

    def test_instant_parse_format_round_trip(self):
        text = "2019-10-01T11:00:00Z"
        assert format_instant(parse_instant(text)) == text


class TestGeoPoint:
    def test_range_validation(self):
        with pytest.raises(ValueError):
            GeoPoint(-200.0, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(0.0, 91.0)


class TestEffect:
    def test_obligations_required_for_pwo(self):
        with pytest.raises(ValueError):
            Effect(EffectKind.PERMIT_WITH_OBLIGATIONS)

    def test_plain_effects_reject_obligations(self):
        with pytest.raises(ValueError):
            Effect(EffectKind.DENY, ("ob1",))

    def test_policy_mirrors_effect_obligations(self):
        p = Policy(
            id="P", effect=Effect(EffectKind.PERMIT_WITH_OBLIGATIONS, ("ob1", "ob2"))
        )
        assert p.obligations == ("ob1", "ob2")


class TestEffectiveRestrictions:
    def us91_family(self) -> dict[str, Policy]:
        freq = FrequencyWithin(FrequencyRange(mhz(1755), mhz(1780)))
        req = RequesterIsA("JTRS")
        loc = LocationWithinAny(frozenset({"R1", "R2", "R3", "R4", "R5", "R6"}))
        return {
            "US91": Policy(id="US91", restrictions=(freq,)),
            "US91-3": Policy(id="US91-3", parent="US91", restrictions=(req,)),
            "US91-3.1": Policy(id="US91-3.1", parent="US91-3", restrictions=(loc,)),
        }

    def test_child_appends_to_ancestor_rules(self):
        policies = self.us91_family()
        chain = effective_restrictions("US91-3.1", policies)
        assert [pid for pid, _ in chain] == ["US91", "US91-3", "US91-3.1"]
        assert isinstance(chain[0][1], FrequencyWithin)
        assert isinstance(chain[1][1], RequesterIsA)
        assert isinstance(chain[2][1], LocationWithinAny)

    def test_root_policy_is_its_own_chain(self):
        policies = self.us91_family()
        chain = effective_restrictions("US91", policies)
        assert len(chain) == 1 and chain[0][0] == "US91"

    def test_prefix_monotone(self):
        policies = self.us91_family()
        parent_chain = effective_restrictions("US91-3", policies)
        child_chain = effective_restrictions("US91-3.1", policies)
        assert child_chain[: len(parent_chain)] == parent_chain

    def test_unknown_policy(self):
        with pytest.raises(UnknownPolicyError):
            effective_restrictions("nope", self.us91_family())

    def test_cycle_detection(self):
        a = Policy(id="A", parent="B")
        b = Policy(id="B", parent="A")
        with pytest.raises(PolicyCycleError):
            effective_restrictions("A", {"A": a, "B": b})

    def test_matches_recursive_walk_on_random_chains(self):
        rng = random.Random(7)
        for _ in range(25):
            depth = rng.randint(1, 4)
            policies: dict[str, Policy] = {}
            parent = None
            for level in range(depth):
                pid = f"P{level}"
                pool = [
                    RequesterIsA(f"C{level}"),
                    FrequencyWithin(FrequencyRange(mhz(level + 1), mhz(level + 2))),
                    LocationWithinAny(frozenset({f"R{level}"})),
                ]
                restrictions = tuple(rng.sample(pool, rng.randint(0, 3)))
                policies[pid] = Policy(id=pid, parent=parent, restrictions=restrictions)
                parent = pid

            def walk(pid: str) -> list[tuple[str, object]]:
                policy = policies[pid]
                above = walk(policy.parent) if policy.parent else []
                return above + [(pid, r) for r in policy.restrictions]

            leaf = f"P{depth - 1}"
            assert effective_restrictions(leaf, policies) == walk(leaf)


class TestSatisfies:
    def test_sample_request_inside_us91_band(self, small_taxonomy):
        restriction = FrequencyWithin(FrequencyRange(mhz(1755), mhz(1780)))
        assert satisfies(request(), restriction, ctx(small_taxonomy))

    def test_frequency_bounds_inclusive(self, small_taxonomy):
        restriction = FrequencyWithin(FrequencyRange(mhz(1755), mhz(1780)))
        assert satisfies(
            request(freq_min=1755, freq_max=1780), restriction, ctx(small_taxonomy)
        )
        assert not satisfies(
            request(freq_min=1755, freq_max="1780.000001"),
            restriction,
            ctx(small_taxonomy),
        )

    def test_requester_descendant_matches(self, small_taxonomy):
        assert satisfies(request(), RequesterIsA("JTRS"), ctx(small_taxonomy))
        assert satisfies(request(), RequesterIsA("Device"), ctx(small_taxonomy))
        assert not satisfies(request(), RequesterIsA("AWS"), ctx(small_taxonomy))

    def test_pending_term_matches_exactly_only(self, small_taxonomy):
        pending = RequesterIsA("ExperimentalRadio")
        assert not satisfies(request(), pending, ctx(small_taxonomy))
        assert satisfies(
            request(requester="ExperimentalRadio"), pending, ctx(small_taxonomy)
        )

    def test_affiliation_from_request_wins(self, small_taxonomy):
        restriction = AffiliationIs(Affiliation.NONFEDERAL)
        assert satisfies(
            request(affiliation=Affiliation.NONFEDERAL),
            restriction,
            ctx(small_taxonomy),
        )

    def test_affiliation_falls_back_to_taxonomy(self, small_taxonomy):
        restriction = AffiliationIs(Affiliation.FEDERAL)
        assert satisfies(request(), restriction, ctx(small_taxonomy))

    def test_missing_affiliation_fails_closed(self, small_taxonomy):
        restriction = AffiliationIs(Affiliation.FEDERAL)
        assert not satisfies(
            request(requester="Device"), restriction, ctx(small_taxonomy)
        )

    def test_location_intersection(self, small_taxonomy):
        restriction = LocationWithinAny(frozenset({"A", "B"}))
        assert satisfies(request(), restriction, ctx(small_taxonomy, {"B", "C"}))
        assert not satisfies(request(), restriction, ctx(small_taxonomy, {"C"}))

    def test_time_boundary_instant_counts(self, small_taxonomy):
        restriction = ActiveDuring(window(11, 17))
        boundary = TimeWindow(
            datetime(2019, 10, 1, 9, tzinfo=UTC),
            datetime(2019, 10, 1, 11, tzinfo=UTC),
        )
        assert satisfies(request(time=boundary), restriction, ctx(small_taxonomy))

    def test_time_overlap_not_containment(self, small_taxonomy):
        restriction = ActiveDuring(window(11, 17))
        straddling = TimeWindow(
            datetime(2019, 10, 1, 10, tzinfo=UTC),
            datetime(2019, 10, 1, 18, tzinfo=UTC),
        )
        assert satisfies(request(time=straddling), restriction, ctx(small_taxonomy))

    def test_agrees_with_independent_predicates_on_random_inputs(
        self, small_taxonomy
    ):
        rng = random.Random(42)
        classes = sorted(small_taxonomy.classes)
        base = datetime(2019, 10, 1, tzinfo=UTC)
        for _ in range(1000):
            lo, hi = sorted(rng.randint(1, 4000) for _ in range(2))
            plo, phi = sorted(rng.randint(1, 4000) for _ in range(2))
            t1, t2 = sorted(rng.randint(0, 300) for _ in range(2))
            w1, w2 = sorted(rng.randint(0, 300) for _ in range(2))
            req_class = rng.choice(classes)
            policy_class = rng.choice(classes)
            r = request(
                freq_min=lo,
                freq_max=hi,
                requester=req_class,
                time=TimeWindow(
                    base + timedelta(hours=t1), base + timedelta(hours=t2)
                ),
            )
            c = ctx(small_taxonomy)

            freq = FrequencyWithin(FrequencyRange(mhz(plo), mhz(phi)))
            assert satisfies(r, freq, c) == (
                mhz(lo) >= mhz(plo) and mhz(hi) <= mhz(phi)
            )

            during = ActiveDuring(
                TimeWindow(base + timedelta(hours=w1), base + timedelta(hours=w2))
            )
            assert satisfies(r, during, c) == (t2 >= w1 and t1 <= w2)

            isa = RequesterIsA(policy_class)
            expected = policy_class in small_taxonomy.ancestors_of(req_class)
            assert satisfies(r, isa, c) == expected

    def test_purity(self, small_taxonomy):
        restriction = FrequencyWithin(FrequencyRange(mhz(1755), mhz(1780)))
        r = request()
        results = {satisfies(r, restriction, ctx(small_taxonomy)) for _ in range(10)}
        assert results == {True}

    def test_frequency_monotone_under_widening(self, small_taxonomy):
        rng = random.Random(3)
        for _ in range(200):
            lo, hi = sorted(rng.randint(10, 100) for _ in range(2))
            r = request(freq_min=lo, freq_max=hi)
            plo, phi = sorted(rng.randint(10, 100) for _ in range(2))
            narrow = FrequencyWithin(FrequencyRange(mhz(plo), mhz(phi)))
            wide = FrequencyWithin(
                FrequencyRange(mhz(max(1, plo - 5)), mhz(phi + 5))
            )
            if satisfies(r, narrow, ctx(small_taxonomy)):
                assert satisfies(r, wide, ctx(small_taxonomy))

    def test_requester_closed_under_ancestors(self, small_taxonomy):
        r = request(requester="GenericJTRS")
        for ancestor in small_taxonomy.ancestors_of("GenericJTRS"):
            assert satisfies(r, RequesterIsA(ancestor), ctx(small_taxonomy))


class TestTaxonomy:
    def test_cycle_rejected(self):
        with pytest.raises(ValueError, match="cycle"):
            Taxonomy({"A", "B"}, {"A": ("B",), "B": ("A",)})

    def test_unknown_parent_rejected(self):
        with pytest.raises(ValueError):
            Taxonomy({"A"}, {"A": ("Missing",)})

    def test_multi_parent_dag(self):
        t = Taxonomy(
            {"Root1", "Root2", "Child"}, {"Child": ("Root1", "Root2")}
        )
        assert t.is_subclass("Child", "Root1")
        assert t.is_subclass("Child", "Root2")

    def test_request_rejects_unknown_action(self):
        with pytest.raises(ValueError):
            request().__class__(
                id="x",
                requester_class="Device",
                location=GeoPoint(0, 0),
                frequency=FrequencyRange(mhz(1), mhz(2)),
                time=window(1, 2),
                action="Reception",
            )


class TestPolicyInvariants:
    def test_negative_precedence_rejected(self):
        with pytest.raises(ValueError):
            Policy(id="P", precedence=-1)

    def test_duplicate_restriction_kind_rejected(self):
        freq = FrequencyWithin(FrequencyRange(mhz(1), mhz(2)))
        other = FrequencyWithin(FrequencyRange(mhz(3), mhz(4)))
        with pytest.raises(ValueError):
            Policy(id="P", restrictions=(freq, other))

    def test_empty_location_set_rejected(self):
        with pytest.raises(ValueError):
            LocationWithinAny(frozenset())
