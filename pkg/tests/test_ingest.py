import pytest

from conftest import FIXTURES
from deomod.errors import ConfigurationError, IngestionError
from deomod.ingest import (
    AgentAlias,
    Provision,
    definition_discards,
    detect_contract_type,
    expand_per_agent,
    extract_aliases,
    extract_provisions,
    filter_definitions,
    is_sub_bullet,
    merge_bullets,
    segment_sentences,
)


def prov(text, index=0, cid="c1", depth=0, parent=None):
    return Provision(
        contract_id=cid, index=index, text=text, depth=depth, parent_index=parent
    )


def provs(*texts):
    return [prov(t, index=i) for i, t in enumerate(texts)]


@pytest.fixture(scope="module")
def contract_provisions():
    html = (FIXTURES / "contract.html").read_text()
    return extract_provisions(html, "lease-x")


# ---------------------------------------------------------------------------
# HTML extraction


def test_extract_provisions_structure(contract_provisions):
    ps = contract_provisions
    assert [p.index for p in ps] == list(range(len(ps)))
    assert ps[0].text == "RESIDENTIAL LEASE AGREEMENT"
    assert ps[0].depth == 0 and ps[0].parent_index is None
    # nested paragraphs hang off the div and entities are decoded
    assert ps[1].text.startswith("This Lease Agreement is entered into")
    assert '"Landlord"' in ps[1].text and '"Tenant"' in ps[1].text
    assert ps[1].depth == 1 and ps[1].parent_index == 0
    assert ps[2].text.startswith('"Premises" shall mean')
    # whitespace-only block was dropped, so exactly two children survive
    children = [p for p in ps if p.parent_index == 0]
    assert len(children) == 2


def test_extract_provisions_drops_script_style_and_stray_text(contract_provisions):
    joined = " ".join(p.text for p in contract_provisions)
    assert "margin" not in joined
    assert "window.track" not in joined
    # text outside any block element is not a provision
    assert "Filed under recording" not in joined


def test_extract_provisions_normalizes_whitespace():
    ps = extract_provisions("<p>a\n   b\tc</p>", "c1")
    assert ps[0].text == "a b c"


def test_extract_provisions_br_is_whitespace():
    ps = extract_provisions("<p>pay<br>rent</p>", "c1")
    assert ps[0].text == "pay rent"


def test_extract_provisions_unclosed_blocks_tolerated():
    ps = extract_provisions("<div>top<p>inner</div>", "c1")
    assert [p.text for p in ps] == ["top", "inner"]
    assert ps[1].parent_index == 0


def test_extract_provisions_empty_document_raises():
    with pytest.raises(IngestionError):
        extract_provisions("<html><body>no blocks here</body></html>", "c1")


def test_skipped_parent_reattaches_to_nearest_kept_ancestor():
    html = "<div>outer<div>   <p>leaf</p></div></div>"
    ps = extract_provisions(html, "c1")
    assert [p.text for p in ps] == ["outer", "leaf"]
    # the empty middle div vanishes; the leaf points at the outer div
    assert ps[1].parent_index == 0 and ps[1].depth == 1


# ---------------------------------------------------------------------------
# Definition filtering


def test_filter_definitions_drops_cue_bearing_provisions(contract_provisions):
    kept = filter_definitions(contract_provisions)
    texts = [p.text for p in kept]
    assert not any("shall mean" in t for t in texts)
    # indices are preserved, not renumbered
    assert [p.index for p in kept] == [0, 1, 3, 4, 5, 6, 7, 8, 9]


def test_definition_discards_reports_cue(contract_provisions):
    discards = definition_discards(contract_provisions)
    assert len(discards) == 1
    assert discards[0][1] == "shall mean"


def test_filter_definitions_matches_whole_words_only():
    keep = provs("The word meanscore is not a cue.")
    assert filter_definitions(keep) == keep
    drop = provs("Premises means the dwelling.")
    assert filter_definitions(drop) == []


def test_filter_definitions_idempotent(contract_provisions):
    once = filter_definitions(contract_provisions)
    assert filter_definitions(once) == once


# ---------------------------------------------------------------------------
# Bullet merging


def oracle(values):
    table = dict(values)
    return lambda p: table.get(p.text)


def test_is_sub_bullet_patterns():
    assert is_sub_bullet("(a) pay rent")
    assert is_sub_bullet("(iv) insurance")
    assert is_sub_bullet("(B) notices")
    assert is_sub_bullet("3.2 Maintenance duties")
    assert is_sub_bullet("1. Rent")
    assert not is_sub_bullet("Tenant shall pay")
    assert not is_sub_bullet("- dash bullets are not enumerators")


def test_merge_incomplete_child_into_complete_parent():
    ps = provs("Tenant shall do the tasks in this Section:",
               "(a) pay rent monthly;")
    out = merge_bullets(
        ps,
        oracle({ps[0].text: True, ps[1].text: False}),
    )
    assert len(out) == 1
    # the parent's trailing colon is stripped before joining
    assert out[0].text == "Tenant shall do the tasks in this Section (a) pay rent monthly;"
    assert out[0].index == 0


def test_merge_chains_multiple_children_under_original_parent_flag():
    ps = provs(
        "Tenant agrees to these duties.",
        "(a) pay rent;",
        "(b) keep order.",
    )
    comp = oracle({ps[0].text: True, ps[1].text: False, ps[2].text: False})
    out = merge_bullets(ps, comp)
    assert len(out) == 1
    assert out[0].text == "Tenant agrees to these duties. (a) pay rent; (b) keep order."


def test_merge_skips_parents_with_follow_or_below_cues():
    ps = provs("Tenant shall do what follows:", "(a) pay rent;")
    out = merge_bullets(ps, oracle({ps[0].text: True, ps[1].text: False}))
    # rule 1 and 2 are blocked; rule 4 still concatenates on the colon
    assert len(out) == 1
    assert out[0].text.endswith("follows: (a) pay rent;")


def test_merge_lowercase_continuation_needs_no_completeness():
    ps = provs("Tenant shall pay rent and:", "and mow the lawn monthly.")
    # no oracle values at all: the lowercase rule never consults it
    out = merge_bullets(ps, oracle({}))
    assert len(out) == 1
    assert out[0].text == "Tenant shall pay rent and and mow the lawn monthly."


def test_merge_lowercase_blocked_by_follow_cue_falls_through():
    ps = provs("Tenant shall do what follows:", "and mow the lawn monthly.")
    out = merge_bullets(ps, oracle({ps[1].text: True}))
    # rules 1-2 blocked by "follow", rule 4 concatenates on the colon
    assert len(out) == 1
    assert out[0].text == "Tenant shall do what follows: and mow the lawn monthly."


def test_merge_the_following_phrase_is_replaced_for_incomplete_child():
    ps = provs("Tenant shall do the following:", "(a) pay rent;")
    out = merge_bullets(ps, oracle({ps[1].text: False}))
    assert out[0].text == "Tenant shall do (a) pay rent;"


def test_merge_the_following_phrase_kept_for_complete_child():
    ps = provs("Tenant shall do the following:", "(a) Tenant pays rent.")
    out = merge_bullets(ps, oracle({ps[1].text: True}))
    assert out[0].text == "Tenant shall do the following: (a) Tenant pays rent."


def test_merge_plain_colon_concatenates():
    ps = provs("Deadlines are listed below:", "(i) rent due monthly;")
    out = merge_bullets(ps, oracle({}))
    # "below:" blocks rules 1-2 and there is no "the following:", rule 4 fires
    assert out[0].text == "Deadlines are listed below: (i) rent due monthly;"


def test_unmatched_sub_bullet_stands_alone():
    ps = provs("Tenant shall pay rent on time.", "(a) reserved.")
    out = merge_bullets(ps, oracle({ps[0].text: True, ps[1].text: True}))
    assert [p.text for p in out] == [ps[0].text, ps[1].text]


def test_first_provision_sub_bullet_has_no_parent():
    ps = provs("(a) orphan bullet;")
    assert merge_bullets(ps, oracle({})) == ps


def test_merge_missing_completeness_value_is_configuration_error():
    ps = provs("Tenant shall do the tasks in this Section:", "(a) pay rent;")
    with pytest.raises(ConfigurationError):
        merge_bullets(ps, oracle({}))


def test_merge_is_idempotent():
    ps = provs("Tenant agrees to these duties.", "(a) pay rent;")
    comp = {"Tenant agrees to these duties.": True, "(a) pay rent;": False}
    out = merge_bullets(ps, lambda p: comp.get(p.text, True))
    again = merge_bullets(out, lambda p: comp.get(p.text, True))
    assert again == out


# ---------------------------------------------------------------------------
# Contract type


def test_detect_contract_type(contract_provisions):
    assert detect_contract_type(contract_provisions) == "residential lease"


@pytest.mark.parametrize(
    "heading, want",
    [
        ("THIS SUBLEASE AGREEMENT AND DEPOSIT RECEIPT", "sublease"),
        ("COMMERCIAL PROPERTY MANAGEMENT AGREEMENT", "commercial property management"),
        ("AGREEMENT OF LEASE", "unknown"),  # nothing before the keyword
        ("Lease Agreement", None),  # not all caps, scan continues
    ],
)
def test_detect_contract_type_headings(heading, want):
    ps = provs(heading, "Second provision text.")
    got = detect_contract_type(ps)
    assert got == (want if want is not None else "unknown")


def test_detect_contract_type_window_limit():
    filler = [prov(f"Provision number {i}.", index=i) for i in range(20)]
    late = prov("LATE LEASE AGREEMENT", index=20)
    assert detect_contract_type(filler + [late]) == "unknown"
    assert detect_contract_type(filler[:5] + [late]) == "late lease"


# ---------------------------------------------------------------------------
# Aliases


def test_extract_aliases_from_fixture(contract_provisions):
    aliases = extract_aliases(contract_provisions)
    by_name = {a.alias: a for a in aliases}
    assert set(by_name) == {"Landlord", "Tenant"}
    assert by_name["Landlord"].frequency == 2
    assert by_name["Landlord"].canonical_group == "Landlord-group"
    assert by_name["Tenant"].canonical_group == "Tenant-group"


def test_extract_aliases_threshold():
    ps = provs(
        'Made by John Smith (the "Landlord") and Acme Storage ("Depositor").',
        'Signed again by John Smith ("Landlord").',
    )
    aliases = extract_aliases(ps)
    assert [a.alias for a in aliases] == ["Landlord"]  # Depositor appears once
    both = extract_aliases(ps, threshold=1)
    assert {a.alias for a in both} == {"Landlord", "Depositor"}


def test_extract_aliases_unmapped_group_falls_back_to_lowercased_alias():
    ps = provs(
        'Held by Acme Storage ("Depositor") for the term.',
        'Acme Storage ("Depositor") keeps the keys.',
    )
    (alias,) = extract_aliases(ps)
    assert alias.canonical_group == "depositor"


def test_extract_aliases_requires_entity_context():
    ps = provs(
        "The fee (the Premium) is due.",  # lowercase context, no entity
        "the fee (the Premium) again.",
    )
    assert extract_aliases(ps) == []


def test_extract_aliases_with_explicit_mentions():
    ps = provs(
        'Between Blue River LLC (the "Owner") and others.',
        'Blue River LLC ("Owner") signs here.',
    )
    got = extract_aliases(ps, entity_mentions=["Blue River LLC"])
    assert [a.alias for a in got] == ["Owner"]
    assert extract_aliases(ps, entity_mentions=["Green Lake Inc"]) == []


def test_extract_aliases_empty_is_not_an_error():
    assert extract_aliases(provs("Nothing of interest here.")) == []


# ---------------------------------------------------------------------------
# Sentence segmentation


def segment(text):
    return segment_sentences(prov(text, index=3, cid="lease-x"))


def test_segment_spans_partition_text():
    text = "Tenant shall pay rent. Landlord shall provide notice.  Both agree."
    records = segment(text)
    assert [r.text for r in records] == [
        "Tenant shall pay rent. ",
        "Landlord shall provide notice.  ",
        "Both agree.",
    ]
    assert records[0].char_span == (0, 23)
    rebuilt = "".join(r.text for r in records)
    assert rebuilt == text
    for r in records:
        assert r.text == text[r.char_span[0] : r.char_span[1]]
    assert [r.sentence_id for r in records] == [
        "lease-x-p3-s0", "lease-x-p3-s1", "lease-x-p3-s2"
    ]


def test_segment_protects_abbreviations_decimals_enumerators():
    text = "Rent of $1,200.50 is due on day No. 1 of each month."
    assert len(segment(text)) == 1
    text = "1. Tenant shall pay rent."
    assert len(segment(text)) == 1
    text = "Dr. Smith of Acme Inc. signs. Tenant countersigns."
    assert [r.text for r in segment(text)] == [
        "Dr. Smith of Acme Inc. signs. ",
        "Tenant countersigns.",
    ]


def test_segment_question_and_exclamation():
    assert len(segment("Shall the Tenant pay? The Landlord says yes!")) == 2


def test_segment_no_terminator_is_single_sentence():
    records = segment("RESIDENTIAL LEASE AGREEMENT")
    assert len(records) == 1
    assert records[0].char_span == (0, 27)


def test_segment_empty_text():
    assert segment("") == []


def test_segment_initials_do_not_split():
    assert len(segment("Signed by J. Smith on behalf of the owner.")) == 1


# ---------------------------------------------------------------------------
# Per-agent expansion


def test_expand_per_agent_emits_one_view_per_alias():
    aliases = [
        AgentAlias("Tenant", "Tenant-group", 2),
        AgentAlias("Landlord", "Landlord-group", 2),
    ]
    records = segment("The Landlord may enter upon notice to the Tenant. Rent is due.")
    out = expand_per_agent(records, aliases)
    assert [(a.sentence_id, a.agent.alias) for a in out] == [
        ("lease-x-p3-s0", "Tenant"),
        ("lease-x-p3-s0", "Landlord"),
    ]


def test_expand_per_agent_word_boundaries():
    aliases = [AgentAlias("Tenant", "Tenant-group", 2)]
    records = segment("The Subtenant waits.")
    assert expand_per_agent(records, aliases) == []
    records = segment("The tenant pays; TENANT signs.")
    assert len(expand_per_agent(records, aliases)) == 1
