import pytest

from conftest import build_sentence
from deomod.errors import AlignmentError, ParseError, StructuralError
from deomod.lingrep import (
    CLASSIC_LABEL_MAP,
    align_tokens,
    is_complete_sentence,
    normalize_labels,
    read_conllu,
    write_conllu,
)

SIMPLE = """\
# sent_id = a1
# text = Tenant shall pay .
1\tTenant\t_\tNOUN\t_\t_\t3\tnsubj\t_\t_
2\tshall\t_\tAUX\t_\t_\t3\taux\t_\t_
3\tpay\t_\tVERB\t_\t_\t0\tROOT\t_\t_
4\t.\t_\tPUNCT\t_\t_\t3\tpunct\t_\t_
"""


def test_read_basic_fields():
    (sent,) = read_conllu(SIMPLE)
    assert sent.sentence_id == "a1"
    assert sent.text == "Tenant shall pay ."
    assert [t.surface for t in sent.tokens] == ["Tenant", "shall", "pay", "."]
    assert [t.pos for t in sent.tokens] == ["NOUN", "AUX", "VERB", "PUNCT"]
    # 0-based heads, root as a self-loop
    assert [t.head for t in sent.tokens] == [2, 2, 2, 2]
    assert sent.root_index == 2
    assert sent.children[2] == [0, 1, 3]


def test_round_trip_identity():
    text = SIMPLE
    for _ in range(3):
        sents = read_conllu(text)
        text2 = write_conllu(sents)
        assert read_conllu(text2) == sents
        text = text2
    assert "\t".join(["1", "Tenant", "_", "NOUN"]) in text


def test_multiword_and_empty_node_lines_are_skipped():
    src = (
        "1-2\tdella\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tTenant\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n"
        "1.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "2\tpays\t_\tVERB\t_\t_\t0\tROOT\t_\t_\n"
    )
    (sent,) = read_conllu(src)
    assert [t.surface for t in sent.tokens] == ["Tenant", "pays"]


def test_missing_sent_id_gets_positional_one():
    src = SIMPLE.replace("# sent_id = a1\n", "")
    (sent,) = read_conllu(src)
    assert sent.sentence_id == "s1"


@pytest.mark.parametrize(
    "mutation, exc",
    [
        (lambda s: s.replace("2\tshall", "5\tshall"), ParseError),  # gap in ids
        (lambda s: s.replace("\t3\tnsubj", "\tx\tnsubj"), ParseError),
        (lambda s: s.replace("3\tpay\t_\tVERB\t_\t_\t0", "3\tpay\t_\tVERB\t_\t_\t1"),
         StructuralError),  # no root
        (lambda s: s.replace("1\tTenant\t_\tNOUN\t_\t_\t3", "1\tTenant\t_\tNOUN\t_\t_\t9"),
         StructuralError),  # head out of range
        (lambda s: s.replace("2\tshall\t_\tAUX\t_\t_\t3\taux\t_\t_\n", "2\tshall\t_\tAUX\n"),
         ParseError),  # wrong column count
    ],
)
def test_malformed_input_raises(mutation, exc):
    with pytest.raises(exc):
        read_conllu(mutation(SIMPLE))


def test_two_roots_rejected():
    src = SIMPLE.replace(
        "2\tshall\t_\tAUX\t_\t_\t3\taux", "2\tshall\t_\tAUX\t_\t_\t0\taux"
    )
    with pytest.raises(StructuralError):
        read_conllu(src)


def test_cycle_rejected():
    rows = [
        ("a", "NOUN", 1, "dep"),
        ("b", "NOUN", 0, "dep"),
        ("c", "VERB", 2, "ROOT"),
    ]
    sent = build_sentence("cyc", rows)
    from deomod.lingrep import _validate_tree

    with pytest.raises(StructuralError):
        _validate_tree(sent)


def test_normalize_labels_maps_modern_names():
    src = SIMPLE.replace("ROOT", "root").replace("nsubj", "nsubj:pass")
    (sent,) = read_conllu(src)
    # reading alone must not rewrite labels
    assert sent.tokens[2].deprel == "root"
    norm = normalize_labels(sent, CLASSIC_LABEL_MAP)
    assert norm.tokens[2].deprel == "ROOT"
    assert norm.tokens[0].deprel == "nsubjpass"
    # unknown labels pass through untouched
    assert norm.tokens[3].deprel == "punct"


def test_normalize_is_idempotent():
    (sent,) = read_conllu(SIMPLE.replace("ROOT", "root"))
    once = normalize_labels(sent, CLASSIC_LABEL_MAP)
    twice = normalize_labels(once, CLASSIC_LABEL_MAP)
    assert once == twice


def test_align_tokens_spans():
    (sent,) = read_conllu(SIMPLE)
    text = "Tenant  shall pay ."
    aligned = align_tokens(sent, text)
    spans = [t.char_span for t in aligned.tokens]
    assert spans == [(0, 6), (8, 13), (14, 17), (18, 19)]
    for t in aligned.tokens:
        s, e = t.char_span
        assert text[s:e] == t.surface


def test_align_tokens_mismatch_offset():
    (sent,) = read_conllu(SIMPLE)
    with pytest.raises(AlignmentError) as err:
        align_tokens(sent, "Tenant shall repay .")
    assert err.value.offset == 13


def test_align_tokens_trailing_garbage():
    (sent,) = read_conllu(SIMPLE)
    with pytest.raises(AlignmentError):
        align_tokens(sent, "Tenant shall pay . extra")
    # trailing whitespace is fine
    align_tokens(sent, "Tenant shall pay .   ")


@pytest.mark.parametrize(
    "parse, expected",
    [
        ("(S (NP Tenant) (VP pays))", True),
        ("(ROOT (S (NP Tenant) (VP pays)))", True),
        ("(TOP (S (NP x)))", True),
        ("(NP the rent)", False),
        ("(ROOT (NP the rent))", False),
        ("(FRAG (PP under))", False),
        (True, True),
        (False, False),
        (None, False),
    ],
)
def test_is_complete_sentence(parse, expected):
    assert is_complete_sentence(parse) is expected


def test_is_complete_sentence_rejects_malformed():
    with pytest.raises(ParseError):
        is_complete_sentence("(S (NP")
