from deomod.benchmark import load_records, load_test_parses


def test_loads_all_records_with_splits():
    records = load_records()
    assert len(records) == 6389
    by_split = {}
    for r in records:
        by_split[r.split] = by_split.get(r.split, 0) + 1
    assert by_split == {"train": 4282, "dev": 330, "test": 1777}


def test_every_test_record_has_a_matching_parse():
    records = [r for r in load_records() if r.split == "test"]
    parses = {p.sentence_id: p for p in load_test_parses()}
    assert len(parses) == len(records) == 1777
    for r in records:
        sent = parses[r.sentence_id]
        assert [t.surface for t in sent.tokens] == list(r.tokens)


def test_records_carry_tokens_and_valid_spans():
    for r in load_records():
        assert r.tokens
        for dtype, start, end in r.spans:
            assert 0 <= start <= end < len(r.tokens)
            assert dtype in r.labels
