from embed_worker import BOS_ID, CONTEXT_LENGTH, EOS_ID, PAD_ID, HashingTokenizer


def test_fixed_length_and_brackets():
    tok = HashingTokenizer()
    ids = tok("a horse in the air")
    assert len(ids) == CONTEXT_LENGTH
    assert ids[0] == BOS_ID
    assert ids[6] == EOS_ID
    assert set(ids[7:]) == {PAD_ID}


def test_deterministic():
    tok = HashingTokenizer()
    assert tok("ragdoll physics") == tok("ragdoll physics")
    assert HashingTokenizer()("ragdoll physics") == tok("ragdoll physics")


def test_case_folded():
    tok = HashingTokenizer()
    assert tok("A Horse") == tok("a horse")


def test_eos_is_argmax_position():
    tok = HashingTokenizer()
    for text in ("", "one", "a much longer query about a car stuck in a wall"):
        ids = tok(text)
        assert max(ids) == EOS_ID
        assert ids.index(EOS_ID) == max(range(len(ids)), key=ids.__getitem__)


def test_truncates_to_context():
    tok = HashingTokenizer()
    ids = tok(" ".join(f"w{i}" for i in range(500)))
    assert len(ids) == CONTEXT_LENGTH
    assert ids[-1] == EOS_ID


def test_word_ids_in_range():
    tok = HashingTokenizer()
    ids = tok("several distinct words here")
    for wid in ids[1:5]:
        assert 0 < wid < BOS_ID


def test_empty_text():
    ids = HashingTokenizer()("")
    assert ids[:2] == [BOS_ID, EOS_ID]
