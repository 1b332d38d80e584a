import pytest
from hypothesis import given
from hypothesis import strategies as st

from synq.diagram import Cup, Spider, Word
from synq.readers import Sentence, cups_read, spiders_read, tokenize
from synq.types import EMPTY, ts

SENT = "John gave Mary a flower"


def test_tokenize():
    assert tokenize("John gave Mary a flower.").tokens == (
        "john", "gave", "mary", "a", "flower")
    with pytest.raises(ValueError):
        tokenize("...")


def test_spiders_five_words():
    d = spiders_read(tokenize(SENT))
    words = [b for b in d.boxes if isinstance(b, Word)]
    spiders = [b for b in d.boxes if isinstance(b, Spider)]
    assert len(words) == 5 and len(spiders) == 1
    assert spiders[0].n_in == 5 and spiders[0].n_out == 1
    assert d.dom == EMPTY and d.cod == ts("s")


def test_spiders_single_word():
    d = spiders_read(Sentence(("john",)))
    assert [type(b) for b in d.boxes] == [Word, Spider]
    assert d.boxes[1].n_in == 1 and d.boxes[1].n_out == 1
    assert d.cod == ts("s")


def test_cups_five_words():
    d = cups_read(tokenize(SENT))
    words = [b for b in d.boxes if isinstance(b, Word)]
    cups = [b for b in d.boxes if isinstance(b, Cup)]
    assert len(words) == 5 and len(cups) == 4
    assert d.dom == EMPTY and d.cod == ts("s")


def test_cups_single_word():
    d = cups_read(Sentence(("john",)))
    assert d.boxes == [Word("john", EMPTY, ts("s"))]


@given(st.integers(min_value=1, max_value=8))
def test_cups_count_induction(k):
    d = cups_read(Sentence(tuple(f"w{i}" for i in range(k))))
    assert sum(isinstance(b, Cup) for b in d.boxes) == k - 1
    assert d.cod == ts("s")


@given(st.lists(st.sampled_from(["red", "cat", "runs"]), min_size=1, max_size=6))
def test_both_readers_type_check(tokens):
    s = Sentence(tuple(tokens))
    for reader in (spiders_read, cups_read):
        d = reader(s)
        assert d.dom == EMPTY and d.cod == ts("s")


def _contract_reader(reader, tokens, values):
    import numpy as np
    from synq.ansatz import tensor_ansatz
    from synq.contract import contract
    from synq.params import ParameterStore
    tn = tensor_ansatz(reader(Sentence(tokens)), {"s": 3})
    ps = ParameterStore({})
    for sym in tn.symbols:
        token = sym.name.split("__")[0]
        ps[sym.name] = np.asarray(values[token])[:int(np.prod(sym.shape))] \
            .reshape(sym.shape)
    return contract(tn, ps)


def test_spiders_contraction_permutation_invariant():
    import numpy as np
    rng = np.random.default_rng(0)
    values = {t: rng.normal(size=9) for t in ("john", "gave", "mary")}
    base = _contract_reader(spiders_read, ("john", "gave", "mary"), values)
    for perm in [("gave", "john", "mary"), ("mary", "gave", "john")]:
        got = _contract_reader(spiders_read, perm, values)
        assert np.allclose(got, base, atol=1e-12)


def test_cups_contraction_is_order_sensitive():
    import numpy as np
    rng = np.random.default_rng(1)
    values = {t: rng.normal(size=9) for t in ("john", "gave", "mary")}
    base = _contract_reader(cups_read, ("john", "gave", "mary"), values)
    other = _contract_reader(cups_read, ("mary", "gave", "john"), values)
    assert not np.allclose(base, other, atol=1e-9)
