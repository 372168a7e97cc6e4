import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eruku.errors import DecodeError, InvalidInput
from eruku.textcodec import (
    EOG,
    PAD,
    SOG,
    UNCOND,
    VOCAB_SIZE,
    TextTokenSeq,
    decode_text,
    encode_text,
    make_unconditional,
    validate_seq,
)


def test_special_ids():
    assert (SOG, EOG, UNCOND, PAD) == (256, 257, 258, 259)
    assert VOCAB_SIZE == 260


def test_encode_layout():
    seq = encode_text("ab", "cd")
    assert seq.tokens == (97, 98, SOG, 99, 100, EOG)
    assert seq.has_style_text


def test_encode_no_style():
    for style in (None, ""):
        seq = encode_text(style, "x")
        assert seq.tokens == (SOG, 120, EOG)
        assert not seq.has_style_text


def test_encode_rejects_empty_gen():
    with pytest.raises(InvalidInput):
        encode_text("a", "")


@settings(max_examples=200, deadline=None)
@given(
    style=st.one_of(st.none(), st.text(max_size=12)),
    gen=st.text(min_size=1, max_size=12),
)
def test_round_trip(style, gen):
    seq = encode_text(style, gen)
    validate_seq(seq)
    got_style, got_gen = decode_text(seq)
    assert got_gen == gen
    if style:
        assert got_style == style
    else:
        assert got_style is None


@settings(max_examples=100, deadline=None)
@given(gen=st.text(min_size=1, max_size=8), pad=st.integers(0, 5))
def test_round_trip_survives_padding(gen, pad):
    seq = encode_text("q", gen)
    padded = TextTokenSeq(tokens=seq.tokens + (PAD,) * pad, has_style_text=True)
    assert decode_text(padded) == ("q", gen)


def test_unconditional_same_length():
    seq = encode_text("style", "gen")
    u = make_unconditional(seq)
    assert len(u) == len(seq)
    assert u.is_unconditional
    assert all(t == UNCOND for t in u.tokens)
    with pytest.raises(InvalidInput):
        decode_text(u)


@pytest.mark.parametrize(
    "tokens,flag",
    [
        ((), False),
        ((PAD, PAD), False),
        ((97, SOG, 98), True),           # missing EOG
        ((97, EOG, 98, SOG), True),      # wrong order / EOG not last
        ((SOG, 98, EOG), True),          # flag claims style bytes
        ((97, SOG, 98, EOG), False),     # flag denies style bytes
        ((UNCOND, 97, SOG, 98, EOG), True),
        ((97, PAD, SOG, 98, EOG), True),  # interior PAD
        ((97, SOG, 300, EOG), True),
    ],
)
def test_validate_rejects(tokens, flag):
    with pytest.raises(InvalidInput):
        validate_seq(TextTokenSeq(tokens=tokens, has_style_text=flag))


def test_decode_rejects_bad_utf8():
    seq = TextTokenSeq(tokens=(SOG, 0xFF, EOG), has_style_text=False)
    with pytest.raises(DecodeError):
        decode_text(seq)


def test_multibyte_utf8_round_trip():
    seq = encode_text("café", "✓ok")
    assert decode_text(seq) == ("café", "✓ok")
