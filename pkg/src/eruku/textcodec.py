"""Byte-level text codec with the generator's special tokens.

Text conditioning is tokenized byte by byte: ids 0..255 are raw byte
values, followed by four specials.  A conditional sequence has the form

    [style bytes] <SOG> [gen bytes] <EOG>

and the unconditional stand-in replaces every position with ``<UNCOND>``.
``<PAD>`` only ever appears through batch collation and is masked out of
encoder attention downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DecodeError, InvalidInput

SOG = 256
EOG = 257
UNCOND = 258
PAD = 259
VOCAB_SIZE = 260


@dataclass(frozen=True)
class TextTokenSeq:
    """An encoded text sequence.

    ``tokens`` holds ids in [0, 259].  Conditional sequences contain
    exactly one ``<SOG>`` and one ``<EOG>`` (in that order, ``<EOG>``
    last before any padding); unconditional sequences are all-``<UNCOND>``
    and never mix with byte tokens.
    """

    tokens: tuple[int, ...]
    has_style_text: bool

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def is_unconditional(self) -> bool:
        return bool(self.tokens) and all(t in (UNCOND, PAD) for t in self.tokens)


def encode_text(style_text: str | None, gen_text: str) -> TextTokenSeq:
    """Encode an optional style string and a target string.

    Empty style text degenerates to the style-absent layout
    ``[<SOG>, gen bytes, <EOG>]``.
    """
    if not isinstance(gen_text, str) or len(gen_text) == 0:
        raise InvalidInput("gen_text must be a non-empty string")
    if style_text is not None and not isinstance(style_text, str):
        raise InvalidInput("style_text must be a string or None")
    style = (style_text or "").encode("utf-8")
    gen = gen_text.encode("utf-8")
    tokens = tuple(style) + (SOG,) + tuple(gen) + (EOG,)
    return TextTokenSeq(tokens=tokens, has_style_text=len(style) > 0)


def _strip_pad(tokens: tuple[int, ...]) -> tuple[int, ...]:
    n = len(tokens)
    while n > 0 and tokens[n - 1] == PAD:
        n -= 1
    return tokens[:n]


def validate_seq(seq: TextTokenSeq) -> None:
    """Check the TextTokenSeq invariants, raising InvalidInput on violation."""
    toks = seq.tokens
    if len(toks) == 0:
        raise InvalidInput("empty token sequence")
    if any(t < 0 or t >= VOCAB_SIZE for t in toks):
        raise InvalidInput("token id out of range")
    body = _strip_pad(toks)
    if len(body) == 0:
        raise InvalidInput("sequence is all padding")
    if any(t == PAD for t in body):
        raise InvalidInput("<PAD> may only appear as a trailing run")
    if all(t == UNCOND for t in body):
        return
    if any(t == UNCOND for t in body):
        raise InvalidInput("<UNCOND> must not co-occur with other tokens")
    if body.count(SOG) != 1 or body.count(EOG) != 1:
        raise InvalidInput("expected exactly one <SOG> and one <EOG>")
    if body[-1] != EOG:
        raise InvalidInput("<EOG> must be the last non-<PAD> token")
    if seq.has_style_text and body[0] == SOG:
        raise InvalidInput("has_style_text set but no style bytes present")
    if not seq.has_style_text and body[0] != SOG:
        raise InvalidInput("style bytes present but has_style_text unset")


def decode_text(seq: TextTokenSeq) -> tuple[str | None, str]:
    """Inverse of :func:`encode_text` on the byte portions."""
    validate_seq(seq)
    body = _strip_pad(seq.tokens)
    if all(t == UNCOND for t in body):
        raise InvalidInput("unconditional sequence carries no text")
    sog = body.index(SOG)
    style_bytes = bytes(body[:sog])
    gen_bytes = bytes(body[sog + 1 : -1])
    if len(gen_bytes) == 0:
        raise InvalidInput("gen byte span is empty")
    try:
        style = style_bytes.decode("utf-8") if sog > 0 else None
        gen = gen_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(f"invalid UTF-8 in token sequence: {exc}") from None
    return style, gen


def make_unconditional(seq: TextTokenSeq) -> TextTokenSeq:
    """Token-level stand-in for CFG: same length, every position <UNCOND>.

    The actual replacement happens at the embedding table; this just
    produces the id pattern that maps to the learned unconditional
    embedding.
    """
    return TextTokenSeq(tokens=(UNCOND,) * len(seq.tokens), has_style_text=False)
