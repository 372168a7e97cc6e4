"""Text corpus for dataset synthesis.

Words are drawn 80/20 from a bundled English list and from random
character strings, so the generator sees both real spelling statistics
and arbitrary glyph sequences.
"""

from __future__ import annotations

import hashlib
from importlib import resources
import string

_RANDOM_CHARS = string.ascii_letters + string.digits + ".,'-!?"
_ENGLISH_FRACTION = 0.8


def load_word_list() -> list[str]:
    text = (resources.files("eruku.fontsynth") / "data" / "words_en.txt").read_text("utf-8")
    words = [w for w in text.split("\n") if w]
    return words


def corpus_hash(words: list[str]) -> str:
    h = hashlib.sha256("\n".join(words).encode("utf-8"))
    return h.hexdigest()[:16]


def random_word(rng) -> str:
    n = int(rng.integers(1, 11))
    idx = rng.integers(0, len(_RANDOM_CHARS), size=n)
    return "".join(_RANDOM_CHARS[i] for i in idx)


def sample_text(rng, words: list[str], n_words: int) -> str:
    """Draw ``n_words`` words (space separated) from the mixed corpus."""
    out = []
    for _ in range(n_words):
        if rng.random() < _ENGLISH_FRACTION:
            out.append(words[int(rng.integers(0, len(words)))])
        else:
            out.append(random_word(rng))
    return " ".join(out)
