"""Deterministic tokenizer for the text towers.

The models here run with randomly initialized weights, so a learned BPE
vocabulary would add nothing; what matters is that the same text always
produces the same id sequence, in this process and the next one. Words
hash to stable ids, the sequence is bracketed by BOS/EOS, and zero
padding fills the context window.

The EOS id is the largest id in the vocabulary, so ``ids.argmax()``
always lands on the EOS position. The RN101 text tower pools its output
at exactly that position.
"""

from __future__ import annotations

import hashlib
import re

VOCAB_SIZE = 49408
CONTEXT_LENGTH = 77
BOS_ID = 49406
EOS_ID = 49407
PAD_ID = 0

_WORD = re.compile(r"\S+")


class HashingTokenizer:
    def __init__(
        self,
        context_length: int = CONTEXT_LENGTH,
        bos_id: int = BOS_ID,
        eos_id: int = EOS_ID,
    ):
        if not 0 < bos_id < eos_id < VOCAB_SIZE:
            raise ValueError("need pad < bos < eos within the vocabulary")
        self.context_length = context_length
        self.bos_id = bos_id
        self.eos_id = eos_id
        # word ids live in [1, bos). 0 stays reserved for padding.
        self._word_range = bos_id - 1

    def word_id(self, word: str) -> int:
        digest = hashlib.sha1(word.casefold().encode("utf-8")).digest()
        return 1 + int.from_bytes(digest[:8], "little") % self._word_range

    def __call__(self, text: str) -> list[int]:
        words = _WORD.findall(text)
        body = [self.word_id(w) for w in words[: self.context_length - 2]]
        ids = [self.bos_id, *body, self.eos_id]
        ids.extend([PAD_ID] * (self.context_length - len(ids)))
        return ids
