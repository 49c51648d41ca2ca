"""Byte-level vocabulary shared by every task: bytes 0-255 plus three specials."""
import numpy as np

PAD = 256
BOS = 257
EOS = 258
VOCAB_SIZE = 259


def encode(text):
    return list(text.encode('utf-8'))

def pad_rows(rows, length, pad=PAD):
    out = np.full((len(rows), length), pad, dtype=np.int64)
    for i, row in enumerate(rows):
        out[i, :len(row)] = row
    return out
