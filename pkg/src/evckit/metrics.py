"""Objective evaluation: DTW alignment, aligned Pearson correlation,
word/character error rates, and emotion-embedding cosine similarity."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .nn.losses import cosine_similarity


@dataclass
class AlignmentPath:
    """Monotone index pairs from (0,0) to (T1-1, T2-1) with their summed cost."""

    pairs: list
    cost: float


@dataclass
class MetricReport:
    """One evaluation row; metrics lacking inputs stay None."""

    wer: float | None = None
    cer: float | None = None
    eecs: float | None = None
    f0_pcc: float | None = None
    e_pcc: float | None = None

    def as_dict(self) -> dict:
        return {
            "wer": self.wer,
            "cer": self.cer,
            "eecs": self.eecs,
            "f0_pcc": self.f0_pcc,
            "e_pcc": self.e_pcc,
        }


def dtw_align(a, b) -> AlignmentPath:
    """Dynamic time warping with |a_i - b_j| local cost and steps (1,0), (0,1), (1,1).

    Returns the globally optimal path; ties in the programming table are
    broken toward the diagonal step, then toward consuming a.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.size == 0 or b.size == 0:
        raise ParameterError("both sequences must be non-empty and 1-D")
    n, m = a.size, b.size
    local = np.abs(a[:, None] - b[None, :])
    acc = np.empty((n, m))
    acc[0, 0] = local[0, 0]
    for j in range(1, m):
        acc[0, j] = local[0, j] + acc[0, j - 1]
    for i in range(1, n):
        acc[i, 0] = local[i, 0] + acc[i - 1, 0]
        row = acc[i]
        prev = acc[i - 1]
        for j in range(1, m):
            row[j] = local[i, j] + min(prev[j - 1], prev[j], row[j - 1])

    pairs = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1]
            best = min(diag, up, left)
            if diag == best:
                i, j = i - 1, j - 1
            elif up == best:
                i -= 1
            else:
                j -= 1
        pairs.append((i, j))
    pairs.reverse()
    return AlignmentPath(pairs=pairs, cost=float(acc[n - 1, m - 1]))


def aligned_pcc(a, b, drop_zeros: bool = False) -> float:
    """Pearson correlation of two contours paired along their DTW path.

    With drop_zeros=True (F0 contours) zero entries are removed from each
    side before alignment, discarding unvoiced frames.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if drop_zeros:
        a = a[a != 0]
        b = b[b != 0]
    if a.size == 0 or b.size == 0:
        raise ParameterError("no values left to correlate")
    path = dtw_align(a, b)
    idx_a = np.fromiter((i for i, _ in path.pairs), dtype=np.int64)
    idx_b = np.fromiter((j for _, j in path.pairs), dtype=np.int64)
    x = a[idx_a]
    y = b[idx_b]
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx**2).sum()))
    sy = float(np.sqrt((dy**2).sum()))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("correlation undefined: zero variance after alignment")
    return float(np.clip((dx * dy).sum() / (sx * sy), -1.0, 1.0))


def edit_distance(ref, hyp) -> int:
    """Levenshtein distance with unit insertion/deletion/substitution costs."""
    ref = list(ref)
    hyp = list(hyp)
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        cur = [i] + [0] * len(hyp)
        for j, h in enumerate(hyp, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (r != h))
        prev = cur
    return prev[-1]


def _tokens(text, split_words: bool):
    if isinstance(text, str):
        return text.split() if split_words else list("".join(text.split()))
    return list(text)


def word_error_rate(ref, hyp) -> float:
    """Levenshtein distance over word tokens divided by |ref|, as a percentage.

    Accepts strings (split on whitespace) or pre-tokenized sequences.
    """
    ref_tokens = _tokens(ref, split_words=True)
    hyp_tokens = _tokens(hyp, split_words=True)
    if len(ref_tokens) == 0:
        raise ParameterError("reference must be non-empty")
    return 100.0 * edit_distance(ref_tokens, hyp_tokens) / len(ref_tokens)


def character_error_rate(ref, hyp) -> float:
    """Like word_error_rate but over characters; whitespace is removed first."""
    ref_chars = _tokens(ref, split_words=False)
    hyp_chars = _tokens(hyp, split_words=False)
    if len(ref_chars) == 0:
        raise ParameterError("reference must be non-empty")
    return 100.0 * edit_distance(ref_chars, hyp_chars) / len(ref_chars)


def eecs(e1, e2) -> float:
    """Cosine similarity of two externally computed emotion embeddings."""
    return cosine_similarity(e1, e2)
