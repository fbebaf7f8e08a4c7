"""Symbolic coding on the doubled alphabet.

Words over {1..d} index compositions of the planar maps.  Because every
composed linear part is again diagonal or anti-diagonal, a word is fully
described by three numbers: the magnitudes of the top-row and bottom-row
entries of the product (tracked in log space) and the parity of the number of
anti-diagonal factors.  The doubled alphabet {1..2d} additionally records, per
position, whether the composition so far preserves the coordinate axes: the
lift tau shifts a symbol by d exactly when the preceding composition is
anti-diagonal, and the companion lift omega is tau shifted by d modulo 2d.
Admissibility of lifted words is governed by a fixed 0/1 transition matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadShape, NotInImage
from .ifs import IfsSpec

Word = tuple[int, ...]


def as_word(symbols, d: int) -> Word:
    """Validate and normalize a word over {1..d}."""
    w = tuple(int(x) for x in symbols)
    if len(w) == 0:
        raise ValueError("word must be nonempty")
    if any(x < 1 or x > d for x in w):
        raise ValueError(f"word symbols must lie in 1..{d}: {w}")
    return w


@dataclass(frozen=True)
class TransitionMatrix:
    """The 2d x 2d 0/1 matrix of allowed successors on the doubled alphabet.

    State i may be followed by any unshifted symbol (j <= d) when
    i in {1..l-1} u {d+l..2d}, and by any shifted symbol (j > d) when
    i in {l..d+l-1}.  Every row therefore has exactly d ones.
    """

    d: int
    l: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)

    def allowed(self, i: int, j: int) -> bool:
        return bool(self.entries[i - 1, j - 1])


@lru_cache(maxsize=64)
def transition_matrix(d: int, l: int) -> TransitionMatrix:
    if not (1 < l <= d):
        raise BadShape(f"need 1 < l <= d, got d={d}, l={l}")
    n = 2 * d
    entries = np.zeros((n, n), dtype=np.int64)
    for i in range(1, n + 1):
        if i <= l - 1 or i >= d + l:
            entries[i - 1, :d] = 1
        else:
            entries[i - 1, d:] = 1
    return TransitionMatrix(d=d, l=l, entries=entries)


def check_mixing(tm: TransitionMatrix) -> bool:
    """True when the square of the matrix has all entries positive."""
    sq = tm.entries @ tm.entries
    return bool((sq > 0).all())


def rho_symbol(i: int, d: int) -> int:
    """Shift-by-d involution on {1..2d}."""
    return (i + d - 1) % (2 * d) + 1


@dataclass(frozen=True)
class CodedWord:
    """A word over the doubled alphabet with its admissibility decided eagerly."""

    symbols: tuple[int, ...]
    admissible: bool


def coded_word(symbols, tm: TransitionMatrix) -> CodedWord:
    syms = tuple(int(x) for x in symbols)
    if len(syms) == 0:
        raise ValueError("coded word must be nonempty")
    if any(x < 1 or x > 2 * tm.d for x in syms):
        raise ValueError(f"coded symbols must lie in 1..{2 * tm.d}: {syms}")
    ok = all(tm.allowed(x, y) for x, y in zip(syms, syms[1:]))
    return CodedWord(symbols=syms, admissible=ok)


def _tm_for(spec: IfsSpec) -> TransitionMatrix:
    return transition_matrix(spec.d, spec.l)


def encode_tau(w, spec: IfsSpec) -> CodedWord:
    """Lift a word into the doubled alphabet.

    The m-th symbol is shifted by d exactly when an odd number of the first
    m-1 letters are anti-diagonal (index >= l), i.e. when the composition so
    far swaps the axes.  The result is always admissible and starts <= d.
    """
    w = as_word(w, spec.d)
    out = []
    odd = False
    for i in w:
        out.append(i + spec.d if odd else i)
        if i >= spec.l:
            odd = not odd
    return coded_word(out, _tm_for(spec))


def encode_omega(w, spec: IfsSpec) -> CodedWord:
    """The complementary lift: encode_tau with every symbol shifted by d mod 2d."""
    w = as_word(w, spec.d)
    out = []
    odd = False
    for i in w:
        out.append(i if odd else i + spec.d)
        if i >= spec.l:
            odd = not odd
    return coded_word(out, _tm_for(spec))


def decode_tau(c: CodedWord, spec: IfsSpec) -> Word:
    """Inverse of encode_tau on its image.

    Admissible coded words starting <= d are exactly the image, and on the
    image the inverse is symbol-wise reduction modulo d into {1..d}.
    """
    if not c.admissible or c.symbols[0] > spec.d:
        raise NotInImage(f"{c.symbols} is not an admissible lift starting <= d")
    return tuple((x - 1) % spec.d + 1 for x in c.symbols)


@dataclass(frozen=True)
class ProductSignature:
    """Closed form of a product of diagonal/anti-diagonal matrices.

    log_p and log_q are the logs of the top-row and bottom-row entry
    magnitudes.  Log space is essential: words of length 100+ underflow
    doubles.  The singular values are max and min of (p, q).
    """

    log_p: float
    log_q: float
    antidiagonal_parity: bool

    @property
    def p(self) -> float:
        return float(np.exp(self.log_p))

    @property
    def q(self) -> float:
        return float(np.exp(self.log_q))

    @property
    def log_alpha1(self) -> float:
        return max(self.log_p, self.log_q)

    @property
    def log_alpha2(self) -> float:
        return min(self.log_p, self.log_q)

    @property
    def alpha1(self) -> float:
        return float(np.exp(self.log_alpha1))

    @property
    def alpha2(self) -> float:
        return float(np.exp(self.log_alpha2))


def signature_step(log_p: float, log_q: float, odd: bool,
                   log_a: float, log_b: float, anti: bool) -> tuple[float, float, bool]:
    """Append one letter on the right of a composition.

    With even parity the rows pick up (a, b); with odd parity the incoming
    letter meets swapped axes and the rows pick up (b, a).  Appending an
    anti-diagonal letter flips the parity for subsequent letters.
    """
    if odd:
        log_p, log_q = log_p + log_b, log_q + log_a
    else:
        log_p, log_q = log_p + log_a, log_q + log_b
    return log_p, log_q, odd ^ anti


def product_signature(w, spec: IfsSpec) -> ProductSignature:
    w = as_word(w, spec.d)
    log_p = log_q = 0.0
    odd = False
    for i in w:
        m = spec.map(i)
        log_p, log_q, odd = signature_step(
            log_p, log_q, odd, np.log(m.a), np.log(m.b), m.anti)
    return ProductSignature(log_p=log_p, log_q=log_q, antidiagonal_parity=odd)


# -- vectorized helpers -------------------------------------------------------
#
# Several consumers (brute-force pressure, cylinder enumeration, sampling
# diagnostics) need the signature and the tau lift for large batches of words.
# Words are passed as an (N, n) integer array with values in 1..d.

def signature_arrays(words: np.ndarray, spec: IfsSpec):
    """Per-row (log_p, log_q, parity) for a batch of words.

    Returns float arrays log_p, log_q and an int array of anti-diagonal
    parities (0 or 1).
    """
    words = np.asarray(words)
    n_rows, n_cols = words.shape
    la = np.log(np.asarray(spec.a))[words - 1]
    lb = np.log(np.asarray(spec.b))[words - 1]
    is_anti = (words >= spec.l)
    # parity before each position = cumulative count of anti letters so far
    before = np.zeros_like(words)
    before[:, 1:] = np.cumsum(is_anti[:, :-1], axis=1)
    even = (before % 2 == 0)
    log_p = np.where(even, la, lb).sum(axis=1)
    log_q = np.where(even, lb, la).sum(axis=1)
    parity = is_anti.sum(axis=1) % 2
    return log_p, log_q, parity


def tau_arrays(words: np.ndarray, spec: IfsSpec) -> np.ndarray:
    """The tau lift of a batch of words, as an (N, n) array over 1..2d."""
    words = np.asarray(words)
    is_anti = (words >= spec.l)
    before = np.zeros_like(words)
    before[:, 1:] = np.cumsum(is_anti[:, :-1], axis=1)
    return np.where(before % 2 == 0, words, words + spec.d)
