"""Sparse multi-indices, their partial order, and the two enumerations.

A multi-index is a finitely supported tuple of nonnegative integer exponents,
stored sparsely as ((position, exponent), ...) with positions 1-based, strictly
increasing, and exponents > 0.  Two 1-based enumerations are provided:

* degree-lexicographic over a fixed dimension n (degree blocks, descending
  lexicographic inside a block), and
* the prime-factorization bijection for unbounded support, where the index of
  rank m is the exponent vector of m = p1^k1 * p2^k2 * ...

Both are monotone for the componentwise partial order.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Optional, Tuple


class MultiIndex:
    """Immutable sparse multi-index."""

    __slots__ = ("entries", "_hash")

    def __init__(self, entries: Iterable[Tuple[int, int]] = ()):
        ent = tuple(sorted((int(p), int(e)) for p, e in entries if e != 0))
        for p, e in ent:
            if p < 1 or e < 0:
                raise ValueError(f"bad multi-index entry ({p},{e})")
        for (p1, _), (p2, _) in zip(ent, ent[1:]):
            if p1 == p2:
                raise ValueError("duplicate position in multi-index")
        self.entries = ent
        self._hash = hash(ent)

    @staticmethod
    def from_dense(exps: Iterable[int]) -> "MultiIndex":
        return MultiIndex((i + 1, e) for i, e in enumerate(exps) if e)

    def to_dense(self, n: Optional[int] = None) -> Tuple[int, ...]:
        width = n if n is not None else self.max_position()
        out = [0] * width
        for p, e in self.entries:
            if p > width:
                raise ValueError(f"support position {p} exceeds width {width}")
            out[p - 1] = e
        return tuple(out)

    def get(self, pos: int) -> int:
        for p, e in self.entries:
            if p == pos:
                return e
            if p > pos:
                return 0
        return 0

    def degree(self) -> int:
        return sum(e for _, e in self.entries)

    def max_position(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    def factorial_product(self) -> int:
        out = 1
        for _, e in self.entries:
            out *= factorial(e)
        return out

    def step(self, s: int, direction: int) -> Optional["MultiIndex"]:
        """Increment/decrement position s; None when a slot would go negative."""
        if s < 1:
            raise ValueError("position must be >= 1")
        cur = self.get(s)
        new = cur + direction
        if new < 0:
            return None
        items = dict(self.entries)
        if new == 0:
            items.pop(s, None)
        else:
            items[s] = new
        return MultiIndex(items.items())

    def leq(self, other: "MultiIndex") -> bool:
        """Componentwise <=."""
        mine = dict(self.entries)
        for p, e in mine.items():
            if e > other.get(p):
                return False
        return True

    def to_json(self) -> dict:
        return {"idx": [[p, e] for p, e in self.entries]}

    @staticmethod
    def from_json(obj: dict) -> "MultiIndex":
        return MultiIndex((p, e) for p, e in obj["idx"])

    def __eq__(self, other):
        return isinstance(other, MultiIndex) and self.entries == other.entries

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"MultiIndex({list(self.entries)})"


ZERO_INDEX = MultiIndex()


def partial_leq(k1: MultiIndex, k2: MultiIndex) -> bool:
    return k1.leq(k2)


def step(k: MultiIndex, s: int, direction: int) -> Optional[MultiIndex]:
    return k.step(s, direction)


# ---------------------------------------------------------------------------
# prime-factorization enumeration (unbounded support)
# ---------------------------------------------------------------------------

_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]


def _ensure_primes(count: int) -> None:
    cand = _PRIMES[-1]
    while len(_PRIMES) < count:
        cand += 2
        if all(cand % p for p in _PRIMES if p * p <= cand):
            _PRIMES.append(cand)


def nth_prime(i: int) -> int:
    _ensure_primes(i)
    return _PRIMES[i - 1]


def prime_unrank(m: int) -> MultiIndex:
    """Exponent vector of the prime factorization of m >= 1."""
    if m < 1:
        raise ValueError("rank must be >= 1")
    entries = []
    pos = 0
    rest = m
    while rest > 1:
        pos += 1
        p = nth_prime(pos)
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        if e:
            entries.append((pos, e))
        if p * p > rest and rest > 1:
            # rest is a prime; locate its position
            q = pos
            while True:
                q += 1
                if nth_prime(q) == rest:
                    entries.append((q, 1))
                    rest = 1
                    break
                if nth_prime(q) > rest:
                    raise AssertionError("prime table inconsistency")
            break
    return MultiIndex(entries)


def prime_rank(k: MultiIndex, max_bits: Optional[int] = None) -> int:
    """Inverse of prime_unrank.  max_bits, when given, caps the result width."""
    out = 1
    for p, e in k.entries:
        out *= nth_prime(p) ** e
        if max_bits is not None and out.bit_length() > max_bits:
            raise OverflowError(
                f"prime rank exceeds configured width ({max_bits} bits)")
    return out


# ---------------------------------------------------------------------------
# degree-lexicographic enumeration over a fixed dimension
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _block_start(d: int, n: int) -> int:
    """1-based rank of the first multi-index of degree d in dimension n."""
    return 1 + sum(comb(e + n - 1, n - 1) for e in range(d))


def deglex_rank(k: MultiIndex, n: int) -> int:
    """1-based rank; degree blocks, descending lex inside a block."""
    if k.max_position() > n:
        raise ValueError(f"support exceeds dimension {n}")
    dense = k.to_dense(n)
    d = sum(dense)
    rank = _block_start(d, n)
    rem = d
    for i in range(n - 1):
        e = dense[i]
        # indices with the same prefix but larger i-th exponent come first
        for larger in range(rem, e, -1):
            rank += comb((rem - larger) + (n - i - 2), n - i - 2)
        rem -= e
    return rank


def deglex_unrank(m: int, n: int) -> MultiIndex:
    if m < 1:
        raise ValueError("rank must be >= 1")
    d = 0
    while _block_start(d + 1, n) <= m:
        d += 1
    offset = m - _block_start(d, n)
    dense = []
    rem = d
    for i in range(n - 1):
        for e in range(rem, -1, -1):
            cnt = comb((rem - e) + (n - i - 2), n - i - 2)
            if offset < cnt:
                dense.append(e)
                rem -= e
                break
            offset -= cnt
    dense.append(rem)
    return MultiIndex.from_dense(dense)
