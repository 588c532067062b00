"""Evaluate products of generator powers over many normal-form words at once.

A word is a tuple of exponents (e_1, ..., e_k); with matrices M_1..M_k it
stands for M_1^{e_1} M_2^{e_2} ... M_k^{e_k}. Negative exponents use the
inverse matrix.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Sequence

import numpy as np


class PowerTable:
    """Lazily computed powers of a fixed list of square matrices."""

    def __init__(self, mats: Sequence[np.ndarray]):
        self.mats = [np.asarray(m, dtype=complex) for m in mats]
        self._inv: dict[int, np.ndarray] = {}
        self._pow: dict[tuple[int, int], np.ndarray] = {}

    def inv(self, i: int) -> np.ndarray:
        if i not in self._inv:
            m = self.mats[i]
            if np.linalg.cond(m) > 1e12:
                raise ValueError("negative exponent on a non-invertible generator")
            self._inv[i] = np.linalg.inv(m)
        return self._inv[i]

    def step(self, i: int, e: int) -> np.ndarray:
        return self.mats[i] if e >= 0 else self.inv(i)

    def power(self, i: int, e: int) -> np.ndarray:
        key = (i, e)
        if key not in self._pow:
            base = self.mats[i] if e >= 0 else self.inv(i)
            self._pow[key] = np.linalg.matrix_power(base, abs(e))
        return self._pow[key]

    def word(self, order: Sequence[int], exps: Sequence[int]) -> np.ndarray:
        n = self.mats[0].shape[0]
        out = np.eye(n, dtype=complex)
        for i, e in zip(order, exps):
            if e:
                out = out @ self.power(i, e)
        return out


def apply_words(
    table: PowerTable, order: Sequence[int], words: Sequence[tuple[int, ...]], y: np.ndarray
) -> np.ndarray:
    """Rows W_w y for every word w, in input order.

    Works innermost factor first; at each level the distinct child vectors
    are stacked and advanced one power at a time, so the cost is about
    (exponent range) matrix products per level.
    """
    y = np.asarray(y, dtype=complex)
    k = len(order)
    words = [tuple(w) for w in words]
    if k == 0 or not words:
        return np.tile(y, (len(words), 1))
    # vectors for distinct suffixes, starting from the empty suffix
    current: dict[tuple[int, ...], np.ndarray] = {(): y}
    for level in range(k - 1, -1, -1):
        suffixes = sorted({w[level:] for w in words})
        children = sorted({s[1:] for s in suffixes})
        col = {c: j for j, c in enumerate(children)}
        block = np.stack([current[c] for c in children], axis=1)
        by_exp: dict[int, list[tuple[int, ...]]] = defaultdict(list)
        for s in suffixes:
            by_exp[s[0]].append(s)
        exps = sorted(by_exp)
        i = order[level]
        lo, hi = exps[0], exps[-1]
        nxt: dict[tuple[int, ...], np.ndarray] = {}
        # start at the smallest exponent, then walk upward one power at a time
        acc = block if lo == 0 else table.power(i, lo) @ block
        e = lo
        m = table.mats[i]
        while True:
            for s in by_exp.get(e, ()):
                nxt[s] = acc[:, col[s[1:]]]
            if e == hi:
                break
            acc = m @ acc
            e += 1
        current = nxt
    return np.stack([current[w] for w in words], axis=0)


def sum_words(
    table: PowerTable, order: Sequence[int], words, x: np.ndarray
) -> np.ndarray:
    """Σ_w W_w x over a finite set of words; ``x`` may be a vector or a matrix.

    Uses Horner's rule per level and memoizes identical sub-sums, which makes
    product-shaped sets (boxes) cost only a few products per level.
    """
    x = np.asarray(x, dtype=complex)
    k = len(order)
    words = frozenset(tuple(w) for w in words)
    if not words:
        return np.zeros_like(x)
    memo: dict[tuple[int, frozenset], np.ndarray] = {}

    def level_sum(level: int, suffixes: frozenset) -> np.ndarray:
        if level == k:
            return x
        key = (level, suffixes)
        if key in memo:
            return memo[key]
        groups: dict[int, set] = defaultdict(set)
        for s in suffixes:
            groups[s[0]].add(s[1:])
        i = order[level]
        m = table.mats[i]
        exps = sorted(groups)
        lo, hi = exps[0], exps[-1]
        acc = None
        for e in range(hi, lo - 1, -1):
            if acc is not None:
                acc = m @ acc
            if e in groups:
                part = level_sum(level + 1, frozenset(groups[e]))
                acc = part.copy() if acc is None else acc + part
        if lo != 0:
            acc = table.power(i, lo) @ acc
        memo[key] = acc
        return acc

    return level_sum(0, words)
