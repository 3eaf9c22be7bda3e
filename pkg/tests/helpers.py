"""Brute-force oracles for the optimized kernels.

Everything here works on plain Python lists of +1/-1 integers, enumerates
the ordered-tuple definitions directly, and never touches numpy, the
bit-packed representation, or the canonical-subset rewrite being tested.
"""
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from math import comb


def naive_v(rows, shifts, m):
    total = 0
    for n in range(m):
        prod = 1
        for row, d in zip(rows, shifts):
            prod *= row[n + d]
        total += prod
    return total


def max_abs_v(rows, shifts):
    """(max |V|, smallest maximizing window) over m = 1..n - max(shifts)."""
    n = len(rows[0])
    best, best_m, total = 0, 0, 0
    for idx in range(n - max(shifts)):
        prod = 1
        for row, d in zip(rows, shifts):
            prod *= row[idx + d]
        total += prod
        if abs(total) > best:
            best, best_m = abs(total), idx + 1
    return best, best_m


def naive_ck(values, k):
    """Single-sequence measure: strictly increasing shift tuples."""
    best = 0
    for shifts in combinations(range(len(values)), k):
        v, _ = max_abs_v([values] * k, shifts)
        best = max(best, v)
    return best


def naive_ctilde(rows):
    """Fixed ordered tuple: nondecreasing shifts; entries with equal content
    must take distinct shifts.  None when no admissible shifts exist."""
    k = len(rows)
    same = [(i, j) for i in range(k) for j in range(i + 1, k)
            if rows[i] == rows[j]]
    best = None
    for shifts in combinations_with_replacement(range(len(rows[0])), k):
        if any(shifts[i] == shifts[j] for i, j in same):
            continue
        v, _ = max_abs_v(rows, shifts)
        best = v if best is None else max(best, v)
    return best


def naive_phi(rows, k):
    """Family measure straight from the ordered-tuple definition."""
    best = None
    for picks in product(range(len(rows)), repeat=k):
        v = naive_ctilde([rows[i] for i in picks])
        if v is not None:
            best = v if best is None else max(best, v)
    return best


def canonical_config_count(n, k, f):
    """Distinct canonical forms of the admissible ordered configurations:
    each (tuple, D) is reduced to its set of (member, shift) pairs."""
    seen = set()
    for picks in product(range(f), repeat=k):
        for shifts in combinations_with_replacement(range(n), k):
            if any(picks[a] == picks[b] and shifts[a] == shifts[b]
                   for a in range(k) for b in range(a + 1, k)):
                continue
            seen.add(frozenset(zip(picks, shifts)))
    return len(seen)


def rational_upper_tail(n, t):
    """P(Binomial(n, 1/2) >= t) as an exact Fraction."""
    if t < 0:
        return Fraction(1)
    if t > n:
        return Fraction(0)
    return Fraction(sum(comb(n, j) for j in range(t, n + 1)), 2**n)


def rational_lower_tail(n, t):
    """P(Binomial(n, 1/2) <= t) as an exact Fraction."""
    if t < 0:
        return Fraction(0)
    if t > n:
        return Fraction(1)
    return Fraction(sum(comb(n, j) for j in range(0, t + 1)), 2**n)


def signed_tail_small(n, a):
    """P(sum of n iid +/-1 > a), by enumerating all 2^n sign vectors."""
    assert n <= 16, "enumeration oracle is for small n"
    hits = 0
    for code in range(1 << n):
        if 2 * bin(code).count("1") - n > a:
            hits += 1
    return Fraction(hits, 2**n)
