"""Correlation measures of +/-1 sequences and families.

The common object is the window sum

    V = sum_{n=1..M} e1[n+d1] * e2[n+d2] * ... * ek[n+dk]

over an admissible window: shifts d1 <= ... <= dk, window length M >= 1,
M + dk <= N.  Measures are maxima of |V|:

  * correlation_measure: one sequence, strictly increasing shifts;
  * cross_correlation_k_tuple: a fixed ordered tuple of sequences, with
    equal-content entries forced onto distinct shifts;
  * phi: maximum over all k-tuples drawn from a family (repetition allowed);
  * phi_tilde: the generator variant keyed by seeds, where a collision
    (two seeds, one image) short-circuits to the maximum possible value N.

Products of +/-1 entries are XORs of the packed bits, so every V is
M - 2*popcount(prefix of the XOR-combined shifted bit rows); the kernels
below evaluate that prefix scan vectorized over whole batches of windows.

Enumeration for phi is over canonical configurations: k-element subsets of
the (member, shift) grid.  Each admissible ordered (tuple, D) corresponds
to exactly one such subset (family members are pairwise distinct, and V
depends only on the multiset of member/shift pairs), which removes the
up-to-k! permutation redundancy of ordered tuples.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .seqcore import BinarySequence, GeneratorSample, SequenceFamily

DEFAULT_BUDGET = 10**10
_U64_MAX = 2**64 - 1
_LEVEL_CAP_BYTES = 1 << 28  # fall back to the low-memory recursion beyond this
_CHUNK_ROWS = 1 << 16


class BudgetExceededError(RuntimeError):
    """Exact enumeration would evaluate more configurations than allowed."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"exact enumeration needs {required} configurations, over the "
            f"budget of {budget}; use the randomized estimator to proceed")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class ShiftPattern:
    """Shift assignment: blocks of (sequence ref, strictly increasing shifts)
    sharing one window length m.  Refs are family indices, tuple positions,
    or generator seeds depending on the producing measure."""

    blocks: tuple[tuple[int, tuple[int, ...]], ...]
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("window length must be at least 1")
        if not self.blocks:
            raise ValueError("pattern needs at least one block")
        refs = [ref for ref, _ in self.blocks]
        if len(set(refs)) != len(refs):
            raise ValueError("block refs must be pairwise distinct")
        for ref, shifts in self.blocks:
            if not shifts:
                raise ValueError("blocks must be nonempty")
            if any(d < 0 for d in shifts):
                raise ValueError("shifts must be nonnegative")
            if any(b <= a for a, b in zip(shifts, shifts[1:])):
                raise ValueError("shifts must be strictly increasing per block")

    @property
    def order(self) -> int:
        return sum(len(shifts) for _, shifts in self.blocks)

    @property
    def max_shift(self) -> int:
        return max(max(shifts) for _, shifts in self.blocks)

    def flat(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(refs, shifts) with shifts nondecreasing, ties ordered by ref."""
        pairs = sorted((d, ref) for ref, shifts in self.blocks for d in shifts)
        return tuple(r for _, r in pairs), tuple(d for d, _ in pairs)

    def check_fits(self, length: int) -> None:
        if self.m + self.max_shift > length:
            raise ValueError("window exceeds the sequence length")


@dataclass(frozen=True)
class MeasureResult:
    value: int
    pattern: ShiftPattern
    evaluated: int
    approximate: bool = False


@dataclass(frozen=True)
class WindowCount:
    count: int
    saturated: bool


def correlation_v(sequences: Sequence[BinarySequence],
                  shifts: Sequence[int], m: int) -> int:
    """Signed window sum V for an explicit (sequences, shifts, m)."""
    if not sequences:
        raise ValueError("need at least one sequence")
    if len(sequences) != len(shifts):
        raise ValueError("one shift per sequence required")
    n = sequences[0].length
    if any(s.length != n for s in sequences):
        raise ValueError("sequences must share a common length")
    if any(d < 0 for d in shifts):
        raise ValueError("shifts must be nonnegative")
    if any(b < a for a, b in zip(shifts, shifts[1:])):
        raise ValueError("shifts must be nondecreasing")
    if m < 1:
        raise ValueError("window length must be at least 1")
    if m + shifts[-1] > n:
        raise ValueError("window exceeds the sequence length")
    z = sequences[0].bits[shifts[0]:shifts[0] + m].copy()
    for s, d in zip(sequences[1:], shifts[1:]):
        z ^= s.bits[d:d + m]
    return m - 2 * int(z.sum())


def evaluate_pattern(lookup, pattern: ShiftPattern) -> int:
    """Re-evaluate the window sum a pattern describes; lookup maps ref to
    sequence (mapping or indexable)."""
    refs, shifts = pattern.flat()
    return correlation_v([lookup[r] for r in refs], shifts, pattern.m)


def count_windows(length: int, k: int, family_size: int) -> WindowCount:
    """Number of canonical configurations phi evaluates (windows excluded)."""
    if length < 1:
        raise ValueError("length must be at least 1")
    if family_size < 1:
        raise ValueError("family_size must be at least 1")
    if k < 2 or k > length:
        raise ValueError("order k must satisfy 2 <= k <= length")
    exact = math.comb(family_size * length, k)
    if exact > _U64_MAX:
        return WindowCount(count=_U64_MAX, saturated=True)
    return WindowCount(count=exact, saturated=False)


# ---------------------------------------------------------------------------
# shared enumeration kernel over the (member, shift) grid
# ---------------------------------------------------------------------------

class _Grid:
    """Rows of shifted +/-1 values, one per (member, shift) atom.

    Atom a encodes member a // n with shift a % n; rows are padded with +1
    past their valid range, which never leaks because every window is capped
    at n - max_shift."""

    def __init__(self, members: Sequence[BinarySequence]):
        self.n = members[0].length
        self.f = len(members)
        self.p = self.f * self.n
        rows = np.ones((self.p, self.n), dtype=np.int8)
        for i, s in enumerate(members):
            vals = s.values
            base = i * self.n
            for d in range(self.n):
                rows[base + d, :self.n - d] = vals[d:]
        self.rows = rows
        self.shifts = np.tile(np.arange(self.n, dtype=np.int32), self.f)

    def pair(self, atom: int) -> tuple[int, int]:
        return atom // self.n, atom % self.n


def _scan_best(prod: np.ndarray, mmax: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per row: max |prefix sum| over windows m <= mmax, smallest m on ties."""
    c = np.cumsum(prod, axis=1, dtype=np.int32)
    np.abs(c, out=c)
    cols = np.arange(prod.shape[1], dtype=np.int32)
    c[cols[None, :] >= mmax[:, None]] = 0
    ms = np.argmax(c, axis=1)
    vals = c[np.arange(c.shape[0]), ms]
    return vals, ms.astype(np.int64) + 1


class _Level:
    __slots__ = ("prod", "atom", "parent", "mshift")

    def __init__(self, prod, atom, parent, mshift):
        self.prod = prod
        self.atom = atom
        self.parent = parent
        self.mshift = mshift


_Best = tuple[int, tuple[int, ...], tuple[int, ...], int]  # value, members, shifts, m


def _key(best: _Best) -> tuple:
    return (best[1], best[2], best[3])


def _better(a: _Best | None, b: _Best | None) -> _Best | None:
    if a is None:
        return b
    if b is None:
        return a
    if a[0] != b[0]:
        return a if a[0] > b[0] else b
    return a if _key(a) <= _key(b) else b


def _atoms_to_best(grid: _Grid, atoms: Sequence[int], value: int, m: int) -> _Best:
    pairs = sorted((a % grid.n, a // grid.n) for a in atoms)
    members = tuple(mem for _, mem in pairs)
    shifts = tuple(d for d, _ in pairs)
    return (value, members, shifts, m)


def _exact_max(grid: _Grid, k: int, threads: int = 1) -> _Best:
    """Deterministic maximum of |V| over all k-subsets of grid atoms."""
    p, n = grid.p, grid.n
    levels = [_Level(grid.rows, np.arange(p, dtype=np.int64), None, grid.shifts)]
    for t in range(2, k):
        prev = levels[-1]
        offsets = np.searchsorted(prev.atom, np.arange(p), side="left")
        total = int(offsets.sum())
        if total * n > _LEVEL_CAP_BYTES:
            return _recursive_max(grid, k)
        prod = np.empty((total, n), dtype=np.int8)
        atom = np.empty(total, dtype=np.int64)
        parent = np.empty(total, dtype=np.int64)
        mshift = np.empty(total, dtype=np.int32)
        pos = 0
        for l in range(p):
            c = int(offsets[l])
            if c == 0:
                continue
            np.multiply(prev.prod[:c], grid.rows[l], out=prod[pos:pos + c])
            atom[pos:pos + c] = l
            parent[pos:pos + c] = np.arange(c)
            np.maximum(prev.mshift[:c], grid.shifts[l], out=mshift[pos:pos + c])
            pos += c
        levels.append(_Level(prod, atom, parent, mshift))

    prev = levels[-1]
    offsets = np.searchsorted(prev.atom, np.arange(p), side="left")

    def reconstruct(row: int, last: int) -> list[int]:
        atoms = [last]
        lev = len(levels) - 1
        cur = row
        while lev >= 0:
            atoms.append(int(levels[lev].atom[cur]))
            parent = levels[lev].parent
            if parent is None:
                break
            cur = int(parent[cur])
            lev -= 1
        return atoms

    def eval_range(ls: np.ndarray) -> _Best | None:
        best: _Best | None = None
        for l in ls:
            l = int(l)
            c = int(offsets[l])
            if c == 0:
                continue
            row_l = grid.rows[l]
            shift_l = int(grid.shifts[l])
            for start in range(0, c, _CHUNK_ROWS):
                stop = min(start + _CHUNK_ROWS, c)
                prod = prev.prod[start:stop] * row_l
                mmax = n - np.maximum(prev.mshift[start:stop], shift_l)
                vals, ms = _scan_best(prod, mmax)
                top = int(vals.max())
                if best is not None and top < best[0]:
                    continue
                for i in np.flatnonzero(vals == top):
                    atoms = reconstruct(start + int(i), l)
                    cand = _atoms_to_best(grid, atoms, top, int(ms[i]))
                    best = _better(best, cand)
        return best

    if threads <= 1 or p <= 1:
        best = eval_range(np.arange(p))
    else:
        chunks = np.array_split(np.arange(p), min(p, threads * 4))
        best = None
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for piece in pool.map(eval_range, chunks):
                best = _better(best, piece)
    if best is None:
        raise ValueError("no admissible configuration")
    return best


def _recursive_max(grid: _Grid, k: int) -> _Best:
    """Low-memory path: recurse over prefixes, vectorize the last atom."""
    p, n = grid.p, grid.n
    best: _Best | None = None

    def visit_last(prefix: list[int], prod: np.ndarray, mshift: int) -> None:
        nonlocal best
        first = prefix[-1] + 1
        if first >= p:
            return
        cand = prod * grid.rows[first:]
        mmax = n - np.maximum(grid.shifts[first:], mshift)
        vals, ms = _scan_best(cand, mmax)
        top = int(vals.max())
        if best is not None and top < best[0]:
            return
        for i in np.flatnonzero(vals == top):
            atoms = prefix + [first + int(i)]
            best = _better(best, _atoms_to_best(grid, atoms, top, int(ms[i])))

    def recurse(prefix: list[int], prod: np.ndarray, mshift: int) -> None:
        depth = len(prefix)
        if depth == k - 1:
            visit_last(prefix, prod, mshift)
            return
        start = prefix[-1] + 1 if prefix else 0
        for a in range(start, p - (k - depth) + 1):
            recurse(prefix + [a], prod * grid.rows[a],
                    max(mshift, int(grid.shifts[a])))

    recurse([], np.ones(n, dtype=np.int8), 0)
    if best is None:
        raise ValueError("no admissible configuration")
    return best


def _best_to_pattern(best: _Best, ref_map=None) -> ShiftPattern:
    _, members, shifts, m = best
    by_ref: dict[int, list[int]] = {}
    for mem, d in zip(members, shifts):
        ref = ref_map[mem] if ref_map is not None else mem
        by_ref.setdefault(ref, []).append(d)
    blocks = tuple((ref, tuple(sorted(ds)))
                   for ref, ds in sorted(by_ref.items()))
    return ShiftPattern(blocks=blocks, m=m)


def _check_budget(count: int, budget: int | None) -> None:
    if budget is not None and count > budget:
        raise BudgetExceededError(required=count, budget=budget)


# ---------------------------------------------------------------------------
# public measures
# ---------------------------------------------------------------------------

def correlation_measure(sequence: BinarySequence, k: int, *,
                        threads: int = 1,
                        budget: int | None = DEFAULT_BUDGET) -> MeasureResult:
    """Max |V| over strictly increasing shift tuples of one sequence."""
    n = sequence.length
    if k < 2 or k > n:
        raise ValueError("order k must satisfy 2 <= k <= length")
    count = math.comb(n, k)
    _check_budget(count, budget)
    best = _exact_max(_Grid([sequence]), k, threads=threads)
    return MeasureResult(value=best[0], pattern=_best_to_pattern(best),
                         evaluated=count)


def cross_correlation_k_tuple(sequences: Sequence[BinarySequence], k: int, *,
                              budget: int | None = DEFAULT_BUDGET) -> MeasureResult:
    """Max |V| for a fixed ordered tuple over nondecreasing shift tuples;
    equal-content entries must take distinct shifts."""
    if k < 2:
        raise ValueError("order k must be at least 2")
    if len(sequences) != k:
        raise ValueError(f"expected {k} sequences, got {len(sequences)}")
    n = sequences[0].length
    if any(s.length != n for s in sequences):
        raise ValueError("sequences must share a common length")
    _check_budget(math.comb(n + k - 1, k), budget)

    content: dict[bytes, int] = {}
    cid = [content.setdefault(s.packed, len(content)) for s in sequences]
    same = [(i, j) for i in range(k) for j in range(i + 1, k) if cid[i] == cid[j]]
    values = [s.values for s in sequences]

    best_val = 0
    best_d: tuple[int, ...] | None = None
    best_m = 0
    evaluated = 0
    for d in itertools.combinations_with_replacement(range(n), k):
        if any(d[i] == d[j] for i, j in same):
            continue
        evaluated += 1
        span = n - d[-1]
        prod = values[0][d[0]:d[0] + span].astype(np.int8, copy=True)
        for i in range(1, k):
            prod *= values[i][d[i]:d[i] + span]
        c = np.cumsum(prod, dtype=np.int32)
        np.abs(c, out=c)
        m = int(np.argmax(c))
        v = int(c[m])
        if v > best_val:
            best_val, best_d, best_m = v, d, m + 1
    if best_d is None:
        raise ValueError("no admissible shift assignment exists")
    pattern = ShiftPattern(blocks=tuple((i, (best_d[i],)) for i in range(k)),
                           m=best_m)
    return MeasureResult(value=best_val, pattern=pattern, evaluated=evaluated)


def phi(family: SequenceFamily, k: int, *,
        threads: int = 1,
        budget: int | None = DEFAULT_BUDGET) -> MeasureResult:
    """Family measure: max |V| over all k-tuples from the family (with
    repetition) and admissible shifts."""
    if k < 2:
        raise ValueError("order k must be at least 2")
    grid = _Grid(family.members)
    count = math.comb(grid.p, k)
    if count == 0:
        raise ValueError("no admissible configuration")
    _check_budget(count, budget)
    best = _exact_max(grid, k, threads=threads)
    return MeasureResult(value=best[0], pattern=_best_to_pattern(best),
                         evaluated=count)


def phi_tilde(generator: GeneratorSample, k: int, *,
              threads: int = 1,
              budget: int | None = DEFAULT_BUDGET) -> MeasureResult:
    """Generator measure over seed blocks.  Two seeds sharing an image make
    every further search pointless: the order-2 configuration with both
    shifts 0 and m = N already attains the largest possible value N."""
    if k < 2:
        raise ValueError("order k must be at least 2")
    hit = generator.collision()
    if hit is not None:
        i, j = hit
        n = generator.length
        pattern = ShiftPattern(blocks=((generator.seeds[i], (0,)),
                                       (generator.seeds[j], (0,))), m=n)
        return MeasureResult(value=n, pattern=pattern, evaluated=1)
    family = generator.image_family()
    res = phi(family, k, threads=threads, budget=budget)
    pattern = _best_to_pattern(
        (res.value,) + res.pattern.flat() + (res.pattern.m,),
        ref_map=generator.seeds)
    return MeasureResult(value=res.value, pattern=pattern,
                         evaluated=res.evaluated)


def estimate_phi(family: SequenceFamily, k: int, trials: int,
                 rng: np.random.Generator, *, batch: int = 8192) -> MeasureResult:
    """Randomized lower bound on phi: max |V| over `trials` uniformly sampled
    canonical configurations."""
    if k < 2:
        raise ValueError("order k must be at least 2")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    grid = _Grid(family.members)
    if math.comb(grid.p, k) == 0:
        raise ValueError("no admissible configuration")
    n, p = grid.n, grid.p
    best: _Best | None = None
    need = trials
    while need > 0:
        b = min(max(need, 64), batch)
        cand = rng.integers(0, p, size=(b, k), dtype=np.int64)
        cand.sort(axis=1)
        if k > 1:
            cand = cand[np.all(np.diff(cand, axis=1) != 0, axis=1)]
        if cand.shape[0] == 0:
            continue
        cand = cand[:need]
        need -= cand.shape[0]
        prod = grid.rows[cand[:, 0]].copy()
        for j in range(1, k):
            prod *= grid.rows[cand[:, j]]
        mmax = n - grid.shifts[cand].max(axis=1)
        vals, ms = _scan_best(prod, mmax)
        top = int(vals.max())
        if best is not None and top < best[0]:
            continue
        for i in np.flatnonzero(vals == top):
            atoms = [int(a) for a in cand[i]]
            best = _better(best, _atoms_to_best(grid, atoms, top, int(ms[i])))
    assert best is not None
    return MeasureResult(value=best[0], pattern=_best_to_pattern(best),
                         evaluated=trials, approximate=True)
