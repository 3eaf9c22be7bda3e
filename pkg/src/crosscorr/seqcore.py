"""Binary +/-1 sequences, families of them, and seeded sampling.

A sequence over {+1, -1} is stored bit-packed with bit 1 encoding -1, so
entrywise products of sequences reduce to XOR of bit vectors and window
sums to popcounts.  Text form uses '+'/'-' (canonical) or '1'/'0' on input.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_SEED = 2**64 - 1

# feasibility guard for "size distinct sequences of length n" without big shifts
_MAX_CARDINALITY = 2**62

_PLUS_MINUS = {"+": 0, "-": 1}
_ZERO_ONE = {"1": 0, "0": 1}


@dataclass(frozen=True)
class BinarySequence:
    """Immutable +/-1 sequence; equality and hashing use the packed bits."""

    length: int
    packed: bytes

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("sequence length must be at least 1")
        if len(self.packed) != (self.length + 7) // 8:
            raise ValueError("packed payload does not match length")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BinarySequence":
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits,
                         dtype=np.uint8)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("bits must be a nonempty 1-d array")
        if np.any(arr > 1):
            raise ValueError("bits must be 0 or 1")
        packed = np.packbits(arr).tobytes()
        return cls(length=int(arr.size), packed=packed)

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "BinarySequence":
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("values must be a nonempty 1-d array")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("values must be +1 or -1")
        return cls.from_bits((arr < 0).astype(np.uint8))

    @classmethod
    def parse(cls, text: str) -> "BinarySequence":
        """Parse '+'/'-' or '1'/'0' text; '+' and '1' map to +1."""
        if not text:
            raise ValueError("empty sequence")
        first = text[0]
        if first in _PLUS_MINUS:
            table = _PLUS_MINUS
        elif first in _ZERO_ONE:
            table = _ZERO_ONE
        else:
            raise ValueError(f"invalid character {first!r} at position 1")
        bits = np.empty(len(text), dtype=np.uint8)
        for pos, ch in enumerate(text):
            bit = table.get(ch)
            if bit is None:
                # either a foreign character or the other alphabet: both rejected
                raise ValueError(f"invalid character {ch!r} at position {pos + 1}")
            bits[pos] = bit
        return cls.from_bits(bits)

    @property
    def bits(self) -> np.ndarray:
        """0/1 array, bit 1 encoding -1; cached, read-only."""
        cached = self.__dict__.get("_bits")
        if cached is None:
            cached = np.unpackbits(np.frombuffer(self.packed, dtype=np.uint8),
                                   count=self.length)
            cached.setflags(write=False)
            self.__dict__["_bits"] = cached
        return cached

    @property
    def values(self) -> np.ndarray:
        """+1/-1 int8 array; cached, read-only."""
        cached = self.__dict__.get("_values")
        if cached is None:
            cached = (1 - 2 * self.bits.astype(np.int8)).astype(np.int8)
            cached.setflags(write=False)
            self.__dict__["_values"] = cached
        return cached

    def text(self) -> str:
        return "".join("-" if b else "+" for b in self.bits)

    def negated(self) -> "BinarySequence":
        return BinarySequence.from_bits(1 - self.bits)

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        return self.text()


@dataclass(frozen=True)
class SequenceFamily:
    """Finite set of pairwise-distinct sequences of a common length."""

    members: tuple[BinarySequence, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("family must contain at least one sequence")
        n = self.members[0].length
        if any(s.length != n for s in self.members):
            raise ValueError("family members must share a common length")
        seen = set()
        for i, s in enumerate(self.members):
            if s.packed in seen:
                raise ValueError(f"duplicate member at index {i}")
            seen.add(s.packed)

    @property
    def length(self) -> int:
        return self.members[0].length

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


@dataclass(frozen=True)
class GeneratorSample:
    """Seeds together with their image sequences; collisions are allowed."""

    seeds: tuple[int, ...]
    images: tuple[BinarySequence, ...]

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("generator sample needs at least one seed")
        if len(self.seeds) != len(self.images):
            raise ValueError("seeds and images must align")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be pairwise distinct")
        n = self.images[0].length
        if any(s.length != n for s in self.images):
            raise ValueError("images must share a common length")

    @property
    def length(self) -> int:
        return self.images[0].length

    @property
    def seed_count(self) -> int:
        return len(self.seeds)

    def collision(self) -> tuple[int, int] | None:
        """First (i, j), i < j, with equal images, scanning j then i."""
        seen: dict[bytes, int] = {}
        for j, img in enumerate(self.images):
            i = seen.get(img.packed)
            if i is not None:
                return (i, j)
            seen[img.packed] = j
        return None

    def image_family(self) -> SequenceFamily:
        """The images as a family; requires the sample to be collision-free."""
        if self.collision() is not None:
            raise ValueError("images collide; no family of distinct members")
        return SequenceFamily(members=self.images)


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Deterministic counter-based stream addressed by (seed, index)."""
    if not (0 <= seed <= MAX_SEED):
        raise ValueError("seed must fit in 64 bits")
    if not (0 <= index <= MAX_SEED):
        raise ValueError("stream index must fit in 64 bits")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def random_sequence(length: int, rng: np.random.Generator) -> BinarySequence:
    if length < 1:
        raise ValueError("length must be at least 1")
    return BinarySequence.from_bits(rng.integers(0, 2, size=length, dtype=np.uint8))


def _check_cardinality(length: int, count: int, what: str) -> None:
    if count < 1:
        raise ValueError(f"{what} must be at least 1")
    if length < 63:
        if count > (1 << length):
            raise ValueError(f"{what} exceeds 2^length distinct sequences")
    elif count > _MAX_CARDINALITY:
        raise ValueError(f"{what} exceeds the supported cardinality")


def sample_family(length: int, size: int, rng: np.random.Generator) -> SequenceFamily:
    """Uniform family of `size` distinct sequences via duplicate rejection."""
    if length < 1:
        raise ValueError("length must be at least 1")
    _check_cardinality(length, size, "size")
    members: list[BinarySequence] = []
    seen: set[bytes] = set()
    while len(members) < size:
        cand = random_sequence(length, rng)
        if cand.packed in seen:
            continue
        seen.add(cand.packed)
        members.append(cand)
    return SequenceFamily(members=tuple(members))


def sample_generator(length: int, seed_count: int,
                     rng: np.random.Generator) -> GeneratorSample:
    """seed_count iid uniform images; collisions are kept, not rejected."""
    if length < 1:
        raise ValueError("length must be at least 1")
    if seed_count < 1:
        raise ValueError("seed_count must be at least 1")
    images = tuple(random_sequence(length, rng) for _ in range(seed_count))
    return GeneratorSample(seeds=tuple(range(seed_count)), images=images)


def read_sequences(path: str | os.PathLike) -> list[BinarySequence]:
    """Read one sequence per line; blank lines and '#' comments are skipped."""
    out: list[BinarySequence] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            try:
                out.append(BinarySequence.parse(line))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out


def write_sequences(path: str | os.PathLike,
                    sequences: Sequence[BinarySequence]) -> None:
    """Write canonical '+'/'-' lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in sequences:
            fh.write(s.text())
            fh.write("\n")
