"""Reduced words, cyclic reduction and conjugacy-class enumeration in free groups.

Letters are nonzero integers: ``+(i + 1)`` is the i-th generator and
``-(i + 1)`` its inverse.  Words are immutable and always freely reduced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class FreeGroup:
    rank: int
    generator_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rank < 2:
            raise WordError(f"free group rank must be >= 2, got {self.rank}")
        names = tuple(self.generator_names) or tuple("abcdefghijklmnopqrstuvwxyz"[: self.rank])
        if len(names) != self.rank:
            raise WordError(f"expected {self.rank} generator names, got {len(names)}")
        if len(set(names)) != len(names):
            raise WordError(f"generator names must be distinct: {names}")
        for name in names:
            if not name or not name.isidentifier() or name != name.lower():
                raise WordError(f"generator name {name!r} must be a lowercase identifier")
        object.__setattr__(self, "generator_names", names)

    def generators(self) -> list["Word"]:
        return [Word(self, (i + 1,)) for i in range(self.rank)]

    def identity(self) -> "Word":
        return Word(self, ())

    def word(self, letters: Iterable[int]) -> "Word":
        return reduce(self, letters)

    def parse(self, text: str) -> "Word":
        """Parse ``"a b A b"`` (uppercase = inverse).  Spaces may be omitted when
        every generator name is a single character."""
        tokens = text.split()
        if len(tokens) == 1 and all(len(n) == 1 for n in self.generator_names):
            tokens = list(tokens[0])
        lookup = {}
        for i, name in enumerate(self.generator_names):
            lookup[name] = i + 1
            lookup[name.upper()] = -(i + 1)
        letters = []
        for tok in tokens:
            if tok in ("1", "e"):
                continue
            if tok not in lookup:
                raise WordError(f"unknown generator token {tok!r} in {text!r}")
            letters.append(lookup[tok])
        return reduce(self, letters)


def _sort_key(letter: int) -> int:
    # a < A < b < B < ...
    return 2 * (abs(letter) - 1) + (letter < 0)


@dataclass(frozen=True)
class Word:
    group: FreeGroup
    letters: tuple[int, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def __invert__(self) -> "Word":
        return invert(self)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return invert(self) ** (-n)
        out = self.group.identity()
        for _ in range(n):
            out = multiply(out, self)
        return out

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        names = self.group.generator_names
        return " ".join(
            names[l - 1] if l > 0 else names[-l - 1].upper() for l in self.letters
        )

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"

    def key(self) -> tuple[int, ...]:
        """Lexicographic key used for canonical ordering."""
        return tuple(_sort_key(l) for l in self.letters)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Letters as ``(generator index, exponent)`` pairs."""
        return tuple((abs(l) - 1, 1 if l > 0 else -1) for l in self.letters)


@dataclass(frozen=True)
class ClassRep:
    word: Word
    is_primitive: bool
    root: Word
    power: int

    @property
    def length(self) -> int:
        return len(self.word)


def reduce(group: FreeGroup, letters: Iterable[int]) -> Word:
    stack: list[int] = []
    for l in letters:
        l = int(l)
        if l == 0 or abs(l) > group.rank:
            raise WordError(f"letter {l} outside the alphabet of F_{group.rank}")
        if stack and stack[-1] == -l:
            stack.pop()
        else:
            stack.append(l)
    return Word(group, tuple(stack))


def _check_same(u: Word, v: Word) -> None:
    if u.group != v.group:
        raise WordError("words belong to different groups")


def multiply(u: Word, v: Word) -> Word:
    _check_same(u, v)
    a, b = u.letters, v.letters
    i = 0
    while i < len(a) and i < len(b) and a[-1 - i] == -b[i]:
        i += 1
    return Word(u.group, a[: len(a) - i] + b[i:])


def invert(w: Word) -> Word:
    return Word(w.group, tuple(-l for l in reversed(w.letters)))


def cyclic_reduction(w: Word) -> Word:
    a = w.letters
    i, j = 0, len(a) - 1
    while i < j and a[i] == -a[j]:
        i += 1
        j -= 1
    return Word(w.group, a[i : j + 1])


def is_cyclically_reduced(w: Word) -> bool:
    return len(w) <= 1 or w.letters[0] != -w.letters[-1]


def translation_length(w: Word) -> int:
    return len(cyclic_reduction(w))


def abelianize(w: Word) -> np.ndarray:
    out = np.zeros(w.group.rank, dtype=np.int64)
    for l in w.letters:
        out[abs(l) - 1] += 1 if l > 0 else -1
    return out


def rotations(w: Word) -> list[Word]:
    a = w.letters
    return [Word(w.group, a[i:] + a[:i]) for i in range(max(len(a), 1))]


def canonical_rotation(w: Word) -> Word:
    """Lexicographically least cyclic rotation of a cyclically reduced word."""
    if not w.letters:
        return w
    return min(rotations(w), key=Word.key)


def root_and_power(w: Word) -> tuple[Word, int]:
    a = w.letters
    n = len(a)
    for p in range(1, n + 1):
        if n % p == 0 and a == a[:p] * (n // p):
            return Word(w.group, a[:p]), n // p
    return w, 1


def class_rep(w: Word) -> ClassRep:
    """Canonical representative of the conjugacy class of ``w``."""
    c = canonical_rotation(cyclic_reduction(w))
    root, power = root_and_power(c)
    return ClassRep(word=c, is_primitive=power == 1, root=root, power=power)


def _cyclic_words(rank: int, length: int) -> Iterator[tuple[int, ...]]:
    # Reduced words in lexicographic order, filtered to canonical cyclic reps.
    alphabet = sorted([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)], key=_sort_key)
    keys = {l: _sort_key(l) for l in alphabet}
    word: list[int] = []

    def is_canonical(t: tuple[int, ...]) -> bool:
        k = tuple(keys[l] for l in t)
        return all(k <= k[i:] + k[:i] for i in range(1, len(k)))

    def rec() -> Iterator[tuple[int, ...]]:
        if len(word) == length:
            if length > 1 and word[0] == -word[-1]:
                return
            t = tuple(word)
            if is_canonical(t):
                yield t
            return
        for l in alphabet:
            if word and word[-1] == -l:
                continue
            # a canonical rep cannot contain a letter smaller than its first
            if word and keys[l] < keys[word[0]]:
                continue
            word.append(l)
            yield from rec()
            word.pop()

    yield from rec()


def enumerate_classes(
    group: FreeGroup, max_length: int, *, primitive_only: bool = False
) -> Iterator[ClassRep]:
    """Yield one representative per conjugacy class of nontrivial elements with
    translation length ``1..max_length``, ordered by (length, lexicographic)."""
    if max_length < 1:
        raise WordError(f"max_length must be >= 1, got {max_length}")
    for n in range(1, max_length + 1):
        for t in _cyclic_words(group.rank, n):
            w = Word(group, t)
            root, power = root_and_power(w)
            if primitive_only and power > 1:
                continue
            yield ClassRep(word=w, is_primitive=power == 1, root=root, power=power)


def reduced_words(group: FreeGroup, length: int) -> Iterator[Word]:
    """All freely reduced words of exactly ``length`` letters."""
    alphabet = sorted(
        [i for i in range(1, group.rank + 1)] + [-i for i in range(1, group.rank + 1)],
        key=_sort_key,
    )

    def rec(prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == length:
            yield prefix
            return
        for l in alphabet:
            if prefix and prefix[-1] == -l:
                continue
            yield from rec(prefix + (l,))

    for t in rec(()):
        yield Word(group, t)


def parse_words(group: FreeGroup, texts: Sequence[str]) -> list[Word]:
    return [group.parse(t) for t in texts]
