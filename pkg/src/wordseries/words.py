"""Words over a finite alphabet and shuffle-product combinatorics."""
from __future__ import annotations

from collections import Counter
from functools import lru_cache
from itertools import product
from math import comb
from typing import Hashable, Iterable, Iterator

# A letter is an integer multi-index (tuple of ints) when it labels a Fourier
# mode; any hashable, mutually comparable ids are accepted for pure algebra.
Letter = Hashable


class Word:
    """Immutable finite sequence of letters; ``Word()`` is the empty word."""

    __slots__ = ("letters", "_hash", "_msum")

    def __init__(self, letters: Iterable[Letter] = ()):
        self.letters = tuple(letters)
        self._hash = hash(self.letters)
        self._msum = None

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.letters[i])
        return self.letters[i]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self.letters:
            return "Word()"
        return "Word(%s)" % ",".join(repr(a) for a in self.letters)

    @property
    def sort_key(self):
        """Deterministic order: by length, then lexicographic in the letters."""
        return (len(self.letters), self.letters)

    def mode_sum(self) -> tuple:
        """Componentwise sum of the letters, for integer multi-index letters.

        The empty word returns ``()``, which every consumer treats as the zero
        multi-index of the appropriate dimension.
        """
        if self._msum is None:
            if not self.letters:
                self._msum = ()
            else:
                first = self.letters[0]
                if not isinstance(first, tuple):
                    raise TypeError("mode_sum needs integer multi-index letters")
                acc = list(first)
                for a in self.letters[1:]:
                    for i, ai in enumerate(a):
                        acc[i] += ai
                self._msum = tuple(acc)
        return self._msum


EMPTY_WORD = Word()


class WordSum:
    """Multiset of same-length words with positive integer multiplicities."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        terms = dict(terms)
        lengths = {len(w) for w in terms}
        if len(lengths) > 1:
            raise ValueError("all words in a WordSum must have the same length")
        if any(m < 1 or m != int(m) for m in terms.values()):
            raise ValueError("multiplicities must be positive integers")
        self.terms = terms

    def items(self):
        return self.terms.items()

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, WordSum) and self.terms == other.terms

    def __repr__(self) -> str:
        parts = ["%d*%r" % (m, w) for w, m in sorted(self.terms.items(), key=lambda t: t[0].sort_key)]
        return "WordSum(%s)" % " + ".join(parts)

    def total_multiplicity(self) -> int:
        return sum(self.terms.values())


@lru_cache(maxsize=None)
def _shuffle_tuples(u: tuple, v: tuple) -> tuple:
    # Peel the last letter of either factor; every interleaving ends in one of
    # the two, which makes the recursion exhaustive and multiplicity-exact.
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    acc: Counter = Counter()
    for w, m in _shuffle_tuples(u[:-1], v):
        acc[w + (u[-1],)] += m
    for w, m in _shuffle_tuples(u, v[:-1]):
        acc[w + (v[-1],)] += m
    return tuple(acc.items())


def shuffle(w: Word, w2: Word) -> WordSum:
    """All order-preserving interleavings of two words, with multiplicities.

    The total multiplicity is binomial(m+n, n) for factors of lengths m, n.
    """
    return WordSum({Word(t): m for t, m in _shuffle_tuples(w.letters, w2.letters)})


def shuffle_multiplicity(m: int, n: int) -> int:
    return comb(m + n, n)


def deconcatenations(w: Word) -> list[tuple[Word, Word]]:
    """The n+1 ordered (prefix, suffix) splits of a word, ends included."""
    return [(w[:i], w[i:]) for i in range(len(w) + 1)]


def words_of_length(alphabet: Iterable[Letter], n: int) -> Iterator[Word]:
    letters = sorted(alphabet)
    for combo in product(letters, repeat=n):
        yield Word(combo)


def all_words(alphabet: Iterable[Letter], max_len: int) -> list[Word]:
    """Every word of length <= max_len, sorted by length then letters."""
    out: list[Word] = []
    for n in range(max_len + 1):
        out.extend(words_of_length(alphabet, n))
    return out
