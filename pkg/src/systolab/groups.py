"""Finitely generated groups with canonical normal forms.

Every group class here fixes a canonical normal form for its elements, so two
elements are equal iff their normal-form keys are identical.  That turns the
word problem into a key comparison and lets ball enumerations and covering
expansions deduplicate states exactly.

Supported classes: the trivial group, free groups, free abelian groups,
finite groups given by a multiplication table, and free products of these.
Arbitrary finite presentations are rejected by design.
"""
from __future__ import annotations

import re
from typing import Hashable, Iterator, Sequence

import numpy as np

from .errors import GroupMismatch, ParseError, ValidationError

# 'e' is the identity literal, 't' and 'x' prefix table-element / overflow labels
_LETTERS = "abcdfghijklmnopqrsuvwyz"
_MAX_TABLE = 256
_TOKEN_RE = re.compile(r"^([A-Za-z][A-Za-z0-9]*)(?:\^(-?\d+))?$")


def _fresh_labels(count: int) -> tuple[str, ...]:
    return tuple(_LETTERS[i] if i < len(_LETTERS) else f"x{i}" for i in range(count))


class GroupElement:
    """Immutable group element, identified by its normal-form key."""

    __slots__ = ("group", "key")

    def __init__(self, group: "Group", key: Hashable):
        self.group = group
        self.key = key

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and self.group == other.group
            and self.key == other.key
        )

    def __hash__(self):
        return hash((self.group, self.key))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.multiply(self, other)

    def __invert__(self) -> "GroupElement":
        return self.group.inverse(self)

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return (~self) ** (-n)
        result = self.group.identity()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def is_identity(self) -> bool:
        return self.key == self.group.identity_key()

    def __str__(self):
        return self.group.element_literal(self)

    def __repr__(self):
        return f"<{self.group.describe()} | {self}>"


class Group:
    """Abstract base.  Subclasses implement key-level normal-form arithmetic."""

    generator_labels: tuple[str, ...] = ()

    # -- key-level arithmetic -------------------------------------------
    def identity_key(self) -> Hashable:
        raise NotImplementedError

    def mul_key(self, a, b):
        raise NotImplementedError

    def inv_key(self, a):
        raise NotImplementedError

    def validate_key(self, a) -> None:
        raise NotImplementedError

    def _spec(self) -> tuple:
        raise NotImplementedError

    # -- element-level wrappers ------------------------------------------
    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_key())

    def element(self, key) -> GroupElement:
        self.validate_key(key)
        return GroupElement(self, key)

    def multiply(self, g: GroupElement, h: GroupElement) -> GroupElement:
        self._check(g)
        self._check(h)
        return GroupElement(self, self.mul_key(g.key, h.key))

    def inverse(self, g: GroupElement) -> GroupElement:
        self._check(g)
        return GroupElement(self, self.inv_key(g.key))

    def _check(self, g) -> None:
        if not isinstance(g, GroupElement) or g.group != self:
            raise GroupMismatch(
                f"element does not belong to {self.describe()!r}"
            )

    def __eq__(self, other):
        return type(other) is type(self) and other._spec() == self._spec()

    def __hash__(self):
        return hash((type(self).__name__, self._spec()))

    def __repr__(self):
        return f"<group {self.describe()}>"

    # -- structure ---------------------------------------------------------
    def generators(self) -> tuple[GroupElement, ...]:
        raise NotImplementedError

    def order(self) -> int | None:
        """Number of elements, or None when infinite."""
        raise NotImplementedError

    def describe(self) -> str:
        """Specification string; round-trips through parse_group."""
        raise NotImplementedError

    def random_key(self, rng, size: int):
        raise NotImplementedError

    def random_element(self, rng, size: int = 4) -> GroupElement:
        return GroupElement(self, self.random_key(rng, size))

    # -- abelianized image (H = H1/Torsion) ---------------------------------
    def abelianized_rank(self) -> int:
        raise NotImplementedError

    def abelianized_image_key(self, key) -> tuple[int, ...]:
        raise NotImplementedError

    def abelianized_image(self, g: GroupElement) -> tuple[int, ...]:
        self._check(g)
        return self.abelianized_image_key(g.key)

    # -- literals ------------------------------------------------------------
    def _word_of_key(self, key) -> list[tuple[int, int]]:
        """Decompose a key into (generator index, exponent) pairs."""
        raise NotImplementedError

    def element_literal(self, g: GroupElement) -> str:
        word = self._word_of_key(g.key)
        if not word:
            return "1"
        parts = []
        for gen_idx, exp in word:
            label = self.generator_labels[gen_idx]
            parts.append(label if exp == 1 else f"{label}^{exp}")
        return "*".join(parts)

    def element_from_literal(self, text: str) -> GroupElement:
        tokens = [t for t in re.split(r"[\s*]+", text.strip()) if t]
        label_map = {lab: i for i, lab in enumerate(self.generator_labels)}
        gens = self.generators()
        out = self.identity()
        for tok in tokens:
            if tok in ("1", "e"):
                continue
            m = _TOKEN_RE.match(tok)
            if not m:
                raise ParseError(f"bad element token {tok!r}")
            label, exp = m.group(1), int(m.group(2) or 1)
            if label not in label_map:
                raise ParseError(
                    f"unknown generator {label!r} for group {self.describe()!r}"
                )
            out = out * (gens[label_map[label]] ** exp)
        return out


class TrivialGroup(Group):
    """The one-element group."""

    generator_labels = ()

    def _spec(self):
        return ()

    def identity_key(self):
        return ()

    def mul_key(self, a, b):
        return ()

    def inv_key(self, a):
        return ()

    def validate_key(self, a):
        if a != ():
            raise ValidationError("trivial group has only the empty key")

    def generators(self):
        return ()

    def order(self):
        return 1

    def describe(self):
        return "trivial"

    def random_key(self, rng, size):
        return ()

    def abelianized_rank(self):
        return 0

    def abelianized_image_key(self, key):
        return ()

    def _word_of_key(self, key):
        return []


class FreeGroup(Group):
    """Free group of finite rank; elements are reduced words.

    A key is a tuple of nonzero signed generator indices (1-based), with no
    adjacent ``x, -x`` pair.
    """

    def __init__(self, rank: int):
        if rank < 0:
            raise ValidationError("rank must be nonnegative")
        self.rank = int(rank)
        self.generator_labels = _fresh_labels(self.rank)

    def _spec(self):
        return (self.rank,)

    def identity_key(self):
        return ()

    def mul_key(self, a, b):
        i, j = len(a), 0
        while i > 0 and j < len(b) and a[i - 1] == -b[j]:
            i -= 1
            j += 1
        return a[:i] + b[j:]

    def inv_key(self, a):
        return tuple(-x for x in reversed(a))

    def validate_key(self, a):
        if not isinstance(a, tuple):
            raise ValidationError("free-group key must be a tuple")
        for i, x in enumerate(a):
            if not isinstance(x, int) or x == 0 or abs(x) > self.rank:
                raise ValidationError(f"letter {x!r} out of range")
            if i and a[i - 1] == -x:
                raise ValidationError("word is not reduced")

    def generators(self):
        return tuple(GroupElement(self, (i + 1,)) for i in range(self.rank))

    def order(self):
        return 1 if self.rank == 0 else None

    def describe(self):
        return f"free {self.rank}"

    def random_key(self, rng, size):
        length = rng.randint(0, max(size, 0))
        word: list[int] = []
        for _ in range(length):
            choices = [s * (i + 1) for i in range(self.rank) for s in (1, -1)]
            if word:
                choices = [c for c in choices if c != -word[-1]]
            if not choices:
                break
            word.append(rng.choice(choices))
        return tuple(word)

    def abelianized_rank(self):
        return self.rank

    def abelianized_image_key(self, key):
        vec = [0] * self.rank
        for x in key:
            vec[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(vec)

    def _word_of_key(self, key):
        word = []
        for x in key:
            gen_idx = abs(x) - 1
            exp = 1 if x > 0 else -1
            if word and word[-1][0] == gen_idx:
                word[-1] = (gen_idx, word[-1][1] + exp)
            else:
                word.append((gen_idx, exp))
        return [(g, e) for g, e in word if e != 0]


class FreeAbelianGroup(Group):
    """Z^n; a key is a tuple of n integer exponents."""

    def __init__(self, rank: int):
        if rank < 0:
            raise ValidationError("rank must be nonnegative")
        self.rank = int(rank)
        self.generator_labels = _fresh_labels(self.rank)

    def _spec(self):
        return (self.rank,)

    def identity_key(self):
        return (0,) * self.rank

    def mul_key(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv_key(self, a):
        return tuple(-x for x in a)

    def validate_key(self, a):
        if not isinstance(a, tuple) or len(a) != self.rank:
            raise ValidationError(f"key must be a tuple of length {self.rank}")
        if not all(isinstance(x, int) for x in a):
            raise ValidationError("exponents must be integers")

    def generators(self):
        out = []
        for i in range(self.rank):
            key = tuple(1 if j == i else 0 for j in range(self.rank))
            out.append(GroupElement(self, key))
        return tuple(out)

    def order(self):
        return 1 if self.rank == 0 else None

    def describe(self):
        return f"abelian {self.rank}"

    def random_key(self, rng, size):
        return tuple(rng.randint(-size, size) for _ in range(self.rank))

    def abelianized_rank(self):
        return self.rank

    def abelianized_image_key(self, key):
        return tuple(key)

    def _word_of_key(self, key):
        return [(i, e) for i, e in enumerate(key) if e != 0]


class FiniteTableGroup(Group):
    """Finite group given by a row-major multiplication table.

    Associativity, identity, and inverses are all verified at construction;
    the table size is capped so the O(k^3) check stays trivial.
    """

    def __init__(self, table: Sequence[Sequence[int]], identity_index: int):
        t = np.asarray(table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValidationError("multiplication table must be square")
        k = int(t.shape[0])
        if k == 0 or k > _MAX_TABLE:
            raise ValidationError(f"table size must be in 1..{_MAX_TABLE}")
        if t.min() < 0 or t.max() >= k:
            raise ValidationError("table entries out of range")
        e = int(identity_index)
        if not 0 <= e < k:
            raise ValidationError("identity index out of range")
        rng_k = np.arange(k)
        if not (np.array_equal(t[e], rng_k) and np.array_equal(t[:, e], rng_k)):
            raise ValidationError("declared identity is not an identity")
        inv = np.full(k, -1, dtype=np.int64)
        for a in range(k):
            hits = np.flatnonzero(t[a] == e)
            if hits.size == 0 or int(t[int(hits[0]), a]) != e:
                raise ValidationError(f"element {a} has no two-sided inverse")
            inv[a] = int(hits[0])
        for a in range(k):
            # t[t[a,b],c] == t[a,t[b,c]] for all b,c
            if not np.array_equal(t[t[a], :], t[a, t]):
                raise ValidationError("multiplication table is not associative")
        self.size = k
        self.identity_index = e
        self.table = tuple(tuple(int(x) for x in row) for row in t)
        self._np_table = t
        self._inv = tuple(int(x) for x in inv)
        self._gen_indices = tuple(j for j in range(k) if j != e)
        self.generator_labels = tuple(f"t{j}" for j in self._gen_indices)

    def _spec(self):
        return (self.table, self.identity_index)

    def identity_key(self):
        return self.identity_index

    def mul_key(self, a, b):
        return self.table[a][b]

    def inv_key(self, a):
        return self._inv[a]

    def validate_key(self, a):
        if not isinstance(a, int) or not 0 <= a < self.size:
            raise ValidationError(f"element index {a!r} out of range")

    def generators(self):
        return tuple(GroupElement(self, j) for j in self._gen_indices)

    def order(self):
        return self.size

    def describe(self):
        flat = " ".join(str(x) for row in self.table for x in row)
        return f"finite {self.size} {flat} {self.identity_index}"

    def random_key(self, rng, size):
        return rng.randrange(self.size)

    def abelianized_rank(self):
        return 0  # finite groups have torsion homology only

    def abelianized_image_key(self, key):
        return ()

    def _word_of_key(self, key):
        if key == self.identity_index:
            return []
        return [(self._gen_indices.index(key), 1)]


class FreeProductGroup(Group):
    """Free product of the factor groups.

    A key is an alternating tuple of ``(factor_index, factor_key)`` letters:
    every letter is nontrivial in its factor and adjacent letters come from
    distinct factors.
    """

    def __init__(self, factors: Sequence[Group]):
        if not factors:
            raise ValidationError("free product needs at least one factor")
        self.factors = tuple(factors)
        self._gen_index: list[tuple[int, int]] = []
        for fi, fac in enumerate(self.factors):
            for gi in range(len(fac.generators())):
                self._gen_index.append((fi, gi))
        self.generator_labels = _fresh_labels(len(self._gen_index))
        self._offsets = []
        off = 0
        for fac in self.factors:
            self._offsets.append(off)
            off += len(fac.generators())

    def _spec(self):
        return tuple((type(f).__name__, f._spec()) for f in self.factors)

    def identity_key(self):
        return ()

    def _push(self, word: list, fi: int, sub) -> None:
        fac = self.factors[fi]
        if word and word[-1][0] == fi:
            merged = fac.mul_key(word[-1][1], sub)
            if merged == fac.identity_key():
                word.pop()
            else:
                word[-1] = (fi, merged)
        else:
            word.append((fi, sub))

    def mul_key(self, a, b):
        word = list(a)
        for fi, sub in b:
            self._push(word, fi, sub)
        return tuple(word)

    def inv_key(self, a):
        return tuple(
            (fi, self.factors[fi].inv_key(sub)) for fi, sub in reversed(a)
        )

    def validate_key(self, a):
        if not isinstance(a, tuple):
            raise ValidationError("free-product key must be a tuple")
        prev = None
        for letter in a:
            if not (isinstance(letter, tuple) and len(letter) == 2):
                raise ValidationError("letters must be (factor, key) pairs")
            fi, sub = letter
            if not 0 <= fi < len(self.factors):
                raise ValidationError(f"factor index {fi} out of range")
            if fi == prev:
                raise ValidationError("adjacent letters share a factor")
            fac = self.factors[fi]
            fac.validate_key(sub)
            if sub == fac.identity_key():
                raise ValidationError("letters must be nontrivial")
            prev = fi

    def embed_key(self, factor_index: int, sub):
        fac = self.factors[factor_index]
        if sub == fac.identity_key():
            return ()
        return ((factor_index, sub),)

    def embed(self, factor_index: int, g: GroupElement) -> GroupElement:
        self.factors[factor_index]._check(g)
        return GroupElement(self, self.embed_key(factor_index, g.key))

    def generators(self):
        out = []
        for fi, gi in self._gen_index:
            sub = self.factors[fi].generators()[gi]
            out.append(self.embed(fi, sub))
        return tuple(out)

    def order(self):
        nontrivial = [f.order() for f in self.factors if f.order() != 1]
        if not nontrivial:
            return 1
        if len(nontrivial) == 1:
            return nontrivial[0]
        return None  # a free product of >= 2 nontrivial groups is infinite

    def describe(self):
        inner = " ; ".join(f.describe() for f in self.factors)
        return f"product {{ {inner} }}"

    def random_key(self, rng, size):
        usable = [i for i, f in enumerate(self.factors) if f.order() != 1]
        if not usable:
            return ()
        length = rng.randint(0, max(size, 0))
        word: list[tuple[int, Hashable]] = []
        prev = None
        for _ in range(length):
            options = [i for i in usable if i != prev]
            if not options:
                break
            fi = rng.choice(options)
            fac = self.factors[fi]
            sub = fac.random_key(rng, size)
            while sub == fac.identity_key():
                sub = fac.random_key(rng, max(size, 1))
            word.append((fi, sub))
            prev = fi
        return tuple(word)

    def abelianized_rank(self):
        return sum(f.abelianized_rank() for f in self.factors)

    def abelianized_image_key(self, key):
        parts = [[0] * f.abelianized_rank() for f in self.factors]
        for fi, sub in key:
            img = self.factors[fi].abelianized_image_key(sub)
            for i, x in enumerate(img):
                parts[fi][i] += x
        out: list[int] = []
        for p in parts:
            out.extend(p)
        return tuple(out)

    def _word_of_key(self, key):
        word = []
        for fi, sub in key:
            off = self._offsets[fi]
            for gi, exp in self.factors[fi]._word_of_key(sub):
                word.append((off + gi, exp))
        return word


# ---------------------------------------------------------------------------
# specification text format


def _tokenize_spec(text: str) -> list[str]:
    for ch in "{};":
        text = text.replace(ch, f" {ch} ")
    return text.split()


def _parse_group_tokens(tokens: list[str], pos: int) -> tuple[Group, int]:
    if pos >= len(tokens):
        raise ParseError("unexpected end of group specification")
    head = tokens[pos]
    if head == "trivial":
        return TrivialGroup(), pos + 1
    if head in ("free", "abelian"):
        if pos + 1 >= len(tokens):
            raise ParseError(f"{head!r} needs a rank")
        try:
            rank = int(tokens[pos + 1])
        except ValueError:
            raise ParseError(f"bad rank {tokens[pos + 1]!r}") from None
        cls = FreeGroup if head == "free" else FreeAbelianGroup
        return cls(rank), pos + 2
    if head == "finite":
        try:
            k = int(tokens[pos + 1])
            need = k * k + 1
            nums = [int(x) for x in tokens[pos + 2 : pos + 2 + need]]
        except (ValueError, IndexError):
            raise ParseError("bad finite-table specification") from None
        if len(nums) != need:
            raise ParseError("finite table is truncated")
        table = [nums[i * k : (i + 1) * k] for i in range(k)]
        return FiniteTableGroup(table, nums[-1]), pos + 2 + need
    if head == "product":
        if pos + 1 >= len(tokens) or tokens[pos + 1] != "{":
            raise ParseError("product requires a brace-delimited factor list")
        pos += 2
        factors = []
        while True:
            fac, pos = _parse_group_tokens(tokens, pos)
            factors.append(fac)
            if pos >= len(tokens):
                raise ParseError("unterminated product specification")
            if tokens[pos] == ";":
                pos += 1
                continue
            if tokens[pos] == "}":
                return FreeProductGroup(factors), pos + 1
            raise ParseError(f"expected ';' or '}}', got {tokens[pos]!r}")
    raise ParseError(f"unknown group kind {head!r}")


def parse_group(text: str) -> Group:
    """Parse a group specification string, e.g. ``product { free 1 ; free 1 }``."""
    tokens = _tokenize_spec(text)
    group, pos = _parse_group_tokens(tokens, 0)
    if pos != len(tokens):
        raise ParseError(f"trailing tokens in group specification: {tokens[pos:]}")
    return group


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    """Product gh in canonical normal form; operands must share a group."""
    if not isinstance(g, GroupElement) or not isinstance(h, GroupElement):
        raise GroupMismatch("multiply expects two group elements")
    if g.group != h.group:
        raise GroupMismatch(
            f"cannot multiply across groups {g.group.describe()!r} and "
            f"{h.group.describe()!r}"
        )
    return g.group.multiply(g, h)
