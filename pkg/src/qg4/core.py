"""Symbols, permutations, isotopies and value tables of quasigroups of order 4.

Everything operates on the fixed symbol set {0, 1, 2, 3}.  A quasigroup of
arity n is stored as a read-only numpy table of shape (4,)*n with the first
argument on the most significant axis, so the flat index of (x_1, ..., x_n)
is sum(x_j * 4**(n-j)).  Printed digit strings follow the same convention.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

import numpy as np

ORDER = 4
SYMBOLS = (0, 1, 2, 3)
MAX_ARITY = 12  # 4**12 table entries (~16 MiB); far above the search range


class FormatError(ValueError):
    """Malformed qg4 file or tree document."""


class LatinError(ValueError):
    """A value table violates the Latin (section-bijectivity) property."""


class ArityError(ValueError):
    """Arity mismatch between operands."""


class CapError(RuntimeError):
    """A search refused to run above its configured arity cap."""


# ---------------------------------------------------------------------------
# Permutations of {0,1,2,3}
# ---------------------------------------------------------------------------

class Perm:
    """A permutation of {0,1,2,3}, interned: the 24 instances are singletons.

    `images[x]` is the image of x.  Composition follows (p * q)(x) = p(q(x)).
    """

    __slots__ = ("images", "index", "arr")

    _registry: dict[tuple[int, int, int, int], "Perm"] = {}

    def __new__(cls, images: Iterable[int]) -> "Perm":
        key = tuple(int(x) for x in images)
        cached = cls._registry.get(key)
        if cached is not None:
            return cached
        if sorted(key) != list(SYMBOLS):
            raise ValueError(f"not a permutation of 0..3: {key!r}")
        self = super().__new__(cls)
        self.images = key
        self.index = -1  # assigned once, below, in lexicographic order
        self.arr = np.array(key, dtype=np.uint8)
        self.arr.setflags(write=False)
        cls._registry[key] = self
        return self

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Perm") -> "Perm":
        return PERMS[_MUL[self.index][other.index]]

    def inverse(self) -> "Perm":
        return PERMS[_INV[self.index]]

    def order(self) -> int:
        return _ORDERS[self.index]

    @property
    def is_identity(self) -> bool:
        return self.index == 0

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Nontrivial cycles, each starting at its smallest element."""
        seen: set[int] = set()
        out = []
        for start in SYMBOLS:
            if start in seen or self.images[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            x = self.images[start]
            while x != start:
                cyc.append(x)
                seen.add(x)
                x = self.images[x]
            out.append(tuple(cyc))
        return tuple(out)

    @classmethod
    def from_cycles(cls, *cycles: Sequence[int]) -> "Perm":
        images = list(SYMBOLS)
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:]):
                images[a] = b
            images[cyc[-1]] = cyc[0]
        return cls(images)

    def __repr__(self) -> str:
        cycs = self.cycles()
        if not cycs:
            return "id"
        return "".join("(" + "".join(str(x) for x in c) + ")" for c in cycs)

    def __hash__(self) -> int:
        return self.index

    def __eq__(self, other: object) -> bool:
        return self is other

    def __lt__(self, other: "Perm") -> bool:
        return self.images < other.images


PERMS: tuple[Perm, ...] = tuple(Perm(p) for p in itertools.permutations(SYMBOLS))
for _i, _p in enumerate(PERMS):
    _p.index = _i
IDENTITY = PERMS[0]

_MUL = tuple(
    tuple(PERMS.index(Perm(tuple(p.images[q.images[x]] for x in SYMBOLS))) for q in PERMS)
    for p in PERMS
)
_INV = tuple(_MUL[i].index(0) for i in range(len(PERMS)))


def _perm_order(i: int) -> int:
    k, j = 1, i
    while j != 0:
        j = _MUL[j][i]
        k += 1
    return k


_ORDERS = tuple(_perm_order(i) for i in range(len(PERMS)))

# PERMS_FIXING[v][w] lists the six permutations mapping v to w, in lex order.
PERMS_FIXING: tuple[tuple[tuple[Perm, ...], ...], ...] = tuple(
    tuple(tuple(p for p in PERMS if p.images[v] == w) for w in SYMBOLS) for v in SYMBOLS
)


# ---------------------------------------------------------------------------
# Isotopies
# ---------------------------------------------------------------------------

class Isotopy:
    """A tuple (theta_0, ..., theta_n) of permutations; slot 0 acts on values."""

    __slots__ = ("parts", "_hash")

    def __init__(self, parts: Iterable[Perm]):
        self.parts = tuple(parts)
        if len(self.parts) < 2:
            raise ArityError("an isotopy needs at least two permutations")
        self._hash = hash(tuple(p.index for p in self.parts))

    @property
    def arity(self) -> int:
        return len(self.parts) - 1

    @classmethod
    def identity(cls, arity: int) -> "Isotopy":
        return cls((IDENTITY,) * (arity + 1))

    @classmethod
    def uniform(cls, perm: Perm, arity: int) -> "Isotopy":
        return cls((perm,) * (arity + 1))

    def __mul__(self, other: "Isotopy") -> "Isotopy":
        if len(self.parts) != len(other.parts):
            raise ArityError("isotopy arity mismatch")
        return Isotopy(a * b for a, b in zip(self.parts, other.parts))

    def inverse(self) -> "Isotopy":
        return Isotopy(p.inverse() for p in self.parts)

    @property
    def is_identity(self) -> bool:
        return all(p.is_identity for p in self.parts)

    def apply(self, tup: Sequence[int]) -> tuple[int, ...]:
        """Coordinate-wise action on a point of Sigma^(n+1)."""
        if len(tup) != len(self.parts):
            raise ArityError("tuple length does not match isotopy")
        return tuple(p.images[x] for p, x in zip(self.parts, tup))

    def __getitem__(self, i: int) -> Perm:
        return self.parts[i]

    def __iter__(self) -> Iterator[Perm]:
        return iter(self.parts)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Isotopy) and self.parts == other.parts

    def __lt__(self, other: "Isotopy") -> bool:
        return self.key() < other.key()

    def key(self) -> tuple[tuple[int, ...], ...]:
        """Lexicographic sort key (tuple of image tuples)."""
        return tuple(p.images for p in self.parts)

    def __repr__(self) -> str:
        return "(" + ", ".join(repr(p) for p in self.parts) + ")"


# ---------------------------------------------------------------------------
# Quasigroups
# ---------------------------------------------------------------------------

def _latin_violation(table: np.ndarray) -> int | None:
    """Return a violating axis (0-based) if some section is not a bijection."""
    n = table.ndim
    want = np.arange(ORDER, dtype=np.uint8)
    for axis in range(n):
        rows = np.moveaxis(table, axis, -1).reshape(-1, ORDER)
        if not np.array_equal(np.sort(rows, axis=1), np.broadcast_to(want, rows.shape)):
            return axis
    return None


class Quasigroup:
    """An n-ary quasigroup on {0,1,2,3} held as an immutable value table."""

    __slots__ = ("table", "arity", "_hash")

    def __init__(self, table: np.ndarray, *, _trusted: bool = False):
        arr = np.asarray(table, dtype=np.uint8)
        if arr.ndim < 1 or arr.shape != (ORDER,) * arr.ndim:
            raise FormatError(f"table shape {arr.shape} is not (4,)*n")
        if arr.ndim > MAX_ARITY:
            raise CapError(f"arity {arr.ndim} exceeds the table cap {MAX_ARITY}")
        if not _trusted:
            if arr.max(initial=0) > 3:
                raise FormatError("table contains a symbol outside 0..3")
            axis = _latin_violation(arr)
            if axis is not None:
                raise LatinError(f"section through argument {axis + 1} is not a bijection")
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)
        self.table = arr
        self.arity = arr.ndim
        self._hash = hash((self.arity, arr.tobytes()))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_digits(cls, arity: int, digits: str) -> "Quasigroup":
        if arity < 1 or arity > MAX_ARITY:
            raise FormatError(f"unsupported arity {arity}")
        if len(digits) != ORDER**arity:
            raise FormatError(
                f"expected {ORDER**arity} digits for arity {arity}, got {len(digits)}")
        if not set(digits) <= set("0123"):
            bad = next(c for c in digits if c not in "0123")
            raise FormatError(f"invalid table digit {bad!r}")
        arr = np.frombuffer(digits.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls(arr.reshape((ORDER,) * arity))

    @classmethod
    def from_callable(cls, arity: int, fn) -> "Quasigroup":
        arr = np.empty((ORDER,) * arity, dtype=np.uint8)
        for x in np.ndindex(*arr.shape):
            arr[x] = fn(*x)
        return cls(arr)

    # -- basic accessors ----------------------------------------------------

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ArityError(f"expected {self.arity} arguments, got {len(args)}")
        return int(self.table[args])

    def value(self, x: Sequence[int]) -> int:
        return self(*x)

    def digits(self) -> str:
        return "".join(str(int(v)) for v in self.table.ravel())

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Quasigroup) and self.arity == other.arity
                and np.array_equal(self.table, other.table))

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self.arity <= 2:
            return f"Quasigroup({self.arity}, {self.digits()!r})"
        return f"Quasigroup(arity={self.arity})"

    # -- sections and inverses ----------------------------------------------

    def section(self, i: int, fixed: Sequence[int]) -> Perm:
        """The bijection x -> f(..., x at argument i, ...) for fixed others."""
        self._check_arg_index(i)
        fixed = tuple(int(v) for v in fixed)
        if len(fixed) != self.arity - 1:
            raise ArityError(f"expected {self.arity - 1} fixed arguments")
        idx = fixed[: i - 1] + (slice(None),) + fixed[i - 1:]
        return Perm(self.table[idx])

    def zero_section(self, i: int) -> Perm:
        return self.section(i, (0,) * (self.arity - 1))

    def inverse(self, i: int) -> "Quasigroup":
        """The inverse in argument i: g(x with a at slot i) = x_i iff f(x) = a."""
        self._check_arg_index(i)
        moved = np.moveaxis(self.table, i - 1, -1)
        rows = np.ascontiguousarray(moved).reshape(-1, ORDER)
        inv = np.empty_like(rows)
        np.put_along_axis(inv, rows.astype(np.intp),
                          np.broadcast_to(np.arange(ORDER, dtype=np.uint8), rows.shape), axis=1)
        out = np.moveaxis(inv.reshape(moved.shape), -1, i - 1)
        return Quasigroup(out, _trusted=True)

    # -- isotopy action and composition --------------------------------------

    def isotope(self, theta: Isotopy) -> "Quasigroup":
        """g(x) = theta_0^{-1} f(theta_1 x_1, ..., theta_n x_n)."""
        if theta.arity != self.arity:
            raise ArityError("isotopy arity does not match quasigroup arity")
        gathered = self.table[np.ix_(*(p.arr for p in theta.parts[1:]))]
        return Quasigroup(theta.parts[0].inverse().arr[gathered], _trusted=True)

    def compose_at(self, inner: "Quasigroup", pos: int) -> "Quasigroup":
        """Substitute `inner` for argument `pos`, keeping argument order.

        Unary factors are rejected; both operands must have arity >= 2.
        """
        self._check_arg_index(pos)
        if self.arity < 2 or inner.arity < 2:
            raise ArityError("composition factors must have arity at least 2")
        if self.arity + inner.arity - 1 > MAX_ARITY:
            raise CapError("composed arity exceeds the table cap")
        out = np.take(self.table, inner.table, axis=pos - 1)
        return Quasigroup(out, _trusted=True)

    # -- the code ------------------------------------------------------------

    def code(self) -> frozenset[tuple[int, ...]]:
        """The set {(f(x), x_1, ..., x_n)} of 4^n tuples in Sigma^(n+1)."""
        flat = self.table.ravel()
        return frozenset(
            (int(flat[k]), *x) for k, x in enumerate(np.ndindex(*self.table.shape)))

    def code_tuples(self) -> Iterator[tuple[int, ...]]:
        """Code tuples in lexicographic order of the argument part."""
        flat = self.table.ravel()
        for k, x in enumerate(np.ndindex(*self.table.shape)):
            yield (int(flat[k]), *x)

    def _check_arg_index(self, i: int) -> None:
        if not 1 <= i <= self.arity:
            raise ArityError(f"argument index {i} out of range 1..{self.arity}")


# ---------------------------------------------------------------------------
# qg4 file format
# ---------------------------------------------------------------------------

def parse_table(data: bytes | str) -> Quasigroup:
    """Parse the qg4 format: "qg4 <n>\\n<4^n digits>\\n", nothing else."""
    if isinstance(data, bytes):
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise FormatError("qg4 file is not ASCII") from exc
    else:
        text = data
    lines = text.split("\n")
    if len(lines) != 3 or lines[2] != "":
        raise FormatError("expected exactly two newline-terminated lines")
    header, body = lines[0], lines[1]
    parts = header.split(" ")
    if len(parts) != 2 or parts[0] != "qg4" or not parts[1].isdigit():
        raise FormatError(f"malformed header {header!r}; expected 'qg4 <n>'")
    arity = int(parts[1])
    return Quasigroup.from_digits(arity, body)


def qg4_text(q: Quasigroup) -> str:
    """Serialize to the qg4 format (bit-exact, newline-terminated)."""
    return f"qg4 {q.arity}\n{q.digits()}\n"
