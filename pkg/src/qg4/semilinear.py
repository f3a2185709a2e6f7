"""Semilinearity and linearity detection, with the autotopies they induce.

A quasigroup is semilinear when its table respects a splitting of {0,1,2,3}
into two pairs in every coordinate (value included).  Pairs only matter up to
complement, so each coordinate carries one of the three pair partitions
01|23, 02|13, 03|12.  The output partition forces the argument partitions
through the zero-anchored sections, so detection costs three verified scans.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .core import ArityError, Isotopy, Perm, Quasigroup
from .autotopy import is_autotopy


class PairPartition:
    """One of the three splittings of {0,1,2,3} into two pairs.

    Identified by the partner of 0; `mask[x]` is 0 on the pair of 0 and 1 on
    the complementary pair.  The three instances are interned.
    """

    __slots__ = ("partner", "mask", "name")

    _registry: dict[int, "PairPartition"] = {}

    def __new__(cls, partner: int) -> "PairPartition":
        partner = int(partner)
        cached = cls._registry.get(partner)
        if cached is not None:
            return cached
        if partner not in (1, 2, 3):
            raise ValueError("the partner of 0 must be 1, 2 or 3")
        self = super().__new__(cls)
        self.partner = partner
        mask = np.zeros(4, dtype=np.uint8)
        for x in range(4):
            mask[x] = 0 if x in (0, partner) else 1
        mask.setflags(write=False)
        self.mask = mask
        rest = sorted(set(range(4)) - {0, partner})
        self.name = f"0{partner}|{rest[0]}{rest[1]}"
        cls._registry[partner] = self
        return self

    @property
    def low(self) -> tuple[int, int]:
        return (0, self.partner)

    @property
    def high(self) -> tuple[int, int]:
        return tuple(x for x in range(4) if x not in (0, self.partner))

    @classmethod
    def of_pair(cls, a: int, b: int) -> "PairPartition":
        """The partition containing {a, b} as one of its pairs."""
        pair = {a, b}
        if len(pair) != 2 or not pair <= {0, 1, 2, 3}:
            raise ValueError(f"not a pair of distinct symbols: {a}, {b}")
        if 0 in pair:
            return cls(max(pair))
        return cls(min(set(range(1, 4)) - pair))

    def image_under(self, perm: Perm) -> "PairPartition":
        """The partition whose pairs are the images of this one's pairs."""
        return PairPartition.of_pair(perm(0), perm(self.partner))

    def __repr__(self) -> str:
        return f"PairPartition({self.name})"

    def __hash__(self) -> int:
        return self.partner

    def __eq__(self, other: object) -> bool:
        return self is other

    def __lt__(self, other: "PairPartition") -> bool:
        return self.partner < other.partner


PARTITIONS = (PairPartition(1), PairPartition(2), PairPartition(3))


@dataclass(frozen=True)
class SemilinearProfile:
    """All verified partition assignments (P_0, ..., P_n) of a quasigroup."""

    arity: int
    assignments: tuple[tuple[PairPartition, ...], ...]

    @property
    def is_semilinear(self) -> bool:
        return bool(self.assignments)

    @property
    def is_linear(self) -> bool:
        return len(self.assignments) == 3

    def partitions_at(self, j: int) -> frozenset[PairPartition]:
        """Partitions occurring at coordinate j (0 is the value) across assignments."""
        if not 0 <= j <= self.arity:
            raise ArityError(f"coordinate {j} out of range 0..{self.arity}")
        return frozenset(a[j] for a in self.assignments)

    def constant_partitions(self) -> frozenset[PairPartition]:
        """Partitions P whose constant assignment (P, ..., P) is valid."""
        return frozenset(a[0] for a in self.assignments if len(set(a)) == 1)

    def uniform_partition(self) -> PairPartition | None:
        """The smallest partition with a valid constant assignment, if any."""
        constant = self.constant_partitions()
        return min(constant) if constant else None


@functools.lru_cache(maxsize=4096)
def semilinear_profile(q: Quasigroup) -> SemilinearProfile:
    """Detect every valid partition assignment by quotient verification.

    For each candidate output partition, the argument partitions are forced as
    preimages under the zero-anchored sections; the assignment survives iff
    the value's block depends only on the argument blocks over the full table.
    """
    n = q.arity
    zero_secs = [q.zero_section(i) for i in range(1, n + 1)]
    found = []
    n_signatures = 2**n
    for p0 in PARTITIONS:
        assignment = [p0]
        for sec in zero_secs:
            assignment.append(p0.image_under(sec.inverse()))
        blocks = p0.mask[q.table].ravel().astype(np.int64)
        signature = np.zeros((4,) * n, dtype=np.int64)
        for j in range(1, n + 1):
            axis_mask = assignment[j].mask.astype(np.int64) << (j - 1)
            shape = [1] * n
            shape[j - 1] = 4
            signature = signature + axis_mask.reshape(shape)
        signature = signature.ravel()
        ones = np.bincount(signature, weights=blocks, minlength=n_signatures)
        totals = np.bincount(signature, minlength=n_signatures)
        if np.all((ones == 0) | (ones == totals)):
            found.append(tuple(assignment))
    return SemilinearProfile(arity=n, assignments=tuple(found))


def is_semilinear(q: Quasigroup) -> bool:
    return semilinear_profile(q).is_semilinear


def is_semilinear_in_pair(q: Quasigroup, j: int, partition: PairPartition) -> bool:
    """True iff some valid assignment uses `partition` at coordinate j."""
    return partition in semilinear_profile(q).partitions_at(j)


def is_linear(q: Quasigroup) -> bool:
    """True iff every pair partition yields a valid assignment."""
    return semilinear_profile(q).is_linear


@dataclass(frozen=True)
class NativeElements:
    """The distinguished permutations of a {0,a}-semilinear nonlinear quasigroup."""

    pair: tuple[int, int]
    involution: Perm
    transpositions: tuple[Perm, Perm]
    cycles: tuple[Perm, Perm]
    foreign_involutions: tuple[Perm, Perm]


def native_elements(pair) -> NativeElements:
    """Native involution/transpositions/cycles for the pair {0, a}.

    The pair must contain 0 (the canonical representative of its partition).
    Accepts a PairPartition, a partner symbol, or a pair of symbols.
    """
    if isinstance(pair, PairPartition):
        a = pair.partner
    elif isinstance(pair, int):
        a = pair
    else:
        pair = tuple(pair)
        if 0 not in pair:
            raise ValueError("the canonical pair must contain 0")
        a = next(x for x in pair if x != 0)
    if a not in (1, 2, 3):
        raise ValueError("the partner of 0 must be 1, 2 or 3")
    b, c = sorted(set(range(1, 4)) - {a})
    involution = Perm.from_cycles((0, a), (b, c))
    transpositions = (Perm.from_cycles((0, a)), Perm.from_cycles((b, c)))
    cycles = (Perm.from_cycles((0, b, a, c)), Perm.from_cycles((0, c, a, b)))
    foreign = (Perm.from_cycles((0, b), (c, a)), Perm.from_cycles((0, c), (a, b)))
    return NativeElements(
        pair=(0, a),
        involution=involution,
        transpositions=transpositions,
        cycles=cycles,
        foreign_involutions=foreign,
    )


def low_cube_closed(q: Quasigroup, partition: PairPartition) -> bool:
    """True iff f maps the cube {0,a}^n into the pair {0,a} (not its complement)."""
    lows = np.array(partition.low, dtype=np.intp)
    sub = q.table[np.ix_(*([lows] * q.arity))]
    return bool(np.all(partition.mask[sub] == 0))


def canonical_semilinear_autotopies(q: Quasigroup) -> list[Isotopy]:
    """The involution-pair and transposition autotopies of a {0,a}-semilinear q.

    Emits the C(n+1, 2) isotopies carrying the native involution in two slots,
    plus one all-transposition isotopy: all (bc) when f({0,a}^n) = {0,a},
    otherwise (0a) in the value slot and (bc) elsewhere.  Every returned
    isotopy is re-verified against the table.
    """
    profile = semilinear_profile(q)
    partition = profile.uniform_partition()
    if partition is None:
        raise ValueError("quasigroup is not uniformly {0,a}-semilinear")
    native = native_elements(partition)
    n = q.arity
    out = []
    identity = Isotopy.identity(n).parts
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            parts = list(identity)
            parts[i] = native.involution
            parts[j] = native.involution
            out.append(Isotopy(parts))
    t0a, tbc = native.transpositions
    if low_cube_closed(q, partition):
        out.append(Isotopy((tbc,) * (n + 1)))
    else:
        out.append(Isotopy((t0a,) + (tbc,) * n))
    for theta in out:
        if not is_autotopy(q, theta):
            raise AssertionError(f"canonical isotopy {theta} failed verification")
    return out
