import itertools
import random

import pytest

from qg4 import (
    IDENTITY,
    Isotopy,
    Perm,
    autotopy_group,
    canonical_semilinear_autotopies,
    close_isotopies,
    is_autotopy,
    is_linear,
    is_semilinear,
    is_semilinear_in_pair,
    linear,
    native_elements,
    semilinear_profile,
    shifted_linear,
    xor2,
    z4,
)
from qg4.core import Quasigroup
from qg4.semilinear import PairPartition, PARTITIONS
from qg4.construct import chain, random_semilinear_composition

from conftest import random_isotopy

P01, P02, P03 = PARTITIONS


def P(*cycles):
    return Perm.from_cycles(*cycles)


class TestPairPartition:
    def test_three_partitions(self):
        assert {p.partner for p in PARTITIONS} == {1, 2, 3}
        assert PairPartition(2) is P02

    def test_of_pair_up_to_complement(self):
        assert PairPartition.of_pair(0, 2) is P02
        assert PairPartition.of_pair(1, 3) is P02
        assert PairPartition.of_pair(2, 3) is P01

    def test_image(self):
        tau = P((1, 2))
        assert P02.image_under(tau) is P01
        assert P01.image_under(tau) is P02
        assert P03.image_under(tau) is P03


class TestProfile:
    def test_z4_unique_assignment(self):
        profile = semilinear_profile(z4())
        assert profile.assignments == ((P02, P02, P02),)
        assert profile.uniform_partition() is P02
        assert not profile.is_linear

    def test_xor2_all_assignments(self):
        profile = semilinear_profile(xor2())
        assert len(profile.assignments) == 3
        assert profile.is_linear
        assert {a[0] for a in profile.assignments} == set(PARTITIONS)

    def test_incoherent_composition_not_semilinear(self):
        assert not is_semilinear(chain(5))
        assert semilinear_profile(chain(5)).assignments == ()

    def test_shifted_linear(self):
        for n in (3, 4):
            profile = semilinear_profile(shifted_linear(n))
            assert profile.assignments == ((P02,) * (n + 1),)


class TestQuotientSoundness:
    def test_assignments_against_block_scan(self):
        # independent oracle: enumerate every block choice of an assignment
        # and check the image is contained in one output block
        rng = random.Random(10)
        cases = [z4(), xor2(), shifted_linear(3),
                 linear(3).isotope(random_isotopy(3, rng)),
                 z4().isotope(random_isotopy(2, rng))]
        for q in cases:
            profile = semilinear_profile(q)
            for assignment in profile.assignments:
                p0 = assignment[0]
                arg_blocks = [(p.low, p.high) for p in assignment[1:]]
                for pick in itertools.product((0, 1), repeat=q.arity):
                    cube = [arg_blocks[j][pick[j]] for j in range(q.arity)]
                    values = {q(*x) for x in itertools.product(*cube)}
                    assert values == set(p0.low) or values == set(p0.high)


class TestMembership:
    def test_z4_pairs(self):
        assert is_semilinear_in_pair(z4(), 1, P02)
        assert not is_semilinear_in_pair(z4(), 1, P01)
        assert is_semilinear_in_pair(z4(), 0, P02)

    def test_linear_everything(self):
        for j in range(3):
            for p in PARTITIONS:
                assert is_semilinear_in_pair(xor2(), j, p)


class TestLinear:
    def test_linear_family(self):
        for n in range(2, 6):
            assert is_linear(linear(n))

    def test_nonlinear_examples(self, base_tables):
        assert not is_linear(base_tables["sl3"])
        assert not is_linear(base_tables["z4"])
        assert not is_linear(base_tables["g3"])
        assert not is_linear(base_tables["h3"])

    def test_matches_isotopy_to_xor_chain(self):
        from qg4 import are_isotopic

        rng = random.Random(11)
        for seed in range(4):
            q = random_semilinear_composition(3, 900 + seed)
            assert is_linear(q) == (are_isotopic(q, linear(3)) is not None)
        base = linear(3).isotope(random_isotopy(3, rng))
        assert is_linear(base)

    def test_two_partitions_at_one_argument_forces_linear(self):
        corpus = [z4(), xor2(), shifted_linear(3), chain(5), linear(4)]
        corpus += [random_semilinear_composition(3, s) for s in range(1000, 1006)]
        for q in corpus:
            profile = semilinear_profile(q)
            for j in range(q.arity + 1):
                if len(profile.partitions_at(j)) >= 2:
                    assert profile.is_linear


class TestIsotopyCovariance:
    def test_partition_transforms_by_inverse(self):
        rng = random.Random(12)
        for seed in range(6):
            q = random_semilinear_composition(2, 1100 + seed)
            theta = random_isotopy(2, rng)
            before = semilinear_profile(q)
            after = semilinear_profile(q.isotope(theta))
            for j in range(3):
                expect = {p.image_under(theta[j].inverse())
                          for p in before.partitions_at(j)}
                assert expect == set(after.partitions_at(j))


class TestNativeElements:
    def test_pair_02(self):
        native = native_elements((0, 2))
        assert native.involution == P((0, 2), (1, 3))
        assert set(native.transpositions) == {P((0, 2)), P((1, 3))}
        assert set(native.cycles) == {P((0, 1, 2, 3)), P((0, 3, 2, 1))}
        assert set(native.foreign_involutions) == {P((0, 1), (2, 3)), P((0, 3), (1, 2))}

    def test_pair_01(self):
        assert native_elements((0, 1)).involution == P((0, 1), (2, 3))

    def test_cycles_square_to_involution(self):
        for partner in (1, 2, 3):
            native = native_elements(partner)
            for c in native.cycles:
                assert c * c == native.involution

    def test_pair_without_zero_rejected(self):
        with pytest.raises(ValueError):
            native_elements((1, 3))


class TestCanonicalAutotopies:
    def test_z4_known_members(self):
        out = canonical_semilinear_autotopies(z4())
        xi = P((0, 2), (1, 3))
        assert Isotopy((xi, xi, IDENTITY)) in out
        assert Isotopy((P((1, 3)),) * 3) in out
        # f({0,2}^2) = {0,2}, so the (02) transposition is excluded.
        assert Isotopy((P((0, 2)),) * 3) not in out
        assert len(out) == 3 + 1

    def test_all_verified(self, base_tables):
        for name in ("z4", "sl3", "sl4"):
            q = base_tables[name]
            for theta in canonical_semilinear_autotopies(q):
                assert is_autotopy(q, theta)

    def test_shifted_linear_counts_and_generated_group(self):
        for n in (3, 4):
            q = shifted_linear(n)
            out = canonical_semilinear_autotopies(q)
            assert len(out) == (n + 1) * n // 2 + 1
            generated = close_isotopies(out)
            assert len(generated) == 2 ** (n + 1)
            assert generated == set(autotopy_group(q).elements)

    def test_complement_case_uses_zero_pair_transposition(self):
        # x + y + 1 mod 4 maps {0,2}^2 onto {1,3}.
        q = Quasigroup.from_callable(2, lambda x, y: (x + y + 1) % 4)
        out = canonical_semilinear_autotopies(q)
        assert Isotopy((P((0, 2)), P((1, 3)), P((1, 3)))) in out
        for theta in out:
            assert is_autotopy(q, theta)

    def test_rejects_nonuniform(self):
        with pytest.raises(ValueError):
            canonical_semilinear_autotopies(chain(5))

    def test_nonlinear_binary_group_is_32_with_four_families(self):
        q = z4()
        elements = autotopy_group(q).elements
        assert len(elements) == 32
        native = native_elements((0, 2))
        xi = native.involution
        kinds = {"involutions": 0, "transpositions": 0, "cycles": 0, "foreign": 0}
        for theta in elements:
            parts = set(theta.parts)
            if parts <= {IDENTITY, xi}:
                kinds["involutions"] += 1
            elif parts <= set(native.transpositions):
                kinds["transpositions"] += 1
            elif any(p in native.cycles for p in theta.parts):
                assert sum(p in native.cycles for p in theta.parts) == 2
                assert all(p in native.cycles or p in (IDENTITY, xi)
                           for p in theta.parts)
                kinds["cycles"] += 1
            else:
                assert sum(p in native.foreign_involutions for p in theta.parts) == 2
                assert sum(p in native.transpositions for p in theta.parts) == 1
                kinds["foreign"] += 1
        assert kinds == {"involutions": 4, "transpositions": 4,
                         "cycles": 12, "foreign": 12}
