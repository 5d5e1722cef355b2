"""Fixed orbits, transversality gates, per-orbit contributions."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from equilef import _ratlin as rl
from equilef import fixed_point_formula as fpf
from equilef import geometry_models as gm
from equilef import torus_group as tg
from equilef.endomorphism import (
    BundleTwist,
    SpherePhaseMap,
    TorusMap,
    cohomology_action,
)
from equilef.errors import InfiniteFixedSet, NonTransverse


def torus_model(entries, labels=()):
    rows = tuple(tuple(Fraction(x) for x in row) for row in entries)
    return gm.FlatTorusModel(tg.SymbolicFrequency(rows, labels))


def sphere_model(entries, labels=()):
    rows = tuple(tuple(Fraction(x) for x in row) for row in entries)
    return gm.WeightedSphereModel(tg.SymbolicFrequency(rows, labels))


T3_PROD = torus_model([(0,), (0,), (1,)])
T3_MIX = torus_model([(0, 0), (1, 0), (0, 1)], ("alpha",))
T2_IRR = torus_model([(1, 0), (0, 1)], ("alpha",))
T2_PROD = torus_model([(0,), (1,)])
S5 = sphere_model([(0, 1), (1, 0), (2, 0)], ("tau",))
S3_RAT = sphere_model([(1,), (2,)])

CLASSICAL = TorusMap(((2, 1, 0), (1, 1, 0), (0, 0, 1)), (0, 0, 0))
DOUBLING_T3 = TorusMap(((2, 0, 0), (0, 1, 0), (0, 0, 1)), (0, 0, 0))
IDENTITY_T2 = TorusMap(((1, 0), (0, 1)), (0, 0))


def brute_force_base_fixed_points(A_bar, c_bar, denom):
    c = len(A_bar)
    hits = []
    for combo in itertools.product(range(denom), repeat=c):
        x = tuple(Fraction(i, denom) for i in combo)
        fx = tuple(
            rl.frac_mod1(sum(Fraction(a) * xi for a, xi in zip(row, x)) + cb)
            for row, cb in zip(A_bar, c_bar)
        )
        if fx == x:
            hits.append(x)
    return hits


class TestFindFixedOrbits:
    def test_classical_single_orbit(self):
        orbits = fpf.find_fixed_orbits(T3_PROD, CLASSICAL)
        assert len(orbits) == 1
        assert orbits[0].base_point == (0, 0, 0)
        # count equals |det(A - I)| on the base
        A_bar, c_bar = gm.induced_base_map(T3_PROD, CLASSICAL)
        M = [[A_bar[i][j] - (i == j) for j in range(2)] for i in range(2)]
        assert len(orbits) == abs(rl.det_int(M)) == 1
        assert brute_force_base_fixed_points(A_bar, c_bar, 12) == [(0, 0)]

    def test_doubling_single_orbit(self):
        orbits = fpf.find_fixed_orbits(T3_MIX, DOUBLING_T3)
        assert len(orbits) == 1
        assert orbits[0].key[1] == (Fraction(0),)

    def test_multi_orbit_count_matches_brute_force(self):
        f = TorusMap(((2, 0, 0), (0, 3, 0), (0, 0, 1)), (Fraction(1, 2), 0, 0))
        orbits = fpf.find_fixed_orbits(T3_PROD, f)
        A_bar, c_bar = gm.induced_base_map(T3_PROD, f)
        brute = brute_force_base_fixed_points(A_bar, c_bar, 4)
        assert len(orbits) == len(brute) == 2
        keys = sorted(o.key[1] for o in orbits)
        assert keys == sorted(brute)

    def test_group_translation_infinite(self):
        f = TorusMap(((1, 0, 0), (0, 1, 0), (0, 0, 1)),
                     (0, Fraction(1, 4), Fraction(1, 3)))
        with pytest.raises(InfiniteFixedSet):
            fpf.find_fixed_orbits(T3_MIX, f)

    def test_off_group_translation_empty(self):
        f = TorusMap(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (Fraction(1, 4), 0, 0))
        assert fpf.find_fixed_orbits(T3_MIX, f) == []

    def test_point_base_returns_whole_manifold(self):
        f = TorusMap(((1, 0), (0, 1)), (Fraction(1, 4), 0))
        orbits = fpf.find_fixed_orbits(T2_IRR, f)
        assert len(orbits) == 1
        assert orbits[0].dim == 2

    def test_s5_phase_map_gated(self):
        with pytest.raises(InfiniteFixedSet):
            fpf.find_fixed_orbits(S5, SpherePhaseMap((0, 0, Fraction(1, 4))))

    def test_s3_rational_finite(self):
        orbits = fpf.find_fixed_orbits(S3_RAT, SpherePhaseMap((Fraction(1, 4), 0)))
        assert len(orbits) == 2
        assert sorted(o.base_point.support for o in orbits) == [(0,), (1,)]


class TestTransversality:
    def test_doubling_conormal_det(self):
        orbit = fpf.find_fixed_orbits(T3_MIX, DOUBLING_T3)[0]
        cert = fpf.check_transversality(orbit, DOUBLING_T3)
        assert cert.dets_exact == (Fraction(1),)

    def test_empty_conormal_vacuous(self):
        f = TorusMap(((1, 0), (0, 1)), (Fraction(1, 4), 0))
        orbit = fpf.find_fixed_orbits(T2_IRR, f)[0]
        cert = fpf.check_transversality(orbit, f)
        assert cert.dets_exact == (Fraction(1),)

    def test_sphere_pole_orbit_with_rotating_normal_rejected(self):
        # the isotropy circle sweeps the rotation angle through zero
        orbit = gm.orbit_through(S5, gm.SpherePoint((0, 0, 1), (0, 0, 0)))
        f = SpherePhaseMap((0, 0, Fraction(1, 4)))
        with pytest.raises(NonTransverse):
            fpf.check_transversality(orbit, f)

    def test_s3_circle_orbits_transverse(self):
        f = SpherePhaseMap((Fraction(1, 4), 0))
        for orbit in fpf.find_fixed_orbits(S3_RAT, f):
            cert = fpf.check_transversality(orbit, f)
            assert all(abs(d) > 1e-9 for d in cert.dets)

    def test_s3_nontransverse_phase(self):
        # phase 0 on the normal coordinate fixes it
        f = SpherePhaseMap((0, 0))
        orbit = gm.orbit_through(S3_RAT, gm.SpherePoint((0, 1), (0, 0)))
        with pytest.raises(NonTransverse):
            fpf.check_transversality(orbit, f)


class TestTorusContributions:
    def test_classical_value(self):
        res = fpf.lefschetz_rhs(T3_PROD, CLASSICAL)
        assert res.value_exact == Fraction(-1)
        contrib = res.contributions[0]
        assert contrib.per_degree[0].sheets == 1
        assert contrib.per_degree[0].haar_factor == 1
        # sum over q of (-1)^q tr / |det| = det(I - A)/|det(A - I)| = -1
        assert abs(contrib.total - (-1)) < 1e-12

    def test_identity_irrational(self):
        res = fpf.lefschetz_rhs(T2_IRR, IDENTITY_T2)
        assert res.value_exact == 0

    def test_doubling_alternating_zero(self):
        res = fpf.lefschetz_rhs(T3_MIX, DOUBLING_T3)
        assert res.value_exact == 0
        per_q = [pd.trace_value for pd in res.contributions[0].per_degree]
        assert per_q == [1, 3, 2]

    def test_rhs_equals_lhs_exactly_on_suite(self):
        suite = [
            (T3_PROD, CLASSICAL),
            (T3_PROD, TorusMap(((2, 0, 0), (0, 3, 0), (0, 0, 1)), (0, 0, 0))),
            (T3_PROD, TorusMap(CLASSICAL.matrix, (Fraction(1, 3), Fraction(1, 5), 0))),
            (T3_MIX, DOUBLING_T3),
            (T2_IRR, IDENTITY_T2),
            (T2_PROD, TorusMap(((3, 0), (0, 1)), (0, 0))),
        ]
        for model, f in suite:
            lhs = cohomology_action(model, f).lefschetz_exact
            rhs = fpf.lefschetz_rhs(model, f).value_exact
            assert lhs == rhs, (model.v, f)

    def test_quadrature_route_agrees(self):
        res = fpf.lefschetz_rhs(T3_PROD, CLASSICAL, isotropy_resolution=3)
        assert res.value_exact == Fraction(-1)

    def test_random_product_maps_exact_equality(self):
        # random hyperbolic-or-not blocks with random rational translations
        rng = np.random.default_rng(123)
        found = 0
        while found < 15:
            block = rng.integers(-3, 4, (2, 2))
            M = [[int(block[0][0]) - 1, int(block[0][1])],
                 [int(block[1][0]), int(block[1][1]) - 1]]
            if rl.det_int(M) == 0:
                continue
            c = (Fraction(int(rng.integers(0, 5)), 7),
                 Fraction(int(rng.integers(0, 5)), 9), 0)
            A = ((int(block[0][0]), int(block[0][1]), 0),
                 (int(block[1][0]), int(block[1][1]), 0),
                 (0, 0, 1))
            f = TorusMap(A, c)
            lhs = cohomology_action(T3_PROD, f).lefschetz_exact
            rhs = fpf.lefschetz_rhs(T3_PROD, f).value_exact
            assert lhs == rhs is not None
            found += 1

    def test_random_sheared_maps_on_mixed_direction(self):
        # v = (0, 1, alpha): equivariant maps have free first column; the
        # shear entries exercise the frame pull-back away from the product
        rng = np.random.default_rng(321)
        found = 0
        while found < 12:
            a = int(rng.integers(-3, 4))
            if a == 1:
                continue
            b, cshear = int(rng.integers(-2, 3)), int(rng.integers(-2, 3))
            A = ((a, 0, 0), (b, 1, 0), (cshear, 0, 1))
            f = TorusMap(A, (Fraction(int(rng.integers(0, 3)), 5), 0, 0))
            lhs = cohomology_action(T3_MIX, f).lefschetz_exact
            rhs = fpf.lefschetz_rhs(T3_MIX, f).value_exact
            assert lhs == rhs is not None
            assert len(fpf.find_fixed_orbits(T3_MIX, f)) == abs(a - 1)
            found += 1


class TestTwistedContributions:
    def test_half_weight_cancels_through_components(self):
        model = T2_PROD
        twist = BundleTwist(tg.SymbolicFrequency(((Fraction(1, 2),),)))
        f = TorusMap(((2, 0), (0, 1)), (0, 0))
        res = fpf.lefschetz_rhs(model, f, twist=twist)
        assert abs(res.value) < 1e-12
        lhs = cohomology_action(model, f, twist).lefschetz
        assert abs(lhs - res.value) < 1e-12

    def test_integer_weight_with_translation_phase(self):
        twist = BundleTwist(tg.SymbolicFrequency(((1,),)))
        f = TorusMap(CLASSICAL.matrix, (0, 0, Fraction(1, 3)))
        lhs = cohomology_action(T3_PROD, f, twist).lefschetz
        rhs = fpf.lefschetz_rhs(T3_PROD, f, twist=twist).value
        assert abs(lhs - rhs) < 1e-12
        assert abs(lhs - (-np.exp(2j * np.pi / 3))) < 1e-12

    def test_irrational_weight_kills_both_sides(self):
        model = torus_model([(0, 0), (0, 0), (1, 0)], ("alpha",))
        twist = BundleTwist(
            tg.SymbolicFrequency(((0, 1),), ("alpha",)))
        f = TorusMap(CLASSICAL.matrix, (0, 0, 0))
        lhs = cohomology_action(model, f, twist).lefschetz
        rhs = fpf.lefschetz_rhs(model, f, twist=twist).value
        assert lhs == 0
        assert abs(rhs) < 1e-12

    def test_scalar_factor_multiplies(self):
        twist = BundleTwist(tg.SymbolicFrequency(((1,),)), phi_scalar=2.0 - 1.0j)
        f = CLASSICAL
        lhs = cohomology_action(T3_PROD, f, twist).lefschetz
        rhs = fpf.lefschetz_rhs(T3_PROD, f, twist=twist).value
        assert abs(lhs - rhs) < 1e-12
        assert abs(lhs - (-(2.0 - 1.0j))) < 1e-12


class TestSphereContributions:
    F = SpherePhaseMap((Fraction(1, 4), 0))

    def test_scalar_values_hand_computed(self):
        res = fpf.lefschetz_rhs(S3_RAT, self.F, fibers="scalar")
        by_support = {
            c.orbit.base_point.support: c.total for c in res.contributions
        }
        assert abs(by_support[(0,)] - 0.25) < 1e-12
        assert abs(by_support[(1,)] - 0.5) < 1e-12
        assert abs(res.value - 0.75) < 1e-12

    def test_sheets_and_mass(self):
        res = fpf.lefschetz_rhs(S3_RAT, self.F, fibers="scalar")
        data = {c.orbit.base_point.support: c.per_degree[0] for c in res.contributions}
        assert data[(0,)].sheets == 1 and data[(0,)].haar_factor == 1
        assert data[(1,)].sheets == 2 and data[(1,)].haar_factor == 2

    def test_choice_invariance_of_subgroup(self):
        orbit = [o for o in fpf.find_fixed_orbits(S3_RAT, self.F)
                 if o.base_point.support == (1,)][0]
        base = fpf.orbit_contribution(orbit, self.F, fibers="scalar")
        for rows in (((1, 2),), ((2, 4),), ((3, 6),)):
            alt = fpf.orbit_contribution(
                orbit, self.F, fibers="scalar", subgroup_rows=rows)
            assert abs(alt.total - base.total) < 1e-10

    def test_g0_ambiguity_invariance(self):
        orbit = [o for o in fpf.find_fixed_orbits(S3_RAT, self.F)
                 if o.base_point.support == (1,)][0]
        base = fpf.orbit_contribution(orbit, self.F, fibers="scalar")
        # shift the correction by the nontrivial isotropy element (1/2, 0)
        g0_alt = tuple(
            rl.frac_mod1(a + b)
            for a, b in zip(base.g0, (Fraction(1, 2), Fraction(0)))
        )
        alt = fpf.orbit_contribution(orbit, self.F, fibers="scalar", g0=g0_alt)
        assert abs(alt.total - base.total) < 1e-10

    def test_isotropy_quadrature_agrees(self):
        res = fpf.lefschetz_rhs(S3_RAT, self.F, fibers="scalar",
                                isotropy_resolution=4)
        assert abs(res.value - 0.75) < 1e-9


class TestEqualityIsNotVacuous:
    def test_mismatched_data_actually_differs(self):
        # the agreement test has teeth: pairing the untwisted harmonic side
        # with a twisted localized side produces different numbers
        twist = BundleTwist(tg.SymbolicFrequency(((1,),)))
        f = TorusMap(CLASSICAL.matrix, (0, 0, Fraction(1, 3)))
        lhs_plain = cohomology_action(T3_PROD, f).lefschetz
        rhs_twisted = fpf.lefschetz_rhs(T3_PROD, f, twist=twist).value
        assert abs(lhs_plain - rhs_twisted) > 0.5


class TestContributionBookkeeping:
    def test_total_matches_per_degree_fields(self):
        # total = sum over q of (-1)^q (haar/sheets) * isotropy integral,
        # reassembled from the stored per-degree records
        cases = [
            fpf.lefschetz_rhs(T3_PROD, CLASSICAL).contributions[0],
            fpf.lefschetz_rhs(S3_RAT, SpherePhaseMap((Fraction(1, 4), 0)),
                              fibers="scalar").contributions[0],
        ]
        for contrib in cases:
            total = sum(
                (-1) ** pd.degree * float(pd.haar_factor / pd.sheets)
                * pd.isotropy_integral
                for pd in contrib.per_degree
            )
            assert abs(total - contrib.total) < 1e-12

    def test_raw_and_absolute_determinants(self):
        # the classical block has det(A_bar - I) = -1: raw value is signed
        contrib = fpf.lefschetz_rhs(T3_PROD, CLASSICAL).contributions[0]
        assert contrib.per_degree[0].det_value == -1.0
        assert contrib.certificate.dets_exact[0] == Fraction(-1)


class TestSphereTwists:
    F = SpherePhaseMap((Fraction(1, 4), 0))

    def test_unit_weight_hand_computed(self):
        # lifted kernel over the (0,1)-circle has fiber phases {1, -1}: its
        # component sum cancels; the other circle picks up the correction's
        # fiber phase e^{-3 pi i/2} = i against |det| = 4
        twist = BundleTwist(tg.SymbolicFrequency(((1,),)))
        res = fpf.lefschetz_rhs(S3_RAT, self.F, fibers="scalar", twist=twist)
        by = {c.orbit.base_point.support: c.total for c in res.contributions}
        assert abs(by[(1,)]) < 1e-12
        assert abs(by[(0,)] - 0.25j) < 1e-12
        assert abs(res.value - 0.25j) < 1e-12

    def test_doubled_weight_hand_computed(self):
        # weight two trivializes the kernel phases on the (0,1)-circle and
        # flips the sign of the other circle's correction phase
        twist = BundleTwist(tg.SymbolicFrequency(((2,),)))
        res = fpf.lefschetz_rhs(S3_RAT, self.F, fibers="scalar", twist=twist)
        by = {c.orbit.base_point.support: c.total for c in res.contributions}
        assert abs(by[(1,)] - 0.5) < 1e-12
        assert abs(by[(0,)] - (-0.25)) < 1e-12
        assert abs(res.value - 0.25) < 1e-12

    def test_quadrature_route_agrees_on_twists(self):
        for sigma in (1, 2):
            twist = BundleTwist(tg.SymbolicFrequency(((sigma,),)))
            exact = fpf.lefschetz_rhs(S3_RAT, self.F, fibers="scalar",
                                      twist=twist)
            quad = fpf.lefschetz_rhs(S3_RAT, self.F, fibers="scalar",
                                     twist=twist, isotropy_resolution=4)
            assert abs(exact.value - quad.value) < 1e-12


class TestScalarOracle:
    def test_doubling_t2(self):
        f = TorusMap(((2, 0), (0, 1)), (0, 0))
        assert abs(fpf.theorem_c_scalar_value(T2_PROD, f) - 1.0) < 1e-12

    def test_tripling_t2(self):
        f = TorusMap(((3, 0), (0, 1)), (0, 0))
        res = fpf.lefschetz_rhs(T2_PROD, f, fibers="scalar")
        assert len(res.contributions) == 2
        for c in res.contributions:
            assert abs(c.total - 0.5) < 1e-12
        assert abs(fpf.theorem_c_scalar_value(T2_PROD, f) - 1.0) < 1e-12

    def test_translation_irrational_t2(self):
        f = TorusMap(((1, 0), (0, 1)), (Fraction(1, 4), 0))
        assert abs(fpf.theorem_c_scalar_value(T2_IRR, f) - 1.0) < 1e-12
