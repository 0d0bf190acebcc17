"""Tests for exact orbit closures, the sampling oracle, and the scans.

The exact route is checked against hand-derived relation lattices and a
brute-force pairing search; the oracle and the scans are checked against
the exact route and against independently computed field formulas.
"""

import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from conftest import maximal_variation_family, maximal_variation_field, \
    toy_group_fields
from paratorus.errors import (
    DependenceSuspected,
    InconclusiveAtScale,
    RankDeficientField,
)
from paratorus.fibration import Box, PeriodFamily, TranslationField, \
    translation_batch
from paratorus.intmat import bareiss_det, saturate
from paratorus.orbits import (
    SQRT2,
    SQRT3,
    AlgebraicVector,
    NamedConstant,
    algebraic_vector,
    candidate_vectors,
    density_scan,
    group_orbit_scan,
    orbit_closure,
    orbit_sample_oracle,
    relation_lattice,
    resonance_detect,
    unit_torus_family,
)


def vec_half_third():
    return algebraic_vector(("1/2", "1/3"))


def vec_alpha_half():
    return algebraic_vector((0, "1/2"), irrational=((1, 0),), constants=(SQRT2,))


def vec_independent():
    return algebraic_vector(
        (0, 0), irrational=((1, 0), (0, 1)), constants=(SQRT2, SQRT3)
    )


# ---------------------------------------------------------------- constants


def test_named_constant_requires_30_digits():
    with pytest.raises(ValueError):
        NamedConstant("short", "1.41421356")
    with pytest.raises(ValueError):
        NamedConstant("整", "3")


def test_named_constant_value():
    assert abs(SQRT2.value_float - math.sqrt(2)) < 1e-15
    assert SQRT2.value == Fraction(SQRT2.decimal)


def test_declared_independence_heuristic_warns_on_rational():
    fake = NamedConstant("threehalves", "1.500000000000000000000000000000")
    with pytest.warns(DependenceSuspected):
        algebraic_vector((0, 0), irrational=((1, 0),), constants=(fake,))


def test_declared_independence_warns_on_linear_combination():
    double = NamedConstant(
        "twosqrt2", "2.82842712474619009760337744841939615714"
    )
    with pytest.warns(DependenceSuspected):
        algebraic_vector(
            (0, 0), irrational=((1, 0), (0, 1)), constants=(SQRT2, double)
        )


def test_genuinely_independent_constants_stay_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DependenceSuspected)
        vec_independent()


# ---------------------------------------------------------- algebraic vectors


def test_vector_validation():
    with pytest.raises(ValueError):
        AlgebraicVector(((1, 2), (3,)), (SQRT2,))
    with pytest.raises(ValueError):
        AlgebraicVector(((1, 2),), (SQRT2,))
    with pytest.raises(TypeError):
        algebraic_vector((0.5, 0.5))
    with pytest.raises(ValueError):
        algebraic_vector((0, 0), irrational=((1, 0), (0, 1)),
                         constants=(SQRT2, SQRT2))


def test_float_values_match_math_sqrt():
    t = algebraic_vector(
        ("1/4", "-2"), irrational=((2, "1/3"),), constants=(SQRT2,)
    )
    expect = (0.25 + 2 * math.sqrt(2), -2 + math.sqrt(2) / 3)
    assert np.allclose(t.float_values, expect, atol=1e-14)


def test_pairing_splits_rational_and_irrational_parts():
    t = vec_alpha_half()
    rat, irr = t.pairing((3, 4))
    assert rat == Fraction(2)
    assert irr == (Fraction(3),)
    assert t.rational_pairing((0, 2)) == Fraction(1)
    with pytest.raises(ValueError):
        t.rational_pairing((1, 0))


# ------------------------------------------------------------ exact lattices


def test_relation_lattice_zero_vector():
    rel = relation_lattice(algebraic_vector((0, 0)))
    assert rel.generators == ((1, 0), (0, 1))
    assert rel.saturation == ((1, 0), (0, 1))
    assert rel.rank == 2


def test_relation_lattice_alpha_half():
    rel = relation_lattice(vec_alpha_half())
    assert rel.generators == ((0, 2),)
    assert rel.saturation == ((0, 1),)
    assert rel.rank == 1


def test_relation_lattice_half_third_brute_force():
    t = vec_half_third()
    rel = relation_lattice(t)
    assert rel.rank == 2
    assert abs(bareiss_det(rel.generators)) == 6
    # independent route: direct pairing over all heights up to 6
    for m1 in range(-6, 7):
        for m2 in range(-6, 7):
            integral = t.rational_pairing((m1, m2)).denominator == 1
            assert rel.contains((m1, m2)) == integral


def test_saturation_is_primitive_closure():
    for t in (vec_half_third(), vec_alpha_half(), vec_independent()):
        rel = relation_lattice(t)
        assert saturate(rel.generators) == rel.saturation


def test_contains_rejects_outside_vectors():
    rel = relation_lattice(vec_alpha_half())
    assert rel.contains((0, 4))
    assert not rel.contains((1, 2))
    empty = relation_lattice(vec_independent())
    assert empty.contains((0, 0))
    assert not empty.contains((1, 0))


# ------------------------------------------------------------- orbit closure


def test_orbit_closure_frozen_examples():
    cases = [
        (algebraic_vector((0, 0)), 0, 1),
        (vec_half_third(), 0, 6),
        (vec_alpha_half(), 1, 2),
        (vec_independent(), 2, 1),
    ]
    for t, r, c in cases:
        desc = orbit_closure(t)
        assert (desc.dimension, desc.components) == (r, c)


def test_orbit_closure_tilted_strands():
    # entries sqrt2 and 2*sqrt2 + 1/3: pairing with (2, -1) gives -1/3, so
    # the relation lattice is generated by (6, -3) and saturates to (2, -1).
    t = algebraic_vector(
        (0, "1/3"), irrational=((1, 2),), constants=(SQRT2,)
    )
    desc = orbit_closure(t)
    assert (desc.dimension, desc.components) == (1, 3)
    assert desc.relations.generators == ((6, -3),)
    assert desc.subtorus_basis == ((1, 2),)


def test_subtorus_basis_annihilates_saturation():
    for t in (vec_half_third(), vec_alpha_half(), vec_independent()):
        desc = orbit_closure(t)
        for m in desc.relations.saturation:
            for v in desc.subtorus_basis:
                assert sum(a * b for a, b in zip(m, v)) == 0
        assert len(desc.subtorus_basis) == desc.dimension


def test_component_count_invariant_under_integer_shift():
    base = vec_half_third()
    d0 = orbit_closure(base)
    for z in ((1, 0), (-3, 7), (2, -2)):
        d = orbit_closure(base.translate_by_integers(z))
        assert (d.dimension, d.components) == (d0.dimension, d0.components)


def test_component_count_invariant_under_unimodular_change():
    mats = (
        ((1, 1), (0, 1)),
        ((1, 0), (5, 1)),
        ((2, 1), (1, 1)),
        ((1, -3), (-2, 7)),
    )
    for t in (vec_half_third(), vec_alpha_half(), vec_independent()):
        d0 = orbit_closure(t)
        for u in mats:
            assert abs(bareiss_det(u)) == 1
            d = orbit_closure(t.change_basis(u))
            assert (d.dimension, d.components) == (
                d0.dimension, d0.components
            )


def test_adding_relations_never_increases_dimension():
    chain = [vec_independent(), vec_alpha_half(), vec_half_third()]
    dims = [orbit_closure(t).dimension for t in chain]
    ranks = [relation_lattice(t).rank for t in chain]
    assert ranks == sorted(ranks)
    assert dims == sorted(dims, reverse=True)


# ------------------------------------------------------------------- oracle


def test_oracle_finite_orbit():
    est = orbit_sample_oracle([0.5, 1 / 3], n_points=100000)
    assert (est.dimension, est.components) == (0, 6)
    assert not est.inconclusive


def test_oracle_two_circles():
    est = orbit_sample_oracle([math.sqrt(2) % 1, 0.5], n_points=100000)
    assert (est.dimension, est.components) == (1, 2)


def test_oracle_dense_orbit():
    est = orbit_sample_oracle(
        [math.sqrt(2) % 1, math.sqrt(3) % 1], n_points=100000
    )
    assert (est.dimension, est.components) == (2, 1)


def test_oracle_accepts_algebraic_vectors():
    est = orbit_sample_oracle(vec_alpha_half(), n_points=50000)
    assert (est.dimension, est.components) == (1, 2)


def test_oracle_matches_exact_on_tilted_strands():
    t = algebraic_vector(
        (0, "1/3"), irrational=((1, 2),), constants=(SQRT2,)
    )
    exact = orbit_closure(t)
    est = orbit_sample_oracle(t, n_points=150000)
    assert (est.dimension, est.components) == (
        exact.dimension, exact.components
    )


def test_oracle_validation():
    with pytest.raises(ValueError):
        orbit_sample_oracle([0.5, 0.5], n_points=10)
    with pytest.raises(ValueError):
        orbit_sample_oracle([0.5, 0.5], cluster_tol=0.7)


def test_oracle_inconclusive_scales_flagged():
    # 50 blobs of width 5e-3 anchored just above the scale-100 cell edges:
    # point-like for the coarse scale pair (estimate 0) but boundary-merged
    # for the finer pair (estimate 1), so the estimates disagree.
    with pytest.warns(InconclusiveAtScale):
        est = orbit_sample_oracle([0.02 + 5e-8, 1e-9], n_points=100000)
    assert est.inconclusive
    assert est.dimension in (0, 1)


def test_equidistributed_orbit_passes_clt_discrepancy():
    values = np.array([math.sqrt(2) % 1, math.sqrt(3) % 1])
    n = 100000
    pts = np.outer(np.arange(n), values) % 1.0
    frac = np.mean(np.all(pts < 0.5, axis=1))
    assert abs(frac - 0.25) < 3 * math.sqrt(0.25 * 0.75 / n)


# ---------------------------------------------------------------- resonance


def test_candidate_vectors_canonical_half():
    cands = candidate_vectors(2, 4)
    assert cands.shape == (40, 2)
    lead = [next(x for x in row if x != 0) for row in cands.tolist()]
    assert all(x > 0 for x in lead)
    assert candidate_vectors(1, 1).tolist() == [[1]]
    with pytest.raises(ValueError):
        candidate_vectors(2, 0)


def test_resonance_detect_rational_point():
    res = resonance_detect([0.5, 0.25], 4, 1e-9)
    assert res.rank == 2
    assert res.lattice.contains((2, 0))
    assert res.lattice.contains((0, 4))
    assert not res.lattice.contains((1, 0))
    assert abs(bareiss_det(res.lattice.generators)) == 4


def test_resonance_detect_single_relation():
    res = resonance_detect([math.sqrt(2) / 2, 0.5], 4, 1e-9)
    assert res.lattice.generators == ((0, 2),)
    assert res.rank == 1


def test_resonance_detect_random_vector_empty():
    rng = np.random.default_rng(2024)
    res = resonance_detect(rng.random(2), 30, 1e-9)
    assert res.rank == 0
    assert res.hits == ()


# ------------------------------------------------------------- density scan


def quick_scan(**kw):
    field = maximal_variation_field()
    args = dict(
        targets=None,
        refine=True,
        refine_counts=(24, 24),
        probe_counts=(16, 16),
    )
    args.update(kw)
    return density_scan(field, (60, 60), 30, 1e-9, **args)


def test_density_scan_realizes_all_strata():
    rep = quick_scan()
    present = set(np.unique(rep.dimensions).tolist())
    assert present == {0, 1, 2}
    # the generic stratum dominates
    assert (rep.dimensions == 2).sum() > rep.dimensions.size // 5
    assert rep.field_rank == 2


def test_density_scan_coverage_within_tolerance():
    rep = quick_scan()
    assert rep.coverage[0] <= 0.05
    assert rep.coverage[1] <= 0.05
    assert rep.coverage[2] <= 0.05


def test_density_refinement_certifies_exact_targets():
    rep = quick_scan()
    assert len(rep.refined) == 2
    for stratum in rep.refined:
        assert stratum.count > 0
        assert float(stratum.residuals.max()) < 1e-12
        assert float(stratum.jacobian_sigma_min.min()) > 1e-6
    # independent check against the closed-form field t = (-x/y, 1/y)
    full = rep.refined[0]
    x = full.points[:, 0]
    y = full.points[:, 1]
    t_direct = np.stack([(-x / y) % 1.0, (1.0 / y) % 1.0], axis=1)
    targets = np.array(
        [[float(v) for v in row] for row in full.targets]
    )
    wrapped = t_direct - targets
    wrapped -= np.round(wrapped)
    assert np.abs(wrapped).max() < 1e-11
    for row, c in zip(full.targets, full.components):
        assert c == math.lcm(*(v.denominator for v in row))


def test_density_per_point_hits_satisfy_their_generators():
    rep = quick_scan(refine=False)
    checked = 0
    for idx, gens in rep.generators.items():
        for m in gens:
            v = float(np.dot(m, rep.translations[idx]))
            assert abs(v - round(v)) < 1e-6
        checked += 1
        if checked >= 50:
            break
    assert checked > 0


def test_density_scan_constant_field_all_fixed():
    family = maximal_variation_family()
    field = TranslationField(family=family, kind="free", components=("0", "0"))
    with pytest.warns(RankDeficientField):
        rep = density_scan(
            field, (8, 8), 3, 1e-9, refine_counts=(4, 4),
            probe_counts=(6, 6),
        )
    assert np.all(rep.dimensions == 0)
    assert np.all(rep.components == 1)
    assert any("skipped" in n for n in rep.notes)


def test_density_scan_rank_deficient_g2_field():
    family = PeriodFamily(
        g=2,
        base_domain=Box((0.1, 0.1, 0.1, 0.1), (0.9, 0.9, 0.9, 0.9)),
        tau=(("i", "0"), ("0", "i")),
    )
    field = TranslationField(
        family=family, kind="free",
        components=("x1", "0", "x3", "0"),
    )
    with pytest.warns(RankDeficientField):
        rep = density_scan(
            field, (5, 5, 5, 5), 2, 1e-9,
            refine_counts=(3, 3, 3, 3), probe_counts=(4, 4, 4, 4),
        )
    assert rep.field_rank == 2
    assert any("r=0 skipped" in n for n in rep.notes)
    # the achievable stratum still refines
    assert len(rep.refined) == 1
    assert rep.refined[0].requested_dimension == 3
    assert rep.refined[0].count > 0


def test_density_scan_thread_count_does_not_change_results():
    rep1 = quick_scan(threads=1)
    rep3 = quick_scan(threads=3)
    assert np.array_equal(rep1.translations, rep3.translations)
    assert np.array_equal(rep1.dimensions, rep3.dimensions)
    assert np.array_equal(rep1.components, rep3.components)
    assert rep1.coverage == rep3.coverage
    for a, b in zip(rep1.refined, rep3.refined):
        assert np.array_equal(a.points, b.points)


def test_density_coverage_monotone_under_grid_refinement():
    field = maximal_variation_field()
    coarse = density_scan(
        field, (50, 50), 30, 1e-9, refine_counts=(24, 24),
        probe_counts=(16, 16),
    )
    fine = density_scan(
        field, (100, 100), 30, 1e-9, refine_counts=(24, 24),
        probe_counts=(16, 16),
    )
    for s in coarse.coverage:
        assert fine.coverage[s] <= coarse.coverage[s] + 1e-12


def test_density_scan_requested_component_target():
    rep = quick_scan(targets=((0, 8),))
    stratum = rep.refined[0]
    assert stratum.requested_components == 8
    assert stratum.count > 0
    for row, c in zip(stratum.targets, stratum.components):
        assert all(v.denominator in (1, 2, 4, 8) for v in row)
        assert c in (1, 2, 4, 8)


def test_density_scan_validation():
    field = maximal_variation_field()
    with pytest.raises(ValueError):
        density_scan(field, (1, 50), 4, 1e-9)
    with pytest.raises(ValueError):
        density_scan(field, (8, 8), 4, 1e-9, targets=((2, None),),
                     refine_counts=(4, 4))


# ------------------------------------------------------------- group orbits


def test_unit_torus_family_shape():
    family = unit_torus_family(2)
    assert family.base_domain.lo == (0.0,) * 4
    assert family.base_domain.hi == (1.0,) * 4
    tau = family.tau_at(np.array([[0.3 + 0.4j, 0.1 + 0.9j]]))
    assert np.allclose(tau[0], 1j * np.eye(2))


def test_group_scan_generic_fields_fill():
    first, second = toy_group_fields()
    rep = group_orbit_scan(
        first, second, 1, 1, 100000, seed=3, n_starts=2
    )
    assert rep.filled == (True, True)
    assert min(rep.fill_fractions) >= 0.999
    assert all(s == 100000 for s in rep.orbit_sizes)


def test_group_scan_zero_fields_orbit_is_single_point():
    family = unit_torus_family(1)
    zero_f = TranslationField(
        family=family, kind="free", components=("0", "0")
    )
    zero_g = TranslationField(
        family=family, kind="free", components=("0", "0")
    )
    rep = group_orbit_scan(zero_f, zero_g, 1, 1, 1000, seed=5, n_starts=3)
    assert rep.orbit_sizes == (1, 1, 1)
    assert rep.filled == (False, False, False)
    # every point is fixed, so the fixed set covers the torus densely
    assert rep.fixed_cover < 0.05


def test_group_scan_fixed_sets_monotone_in_k():
    first, second = toy_group_fields()
    covers = []
    counts = []
    for k in (2, 4, 8):
        rep = group_orbit_scan(
            first, second, k, k, 200, seed=3, n_starts=1
        )
        covers.append(rep.fixed_cover)
        counts.append(
            (rep.fixed_first.shape[0], rep.fixed_second.shape[0])
        )
    assert covers[0] > covers[1] > covers[2]
    assert counts[0][0] < counts[1][0] < counts[2][0]
    assert counts[0][1] < counts[1][1] < counts[2][1]


def test_group_scan_fixed_sets_nest_as_k_divides():
    first, second = toy_group_fields()
    rep2 = group_orbit_scan(first, second, 2, 2, 100, seed=3, n_starts=1)
    rep4 = group_orbit_scan(first, second, 4, 4, 100, seed=3, n_starts=1)
    for p in rep2.fixed_first:
        d = np.abs(rep4.fixed_first - p)
        d = np.minimum(d, 1.0 - d)
        assert d.max(axis=1).min() < 1e-6


def test_group_scan_respects_iteration_cap():
    first, second = toy_group_fields()
    rep = group_orbit_scan(first, second, 1, 1, 777, seed=9, n_starts=2)
    assert all(s <= 777 for s in rep.orbit_sizes)


def test_group_scan_deterministic_for_seed():
    first, second = toy_group_fields()
    a = group_orbit_scan(first, second, 2, 2, 1500, seed=11, n_starts=2)
    b = group_orbit_scan(first, second, 2, 2, 1500, seed=11, n_starts=2)
    assert a.fill_fractions == b.fill_fractions
    assert np.array_equal(a.fixed_first, b.fixed_first)
    assert a.fixed_cover == b.fixed_cover


def test_group_scan_validation():
    first, second = toy_group_fields()
    with pytest.raises(ValueError):
        group_orbit_scan(first, second, 0, 1, 100, seed=1)
    with pytest.raises(ValueError):
        group_orbit_scan(first, second, 1, 1, 0, seed=1)
