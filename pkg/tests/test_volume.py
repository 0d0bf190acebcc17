"""Tests for graph volumes, growth fits, and the multiplication map.

Quadrature values are checked against closed forms: the flat graph has
volume equal to the box volume, the identity-Jacobian field gives
(1 + n^2) times the box volume exactly, and a linear branch gives a
constant integrand computable by hand. The canonical g = 1 field is
checked against the exact integral of |det Dt| = 1/y^3 over its box.
"""

import math

import numpy as np
import pytest

from conftest import maximal_variation_field
from paratorus.errors import (
    BaseMismatch,
    IllConditionedFit,
    InsufficientEntries,
    QuadratureDidNotConverge,
    StencilOutOfDomain,
)
from paratorus.fibration import (
    Box,
    HolomorphicSection,
    PeriodFamily,
    TranslationField,
    translation_vector,
)
from paratorus.orbits import unit_torus_family
from paratorus.volume import (
    FiberPoint,
    MultiplicationMap,
    Quadrature,
    VolumeSeries,
    apply_multiplication,
    conjugacy_check,
    fiber_add,
    fit_growth,
    multisection,
    pushforward_volume,
    volume_series,
    wedge_volume_integrand,
    zero_section,
)

# exact integral of |det Dt| = 1/y^3 over the canonical box
CANONICAL_LEADING = 0.46125


def zero_field():
    family = unit_torus_family(1)
    return TranslationField(family=family, kind="free", components=("0", "0"))


def identity_field():
    family = unit_torus_family(1)
    return TranslationField(
        family=family, kind="free", components=("x1", "x2")
    )


def degenerate_g2_field():
    family = PeriodFamily(
        g=2,
        base_domain=Box((0.1, 0.1, 0.1, 0.1), (0.9, 0.9, 0.9, 0.9)),
        tau=(("i", "0"), ("0", "i")),
    )
    section = HolomorphicSection(family=family, w=("u1", "0"))
    return TranslationField(
        family=family, kind="holomorphic", section=section
    )


# ---------------------------------------------------------------- integrand


def test_integrand_flat_graph_is_one():
    field = zero_field()
    for n in (0, 1, 7, 100):
        assert wedge_volume_integrand(field, None, n, (0.5, 0.5)) == 1.0


def test_integrand_identity_jacobian():
    field = identity_field()
    value = wedge_volume_integrand(field, None, 10, (0.5, 0.5))
    assert abs(value - 101.0) < 1e-6
    assert abs(wedge_volume_integrand(field, None, 3, (0.3, 0.7)) - 10.0) < 1e-6


def test_integrand_rank_deficient_growth():
    # two zero rows in Dt make the integrand grow like n^2, not n^4
    field = degenerate_g2_field()
    u = (0.5, 0.5, 0.5, 0.5)
    v100 = wedge_volume_integrand(field, None, 100, u)
    assert abs(v100 - (1 + 100 ** 2)) < 1e-3
    assert v100 / 100 ** 4 < 1e-3


def test_integrand_branch_contributes():
    field = zero_field()
    value = wedge_volume_integrand(
        field, ("0.25*x1", "0.1*x2"), 5, (0.5, 0.5)
    )
    expect = math.sqrt((1 + 0.0625) * (1 + 0.01))
    assert abs(value - expect) < 1e-6


def test_integrand_stencil_guard():
    field = maximal_variation_field()
    with pytest.raises(StencilOutOfDomain):
        wedge_volume_integrand(field, None, 3, (0.5, 0.8))


# ------------------------------------------------------------- multisection


def test_multisection_degree_and_validation():
    family = unit_torus_family(1)
    multi = multisection(
        family, [("0.25*x1", "0.1*x2"), ("0.5 + 0.25*x1", "0.1*x2")]
    )
    assert multi.degree == 2
    assert zero_section(family).degree == 1
    with pytest.raises(ValueError):
        multisection(family, [])
    with pytest.raises(ValueError):
        multisection(family, [("x7", "0")])
    with pytest.raises(ValueError):
        multisection(family, [("x1",)])


# -------------------------------------------------------------- pushforward


def test_pushforward_flat_section_volume_one():
    field = zero_field()
    multi = zero_section(field.family)
    quad = Quadrature(order=4, max_order=16)
    for n in (0, 1, 17):
        est = pushforward_volume(field, multi, n, quad)
        assert abs(est.volume - 1.0) < 1e-10
        assert est.error <= 1e-10


def test_pushforward_n_zero_is_box_volume():
    field = identity_field()
    est = pushforward_volume(
        field, zero_section(field.family), 0, Quadrature(order=4, max_order=16)
    )
    assert abs(est.volume - 1.0) < 1e-10


def test_pushforward_two_branches_analytic():
    family = unit_torus_family(1)
    field = zero_field()
    multi = multisection(
        family, [("0.25*x1", "0.1*x2"), ("0.5 + 0.25*x1", "0.1*x2")]
    )
    est = pushforward_volume(field, multi, 9, Quadrature(order=4, max_order=16))
    expect = 2 * math.sqrt((1 + 0.0625) * (1 + 0.01))
    assert abs(est.volume - expect) < 1e-9
    assert est.order >= 8


def test_pushforward_did_not_converge():
    field = maximal_variation_field()
    with pytest.raises(QuadratureDidNotConverge):
        pushforward_volume(
            field, zero_section(field.family), 4,
            Quadrature(order=4, rtol=1e-16, max_order=8),
        )


def test_quadrature_validation():
    with pytest.raises(ValueError):
        Quadrature(order=1)
    with pytest.raises(ValueError):
        Quadrature(order=8, max_order=8)
    with pytest.raises(ValueError):
        Quadrature(rtol=0.0)


# ------------------------------------------------------------------- series


def test_series_identity_field_exact():
    field = identity_field()
    ser = volume_series(
        field, zero_section(field.family), (1, 2, 4, 8, 16, 32, 64),
        Quadrature(order=4, max_order=32),
    )
    expect = [1 + n ** 2 for n in ser.iterates]
    assert np.allclose(ser.volumes, expect, rtol=1e-9)
    assert all(v > 0 for v in ser.volumes)
    assert len(ser.quadrature_error) == len(ser.iterates)
    rows = ser.csv_rows()
    assert rows[0] == (1, ser.volumes[0], ser.quadrature_error[0])


def test_series_validation():
    field = identity_field()
    with pytest.raises(ValueError):
        volume_series(field, zero_section(field.family), ())
    with pytest.raises(ValueError):
        volume_series(field, zero_section(field.family), (1, -2))


def test_series_thread_count_does_not_change_values():
    field = maximal_variation_field()
    multi = zero_section(field.family)
    a = volume_series(field, multi, (2, 8, 32), threads=1)
    b = volume_series(field, multi, (2, 8, 32), threads=3)
    assert a.volumes == b.volumes
    assert a.quadrature_error == b.quadrature_error


# ------------------------------------------------------------------ fitting


def constant_series():
    return VolumeSeries(
        iterates=(1, 2, 3, 4, 5, 6),
        volumes=(3.7,) * 6,
        quadrature_error=(0.0,) * 6,
    )


def test_fit_constant_series_degree_zero():
    fit = fit_growth(constant_series(), 3)
    assert fit.degree == 0
    assert abs(fit.leading_coefficient - 3.7) < 1e-9
    assert fit.residual < 1e-9


def test_fit_identity_series_degree_two():
    field = identity_field()
    ser = volume_series(
        field, zero_section(field.family), (1, 2, 4, 8, 16, 32, 64),
        Quadrature(order=4, max_order=32),
    )
    fit = fit_growth(ser, 3)
    assert fit.degree == 2
    assert abs(fit.leading_coefficient - 1.0) < 1e-6
    assert fit.record() == {
        "degree": 2,
        "leading_coefficient": fit.leading_coefficient,
        "residual": fit.residual,
    }


def test_fit_canonical_field_leading_coefficient():
    field = maximal_variation_field()
    ser = volume_series(
        field, zero_section(field.family), (1, 2, 4, 8, 16, 32, 64)
    )
    # cap the fit at the fiber dimension; the finite-n series carries a
    # genuine n^-2 tail that a cubic term would otherwise soak up
    fit = fit_growth(ser, 2)
    assert fit.degree == 2
    rel = abs(fit.leading_coefficient - CANONICAL_LEADING) / CANONICAL_LEADING
    assert rel < 0.02


def test_fit_degenerate_g2_degree_at_most_two():
    field = degenerate_g2_field()
    ser = volume_series(
        field, zero_section(field.family), (1, 2, 4, 8, 16, 32),
        Quadrature(order=4, max_order=16),
    )
    expect = [0.8 ** 4 * (1 + n ** 2) for n in ser.iterates]
    assert np.allclose(ser.volumes, expect, rtol=1e-8)
    fit = fit_growth(ser, 4)
    assert fit.degree == 2
    assert abs(fit.leading_coefficient - 0.8 ** 4) < 1e-6


def test_fit_validation():
    with pytest.raises(InsufficientEntries):
        fit_growth(constant_series(), 5)
    with pytest.raises(ValueError):
        fit_growth(constant_series(), -1)
    dup = VolumeSeries(
        iterates=(4,) * 6, volumes=(1.0,) * 6, quadrature_error=(0.0,) * 6
    )
    with pytest.raises(IllConditionedFit):
        fit_growth(dup, 3)
    flat_zero = VolumeSeries(
        iterates=(0, 0), volumes=(1.0, 1.0), quadrature_error=(0.0, 0.0)
    )
    with pytest.raises(ValueError):
        fit_growth(flat_zero, 0)


# ----------------------------------------------------------- multiplication


def test_apply_multiplication_examples():
    assert np.array_equal(
        apply_multiplication(MultiplicationMap(D=2), (0.5, 0.5)), (0.0, 0.0)
    )
    assert np.array_equal(
        apply_multiplication(MultiplicationMap(D=3), (1 / 3, 2 / 3)),
        (0.0, 0.0),
    )
    out = apply_multiplication(MultiplicationMap(D=2), (0.3, 0.7))
    assert np.allclose(out, (0.6, 0.4))
    batch = apply_multiplication(
        MultiplicationMap(D=2), [[0.1, 0.2], [0.6, 0.9]]
    )
    assert batch.shape == (2, 2)
    assert np.allclose(batch, [[0.2, 0.4], [0.2, 0.8]])


def test_multiplication_map_validation():
    with pytest.raises(ValueError):
        MultiplicationMap(D=1)


def test_conjugacy_zero_at_k_zero():
    field = maximal_variation_field()
    assert conjugacy_check(field, 2, 0, 20) == 0.0


def test_conjugacy_rational_quarter_translation():
    family = unit_torus_family(1)
    field = TranslationField(
        family=family, kind="free", components=("0.25", "0")
    )
    assert conjugacy_check(field, 2, 2, 10) == 0.0


def test_conjugacy_canonical_field_within_bound():
    field = maximal_variation_field()
    defect = conjugacy_check(field, 2, 6, 100)
    assert defect <= 1e-9 * 2 ** 6
    defect3 = conjugacy_check(field, 3, 3, 50)
    assert defect3 <= 1e-9 * 3 ** 3


def test_conjugacy_accepts_explicit_points():
    field = maximal_variation_field()
    pts = np.array([[0.1, 0.9], [-0.2, 1.1]])
    assert conjugacy_check(field, 2, 1, pts) <= 1e-12


def test_conjugacy_validation():
    field = maximal_variation_field()
    with pytest.raises(ValueError):
        conjugacy_check(field, 1, 2, 10)
    with pytest.raises(ValueError):
        conjugacy_check(field, 2, -1, 10)
    with pytest.raises(ValueError):
        conjugacy_check(field, 2, 30, 10)


# ------------------------------------------------------------------- fibers


def test_fiber_add_arithmetic():
    x = FiberPoint(base=(0.2, 0.9), value=(0.1, 0.2))
    y = FiberPoint(base=(0.2, 0.9), value=(0.5, 0.5))
    z = FiberPoint(base=(0.2, 0.9), value=(0.25, 0.25))
    s = fiber_add(x, y, z)
    assert np.allclose(s.value, (0.35, 0.45))
    assert s.base == x.base


def test_fiber_add_identity_is_exact():
    x = FiberPoint(base=(0.3,), value=(0.1, 0.7, 0.9))
    y = FiberPoint(base=(0.3,), value=(0.47, 0.31, 0.99))
    assert fiber_add(x, y, y).value == x.value


def test_fiber_add_round_trip():
    x = FiberPoint(base=(0.0,), value=(0.1, 0.6))
    y = FiberPoint(base=(0.0,), value=(0.7, 0.2))
    z = FiberPoint(base=(0.0,), value=(0.4, 0.95))
    back = fiber_add(fiber_add(x, y, z), z, y)
    gap = np.abs(np.array(back.value) - np.array(x.value))
    gap = np.minimum(gap, 1.0 - gap)
    assert gap.max() < 1e-12


def test_fiber_add_base_mismatch():
    x = FiberPoint(base=(0.2,), value=(0.1,))
    y = FiberPoint(base=(0.3,), value=(0.1,))
    with pytest.raises(BaseMismatch):
        fiber_add(x, y, y)
    z = FiberPoint(base=(0.2,), value=(0.1, 0.2))
    with pytest.raises(ValueError):
        fiber_add(x, x, z)


def test_fiber_point_reduces_mod_one():
    p = FiberPoint(base=(0.1,), value=(1.2, -0.25))
    assert np.allclose(p.value, (0.2, 0.75))


def test_translated_branch_equals_fiber_add_route():
    # pushing a branch with f^(D^k) agrees with adding the translated
    # origin section through the fiber group law
    field = maximal_variation_field()
    u = (0.3, 0.9)
    t = translation_vector(field, u)
    branch_value = np.array([0.25 * 0.3 + 0.5, 0.3 * 0.9]) % 1.0
    reps = 4
    translated_zero = np.zeros(2)
    expect = branch_value.copy()
    for _ in range(reps):
        translated_zero = (translated_zero + t) % 1.0
        expect = (expect + t) % 1.0
    s = FiberPoint(base=u, value=tuple(branch_value))
    moved = FiberPoint(base=u, value=tuple(translated_zero))
    origin = FiberPoint(base=u, value=(0.0, 0.0))
    out = fiber_add(s, moved, origin)
    gap = np.abs(np.array(out.value) - expect)
    gap = np.minimum(gap, 1.0 - gap)
    assert gap.max() < 1e-12
