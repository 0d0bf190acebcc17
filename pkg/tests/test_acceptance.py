"""Desk-scale end-to-end runs with independent oracles.

Each test exercises one headline behavior of the assembled package and
prints a single pass/fail line carrying the measured numbers, so a log
of this file reads as a checklist. Oracles never reuse the code path
under test: growth rates are checked against closed-form eigenvalues,
the canonical volume fit against a hand-computed integral, orbit
closures against box-counting statistics, the projectivity parameter
against exact Fraction pairings written out in the test body, and
determinism by byte comparison of serialized runs. Wall-clock budgets
are asserted where a behavior is only useful if it is fast.
"""

import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

from conftest import maximal_variation_field
from paratorus.fibration import (
    Box,
    HolomorphicSection,
    PeriodFamily,
    TranslationField,
    generic_rank,
    random_polynomial_family,
)
from paratorus.lattice import (
    GramLattice,
    LatticeIsometry,
    PeriodPoint,
    concavity_check,
    growth_exponent,
    growth_spectrum,
    parameter_search,
    projectivity_parameter,
    sym_power,
)
from paratorus.orbits import (
    SQRT2,
    SQRT3,
    algebraic_vector,
    density_scan,
    orbit_closure,
    orbit_sample_oracle,
)
from paratorus.runner import DATA_FILE, RESULT_FILE, run_scenario
from paratorus.scenario import load_scenario
from paratorus.volume import (
    Quadrature,
    conjugacy_check,
    fit_growth,
    volume_series,
    zero_section,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

PELL_RATE = 3.0 + 2.0 * 2.0 ** 0.5


def report(tag, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
    print(line)
    assert ok, line


def parabolic_isometry():
    lattice = GramLattice(gram=((0, 1, 0), (1, 0, 0), (0, 0, -2)))
    return LatticeIsometry(lattice, ((1, 1, 2), (0, 1, 0), (0, 1, 1)))


def pell_isometry():
    return LatticeIsometry(GramLattice(gram=((1, 0), (0, -2))), ((3, 4), (2, 3)))


def degenerate_g2_field():
    # Constant period with a section depending on one coordinate only:
    # the graph volume grows with degree 2, not the generic 2g = 4.
    family = PeriodFamily(
        g=2,
        base_domain=Box((0.1, 0.1, 0.1, 0.1), (0.9, 0.9, 0.9, 0.9)),
        tau=(("i", "0"), ("0", "i")),
    )
    section = HolomorphicSection(family=family, w=("u1", "0"))
    return TranslationField(family=family, kind="holomorphic", section=section)


# ------------------------------------------------------------------ growth


def test_01_parabolic_norm_growth_is_quadratic():
    start = time.perf_counter()
    fit = growth_exponent(parabolic_isometry(), "polynomial")
    elapsed = time.perf_counter() - start
    scaled = {n: norm / n ** 2 for n, norm in zip(fit.schedule, fit.norms)}
    gap = abs(scaled[2048] - scaled[4096]) / scaled[4096]
    ok = 1.95 <= fit.exponent <= 2.05 and gap <= 0.10 and elapsed < 5.0
    report(
        "acceptance 01 quadratic norm growth",
        ok,
        f"exponent={fit.exponent:.4f}, scaled-norm gap at n=2048 vs 4096 "
        f"{gap:.2%}, {elapsed:.2f}s",
    )


def test_02_symmetric_power_exponents_double():
    start = time.perf_counter()
    spectrum = growth_spectrum(parabolic_isometry(), 3, "polynomial")
    elapsed = time.perf_counter() - start
    errors = [abs(spectrum.values[p] - 2 * p) for p in (1, 2, 3)]
    ok = max(errors) <= 0.1 and elapsed < 30.0
    report(
        "acceptance 02 symmetric power exponents",
        ok,
        "exponents "
        + ", ".join(f"p={p}: {spectrum.values[p]:.3f}" for p in (1, 2, 3))
        + f", max |value - 2p| = {max(errors):.3f}, {elapsed:.1f}s",
    )


def test_03_hyperbolic_rates_match_eigenvalues():
    # The matrix [[3, 4], [2, 3]] has spectral radius 3 + 2*sqrt(2); its
    # induced map on degree-two symmetric tensors squares it.
    base = growth_exponent(pell_isometry(), "exponential")
    sym2 = growth_exponent(sym_power(pell_isometry(), 2), "exponential")
    base_err = abs(base.rate - PELL_RATE)
    sym2_err = abs(sym2.rate - PELL_RATE ** 2)
    ok = base_err <= 1e-6 and sym2_err <= 1e-4
    report(
        "acceptance 03 hyperbolic growth rates",
        ok,
        f"rate={base.rate:.10f} (err {base_err:.2e} vs 3+2*sqrt(2)), "
        f"squared rate={sym2.rate:.7f} (err {sym2_err:.2e})",
    )


def test_04_growth_spectra_are_concave():
    polynomial = growth_spectrum(parabolic_isometry(), 3, "polynomial")
    exponential = growth_spectrum(pell_isometry(), 2, "exponential")
    first = concavity_check(polynomial, 0.1)
    second = concavity_check(exponential, 0.1)
    ok = first.ok and second.ok
    report(
        "acceptance 04 spectrum concavity",
        ok,
        f"polynomial violations={list(first.violations)}, "
        f"exponential violations={list(second.violations)}",
    )


# ------------------------------------------------------------------- rank


def test_05_random_fields_have_even_rank():
    start = time.perf_counter()
    ranks = Counter()
    odd = []
    for g in (1, 2):
        for seed in range(50):
            field = random_polynomial_family(seed, g)
            rep = generic_rank(field, 6, 11)
            ranks[(g, rep.rank)] += 1
            if rep.rank % 2:
                odd.append((g, seed, rep.rank))
    elapsed = time.perf_counter() - start
    ok = not odd and elapsed < 60.0
    report(
        "acceptance 05 even generic rank",
        ok,
        f"100 sampled fields, rank counts by (g, rank): {dict(sorted(ranks.items()))}, "
        f"odd ranks: {odd}, {elapsed:.1f}s",
    )


# ------------------------------------------------------------------ orbits


def orbit_suite():
    """Fifty exact vectors on the 2-torus with denominators at most 12.

    Twenty have finite orbits, fifteen close up to parallel circles (one
    declared constant), fifteen equidistribute (two constants). Orbit
    coordinates avoid exact multiples of 1/5 and 1/10 away from dyadics:
    those land on box boundaries at the sampling scales 100/50/25 where
    rounding decides the cell, and no counting oracle is stable there.
    """
    finite = [
        (0, 1, 0, 1), (1, 2, 0, 1), (1, 2, 1, 3), (1, 4, 1, 2), (2, 3, 1, 5),
        (1, 6, 5, 6), (3, 4, 2, 3), (1, 5, 3, 10), (5, 12, 7, 12), (1, 2, 1, 2),
        (1, 3, 1, 4), (1, 11, 1, 12), (7, 8, 3, 8), (2, 9, 4, 9), (1, 7, 5, 9),
        (5, 6, 1, 7), (3, 7, 2, 7), (11, 12, 1, 3), (1, 8, 5, 12), (4, 5, 7, 9),
    ]
    # (axis, a, b, p, q): drift (a/b) * sqrt(2) on one coordinate, the
    # other pinned to p/q, so the closure is q / gcd(p, q) circles.
    lines = [
        (0, 1, 1, 0, 1), (0, 1, 2, 1, 2), (0, 1, 3, 1, 3), (0, 2, 3, 3, 4),
        (0, 1, 4, 5, 6), (0, 3, 4, 7, 12), (0, 5, 6, 1, 1), (1, 1, 1, 1, 2),
        (1, 1, 2, 2, 3), (1, 2, 5, 3, 5), (1, 1, 6, 5, 8), (1, 5, 12, 1, 4),
        (1, 7, 10, 9, 10), (1, 1, 12, 11, 12), (0, 11, 12, 1, 6),
    ]
    # (a, b, c, d): sqrt(2) drift a/b on the first coordinate, sqrt(3)
    # drift c/d on the second; no integer relation survives.
    dense = [
        (1, 1, 1, 1), (1, 2, 1, 3), (2, 3, 3, 4), (1, 4, 5, 6), (3, 5, 1, 2),
        (5, 6, 2, 7), (1, 7, 3, 8), (7, 8, 1, 9), (2, 9, 9, 10), (3, 10, 1, 11),
        (5, 11, 5, 12), (7, 12, 1, 1), (1, 3, 2, 5), (4, 7, 3, 11), (11, 12, 7, 9),
    ]
    vectors = []
    for p1, q1, p2, q2 in finite:
        vectors.append(algebraic_vector((Fraction(p1, q1), Fraction(p2, q2))))
    for axis, a, b, p, q in lines:
        rational = [Fraction(0), Fraction(0)]
        rational[1 - axis] = Fraction(p, q)
        row = [Fraction(0), Fraction(0)]
        row[axis] = Fraction(a, b)
        vectors.append(algebraic_vector(tuple(rational), (tuple(row),), (SQRT2,)))
    for a, b, c, d in dense:
        vectors.append(algebraic_vector(
            (Fraction(1, 2), Fraction(1, 3)),
            ((Fraction(a, b), Fraction(0)), (Fraction(0), Fraction(c, d))),
            (SQRT2, SQRT3),
        ))
    return vectors


def test_06_orbit_closures_match_sampling_oracle():
    vectors = orbit_suite()
    assert len(vectors) == 50
    disagreements = []
    for i, vector in enumerate(vectors):
        closure = orbit_closure(vector)
        estimate = orbit_sample_oracle(vector, n_points=200000)
        exact = (closure.dimension, closure.components)
        sampled = (estimate.dimension, estimate.components)
        if estimate.inconclusive or exact != sampled:
            disagreements.append((i, exact, sampled, estimate.inconclusive))
    ok = not disagreements
    report(
        "acceptance 06 closure vs sampling oracle",
        ok,
        f"{50 - len(disagreements)}/50 agree "
        f"(20 finite, 15 circle families, 15 dense), "
        f"disagreements: {disagreements}",
    )


def test_07_density_scan_covers_and_certifies():
    start = time.perf_counter()
    scan = density_scan(
        maximal_variation_field(),
        (200, 200),
        30,
        1e-9,
        targets=((0, None), (1, None)),
    )
    elapsed = time.perf_counter() - start
    radii = {s: scan.coverage.get(s) for s in (0, 1, 2)}
    covered = all(r is not None and r <= 0.05 for r in radii.values())
    certified = {
        stratum.requested_dimension: stratum.count for stratum in scan.refined
    }
    refined_ok = certified.get(0, 0) >= 1 and certified.get(1, 0) >= 1
    ok = covered and refined_ok and elapsed < 300.0
    report(
        "acceptance 07 stratum coverage and certification",
        ok,
        "covering radii "
        + ", ".join(f"s={s}: {r:.4f}" for s, r in sorted(radii.items()))
        + f", certified representatives {certified}, {elapsed:.1f}s",
    )


# ----------------------------------------------------------------- volumes


def test_08_volume_growth_fits():
    # Exact leading coefficient for the canonical field: the reduced
    # translation is t(x, y) = (-x/y, 1/y) with |det Dt| = 1/y^3, so the
    # integral over x in (-1/2, 1/2), y in (4/5, 5/4) is
    # (1/2) (0.8^-2 - 1.25^-2) = 0.46125.
    exact_leading = 0.46125
    start = time.perf_counter()
    canonical = volume_series(
        maximal_variation_field(),
        zero_section(maximal_variation_field().family),
        (1, 2, 4, 8, 16, 32, 64),
    )
    canonical_fit = fit_growth(canonical, 2)
    degenerate = degenerate_g2_field()
    flat = volume_series(
        degenerate,
        zero_section(degenerate.family),
        (1, 2, 4, 8, 16, 32),
        Quadrature(order=4, max_order=16),
    )
    flat_fit = fit_growth(flat, 4)
    elapsed = time.perf_counter() - start
    rel = abs(canonical_fit.leading_coefficient - exact_leading) / exact_leading
    ok = (
        canonical_fit.degree == 2
        and rel <= 0.02
        and flat_fit.degree <= 2
        and elapsed < 300.0
    )
    report(
        "acceptance 08 volume growth fits",
        ok,
        f"canonical leading={canonical_fit.leading_coefficient:.6f} "
        f"(err {rel:.2%} vs exact 0.46125, degree {canonical_fit.degree}), "
        f"degenerate g=2 degree={flat_fit.degree}, {elapsed:.1f}s",
    )


def test_09_multiplication_conjugacy_defect_is_tiny():
    field = maximal_variation_field()
    defects = [conjugacy_check(field, 2, k, 100) for k in range(7)]
    worst = max(defects)
    ok = worst <= 1e-7
    report(
        "acceptance 09 multiplication conjugacy",
        ok,
        f"max defect over k=0..6 at doubling: {worst:.2e}",
    )


# ------------------------------------------------------------ projectivity


def test_10_projectivity_parameter_is_exact():
    gram = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, -1))
    sigma_re = (1, 0, 0, 0)
    sigma_im = (0, 1, 0, 0)
    h = (0, 0, 1, 1)
    a = (1, 0, 2, 0)
    period = PeriodPoint(GramLattice(gram=gram), sigma_re, sigma_im, h)
    result = projectivity_parameter(period, a)

    # Independent oracle: the diagonal pairing summed by hand in exact
    # arithmetic. q(a, h) = 2 and q(a, sigma_re) = 1 force t = -1/2, and
    # the twisted pairing must vanish identically.
    def pair(u, v):
        return sum(Fraction(gram[i][i]) * u[i] * v[i] for i in range(4))

    t_expected = -pair(a, sigma_re) / pair(a, h)
    twisted_re = pair(a, sigma_re) + t_expected * pair(a, h)
    twisted_im = pair(a, sigma_im) + Fraction(0) * pair(a, h)
    hits = parameter_search(period, 1, 3)
    found = any(hit == a for hit, _ in hits)
    ok = (
        result.t_re == Fraction(-1, 2)
        and result.t_re == t_expected
        and result.t_im == 0
        and twisted_re == 0
        and twisted_im == 0
        and result.q_a_a == 5
        and result.is_projective
        and found
    )
    report(
        "acceptance 10 exact projectivity parameter",
        ok,
        f"t = {result.t_re} + {result.t_im} i, q(a, a) = {result.q_a_a}, "
        f"projective={result.is_projective}, search at height 3 returned "
        f"{len(hits)} classes, includes a={a}: {found}",
    )


# ------------------------------------------------------------ determinism


def test_11_runs_are_byte_identical_across_threads(tmp_path):
    names = (
        "betti_rank_g2",
        "orbit_half_third",
        "density_maximal",
        "volume_maximal",
        "volume_degenerate",
        "conjugacy_doubling",
    )
    mismatches = []
    for name in names:
        scenario = load_scenario(SCENARIO_DIR / f"{name}.toml")
        outputs = {}
        for threads in (1, 4, 8):
            out = tmp_path / f"{name}-t{threads}"
            run_scenario(scenario, out, threads=threads)
            data = out / DATA_FILE
            outputs[threads] = (
                (out / RESULT_FILE).read_bytes(),
                data.read_bytes() if data.exists() else b"",
            )
        for threads in (4, 8):
            if outputs[threads] != outputs[1]:
                mismatches.append((name, threads))
    ok = not mismatches
    report(
        "acceptance 11 thread determinism",
        ok,
        f"{len(names)} scenarios x threads 1/4/8, byte-compared "
        f"result and data files, mismatches: {mismatches}",
    )
