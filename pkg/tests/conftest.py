"""Shared constructions for the test suite.

The maximal-variation family is the workhorse example: over the strip
box the period is the coordinate itself and the section is the constant
i, so the reduced translation vector is t(x, y) = (-x/y, 1/y) mod 1 with
Jacobian determinant -1/y^3, bounded away from zero on the box. The toy
group fields are periodic free fields on the unit torus tuned so that the
k = l = 1 word ball fills the product torus at eps = 0.05.
"""

from paratorus.fibration import (
    Box,
    HolomorphicSection,
    PeriodFamily,
    TranslationField,
)
from paratorus.orbits import unit_torus_family

TWO_PI = "6.283185307179586"


def cos2pi(v):
    return f"(0.5*exp(i*{TWO_PI}*({v})) + 0.5*exp(-1*i*{TWO_PI}*({v})))"


def sin2pi(v):
    return f"(-0.5)*i*(exp(i*{TWO_PI}*({v})) - exp(-1*i*{TWO_PI}*({v})))"


def maximal_variation_family():
    return PeriodFamily(
        g=1, base_domain=Box((-0.5, 0.8), (0.5, 1.25)), tau=(("u1",),)
    )


def maximal_variation_field():
    family = maximal_variation_family()
    section = HolomorphicSection(family=family, w=("i",))
    return TranslationField(family=family, kind="holomorphic", section=section)


def toy_group_fields():
    family = unit_torus_family(1)
    first = TranslationField(family=family, kind="free", components=(
        f"0.61803398875 + 0.3*{cos2pi('x1')} + 0.11*{cos2pi('x2')}",
        f"0.5 + 0.3*{sin2pi('x1 + x2')}",
    ))
    second = TranslationField(family=family, kind="free", components=(
        f"0.31830988618 + 0.3*{cos2pi('x2')} + 0.13*{cos2pi('x1')}",
        f"0.5 + 0.3*{sin2pi('x1 - 1*x2')}",
    ))
    return first, second
