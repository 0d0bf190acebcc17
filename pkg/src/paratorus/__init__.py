"""Lattice isometries, fibered-torus translation fields, and their orbits.

The package splits into a small exact core and a numeric layer on top of
it. `lattice` classifies integer isometries of quadratic lattices and
measures their norm growth; `orbits` describes closures of translation
orbits on tori both exactly and by sampling; `fibration` evaluates
period families and their translation fields; `volume` integrates graph
volumes and fits their growth; `scenario` and `runner` turn TOML
descriptions of these computations into reproducible runs, fronted by
the `paratorus` command line tool.

The names re-exported here are the stable surface. Submodules carry the
full detail and stay importable directly.
"""

from importlib import metadata as _metadata

from .errors import ParatorusError
from .fibration import (
    Box,
    HolomorphicSection,
    PeriodFamily,
    TranslationField,
    generic_rank,
    random_polynomial_family,
    translation_vector,
)
from .kernels import backend_name
from .lattice import (
    GramLattice,
    LatticeIsometry,
    PeriodPoint,
    classify_isometry,
    concavity_check,
    growth_exponent,
    growth_spectrum,
    ns_trichotomy,
    parameter_search,
    projectivity_parameter,
    sym_power,
)
from .orbits import (
    SQRT2,
    SQRT3,
    NamedConstant,
    algebraic_vector,
    density_scan,
    group_orbit_scan,
    orbit_closure,
    orbit_sample_oracle,
    resonance_detect,
    unit_torus_family,
)
from .runner import run_scenario
from .scenario import load_scenario, schema_description, validate_scenario
from .volume import (
    Quadrature,
    conjugacy_check,
    fit_growth,
    multisection,
    pushforward_volume,
    volume_series,
    zero_section,
)

try:
    __version__ = _metadata.version("paratorus")
except _metadata.PackageNotFoundError:  # running from a bare checkout
    __version__ = "0+unknown"

__all__ = [
    "Box",
    "GramLattice",
    "HolomorphicSection",
    "LatticeIsometry",
    "NamedConstant",
    "ParatorusError",
    "PeriodFamily",
    "PeriodPoint",
    "Quadrature",
    "SQRT2",
    "SQRT3",
    "TranslationField",
    "algebraic_vector",
    "backend_name",
    "classify_isometry",
    "concavity_check",
    "conjugacy_check",
    "density_scan",
    "fit_growth",
    "generic_rank",
    "group_orbit_scan",
    "growth_exponent",
    "growth_spectrum",
    "load_scenario",
    "multisection",
    "ns_trichotomy",
    "orbit_closure",
    "orbit_sample_oracle",
    "parameter_search",
    "projectivity_parameter",
    "pushforward_volume",
    "random_polynomial_family",
    "resonance_detect",
    "run_scenario",
    "schema_description",
    "sym_power",
    "translation_vector",
    "unit_torus_family",
    "validate_scenario",
    "volume_series",
    "zero_section",
    "__version__",
]
