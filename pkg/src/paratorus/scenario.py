"""Declarative experiment scenarios.

A scenario is a TOML table with four top-level fields: a name, one of the
nine registered kinds, an `inputs` table describing the mathematical
objects, and a `parameters` table of tunables. Validation is strict by
default: unknown fields are errors, every reported problem carries the
dotted path of the offending field, and exact numeric slots accept only
integers or fraction strings like "-1/2" (floats would silently lose the
exactness the downstream code relies on). Domain objects are constructed
eagerly during validation so that semantic defects (a non-symmetric Gram
matrix, a non-isometry, a degenerate period) surface as validation
failures at the field that caused them, not as late computation errors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import tomli

from .errors import ParatorusError, ScenarioError
from .fibration import (
    Box,
    HolomorphicSection,
    PeriodFamily,
    TranslationField,
    random_polynomial_family,
)
from .lattice import GramLattice, LatticeIsometry, PeriodPoint
from .orbits import (
    SQRT2,
    SQRT3,
    AlgebraicVector,
    NamedConstant,
    unit_torus_family,
)
from .volume import Quadrature, multisection, zero_section

SCENARIO_KINDS = (
    "classify",
    "growth",
    "betti-rank",
    "orbit",
    "density",
    "volume",
    "conjugacy",
    "group-orbit",
    "projectivity",
)

GROWTH_MODES = ("polynomial", "exponential")

# Constants that may be named in a scenario without a decimal expansion.
BUILTIN_CONSTANTS = {SQRT2.name: SQRT2, SQRT3.name: SQRT3}


@dataclass(frozen=True)
class Scenario:
    """A validated scenario: raw tables plus the constructed objects.

    `inputs` and `parameters` keep the raw TOML values (they are what a
    run record hashes and reports); `payload` holds the domain objects
    and resolved defaults the runner dispatches on.
    """

    name: str
    kind: str
    inputs: dict
    parameters: dict
    payload: dict


def _fail(path, message):
    raise ScenarioError(path, message)


def _check_keys(table, allowed, path, strict):
    for key in table:
        if key in allowed:
            continue
        if allowed:
            note = (
                "unknown field (expected one of: "
                f"{', '.join(sorted(allowed))})"
            )
        else:
            note = "unknown field (this table takes none)"
        if strict:
            _fail(f"{path}.{key}" if path else key, note)
        warnings.warn(f"{path + '.' if path else ''}{key}: {note}")


def _table(value, path):
    if not isinstance(value, dict):
        _fail(path, f"expected a table, got {type(value).__name__}")
    return value


def _string(value, path):
    if not isinstance(value, str):
        _fail(path, f"expected a string, got {type(value).__name__}")
    return value


def _integer(value, path, minimum=None):
    # bool is an int subclass; a bare `true` in an integer slot is a typo.
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        _fail(path, f"must be at least {minimum}, got {value}")
    return value


def _number(value, path, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    out = float(value)
    if positive and out <= 0:
        _fail(path, f"must be positive, got {value}")
    return out


def _boolean(value, path):
    if not isinstance(value, bool):
        _fail(path, f"expected a boolean, got {type(value).__name__}")
    return value


def _fraction(value, path):
    """Exact slot: an int or a fraction string. Floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        _fail(path, "exact values must be integers or strings like \"p/q\"")
    if not isinstance(value, (int, str)):
        _fail(path, f"expected an exact value, got {type(value).__name__}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        _fail(path, f"not a valid fraction: {exc}")


def _list(value, path, length=None):
    if not isinstance(value, list):
        _fail(path, f"expected an array, got {type(value).__name__}")
    if length is not None and len(value) != length:
        _fail(path, f"expected {length} entries, got {len(value)}")
    return value


def _int_list(value, path, length=None, minimum=None):
    return [
        _integer(v, f"{path}[{i}]", minimum=minimum)
        for i, v in enumerate(_list(value, path, length))
    ]


def _number_list(value, path, length=None):
    return [
        _number(v, f"{path}[{i}]")
        for i, v in enumerate(_list(value, path, length))
    ]


def _string_list(value, path, length=None):
    return [
        _string(v, f"{path}[{i}]")
        for i, v in enumerate(_list(value, path, length))
    ]


def _fraction_list(value, path, length=None):
    return [
        _fraction(v, f"{path}[{i}]")
        for i, v in enumerate(_list(value, path, length))
    ]


def _int_matrix(value, path, square=False):
    rows = _list(value, path)
    if not rows:
        _fail(path, "matrix must be nonempty")
    width = None
    out = []
    for i, row in enumerate(rows):
        entries = _int_list(row, f"{path}[{i}]")
        if width is None:
            width = len(entries)
        elif len(entries) != width:
            _fail(f"{path}[{i}]", f"expected {width} entries, got {len(entries)}")
        out.append(tuple(entries))
    if square and len(out) != width:
        _fail(path, f"expected a square matrix, got {len(out)} x {width}")
    return tuple(out)


def _build(ctor, path, *args, **kwargs):
    """Run a domain constructor, pinning its failures to a field path."""
    try:
        return ctor(*args, **kwargs)
    except ScenarioError:
        raise
    except (ValueError, TypeError, ParatorusError) as exc:
        _fail(path, str(exc))


# ---------------------------------------------------------------------------
# Shared input blocks.


def _lattice_isometry(inputs, strict, extra_keys=()):
    allowed = {"gram", "matrix", *extra_keys}
    _check_keys(inputs, allowed, "inputs", strict)
    if "gram" not in inputs:
        _fail("inputs.gram", "required field is missing")
    if "matrix" not in inputs:
        _fail("inputs.matrix", "required field is missing")
    gram = _int_matrix(inputs["gram"], "inputs.gram", square=True)
    matrix = _int_matrix(inputs["matrix"], "inputs.matrix", square=True)
    lattice = _build(GramLattice, "inputs.gram", gram)
    iso = _build(LatticeIsometry, "inputs.matrix", lattice, matrix)
    return iso


def _family(table, path, strict):
    table = _table(table, path)
    _check_keys(table, {"g", "box_lo", "box_hi", "tau"}, path, strict)
    for key in ("g", "box_lo", "box_hi", "tau"):
        if key not in table:
            _fail(f"{path}.{key}", "required field is missing")
    g = _integer(table["g"], f"{path}.g", minimum=1)
    lo = _number_list(table["box_lo"], f"{path}.box_lo", length=2 * g)
    hi = _number_list(table["box_hi"], f"{path}.box_hi", length=2 * g)
    box = _build(Box, f"{path}.box_lo", tuple(lo), tuple(hi))
    rows = _list(table["tau"], f"{path}.tau", length=g)
    tau = tuple(
        tuple(_string_list(row, f"{path}.tau[{i}]", length=g))
        for i, row in enumerate(rows)
    )
    return _build(PeriodFamily, f"{path}.tau", g=g, base_domain=box, tau=tau)


def _field(table, path, family, strict):
    table = _table(table, path)
    _check_keys(
        table, {"kind", "w", "components", "basis_change"}, path, strict
    )
    if "kind" not in table:
        _fail(f"{path}.kind", "required field is missing")
    kind = _string(table["kind"], f"{path}.kind")
    if kind not in ("holomorphic", "free"):
        _fail(f"{path}.kind", f"must be \"holomorphic\" or \"free\", got {kind!r}")
    basis_change = None
    if "basis_change" in table:
        basis_change = _int_matrix(
            table["basis_change"], f"{path}.basis_change", square=True
        )
    if kind == "holomorphic":
        if "components" in table:
            _fail(f"{path}.components", "holomorphic fields take w, not components")
        if "w" not in table:
            _fail(f"{path}.w", "required field is missing")
        w = _string_list(table["w"], f"{path}.w", length=family.g)
        section = _build(
            HolomorphicSection, f"{path}.w", family=family, w=tuple(w)
        )
        return _build(
            TranslationField,
            path,
            family=family,
            kind="holomorphic",
            section=section,
            basis_change=basis_change,
        )
    if "w" in table:
        _fail(f"{path}.w", "free fields take components, not w")
    if "components" not in table:
        _fail(f"{path}.components", "required field is missing")
    comps = _string_list(
        table["components"], f"{path}.components", length=2 * family.g
    )
    return _build(
        TranslationField,
        path,
        family=family,
        kind="free",
        components=tuple(comps),
        basis_change=basis_change,
    )


def _family_and_field(inputs, strict):
    _check_keys(inputs, {"family", "field"}, "inputs", strict)
    if "family" not in inputs:
        _fail("inputs.family", "required field is missing")
    if "field" not in inputs:
        _fail("inputs.field", "required field is missing")
    family = _family(inputs["family"], "inputs.family", strict)
    field = _field(inputs["field"], "inputs.field", family, strict)
    return family, field


# ---------------------------------------------------------------------------
# Per-kind validators. Each returns the resolved payload dict.


def _validate_classify(inputs, parameters, strict):
    iso = _lattice_isometry(inputs, strict, extra_keys={"invariant_sublattice"})
    sub = None
    if "invariant_sublattice" in inputs:
        sub = _int_matrix(
            inputs["invariant_sublattice"], "inputs.invariant_sublattice"
        )
        if len(sub[0]) != len(iso.matrix):
            _fail(
                "inputs.invariant_sublattice",
                f"rows must have length {len(iso.matrix)}, got {len(sub[0])}",
            )
    _check_keys(parameters, set(), "parameters", strict)
    return {"iso": iso, "invariant_sublattice": sub}


def _validate_growth(inputs, parameters, strict):
    iso = _lattice_isometry(inputs, strict)
    allowed = {
        "mode", "schedule", "power", "spectrum_p_max", "concavity_tolerance",
    }
    _check_keys(parameters, allowed, "parameters", strict)
    if "mode" not in parameters:
        _fail("parameters.mode", "required field is missing")
    mode = _string(parameters["mode"], "parameters.mode")
    if mode not in GROWTH_MODES:
        _fail(
            "parameters.mode",
            f"must be one of {', '.join(GROWTH_MODES)}, got {mode!r}",
        )
    schedule = None
    if "schedule" in parameters:
        schedule = tuple(
            _int_list(parameters["schedule"], "parameters.schedule", minimum=1)
        )
        if len(schedule) < 4:
            _fail("parameters.schedule", "needs at least four entries")
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            _fail("parameters.schedule", "entries must be strictly increasing")
    spectrum_p_max = None
    if "spectrum_p_max" in parameters:
        spectrum_p_max = _integer(
            parameters["spectrum_p_max"], "parameters.spectrum_p_max", minimum=1
        )
    power = 1
    if "power" in parameters:
        if spectrum_p_max is not None:
            _fail(
                "parameters.power",
                "power and spectrum_p_max are mutually exclusive",
            )
        power = _integer(parameters["power"], "parameters.power", minimum=1)
    tolerance = 0.1
    if "concavity_tolerance" in parameters:
        if spectrum_p_max is None:
            _fail(
                "parameters.concavity_tolerance",
                "only meaningful together with spectrum_p_max",
            )
        tolerance = _number(
            parameters["concavity_tolerance"],
            "parameters.concavity_tolerance",
            positive=True,
        )
    return {
        "iso": iso,
        "mode": mode,
        "schedule": schedule,
        "power": power,
        "spectrum_p_max": spectrum_p_max,
        "concavity_tolerance": tolerance,
    }


def _validate_betti_rank(inputs, parameters, strict):
    if "random" in inputs:
        _check_keys(inputs, {"random"}, "inputs", strict)
        table = _table(inputs["random"], "inputs.random")
        _check_keys(
            table,
            {"seed", "g", "degree", "perturbation"},
            "inputs.random",
            strict,
        )
        for key in ("seed", "g"):
            if key not in table:
                _fail(f"inputs.random.{key}", "required field is missing")
        seed = _integer(table["seed"], "inputs.random.seed", minimum=0)
        g = _integer(table["g"], "inputs.random.g", minimum=1)
        degree = _integer(
            table.get("degree", 3), "inputs.random.degree", minimum=1
        )
        perturbation = _number(
            table.get("perturbation", 0.05),
            "inputs.random.perturbation",
            positive=True,
        )
        field = _build(
            random_polynomial_family,
            "inputs.random",
            seed,
            g,
            degree=degree,
            perturbation=perturbation,
        )
    elif "family" in inputs or "field" in inputs:
        _, field = _family_and_field(inputs, strict)
    else:
        _fail("inputs", "needs either a random table or family plus field")
    _check_keys(
        parameters, {"samples", "seed", "rank_tol"}, "parameters", strict
    )
    samples = _integer(parameters.get("samples", 8), "parameters.samples", minimum=1)
    seed = _integer(parameters.get("seed", 11), "parameters.seed", minimum=0)
    rank_tol = None
    if "rank_tol" in parameters:
        rank_tol = _number(
            parameters["rank_tol"], "parameters.rank_tol", positive=True
        )
    return {
        "field": field,
        "samples": samples,
        "seed": seed,
        "rank_tol": rank_tol,
    }


def _validate_orbit(inputs, parameters, strict):
    _check_keys(inputs, {"vector"}, "inputs", strict)
    if "vector" not in inputs:
        _fail("inputs.vector", "required field is missing")
    table = _table(inputs["vector"], "inputs.vector")
    _check_keys(
        table, {"rational", "irrational", "constants"}, "inputs.vector", strict
    )
    if "rational" not in table:
        _fail("inputs.vector.rational", "required field is missing")
    rational = _fraction_list(table["rational"], "inputs.vector.rational")
    dim = len(rational)
    if dim == 0:
        _fail("inputs.vector.rational", "needs at least one entry")
    irrational = []
    if "irrational" in table:
        rows = _list(table["irrational"], "inputs.vector.irrational")
        irrational = [
            _fraction_list(row, f"inputs.vector.irrational[{i}]", length=dim)
            for i, row in enumerate(rows)
        ]
    constants = []
    if "constants" in table:
        entries = _list(table["constants"], "inputs.vector.constants")
        for i, entry in enumerate(entries):
            path = f"inputs.vector.constants[{i}]"
            entry = _table(entry, path)
            _check_keys(entry, {"name", "decimal"}, path, strict)
            if "name" not in entry:
                _fail(f"{path}.name", "required field is missing")
            name = _string(entry["name"], f"{path}.name")
            if "decimal" in entry:
                decimal = _string(entry["decimal"], f"{path}.decimal")
                constants.append(_build(NamedConstant, path, name, decimal))
            elif name in BUILTIN_CONSTANTS:
                constants.append(BUILTIN_CONSTANTS[name])
            else:
                _fail(
                    f"{path}.decimal",
                    f"required for constants other than "
                    f"{', '.join(sorted(BUILTIN_CONSTANTS))}",
                )
    if len(irrational) != len(constants):
        _fail(
            "inputs.vector.irrational",
            f"got {len(irrational)} irrational rows for "
            f"{len(constants)} constants",
        )
    coeffs = (tuple(rational),) + tuple(tuple(r) for r in irrational)
    vector = _build(
        AlgebraicVector, "inputs.vector", coeffs, tuple(constants)
    )
    _check_keys(
        parameters, {"oracle", "n_points", "cluster_tol"}, "parameters", strict
    )
    oracle = _boolean(parameters.get("oracle", True), "parameters.oracle")
    n_points = _integer(
        parameters.get("n_points", 100000), "parameters.n_points", minimum=1000
    )
    cluster_tol = _number(
        parameters.get("cluster_tol", 0.02),
        "parameters.cluster_tol",
        positive=True,
    )
    return {
        "vector": vector,
        "oracle": oracle,
        "n_points": n_points,
        "cluster_tol": cluster_tol,
    }


def _validate_density(inputs, parameters, strict):
    family, field = _family_and_field(inputs, strict)
    allowed = {
        "grid", "max_height", "tol", "refine", "refine_counts",
        "denominator_bound", "newton_steps", "certify_tol", "probe_counts",
        "targets",
    }
    _check_keys(parameters, allowed, "parameters", strict)
    for key in ("grid", "max_height", "tol"):
        if key not in parameters:
            _fail(f"parameters.{key}", "required field is missing")
    dim = 2 * family.g
    grid = parameters["grid"]
    if isinstance(grid, list):
        grid_counts = tuple(
            _int_list(grid, "parameters.grid", length=dim, minimum=2)
        )
    else:
        grid_counts = (_integer(grid, "parameters.grid", minimum=2),) * dim
    max_height = _integer(
        parameters["max_height"], "parameters.max_height", minimum=1
    )
    tol = _number(parameters["tol"], "parameters.tol", positive=True)
    refine = _boolean(parameters.get("refine", True), "parameters.refine")
    refine_counts = None
    if "refine_counts" in parameters:
        refine_counts = tuple(
            _int_list(
                parameters["refine_counts"],
                "parameters.refine_counts",
                length=dim,
                minimum=1,
            )
        )
    denominator_bound = None
    if "denominator_bound" in parameters:
        denominator_bound = _integer(
            parameters["denominator_bound"],
            "parameters.denominator_bound",
            minimum=1,
        )
    newton_steps = _integer(
        parameters.get("newton_steps", 10), "parameters.newton_steps", minimum=1
    )
    certify_tol = _number(
        parameters.get("certify_tol", 1e-12),
        "parameters.certify_tol",
        positive=True,
    )
    probe_counts = None
    if "probe_counts" in parameters:
        probe_counts = tuple(
            _int_list(
                parameters["probe_counts"],
                "parameters.probe_counts",
                length=dim,
                minimum=1,
            )
        )
    targets = None
    if "targets" in parameters:
        rows = _list(parameters["targets"], "parameters.targets")
        targets = []
        for i, row in enumerate(rows):
            path = f"parameters.targets[{i}]"
            row = _table(row, path)
            _check_keys(row, {"dimension", "components"}, path, strict)
            if "dimension" not in row:
                _fail(f"{path}.dimension", "required field is missing")
            r = _integer(row["dimension"], f"{path}.dimension", minimum=0)
            if r >= dim:
                _fail(
                    f"{path}.dimension",
                    f"must be below the torus dimension {dim}, got {r}",
                )
            c = None
            if "components" in row:
                c = _integer(row["components"], f"{path}.components", minimum=1)
            targets.append((r, c))
        targets = tuple(targets)
    return {
        "family": family,
        "field": field,
        "grid_counts": grid_counts,
        "max_height": max_height,
        "tol": tol,
        "refine": refine,
        "refine_counts": refine_counts,
        "denominator_bound": denominator_bound,
        "newton_steps": newton_steps,
        "certify_tol": certify_tol,
        "probe_counts": probe_counts,
        "targets": targets,
    }


def _validate_volume(inputs, parameters, strict):
    _check_keys(inputs, {"family", "field", "multisection"}, "inputs", strict)
    if "family" not in inputs:
        _fail("inputs.family", "required field is missing")
    if "field" not in inputs:
        _fail("inputs.field", "required field is missing")
    family = _family(inputs["family"], "inputs.family", strict)
    field = _field(inputs["field"], "inputs.field", family, strict)
    if "multisection" in inputs:
        table = _table(inputs["multisection"], "inputs.multisection")
        _check_keys(table, {"branches"}, "inputs.multisection", strict)
        if "branches" not in table:
            _fail("inputs.multisection.branches", "required field is missing")
        rows = _list(table["branches"], "inputs.multisection.branches")
        if not rows:
            _fail("inputs.multisection.branches", "needs at least one branch")
        branches = tuple(
            tuple(
                _string_list(
                    row,
                    f"inputs.multisection.branches[{i}]",
                    length=2 * family.g,
                )
            )
            for i, row in enumerate(rows)
        )
        multi = _build(
            multisection, "inputs.multisection.branches", family, branches
        )
    else:
        multi = zero_section(family)
    allowed = {"iterates", "max_degree", "quadrature"}
    _check_keys(parameters, allowed, "parameters", strict)
    if "iterates" not in parameters:
        _fail("parameters.iterates", "required field is missing")
    iterates = tuple(
        _int_list(parameters["iterates"], "parameters.iterates", minimum=1)
    )
    if len(set(iterates)) != len(iterates):
        _fail("parameters.iterates", "entries must be distinct")
    max_degree = _integer(
        parameters.get("max_degree", 2 * family.g),
        "parameters.max_degree",
        minimum=0,
    )
    if "quadrature" in parameters:
        table = _table(parameters["quadrature"], "parameters.quadrature")
        _check_keys(
            table, {"order", "rtol", "max_order"}, "parameters.quadrature",
            strict,
        )
        order = _integer(
            table.get("order", 32), "parameters.quadrature.order", minimum=2
        )
        rtol = _number(
            table.get("rtol", 1e-4), "parameters.quadrature.rtol", positive=True
        )
        max_order = _integer(
            table.get("max_order", 256),
            "parameters.quadrature.max_order",
            minimum=order,
        )
        quadrature = _build(
            Quadrature, "parameters.quadrature", order, rtol, max_order
        )
    else:
        quadrature = Quadrature()
    return {
        "family": family,
        "field": field,
        "multisection": multi,
        "iterates": iterates,
        "max_degree": max_degree,
        "quadrature": quadrature,
    }


def _validate_conjugacy(inputs, parameters, strict):
    _, field = _family_and_field(inputs, strict)
    allowed = {"multiplier", "k_values", "sample_points", "seed"}
    _check_keys(parameters, allowed, "parameters", strict)
    for key in ("multiplier", "k_values"):
        if key not in parameters:
            _fail(f"parameters.{key}", "required field is missing")
    multiplier = _integer(
        parameters["multiplier"], "parameters.multiplier", minimum=2
    )
    k_values = tuple(
        _int_list(parameters["k_values"], "parameters.k_values", minimum=0)
    )
    if not k_values:
        _fail("parameters.k_values", "needs at least one entry")
    sample_points = _integer(
        parameters.get("sample_points", 100),
        "parameters.sample_points",
        minimum=1,
    )
    seed = _integer(parameters.get("seed", 23), "parameters.seed", minimum=0)
    return {
        "field": field,
        "multiplier": multiplier,
        "k_values": k_values,
        "sample_points": sample_points,
        "seed": seed,
    }


def _validate_group_orbit(inputs, parameters, strict):
    _check_keys(inputs, {"g", "first", "second"}, "inputs", strict)
    for key in ("g", "first", "second"):
        if key not in inputs:
            _fail(f"inputs.{key}", "required field is missing")
    g = _integer(inputs["g"], "inputs.g", minimum=1)
    family = unit_torus_family(g)

    def free_field(table, path):
        table = _table(table, path)
        _check_keys(table, {"components"}, path, strict)
        if "components" not in table:
            _fail(f"{path}.components", "required field is missing")
        comps = _string_list(
            table["components"], f"{path}.components", length=2 * g
        )
        return _build(
            TranslationField,
            path,
            family=family,
            kind="free",
            components=tuple(comps),
        )

    field_first = free_field(inputs["first"], "inputs.first")
    field_second = free_field(inputs["second"], "inputs.second")
    allowed = {
        "k", "l", "n_iter", "seed", "eps", "n_starts", "fill_threshold",
        "n_probes",
    }
    _check_keys(parameters, allowed, "parameters", strict)
    for key in ("k", "l", "n_iter"):
        if key not in parameters:
            _fail(f"parameters.{key}", "required field is missing")
    k = _integer(parameters["k"], "parameters.k", minimum=1)
    l = _integer(parameters["l"], "parameters.l", minimum=1)
    n_iter = _integer(parameters["n_iter"], "parameters.n_iter", minimum=1)
    seed = _integer(parameters.get("seed", 5), "parameters.seed", minimum=0)
    eps = _number(parameters.get("eps", 0.05), "parameters.eps", positive=True)
    n_starts = _integer(
        parameters.get("n_starts", 6), "parameters.n_starts", minimum=1
    )
    fill_threshold = _number(
        parameters.get("fill_threshold", 0.999),
        "parameters.fill_threshold",
        positive=True,
    )
    n_probes = _integer(
        parameters.get("n_probes", 4096), "parameters.n_probes", minimum=16
    )
    return {
        "field_first": field_first,
        "field_second": field_second,
        "k": k,
        "l": l,
        "n_iter": n_iter,
        "seed": seed,
        "eps": eps,
        "n_starts": n_starts,
        "fill_threshold": fill_threshold,
        "n_probes": n_probes,
    }


def _validate_projectivity(inputs, parameters, strict):
    allowed = {"gram", "sigma_re", "sigma_im", "h", "a"}
    _check_keys(inputs, allowed, "inputs", strict)
    for key in ("gram", "sigma_re", "sigma_im", "h"):
        if key not in inputs:
            _fail(f"inputs.{key}", "required field is missing")
    gram = _int_matrix(inputs["gram"], "inputs.gram", square=True)
    lattice = _build(GramLattice, "inputs.gram", gram)
    n = len(gram)
    sigma_re = _fraction_list(inputs["sigma_re"], "inputs.sigma_re", length=n)
    sigma_im = _fraction_list(inputs["sigma_im"], "inputs.sigma_im", length=n)
    h = tuple(_int_list(inputs["h"], "inputs.h", length=n))
    period = _build(
        PeriodPoint,
        "inputs",
        lattice=lattice,
        sigma_re=tuple(sigma_re),
        sigma_im=tuple(sigma_im),
        h=h,
    )
    a = None
    if "a" in inputs:
        a = tuple(_int_list(inputs["a"], "inputs.a", length=n))
    _check_keys(parameters, {"search"}, "parameters", strict)
    search = None
    if "search" in parameters:
        table = _table(parameters["search"], "parameters.search")
        _check_keys(table, {"r", "height"}, "parameters.search", strict)
        for key in ("r", "height"):
            if key not in table:
                _fail(f"parameters.search.{key}", "required field is missing")
        r = _fraction(table["r"], "parameters.search.r")
        height = _integer(
            table["height"], "parameters.search.height", minimum=1
        )
        search = (r, height)
    if a is None and search is None:
        _fail("inputs.a", "needs a class to test or a parameters.search table")
    return {"period": period, "a": a, "search": search}


_VALIDATORS = {
    "classify": _validate_classify,
    "growth": _validate_growth,
    "betti-rank": _validate_betti_rank,
    "orbit": _validate_orbit,
    "density": _validate_density,
    "volume": _validate_volume,
    "conjugacy": _validate_conjugacy,
    "group-orbit": _validate_group_orbit,
    "projectivity": _validate_projectivity,
}


def validate_scenario(raw, strict=True):
    """Validate a parsed scenario table and build its domain objects."""
    raw = _table(raw, "scenario")
    _check_keys(raw, {"name", "kind", "inputs", "parameters"}, "", strict)
    if "name" not in raw:
        _fail("name", "required field is missing")
    name = _string(raw["name"], "name")
    if not name:
        _fail("name", "must be nonempty")
    if "kind" not in raw:
        _fail("kind", "required field is missing")
    kind = _string(raw["kind"], "kind")
    if kind not in SCENARIO_KINDS:
        _fail("kind", f"unknown kind {kind!r} (one of: {', '.join(SCENARIO_KINDS)})")
    inputs = _table(raw.get("inputs", {}), "inputs")
    parameters = _table(raw.get("parameters", {}), "parameters")
    payload = _VALIDATORS[kind](inputs, parameters, strict)
    return Scenario(
        name=name, kind=kind, inputs=inputs, parameters=parameters,
        payload=payload,
    )


def load_scenario(path, strict=True):
    """Parse and validate a scenario TOML file."""
    with open(path, "rb") as fh:
        try:
            raw = tomli.load(fh)
        except tomli.TOMLDecodeError as exc:
            _fail(str(path), f"not valid TOML: {exc}")
    return validate_scenario(raw, strict=strict)


# ---------------------------------------------------------------------------
# Schema summary for the command line.

_EXACT = "exact value: integer or fraction string like \"-1/2\""

_FAMILY_DOC = {
    "g": "integer >= 1, fiber genus",
    "box_lo": "array of 2g numbers, base box lower corner",
    "box_hi": "array of 2g numbers, base box upper corner",
    "tau": "g x g array of expression strings in u1..ug",
}

_FIELD_DOC = {
    "kind": "\"holomorphic\" or \"free\"",
    "w": "g expression strings in u1..ug (holomorphic only)",
    "components": "2g expression strings in x1..x2g (free only)",
    "basis_change": "optional 2g x 2g integer matrix, determinant +-1",
}


def schema_description():
    """Nested field documentation for every scenario kind."""
    return {
        "scenario": {
            "name": "nonempty string",
            "kind": f"one of: {', '.join(SCENARIO_KINDS)}",
            "inputs": "table, see per-kind fields",
            "parameters": "table, see per-kind fields",
        },
        "classify": {
            "inputs": {
                "gram": "square integer Gram matrix",
                "matrix": "square integer matrix preserving the form",
                "invariant_sublattice": "optional integer rows to restrict to",
            },
            "parameters": {},
        },
        "growth": {
            "inputs": {
                "gram": "square integer Gram matrix",
                "matrix": "square integer matrix preserving the form",
            },
            "parameters": {
                "mode": "\"polynomial\" or \"exponential\"",
                "schedule": "optional increasing integer array of iterate counts",
                "power": "optional integer >= 1, measure Sym^p instead of p = 1",
                "spectrum_p_max": "optional integer >= 1, fit all powers 0..p_max",
                "concavity_tolerance": "optional positive number, spectrum slack",
            },
        },
        "betti-rank": {
            "inputs": {
                "random": "table {seed, g, degree?, perturbation?} for a seeded family",
                "family": "period family table (alternative to random)",
                "field": _FIELD_DOC,
            },
            "parameters": {
                "samples": "optional integer >= 1 base points (default 8)",
                "seed": "optional integer sampling seed (default 11)",
                "rank_tol": "optional positive singular value cutoff",
            },
        },
        "orbit": {
            "inputs": {
                "vector": {
                    "rational": f"array, {_EXACT}",
                    "irrational": "optional arrays of exact coefficient rows",
                    "constants": "optional array of {name, decimal} tables; "
                                 "sqrt2 and sqrt3 need no decimal",
                },
            },
            "parameters": {
                "oracle": "optional boolean, run the sampling check (default true)",
                "n_points": "optional integer >= 1000 sample size",
                "cluster_tol": "optional positive clustering scale",
            },
        },
        "density": {
            "inputs": {"family": _FAMILY_DOC, "field": _FIELD_DOC},
            "parameters": {
                "grid": "integer or array of 2g integers, base grid counts",
                "max_height": "integer >= 1, resonance height bound",
                "tol": "positive number, resonance tolerance",
                "refine": "optional boolean (default true)",
                "refine_counts": "optional array of 2g seed grid counts",
                "denominator_bound": "optional integer target denominator cap",
                "newton_steps": "optional integer (default 10)",
                "certify_tol": "optional positive residual bound (default 1e-12)",
                "probe_counts": "optional array of 2g probe grid counts",
                "targets": "optional array of {dimension, components?} tables",
            },
        },
        "volume": {
            "inputs": {
                "family": _FAMILY_DOC,
                "field": _FIELD_DOC,
                "multisection": "optional {branches = [[2g expressions], ...]}",
            },
            "parameters": {
                "iterates": "array of distinct integers >= 1",
                "max_degree": "optional integer cap on the fitted degree "
                              "(default 2g)",
                "quadrature": "optional {order?, rtol?, max_order?}",
            },
        },
        "conjugacy": {
            "inputs": {"family": _FAMILY_DOC, "field": _FIELD_DOC},
            "parameters": {
                "multiplier": "integer >= 2, the fiber multiplication degree",
                "k_values": "array of integers >= 0, iteration depths",
                "sample_points": "optional integer >= 1 (default 100)",
                "seed": "optional integer (default 23)",
            },
        },
        "group-orbit": {
            "inputs": {
                "g": "integer >= 1, genus of both torus factors",
                "first": "{components = [2g expression strings]}",
                "second": "{components = [2g expression strings]}",
            },
            "parameters": {
                "k": "integer >= 1, multiplier on the first translation",
                "l": "integer >= 1, multiplier on the second translation",
                "n_iter": "integer >= 1, word ball size per start",
                "seed": "optional integer (default 5)",
                "eps": "optional positive fill radius (default 0.05)",
                "n_starts": "optional integer (default 6)",
                "fill_threshold": "optional positive fraction (default 0.999)",
                "n_probes": "optional integer >= 16 (default 4096)",
            },
        },
        "projectivity": {
            "inputs": {
                "gram": "square integer Gram matrix, three positive directions",
                "sigma_re": f"array, {_EXACT}",
                "sigma_im": f"array, {_EXACT}",
                "h": "integer array, primitive isotropic class",
                "a": "optional integer array, class to test",
            },
            "parameters": {
                "search": "optional {r = exact value, height = integer >= 1}",
            },
        },
    }
