"""Scenario execution and serialization.

Each run writes up to three files into its output directory: result.json
with the computed quantities (exact rationals as fraction strings, keys
sorted), data.csv with the tabular part when the kind has one, and
manifest.json with the run record. Identical scenario, seed, and package
version produce byte-identical result.json and data.csv regardless of
the thread count; the manifest is excluded from that guarantee because
it carries the wall time.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
import warnings
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from .fibration import generic_rank
from .lattice import (
    classify_isometry,
    concavity_check,
    growth_exponent,
    growth_spectrum,
    parameter_search,
    projectivity_parameter,
    sym_power,
)
from .orbits import (
    density_scan,
    group_orbit_scan,
    orbit_closure,
    orbit_sample_oracle,
)
from .volume import conjugacy_check, fit_growth, volume_series

RESULT_FILE = "result.json"
DATA_FILE = "data.csv"
MANIFEST_FILE = "manifest.json"

# Kinds whose runtime sampling takes a seed the command line may override.
SEEDED_KINDS = ("betti-rank", "conjugacy", "group-orbit")


def package_version():
    try:
        return metadata.version("paratorus")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _jsonable(value):
    """Recursively convert to JSON types, keeping exact values as strings."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _csv_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def scenario_digest(scenario):
    """SHA-256 of the raw scenario tables, independent of TOML layout."""
    canon = json.dumps(
        {
            "name": scenario.name,
            "kind": scenario.kind,
            "inputs": scenario.inputs,
            "parameters": scenario.parameters,
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Kind handlers. Each returns (result dict, csv header or None, csv rows).


def _run_classify(payload, threads):
    cls = classify_isometry(
        payload["iso"], invariant_sublattice=payload["invariant_sublattice"]
    )
    result = {"kind": cls.kind}
    if cls.kind == "elliptic":
        result["order"] = cls.order
    elif cls.kind == "parabolic":
        result["class"] = list(cls.invariant_class)
        result["unipotent_power"] = cls.unipotent_power
    else:
        result["radius_lo"] = cls.radius_lo
        result["radius_hi"] = cls.radius_hi
        result["spectral_radius"] = cls.spectral_radius
    return result, None, None


def _run_growth(payload, threads):
    iso = payload["iso"]
    mode = payload["mode"]
    schedule = payload["schedule"]
    p_max = payload["spectrum_p_max"]
    if p_max is not None:
        spectrum = growth_spectrum(iso, p_max, mode, schedule=schedule)
        report = concavity_check(spectrum, payload["concavity_tolerance"])
        result = {
            "mode": mode,
            "norm": spectrum.norm,
            "schedule": list(spectrum.schedule),
            "values": list(spectrum.values),
            "residuals": list(spectrum.residuals),
            "concavity": {
                "ok": report.ok,
                "violations": [list(v) for v in report.violations],
                "tolerance": report.tolerance,
            },
        }
        rows = list(zip(range(p_max + 1), spectrum.values, spectrum.residuals))
        return result, ("p", "value", "residual"), rows
    power = payload["power"]
    fit = growth_exponent(sym_power(iso, power), mode, schedule=schedule)
    result = {
        "mode": mode,
        "power": power,
        "norm": fit.norm,
        "constant": fit.constant,
        "residual": fit.residual,
        "schedule": list(fit.schedule),
    }
    # The off-mode slot is NaN by construction; serialize only the fitted one.
    if mode == "polynomial":
        result["exponent"] = fit.exponent
    else:
        result["rate"] = fit.rate
    rows = list(zip(fit.schedule, fit.norms))
    return result, ("n", "norm"), rows


def _run_betti_rank(payload, threads):
    report = generic_rank(
        payload["field"],
        payload["samples"],
        payload["seed"],
        **(
            {"rank_tol": payload["rank_tol"]}
            if payload["rank_tol"] is not None
            else {}
        ),
    )
    result = {
        "rank": report.rank,
        "is_even": report.is_even,
        "samples": report.samples,
        "rank_tol": report.rank_tol,
    }
    return result, None, None


def _run_orbit(payload, threads):
    vector = payload["vector"]
    closure = orbit_closure(vector)
    rel = closure.relations
    result = {
        "dimension": closure.dimension,
        "components": closure.components,
        "subtorus_basis": [list(r) for r in closure.subtorus_basis],
        "relation_rank": rel.rank,
        "relation_generators": [list(r) for r in rel.generators],
        "saturation": [list(r) for r in rel.saturation],
        "oracle": None,
    }
    header = rows = None
    if payload["oracle"]:
        est = orbit_sample_oracle(
            vector,
            n_points=payload["n_points"],
            cluster_tol=payload["cluster_tol"],
        )
        agrees = (
            not est.inconclusive
            and est.dimension == closure.dimension
            and est.components == closure.components
        )
        result["oracle"] = {
            "dimension": est.dimension,
            "components": est.components,
            "inconclusive": est.inconclusive,
            "n_points": est.n_points,
            "cluster_tol": est.cluster_tol,
            "agrees": agrees,
        }
        header = ("scale", "occupied")
        rows = list(zip(est.scales, est.occupied))
    return result, header, rows


def _run_density(payload, threads):
    report = density_scan(
        payload["field"],
        payload["grid_counts"],
        payload["max_height"],
        payload["tol"],
        targets=payload["targets"],
        refine=payload["refine"],
        refine_counts=payload["refine_counts"],
        denominator_bound=payload["denominator_bound"],
        newton_steps=payload["newton_steps"],
        certify_tol=payload["certify_tol"],
        probe_counts=payload["probe_counts"],
        threads=threads,
    )
    strata = Counter(
        zip(report.dimensions.tolist(), report.components.tolist())
    )
    refined = []
    for stratum in report.refined:
        entry = {
            "requested_dimension": stratum.requested_dimension,
            "requested_components": stratum.requested_components,
            "relations": [list(r) for r in stratum.relations],
            "certified": stratum.count,
            "attempted": stratum.attempted,
        }
        if stratum.count:
            entry["max_residual"] = float(stratum.residuals.max())
            entry["min_sigma"] = float(stratum.jacobian_sigma_min.min())
        refined.append(entry)
    result = {
        "field_rank": report.field_rank,
        "grid_counts": list(report.grid_counts),
        "max_height": report.max_height,
        "tol": report.tol,
        "generic_fraction": float(report.generic.mean()),
        "strata": [
            {"dimension": r, "components": c, "count": n}
            for (r, c), n in sorted(strata.items())
        ],
        "coverage": {str(s): v for s, v in sorted(report.coverage.items())},
        "refined": refined,
        "notes": list(report.notes),
    }
    dim = report.base_points.shape[1]
    header = tuple(f"b{i + 1}" for i in range(dim)) + ("r", "c")
    rows = [
        tuple(report.base_points[i].tolist())
        + (int(report.dimensions[i]), int(report.components[i]))
        for i in range(report.base_points.shape[0])
    ]
    return result, header, rows


def _run_volume(payload, threads):
    series = volume_series(
        payload["field"],
        payload["multisection"],
        payload["iterates"],
        quadrature=payload["quadrature"],
        threads=threads,
    )
    fit = fit_growth(series, payload["max_degree"])
    result = {
        "branches": payload["multisection"].degree,
        "iterates": list(series.iterates),
        "volumes": list(series.volumes),
        "quadrature_error": list(series.quadrature_error),
        "fit": {
            "degree": fit.degree,
            "leading_coefficient": fit.leading_coefficient,
            "residual": fit.residual,
            "coefficients": list(fit.coefficients),
        },
    }
    return result, ("n", "volume", "error"), series.csv_rows()


def _run_conjugacy(payload, threads):
    field = payload["field"]
    d = payload["multiplier"]
    defects = []
    for k in payload["k_values"]:
        defect = conjugacy_check(
            field, d, k, payload["sample_points"], seed=payload["seed"]
        )
        bound = 1e-9 * d ** k
        defects.append(
            {"k": k, "defect": defect, "bound": bound, "ok": defect <= bound}
        )
    result = {
        "multiplier": d,
        "sample_points": payload["sample_points"],
        "defects": defects,
        "max_defect": max(e["defect"] for e in defects),
        "all_within_bound": all(e["ok"] for e in defects),
    }
    rows = [(e["k"], e["defect"], e["bound"]) for e in defects]
    return result, ("k", "defect", "bound"), rows


def _run_group_orbit(payload, threads):
    report = group_orbit_scan(
        payload["field_first"],
        payload["field_second"],
        payload["k"],
        payload["l"],
        payload["n_iter"],
        payload["seed"],
        eps=payload["eps"],
        n_starts=payload["n_starts"],
        fill_threshold=payload["fill_threshold"],
        n_probes=payload["n_probes"],
    )
    result = {
        "k": report.k,
        "l": report.l,
        "n_iter": report.n_iter,
        "eps": report.eps,
        "fill_fractions": list(report.fill_fractions),
        "filled": list(report.filled),
        "fill_measure": report.fill_measure,
        "orbit_sizes": list(report.orbit_sizes),
        "fixed_count_first": int(report.fixed_first.shape[0]),
        "fixed_count_second": int(report.fixed_second.shape[0]),
        "fixed_cover_first": report.fixed_cover_first,
        "fixed_cover_second": report.fixed_cover_second,
        "fixed_cover": report.fixed_cover,
    }
    rows = [
        (i, size, frac, filled)
        for i, (size, frac, filled) in enumerate(
            zip(report.orbit_sizes, report.fill_fractions, report.filled)
        )
    ]
    return result, ("start", "orbit_size", "fill_fraction", "filled"), rows


def _run_projectivity(payload, threads):
    period = payload["period"]
    result = {"class": None, "search": None}
    header = rows = None
    if payload["a"] is not None:
        a = payload["a"]
        res = projectivity_parameter(period, a)
        result["class"] = {
            "a": list(a),
            "t_re": res.t_re,
            "t_im": res.t_im,
            "is_projective": res.is_projective,
            "q_a_a": res.q_a_a,
        }
    if payload["search"] is not None:
        r, height = payload["search"]
        hits = parameter_search(period, r, height)
        result["search"] = {
            "r": r,
            "height": height,
            "count": len(hits),
            "hits": [
                {
                    "a": list(a),
                    "t_re": res.t_re,
                    "t_im": res.t_im,
                    "q_a_a": res.q_a_a,
                    "is_projective": res.is_projective,
                }
                for a, res in hits
            ],
        }
        n = len(period.h)
        header = tuple(f"a{i + 1}" for i in range(n)) + ("t_re", "t_im")
        rows = [tuple(a) + (res.t_re, res.t_im) for a, res in hits]
    return result, header, rows


_HANDLERS = {
    "classify": _run_classify,
    "growth": _run_growth,
    "betti-rank": _run_betti_rank,
    "orbit": _run_orbit,
    "density": _run_density,
    "volume": _run_volume,
    "conjugacy": _run_conjugacy,
    "group-orbit": _run_group_orbit,
    "projectivity": _run_projectivity,
}


@dataclass(frozen=True)
class RunRecord:
    """Provenance of one scenario run, written to manifest.json."""

    name: str
    kind: str
    scenario_hash: str
    version: str
    seed: int | None
    threads: int
    wall_time_s: float
    outputs: tuple
    warnings: tuple


def run_scenario(scenario, out_dir, threads=1, seed=None):
    """Execute a validated scenario and write its outputs.

    `seed` overrides the scenario's sampling seed for the kinds that have
    one; kinds without runtime sampling warn and ignore it. Returns the
    RunRecord that was written to manifest.json.
    """
    if threads < 1:
        raise ValueError("threads must be at least 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = dict(scenario.payload)
    captured = []
    with warnings.catch_warnings(record=True) as log:
        warnings.simplefilter("always")
        if seed is not None:
            if scenario.kind in SEEDED_KINDS:
                payload["seed"] = int(seed)
            else:
                warnings.warn(
                    f"seed override ignored: {scenario.kind} scenarios "
                    "draw no samples"
                )
        start = time.perf_counter()
        result, header, rows = _HANDLERS[scenario.kind](payload, threads)
        elapsed = time.perf_counter() - start
        captured = [
            f"{type(w.message).__name__}: {w.message}" for w in log
        ]

    outputs = [RESULT_FILE]
    (out / RESULT_FILE).write_text(
        json.dumps(_jsonable(result), indent=2, sort_keys=True) + "\n"
    )
    if header is not None:
        outputs.append(DATA_FILE)
        with open(out / DATA_FILE, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_csv_cell(v) for v in row])

    record = RunRecord(
        name=scenario.name,
        kind=scenario.kind,
        scenario_hash=scenario_digest(scenario),
        version=package_version(),
        seed=payload.get("seed") if scenario.kind in SEEDED_KINDS else None,
        threads=threads,
        wall_time_s=elapsed,
        outputs=tuple(outputs),
        warnings=tuple(captured),
    )
    (out / MANIFEST_FILE).write_text(
        json.dumps(_jsonable(asdict(record)), indent=2, sort_keys=True) + "\n"
    )
    return record
