"""Declarative scenario files and the ``equilef`` command-line front end.

A scenario is a JSON document with exact rationals written as strings
(``"-3/7"``) and irrational quantities referred to by declared generator
names; floating-point literals are rejected anywhere in the model or map
(exactness of the group arithmetic is load-bearing).  One invocation runs one
scenario through one command:

``validate``   schema and equivariance checks
``lhs``        harmonic-space traces and the alternating sum
``rhs``        fixed-orbit enumeration, certificates and contributions
``verify``     both sides, their comparison, and a heat-trace sweep
``spectrum``   eigenvalue table of the elliptic operator
``avcheck``    averaging projector residuals on random sections
``mollifier``  smoothing-kernel convergence study

Exit status: 0 pass, 1 discrepancy or failed check, 2 transversality or
finiteness gate, 64 usage, parse or schema error.  Reports are emitted as an
aligned text block on stdout and optionally as JSON; both are deterministic
byte for byte for a fixed scenario file and tool version (fixed field order,
floats printed with 12 significant digits).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from . import averaging as av
from . import basic_complex as bc
from . import fixed_point_formula as fpf
from . import mollifier_lab as ml
from .endomorphism import (
    BundleTwist,
    SpherePhaseMap,
    TorusMap,
    alternating_heat_trace,
    cohomology_action,
    harmonic_dimensions,
    validate_equivariance,
)
from .errors import (
    EquilefError,
    InfiniteFixedSet,
    NonTransverse,
    NotEquivariant,
    ParseError,
    SchemaError,
)
from .geometry_models import FlatTorusModel, WeightedSphereModel
from .torus_group import SymbolicFrequency, closure_group

SCHEMA_VERSION = 1
DEFAULT_CUTOFF = 8
DEFAULT_TOLERANCE = 1e-9
DEFAULT_HEAT_S = (0.1, 1.0, 10.0)

EXIT_PASS = 0
EXIT_DISCREPANCY = 1
EXIT_GATE = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing


def _reject_floats(node, path):
    if isinstance(node, float):
        raise SchemaError("floating-point literals are forbidden here; "
                          "write exact rationals as strings", path=path)
    if isinstance(node, dict):
        for key, val in node.items():
            _reject_floats(val, f"{path}.{key}")
    if isinstance(node, list):
        for i, val in enumerate(node):
            _reject_floats(val, f"{path}[{i}]")


def _parse_fraction(node, path):
    if isinstance(node, bool) or isinstance(node, float):
        raise SchemaError("expected an exact rational (string or integer)", path=path)
    if isinstance(node, int):
        return Fraction(node)
    if isinstance(node, str):
        try:
            return Fraction(node)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"not a rational number: {node!r} ({exc})", path=path)
    raise SchemaError("expected an exact rational (string or integer)", path=path)


def _parse_symbolic_entry(node, labels, path):
    row = [Fraction(0)] * (1 + len(labels))
    if isinstance(node, (str, int)):
        row[0] = _parse_fraction(node, path)
        return tuple(row)
    if isinstance(node, dict):
        for key, val in node.items():
            if key == "rational":
                row[0] = _parse_fraction(val, f"{path}.rational")
            elif key in labels:
                row[1 + labels.index(key)] = _parse_fraction(val, f"{path}.{key}")
            else:
                raise SchemaError(f"unknown generator {key!r}", path=f"{path}.{key}")
        return tuple(row)
    raise SchemaError("expected a rational or a generator combination", path=path)


def _parse_generators(node, path):
    if node is None:
        return (), ()
    if not isinstance(node, list):
        raise SchemaError("generators must be a list", path=path)
    labels, values = [], []
    defaults = (math.sqrt(2), math.sqrt(3), math.sqrt(5), math.sqrt(7),
                math.sqrt(11), math.sqrt(13))
    for i, item in enumerate(node):
        if isinstance(item, str):
            labels.append(item)
            values.append(defaults[i % len(defaults)])
            continue
        if not isinstance(item, dict) or "name" not in item:
            raise SchemaError("generator entries are names or {name, value}",
                              path=f"{path}[{i}]")
        labels.append(str(item["name"]))
        values.append(float(item.get("value", defaults[i % len(defaults)])))
    if len(set(labels)) != len(labels):
        raise SchemaError("generator names must be distinct", path=path)
    return tuple(labels), tuple(values)


@dataclass(frozen=True)
class Scenario:
    name: str
    model: object
    map: object
    twist: BundleTwist | None
    cutoff: int
    tolerance: float
    heat_tolerance: float
    heat_s: tuple
    mollifier_k: tuple
    mollifier_radius: float
    mollifier_grid: int | None
    raw: dict


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise SchemaError("scenario must be a JSON object", path="$")
    if data.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"schema version must be {SCHEMA_VERSION}", path="$.schema")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise SchemaError("scenario needs a nonempty name", path="$.name")
    labels, values = _parse_generators(data.get("generators"), "$.generators")

    model_node = data.get("model")
    if not isinstance(model_node, dict):
        raise SchemaError("missing model", path="$.model")
    _reject_floats(model_node, "$.model")
    mtype = model_node.get("type")
    if mtype == "flat_torus":
        n = model_node.get("n")
        entries = model_node.get("v")
        if not isinstance(n, int) or n < 1:
            raise SchemaError("flat torus needs integer dimension n >= 1",
                              path="$.model.n")
        if not isinstance(entries, list) or len(entries) != n:
            raise SchemaError("v must list n entries", path="$.model.v")
        rows = tuple(
            _parse_symbolic_entry(e, labels, f"$.model.v[{i}]")
            for i, e in enumerate(entries)
        )
        model = FlatTorusModel(SymbolicFrequency(rows, labels, values))
    elif mtype == "weighted_sphere":
        k = model_node.get("k")
        entries = model_node.get("weights")
        if not isinstance(k, int) or k < 1:
            raise SchemaError("weighted sphere needs integer k >= 1",
                              path="$.model.k")
        if not isinstance(entries, list) or len(entries) != k:
            raise SchemaError("weights must list k entries", path="$.model.weights")
        rows = tuple(
            _parse_symbolic_entry(e, labels, f"$.model.weights[{i}]")
            for i, e in enumerate(entries)
        )
        model = WeightedSphereModel(SymbolicFrequency(rows, labels, values))
    else:
        raise SchemaError("model type must be flat_torus or weighted_sphere",
                          path="$.model.type")

    map_node = data.get("map")
    if not isinstance(map_node, dict):
        raise SchemaError("missing map", path="$.map")
    _reject_floats(map_node, "$.map")
    if isinstance(model, FlatTorusModel):
        matrix = map_node.get("matrix")
        if (not isinstance(matrix, list)
                or len(matrix) != model.n
                or any(not isinstance(row, list) or len(row) != model.n
                       for row in matrix)
                or any(not isinstance(a, int) or isinstance(a, bool)
                       for row in matrix for a in row)):
            raise SchemaError("matrix must be an n x n integer array",
                              path="$.map.matrix")
        translation = map_node.get("translation", ["0"] * model.n)
        if not isinstance(translation, list) or len(translation) != model.n:
            raise SchemaError("translation must list n rationals",
                              path="$.map.translation")
        trans = tuple(
            _parse_fraction(e, f"$.map.translation[{i}]")
            for i, e in enumerate(translation)
        )
        fmap = TorusMap(tuple(tuple(row) for row in matrix), trans)
    else:
        phases = map_node.get("phases")
        if not isinstance(phases, list) or len(phases) != model.k:
            raise SchemaError("phases must list k rationals", path="$.map.phases")
        fmap = SpherePhaseMap(tuple(
            _parse_fraction(e, f"$.map.phases[{i}]") for i, e in enumerate(phases)
        ))

    twist = None
    twist_node = data.get("twist")
    if twist_node is not None:
        if not isinstance(twist_node, dict) or "weight" not in twist_node:
            raise SchemaError("twist needs a weight", path="$.twist")
        _reject_floats(twist_node.get("weight"), "$.twist.weight")
        weight_row = _parse_symbolic_entry(twist_node["weight"], labels,
                                           "$.twist.weight")
        scalar_node = twist_node.get("phi_scalar", [1, 0])
        if (not isinstance(scalar_node, list) or len(scalar_node) != 2):
            raise SchemaError("phi_scalar is a [re, im] pair",
                              path="$.twist.phi_scalar")
        twist = BundleTwist(
            SymbolicFrequency((weight_row,), labels, values),
            complex(float(scalar_node[0]), float(scalar_node[1])),
        )

    cutoffs = data.get("cutoffs", {})
    cutoff = int(cutoffs.get("modes", DEFAULT_CUTOFF)) if isinstance(cutoffs, dict) \
        else DEFAULT_CUTOFF
    tolerances = data.get("tolerances", {}) or {}
    tolerance = float(tolerances.get("verify", DEFAULT_TOLERANCE))
    heat_tolerance = float(tolerances.get("heat", 1e-8))
    heat_s = tuple(float(s) for s in data.get("heat_s", DEFAULT_HEAT_S))
    moll = data.get("mollifier", {}) or {}
    k_list = tuple(int(k) for k in moll.get("k_list", (8, 16, 32, 64)))
    radius = float(_parse_fraction(moll.get("radius", "3/10"), "$.mollifier.radius"))
    grid = moll.get("grid")
    return Scenario(
        name=name,
        model=model,
        map=fmap,
        twist=twist,
        cutoff=cutoff,
        tolerance=tolerance,
        heat_tolerance=heat_tolerance,
        heat_s=heat_s,
        mollifier_k=k_list,
        mollifier_radius=radius,
        mollifier_grid=int(grid) if grid is not None else None,
        raw=data,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read scenario file: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), line=exc.lineno, column=exc.colno)
    return parse_scenario(data)


# ---------------------------------------------------------------------------
# report helpers


def _f(x):
    """Round-trip a float through 12 significant digits (deterministic)."""
    return float(f"{float(x):.12g}")


def _fs(x):
    return f"{float(x):.12g}"


def _complex(z):
    z = complex(z)
    return {"re": _f(z.real), "im": _f(z.imag)}


def _complex_str(z):
    z = complex(z)
    if abs(z.imag) < 5e-13:
        return _fs(z.real)
    return f"{_fs(z.real)}{'+' if z.imag >= 0 else '-'}{_fs(abs(z.imag))}i"


def _frac_str(q):
    return None if q is None else str(Fraction(q))


def _point_str(p):
    return "(" + ", ".join(str(Fraction(x)) for x in p) + ")"


def _orbit_json(contrib):
    orbit = contrib.orbit
    if isinstance(orbit.model, FlatTorusModel):
        location = {"base_point": [str(x) for x in orbit.base_point]}
    else:
        bp = orbit.base_point
        location = {
            "support": list(bp.support),
            "moduli_sq": [str(x) for x in bp.moduli_sq],
            "phases": [str(x) for x in bp.phases],
        }
    return {
        "location": location,
        "dim": orbit.dim,
        "isotropy_components": orbit.isotropy.component_count,
        "g0": [str(x) for x in contrib.g0],
        "sheets": contrib.per_degree[0].sheets,
        "haar_factor": str(contrib.per_degree[0].haar_factor),
        "per_degree": [
            {
                "q": pd.degree,
                "trace": _complex(pd.trace_value),
                "det": _f(pd.det_value),
                "abs_det": _f(abs(pd.det_value)),
                "isotropy_integral": _complex(pd.isotropy_integral),
            }
            for pd in contrib.per_degree
        ],
        "contribution": _complex(contrib.total),
        "contribution_exact": _frac_str(contrib.total_exact),
        "transversality": "certified",
    }


def _render_text(report):
    lines = []
    push = lines.append
    tool = report["tool"]
    push(f"equilef {report['command']} report (version {tool['version']})")
    push(f"scenario: {report['scenario_name']}")
    for section, content in report.items():
        if section in ("tool", "command", "scenario_name", "scenario"):
            continue
        push(f"-- {section}")
        _render_node(content, push, indent="   ")
    return "\n".join(lines) + "\n"


def _render_node(node, push, indent):
    if isinstance(node, dict):
        width = max((len(str(k)) for k in node), default=0)
        for key, val in node.items():
            if isinstance(val, (dict, list)):
                push(f"{indent}{key}:")
                _render_node(val, push, indent + "   ")
            else:
                push(f"{indent}{str(key).ljust(width)} : {val}")
    elif isinstance(node, list):
        for i, val in enumerate(node):
            if isinstance(val, (dict, list)):
                push(f"{indent}[{i}]")
                _render_node(val, push, indent + "   ")
            else:
                push(f"{indent}[{i}] {val}")
    else:
        push(f"{indent}{node}")


def _base_report(scenario: Scenario, command: str) -> dict:
    return {
        "tool": {"name": "equilef", "version": __version__,
                 "schema": SCHEMA_VERSION},
        "command": command,
        "scenario_name": scenario.name,
        "scenario": scenario.raw,
    }


# ---------------------------------------------------------------------------
# commands


def _equivariance_section(scenario):
    cert = validate_equivariance(scenario.model, scenario.map)
    return {
        "valid": True,
        "kind": cert.map_kind,
        "cochain_on_basic": cert.cochain_on_basic,
        "cochain_on_all": cert.cochain_on_all,
        "detail": cert.detail,
    }


def cmd_validate(scenario: Scenario, options) -> tuple[dict, int]:
    report = _base_report(scenario, "validate")
    report["equivariance"] = _equivariance_section(scenario)
    report["verdict"] = {"pass": True}
    return report, EXIT_PASS


def _lhs_sections(scenario, cutoff):
    act = cohomology_action(scenario.model, scenario.map, scenario.twist)
    dims = harmonic_dimensions(scenario.model, scenario.twist)
    plateau = {
        c: [bc.harmonic_dimension(scenario.model, q, c)
            for q in range(scenario.model.n)]
        for c in (4, 8, 16)
    } if scenario.twist is None else None
    sections = {
        "harmonic_dimensions": list(dims),
        "per_degree_traces": [_complex(t) for t in act.traces],
        "per_degree_traces_text": [_complex_str(t) for t in act.traces],
        "value": _complex(act.lefschetz),
        "value_text": _complex_str(act.lefschetz),
        "exact": _frac_str(act.lefschetz_exact),
    }
    if plateau is not None:
        sections["dimension_plateau"] = {str(c): v for c, v in plateau.items()}
    return act, sections


def cmd_lhs(scenario: Scenario, options) -> tuple[dict, int]:
    if not isinstance(scenario.model, FlatTorusModel):
        raise _UsageError("the lhs command requires a flat torus scenario")
    report = _base_report(scenario, "lhs")
    report["equivariance"] = _equivariance_section(scenario)
    _, sections = _lhs_sections(scenario, options.cutoff or scenario.cutoff)
    report["lhs"] = sections
    report["verdict"] = {"pass": True}
    return report, EXIT_PASS


def _group_section(scenario):
    model = scenario.model
    direction = model.v if isinstance(model, FlatTorusModel) else model.weights
    section = {
        "closure": {
            "ambient_dim": model.group.ambient_dim,
            "dim": model.group.dim,
            "relation_lattice": [list(row) for row in model.group.relation_lattice],
            "haar_normalization": str(model.group.haar_normalization),
        }
    }
    if scenario.twist is not None:
        hat, _ = closure_group(direction, scenario.twist.weight)
        section["lifted"] = {
            "ambient_dim": hat.ambient_dim,
            "dim": hat.dim,
            "relation_lattice": [list(row) for row in hat.relation_lattice],
        }
    return section


def _rhs_sections(scenario):
    fibers = "de_rham" if isinstance(scenario.model, FlatTorusModel) else "scalar"
    rhs = fpf.lefschetz_rhs(scenario.model, scenario.map, fibers=fibers,
                            twist=scenario.twist)
    return rhs, {
        "fibers": fibers,
        "groups": _group_section(scenario),
        "conventions": {
            "haar_factor": "near-identity product splitting of the lifted "
                           "group's normalized measure; mass = components x "
                           "|det of stacked tangent/complement bases| in unit-"
                           "covolume parameter coordinates (choice-invariant "
                           "through mass/sheets)",
            "sphere_slices": "transversality along isotropy components is "
                             "decided by exact rotation-angle sweeps at the "
                             "base point; no geodesic slice is materialized",
        },
        "orbit_count": len(rhs.contributions),
        "fixed_orbits": [_orbit_json(c) for c in rhs.contributions],
        "value": _complex(rhs.value),
        "value_text": _complex_str(rhs.value),
        "exact": _frac_str(rhs.value_exact),
    }


def cmd_rhs(scenario: Scenario, options) -> tuple[dict, int]:
    report = _base_report(scenario, "rhs")
    report["equivariance"] = _equivariance_section(scenario)
    _, sections = _rhs_sections(scenario)
    report["rhs"] = sections
    report["verdict"] = {"pass": True}
    return report, EXIT_PASS


def cmd_verify(scenario: Scenario, options) -> tuple[dict, int]:
    if not isinstance(scenario.model, FlatTorusModel):
        raise _UsageError("the verify command requires a flat torus scenario "
                          "(sphere scenarios support rhs only)")
    cutoff = options.cutoff or scenario.cutoff
    tolerance = options.tolerance if options.tolerance is not None \
        else scenario.tolerance
    report = _base_report(scenario, "verify")
    report["equivariance"] = _equivariance_section(scenario)
    act, lhs_sections = _lhs_sections(scenario, cutoff)
    report["lhs"] = lhs_sections
    rhs, rhs_sections = _rhs_sections(scenario)
    report["rhs"] = rhs_sections
    exact_equal = (
        act.lefschetz_exact is not None
        and rhs.value_exact is not None
        and act.lefschetz_exact == rhs.value_exact
    )
    discrepancy = abs(act.lefschetz - rhs.value)
    report["comparison"] = {
        "discrepancy": _f(discrepancy),
        "exact_equality": exact_equal,
        "tolerance": _f(tolerance),
    }
    heat = {
        "s_values": [_f(s) for s in scenario.heat_s],
        "alternating": [],
        "tolerance": _f(scenario.heat_tolerance),
    }
    drift = 0.0
    for s in scenario.heat_s:
        alt = alternating_heat_trace(scenario.model, scenario.map, s, cutoff,
                                     scenario.twist)
        heat["alternating"].append(_complex(alt))
        drift = max(drift, abs(alt - act.lefschetz))
    heat["max_drift"] = _f(drift)
    heat["stable"] = bool(drift <= scenario.heat_tolerance)
    report["heat_traces"] = heat
    passed = bool(discrepancy <= tolerance or exact_equal)
    report["verdict"] = {
        "pass": passed,
        "tolerance": _f(tolerance),
        "certificates": ["equivariance"] + [
            f"transversality[{i}]" for i in range(len(rhs.contributions))
        ],
    }
    return report, EXIT_PASS if passed else EXIT_DISCREPANCY


def cmd_spectrum(scenario: Scenario, options) -> tuple[dict, int]:
    if not isinstance(scenario.model, FlatTorusModel):
        raise _UsageError("the spectrum command requires a flat torus scenario")
    cutoff = options.cutoff or scenario.cutoff
    report = _base_report(scenario, "spectrum")
    tables = {}
    for q in range(scenario.model.n):
        table = bc.basic_spectrum(scenario.model, q, cutoff)
        tables[f"degree_{q}"] = [
            {"eigenvalue": _f(lam), "multiplicity": mult} for lam, mult in table
        ]
    report["spectrum"] = {"cutoff": cutoff, "tables": tables}
    report["verdict"] = {"pass": True}
    return report, EXIT_PASS


def cmd_avcheck(scenario: Scenario, options) -> tuple[dict, int]:
    if not isinstance(scenario.model, FlatTorusModel):
        raise _UsageError("the avcheck command requires a flat torus scenario")
    cutoff = options.cutoff or scenario.cutoff
    rng = np.random.default_rng(20240801)
    residuals = av.averaging_report(scenario.model, min(cutoff, 4), rng)
    report = _base_report(scenario, "avcheck")
    report["averaging"] = {
        "sections": 50,
        "idempotent_residual": _f(residuals["idempotent"]),
        "self_adjoint_residual": _f(residuals["self_adjoint"]),
        "equivariance_residual": _f(residuals["invariance"]),
        "tolerance": _f(1e-10),
    }
    passed = bool(residuals["pass"])
    report["verdict"] = {"pass": passed}
    return report, EXIT_PASS if passed else EXIT_DISCREPANCY


def cmd_mollifier(scenario: Scenario, options) -> tuple[dict, int]:
    if not isinstance(scenario.model, FlatTorusModel) or scenario.model.n != 2:
        raise _UsageError("the mollifier command requires a two-torus scenario")
    grid = options.grid if options.grid is not None else scenario.mollifier_grid
    study = ml.convergence_study(
        scenario.model, scenario.map, scenario.mollifier_k,
        radius=scenario.mollifier_radius, grid=grid,
    )
    report = _base_report(scenario, "mollifier")
    report["mollifier"] = {
        "oracle": _f(study.oracle),
        "tolerance": _f(study.tolerance),
        "rows": [
            {"k": row.k, "value": _f(row.value),
             "abs_error": _f(row.abs_error), "grid": row.grid}
            for row in study.rows
        ],
        "csv": study.csv(),
        "converged": study.converged,
    }
    report["verdict"] = {"pass": study.converged}
    return report, EXIT_PASS if study.converged else EXIT_DISCREPANCY


COMMANDS = {
    "validate": cmd_validate,
    "lhs": cmd_lhs,
    "rhs": cmd_rhs,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "avcheck": cmd_avcheck,
    "mollifier": cmd_mollifier,
}


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(report, options, stream):
    stream.write(_render_text(report))
    if options.json_path:
        with open(options.json_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")


def run(command: str, scenario_file: str, argv_options=None,
        stream=None) -> int:
    """Programmatic entry: run one command on one scenario file."""
    stream = stream or sys.stdout
    options = argv_options or argparse.Namespace(
        cutoff=None, tolerance=None, grid=None, json_path=None)
    if command not in COMMANDS:
        stream.write(f"error: unknown command {command!r}\n")
        return EXIT_USAGE
    try:
        scenario = load_scenario(scenario_file)
        report, code = COMMANDS[command](scenario, options)
        _emit(report, options, stream)
        return code
    except _UsageError as exc:
        stream.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        stream.write(
            f"parse error at line {exc.line}, column {exc.column}: {exc}\n")
        return EXIT_USAGE
    except SchemaError as exc:
        stream.write(f"schema error at {exc.path}: {exc}\n")
        return EXIT_USAGE
    except NotEquivariant as exc:
        stream.write(f"not equivariant: {exc}\n")
        return EXIT_DISCREPANCY
    except (NonTransverse, InfiniteFixedSet) as exc:
        stream.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_GATE
    except EquilefError as exc:
        stream.write(f"error: {exc}\n")
        return EXIT_DISCREPANCY


def main(argv=None) -> int:
    parser = _Parser(prog="equilef",
                     description="two-sided fixed-point formula verification")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("scenario_file")
    parser.add_argument("--cutoff", type=int, default=None)
    parser.add_argument("--grid", type=int, default=None)
    parser.add_argument("--tolerance", type=float, default=None)
    parser.add_argument("--json", dest="json_path", default=None)
    try:
        options = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    return run(options.command, options.scenario_file, options)


if __name__ == "__main__":
    sys.exit(main())
