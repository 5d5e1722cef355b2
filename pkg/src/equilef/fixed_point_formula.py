"""Fixed orbits, the determinant transversality criterion, and per-orbit
trace contributions.

The localized side of the verification: enumerate orbit closures mapped to
themselves, certify for each that the map minus the identity is invertible
on the conormal space (for every admissible group correction), and evaluate
the per-orbit contribution

    sum_q (-1)^q  (mass of complement / sheets)
                  * average over isotropy-preimage components of
                    fiber trace / |conormal determinant|.

On flat tori every ingredient is exact: fixed orbits come from integer
congruences (finitely many iff the base map minus identity is invertible),
conormal determinants are integer determinants, fiber traces are elementary
symmetric integers, and twist phases are rational turns.  On weighted
spheres determinants are products of plane rotations, with exact rational
zero-tests and floating values.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _ratlin as rl
from . import torus_group as tg
from .endomorphism import (
    BundleTwist,
    SpherePhaseMap,
    TorusMap,
    exact_exterior_traces,
    validate_equivariance,
)
from .errors import InfiniteFixedSet, NonTransverse
from .geometry_models import (
    ClosedOrbit,
    FlatTorusModel,
    SpherePoint,
    WeightedSphereModel,
    induced_base_map,
    orbit_through,
)

@dataclass(frozen=True)
class TransversalityCertificate:
    """Nonvanishing of the conormal determinants, one value per isotropy
    component sweep.  ``dets_exact`` holds exact values where available
    (always on tori; ``None`` entries on spheres carry only floats)."""

    orbit: ClosedOrbit
    g0: tuple
    dets: tuple            # floats, one per base isotropy component
    dets_exact: tuple      # Fractions or None, parallel to dets


@dataclass(frozen=True)
class PerDegreeData:
    degree: int
    trace_value: complex
    det_value: float
    haar_factor: Fraction
    sheets: int
    isotropy_integral: complex


@dataclass(frozen=True)
class OrbitContribution:
    orbit: ClosedOrbit
    g0: tuple
    certificate: TransversalityCertificate
    per_degree: tuple
    total: complex
    total_exact: Fraction | None


@dataclass(frozen=True)
class RhsResult:
    value: complex
    value_exact: Fraction | None
    contributions: tuple


# ---------------------------------------------------------------------------
# fixed orbits


def find_fixed_orbits(model, f):
    """All orbit closures mapped to themselves, as a finite list.

    Raises :class:`InfiniteFixedSet` when a positive-dimensional family of
    orbits is fixed (degenerate base map on a torus, or a fixed stratum with
    moduli on a sphere): in that case no trace formula applies and no
    determinant is ever computed."""
    validate_equivariance(model, f)
    if isinstance(model, FlatTorusModel):
        return _torus_fixed_orbits(model, f)
    return _sphere_fixed_orbits(model, f)


def _torus_fixed_orbits(model: FlatTorusModel, f: TorusMap):
    A_bar, c_bar = induced_base_map(model, f)
    c = len(A_bar)
    if c == 0:
        # the base is a point: the unique orbit is the whole manifold
        return [orbit_through(model, tuple(Fraction(0) for _ in range(model.n)))]
    M = [[A_bar[i][j] - (i == j) for j in range(c)] for i in range(c)]
    sol = rl.solve_congruences(M, [-x for x in c_bar])
    if sol is None:
        return []
    if not sol.is_finite:
        raise InfiniteFixedSet(
            "the induced base map fixes a positive-dimensional set "
            f"(det of base map minus identity is {rl.det_int(M)})"
        )
    L = model.base_lattice
    orbits = []
    for x_bar in sol.points():
        p = rl.solve_rational(L, x_bar)
        assert p is not None
        orbits.append(orbit_through(model, rl.vec_mod1(p)))
    orbits.sort(key=lambda o: o.key)
    return orbits


def _sphere_fixed_orbits(model: WeightedSphereModel, f: SpherePhaseMap):
    k = model.k
    phases = f.phases
    for size in range(2, k + 1):
        for support in itertools.combinations(range(k), size):
            LS = model.restricted_group(support).relation_lattice
            phi_S = [phases[j] for j in support]
            fixes = all(
                rl.frac_mod1(sum(Fraction(m) * p for m, p in zip(row, phi_S))) == 0
                for row in LS
            )
            if fixes:
                raise InfiniteFixedSet(
                    f"the stratum supported on coordinates {support} is fixed "
                    "orbitwise and carries a positive-dimensional moduli family"
                )
    orbits = []
    for j in range(k):
        moduli = tuple(Fraction(int(i == j)) for i in range(k))
        point = SpherePoint(moduli, tuple(Fraction(0) for _ in range(k)))
        orbits.append(orbit_through(model, point))
    return orbits


# ---------------------------------------------------------------------------
# group corrections


def _torus_g0(model: FlatTorusModel, f: TorusMap, orbit: ClosedOrbit):
    p0 = orbit.base_point
    g0 = rl.vec_mod1(tuple(p - fp for p, fp in zip(p0, f.apply(p0))))
    if not model.group.contains(g0):
        raise NonTransverse("orbit is not actually fixed by the map", orbit=orbit)
    return g0


def _sphere_g0(model: WeightedSphereModel, f: SpherePhaseMap, orbit: ClosedOrbit):
    support = orbit.base_point.support
    C = model.group.complement_basis()
    d = model.group.dim
    A = [[C[i][j] for i in range(d)] for j in support]
    b = [-f.phases[j] for j in support]
    sol = rl.solve_congruences(A, b) if A else rl.solve_congruences_free(d)
    if sol is None:
        raise NonTransverse("orbit is not actually fixed by the map", orbit=orbit)
    return rl.vec_mod1(rl.vec_mat(sol.particular, C))


def group_correction(model, f, orbit):
    """An element ``g0`` of the closure group making ``a_{g0} o f`` the
    identity on the orbit (determined modulo the isotropy group)."""
    if isinstance(model, FlatTorusModel):
        return _torus_g0(model, f, orbit)
    return _sphere_g0(model, f, orbit)


# ---------------------------------------------------------------------------
# transversality


def _sphere_rotation_turns(model, f, orbit, g0, h_rep):
    """Per-coordinate rotation turns of ``a_{g0 - h} o f`` at the orbit."""
    return tuple(
        rl.frac_mod1(f.phases[l] + g0[l] - Fraction(h_rep[l]))
        for l in range(model.k)
    )


def _sphere_numeric_det(model, orbit, turns):
    """Conormal determinant computed in the numeric conormal frame."""
    z = orbit.base_point.to_complex()
    k = model.k
    F = np.zeros((2 * k, 2 * k))
    for l in range(k):
        a = 2 * math.pi * float(turns[l])
        F[2 * l:2 * l + 2, 2 * l:2 * l + 2] = [
            [math.cos(a), -math.sin(a)],
            [math.sin(a), math.cos(a)],
        ]
    Q = orbit.conormal_basis
    if Q.shape[1] == 0:
        return 1.0
    M = Q.T @ F.T @ Q
    return float(np.linalg.det(M - np.eye(Q.shape[1])))


def check_transversality(orbit: ClosedOrbit, f, model=None, g0=None) -> TransversalityCertificate:
    """Certify that the correction-composed map minus the identity is
    invertible on the conormal space, for every admissible correction.

    The correction is only determined modulo the isotropy group, so the
    determinant must be nonzero along every isotropy component; on
    positive-dimensional components the rotation angles sweep whole circles,
    which is an exact linear condition."""
    model = model if model is not None else orbit.model
    if g0 is None:
        g0 = group_correction(model, f, orbit)
    if isinstance(model, FlatTorusModel):
        A_bar, _ = induced_base_map(model, f)
        c = len(A_bar)
        det = rl.det_int([[A_bar[i][j] - (i == j) for j in range(c)] for i in range(c)])
        if det == 0:
            raise NonTransverse(
                "base map minus identity vanishes on the conormal space",
                orbit=orbit,
            )
        return TransversalityCertificate(orbit, g0, (float(det),), (Fraction(det),))
    # weighted sphere
    support = set(orbit.base_point.support)
    iso = orbit.isotropy
    tangent_ambient = list(iso.identity_component.complement_basis()) \
        if iso.identity_component.dim else []
    normal_coords = [l for l in range(model.k) if l not in support]
    if len(support) > 1:
        # moduli directions inside the stratum are fixed by any phase map
        raise NonTransverse(
            "stratum moduli directions are fixed (determinant vanishes)",
            orbit=orbit,
        )
    dets = []
    dets_exact = []
    for comp_index, h_rep in enumerate(iso.component_reps):
        for row in tangent_ambient:
            for l in normal_coords:
                if row[l] != 0:
                    raise NonTransverse(
                        "rotation angle sweeps through zero along an isotropy "
                        f"component (coordinate {l})",
                        orbit=orbit,
                        component=comp_index,
                    )
        turns = _sphere_rotation_turns(model, f, orbit, g0, h_rep)
        det_val = 1.0
        for l in normal_coords:
            if turns[l] == 0:
                raise NonTransverse(
                    f"coordinate {l} is fixed by the corrected map",
                    orbit=orbit,
                    component=comp_index,
                )
            det_val *= 2.0 - 2.0 * math.cos(2 * math.pi * float(turns[l]))
        numeric = _sphere_numeric_det(model, orbit, turns)
        if abs(abs(numeric) - abs(det_val)) > 1e-6 * max(1.0, abs(det_val)):
            raise AssertionError("conormal determinant routes disagree")
        dets.append(numeric)
        dets_exact.append(None)
    return TransversalityCertificate(orbit, g0, tuple(dets), tuple(dets_exact))


# ---------------------------------------------------------------------------
# contributions


def _hat_context(model, twist: BundleTwist | None):
    if isinstance(model, FlatTorusModel):
        direction = model.v
    else:
        direction = model.weights
    weights = twist.weight if twist is not None else None
    hat, hom = tg.closure_group(direction, weights)
    return hat, hom


def _fiber_traces(model, f, fibers, twist):
    """Exact fiber traces per degree (twist scalar and phases applied
    separately)."""
    if fibers == "scalar":
        return (1,), 1
    if not isinstance(model, FlatTorusModel):
        raise ValueError("the form complex is only modelled on flat tori")
    ext = exact_exterior_traces(f.matrix)
    return ext, len(ext)


def orbit_contribution(orbit: ClosedOrbit, f, fibers="de_rham",
                       twist: BundleTwist | None = None,
                       subgroup_rows=None, g0=None,
                       isotropy_resolution: int | None = None) -> OrbitContribution:
    """Evaluate one orbit's trace contribution.

    ``subgroup_rows`` (rows in the lifted group's ambient torus) override the
    canonical complementary subgroup, for choice-invariance checks.  ``g0``
    overrides the group correction (valid corrections differ by isotropy
    elements).  ``isotropy_resolution`` switches the isotropy average to Haar
    quadrature along the components instead of the exact per-component sum;
    the two must agree on transverse scenarios."""
    model = orbit.model
    cert = check_transversality(orbit, f, model=model, g0=g0)
    g0 = cert.g0
    hat, hom = _hat_context(model, twist)
    n = hom.base_dim
    pre = tg.isotropy_preimage(hat, n, orbit.isotropy)
    if subgroup_rows is None:
        rows_param = tg.complementary_subgroup(pre)
    else:
        rows_param = tg.subgroup_in_param_coords(pre, subgroup_rows)
    rows_ambient = rl.freeze(
        rl.vec_mat(r, pre.param_basis) for r in rows_param
    )
    mass = tg.haar_factor(pre, rows_param)
    sheets = tg.sheet_count_rows(rows_ambient, orbit.isotropy, n)
    ghat0 = _lift_correction(hat, n, g0)
    traces, degrees = _fiber_traces(model, f, fibers, twist)
    scalar = twist.phi_scalar if twist is not None else 1.0 + 0.0j
    fiber_idx = range(n, hat.ambient_dim)
    char_zero = False
    if twist is not None and pre.dim > 0:
        # the twist character must be constant along the identity component,
        # otherwise each component integrates to zero exactly
        char_zero = any(
            any(row[j] != 0 for j in fiber_idx)
            for row in pre.ambient_tangent_rows()
        )
    comps = []
    for rep in pre.component_reps:
        h_amb = rl.vec_mod1(rl.vec_mat(rep, pre.param_basis))
        phase = rl.frac_mod1(sum(
            (Fraction(h_amb[j]) - Fraction(ghat0[j])) for j in fiber_idx
        )) if twist is not None else Fraction(0)
        if isinstance(model, FlatTorusModel):
            det_val = cert.dets[0]
            det_exact = cert.dets_exact[0]
        else:
            turns = _sphere_rotation_turns(model, f, orbit, g0, hom.project(h_amb))
            det_val = 1.0
            for l in range(model.k):
                if l not in orbit.base_point.support:
                    det_val *= 2.0 - 2.0 * math.cos(2 * math.pi * float(turns[l]))
            det_exact = None
        comps.append((phase, det_val, det_exact))
    kappa = pre.kappa
    per_degree = []
    total = 0.0 + 0.0j
    total_exact = Fraction(0)
    exact_ok = twist is None and all(de is not None for _, _, de in comps)
    for q in range(degrees):
        integral = 0.0 + 0.0j
        integral_exact = Fraction(0)
        for phase, det_val, det_exact in comps:
            if char_zero:
                continue
            term = (scalar * cmath.exp(2j * math.pi * float(phase))
                    * traces[q] / abs(det_val))
            integral += term
            if exact_ok:
                integral_exact += Fraction(traces[q]) / abs(det_exact)
        integral /= kappa
        integral_exact /= kappa
        weight = mass / sheets
        contrib = (-1) ** q * float(weight) * integral
        total += contrib
        if exact_ok:
            total_exact += (-1) ** q * weight * integral_exact
        per_degree.append(PerDegreeData(
            degree=q,
            trace_value=scalar * traces[q],
            det_value=comps[0][1],
            haar_factor=mass,
            sheets=sheets,
            isotropy_integral=integral,
        ))
    if isotropy_resolution is not None:
        quad = _isotropy_quadrature_total(
            orbit, f, fibers, twist, pre, mass, sheets, ghat0, g0,
            isotropy_resolution, scalar, traces, hom,
        )
        if abs(quad - total) > 1e-6 * max(1.0, abs(total)):
            raise AssertionError(
                f"isotropy quadrature disagrees with the exact sum: {quad} vs {total}"
            )
    return OrbitContribution(
        orbit=orbit,
        g0=g0,
        certificate=cert,
        per_degree=tuple(per_degree),
        total=total,
        total_exact=total_exact if exact_ok else None,
    )


def _lift_correction(hat: tg.SubtorusGroup, n: int, g0):
    """Any element of the lifted group projecting to ``g0``."""
    C = hat.complement_basis()
    D = hat.dim
    if D == 0:
        return tuple(Fraction(0) for _ in range(hat.ambient_dim))
    A = [[C[i][j] for i in range(D)] for j in range(n)]
    sol = rl.solve_congruences(A, list(g0))
    if sol is None:
        raise AssertionError("group correction fails to lift")
    return rl.vec_mod1(rl.vec_mat(sol.particular, C))


def _isotropy_quadrature_total(orbit, f, fibers, twist, pre, mass, sheets,
                               ghat0, g0, resolution, scalar, traces, hom):
    """Independent evaluation of the contribution with the isotropy average
    done by quadrature along each component."""
    model = orbit.model
    n = hom.base_dim
    fiber_idx = range(n, pre.hat_group.ambient_dim)
    d = pre.dim
    grid = list(itertools.product(range(resolution), repeat=d))
    total = 0.0 + 0.0j
    count = len(pre.component_reps) * max(len(grid), 1)
    for rep in pre.component_reps:
        for combo in grid or [()]:
            t = tuple(
                rl.frac_mod1(r + sum(Fraction(c, resolution) * row[i]
                                     for c, row in zip(combo, pre.tangent_rows)))
                for i, r in enumerate(rep)
            )
            h_amb = rl.vec_mod1(rl.vec_mat(t, pre.param_basis))
            phase = rl.frac_mod1(sum(
                Fraction(h_amb[j]) - Fraction(ghat0[j]) for j in fiber_idx
            )) if twist is not None else Fraction(0)
            if isinstance(model, FlatTorusModel):
                det_val = abs_base_det(orbit, f)
            else:
                turns = _sphere_rotation_turns(model, f, orbit, g0, hom.project(h_amb))
                det_val = 1.0
                for l in range(model.k):
                    if l not in orbit.base_point.support:
                        det_val *= 2.0 - 2.0 * math.cos(2 * math.pi * float(turns[l]))
                det_val = abs(det_val)
            for q in range(len(traces)):
                term = (scalar * cmath.exp(2j * math.pi * float(phase))
                        * traces[q] / abs(det_val))
                total += (-1) ** q * float(mass / sheets) * term / count
    return total


def abs_base_det(orbit, f):
    model = orbit.model
    A_bar, _ = induced_base_map(model, f)
    c = len(A_bar)
    return abs(rl.det_int([[A_bar[i][j] - (i == j) for j in range(c)] for i in range(c)]))


def lefschetz_rhs(model, f, fibers="de_rham", twist: BundleTwist | None = None,
                  subgroup_rows=None, isotropy_resolution=None) -> RhsResult:
    """Sum of per-orbit contributions over the fixed set, with certificates.

    Raises :class:`InfiniteFixedSet` or :class:`NonTransverse` before any
    value is produced when the hypotheses fail."""
    orbits = find_fixed_orbits(model, f)
    contributions = []
    for orbit in orbits:
        contributions.append(orbit_contribution(
            orbit, f, fibers=fibers, twist=twist,
            subgroup_rows=subgroup_rows,
            isotropy_resolution=isotropy_resolution,
        ))
    total = sum(c.total for c in contributions)
    exact = Fraction(0)
    for c in contributions:
        if c.total_exact is None:
            exact = None
            break
        exact += c.total_exact
    return RhsResult(
        value=complex(total),
        value_exact=exact,
        contributions=tuple(contributions),
    )


def theorem_c_scalar_value(model, f) -> float:
    """Closed-form limit of the scalar diagonal pairing: the degree-zero
    per-orbit sum (trace one, untwisted)."""
    return float(lefschetz_rhs(model, f, fibers="scalar").value.real)
