"""Model manifolds with an isometric flow: flat tori and weighted spheres.

Both models carry a torus group acting by isometries (translations on the
flat torus, diagonal rotations on the sphere), and every orbit closure is an
orbit of that group.  Orbits are canonicalized exactly: on the torus by the
residue of the point under the relation lattice of the flow closure, on the
sphere by moduli plus the residue of the phase vector under the restricted
closure group.  Quotient-level data is never materialized; all computations
happen upstairs on the model manifold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _ratlin as rl
from . import torus_group as tg
from .errors import OffManifold


@dataclass(frozen=True)
class FlatTorusModel:
    """The standard flat n-torus with linear flow along ``v`` and unit-mass
    Lebesgue density."""

    v: tg.SymbolicFrequency

    def __post_init__(self):
        if self.v.is_zero():
            raise ValueError("flow direction must be nonzero")

    @property
    def n(self):
        return self.v.ambient_dim

    @property
    def group(self):
        return _torus_group_of(self.v)

    @property
    def base_lattice(self):
        """Rows of the relation lattice; the map ``x -> base_lattice @ x`` is
        the projection onto base coordinates for the orbit space."""
        return self.group.relation_lattice

    @property
    def base_dim(self):
        return len(self.base_lattice)


@lru_cache(maxsize=None)
def _torus_group_of(v):
    return tg.SubtorusGroup(v.ambient_dim, tg.relation_lattice(v))


@dataclass(frozen=True)
class SpherePoint:
    """Exact point of a weighted sphere: rational squared moduli summing to
    one and rational phases measured in full turns."""

    moduli_sq: tuple
    phases: tuple

    def __post_init__(self):
        ms = tuple(Fraction(x) for x in self.moduli_sq)
        ph = tuple(rl.frac_mod1(Fraction(x)) for x in self.phases)
        if len(ms) != len(ph):
            raise ValueError("moduli and phases must have equal length")
        if any(m < 0 for m in ms):
            raise ValueError("squared moduli must be nonnegative")
        object.__setattr__(self, "moduli_sq", ms)
        object.__setattr__(self, "phases", ph)

    @property
    def k(self):
        return len(self.moduli_sq)

    @property
    def support(self):
        return tuple(j for j, m in enumerate(self.moduli_sq) if m > 0)

    def to_complex(self):
        return np.array(
            [
                math.sqrt(float(m)) * complex(math.cos(2 * math.pi * float(p)),
                                              math.sin(2 * math.pi * float(p)))
                for m, p in zip(self.moduli_sq, self.phases)
            ]
        )

    @classmethod
    def from_complex(cls, z, tol=1e-9, max_denominator=10**6):
        z = np.asarray(z, dtype=complex)
        ms, ph = [], []
        for zj in z:
            m = Fraction(float(abs(zj)) ** 2).limit_denominator(max_denominator)
            if abs(float(m) - abs(zj) ** 2) > tol:
                raise ValueError("squared modulus is not recognizably rational")
            if m == 0:
                ph.append(Fraction(0))
            else:
                turns = math.atan2(zj.imag, zj.real) / (2 * math.pi)
                p = Fraction(turns).limit_denominator(max_denominator)
                if abs(float(p) - turns) > tol:
                    raise ValueError("phase is not a recognizable rational turn")
                ph.append(p)
            ms.append(m)
        return cls(tuple(ms), tuple(ph))


@dataclass(frozen=True)
class WeightedSphereModel:
    """The unit sphere in C^k with the diagonal flow rotating coordinate j
    at rate ``weights[j]`` (phases measured in the same parameter as the
    flow, so group elements are points of the k-torus acting by
    ``z_j -> exp(2 pi i w_j) z_j``)."""

    weights: tg.SymbolicFrequency

    def __post_init__(self):
        if any(w <= 0 for w in self.weights.float_values()):
            raise ValueError("weights must be positive")

    @property
    def k(self):
        return self.weights.ambient_dim

    @property
    def group(self):
        return _torus_group_of(self.weights)

    def restricted_group(self, support):
        return _torus_group_of(self.weights.restrict(support))


@dataclass(frozen=True, eq=False)
class ClosedOrbit:
    """A group-orbit closure with canonical exact identifier.

    ``key`` determines the orbit; two orbits of the same model are equal iff
    their keys are.  ``conormal_basis`` has one column per conormal direction
    at the base point (exact lattice covectors on the torus, an orthonormal
    numeric frame on the sphere)."""

    model: object
    base_point: object
    dim: int
    isotropy: tg.IsotropyDescriptor
    conormal_basis: np.ndarray
    key: tuple

    def __eq__(self, other):
        return (
            isinstance(other, ClosedOrbit)
            and self.model == other.model
            and self.key == other.key
        )

    def __hash__(self):
        return hash((self.model, self.key))


def _exact_vector(p, n):
    if len(p) != n:
        raise OffManifold(f"expected a point with {n} coordinates")
    out = []
    for x in p:
        if isinstance(x, float):
            raise OffManifold("torus points must be exact rationals, not floats")
        out.append(Fraction(x))
    return tuple(out)


def _solve_from_level(lattice, level):
    """Canonical exact solution of ``lattice @ x = level`` using the HNF pivot
    structure (non-pivot coordinates are zero)."""
    n = len(lattice[0]) if lattice else 0
    if not lattice:
        return tuple(Fraction(0) for _ in range(n))
    x = rl.solve_rational(lattice, level)
    if x is None:
        raise AssertionError("level sets of a full-row-rank lattice are nonempty")
    return rl.vec_mod1(x)


def orbit_through(model, p) -> ClosedOrbit:
    """The orbit closure through ``p`` with canonical base point, dimension,
    isotropy descriptor and conormal frame."""
    if isinstance(model, FlatTorusModel):
        return _torus_orbit(model, p)
    if isinstance(model, WeightedSphereModel):
        return _sphere_orbit(model, p)
    raise TypeError(f"unsupported model {type(model).__name__}")


def _torus_orbit(model: FlatTorusModel, p) -> ClosedOrbit:
    point = _exact_vector(p, model.n)
    L = model.base_lattice
    base_coords = rl.vec_mod1(rl.mat_vec(L, point)) if L else ()
    canonical = _solve_from_level(L, base_coords) if L else tuple(
        Fraction(0) for _ in range(model.n)
    )
    conormal = np.array([[float(m) for m in row] for row in L], dtype=float).T \
        if L else np.zeros((model.n, 0))
    return ClosedOrbit(
        model=model,
        base_point=canonical,
        dim=model.group.dim,
        isotropy=tg.trivial_isotropy(model.n),
        conormal_basis=conormal,
        key=("torus", base_coords),
    )


def _sphere_isotropy(model: WeightedSphereModel, support) -> tg.IsotropyDescriptor:
    """Elements of the closure group that fix every coordinate in the
    support: congruences on the group's parametrizing torus."""
    G = model.group
    C = G.complement_basis()
    d = G.dim
    A = [[C[i][j] for i in range(d)] for j in support]
    sol = (rl.solve_congruences(A, [Fraction(0)] * len(support))
           if A else rl.solve_congruences_free(d))
    assert sol is not None
    ambient_tangent = [rl.vec_mat(row, C) for row in sol.free]
    ident_lattice = rl.integer_kernel(ambient_tangent, n=model.k)
    ident = tg.SubtorusGroup(model.k, ident_lattice)
    param_reps = [
        rl.vec_mod1(tuple(a + b for a, b in zip(sol.particular, rep)))
        for rep in sol.torsion_reps
    ]
    reps = [rl.vec_mod1(rl.vec_mat(t, C)) for t in param_reps]
    # put the identity first
    zero = tuple(Fraction(0) for _ in range(model.k))
    reps = sorted(set(reps), key=lambda r: (r != zero, r))
    return tg.IsotropyDescriptor(ident, tuple(reps))


def _sphere_orbit(model: WeightedSphereModel, p) -> ClosedOrbit:
    if not isinstance(p, SpherePoint):
        p = SpherePoint.from_complex(p)
    if p.k != model.k:
        raise OffManifold(f"expected a point of C^{model.k}")
    total = sum(p.moduli_sq)
    if total != 1:
        if abs(float(total) - 1.0) > 1e-12:
            raise OffManifold("point does not lie on the unit sphere")
    support = p.support
    if not support:
        raise OffManifold("the origin is not on the sphere")
    GS = model.restricted_group(support)
    LS = GS.relation_lattice
    theta_S = tuple(p.phases[j] for j in support)
    phase_coords = rl.vec_mod1(rl.mat_vec(LS, theta_S)) if LS else ()
    theta_canon = list(_solve_from_level(LS, phase_coords)) if LS else [
        Fraction(0) for _ in support
    ]
    # gauge: rotate the first supported phase to zero with a group shift
    CS = GS.complement_basis()
    if CS:
        A = [[CS[i][0] for i in range(len(CS))]]
        shift = rl.solve_congruences(A, [-theta_canon[0]])
        if shift is not None:
            t0 = shift.particular
            theta_canon = [
                rl.frac_mod1(th + sum(t0[i] * CS[i][j] for i in range(len(CS))))
                for j, th in enumerate(theta_canon)
            ]
    phases = [Fraction(0)] * model.k
    for idx, j in enumerate(support):
        phases[j] = theta_canon[idx]
    base_point = SpherePoint(p.moduli_sq, tuple(phases))
    isotropy = _sphere_isotropy(model, support)
    conormal = _sphere_conormal(model, base_point)
    return ClosedOrbit(
        model=model,
        base_point=base_point,
        dim=GS.dim,
        isotropy=isotropy,
        conormal_basis=conormal,
        key=("sphere", support, p.moduli_sq, phase_coords),
    )


def realify(z):
    """R^{2k} coordinates (Re z1, Im z1, ..., Re zk, Im zk)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def _sphere_conormal(model: WeightedSphereModel, p: SpherePoint):
    """Orthonormal basis of the conormal space of the orbit at ``p`` inside
    the sphere, as columns in R^{2k}."""
    z = p.to_complex()
    spanning = [realify(z)]
    for row in model.group.complement_basis():
        spanning.append(realify(2j * math.pi * np.array([b * zj for b, zj in zip(row, z)])))
    M = np.array(spanning).T  # 2k x (1 + d)
    u, s, _ = np.linalg.svd(M, full_matrices=True)
    rank = int((s > 1e-12).sum())
    null = u[:, rank:]
    # deterministic column signs
    cols = []
    for j in range(null.shape[1]):
        col = null[:, j]
        lead = next((x for x in col if abs(x) > 1e-9), 1.0)
        cols.append(col if lead > 0 else -col)
    return np.array(cols).T if cols else np.zeros((2 * model.k, 0))


def isotropy_group(model, orbit: ClosedOrbit) -> tg.IsotropyDescriptor:
    """Stabilizer of the orbit's points inside the closure group (trivial on
    flat tori; phase congruences on weighted spheres)."""
    if isinstance(model, FlatTorusModel):
        return tg.trivial_isotropy(model.n)
    if isinstance(model, WeightedSphereModel):
        return _sphere_isotropy(model, orbit.base_point.support)
    raise TypeError(f"unsupported model {type(model).__name__}")


def induced_base_map(model: FlatTorusModel, f):
    """Express an equivariant affine torus map in base coordinates.

    Returns ``(A_bar, c_bar)`` acting on the base torus by
    ``x_bar -> A_bar x_bar + c_bar``; ``A_bar`` is the unique integer matrix
    with ``A_bar @ L = L @ A`` for the relation lattice ``L``.
    """
    L = model.base_lattice
    A = f.matrix
    c = f.translation
    if not L:
        return (), ()
    LA = rl.mat_mul(L, rl.freeze(A))
    rows = []
    Lt = rl.transpose(L)
    for target in LA:
        x = rl.solve_rational(Lt, target)
        if x is None or not rl.is_integral_vector(x):
            raise AssertionError("equivariant map does not descend to the base torus")
        rows.append(tuple(int(v) for v in x))
    A_bar = rl.freeze(rows)
    assert rl.mat_mul(A_bar, L) == LA
    c_bar = rl.vec_mod1(rl.mat_vec(L, tuple(Fraction(x) for x in c)))
    return A_bar, c_bar


def translate(model, p, g):
    """Act by a group element: translation on the torus, phase rotation on
    the sphere.  Exact."""
    if isinstance(model, FlatTorusModel):
        return rl.vec_mod1(tuple(Fraction(a) + Fraction(b) for a, b in zip(p, g)))
    point = p if isinstance(p, SpherePoint) else SpherePoint.from_complex(p)
    return SpherePoint(
        point.moduli_sq,
        tuple(rl.frac_mod1(ph + Fraction(gj)) for ph, gj in zip(point.phases, g)),
    )
