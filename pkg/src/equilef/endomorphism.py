"""Equivariant maps, their action on the complex, and spectral traces.

On a flat torus an equivariant map is affine, ``x -> A x + c`` with an
integer matrix satisfying ``A v = v`` exactly at the symbolic level; on a
weighted sphere it is a diagonal phase rotation.  Pull-back acts mode by
mode (``m -> A^T m`` with a character phase from the translation part), and
because the flow direction is preserved, pulled-back frame covectors stay
inside the horizontal bundle: no projection correction is needed and the
cochain property holds exactly on flow-annihilated forms.

The induced map on harmonic representatives is a compression of the exterior
powers of ``A^T`` restricted to the horizontal subspace.  Its per-degree
traces are elementary symmetric functions of the spectrum of ``A`` with one
copy of the eigenvalue 1 removed, which this module computes exactly from
the integer characteristic polynomial; the floating frame route is kept as a
cross-check.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _ratlin as rl
from . import basic_complex as bc
from .errors import GeneratorMismatch, NotBasic, NotEquivariant
from .geometry_models import FlatTorusModel, WeightedSphereModel
from .torus_group import SymbolicFrequency


@dataclass(frozen=True)
class TorusMap:
    """Affine self-map ``x -> A x + c`` of a flat torus; need not be
    invertible."""

    matrix: tuple
    translation: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", rl.freeze(
            tuple(tuple(int(a) for a in row) for row in self.matrix)))
        object.__setattr__(self, "translation", tuple(
            rl.frac_mod1(Fraction(x)) for x in self.translation))

    @property
    def n(self):
        return len(self.matrix)

    def apply(self, p):
        return rl.vec_mod1(tuple(
            sum(Fraction(a) * Fraction(x) for a, x in zip(row, p)) + t
            for row, t in zip(self.matrix, self.translation)
        ))


@dataclass(frozen=True)
class SpherePhaseMap:
    """Diagonal map ``z_j -> exp(2 pi i phases_j) z_j`` with rational phase
    turns."""

    phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(
            rl.frac_mod1(Fraction(x)) for x in self.phases))

    @property
    def k(self):
        return len(self.phases)


EquivariantMap = TorusMap | SpherePhaseMap


@dataclass(frozen=True)
class BundleTwist:
    """A flat line bundle twist: lifted rotation rate ``weight`` (in the same
    parameter as the flow) and a scalar fiber factor for the endomorphism."""

    weight: SymbolicFrequency
    phi_scalar: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.weight.ambient_dim != 1:
            raise ValueError("a line bundle twist carries a single weight entry")
        object.__setattr__(self, "phi_scalar", complex(self.phi_scalar))
        if not (abs(self.phi_scalar) < math.inf):
            raise ValueError("fiber scalar must be finite")

    def weight_components(self):
        return self.weight.coeffs[0]


def _symbolic_str(row, labels):
    terms = []
    if row[0] != 0 or all(c == 0 for c in row):
        terms.append(str(row[0]))
    for c, label in zip(row[1:], labels):
        if c == 1:
            terms.append(label)
        elif c != 0:
            terms.append(f"{c}*{label}")
    return " + ".join(terms)


@dataclass(frozen=True)
class EquivarianceCertificate:
    """``cochain_on_basic`` holds identically for validated maps; whether the
    pull-back also intertwines the projected differential on sections that
    are not flow-annihilated is a separate fact (it requires the flow
    covector, not just the flow vector, to be preserved) and is reported
    independently as ``cochain_on_all``."""

    map_kind: str
    flow_preserved: bool = True
    cochain_on_basic: bool = True
    cochain_on_all: bool = True
    detail: str = ""


def validate_equivariance(model, f) -> EquivarianceCertificate:
    """Check ``f`` commutes with the flow; exact and symbolic.

    On success the certificate also records that the pull-back is a cochain
    map on flow-annihilated forms, which holds identically in this model
    (pulled-back horizontal covectors are horizontal since the flow direction
    is preserved)."""
    if isinstance(model, FlatTorusModel):
        if not isinstance(f, TorusMap):
            raise NotEquivariant("flat torus models take affine integer maps")
        if f.n != model.n or any(len(row) != model.n for row in f.matrix):
            raise NotEquivariant("matrix shape does not match the model")
        if len(f.translation) != model.n:
            raise NotEquivariant("translation length does not match the model")
        Av = model.v.apply_integer_matrix(f.matrix)
        if Av.coeffs != model.v.coeffs:
            bad = next(i for i in range(model.n)
                       if Av.coeffs[i] != model.v.coeffs[i])
            raise NotEquivariant(
                f"A v != v in coordinate {bad}: "
                f"{_symbolic_str(Av.coeffs[bad], model.v.generator_labels)} != "
                f"{_symbolic_str(model.v.coeffs[bad], model.v.generator_labels)}"
            )
        transpose_fixes_v = model.v.apply_integer_matrix(
            rl.transpose(f.matrix)).coeffs == model.v.coeffs
        return EquivarianceCertificate(
            "torus_affine",
            cochain_on_all=transpose_fixes_v,
            detail="A v = v verified symbolically",
        )
    if isinstance(model, WeightedSphereModel):
        if not isinstance(f, SpherePhaseMap):
            raise NotEquivariant("weighted sphere models take diagonal phase maps")
        if f.k != model.k:
            raise NotEquivariant("phase vector length does not match the model")
        return EquivarianceCertificate(
            "sphere_phase",
            detail="diagonal phases commute with the weighted rotation",
        )
    raise NotEquivariant(f"unsupported model {type(model).__name__}")


@lru_cache(maxsize=None)
def _frame_pullback_matrix(model, matrix):
    frame = bc.frame_for(model)
    A = np.array(matrix, dtype=float)
    return frame.basis @ A.T @ frame.basis.T


def _wedge_minors(M, q):
    """Matrix of the q-th exterior power over sorted index subsets."""
    n = M.shape[0]
    subsets = list(itertools.combinations(range(n), q))
    W = np.zeros((len(subsets), len(subsets)))
    for b, I in enumerate(subsets):
        for a, J in enumerate(subsets):
            W[a, b] = 1.0 if q == 0 else np.linalg.det(M[np.ix_(J, I)])
    return subsets, W


def pullback_on_forms(f: TorusMap, u: bc.BasicForm) -> bc.BasicForm:
    """Pull back a flow-annihilated form: modes map by ``A^T`` with a
    character phase, frame covectors by the horizontal restriction of
    ``A^T``."""
    if not u.basic_flag:
        raise NotBasic("pull-back is defined here only on flow-annihilated forms")
    model = u.model
    validate_equivariance(model, f)
    Mf = _frame_pullback_matrix(model, f.matrix)
    subsets, W = _wedge_minors(Mf, u.degree)
    index = {I: i for i, I in enumerate(subsets)}
    out = {}
    for (m, I), c in u.coeffs.items():
        mT = rl.vec_mat(m, f.matrix)
        phase = cmath.exp(2j * math.pi * float(
            sum(Fraction(mi) * t for mi, t in zip(m, f.translation))))
        col = index[I]
        for row, J in enumerate(subsets):
            w = W[row, col]
            if w == 0.0:
                continue
            key = (mT, J)
            out[key] = out.get(key, 0.0) + c * phase * w
    return bc.BasicForm(model, u.degree, out, basic_flag=True)


def exact_exterior_traces(matrix):
    """Per-degree traces of the exterior powers of the horizontal restriction,
    as exact integers from the characteristic polynomial with one eigenvalue-1
    factor removed."""
    coeffs = rl.char_poly(matrix)
    h = rl.deflate_root_one(coeffs)
    return tuple((-1) ** q * h[q] for q in range(len(h)))


def rational_flow_mode(model: FlatTorusModel):
    """Primitive integer vector parallel to the flow direction, if the
    direction is rational; ``None`` otherwise."""
    v = model.v
    if any(row[j] != 0 for row in v.coeffs for j in range(1, 1 + v.generator_count)):
        return None
    scaled = rl.scale_rows_to_int([[row[0] for row in v.coeffs]])[0]
    g = math.gcd(*(abs(x) for x in scaled))
    return tuple(x // g for x in scaled)


def harmonic_mode(model: FlatTorusModel, twist: BundleTwist | None = None):
    """The unique mode carrying the harmonic space: ``m`` parallel to the
    flow with ``m . v`` equal to the twist weight.  Untwisted this is the
    zero mode; a twist may shift it or empty the space (``None``)."""
    if twist is None:
        return tuple(0 for _ in range(model.n))
    if twist.weight.generator_labels != model.v.generator_labels:
        raise GeneratorMismatch("twist weight must use the model's generators")
    sigma = twist.weight_components()
    if all(c == 0 for c in sigma):
        return tuple(0 for _ in range(model.n))
    p = rational_flow_mode(model)
    if p is None:
        # irrational flow direction: the only parallel mode is zero, which
        # cannot carry a nonzero weight
        return None
    return _parallel_mode_for(model, p, sigma)


def _parallel_mode_for(model, p, sigma):
    rho = model.v.symbolic_dot(p)
    # p is rational-parallel, so rho has no generator components
    if any(c != 0 for c in rho[1:]):
        return None
    if any(c != 0 for c in sigma[1:]):
        return None
    t = Fraction(sigma[0], rho[0])
    if t.denominator != 1:
        return None
    return tuple(int(t) * x for x in p)


def twisted_invariant_modes(model: FlatTorusModel, cutoff: int,
                            twist: BundleTwist | None = None):
    """Modes of twisted sections annihilated by the flow derivative:
    ``m . v`` equals the twist weight, exactly."""
    if twist is None:
        return bc.basic_modes(model, cutoff)
    sigma = twist.weight_components()
    out = []
    for m in itertools.product(range(-cutoff, cutoff + 1), repeat=model.n):
        if model.v.symbolic_dot(m) == sigma:
            out.append(m)
    return tuple(sorted(out))


@dataclass(frozen=True)
class CohomologyAction:
    """Induced action on harmonic representatives: one matrix per degree,
    exact per-degree traces, and the alternating-sum Lefschetz number."""

    matrices: tuple
    traces: tuple                  # complex, one per degree
    trace_integers: tuple          # exact fiber traces (no phase factor)
    phase_turns: Fraction          # exact character phase of the harmonic mode
    scalar: complex                # fiber scalar of the twist
    harmonic_mode_vec: tuple | None
    lefschetz: complex
    lefschetz_exact: Fraction | None

    @property
    def degrees(self):
        return len(self.traces)


def cohomology_action(model: FlatTorusModel, f: TorusMap,
                      twist: BundleTwist | None = None) -> CohomologyAction:
    """Compress the pull-back to the harmonic spaces and take the alternating
    trace.

    The harmonic space in each degree is carried by a single mode; the
    compression is the exterior power of the horizontal restriction times
    the character phase of that mode (and the twist's fiber scalar).  The
    alternating sum telescopes to a determinant, so untwisted values are
    exact integers."""
    validate_equivariance(model, f)
    n = model.n
    ext = exact_exterior_traces(f.matrix)
    scalar = twist.phi_scalar if twist is not None else 1.0 + 0.0j
    m0 = harmonic_mode(model, twist)
    Mf = _frame_pullback_matrix(model, f.matrix)
    if m0 is None or rl.vec_mat(m0, f.matrix) != m0:
        empty = tuple(np.zeros((math.comb(n - 1, q),) * 2) for q in range(n))
        return CohomologyAction(
            matrices=empty,
            traces=tuple(0.0 for _ in range(n)),
            trace_integers=tuple(0 for _ in range(n)),
            phase_turns=Fraction(0),
            scalar=scalar,
            harmonic_mode_vec=m0,
            lefschetz=0.0,
            lefschetz_exact=Fraction(0),
        )
    phase_turns = rl.frac_mod1(sum(
        Fraction(mi) * t for mi, t in zip(m0, f.translation)))
    phase = cmath.exp(2j * math.pi * float(phase_turns))
    factor = scalar * phase
    matrices = []
    traces = []
    for q in range(n):
        _, W = _wedge_minors(Mf, q)
        matrices.append(factor * W)
        traces.append(factor * ext[q])
        # the floating frame route must agree with the exact route
        assert abs(np.trace(W) - ext[q]) < 1e-8 * max(1.0, abs(ext[q]))
    alt = sum((-1) ** q * e for q, e in enumerate(ext))
    lefschetz = factor * alt
    exact = None
    if phase_turns == 0 and twist is None:
        exact = Fraction(alt)
    return CohomologyAction(
        matrices=tuple(matrices),
        traces=tuple(traces),
        trace_integers=ext,
        phase_turns=phase_turns,
        scalar=scalar,
        harmonic_mode_vec=m0,
        lefschetz=lefschetz,
        lefschetz_exact=exact,
    )


def harmonic_dimensions(model: FlatTorusModel, twist: BundleTwist | None = None):
    m0 = harmonic_mode(model, twist)
    if m0 is None:
        return tuple(0 for _ in range(model.n))
    return tuple(math.comb(model.n - 1, q) for q in range(model.n))


def heat_damped_traces(model: FlatTorusModel, f: TorusMap, s: float,
                       cutoff: int, twist: BundleTwist | None = None):
    """Per-degree traces of the pull-back damped by the heat factor of the
    elliptic operator, restricted to flow-annihilated sections within the
    truncation.

    Only modes fixed by ``A^T`` contribute; their alternating sum over the
    degree telescopes mode by mode, so the result is independent of ``s``
    up to the truncation."""
    if s <= 0:
        raise ValueError("the damping parameter must be positive")
    validate_equivariance(model, f)
    n = model.n
    Mf = _frame_pullback_matrix(model, f.matrix)
    fiber_traces = [float(np.trace(_wedge_minors(Mf, q)[1])) for q in range(n)]
    scalar = twist.phi_scalar if twist is not None else 1.0 + 0.0j
    v = np.array(model.v.float_values())
    vhat = v / np.linalg.norm(v)
    out = [0.0 + 0.0j] * n
    for m in twisted_invariant_modes(model, cutoff, twist):
        if rl.vec_mat(m, f.matrix) != tuple(m):
            continue
        phase = cmath.exp(2j * math.pi * float(
            sum(Fraction(mi) * t for mi, t in zip(m, f.translation))))
        t_along = float(np.dot(m, vhat))
        lam = 4.0 * math.pi**2 * (float(sum(x * x for x in m)) - t_along**2)
        lam = max(lam, 0.0)
        damp = math.exp(-s * lam)
        for q in range(n):
            out[q] += scalar * phase * fiber_traces[q] * damp
    return tuple(out)


def alternating_heat_trace(model, f, s, cutoff, twist=None) -> complex:
    traces = heat_damped_traces(model, f, s, cutoff, twist)
    return sum((-1) ** q * t for q, t in enumerate(traces))
