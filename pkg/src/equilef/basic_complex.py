"""Fourier-mode model of the horizontal de Rham complex on flat tori.

Sections are finite Fourier sums valued in exterior powers of the rank-(n-1)
bundle of covectors annihilating the flow.  Everything in sight is
block-diagonal over modes:

* the horizontal differential wedges mode ``m`` by ``2 pi i`` times the
  projection of ``m`` orthogonal to the flow, expressed in an orthonormal
  frame of that bundle;
* the flow derivative multiplies mode ``m`` by ``2 pi i (m . v) / |v|``;
* the second-order operator combining the horizontal Laplacian with minus
  the squared flow derivative acts as ``4 pi^2 |m|^2`` on every mode, which
  is strictly positive away from ``m = 0`` (the ellipticity witness).

Whether a mode is annihilated by the flow derivative (``m . v = 0``) is
decided exactly at the symbolic level; the frame itself is floating point.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _ratlin as rl
from .errors import DegreeOverflow
from .geometry_models import FlatTorusModel

TWO_PI = 2.0 * math.pi
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class HStarFrame:
    """Orthonormal frame data at a flat torus model: the unit covector along
    the flow and an orthonormal basis of its orthogonal complement."""

    model: FlatTorusModel
    theta: np.ndarray
    basis: np.ndarray

    @property
    def n(self):
        return self.model.n


@lru_cache(maxsize=None)
def frame_for(model: FlatTorusModel) -> HStarFrame:
    v = np.array(model.v.float_values())
    theta = v / np.linalg.norm(v)
    proj = np.eye(model.n) - np.outer(theta, theta)
    u, s, _ = np.linalg.svd(proj)
    basis = []
    for j in range(model.n - 1):
        col = u[:, j]
        lead = next((x for x in col if abs(x) > 1e-9), 1.0)
        basis.append(col if lead > 0 else -col)
    basis = np.array(basis) if basis else np.zeros((0, model.n))
    frame = HStarFrame(model, theta, basis)
    # frame sanity: theta pairs to 1 with the unit flow, basis annihilates it
    assert abs(float(theta @ theta) - 1.0) < 1e-12
    assert np.max(np.abs(basis @ theta)) < 1e-12 if basis.size else True
    return frame


@lru_cache(maxsize=None)
def _basic_constraints_int(v):
    return rl.freeze(rl.scale_rows_to_int(v.constraint_rows()))


def is_basic_mode(model: FlatTorusModel, m) -> bool:
    """Exact decision of ``m . v = 0``."""
    rows = _basic_constraints_int(model.v)
    return all(sum(a * mi for a, mi in zip(row, m)) == 0 for row in rows)


@lru_cache(maxsize=None)
def basic_modes(model: FlatTorusModel, cutoff: int):
    """All modes with sup-norm at most ``cutoff`` annihilated by the flow."""
    rows = _basic_constraints_int(model.v)
    out = []
    for m in itertools.product(range(-cutoff, cutoff + 1), repeat=model.n):
        if all(sum(a * mi for a, mi in zip(row, m)) == 0 for row in rows):
            out.append(m)
    return tuple(sorted(out))


def mode_eigenvalue(m) -> float:
    """Eigenvalue of the elliptic operator on mode ``m``: ``4 pi^2 |m|^2``."""
    return 4.0 * math.pi**2 * float(sum(mi * mi for mi in m))


class BasicForm:
    """A truncated Fourier section of the degree-q exterior bundle.

    ``coeffs`` maps ``(mode, frame index subset)`` to a complex coefficient.
    Treated as immutable: operations return new forms.  ``basic_flag`` records
    (and, on construction, verifies) that every mode is annihilated by the
    flow derivative.
    """

    __slots__ = ("model", "degree", "coeffs", "cutoff", "basic_flag")

    def __init__(self, model, degree, coeffs, cutoff=None, basic_flag=None):
        self.model = model
        self.degree = int(degree)
        clean = {}
        for (m, I), c in coeffs.items():
            if abs(c) <= PRUNE_TOL:
                continue
            m = tuple(int(x) for x in m)
            I = tuple(sorted(int(i) for i in I))
            if len(I) != self.degree:
                raise ValueError("index subset size must equal the degree")
            clean[(m, I)] = complex(c)
        self.coeffs = clean
        if cutoff is None:
            cutoff = max((max(abs(x) for x in m) for (m, _) in clean), default=0)
        self.cutoff = int(cutoff)
        if basic_flag is None:
            basic_flag = all(is_basic_mode(model, m) for (m, _) in clean)
        elif basic_flag:
            for m, _ in clean:
                if not is_basic_mode(model, m):
                    raise ValueError(f"mode {m} is not annihilated by the flow")
        self.basic_flag = bool(basic_flag)

    def norm(self):
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def scaled(self, factor):
        return BasicForm(
            self.model,
            self.degree,
            {key: factor * c for key, c in self.coeffs.items()},
            cutoff=self.cutoff,
            basic_flag=self.basic_flag,
        )

    def plus(self, other, factor=1.0):
        assert other.degree == self.degree and other.model == self.model
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0.0) + factor * c
        return BasicForm(self.model, self.degree, out,
                         cutoff=max(self.cutoff, other.cutoff))

    def value_components(self, x):
        """Pointwise evaluation: frame-component values at ``x`` (an array of
        n angles in full turns)."""
        x = np.asarray(x, dtype=float)
        out = {}
        for (m, I), c in self.coeffs.items():
            phase = c * np.exp(2j * math.pi * float(np.dot(m, x)))
            out[I] = out.get(I, 0.0) + phase
        return out

    def __repr__(self):
        return (f"BasicForm(degree={self.degree}, modes={len(self.coeffs)}, "
                f"cutoff={self.cutoff}, basic={self.basic_flag})")


def zero_form(model, degree):
    return BasicForm(model, degree, {})


def inner_product(u: BasicForm, w: BasicForm) -> complex:
    """L^2 pairing; the frame is orthonormal and the density has unit mass,
    so this is the coefficient pairing."""
    if u.degree != w.degree:
        return 0.0
    total = 0.0
    for key, c in u.coeffs.items():
        d = w.coeffs.get(key)
        if d is not None:
            total += c * d.conjugate()
    return total


def _insert_index(I, k):
    pos = bisect_left(I, k)
    if pos < len(I) and I[pos] == k:
        return None, 0
    return I[:pos] + (k,) + I[pos:], (-1) ** pos


def _remove_index(I, k):
    pos = bisect_left(I, k)
    return I[:pos] + I[pos + 1:], (-1) ** pos


def apply_D(form: BasicForm) -> BasicForm:
    """The horizontal differential: wedge each mode by ``2 pi i`` times its
    projection orthogonal to the flow, in frame coordinates.  Squares to zero
    mode by mode."""
    model = form.model
    if form.degree > model.n - 2:
        raise DegreeOverflow(f"degree {form.degree} has no successor")
    frame = frame_for(model)
    out = {}
    for (m, I), c in form.coeffs.items():
        a = frame.basis @ np.asarray(m, dtype=float)
        for k in range(model.n - 1):
            if a[k] == 0.0:
                continue
            newI, sign = _insert_index(I, k)
            if newI is None:
                continue
            key = (m, newI)
            out[key] = out.get(key, 0.0) + sign * 2j * math.pi * a[k] * c
    return BasicForm(model, form.degree + 1, out, cutoff=form.cutoff,
                     basic_flag=form.basic_flag)


def apply_D_adjoint(form: BasicForm) -> BasicForm:
    """Formal adjoint of the horizontal differential (mode-wise interior
    product).  In degree zero this is the zero map."""
    model = form.model
    if form.degree == 0:
        return zero_form(model, 0)
    frame = frame_for(model)
    out = {}
    for (m, I), c in form.coeffs.items():
        a = frame.basis @ np.asarray(m, dtype=float)
        for k in I:
            if a[k] == 0.0:
                continue
            newI, sign = _remove_index(I, k)
            key = (m, newI)
            out[key] = out.get(key, 0.0) - sign * 2j * math.pi * a[k] * c
    return BasicForm(model, form.degree - 1, out, cutoff=form.cutoff,
                     basic_flag=form.basic_flag)


def apply_lie(form: BasicForm) -> BasicForm:
    """Derivative along the unit-speed flow: mode ``m`` is multiplied by
    ``2 pi i (m . v) / |v|``.  Exactly zero on basic forms."""
    if form.basic_flag:
        return zero_form(form.model, form.degree)
    v = np.array(form.model.v.float_values())
    vhat = v / np.linalg.norm(v)
    out = {}
    for (m, I), c in form.coeffs.items():
        t = float(np.dot(m, vhat))
        if is_basic_mode(form.model, m):
            continue
        out[(m, I)] = 2j * math.pi * t * c
    return BasicForm(form.model, form.degree, out, cutoff=form.cutoff)


def apply_P(form: BasicForm) -> BasicForm:
    """The elliptic operator: multiplication by ``4 pi^2 |m|^2`` on each mode
    (the horizontal Koszul identity plus the squared flow rate recombine into
    the full mode norm)."""
    out = {
        (m, I): mode_eigenvalue(m) * c
        for (m, I), c in form.coeffs.items()
    }
    return BasicForm(form.model, form.degree, out, cutoff=form.cutoff,
                     basic_flag=form.basic_flag)


def apply_P_composed(form: BasicForm) -> BasicForm:
    """The same operator assembled from its factors; used as the independent
    route when validating the diagonal formula."""
    top = form.degree > form.model.n - 2
    up = zero_form(form.model, form.degree) if top else apply_D_adjoint(apply_D(form))
    down = apply_D(apply_D_adjoint(form)) if form.degree > 0 else zero_form(form.model, form.degree)
    lie2 = apply_lie(apply_lie(form))
    return up.plus(down).plus(lie2, factor=-1.0)


def harmonic_basis(model: FlatTorusModel, q: int, cutoff: int):
    """Orthonormal basis of the harmonic space in degree ``q`` within the
    truncation: the constant frame forms.  Its dimension is binom(n-1, q)
    independent of the cutoff."""
    n = model.n
    if q < 0 or q > n - 1:
        return []
    zero = tuple(0 for _ in range(n))
    return [
        BasicForm(model, q, {(zero, I): 1.0}, cutoff=cutoff, basic_flag=True)
        for I in itertools.combinations(range(n - 1), q)
    ]


def harmonic_dimension(model: FlatTorusModel, q: int, cutoff: int) -> int:
    return len(harmonic_basis(model, q, cutoff))


def mode_complex_matrices(model: FlatTorusModel, m):
    """Matrices of the differential on the single-mode exterior family, one
    per degree; used for rank-nullity bookkeeping of the per-eigenvalue
    complexes."""
    n = model.n
    mats = []
    for q in range(n - 1):
        dom = list(itertools.combinations(range(n - 1), q))
        cod = list(itertools.combinations(range(n - 1), q + 1))
        cod_index = {I: i for i, I in enumerate(cod)}
        M = np.zeros((len(cod), len(dom)), dtype=complex)
        for j, I in enumerate(dom):
            u = BasicForm(model, q, {(tuple(m), I): 1.0})
            for (m2, J), c in apply_D(u).coeffs.items():
                M[cod_index[J], j] = c
        mats.append(M)
    return mats


def eigen_complex_cohomology_dims(model: FlatTorusModel, m):
    """Cohomology dimensions of the single-mode complex (all zero for basic
    modes other than zero)."""
    mats = mode_complex_matrices(model, m)
    n = model.n
    dims = []
    for q in range(n):
        dim_q = math.comb(n - 1, q)
        rank_in = np.linalg.matrix_rank(mats[q - 1]) if q >= 1 and mats[q - 1].size else 0
        rank_out = np.linalg.matrix_rank(mats[q]) if q <= n - 2 and mats[q].size else 0
        dims.append(dim_q - rank_in - rank_out)
    return dims


def basic_spectrum(model: FlatTorusModel, q: int, cutoff: int):
    """Sorted (eigenvalue, multiplicity) table of the elliptic operator on
    flow-annihilated sections in degree ``q`` within the truncation."""
    counts = {}
    for m in basic_modes(model, cutoff):
        lam = round(mode_eigenvalue(m), 12)
        counts[lam] = counts.get(lam, 0) + 1
    fiber = math.comb(model.n - 1, q)
    return [(lam, mult * fiber) for lam, mult in sorted(counts.items())]
