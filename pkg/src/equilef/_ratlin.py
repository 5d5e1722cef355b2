"""Exact linear algebra over the integers and the rationals.

Every function in this module computes with plain Python ints and
``fractions.Fraction``; no floating point enters any decision.  Matrices are
sequences of rows and are returned as tuples of tuples.  The ambient
dimensions in this package are tiny (at most eight or so), so the classical
cubic algorithms with exact arithmetic are more than fast enough.

The three workhorses are

* ``hnf_with_transform`` -- row-style Hermite normal form with a unimodular
  row transform, used to canonicalize integer lattices;
* ``integer_kernel`` -- a basis of ``{x in Z^n : A x = 0}`` for a rational
  constraint matrix ``A``, which is how group closures are computed;
* ``solve_congruences`` -- the full solution set of ``A t = b (mod 1)`` on a
  torus, described as particular + torsion + connected part, via the Smith
  normal form.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def freeze(rows):
    return tuple(tuple(r) for r in rows)


def identity_rows(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(rows):
    if not rows:
        return ()
    return freeze(zip(*rows))


def mat_mul(A, B):
    if not A:
        return ()
    cols = len(B[0]) if B else 0
    return freeze(
        [sum(a * B[k][j] for k, a in enumerate(row)) for j in range(cols)]
        for row in A
    )


def mat_vec(A, x):
    return tuple(sum(a * xi for a, xi in zip(row, x)) for row in A)


def vec_mat(x, A):
    if not A:
        return ()
    return tuple(sum(x[i] * A[i][j] for i in range(len(A))) for j in range(len(A[0])))


def frac_mod1(q):
    q = Fraction(q)
    return q - Fraction(math.floor(q))


def vec_mod1(x):
    return tuple(frac_mod1(q) for q in x)


def is_integral_vector(x):
    return all(Fraction(q).denominator == 1 for q in x)


def _row_axpy(rows, i, j, q):
    ri, rj = rows[i], rows[j]
    for k in range(len(ri)):
        ri[k] -= q * rj[k]


def _col_axpy(rows, j, i, q):
    for row in rows:
        row[j] -= q * row[i]


def hnf_with_transform(M, ncols=None):
    """Row Hermite normal form ``H = U M`` with ``U`` unimodular.

    ``H`` is in row echelon form with strictly increasing pivot columns,
    positive pivots, entries above each pivot reduced into ``[0, pivot)``,
    and zero rows collected at the bottom.  This makes ``H`` a canonical
    basis of the row lattice of ``M``.
    """
    rows = [list(map(int, r)) for r in M]
    m = len(rows)
    n = len(rows[0]) if m else (ncols or 0)
    U = identity_rows(m)
    r = 0
    for col in range(n):
        if r == m:
            break
        while True:
            piv = None
            best = None
            for i in range(r, m):
                a = rows[i][col]
                if a != 0 and (best is None or abs(a) < best):
                    piv, best = i, abs(a)
            if piv is None:
                break
            if piv != r:
                rows[r], rows[piv] = rows[piv], rows[r]
                U[r], U[piv] = U[piv], U[r]
            clean = True
            for i in range(r + 1, m):
                if rows[i][col] != 0:
                    q = rows[i][col] // rows[r][col]
                    _row_axpy(rows, i, r, q)
                    _row_axpy(U, i, r, q)
                    if rows[i][col] != 0:
                        clean = False
            if clean:
                break
        if rows[r][col] != 0:
            if rows[r][col] < 0:
                rows[r] = [-a for a in rows[r]]
                U[r] = [-a for a in U[r]]
            for i in range(r):
                q = rows[i][col] // rows[r][col]
                if q:
                    _row_axpy(rows, i, r, q)
                    _row_axpy(U, i, r, q)
            r += 1
    return freeze(rows), freeze(U)


def hnf(M, ncols=None):
    """Canonical HNF basis of the row lattice of ``M`` (zero rows dropped)."""
    H, _ = hnf_with_transform(M, ncols=ncols)
    return tuple(row for row in H if any(row))


def lattice_rank(M):
    return len(hnf(M))


def scale_rows_to_int(rows):
    """Clear denominators row by row; the row lattice's rational span and the
    kernel are unchanged."""
    out = []
    for row in rows:
        fr = [Fraction(a) for a in row]
        den = math.lcm(*(f.denominator for f in fr)) if fr else 1
        out.append([int(f * den) for f in fr])
    return out


def integer_kernel(constraints, n=None):
    """HNF basis of ``{x in Z^n : C x = 0}`` for rational constraint rows C.

    The result is automatically a saturated lattice.  With no constraints the
    kernel is all of Z^n.
    """
    rows = scale_rows_to_int(constraints)
    if rows:
        n = len(rows[0])
    if n is None:
        raise ValueError("ambient dimension required when there are no constraints")
    if not rows:
        return freeze(identity_rows(n))
    H, U = hnf_with_transform(transpose(rows), ncols=len(rows))
    kernel = [U[i] for i in range(n) if not any(H[i])]
    return hnf(kernel, ncols=n) if kernel else ()


def saturate(rows, n=None):
    """Saturation of the row lattice: ``span_Q(rows) ∩ Z^n``."""
    if rows:
        n = len(rows[0])
    return integer_kernel(integer_kernel(rows, n=n), n=n)


def snf_with_transforms(M):
    """Smith normal form ``D = S M T`` with unimodular ``S`` and ``T``.

    ``D`` is diagonal with nonnegative entries satisfying d1 | d2 | ... .
    """
    A = [list(map(int, r)) for r in M]
    m = len(A)
    n = len(A[0]) if m else 0
    S = identity_rows(m)
    T = identity_rows(n)
    t = 0
    while t < min(m, n):
        piv = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = A[i][j]
                if a != 0 and (best is None or abs(a) < best):
                    piv, best = (i, j), abs(a)
        if piv is None:
            break
        i0, j0 = piv
        if i0 != t:
            A[t], A[i0] = A[i0], A[t]
            S[t], S[i0] = S[i0], S[t]
        if j0 != t:
            for row in A:
                row[t], row[j0] = row[j0], row[t]
            for row in T:
                row[t], row[j0] = row[j0], row[t]
        while True:
            for i in range(t + 1, m):
                if A[i][t] != 0:
                    q = A[i][t] // A[t][t]
                    _row_axpy(A, i, t, q)
                    _row_axpy(S, i, t, q)
            if any(A[i][t] != 0 for i in range(t + 1, m)):
                i0 = min(
                    (i for i in range(t, m) if A[i][t] != 0),
                    key=lambda i: abs(A[i][t]),
                )
                if i0 != t:
                    A[t], A[i0] = A[i0], A[t]
                    S[t], S[i0] = S[i0], S[t]
                continue
            for j in range(t + 1, n):
                if A[t][j] != 0:
                    q = A[t][j] // A[t][t]
                    _col_axpy(A, j, t, q)
                    _col_axpy(T, j, t, q)
            if any(A[t][j] != 0 for j in range(t + 1, n)):
                j0 = min(
                    (j for j in range(t, n) if A[t][j] != 0),
                    key=lambda j: abs(A[t][j]),
                )
                if j0 != t:
                    for row in A:
                        row[t], row[j0] = row[j0], row[t]
                    for row in T:
                        row[t], row[j0] = row[j0], row[t]
                continue
            break
        d = A[t][t]
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % d != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            _row_axpy(A, t, offender, -1)
            _row_axpy(S, t, offender, -1)
            continue
        t += 1
    for i in range(min(m, n)):
        if A[i][i] < 0:
            A[i] = [-a for a in A[i]]
            S[i] = [-a for a in S[i]]
    return freeze(A), freeze(S), freeze(T)


def snf_diagonal(M):
    D, _, _ = snf_with_transforms(M)
    return tuple(D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)))


class CongruenceSolution:
    """Solution set of ``A t = b (mod 1)`` on the d-torus.

    The set is ``{particular + r + u @ free : r in torsion_reps, u in T^f}``
    where ``free`` has ``f`` integer rows spanning the tangent lattice of the
    connected part.  ``torsion_reps`` always contains the zero vector, so the
    solutions form ``len(torsion_reps)`` parallel translates of a
    ``f``-dimensional subtorus coset.
    """

    def __init__(self, particular, torsion_reps, free):
        self.particular = particular
        self.torsion_reps = torsion_reps
        self.free = free

    @property
    def is_finite(self):
        return len(self.free) == 0

    @property
    def count(self):
        return len(self.torsion_reps) if self.is_finite else math.inf

    def points(self):
        if not self.is_finite:
            raise ValueError("solution set is infinite")
        return [
            vec_mod1(tuple(p + r for p, r in zip(self.particular, rep)))
            for rep in self.torsion_reps
        ]


def solve_congruences(A, b, torsion_limit=10**6):
    """Solve ``A t = b (mod 1)`` for ``t`` in the d-torus.

    ``A``: integer k x d matrix (rows); ``b``: rationals of length k.
    Returns a :class:`CongruenceSolution`, or ``None`` when unsolvable.
    """
    k = len(A)
    d = len(A[0]) if k else None
    if d is None:
        raise ValueError("pass A with explicit width, or use solve_congruences_free")
    b = [Fraction(x) for x in b]
    if k == 0:
        raise ValueError("use solve_congruences_free for empty systems")
    D, S, T = snf_with_transforms(A)
    c = mat_vec(S, b)
    particular_u = [Fraction(0)] * d
    torsion_axes = []
    free_idx = []
    for i in range(k):
        di = D[i][i] if i < d else 0
        if di == 0:
            if frac_mod1(c[i]) != 0:
                return None
        else:
            particular_u[i] = frac_mod1(Fraction(c[i], di))
    for i in range(d):
        di = D[i][i] if i < k else 0
        if di == 0:
            free_idx.append(i)
        elif di > 1:
            torsion_axes.append((i, di))
    total = 1
    for _, di in torsion_axes:
        total *= di
    if total > torsion_limit:
        raise ValueError(f"torsion group too large to enumerate ({total})")
    reps = []
    for combo in itertools.product(*(range(di) for _, di in torsion_axes)):
        u = [Fraction(0)] * d
        for (i, di), j in zip(torsion_axes, combo):
            u[i] = Fraction(j, di)
        reps.append(vec_mod1(mat_vec(T, u)))
    particular = vec_mod1(mat_vec(T, particular_u))
    free = freeze([tuple(T[r][i] for r in range(d)) for i in free_idx])
    return CongruenceSolution(particular, reps, free)


def solve_congruences_free(d):
    """Solution object for an empty constraint system on the d-torus."""
    return CongruenceSolution(
        tuple(Fraction(0) for _ in range(d)),
        [tuple(Fraction(0) for _ in range(d))],
        freeze(identity_rows(d)),
    )


def det_int(M):
    """Exact determinant of an integer matrix (Bareiss)."""
    n = len(M)
    if n == 0:
        return 1
    A = [list(map(int, r)) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def char_poly(M):
    """Monic characteristic polynomial of an integer matrix.

    Returns coefficients ``(1, c1, ..., cn)`` of ``t^n + c1 t^(n-1) + ... + cn``
    (Faddeev-LeVerrier; the rational intermediates are asserted integral).
    """
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    coeffs = [Fraction(1)]
    Mk = [row[:] for row in A]
    for k in range(1, n + 1):
        ck = -sum(Mk[i][i] for i in range(n)) / k
        coeffs.append(ck)
        if k == n:
            break
        Nk = [[Mk[i][j] + (ck if i == j else 0) for j in range(n)] for i in range(n)]
        Mk = [
            [sum(A[i][l] * Nk[l][j] for l in range(n)) for j in range(n)]
            for i in range(n)
        ]
    assert all(c.denominator == 1 for c in coeffs)
    return tuple(int(c) for c in coeffs)


def deflate_root_one(coeffs):
    """Divide a monic integer polynomial by ``(t - 1)``; remainder must vanish."""
    out = []
    acc = 0
    for c in coeffs:
        acc += c
        out.append(acc)
    if out[-1] != 0:
        raise ValueError("1 is not a root")
    return tuple(out[:-1])


def solve_rational(A, b):
    """One exact solution of ``A x = b`` over the rationals, or ``None``.

    Free variables are set to zero, which makes the answer canonical for a
    fixed row order of ``A``.
    """
    m = len(A)
    if m == 0:
        return ()
    n = len(A[0])
    M = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][col]
        M[r] = [x * inv for x in M[r]]
        for i in range(m):
            if i != r and M[i][col] != 0:
                f = M[i][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for row_idx, col in enumerate(pivots):
        x[col] = M[row_idx][n]
    return tuple(x)


def lattice_coordinates(basis_rows, x):
    """Integer coordinates of ``x`` in the given lattice basis, or ``None``.

    ``basis_rows`` must have full row rank; ``x`` is a rational vector.
    """
    if not basis_rows:
        return () if not any(Fraction(q) for q in x) else None
    y = solve_rational(transpose(basis_rows), x)
    if y is None or not is_integral_vector(y):
        return None
    if vec_mat(y, basis_rows) != tuple(Fraction(q) for q in x):
        return None
    return tuple(int(v) for v in y)


def rational_rank(rows):
    """Rank of a rational matrix."""
    M = [[Fraction(x) for x in row] for row in rows]
    m = len(M)
    n = len(M[0]) if m else 0
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, m):
            if M[i][col] != 0:
                f = M[i][col] / M[r][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        r += 1
    return r
