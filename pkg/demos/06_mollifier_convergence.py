"""Smoothing kernels concentrating on the graph: the analytic route.

Instead of spectral traces, approximate the pull-back kernel by a bump of
width radius/k along the graph of the map, average over the group, restrict
to the diagonal and integrate.  As the bump sharpens the pairing converges
to the same fixed-orbit sum the exact engine produces, at the rate the
quadrature resolves the bump.  Non-transverse scenarios are refused before
any grid is touched.

Run:  python3 demos/06_mollifier_convergence.py
"""

from fractions import Fraction

from equilef import FlatTorusModel, SymbolicFrequency, TorusMap, convergence_study
from equilef.errors import InfiniteFixedSet

print(__doc__)

model = FlatTorusModel(SymbolicFrequency(((Fraction(0),), (Fraction(1),))))

for title, block in (("doubling", ((2, 0), (0, 1))),
                     ("tripling", ((3, 0), (0, 1)))):
    study = convergence_study(model, TorusMap(block, (0, 0)), (8, 16, 32, 64))
    print(f"\n=== {title}: closed-form value {study.oracle}")
    print(study.csv())
    print(f"converged: {study.converged}")

print("\n=== a pure flow translation is refused:")
try:
    convergence_study(model, TorusMap(((1, 0), (0, 1)), (0, Fraction(1, 3))),
                      (8, 16))
except InfiniteFixedSet as exc:
    print(f"InfiniteFixedSet: {exc}")
