"""Closures of linear flows as exact lattice arithmetic.

A linear flow on a torus winds densely inside a subtorus, and which subtorus
is a purely arithmetic question: the integer relation lattice of the
direction vector.  Declaring the irrational quantities as named generators
makes that computation exact, so closure groups can be compared, hashed and
integrated over without any floating point.

Run:  python3 demos/01_group_closures.py
"""

from fractions import Fraction

from equilef import SymbolicFrequency, closure_group, haar_quadrature, sheet_count
from equilef import SpherePoint, WeightedSphereModel, orbit_through

print(__doc__)

# --- a fully irrational direction on the two-torus --------------------------
v = SymbolicFrequency(
    ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))), ("alpha",)
)
G, _ = closure_group(v)
print(f"direction (1, alpha):  relation lattice {G.relation_lattice!r}, "
      f"closure dimension {G.dim}")

# --- a rational relation collapses one dimension ----------------------------
w = SymbolicFrequency(
    ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)),
     (Fraction(2), Fraction(0))), ("tau",)
)
G2, _ = closure_group(w)
print(f"direction (tau, 1, 2): relation lattice {G2.relation_lattice!r}, "
      f"closure dimension {G2.dim}")

# --- Haar quadrature: exact points and weights -------------------------------
pts = haar_quadrature(G2, 3)
print(f"Haar quadrature at resolution 3: {len(pts)} points, "
      f"each of weight {pts[0][1]}, total {sum(p[1] for p in pts)}")

# --- the weighted five-sphere: isotropy and the covering count ---------------
sphere = WeightedSphereModel(w)
pole = orbit_through(sphere, SpherePoint((0, 0, 1), (0, 0, 0)))
print(f"orbit through (0,0,z3): dimension {pole.dim}, "
      f"isotropy components {pole.isotropy.component_count}")
Ghat, hom = closure_group(w)
print("sheets of the covering by the subgroup (0,1,2):",
      sheet_count(((0, 1, 2),), pole, hom))
print("sheets of the covering by the subgroup (1,1,2):",
      sheet_count(((1, 1, 2),), pole, hom))

# --- winding presentations count sheets on the parametrizing circle ----------
from equilef.torus_group import trivial_isotropy


class _FreeCircleOrbit:
    dim = 1
    isotropy = trivial_isotropy(1)


print("doubled-weight circle (parametrized with winding two):",
      sheet_count(((2,),), _FreeCircleOrbit()))
