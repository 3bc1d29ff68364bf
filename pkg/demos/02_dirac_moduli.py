#
# Solve for the admissible Dirac operators of the two-point geometry.
#
# A candidate is a cotangent field: at every object one morphism ranged
# there, i.e. one block per block-row.  Each admissibility condition is
# real-linear per support pattern, so the moduli space decomposes into
# pattern strata, each a real-linear solution space.
#
# Run from the repository root:  python3 demos/02_dirac_moduli.py
#
import numpy as np

from fellgeom import ConstraintSet, dirac_space, enumerate_patterns
from fellgeom.dirac import field_of
from fellgeom.specfile import build_geometry, load_two_point_spec

spec = load_two_point_spec()
config, rep = build_geometry(spec)
g = config.bundle.groupoid

print("patterns over Pair(4):", len(enumerate_patterns(g)))

# The full constraint set: self-adjoint, commutes with J, anticommutes
# with the grading, and no leptoquark blocks.
full = ConstraintSet.of("self_adjoint", "j_real", "chi_anticommute", "s0_reality")
solutions = dirac_space(rep, full)
print("\nwith the full constraint set:")
for sol in solutions:
    print("  pattern", sol.pattern.as_dict(), " real dimension", sol.real_dimension)
    print("  basis element 0 (matrix):")
    print(np.round(sol.matrices[0], 6))

# Dropping the sector condition admits one more family: the cross pattern
# that exchanges each chirality with the conjugate of the other.
no_s0 = ConstraintSet.of("self_adjoint", "j_real", "chi_anticommute")
print("\nwithout the sector condition:")
for sol in dirac_space(rep, no_s0):
    print("  pattern", sol.pattern.as_dict(), " real dimension", sol.real_dimension)

# The slow path solves all 256 patterns and must agree with the pruned one.
slow = dirac_space(rep, no_s0, prune=False)
fast = dirac_space(rep, no_s0, prune=True)
print("\npruned enumeration agrees with the brute-force pass:",
      [(s.pattern, s.basis) for s in slow] == [(s.pattern, s.basis) for s in fast])

# Each basis element is also a morphism field: one fiber per object.
sol = solutions[0]
field = field_of(rep, sol.pattern, np.array(sol.basis[0]))
print("\nfibers of basis element 0:")
for unit in rep.units:
    print(f"  at {unit}: arrow {sol.pattern.arrow(unit)} value {field.fiber(unit)[0, 0]:.4f}")
