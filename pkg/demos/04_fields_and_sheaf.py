#
# Morphism fields as pattern-constrained block matrices, their stalks,
# and the sheaf of per-object choices with its two axioms.
#
# Run from the repository root:  python3 demos/04_fields_and_sheaf.py
#
import numpy as np

from fellgeom import (
    ObjectSpace,
    check_sheaf_axioms,
    field_multiply,
    matrix_as_field,
    restrict,
    sections_over,
    stalk,
)
from fellgeom.sheaf import field_as_matrix
from fellgeom.specfile import build_geometry, load_two_point_spec

spec = load_two_point_spec()
config, rep = build_geometry(spec)
bundle = config.bundle

# The canonical cotangent field: swap pattern with linked conjugate entries.
m = 1.0 + 2.0j
X = np.array([
    [0, np.conj(m), 0, 0],
    [m, 0, 0, 0],
    [0, 0, 0, m],
    [0, 0, np.conj(m), 0],
])
field = matrix_as_field(bundle, X)
print("pattern of the canonical field:", field.pattern.as_dict())

# Fields are closed under multiplication (patterns compose) but a sum of
# two fields with different patterns is no longer a field.
square = field_multiply(bundle, field, field)
print("pattern of its square:", square.pattern.as_dict())
print("square as a matrix (diagonal |m|^2):")
print(np.round(field_as_matrix(bundle, square), 4).real)
try:
    matrix_as_field(bundle, X + np.eye(4))
except ValueError as exc:
    print("sum of two patterns is not a field:", exc)

# The cotangent stalk at L: every arrow into L with its fiber space.
print("\nstalk at L:")
for arrow, shape in stalk(bundle, "L"):
    print("  ", arrow, "fiber shape", shape)

# Sheaf of per-object choices over the discrete object space: sections
# over a union are compatible families over any cover, uniquely glued.
space = ObjectSpace(rep.units)
choices = {u: ("x", "y") for u in rep.units}
member = space.member("L", "R")
secs = sections_over(member, choices)
print("\nsections over {L, R} with a two-letter alphabet:", len(secs))
print("restriction to {L}:", restrict(secs, space.member("L")))
print("sections over the empty member:", sections_over(space.member(), choices))

report = check_sheaf_axioms(space)
print("normalization:", report["normalization"], " gluing:", report["gluing"])
