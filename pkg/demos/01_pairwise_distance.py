"""Pairwise DCJ-indel distances on hand-built genomes.
=====================================================

A genome is a set of adjacencies between marker extremities; the DCJ-indel
distance counts the double-cut-and-join operations plus segment insertions/
deletions needed to transform one genome into the other.  This demo computes
a few distances whose values are easy to verify by hand.
"""

from spp_dcj.diagram import brute_force_distance
from spp_dcj.genomes import (Adjacency, DegenerateGenome, Extremity,
                             FamilyAssignment, HEAD, TAIL, TELO)

FAM = FamilyAssignment()


def circular(species, markers):
    """Circular chromosome from signed marker names ('-x' flips)."""
    adjacencies = []
    for i, marker in enumerate(markers):
        nxt = markers[(i + 1) % len(markers)]
        m, s = (marker[1:], -1) if marker.startswith("-") else (marker, 1)
        n, t = (nxt[1:], -1) if nxt.startswith("-") else (nxt, 1)
        adjacencies.append(Adjacency(
            (Extremity(species, m, HEAD if s > 0 else TAIL),
             Extremity(species, n, TAIL if t > 0 else HEAD)), 1.0))
    return DegenerateGenome(species, adjacencies)


def show(label, a, b):
    result = brute_force_distance(a, b, FAM)
    print("%-35s distance = %d" % (label, result.distance))
    return result


# identical gene orders: nothing to do
a = circular("A", ["1.1", "2.1", "3.1"])
b = circular("B", ["1.1", "2.1", "3.1"])
show("identity", a, b)

# one marker flipped: a single inversion
b = circular("B", ["1.1", "-2.1", "3.1"])
show("single inversion", a, b)

# marker 3 missing from B: one deletion
b = circular("B", ["1.1", "2.1"])
show("one deletion", a, b)

# everything different: inversion plus deletion
b = circular("B", ["-1.1", "2.1"])
show("inversion + deletion", a, b)

# a duplicated family: the maximum matching model pairs one copy of
# family 1 and deletes the surplus copy
a2 = circular("A", ["1.1", "1.2", "2.1"])
b2 = circular("B", ["1.1", "2.1"])
result = show("duplicate copy to remove", a2, b2)
print("  matched copies:", result.matching)
