"""Shared builders and seeded-random generators for the test suite.

Genomes are built from chromosome structures: a chromosome is a list of
signed marker names (a leading '-' flips orientation), flagged circular or
linear.  Linear chromosomes get fresh ``t.<n>`` telomeres at both ends.
"""

import random

from spp_dcj.genomes import (Adjacency, DegenerateGenome, Extremity,
                             HEAD, TAIL, TELO)


def _split(marker):
    if marker.startswith("-"):
        return marker[1:], -1
    return marker, 1


def _left(species, marker):
    name, sign = _split(marker)
    return Extremity(species, name, TAIL if sign > 0 else HEAD)


def _right(species, marker):
    name, sign = _split(marker)
    return Extremity(species, name, HEAD if sign > 0 else TAIL)


def build_genome(species, chromosomes, weight=1.0):
    """Concrete genome from [(markers, circular)] chromosome structures."""
    adjacencies = []
    telo = 0
    for markers, circular in chromosomes:
        if circular:
            for i, marker in enumerate(markers):
                nxt = markers[(i + 1) % len(markers)]
                adjacencies.append(Adjacency(
                    (_right(species, marker), _left(species, nxt)), weight))
            continue
        telo += 1
        adjacencies.append(Adjacency(
            (Extremity(species, "t.%d" % telo, TELO),
             _left(species, markers[0])), weight))
        for i in range(len(markers) - 1):
            adjacencies.append(Adjacency(
                (_right(species, markers[i]),
                 _left(species, markers[i + 1])), weight))
        telo += 1
        adjacencies.append(Adjacency(
            (_right(species, markers[-1]),
             Extremity(species, "t.%d" % telo, TELO)), weight))
    return DegenerateGenome(species, adjacencies)


def random_structure(rng, n_markers, linear_chance=0.5):
    """Random arrangement of markers 1.1 .. n.1 into a single chromosome."""
    markers = ["%d.1" % f for f in range(1, n_markers + 1)]
    rng.shuffle(markers)
    markers = [m if rng.random() < 0.5 else "-" + m for m in markers]
    return [(markers, rng.random() >= linear_chance)]


def _flip(markers):
    return [m[1:] if m.startswith("-") else "-" + m
            for m in reversed(markers)]


def invert_segment(chromosomes, rng):
    """One random proper segment inversion (structure level).

    The segment never spans a whole chromosome, so the result is a genuinely
    different genome one DCJ operation away."""
    chroms = [list(markers) for markers, _ in chromosomes]
    ci = rng.randrange(len(chroms))
    markers = chroms[ci]
    length = rng.randrange(1, len(markers))
    if chromosomes[ci][1]:  # circular: rotation is free
        start = rng.randrange(len(markers))
        markers = markers[start:] + markers[:start]
        chroms[ci] = _flip(markers[:length]) + markers[length:]
    else:  # linear: invert in place, no rotation
        start = rng.randrange(len(markers) - length + 1)
        chroms[ci] = (markers[:start] + _flip(markers[start:start + length])
                      + markers[start + length:])
    return [(chroms[i], chromosomes[i][1]) for i in range(len(chroms))]


def random_degenerate_pair(rng, species=("A", "B"), max_markers=4,
                           max_surfeit=2.0, extra_linear=False):
    """Small degenerate genome pair suitable for the exhaustive oracle.

    Each genome is a random resolved genome (guaranteeing a derived genome
    exists) plus extra random adjacencies up to the surfeit limit; families
    have at most 2 copies per genome and random weights throughout.
    """
    genomes = []
    for sp in species:
        n_fam = rng.randint(1, 2)
        markers = []
        copies = 0
        for f in range(1, n_fam + 1):
            k = rng.randint(1, 2)
            for c in range(1, k + 1):
                markers.append("%d.%d" % (f, c))
        markers = markers[:max_markers]
        rng.shuffle(markers)
        markers = [m if rng.random() < 0.5 else "-" + m for m in markers]
        linear = rng.random() < (0.5 if not extra_linear else 1.0)
        if linear and len(markers) >= 2 and rng.random() < 0.3:
            cut = rng.randrange(1, len(markers))
            chroms = [(markers[:cut], False), (markers[cut:], True)]
        else:
            chroms = [(markers, not linear)]
        base = build_genome(sp, chroms)
        adjacencies = [Adjacency(adj.ends, round(rng.random(), 3))
                       for adj in base.adjacencies]
        limit = int(max_surfeit * len(base.non_telomeric_extremities()) // 2)
        extremities = base.non_telomeric_extremities()
        attempts = rng.randint(0, 3)
        existing = set(adjacencies)
        for _ in range(attempts):
            if len(adjacencies) >= limit or len(extremities) < 2:
                break
            a, b = rng.sample(extremities, 2)
            if a.marker == b.marker:
                continue
            adj = Adjacency((a, b), round(rng.random(), 3))
            if adj in existing:
                continue
            existing.add(adj)
            adjacencies.append(adj)
        genomes.append(DegenerateGenome(sp, adjacencies))
    return genomes[0], genomes[1]


def seeded(seed):
    return random.Random(seed)
