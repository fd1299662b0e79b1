"""Core data model: markers, extremities, adjacencies, genomes, phylogenies.

A genome is modelled purely as a set of adjacencies between marker
extremities.  Degenerate genomes relax the "each extremity used once"
condition for non-telomeric extremities and therefore represent a
superposition of candidate gene orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

TAIL = "t"
HEAD = "h"
TELO = "o"

KINDS = (TAIL, HEAD, TELO)

TELOMERE_PREFIX = "t."


class GenomeError(ValueError):
    """Raised on malformed genomes, adjacencies, or family assignments."""


@total_ordering
@dataclass(frozen=True)
class Extremity:
    species: str
    marker: str
    kind: str  # TAIL, HEAD or TELO

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GenomeError("invalid extremity kind %r" % (self.kind,))
        if self.is_telomere != (self.kind == TELO):
            raise GenomeError(
                "telomere naming mismatch for %s_%s" % (self.marker, self.kind))

    @property
    def is_telomere(self) -> bool:
        return self.marker.startswith(TELOMERE_PREFIX) or self.marker.startswith("cap.")

    @property
    def name(self) -> str:
        return "%s_%s" % (self.marker, self.kind)

    def mate(self) -> "Extremity":
        """The other extremity of the same marker."""
        if self.kind == TELO:
            raise GenomeError("telomere %s has a single extremity" % self.name)
        return Extremity(self.species, self.marker, HEAD if self.kind == TAIL else TAIL)

    def sort_key(self):
        return (self.species, self.marker, self.kind)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return "%s:%s" % (self.species, self.name)


def parse_extremity(species: str, text: str) -> Extremity:
    """Parse an extremity token of the form ``<marker>_h``/``_t``/``t.<n>_o``."""
    if "_" not in text:
        raise GenomeError("malformed extremity %r" % (text,))
    marker, _, kind = text.rpartition("_")
    if kind not in KINDS or not marker:
        raise GenomeError("malformed extremity %r" % (text,))
    return Extremity(species, marker, kind)


class FamilyAssignment:
    """Maps non-telomeric markers to family identifiers.

    By default the family of marker ``F.k`` is the prefix before the first
    ``'.'``; an explicit mapping overrides this convention.  Telomeres are
    never assigned families.
    """

    def __init__(self, explicit: Optional[Mapping[str, str]] = None,
                 use_default: bool = True):
        self.explicit: Dict[str, str] = dict(explicit or {})
        self.use_default = use_default

    def family(self, marker: str) -> str:
        if marker.startswith(TELOMERE_PREFIX) or marker.startswith("cap."):
            raise GenomeError("telomere %s has no family" % marker)
        if marker in self.explicit:
            return self.explicit[marker]
        if not self.use_default:
            raise GenomeError("unassigned marker %s" % marker)
        return marker.split(".", 1)[0]

    def of(self, ext: Extremity) -> str:
        return self.family(ext.marker)

    def is_resolved(self, genomes: Iterable["DegenerateGenome"]) -> bool:
        """True iff every family has multiplicity <= 1 in every genome."""
        for g in genomes:
            seen: Set[Tuple[str, str]] = set()
            for ext in g.extremities():
                if ext.is_telomere:
                    continue
                key = (self.family(ext.marker), ext.kind)
                if key in seen:
                    return False
                seen.add(key)
        return True


@dataclass(frozen=True)
class Adjacency:
    """Unordered pair of distinct extremities of the same species.

    Equality and hashing ignore the weight: a degenerate genome holds at most
    one adjacency per extremity pair.
    """

    ends: Tuple[Extremity, Extremity]
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ends", tuple(self.ends))
        a, b = self.ends
        if a == b:
            raise GenomeError("adjacency between an extremity and itself: %s" % (a,))
        if a.species != b.species:
            raise GenomeError("adjacency spans species %s and %s" % (a.species, b.species))
        if a.is_telomere and b.is_telomere:
            raise GenomeError("adjacency joins two telomeres: %s %s" % (a, b))
        if b < a:
            object.__setattr__(self, "ends", (b, a))

    @property
    def species(self) -> str:
        return self.ends[0].species

    def other(self, ext: Extremity) -> Extremity:
        a, b = self.ends
        return b if ext == a else a

    def sort_key(self):
        a, b = self.ends
        return (a.species, a.name, b.name)

    def __eq__(self, other):
        return isinstance(other, Adjacency) and self.ends == other.ends

    def __hash__(self):
        return hash(self.ends)

    def __repr__(self):
        a, b = self.ends
        return "{%s,%s}" % (a.name, b.name)


class DegenerateGenome:
    """A set of unique weighted adjacencies of one species.

    Invariants checked on construction: head/tail closure, telomeric
    extremities used at most once, no duplicate adjacencies.
    """

    def __init__(self, species: str, adjacencies: Iterable[Adjacency]):
        self.species = species
        adjs = sorted(set(adjacencies), key=Adjacency.sort_key)
        self.adjacencies: Tuple[Adjacency, ...] = tuple(adjs)
        self._index: Dict[Extremity, List[Adjacency]] = {}
        for adj in self.adjacencies:
            if adj.species != species:
                raise GenomeError(
                    "adjacency %r does not belong to species %s" % (adj, species))
            for ext in adj.ends:
                self._index.setdefault(ext, []).append(adj)
        self._validate()

    def _validate(self):
        for ext, incident in self._index.items():
            if ext.is_telomere and len(incident) > 1:
                raise GenomeError(
                    "telomere %s used in %d adjacencies" % (ext.name, len(incident)))
            if not ext.is_telomere and ext.mate() not in self._index:
                raise GenomeError("missing mate of extremity %s" % ext.name)

    # -- queries ----------------------------------------------------------

    def extremities(self) -> List[Extremity]:
        return sorted(self._index)

    def non_telomeric_extremities(self) -> List[Extremity]:
        return [e for e in self.extremities() if not e.is_telomere]

    def telomeres(self) -> List[Extremity]:
        return [e for e in self.extremities() if e.is_telomere]

    def markers(self) -> List[str]:
        return sorted({e.marker for e in self._index if not e.is_telomere})

    def incident(self, ext: Extremity) -> List[Adjacency]:
        return list(self._index.get(ext, ()))

    def weight_of(self, adj: Adjacency) -> float:
        for cand in self._index.get(adj.ends[0], ()):
            if cand == adj:
                return cand.weight
        raise KeyError(adj)

    def __contains__(self, adj: Adjacency) -> bool:
        return any(cand == adj for cand in self._index.get(adj.ends[0], ()))

    def __len__(self) -> int:
        return len(self.adjacencies)

    def __eq__(self, other):
        return (isinstance(other, DegenerateGenome)
                and self.species == other.species
                and self.adjacencies == other.adjacencies)

    def __repr__(self):
        return "DegenerateGenome(%s, %d adjacencies)" % (self.species, len(self))

    def max_telomere_index(self) -> int:
        best = 0
        for ext in self._index:
            if ext.marker.startswith(TELOMERE_PREFIX):
                tail = ext.marker[len(TELOMERE_PREFIX):]
                if tail.isdigit():
                    best = max(best, int(tail))
        return best


def multiplicity(genome: DegenerateGenome, family: str, kind: str,
                 f: FamilyAssignment) -> int:
    """Number of extremities of the given family and kind in the genome."""
    if kind not in (TAIL, HEAD):
        raise GenomeError("multiplicity kind must be tail or head")
    count = 0
    for ext in genome.non_telomeric_extremities():
        if f.family(ext.marker) == family and ext.kind == kind:
            count += 1
    return count


def family_multiplicities(genome: DegenerateGenome,
                          f: FamilyAssignment) -> Dict[Tuple[str, str], int]:
    """Per (family, kind) extremity counts of a genome."""
    counts: Dict[Tuple[str, str], int] = {}
    for ext in genome.non_telomeric_extremities():
        key = (f.family(ext.marker), ext.kind)
        counts[key] = counts.get(key, 0) + 1
    return counts


def check_family_consistency(genome: DegenerateGenome, f: FamilyAssignment):
    """Tail and head counts of every family must agree."""
    counts = family_multiplicities(genome, f)
    fams = {fam for fam, _ in counts}
    for fam in fams:
        if counts.get((fam, TAIL), 0) != counts.get((fam, HEAD), 0):
            raise GenomeError("inconsistent family %s in genome %s"
                              % (fam, genome.species))


def surfeit(genome: DegenerateGenome) -> float:
    """2*|adjacencies| / |non-telomeric extremities|."""
    n_ext = len(genome.non_telomeric_extremities())
    if n_ext == 0:
        raise GenomeError("empty genome")
    return 2.0 * len(genome.adjacencies) / n_ext


def is_genome(g: DegenerateGenome) -> bool:
    """True iff every extremity occurs in exactly one adjacency."""
    return all(len(g.incident(ext)) == 1 for ext in g.extremities())


def is_derived(child: DegenerateGenome, parent: DegenerateGenome) -> bool:
    """True iff child is a genome, a subset of parent, and covers exactly
    parent's non-telomeric extremities."""
    if not is_genome(child):
        return False
    for adj in child.adjacencies:
        if adj not in parent:
            return False
    return child.non_telomeric_extremities() == parent.non_telomeric_extremities()


class Phylogeny:
    """Connected graph over species, each node carrying a degenerate genome."""

    def __init__(self, edges: Iterable[Tuple[str, str]]):
        norm = sorted({tuple(sorted(e)) for e in edges})
        for a, b in norm:
            if a == b:
                raise GenomeError("self-loop in phylogeny at %s" % a)
        self.edges: Tuple[Tuple[str, str], ...] = tuple(norm)
        nodes: Set[str] = set()
        for a, b in self.edges:
            nodes.update((a, b))
        self.nodes: Tuple[str, ...] = tuple(sorted(nodes))
        if self.nodes and not self._connected():
            raise GenomeError("phylogeny is not connected")

    def _connected(self) -> bool:
        neigh: Dict[str, List[str]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            neigh[a].append(b)
            neigh[b].append(a)
        seen = {self.nodes[0]}
        stack = [self.nodes[0]]
        while stack:
            for nxt in neigh[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.nodes)

    def leaves(self) -> List[str]:
        deg: Dict[str, int] = {n: 0 for n in self.nodes}
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return [n for n in self.nodes if deg[n] == 1]

    def degree(self, node: str) -> int:
        return sum(1 for a, b in self.edges if node in (a, b))
