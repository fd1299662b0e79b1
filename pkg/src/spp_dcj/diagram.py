"""Relational diagrams for pairs of degenerate genomes.

For a pair of (augmented) degenerate genomes the multi-relational diagram
superposes the capped relational diagrams of all their derived genomes:
adjacency edges per genome, extremity edges between same-family same-kind
copies (and telomere pairs) across genomes, and indel edges on copies of
families that are overrepresented on one side.  Telomere counts are balanced
with capping telomeres paired by artificial adjacencies.

This module also houses the run/indel-potential arithmetic, circular
singleton candidate enumeration, the telomere classification that shrinks
the telomeric extremity-edge set, and an exhaustive distance oracle used to
validate the integer program on small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .genomes import (Adjacency, DegenerateGenome, Extremity, FamilyAssignment,
                      GenomeError, HEAD, TAIL, TELO, check_family_consistency,
                      family_multiplicities)

ADJ = "adj"
EXT = "ext"
ID = "id"


class DiagramError(ValueError):
    pass


class SingletonExplosion(DiagramError):
    pass


def indel_potential(run_count: int) -> int:
    """Maximal number of indel operations a component can require."""
    if run_count < 0:
        raise ValueError("negative run count")
    if run_count == 0:
        return 0
    return (run_count + 2) // 2  # ceil((run_count + 1) / 2)


def count_runs(edge_kinds: Sequence[Tuple[str, Optional[str]]],
               closed: bool = True, side: Optional[str] = None) -> int:
    """Number of maximal same-side indel runs along a path or cycle.

    ``edge_kinds`` is the ordered (kind, side) sequence of the component's
    edges; ``closed`` marks cycles.  With ``side`` given, only runs of that
    genome are counted.
    """
    sides = [s for kind, s in edge_kinds if kind == ID]
    if not sides:
        return 0
    blocks = [sides[0]]
    for s in sides[1:]:
        if s != blocks[-1]:
            blocks.append(s)
    if closed and len(blocks) > 1 and blocks[0] == blocks[-1]:
        blocks.pop()
    if side is not None:
        return sum(1 for b in blocks if b == side)
    return len(blocks)


@dataclass(frozen=True)
class DiagramEdge:
    index: int
    kind: str  # ADJ, EXT or ID
    side: Optional[str]  # 'A'/'B' for adjacency and indel edges, None for ext
    u: Extremity
    v: Extremity
    adjacency: Optional[Adjacency] = None  # genome adjacency, None for caps
    cap: bool = False
    sibling_key: Optional[Tuple[str, str]] = None  # (marker_a, marker_b)

    def other(self, node: Extremity) -> Extremity:
        return self.v if node == self.u else self.u

    @property
    def is_telomeric_ext(self) -> bool:
        return self.kind == EXT and self.u.is_telomere


@dataclass
class TelomereClass:
    telomere: Extremity
    partners: Dict[Extremity, bool]  # partner -> indel-free connection


@dataclass(frozen=True)
class CircularSingletonCandidate:
    side: str
    edges: Tuple[int, ...]  # edge indices, canonical key

    def __len__(self):
        return len(self.edges)


@dataclass
class DistanceBreakdown:
    n_prime: float
    indel_free_cycles: int
    transitions: int
    circular_singletons: int

    @property
    def distance(self) -> int:
        value = (self.n_prime - self.indel_free_cycles
                 + self.transitions / 2 + self.circular_singletons)
        rounded = int(round(value))
        assert abs(value - rounded) < 1e-9, "non-integral distance %r" % value
        return rounded


class MultiRelationalDiagram:
    """Capped multi-relational diagram of one phylogeny edge."""

    def __init__(self, genome_a: DegenerateGenome, genome_b: DegenerateGenome,
                 families: FamilyAssignment, reduce_telomeres: bool = False):
        if genome_a.species == genome_b.species:
            raise DiagramError("diagram requires two distinct species")
        self.genome_a = genome_a
        self.genome_b = genome_b
        self.families = families
        self.reduced = False
        check_family_consistency(genome_a, families)
        check_family_consistency(genome_b, families)

        counts_a = family_multiplicities(genome_a, families)
        counts_b = family_multiplicities(genome_b, families)
        fams = {fam for fam, _ in counts_a} | {fam for fam, _ in counts_b}
        self.n = sum(min(counts_a.get((fam, TAIL), 0), counts_b.get((fam, TAIL), 0))
                     for fam in fams)

        telo_a = genome_a.telomeres()
        telo_b = genome_b.telomeres()
        l = len(telo_b) - len(telo_a)
        self.caps_a = [Extremity(genome_a.species, "cap.%d" % i, TELO)
                       for i in range(1, max(0, 2 * (l // 2)) + 1)] if l > 0 else []
        self.caps_b = [Extremity(genome_b.species, "cap.%d" % i, TELO)
                       for i in range(1, max(0, 2 * (-l // 2)) + 1)] if l < 0 else []

        non_telo = sorted(genome_a.non_telomeric_extremities()
                          + genome_b.non_telomeric_extremities())
        telo = sorted(telo_a + telo_b) + self.caps_a + self.caps_b
        self.nodes: List[Extremity] = non_telo + telo
        self.num_non_telomeric = len(non_telo)
        self.node_index: Dict[Extremity, int] = {
            node: i for i, node in enumerate(self.nodes, start=1)}

        self.edges: List[DiagramEdge] = []
        self._edges_at: Dict[Extremity, List[DiagramEdge]] = {}
        self._build_edges(counts_a, counts_b)
        self.telomere_classes: Optional[List[TelomereClass]] = None
        if reduce_telomeres:
            self.telomere_classes = self._reduce_telomeric_edges()
            self.reduced = True

    # -- construction -----------------------------------------------------

    def _add_edge(self, kind, side, u, v, adjacency=None, cap=False,
                  sibling_key=None):
        edge = DiagramEdge(len(self.edges) + 1, kind, side, u, v,
                           adjacency, cap, sibling_key)
        self.edges.append(edge)
        self._edges_at.setdefault(u, []).append(edge)
        self._edges_at.setdefault(v, []).append(edge)
        return edge

    def _build_edges(self, counts_a, counts_b):
        fam = self.families
        for side, genome, caps in (("A", self.genome_a, self.caps_a),
                                   ("B", self.genome_b, self.caps_b)):
            for adj in genome.adjacencies:
                self._add_edge(ADJ, side, adj.ends[0], adj.ends[1], adjacency=adj)
            for i in range(0, len(caps), 2):
                self._add_edge(ADJ, side, caps[i], caps[i + 1], cap=True)

        by_family_a = self._markers_by_family(self.genome_a)
        by_family_b = self._markers_by_family(self.genome_b)
        for family in sorted(set(by_family_a) & set(by_family_b)):
            for ma in by_family_a[family]:
                for mb in by_family_b[family]:
                    key = (ma, mb)
                    for kind in (TAIL, HEAD):
                        self._add_edge(
                            EXT, None,
                            Extremity(self.genome_a.species, ma, kind),
                            Extremity(self.genome_b.species, mb, kind),
                            sibling_key=key)
        for ta in self.telomeres_side("A"):
            for tb in self.telomeres_side("B"):
                self._add_edge(EXT, None, ta, tb)

        for side, genome, own, other in (("A", self.genome_a, counts_a, counts_b),
                                         ("B", self.genome_b, counts_b, counts_a)):
            for marker in genome.markers():
                family = fam.family(marker)
                if own.get((family, TAIL), 0) > other.get((family, TAIL), 0):
                    self._add_edge(ID, side,
                                   Extremity(genome.species, marker, TAIL),
                                   Extremity(genome.species, marker, HEAD))

    def _markers_by_family(self, genome: DegenerateGenome) -> Dict[str, List[str]]:
        result: Dict[str, List[str]] = {}
        for marker in genome.markers():
            result.setdefault(self.families.family(marker), []).append(marker)
        return result

    # -- queries ----------------------------------------------------------

    def side_of(self, node: Extremity) -> str:
        return "A" if node.species == self.genome_a.species else "B"

    def telomeres_side(self, side: str) -> List[Extremity]:
        genome = self.genome_a if side == "A" else self.genome_b
        caps = self.caps_a if side == "A" else self.caps_b
        return genome.telomeres() + caps

    def edges_at(self, node: Extremity) -> List[DiagramEdge]:
        return self._edges_at.get(node, [])

    def telomeric_nodes(self) -> List[Extremity]:
        return [node for node in self.nodes if node.is_telomere]

    @property
    def n_prime(self) -> float:
        """Constant of the full superposition; solutions use their own count."""
        return self.n + len(self.telomeric_nodes()) / 4.0

    def dump(self) -> str:
        """Debug text dump, one edge per line: ``type<TAB>u<TAB>v``."""
        lines = []
        for edge in self.edges:
            kind = edge.kind if edge.side is None else edge.kind + edge.side
            lines.append("%s\t%s\t%s" % (kind, edge.u, edge.v))
        return "\n".join(lines) + "\n"

    # -- telomere classification (search-space reduction) ------------------

    def _reduce_telomeric_edges(self) -> List[TelomereClass]:
        classes, direct, group2 = classify_interior_components(self)
        keep = []
        removed = False
        for edge in self.edges:
            if not edge.is_telomeric_ext:
                keep.append(edge)
                continue
            pair = frozenset((edge.u, edge.v))
            if pair in direct or (edge.u in group2 and edge.v in group2):
                keep.append(edge)
            else:
                removed = True
        if removed:
            self.edges = []
            self._edges_at = {}
            for edge in keep:
                self._add_edge(edge.kind, edge.side, edge.u, edge.v,
                               edge.adjacency, edge.cap, edge.sibling_key)
        return classes


def classify_interior_components(diagram: MultiRelationalDiagram):
    """Group telomeres by the interior component (diagram minus telomeric
    extremity edges) they live in, flagging indel-free components.

    Returns (classes, direct_pairs, group2) where direct_pairs are
    cross-genome pairs of indel-free components and group2 is the all-vs-all
    pool (members of indel-enclosing components, plus same-genome fellows of
    indel-free ones).
    """
    parent: Dict[Extremity, Extremity] = {node: node for node in diagram.nodes}

    def find(x):
        while parent[x] is not x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra is not rb:
            parent[ra] = rb

    for edge in diagram.edges:
        if not edge.is_telomeric_ext:
            union(edge.u, edge.v)

    members: Dict[Extremity, List[Extremity]] = {}
    has_indel: Dict[Extremity, bool] = {}
    for node in diagram.nodes:
        members.setdefault(find(node), []).append(node)
    for edge in diagram.edges:
        if edge.kind == ID:
            has_indel[find(edge.u)] = True

    classes: List[TelomereClass] = []
    direct: Set[FrozenSet[Extremity]] = set()
    group2: Set[Extremity] = set()
    for root, nodes in sorted(members.items(), key=lambda kv: min(kv[1])):
        telos = sorted(node for node in nodes if node.is_telomere)
        if not telos:
            continue
        indel_free = not has_indel.get(root, False)
        for telo in telos:
            classes.append(TelomereClass(
                telo, {p: indel_free for p in telos if p != telo}))
        if not indel_free:
            group2.update(telos)
            continue
        sides = {}
        for telo in telos:
            sides.setdefault(diagram.side_of(telo), []).append(telo)
        for ta in sides.get("A", ()):
            for tb in sides.get("B", ()):
                direct.add(frozenset((ta, tb)))
        for side_telos in sides.values():
            if len(side_telos) > 1:
                group2.update(side_telos)
    return classes, direct, group2


def classify_telomeres(diagram: MultiRelationalDiagram):
    """Classification only, without rewriting the diagram."""
    classes, _, _ = classify_interior_components(diagram)
    return classes


# -- circular singleton candidates ----------------------------------------

def enumerate_circular_singletons(diagram: MultiRelationalDiagram,
                                  cap: int = 100000
                                  ) -> List[CircularSingletonCandidate]:
    """All alternating adjacency/indel cycles within one genome side."""
    result: List[CircularSingletonCandidate] = []
    for side in ("A", "B"):
        id_edges = [e for e in diagram.edges if e.kind == ID and e.side == side]
        if not id_edges:
            continue
        adj_at: Dict[Extremity, List[DiagramEdge]] = {}
        id_at: Dict[Extremity, List[DiagramEdge]] = {}
        for e in diagram.edges:
            if e.side != side:
                continue
            target = adj_at if e.kind == ADJ else id_at
            for node in (e.u, e.v):
                target.setdefault(node, []).append(e)
        seen: Set[Tuple[int, ...]] = set()

        def walk(start, node, want, path, visited):
            if len(result) + len(seen) > cap:
                raise SingletonExplosion(
                    "singleton explosion on genome side %s" % side)
            pool = adj_at if want == ADJ else id_at
            for e in pool.get(node, ()):
                nxt = e.other(node)
                if nxt == start:
                    if want == ADJ:  # closing edge completes alternation
                        key = tuple(sorted(p.index for p in path + [e]))
                        seen.add(key)
                    continue
                if nxt in visited or nxt < start:
                    continue
                visited.add(nxt)
                walk(start, nxt, ADJ if want == ID else ID, path + [e], visited)
                visited.discard(nxt)

        for first in id_edges:
            for start, nxt in ((first.u, first.v), (first.v, first.u)):
                if nxt < start:
                    continue
                walk(start, nxt, ADJ, [first], {start, nxt})
        for key in sorted(seen):
            result.append(CircularSingletonCandidate(side, key))
    return result


# -- component decomposition of a concrete (selected) diagram ---------------

@dataclass
class Component:
    edges: List[DiagramEdge]  # in traversal order
    closed: bool

    def edge_kinds(self):
        return [(e.kind, e.side) for e in self.edges]

    @property
    def has_ext(self) -> bool:
        return any(e.kind == EXT for e in self.edges)

    @property
    def has_indel(self) -> bool:
        return any(e.kind == ID for e in self.edges)

    def runs(self) -> int:
        return count_runs(self.edge_kinds(), closed=self.closed)


def decompose(selected: Sequence[DiagramEdge]) -> List[Component]:
    """Split a selected edge set whose nodes all have degree 2 into cycles."""
    at: Dict[Extremity, List[DiagramEdge]] = {}
    for edge in selected:
        at.setdefault(edge.u, []).append(edge)
        at.setdefault(edge.v, []).append(edge)
    for node, incident in at.items():
        if len(incident) != 2:
            raise DiagramError("node %s has degree %d in solution"
                               % (node, len(incident)))
    remaining = {e.index: e for e in selected}
    components = []
    while remaining:
        start_edge = remaining[min(remaining)]
        ordered = [start_edge]
        del remaining[start_edge.index]
        head = start_edge.v
        origin = start_edge.u
        while head != origin:
            nxt = next(e for e in at[head] if e.index in remaining)
            ordered.append(nxt)
            del remaining[nxt.index]
            head = nxt.other(head)
        components.append(Component(ordered, closed=True))
    return components


def breakdown_from_components(n: int, components: List[Component],
                              used_telomeres: int) -> DistanceBreakdown:
    cycles_if = sum(1 for c in components if not c.has_indel)
    singles = sum(1 for c in components if not c.has_ext)
    transitions = 0
    for comp in components:
        runs = comp.runs()
        if runs >= 2:
            transitions += runs
    return DistanceBreakdown(n + used_telomeres / 4.0, cycles_if,
                             transitions, singles)


# -- exhaustive oracle ------------------------------------------------------

@dataclass
class OracleResult:
    value: float  # maximized objective on the integer program's scale
    distance: int  # DCJ-indel distance of the optimal derived pair
    genome_a: DegenerateGenome
    genome_b: DegenerateGenome
    matching: Tuple[Tuple[str, str], ...]  # resolved marker pairing
    breakdown: DistanceBreakdown


def enumerate_derived(genome: DegenerateGenome):
    """Yield all derived genomes as frozensets of adjacencies."""
    targets = genome.non_telomeric_extremities()

    def search(pos: int, used: Set[Extremity], chosen: List[Adjacency]):
        while pos < len(targets) and targets[pos] in used:
            pos += 1
        if pos == len(targets):
            yield frozenset(chosen)
            return
        ext = targets[pos]
        for adj in genome.incident(ext):
            other = adj.other(ext)
            if other in used:
                continue
            used.add(ext)
            used.add(other)
            chosen.append(adj)
            yield from search(pos + 1, used, chosen)
            chosen.pop()
            used.discard(ext)
            used.discard(other)

    yield from search(0, set(), [])


def _family_matchings(diagram: MultiRelationalDiagram):
    """All resolved marker pairings under the maximum matching model."""
    by_a = diagram._markers_by_family(diagram.genome_a)
    by_b = diagram._markers_by_family(diagram.genome_b)
    per_family = []
    for family in sorted(set(by_a) | set(by_b)):
        ma = by_a.get(family, [])
        mb = by_b.get(family, [])
        m = min(len(ma), len(mb))
        options = []
        if m == 0:
            options.append(())
        elif len(ma) <= len(mb):
            for perm in itertools.permutations(mb, m):
                options.append(tuple(zip(ma, perm)))
        else:
            for perm in itertools.permutations(ma, m):
                options.append(tuple(zip(perm, mb)))
        per_family.append(options)
    for combo in itertools.product(*per_family):
        yield tuple(pair for fam_pairs in combo for pair in fam_pairs)


def _cap_partner(cap: Extremity) -> Extremity:
    """The capping telomere sharing a capping adjacency with this one."""
    k = int(cap.marker.split(".", 1)[1])
    partner = k + 1 if k % 2 == 1 else k - 1
    return Extremity(cap.species, "cap.%d" % partner, TELO)


def _telomere_matchings(ta: List[Extremity], tb: List[Extremity],
                        matched: Optional[Set[Extremity]] = None):
    """Perfect matchings between equally sized telomere lists.

    Capping telomere pairs are interchangeable, so caps whose partner is
    still unmatched are deduplicated; a cap whose partner is already matched
    is structurally distinct and kept apart.
    """
    if len(ta) != len(tb):
        return
    if not ta:
        yield ()
        return
    if matched is None:
        matched = set()
    seen_reprs = set()
    first = ta[0]
    for i, cand in enumerate(tb):
        if cand.marker.startswith("cap.") and _cap_partner(cand) not in matched:
            key = "free-cap"
        else:
            key = cand.name
        if key in seen_reprs:
            continue
        seen_reprs.add(key)
        rest_b = tb[:i] + tb[i + 1:]
        matched.add(first)
        matched.add(cand)
        for sub in _telomere_matchings(ta[1:], rest_b, matched):
            yield ((first, cand),) + sub
        matched.discard(first)
        matched.discard(cand)


def brute_force_distance(genome_a: DegenerateGenome, genome_b: DegenerateGenome,
                         families: FamilyAssignment,
                         weights=None, alpha: float = 1.0, beta: float = 0.0,
                         max_extremities: int = 24) -> OracleResult:
    """Exhaustive optimum of the weighted degenerate DCJ-indel objective.

    Enumerates all derived genome pairs, resolved family pairings, capping
    telomere usages and telomere matchings, scoring each candidate on the
    same scale the integer program maximizes:

        (1-a-b) * sum of selected adjacency weights
        + a * (indel-free cycles - transitions/2 - circular singletons)
        - b * used telomeric extremities (capping ones included)

    The reported distance is the DCJ-indel distance of the best candidate.
    """
    total_ext = (len(genome_a.extremities()) + len(genome_b.extremities()))
    if total_ext > max_extremities:
        raise DiagramError("oracle scale: %d extremities > %d"
                           % (total_ext, max_extremities))
    diagram = MultiRelationalDiagram(genome_a, genome_b, families)
    if weights is None:
        weights = lambda adj: adj.weight

    caps_a, caps_b = diagram.caps_a, diagram.caps_b
    best: Optional[OracleResult] = None

    derived_b_all = list(enumerate_derived(genome_b))
    matchings = list(_family_matchings(diagram))
    for sel_a in enumerate_derived(genome_a):
        telos_a = sorted({e for adj in sel_a for e in adj.ends if e.is_telomere})
        for sel_b in derived_b_all:
            telos_b = sorted({e for adj in sel_b for e in adj.ends
                              if e.is_telomere})
            deficit = len(telos_b) - len(telos_a)
            use_caps_a = use_caps_b = 0
            if deficit > 0:
                if deficit > len(caps_a):
                    continue  # not representable with available caps
                use_caps_a = deficit
            elif deficit < 0:
                if -deficit > len(caps_b):
                    continue
                use_caps_b = -deficit
            ta = telos_a + caps_a[:use_caps_a]
            tb = telos_b + caps_b[:use_caps_b]
            weight_sum = (sum(weights(adj) for adj in sel_a)
                          + sum(weights(adj) for adj in sel_b))
            for marker_pairs in matchings:
                base_edges = _oracle_edges(diagram, sel_a, sel_b, marker_pairs,
                                           use_caps_a, use_caps_b)
                if base_edges is None:
                    continue
                for telo_pairs in _telomere_matchings(ta, tb):
                    edges = list(base_edges)
                    for pa, pb in telo_pairs:
                        edges.append(_oracle_ext_edge(diagram, pa, pb))
                    components = decompose(edges)
                    bd = breakdown_from_components(diagram.n, components,
                                                   len(ta) + len(tb))
                    value = ((1 - alpha - beta) * weight_sum
                             + alpha * (bd.indel_free_cycles
                                        - bd.transitions / 2
                                        - bd.circular_singletons)
                             - beta * (len(ta) + len(tb)))
                    if best is None or value > best.value + 1e-12:
                        best = OracleResult(
                            value, bd.distance,
                            DegenerateGenome(genome_a.species, sel_a),
                            DegenerateGenome(genome_b.species, sel_b),
                            marker_pairs, bd)
    if best is None:
        raise DiagramError("no derived genome pair exists; augment the inputs")
    return best


def _edge_lookup(diagram: MultiRelationalDiagram):
    table = {}
    for edge in diagram.edges:
        table[(edge.kind, frozenset((edge.u, edge.v)))] = edge
    return table


def _oracle_edges(diagram, sel_a, sel_b, marker_pairs, use_caps_a, use_caps_b):
    """Adjacency, extremity and indel edges of one oracle candidate."""
    lookup = getattr(diagram, "_oracle_lookup", None)
    if lookup is None:
        lookup = _edge_lookup(diagram)
        diagram._oracle_lookup = lookup
    edges = []
    for sel in (sel_a, sel_b):
        for adj in sel:
            edges.append(lookup[(ADJ, frozenset(adj.ends))])
    for caps, count in ((diagram.caps_a, use_caps_a),
                        (diagram.caps_b, use_caps_b)):
        for i in range(0, count, 2):
            edges.append(lookup[(ADJ, frozenset((caps[i], caps[i + 1])))])
    matched_a = {ma for ma, _ in marker_pairs}
    matched_b = {mb for _, mb in marker_pairs}
    for ma, mb in marker_pairs:
        for kind in (TAIL, HEAD):
            pair = frozenset((Extremity(diagram.genome_a.species, ma, kind),
                              Extremity(diagram.genome_b.species, mb, kind)))
            edges.append(lookup[(EXT, pair)])
    for genome, matched in ((diagram.genome_a, matched_a),
                            (diagram.genome_b, matched_b)):
        for marker in genome.markers():
            if marker in matched:
                continue
            pair = frozenset((Extremity(genome.species, marker, TAIL),
                              Extremity(genome.species, marker, HEAD)))
            edge = lookup.get((ID, pair))
            if edge is None:
                return None  # copy can neither match nor be deleted
            edges.append(edge)
    return edges


def _oracle_ext_edge(diagram, pa, pb):
    lookup = diagram._oracle_lookup
    return lookup[(EXT, frozenset((pa, pb)))]
