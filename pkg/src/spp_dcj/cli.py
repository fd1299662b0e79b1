"""Command-line front end.

Subcommands wire the pipeline: ``linearize`` → ``build`` → ``solve`` →
``extract``, with ``distance``, ``simulate`` and ``evaluate`` as utilities.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 infeasible or out-of-scale
input, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from typing import Dict, Optional

from . import __version__
from . import io
from .diagram import DiagramError, SingletonExplosion
from .extract import (DISTANCE_HEADER, METRICS_HEADER, DecodeError, audit,
                      decode, distance_rows, evaluate, metrics_rows, validate)
from .genomes import FamilyAssignment, GenomeError, Phylogeny
from .ilp import ModelError, build_model, write_lp
from .linearize import augment, find_nonlinearizable_component
from .sim import EVENT_HEADER, SimConfig, add_noise, event_rows, evolve
from .solver import (SolverError, parse_solution, solve_external,
                     solve_internal)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _manifest(path, subcommand, args: Dict, stages: Dict[str, float]):
    payload = {
        "subcommand": subcommand,
        "arguments": {k: v for k, v in sorted(args.items())},
        "version": __version__,
        "wall_times": {k: round(v, 6) for k, v in stages.items()},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _model_flags(parser: _Parser):
    parser.add_argument("--alpha", type=float, default=0.5,
                        help="weight of the distance term (default 0.5)")
    parser.add_argument("--beta", type=float, default=0.25,
                        help="penalty per used telomere (default 0.25)")
    parser.add_argument("--families", metavar="TSV", default=None,
                        help="marker-to-family map; default: marker prefix")
    parser.add_argument("--no-optional-constraints", action="store_true",
                        help="omit the redundant strengthening constraints")
    parser.add_argument("--no-reduction", action="store_true",
                        help="keep all telomeric extremity edges")
    parser.add_argument("--jobs", type=int, default=1,
                        help="threads for per-edge diagram construction")


def _load_families(path) -> FamilyAssignment:
    if path is None:
        return FamilyAssignment()
    return io.read_family_map(path)


def _build_from_args(args):
    tree = io.read_tree(args.tree)
    genomes = io.read_adjacencies(args.adjacencies)
    families = _load_families(args.families)
    for species in sorted(tree.nodes):
        if species not in genomes:
            raise ModelError("no adjacencies for phylogeny node %s" % species)
        bad = find_nonlinearizable_component(genomes[species])
        if bad is not None:
            raise ModelError(
                "genome %s is not linearizable: component {%s} admits no "
                "derived genome; run 'spp-dcj linearize' first"
                % (species, ", ".join(e.name for e in bad.component)))
    return build_model(tree, genomes, families, args.alpha, args.beta,
                       optional_constraints=not args.no_optional_constraints,
                       reduce_telomeres=not args.no_reduction,
                       jobs=args.jobs), genomes


def cmd_linearize(args) -> int:
    genomes = io.read_adjacencies(args.adjacencies)
    augmented = {species: augment(g) for species, g in sorted(genomes.items())}
    io.write_adjacencies(augmented, args.output)
    return EXIT_OK


def cmd_build(args) -> int:
    start = time.monotonic()
    model, _ = _build_from_args(args)
    built = time.monotonic()
    write_lp(model, args.output, args.idmap)
    _manifest(args.output + ".manifest.json", "build", {
        "tree": args.tree, "adjacencies": args.adjacencies,
        "alpha": args.alpha, "beta": args.beta, "families": args.families,
        "optional_constraints": not args.no_optional_constraints,
        "reduction": not args.no_reduction,
    }, {"build": built - start, "write": time.monotonic() - built})
    return EXIT_OK


def cmd_solve(args) -> int:
    start = time.monotonic()
    if args.solver_cmd or (not args.internal and "SPP_DCJ_SOLVER" in os.environ):
        import subprocess
        template = args.solver_cmd or os.environ["SPP_DCJ_SOLVER"]
        if "{lp}" not in template or "{sol}" not in template:
            raise SolverError("solver command must contain {lp} and {sol}")
        fields = {"lp": args.model, "sol": args.output}
        if "{time_limit}" in template:
            fields["time_limit"] = args.time_limit or 0
        proc = subprocess.run(template.format(**fields), shell=True,
                              capture_output=True, text=True)
        if proc.returncode != 0:
            raise SolverError("external solver failed (%d): %s"
                              % (proc.returncode, proc.stderr.strip()[:500]))
        if not os.path.exists(args.output):
            raise SolverError("external solver produced no solution file")
    else:
        # in-process: hand the LP to the bundled HiGHS backend
        from . import milp_cli
        rc = milp_cli.main([args.model, args.output]
                           + (["--time-limit", str(args.time_limit)]
                              if args.time_limit else []))
        if rc != 0:
            raise SolverError("bundled solver failed with exit code %d" % rc)
    _manifest(args.output + ".manifest.json", "solve", {
        "model": args.model, "internal": args.internal,
        "solver_cmd": args.solver_cmd, "time_limit": args.time_limit,
    }, {"solve": time.monotonic() - start})
    return EXIT_OK


def cmd_extract(args) -> int:
    start = time.monotonic()
    model, genomes = _build_from_args(args)
    if args.idmap:
        declared = set()
        with open(args.idmap, "r", encoding="utf-8") as handle:
            for line in handle:
                if line.startswith("#") or not line.strip():
                    continue
                declared.add(line.split("\t", 1)[0])
        if declared != set(model.variables):
            raise ModelError(
                "variable map does not match the rebuilt model; rerun "
                "extract with the same flags used for build")
    reported, raw = parse_solution(args.solution)
    assignment = {}
    for name, var in model.variables.items():
        if name not in raw:
            raise DecodeError("solution lacks variable %s" % name)
        val = raw[name]
        if var.kind in ("B", "I"):
            if abs(val - round(val)) > 1e-6:
                raise DecodeError("non-integral value %r for %s" % (val, name))
            val = float(round(val))
        assignment[name] = val
    decoded = decode(model, assignment)
    validate(model, decoded, genomes)
    if reported is not None:
        audit(model, decoded, reported)
    io.write_adjacencies(decoded.genomes, args.genomes_out)
    io.write_tsv(args.distances_out, DISTANCE_HEADER, distance_rows(decoded))
    _manifest(args.genomes_out + ".manifest.json", "extract", {
        "solution": args.solution, "idmap": args.idmap, "tree": args.tree,
        "adjacencies": args.adjacencies, "alpha": args.alpha,
        "beta": args.beta,
        "optional_constraints": not args.no_optional_constraints,
        "reduction": not args.no_reduction,
    }, {"extract": time.monotonic() - start})
    return EXIT_OK


def _rename_species(genome, species):
    from .genomes import Adjacency, DegenerateGenome, Extremity
    renamed = [Adjacency(tuple(Extremity(species, e.marker, e.kind)
                               for e in adj.ends), adj.weight)
               for adj in genome.adjacencies]
    return DegenerateGenome(species, renamed)


def cmd_distance(args) -> int:
    genomes_a = io.read_adjacencies(args.genome_a)
    genomes_b = io.read_adjacencies(args.genome_b)
    if len(genomes_a) != 1 or len(genomes_b) != 1:
        raise GenomeError("each distance input must hold exactly one species")
    (sa, ga), = genomes_a.items()
    (sb, gb), = genomes_b.items()
    if sa == sb:
        # comparing a genome against itself (or a same-named variant)
        sb = sa + "#2"
        gb = _rename_species(gb, sb)
    families = _load_families(args.families)
    model = build_model(Phylogeny([(sa, sb)]), {sa: ga, sb: gb}, families,
                       args.alpha, args.beta,
                       optional_constraints=not args.no_optional_constraints,
                       reduce_telomeres=not args.no_reduction)
    result = solve_internal(model, time_limit=args.time_limit)
    if result.status == "infeasible":
        raise ModelError("no derived genome pair exists; run linearize first")
    decoded = decode(model, result.assignment)
    audit(model, decoded, result.objective)
    pd = decoded.distances[0]
    bd = pd.breakdown
    rows = [("distance", bd.distance), ("n_prime", "%g" % bd.n_prime),
            ("indel_free_cycles", bd.indel_free_cycles),
            ("transitions", bd.transitions),
            ("circular_singletons", bd.circular_singletons),
            ("used_telomeres", pd.used_telomeres),
            ("objective", "%.6f" % result.objective)]
    out = sys.stdout if args.output is None else open(
        args.output, "w", encoding="utf-8", newline="\n")
    try:
        for key, value in rows:
            out.write("%s\t%s\n" % (key, value))
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_simulate(args) -> int:
    start = time.monotonic()
    config = SimConfig(families=args.families_count, leaves=args.leaves,
                       scale=args.scale, seed=args.seed)
    result = evolve(config)
    os.makedirs(args.out_dir, exist_ok=True)
    io.write_tree(result.tree, os.path.join(args.out_dir, "tree.tsv"))
    io.write_adjacencies(result.genomes,
                         os.path.join(args.out_dir, "truth.tsv"))
    io.write_tsv(os.path.join(args.out_dir, "events.tsv"), EVENT_HEADER,
                 event_rows(result.events))
    rng = random.Random(config.seed + 1)
    leaves = set(result.tree.leaves())
    noisy = {}
    for species in sorted(result.genomes):
        genome = result.genomes[species]
        if species in leaves:
            noisy[species] = genome
        else:
            noisy[species], _ = add_noise(
                genome, args.surfeit, rng,
                adversarial_fraction=args.adversarial)
    io.write_adjacencies(noisy, os.path.join(args.out_dir, "degenerate.tsv"))
    _manifest(os.path.join(args.out_dir, "manifest.json"), "simulate", {
        "families": args.families_count, "leaves": args.leaves,
        "scale": args.scale, "seed": args.seed, "surfeit": args.surfeit,
        "adversarial": args.adversarial, "out_dir": args.out_dir,
    }, {"simulate": time.monotonic() - start})
    return EXIT_OK


def cmd_evaluate(args) -> int:
    predicted = io.read_adjacencies(args.predicted)
    truth = io.read_adjacencies(args.truth)
    metrics = evaluate(predicted, truth, _load_families(args.families))
    io.write_tsv(args.output, METRICS_HEADER, metrics_rows(metrics))
    return EXIT_OK


def make_parser() -> _Parser:
    parser = _Parser(prog="spp-dcj", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("linearize", help="augment genomes to guarantee "
                       "derived genomes exist")
    p.add_argument("adjacencies")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("build", help="assemble the ILP and write LP + idmap")
    p.add_argument("tree")
    p.add_argument("adjacencies")
    p.add_argument("-o", "--output", required=True, help="LP output path")
    p.add_argument("--idmap", default=None, help="variable map output path")
    _model_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="solve an LP model")
    p.add_argument("model")
    p.add_argument("-o", "--output", required=True, help="solution file path")
    p.add_argument("--internal", action="store_true",
                   help="force the bundled in-process backend")
    p.add_argument("--solver-cmd", default=None,
                   help="external command template with {lp}/{sol}")
    p.add_argument("--time-limit", type=float, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("extract", help="decode a solution into genomes and "
                       "distances")
    p.add_argument("solution")
    p.add_argument("tree")
    p.add_argument("adjacencies")
    p.add_argument("--idmap", default=None,
                   help="variable map from the build step, for consistency "
                   "checking")
    p.add_argument("--genomes-out", required=True)
    p.add_argument("--distances-out", required=True)
    _model_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("distance", help="pairwise weighted degenerate "
                       "DCJ-indel distance")
    p.add_argument("genome_a")
    p.add_argument("genome_b")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--time-limit", type=float, default=None)
    _model_flags(p)
    p.set_defaults(func=cmd_distance, alpha=1.0, beta=0.0)

    p = sub.add_parser("simulate", help="simulate evolution plus noisy "
                       "degenerate ancestors")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--families", dest="families_count", type=int, default=100)
    p.add_argument("--leaves", type=int, default=10)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--surfeit", type=float, default=1.2)
    p.add_argument("--adversarial", type=float, default=0.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="precision/recall of predicted "
                       "adjacencies against a truth set")
    p.add_argument("predicted")
    p.add_argument("truth")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--families", default=None,
                   help="marker-to-family map; default: marker prefix")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (io.ParseError, OSError) as exc:
        print("parse error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE
    except (GenomeError, ModelError, DiagramError, SingletonExplosion,
            DecodeError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print("solver error: %s" % exc, file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
