import json
import os

import pytest

from spp_dcj import io
from spp_dcj.cli import (EXIT_INFEASIBLE, EXIT_OK, EXIT_PARSE, EXIT_SOLVER,
                         main)
from spp_dcj.extract import evaluate
from spp_dcj.genomes import is_genome

from util import build_genome


def run(*argv):
    return main(list(argv))


def write_pair(tmp_path, name="pair.tsv"):
    a = build_genome("A", [(["1.1", "2.1", "3.1"], True)])
    b = build_genome("B", [(["1.1", "-2.1", "3.1"], True)])
    path = tmp_path / name
    io.write_adjacencies({"A": a, "B": b}, path)
    return path


def simulate(tmp_path, **overrides):
    args = {"seed": "1", "families": "10", "leaves": "4", "scale": "1.0",
            "surfeit": "1.4", "adversarial": "0.0"}
    args.update({k: str(v) for k, v in overrides.items()})
    out = tmp_path / "sim"
    assert run("simulate", str(out), "--seed", args["seed"],
               "--families", args["families"], "--leaves", args["leaves"],
               "--scale", args["scale"], "--surfeit", args["surfeit"],
               "--adversarial", args["adversarial"]) == EXIT_OK
    return out


def test_pipeline_smoke(tmp_path):
    sim = simulate(tmp_path)
    for fname in ("tree.tsv", "truth.tsv", "degenerate.tsv", "events.tsv",
                  "manifest.json"):
        assert (sim / fname).exists()
    lin = tmp_path / "linearized.tsv"
    assert run("linearize", str(sim / "degenerate.tsv"),
               "-o", str(lin)) == EXIT_OK
    lp = tmp_path / "model.lp"
    idmap = tmp_path / "idmap.tsv"
    assert run("build", str(sim / "tree.tsv"), str(lin), "-o", str(lp),
               "--idmap", str(idmap)) == EXIT_OK
    sol = tmp_path / "model.sol"
    assert run("solve", str(lp), "-o", str(sol), "--internal") == EXIT_OK
    genomes_out = tmp_path / "genomes.tsv"
    dist_out = tmp_path / "distances.tsv"
    assert run("extract", str(sol), str(sim / "tree.tsv"), str(lin),
               "--idmap", str(idmap), "--genomes-out", str(genomes_out),
               "--distances-out", str(dist_out)) == EXIT_OK
    metrics_out = tmp_path / "metrics.tsv"
    assert run("evaluate", str(genomes_out), str(sim / "truth.tsv"),
               "-o", str(metrics_out)) == EXIT_OK

    predicted = io.read_adjacencies(genomes_out)
    truth = io.read_adjacencies(sim / "truth.tsv")
    assert set(predicted) == set(truth)
    for genome in predicted.values():
        assert is_genome(genome)
    overall = evaluate(predicted, truth)["overall"]
    assert overall.precision > 0.9 and overall.recall > 0.9
    # leaves were given as truth; they must come back unchanged
    tree = io.read_tree(sim / "tree.tsv")
    for leaf in tree.leaves():
        assert predicted[leaf] == truth[leaf]

    rows = [l.split("\t") for l in dist_out.read_text().splitlines()[1:]]
    assert len(rows) == len(tree.edges)
    assert all(int(r[2]) >= 0 for r in rows)

    manifest = json.loads((lp.parent / "model.lp.manifest.json").read_text())
    assert manifest["subcommand"] == "build"
    assert "wall_times" in manifest and "version" in manifest


def test_scale_zero_perfect_reconstruction(tmp_path):
    sim = simulate(tmp_path, scale="0.0", surfeit="1.5")
    lin = tmp_path / "lin.tsv"
    run("linearize", str(sim / "degenerate.tsv"), "-o", str(lin))
    lp, sol = tmp_path / "m.lp", tmp_path / "m.sol"
    assert run("build", str(sim / "tree.tsv"), str(lin), "-o", str(lp)) == 0
    assert run("solve", str(lp), "-o", str(sol), "--internal") == 0
    gout, dout = tmp_path / "g.tsv", tmp_path / "d.tsv"
    assert run("extract", str(sol), str(sim / "tree.tsv"), str(lin),
               "--genomes-out", str(gout), "--distances-out", str(dout)) == 0
    overall = evaluate(io.read_adjacencies(gout),
                       io.read_adjacencies(sim / "truth.tsv"))["overall"]
    assert overall.precision == 1.0 and overall.recall == 1.0


def test_simulate_deterministic(tmp_path):
    s1 = simulate(tmp_path / "one")
    s2 = simulate(tmp_path / "two")
    for fname in ("tree.tsv", "truth.tsv", "degenerate.tsv", "events.tsv"):
        assert (s1 / fname).read_bytes() == (s2 / fname).read_bytes()


def test_distance_identity_and_output_file(tmp_path):
    pair = write_pair(tmp_path)
    genomes = io.read_adjacencies(pair)
    pa, pb = tmp_path / "a.tsv", tmp_path / "b.tsv"
    io.write_adjacencies({"A": genomes["A"]}, pa)
    io.write_adjacencies({"B": genomes["B"]}, pb)
    out = tmp_path / "dist.tsv"
    assert run("distance", str(pa), str(pb), "-o", str(out)) == EXIT_OK
    table = dict(line.split("\t") for line in out.read_text().splitlines())
    assert table["distance"] == "1"  # single inversion
    assert run("distance", str(pa), str(pa), "-o", str(out)) == EXIT_OK
    table = dict(line.split("\t") for line in out.read_text().splitlines())
    assert table["distance"] == "0"


def test_distance_rejects_multi_species(tmp_path):
    pair = write_pair(tmp_path)
    assert run("distance", str(pair), str(pair)) == EXIT_INFEASIBLE


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        run("no-such-command")
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        run("build")  # missing required arguments
    assert err.value.code == 1


def test_parse_error_exit_codes(tmp_path):
    missing = tmp_path / "nope.tsv"
    assert run("linearize", str(missing), "-o",
               str(tmp_path / "o.tsv")) == EXIT_PARSE
    bad = tmp_path / "bad.tsv"
    bad.write_text("A\tonly-two-cols\n")
    assert run("linearize", str(bad), "-o",
               str(tmp_path / "o.tsv")) == EXIT_PARSE


def test_build_rejects_nonlinearizable(tmp_path):
    # triangle component admits no derived genome
    tri = tmp_path / "tri.tsv"
    tri.write_text("\n".join([
        "A\t1.1_t\t1.1_h\t1",
        "A\t1.1_h\t2.1_t\t1",
        "A\t1.1_t\t2.1_t\t1",
        "A\t2.1_h\t3.1_t\t1",
        "A\t3.1_h\tt.1_o\t1",
        "B\t1.1_t\t1.1_h\t1",
    ]) + "\n")
    tree = tmp_path / "tree.tsv"
    tree.write_text("A\tB\n")
    rc = run("build", str(tree), str(tri), "-o", str(tmp_path / "m.lp"))
    assert rc == EXIT_INFEASIBLE


def test_build_rejects_missing_node_genome(tmp_path):
    pair = write_pair(tmp_path)
    tree = tmp_path / "tree.tsv"
    tree.write_text("A\tB\nB\tC\n")
    assert run("build", str(tree), str(pair),
               "-o", str(tmp_path / "m.lp")) == EXIT_INFEASIBLE


def test_solver_failure_exit_code(tmp_path):
    pair = write_pair(tmp_path)
    tree = tmp_path / "tree.tsv"
    tree.write_text("A\tB\n")
    lp = tmp_path / "m.lp"
    assert run("build", str(tree), str(pair), "-o", str(lp)) == EXIT_OK
    assert run("solve", str(lp), "-o", str(tmp_path / "m.sol"),
               "--solver-cmd", "false {lp} {sol}") == EXIT_SOLVER


def test_solver_env_override(tmp_path, monkeypatch):
    pair = write_pair(tmp_path)
    tree = tmp_path / "tree.tsv"
    tree.write_text("A\tB\n")
    lp, sol = tmp_path / "m.lp", tmp_path / "m.sol"
    assert run("build", str(tree), str(pair), "-o", str(lp)) == EXIT_OK
    monkeypatch.setenv("SPP_DCJ_SOLVER", "false {lp} {sol}")
    assert run("solve", str(lp), "-o", str(sol)) == EXIT_SOLVER
    # --internal wins over the environment
    assert run("solve", str(lp), "-o", str(sol), "--internal") == EXIT_OK


def test_extract_idmap_mismatch(tmp_path):
    pair = write_pair(tmp_path)
    tree = tmp_path / "tree.tsv"
    tree.write_text("A\tB\n")
    lp, idmap = tmp_path / "m.lp", tmp_path / "m.tsv"
    sol = tmp_path / "m.sol"
    assert run("build", str(tree), str(pair), "-o", str(lp),
               "--idmap", str(idmap)) == EXIT_OK
    assert run("solve", str(lp), "-o", str(sol), "--internal") == EXIT_OK
    # different alpha changes nothing structural, different reduction might;
    # force a mismatch by truncating the idmap
    lines = idmap.read_text().splitlines()
    idmap.write_text("\n".join(lines[:-1]) + "\n")
    rc = run("extract", str(sol), str(tree), str(pair), "--idmap", str(idmap),
             "--genomes-out", str(tmp_path / "g.tsv"),
             "--distances-out", str(tmp_path / "d.tsv"))
    assert rc == EXIT_INFEASIBLE
