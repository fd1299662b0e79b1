import pytest

from spp_dcj import milp_cli
from spp_dcj.genomes import FamilyAssignment, Phylogeny
from spp_dcj.ilp import build_model, write_lp
from spp_dcj.solver import parse_solution, solve_internal

from util import random_degenerate_pair, seeded

SMALL_LP = """Maximize
 obj: 3 x + 2 y - 1 z
Subject To
 c1: 1 x + 1 y <= 1
 c2: 1 y + 1 z >= 1
Bounds
 0 <= z <= 2
Binaries
 x
 y
Generals
 z
End
"""


def test_parse_lp(tmp_path):
    path = tmp_path / "m.lp"
    path.write_text(SMALL_LP)
    problem = milp_cli.parse_lp(path)
    assert problem.variables == ["x", "y", "z"]
    assert problem.objective == {0: 3.0, 1: 2.0, 2: -1.0}
    assert len(problem.constraints) == 2
    terms, sense, rhs = problem.constraints[0]
    assert (terms, sense, rhs) == ({0: 1.0, 1: 1.0}, "<=", 1.0)
    assert problem.integer == {0, 1, 2}
    assert problem.upper[0] == 1.0 and problem.upper[2] == 2.0


@pytest.mark.parametrize("text", [
    "Maximize\n obj: 3 x\nSubject To\n c: 3 x 1\nEnd\n",   # no sense token
    "Maximize\n obj: x\nEnd\n",                            # bare variable
    "Subject To\n 1 x <= 1\nEnd\n",                        # unnamed row
    "stray line\n",                                        # outside sections
])
def test_parse_lp_errors(tmp_path, text):
    path = tmp_path / "m.lp"
    path.write_text(text)
    with pytest.raises((milp_cli.LpFormatError, ValueError)):
        milp_cli.parse_lp(path)


def test_solve_small(tmp_path):
    lp = tmp_path / "m.lp"
    sol = tmp_path / "m.sol"
    lp.write_text(SMALL_LP)
    assert milp_cli.main([str(lp), str(sol)]) == 0
    reported, values = parse_solution(sol)
    # optimum: x=1, y=0, z=1 -> 3 - 1 = 2
    assert reported == pytest.approx(2.0)
    assert values["x"] == 1.0 and values["y"] == 0.0 and values["z"] == 1.0


def test_main_exit_codes(tmp_path):
    missing = tmp_path / "nope.lp"
    assert milp_cli.main([str(missing), str(tmp_path / "o.sol")]) == 2
    bad = tmp_path / "bad.lp"
    bad.write_text("Maximize\n obj: x\nEnd\n")
    assert milp_cli.main([str(bad), str(tmp_path / "o.sol")]) == 2
    infeasible = tmp_path / "inf.lp"
    infeasible.write_text("Maximize\n obj: 1 x\nSubject To\n"
                          " c1: 1 x >= 2\nBinaries\n x\nEnd\n")
    assert milp_cli.main([str(infeasible), str(tmp_path / "o.sol")]) == 1


def test_round_trip_with_model(tmp_path):
    rng = seeded(83)
    a, b = random_degenerate_pair(rng)
    tree = Phylogeny([("A", "B")])
    model = build_model(tree, {"A": a, "B": b}, FamilyAssignment(),
                        alpha=0.5, beta=0.25)
    lp = tmp_path / "m.lp"
    sol = tmp_path / "m.sol"
    write_lp(model, lp)
    assert milp_cli.main([str(lp), str(sol)]) == 0
    reported, _ = parse_solution(sol)
    internal = solve_internal(model)
    assert reported == pytest.approx(internal.objective, abs=1e-6)
