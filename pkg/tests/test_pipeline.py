"""End-to-end runs of the driver on the bundled instances."""

import json

import pytest

from distcert.automata import parse_spec
from distcert.mdp import parse_mdp
from distcert.pipeline import Config, run
from distcert.region import InitRegion, parse_init

from conftest import DATA, needs_solver

SPECS = [s for s in (DATA / "specs.txt").read_text().splitlines() if s and not s.startswith("#")]


def _running():
    mdp = parse_mdp((DATA / "running.mdp").read_text())
    return mdp, parse_init((DATA / "running.init").read_text(), mdp.n)


@pytest.mark.parametrize("spec", SPECS)
def test_bundled_specs_reach_solver_stage(spec):
    mdp, init = _running()
    result = run(mdp, parse_spec(spec, mdp.n), init, None, emit_only=True)
    assert result.status == "emitted"
    assert result.exit_code == 0
    assert result.emitted and all("(check-sat)" in text for text in result.emitted)


def test_grid_preset_files_reach_solver_stage():
    mdp = parse_mdp((DATA / "grid3x3.mdp").read_text())
    nba = parse_spec((DATA / "grid3x3.spec").read_text().strip(), mdp.n)
    init = parse_init((DATA / "grid3x3.init").read_text(), mdp.n)
    result = run(mdp, nba, init, None, emit_only=True)
    assert result.status == "emitted"
    assert mdp.n == 7


def test_emit_only_report_is_json_serialisable(gf_nba, init_point, running):
    result = run(running, gf_nba, init_point, None, emit_only=True)
    data = json.loads(json.dumps(result.to_json()))
    assert data["status"] == "emitted"
    assert data["counts"]["template_vars"] == 20


@needs_solver
def test_existential_mode_on_point(running, gf_nba, init_point):
    result = run(running, gf_nba, init_point, None, Config(mode="existential"))
    assert result.status == "solved"
    assert result.check.verdict == "validated"
    assert result.counts["template_vars"] == 20


@needs_solver
def test_verification_over_whole_simplex(running, gf_nba, b_at_a):
    result = run(running, gf_nba, InitRegion.simplex(running.n), b_at_a)
    assert result.status == "solved"
    assert result.check.verdict == "validated"


@needs_solver
def test_unreachable_spec_is_not_certified(running, a_at_a, init_point):
    bad = parse_spec('G "V1>=0.9"', running.n)
    result = run(running, bad, init_point, a_at_a, Config(timeout=30))
    assert result.status == "not-solved"
    assert result.exit_code == 1
