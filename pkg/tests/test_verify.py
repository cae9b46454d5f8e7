import json

import pytest

from topospi1.io import load_json
from topospi1.verify import CHECKS, LEMMAS, SUITES, Context, RunConfig, run_case, run_replay, run_verify


def test_every_suite_has_a_statement_and_runner():
    from topospi1.verify import SUITE_CASES

    assert set(SUITES) == set(SUITE_CASES) == set(LEMMAS)


def test_small_suites_pass_and_are_deterministic():
    cfg = RunConfig(seed=3, max_total=3, random_count=2)
    a = run_verify(["decidable", "roundtrip", "tower"], cfg)
    b = run_verify(["decidable", "roundtrip", "tower"], RunConfig(seed=3, max_total=3, random_count=2))
    assert a.ok and json.dumps(a.to_json()) == json.dumps(b.to_json())
    assert all(s.instances == s.passed + s.failed + s.skipped_cap for s in a.suites)
    assert "PASS decidable" in a.to_text()


def test_other_seeds_pass_too():
    r1 = run_verify(["comparison"], RunConfig(seed=1, max_total=3, random_count=3)).suites[0]
    r2 = run_verify(["comparison"], RunConfig(seed=2, max_total=3, random_count=3)).suites[0]
    assert r1.ok and r2.ok and r1.skipped_cap == r2.skipped_cap == 0


def test_unknown_suite_and_bad_config():
    with pytest.raises(ValueError):
        run_verify(["nope"], RunConfig())
    with pytest.raises(ValueError):
        RunConfig(bound=0)


def test_env_caps(monkeypatch):
    monkeypatch.setenv("TOPOSPI1_CAPS", "lattice=12, hom=500,order=64,bound=4,junk=1")
    assert RunConfig.env_caps() == {"cap_lattice": 12, "cap_hom": 500, "cap_order": 64, "bound": 4}


def test_mutation_is_caught_and_replayed(tmp_path):
    cfg = RunConfig(seed=0, max_total=3, mutations=("quotient",))
    rep = run_verify(["quotient"], cfg, out_dir=tmp_path)
    s = rep.suites[0]
    assert not rep.ok and s.failed >= 1
    raw = load_json(s.counterexample)
    assert raw["check"] == "quotient_criterion" and raw["mutations"] == ["quotient"]
    assert run_replay(s.counterexample) == s.message
    # without the mutation the stored case holds
    raw["mutations"] = []
    clean = tmp_path / "clean.json"
    clean.write_text(json.dumps(raw))
    assert run_replay(clean) is None


def test_run_case_reports_exceptions_as_failures():
    CHECKS["_always_raises"] = lambda ctx: (_ for _ in ()).throw(KeyError("boom"))
    try:
        assert run_case(Context(RunConfig()), "_always_raises", ()) == "KeyError: 'boom'"
    finally:
        del CHECKS["_always_raises"]
