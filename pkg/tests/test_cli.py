"""Command line driver: config resolution, exit codes, artifact determinism."""

import json

import pytest

from quasispan.cli import ConfigError, main, resolve_config


def _write_config(path, **overrides):
    cfg = {"task": "verify", "algebra": {"kind": "heisenberg", "cutoff": 4},
           "module": {"lam": "0", "depth": 4}}
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return str(path)


def test_resolve_config_defaults():
    cfg = resolve_config({})
    assert cfg["task"] == "verify"
    assert cfg["algebra"] == {"kind": "heisenberg", "cutoff": 6}
    assert cfg["seed"] == 0


def test_resolve_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        resolve_config({"tusk": "verify"})
    with pytest.raises(ConfigError):
        resolve_config({"algebra": {"kind": "heisenberg", "cutof": 4}})


def test_resolve_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        resolve_config({"task": "no-such-task"})
    with pytest.raises(ConfigError):
        resolve_config({"algebra": {"kind": "heisenberg", "cutoff": 1}})


def test_missing_config_file_exits_2(tmp_path, capsys):
    code = main(["--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert "config error" in capsys.readouterr().err


def test_verify_task_writes_artifacts(tmp_path):
    cfg = _write_config(tmp_path / "job.json",
                        out=str(tmp_path / "arts"),
                        cache={"enabled": False},
                        verify={"residue_window": 4, "index_range": 1,
                                "sample_limit": 6})
    assert main(["--config", cfg]) == 0
    report = json.loads((tmp_path / "arts" / "verify.json").read_text())
    assert report["axioms"]["passed"] is True
    assert (tmp_path / "arts" / "summary.txt").read_text().startswith("task: verify")


def test_normalize_empty_expression(tmp_path):
    cfg = _write_config(tmp_path / "job.json",
                        task="normalize",
                        out=str(tmp_path / "arts"),
                        cache={"enabled": False},
                        normalize={"variant": "diff1", "expression": []})
    assert main(["--config", cfg]) == 0
    report = json.loads((tmp_path / "arts" / "normalize.json").read_text())
    assert report["output"] == report["input"]
    assert report["evaluation"]["status"] == "equal"


def test_normalize_unknown_generator_exits_2(tmp_path, capsys):
    cfg = _write_config(
        tmp_path / "job.json", task="normalize",
        out=str(tmp_path / "arts"), cache={"enabled": False},
        normalize={"variant": "diff0",
                   "expression": [{"coeff": "1", "word": [["zz", -1]]}]})
    assert main(["--config", cfg]) == 2
    assert "unknown generator" in capsys.readouterr().err


def test_spanning_certifies_to_weight_cap(tmp_path):
    cfg = _write_config(tmp_path / "job.json",
                        task="spanning",
                        algebra={"kind": "heisenberg", "cutoff": 5},
                        module={"lam": "0", "depth": 5},
                        x={"kind": "c2", "weight_cap": 3},
                        out=str(tmp_path / "arts"),
                        cache={"enabled": False},
                        spanning={"n": 2})
    assert main(["--config", cfg]) == 0
    report = json.loads((tmp_path / "arts" / "spanning.json").read_text())
    assert report["quotient"]["spanning"]["certified_depth"] == 3


def test_cofiniteness_task(tmp_path):
    cfg = _write_config(tmp_path / "job.json",
                        task="cofiniteness",
                        out=str(tmp_path / "arts"),
                        cache={"enabled": False},
                        cofiniteness={"n_max": 3})
    assert main(["--config", cfg]) == 0
    report = json.loads((tmp_path / "arts" / "cofiniteness.json").read_text())
    assert report["equivalence"]["verdicts_agree"] is True


def test_artifacts_are_deterministic(tmp_path):
    out = tmp_path / "arts"
    cache = tmp_path / "cache"
    cfg = _write_config(tmp_path / "job.json",
                        task="normalize",
                        out=str(out),
                        cache={"enabled": True, "dir": str(cache)},
                        normalize={
                            "variant": "diff0",
                            "expression": [
                                {"coeff": "2", "word": [["1", -1], ["1", -3]]}
                            ],
                        })
    assert main(["--config", cfg]) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["--config", cfg]) == 0  # second run hits the table cache
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second


def test_cache_corruption_triggers_rebuild(tmp_path, capsys):
    out = tmp_path / "arts"
    cache = tmp_path / "cache"
    cfg = _write_config(tmp_path / "job.json",
                        out=str(out),
                        cache={"enabled": True, "dir": str(cache)},
                        verify={"residue_window": 4, "index_range": 1,
                                "sample_limit": 4})
    assert main(["--config", cfg]) == 0
    cached = next(cache.glob("*.json"))
    blob = json.loads(cached.read_text())
    blob["tables"]["y_table"][0][3] = [["vac", "7"]]
    cached.write_text(json.dumps(blob))
    capsys.readouterr()
    assert main(["--config", cfg]) == 0
    assert "cache" in capsys.readouterr().err.lower()


def test_seed_changes_sampled_instances(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    cfg = _write_config(tmp_path / "job.json",
                        out=str(out_a),
                        cache={"enabled": False},
                        verify={"residue_window": 4, "index_range": 2,
                                "sample_limit": 5})
    assert main(["--config", cfg]) == 0
    assert main(["--config", cfg, "--seed", "7", "--out", str(out_b)]) == 0
    rep_a = json.loads((out_a / "verify.json").read_text())
    rep_b = json.loads((out_b / "verify.json").read_text())
    assert rep_a["seed"] == 0 and rep_b["seed"] == 7

    def picked(rep):
        return [i["parameters"] for i in rep["residue_instances"]]

    assert picked(rep_a) != picked(rep_b)
