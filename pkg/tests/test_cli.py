import os

from rarepath.cli import main


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _run(argv):
    return main(argv)


def test_ou_estimate_schema_and_determinism(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    base = ["ou-estimate", "--N", "2", "--replicas", "2000", "--step", "0.002",
            "--seed", "7", "--functional", "capped-duration:50"]
    assert _run(base + ["--out", str(out1)]) == 0
    assert _run(base + ["--out", str(out2), "--workers", "3"]) == 0
    assert _read(out1) == _read(out2)
    header, *rows = _read(out1).decode().strip().split("\n")
    assert header == "field,value"
    fields = [r.split(",")[0] for r in rows]
    assert fields == ["estimate", "stderr", "ess", "replicas", "step", "seed",
                      "max_log_weight", "top1_weight_share"]


def test_ou_estimate_sample_dump(tmp_path):
    out = tmp_path / "e.csv"
    dump1 = tmp_path / "d1.csv"
    dump2 = tmp_path / "d2.csv"
    base = ["ou-estimate", "--N", "2", "--replicas", "400", "--step", "0.004",
            "--seed", "3", "--out", str(out)]
    assert _run(base + ["--dump", str(dump1)]) == 0
    assert _run(base + ["--dump", str(dump2), "--workers", "2"]) == 0
    assert _read(dump1) == _read(dump2)
    lines = _read(dump1).decode().splitlines()
    assert lines[0] == "replica_id,hit_time,integral_sq,log_weight,payoff"
    assert len(lines) == 401
    # the report is identical with and without the dump
    out2 = tmp_path / "e2.csv"
    assert _run(base[:-1] + [str(out2)]) == 0
    assert _read(out) == _read(out2)


def test_ou_oracle_runs(tmp_path):
    out = tmp_path / "o.csv"
    rc = _run(["ou-oracle", "--N", "2", "--attempts", "20000", "--step", "0.002",
               "--seed", "3", "--out", str(out)])
    assert rc == 0
    text = _read(out).decode()
    assert "acceptance_rate" in text


def test_ou_oracle_zero_acceptance_exit_code(tmp_path):
    rc = _run(["ou-oracle", "--N", "4", "--attempts", "10", "--step", "0.002",
               "--seed", "3", "--out", str(tmp_path / "z.csv")])
    assert rc == 3


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "level = 2\nreplicas = 1000\nstep = 0.004\nseed = 9\n"
        "functional = capped-duration:50\n# comment line\n")
    out1 = tmp_path / "c1.csv"
    out2 = tmp_path / "c2.csv"
    rc = _run(["ou-estimate", "--config", str(cfg), "--out", str(out1)])
    assert rc == 0
    assert b"seed,9" in _read(out1)
    # flag overrides the file value
    rc = _run(["ou-estimate", "--config", str(cfg), "--seed", "11",
               "--out", str(out2)])
    assert rc == 0
    assert b"seed,11" in _read(out2)


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("level = 2\nbogus = 1\n")
    rc = _run(["ou-estimate", "--config", str(cfg), "--replicas", "10",
               "--step", "0.01", "--seed", "1", "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_bad_functional_exits_2(tmp_path):
    rc = _run(["ou-estimate", "--N", "2", "--replicas", "10", "--step", "0.01",
               "--seed", "1", "--functional", "nope", "--out",
               str(tmp_path / "x.csv")])
    assert rc == 2


def test_seed_is_mandatory(tmp_path):
    rc = _run(["ou-estimate", "--N", "2", "--replicas", "10", "--step", "0.01",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 2


def test_outdir_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("RAREPATH_OUTDIR", str(tmp_path))
    rc = _run(["measure-check", "--replicas", "2000", "--seed", "5"])
    assert rc == 0
    assert os.path.exists(tmp_path / "measure_check.csv")


def test_cpp_simulate_methods_deterministic(tmp_path):
    for method in ("time-change", "thinning"):
        out1 = tmp_path / f"{method}1.csv"
        out2 = tmp_path / f"{method}2.csv"
        base = ["cpp-simulate", "--method", method, "--intensity", "affine:1:1",
                "--bound", "32", "--horizon", "1.5", "--seed", "13"]
        assert _run(base + ["--out", str(out1)]) == 0
        assert _run(base + ["--out", str(out2)]) == 0
        assert _read(out1) == _read(out2)
        assert _read(out1).decode().startswith("jump_index,time,mark_0")


def test_tightness_constant_family(tmp_path):
    out = tmp_path / "t.csv"
    rc = _run(["tightness", "--family", "constant", "--replicas", "1000",
               "--kappas", "2,4", "--seed", "1", "--out", str(out)])
    assert rc == 0
    text = _read(out).decode()
    assert text.splitlines()[0] == "n,t,kappa,estimate,stderr"
    assert "verdict,TightnessConsistent" in text


def test_chain_demo_identities(tmp_path):
    out = tmp_path / "c.csv"
    rc = _run(["chain-demo", "--seed", "3", "--samples", "2000",
               "--out", str(out)])
    assert rc == 0
    rows = dict(line.split(",", 1) for line in
                _read(out).decode().strip().splitlines()[1:])
    assert float(rows["harmonic_residual"]) <= 1e-12
    assert float(rows["identity_gap"]) <= 1e-10
    assert float(rows["sampler_chi2_p"]) > 0.01


def test_workers_do_not_change_scaling(tmp_path):
    out1 = tmp_path / "s1.csv"
    out2 = tmp_path / "s2.csv"
    base = ["ou-scaling", "--levels", "2,3", "--replicas", "2000",
            "--step", "0.004", "--seed", "5"]
    assert _run(base + ["--out", str(out1)]) == 0
    assert _run(base + ["--out", str(out2), "--workers", "4"]) == 0
    assert _read(out1) == _read(out2)
    assert _read(out1).decode().splitlines()[0] == \
        "N,is_cost,rejection_cost_per_effective,ratio"
