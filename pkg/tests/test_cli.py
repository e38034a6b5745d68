import csv
import io
import json

import pytest

from seedquery.cli import main
from seedquery.graph import load_edge_list


@pytest.fixture
def er_file(tmp_path):
    path = tmp_path / "er.txt"
    assert main(["gen", "er", "--n", "60", "--edge-prob", "0.08", "--p", "0.3", "--seed", "1",
                 "--out", str(path)]) == 0
    return path


def test_gen_writes_loadable_graph(er_file):
    g = load_edge_list(er_file.read_text())
    assert g.n == 60 and g.p == 0.3


def test_gen_clique_circle(tmp_path, capsys):
    out = tmp_path / "cc.txt"
    assert main(["gen", "clique-circle", "--n", "900", "--mu", "0.3", "--out", str(out)]) == 0
    assert "linked cliques" in capsys.readouterr().err
    assert load_edge_list(out.read_text()).m == 3600


def test_gen_rejects_bad_shape(capsys):
    assert main(["gen", "clique-circle", "--n", "901", "--mu", "0.3"]) == 2
    assert "error" in capsys.readouterr().err


def test_probe_seed_json_and_saved_sketch(er_file, tmp_path, capsys):
    sk = tmp_path / "sk.json"
    assert main(["probe-seed", "--graph", str(er_file), "--k", "2", "--rho", "0.3", "--T", "3",
                 "--tau", "10", "--seed", "5", "--eval-sims", "50", "--save-sketch", str(sk)]) == 0
    res = json.loads(capsys.readouterr().out)
    assert len(res["seeds"]) == 2 and res["rng_seed"] == 5 and res["query_cost"]["edge_reveals"] >= 0
    assert "spread_mean" in res
    assert main(["probe-seed", "--sketch", str(sk), "--k", "2", "--seed", "5", "--eval-sims", "0"]) == 0
    again = json.loads(capsys.readouterr().out)
    assert again["seeds"] == res["seeds"]


def test_probe_seed_csv(er_file, capsys):
    main(["probe-seed", "--graph", str(er_file), "--k", "1", "--T", "2", "--rho", "0.2",
          "--format", "csv", "--eval-sims", "10"])
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 1 and rows[0]["algorithm"] == "probe-seed"


@pytest.mark.parametrize("cmd", ["spread-seed", "greedy", "random", "one-hop", "degree"])
def test_seeding_commands(cmd, er_file, capsys):
    extra = ["--rounds-rho", "20"] if cmd == "spread-seed" else []
    extra += ["--greedy-sims", "20"] if cmd == "greedy" else []
    assert main([cmd, "--graph", str(er_file), "--k", "2", "--eval-sims", "20", *extra]) == 0
    assert len(json.loads(capsys.readouterr().out)["seeds"]) == 2


def test_lt_spread_seed_command(er_file, capsys):
    assert main(["lt-spread-seed", "--graph", str(er_file), "--k", "1", "--rounds-rho", "30",
                 "--eval-sims", "20", "-v"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["query_cost"]["reverse_queries"] == 30 and "rounds" in res["diagnostics"]


def test_eval_command(er_file, tmp_path, capsys):
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("0 1 2\n")
    main(["eval", "--graph", str(er_file), "--seeds-file", str(seeds), "--eval-sims", "100"])
    a = json.loads(capsys.readouterr().out)
    main(["eval", "--graph", str(er_file), "--seeds", "0,1,2", "--eval-sims", "100"])
    b = json.loads(capsys.readouterr().out)
    assert a == b and a["spread_mean"] >= 3


def test_bound_command(capsys):
    main(["bound", "--n", "1000", "--k", "5", "--epsilon", "0.5", "--delta", "1", "--p", "0.1"])
    out = json.loads(capsys.readouterr().out)
    assert out["T"] == 843 and out["tau"] == 278 and out["initial_nodes"] == 177
    assert out["bound"] > 0


def test_sweep_is_byte_identical(er_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--graph", str(er_file), "--k", "2", "--rho", "0.3", "--tau", "10",
            "--sweep", "T=0,1,2", "--reps", "2", "--eval-sims", "20", "--seed", "4"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(io.StringIO(a.read_text())))
    assert len(rows) == 6 and rows[0]["schema_version"] == "1"


def test_sweep_from_config(tmp_path, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[experiment]\nalgorithm = spread-seed\nk = 2\nreps = 1\neval_sims = 10\n"
                   "[graph]\ngenerator = star\nn = 30\np = 0.3\n[sweep]\nparam = budget\nvalues = 0 20\n")
    assert main(["sweep", "--config", str(cfg), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [s["sweep_value"] for s in doc["summary"]] == [0, 20]
