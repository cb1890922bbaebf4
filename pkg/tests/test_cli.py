import json

from grassqp import __version__
from grassqp.cli import main, skip_surgery, verify_compat


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_init_writes_files(tmp_path, capsys):
    code, out = run(capsys, "init", "--k", "3", "--n", "7", "--variant", "type3", "--out", str(tmp_path), "--json")
    data = json.loads(out)
    assert code == 0 and data["result"]["vertices"] == 13
    assert data["version"] == __version__
    assert len(list(tmp_path.iterdir())) == 2


def test_init_principal(capsys):
    code, out = run(capsys, "init", "--k", "2", "--n", "5", "--variant", "type2", "--json")
    res = json.loads(out)["result"]
    assert code == 0 and res["mutable"] == 2 and res["potential_terms"] == 0


def test_init_range(capsys):
    assert main(["init", "--k", "1", "--n", "5"]) == 2


def test_cap_floor(capsys):
    assert main(["jacobian", "--k", "2", "--n", "5", "--cap", "3"]) == 2


def test_jacobian(capsys):
    code, out = run(capsys, "jacobian", "--k", "2", "--n", "5", "--cap", "10")
    assert code == 0 and "Stabilized(38)" in out


def test_rigidity_bkm(capsys):
    code, out = run(capsys, "rigidity", "--k", "3", "--n", "6", "--variant", "bkm", "--cap", "7", "--json")
    data = json.loads(out)
    assert code == 0 and data["result"]["fundamental_witnesses"]
    assert not data["result"]["rigid_up_to_cap"]


def test_exchange_graph_csv(tmp_path, capsys):
    out_csv = tmp_path / "eg.csv"
    code, out = run(capsys, "exchange-graph", "--k", "2", "--n", "6", "--out", str(out_csv))
    assert code == 0 and "14" in out
    assert out_csv.read_text().splitlines()[1].startswith("2,6,trivial,14")


def test_exchange_graph_bound(capsys):
    code, _ = run(capsys, "exchange-graph", "--k", "3", "--n", "7", "--max-seeds", "20")
    assert code == 1


def test_verify_compat_echoes_seed(capsys):
    code, out = run(capsys, "verify-compat", "--k", "2", "--n", "5", "--trials", "10", "--seed", "42", "--json")
    data = json.loads(out)
    assert code == 0 and data["seed"] == 42 and data["config"]["trials"] == 10


def test_verify_compat_deterministic():
    a = verify_compat(3, 6, 5, 4, seed=3)
    b = verify_compat(3, 6, 5, 4, seed=3)
    assert a == b


def test_corrupted_surgery_is_caught(capsys):
    res = verify_compat(2, 5, 3, 3, seed=0, exchange=skip_surgery)
    assert res["failures"] and "differs" in res["failures"][0]["error"]
    code, out = run(capsys, "verify-compat", "--k", "3", "--n", "7", "--trials", "2", "--corrupt")
    assert code == 1 and "witness" in out
