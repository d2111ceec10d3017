import csv
import io

import pytest

from cwsketch.cli import main
from cwsketch.fileio import read_fingerprints


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.txt"
    assert main(["gen", "--docs", "12", "--features", "300", "--density", "0.1", "--gen-seed", "4",
                 "--out", str(path)]) == 0
    return path


def rows_of(text):
    return list(csv.reader(io.StringIO("".join(l for l in text.splitlines(True) if not l.startswith("#")))))


def test_sketch_twice_identical(tmp_path, corpus_file):
    outs = []
    for name in ("a.wjs", "b.wjs"):
        out = tmp_path / name
        assert main(["sketch", str(corpus_file), "--algo", "i2cws", "--d", "64", "--seed", "17",
                     "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    f = read_fingerprints(tmp_path / "a.wjs")
    assert (f.algorithm, f.D, f.master_seed, len(f.fingerprints)) == ("i2cws", 64, 17, 12)


def test_bench_mse_shape(capsys, corpus_file):
    assert main(["bench-mse", str(corpus_file), "--pairs", "6", "--trials", "1"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert rows[0] == ["algorithm", "D", "pairs", "trials", "mse", "bias", "wall_ms"]
    assert len(rows) == 1 + 8 * 5
    assert {r[1] for r in rows[1:]} == {"32", "64", "128", "256", "512"}
    assert all(r[6] == "0.000" for r in rows[1:])


def test_estimate_identical_docs(tmp_path, capsys):
    path = tmp_path / "twins.txt"
    path.write_text("1 1:0.5 4:2.0\n1 1:0.5 4:2.0\n")
    assert main(["estimate", str(path), "--d", "128"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert lines[1].split("\t") == ["0", "1", "1.0", "1.0"]


def test_estimate_from_fingerprint_files(tmp_path, capsys, corpus_file):
    for seed in ("3", "4"):
        main(["sketch", str(corpus_file), "--algo", "icws", "--d", "32", "--seed", seed,
              "--out", str(tmp_path / f"{seed}.wjs")])
    assert main(["estimate", str(corpus_file), "--fingerprints", str(tmp_path / "3.wjs"),
                 "--pair", "0:0"]) == 0
    assert capsys.readouterr().out.splitlines()[-1].endswith("\t1.0")
    code = main(["estimate", str(corpus_file), "--fingerprints", str(tmp_path / "3.wjs"),
                 str(tmp_path / "4.wjs"), "--pair", "0:1"])
    assert code == 1
    assert "seeds differ" in capsys.readouterr().err


def test_unknown_algorithm(corpus_file, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sketch", str(corpus_file), "--algo", "bogus", "--d", "8", "--seed", "1",
              "--out", str(tmp_path / "x")])
    assert exc.value.code != 0


def test_unknown_algorithm_in_list():
    with pytest.raises(SystemExit) as exc:
        main(["bench-mse", "--algos", "i2cws,bogus"])
    assert exc.value.code != 0


def test_missing_input(tmp_path, capsys):
    assert main(["estimate", str(tmp_path / "nope.txt")]) == 1
    assert "error" in capsys.readouterr().err


def test_parse_error_is_reported(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("1 1:0.5\n1 2:0.5 2:0.1\n")
    assert main(["estimate", str(path)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_retrieve_from_file_with_queries(tmp_path, capsys, corpus_file):
    assert main(["retrieve", str(corpus_file), "--queries", "3", "--algos", "i2cws,minhash",
                 "--d-list", "32", "--k-list", "1,3"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert rows[0] == ["algorithm", "D", "K", "precision", "map", "wall_ms"]
    assert [r[0] for r in rows[1:]] == ["i2cws", "i2cws", "minhash", "minhash"]


def test_gen_clustered_writes_queries(tmp_path):
    db, qs = tmp_path / "db.txt", tmp_path / "q.txt"
    assert main(["gen", "--kind", "clustered", "--queries", "5", "--queries-out", str(qs), "--out", str(db)]) == 0
    assert len(db.read_text().splitlines()) == 500
    assert len(qs.read_text().splitlines()) == 5


def test_gen_powerlaw(tmp_path):
    out = tmp_path / "p.txt"
    assert main(["gen", "--kind", "powerlaw", "--docs", "3", "--features", "100", "--density", "0.05",
                 "--exponent", "2.5", "--scale", "2", "--out", str(out)]) == 0
    weights = [float(t.split(":")[1]) for line in out.read_text().splitlines() for t in line.split()[1:]]
    assert len(weights) == 15 and min(weights) >= 2.0


def test_gen_rejects_bad_exponent(tmp_path, capsys):
    assert main(["gen", "--kind", "powerlaw", "--exponent", "1", "--out", str(tmp_path / "p.txt")]) == 1
    assert "exponent" in capsys.readouterr().err
