import json

import pytest

from stegolab.cli import main, parse_int_list

WORKED_X = "aababaaaabbaaaaabb"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_parse_int_list():
    assert parse_int_list("6,8,10") == [6, 8, 10]
    assert parse_int_list("10-14") == [10, 11, 12, 13, 14]
    assert parse_int_list("1,3-4") == [1, 3, 4]


def test_embed_worked_example(tmp_path, capsys):
    cover = tmp_path / "cover.txt"
    cover.write_text(f"{WORKED_X}\naaaaaa\n")
    secret = tmp_path / "secret.txt"
    secret.write_text("0110 0\n")
    out = tmp_path / "stego.txt"
    code, _ = run(capsys, "embed", "--covertext", str(cover), "--secret-file", str(secret), "--out", str(out))
    assert code == 0
    assert out.read_text() == "aaabbaaabaabaaaabb\naaaaaa\n"
    meta = json.loads((tmp_path / "stego.txt.meta.json").read_text())
    assert meta["result"]["t"] == [4, 0]
    assert meta["result"]["bits_consumed"] == 4


def test_embed_secret_too_short_leaves_nothing(tmp_path, capsys):
    cover = tmp_path / "cover.txt"
    cover.write_text(f"{WORKED_X}\n")
    secret = tmp_path / "secret.txt"
    secret.write_text("01")
    out = tmp_path / "stego.txt"
    code, _ = run(capsys, "embed", "--covertext", str(cover), "--secret-file", str(secret), "--out", str(out))
    assert code == 4
    assert not out.exists()
    assert sorted(p.name for p in tmp_path.iterdir()) == ["cover.txt", "secret.txt"]


def test_embed_malformed_covertext(tmp_path, capsys):
    cover = tmp_path / "cover.txt"
    cover.write_text("abxa\n")
    code, _ = run(capsys, "embed", "--covertext", str(cover), "--out", str(tmp_path / "o"))
    assert code == 2
    cover.write_text("abab\nab\n")
    code, _ = run(capsys, "embed", "--covertext", str(cover), "--n", "4", "--out", str(tmp_path / "o"))
    assert code == 2


def test_missing_input_is_usage_error(tmp_path, capsys):
    code, _ = run(capsys, "extract", "--stegotext", str(tmp_path / "nope.txt"))
    assert code == 2
    assert main(["verify", "--codec", "nonsense"]) == 2
    assert main(["verify", "--codec", "pair"]) == 2


def test_extract(tmp_path, capsys):
    st = tmp_path / "st.txt"
    st.write_text("aaabbaaabaabaaaabb\naaaa\n")
    code, out = run(capsys, "extract", "--stegotext", str(st))
    assert code == 0 and out == "0110\n\n"


@pytest.mark.parametrize("codec,block_len", [("pair", "4"), ("block", "4"), ("block", "3")])
def test_embed_extract_roundtrip_seeded(tmp_path, capsys, codec, block_len):
    import random
    rng = random.Random(99)
    lines = ["".join(rng.choice("ab") for _ in range(rng.randrange(0, 30))) for _ in range(40)]
    cover = tmp_path / "cover.txt"
    cover.write_text("".join(ln + "\n" for ln in lines))
    out = tmp_path / "st.txt"
    rec = tmp_path / "rec.txt"
    assert main(["embed", "--codec", codec, "--block-len", block_len, "--covertext", str(cover),
                 "--seed", "31", "--out", str(out)]) == 0
    assert main(["extract", "--codec", codec, "--block-len", block_len, "--stegotext", str(out),
                 "--out", str(rec)]) == 0
    ts = json.loads((tmp_path / "st.txt.meta.json").read_text())["result"]["t"]
    from stegolab.core import SeededBits
    stream = SeededBits(31).take(sum(ts))
    got = rec.read_text().splitlines()
    pos = 0
    for t, bits in zip(ts, got):
        assert bits == stream[pos:pos + t]
        pos += t
    assert len(got) == len(lines)


def test_verify_exit_codes(capsys):
    code, out = run(capsys, "verify", "--codec", "pair", "--source", "uniform2", "--n", "6")
    assert code == 0 and json.loads(out)["result"]["secure"] is True
    code, out = run(capsys, "verify", "--codec", "constant", "--source", "uniform2", "--n", "2")
    assert code == 1
    res = json.loads(out)["result"]
    assert res["max_discrepancy"] == "3/4" and res["worst_string"] == "aa"
    code, _ = run(capsys, "verify", "--codec", "swapped-pair", "--source", "uniform2", "--n", "4")
    assert code == 1


def test_verify_budget_exit(capsys):
    code, _ = run(capsys, "verify", "--codec", "pair", "--source", "uniform2", "--n", "12", "--budget", "100")
    assert code == 3


def test_verify_source_file_and_tsv(tmp_path, capsys):
    src = tmp_path / "mu.txt"
    src.write_text("a=2/3\nb=1/3\n")
    code, out = run(capsys, "verify", "--codec", "block", "--block-len", "2", "--source", str(src),
                    "--n", "4", "--format", "tsv")
    assert code == 0
    header, cols, row = out.splitlines()
    assert header.startswith("# {")
    assert dict(zip(cols.split("\t"), row.split("\t")))["exact_speed"] == "2/9"


def test_verify_monte_carlo(capsys):
    code, out = run(capsys, "verify", "--codec", "pair", "--source", "uniform2", "--n", "16",
                    "--trials", "2000", "--seed", "3")
    assert code == 0 and json.loads(out)["result"]["rejected"] is False
    code, _ = run(capsys, "verify", "--codec", "constant", "--source", "uniform2", "--n", "16",
                  "--trials", "2000", "--seed", "3")
    assert code == 1


def test_speed(tmp_path, capsys):
    code, out = run(capsys, "speed", "--codec", "pair", "--source", "a=2/3,b=1/3", "--n", "4")
    res = json.loads(out)["result"]
    assert code == 0 and res["exact_speed"] == res["closed_form"] == "2/9"
    fig = tmp_path / "rates.png"
    code, out = run(capsys, "speed", "--codec", "block", "--source", "uniform2", "--n", "8",
                    "--block-lens", "2,4,8", "--figure", str(fig))
    doc = json.loads(out)
    assert code == 0 and doc["result"]["exact_speed"] == "13/32"
    assert [r[1] for r in doc["table"]["rows"]] == ["1/4", "13/32", "565/1024"]
    assert fig.stat().st_size > 0


def test_lab_gamma(tmp_path, capsys):
    fig = tmp_path / "g.png"
    code, out = run(capsys, "lab", "gamma", "--delta", "0.5", "--figure", str(fig))
    assert code == 0 and json.loads(out)["result"]["gamma"] == "0.188722"
    assert fig.exists()


def test_lab_bounds_tsv(tmp_path, capsys):
    fig = tmp_path / "b.png"
    code, out = run(capsys, "lab", "bounds", "--format", "tsv", "--figure", str(fig))
    lines = out.splitlines()
    assert code == 0
    assert json.loads(lines[0][2:])["summary"]["gap_strictly_decreasing"] is True
    assert lines[1].split("\t")[:3] == ["n", "delta", "k"]
    assert len(lines) == 2 + 12 and fig.exists()


def test_lab_closure(capsys):
    code, out = run(capsys, "lab", "closure", "--n-range", "6,8", "--seeds", "0-1", "--format", "tsv")
    rows = [ln.split("\t") for ln in out.splitlines()[2:]]
    assert code == 0 and len(rows) == 4
    assert all(r[5] == "1" and r[7] == "True" for r in rows)


def test_lab_subset(tmp_path, capsys):
    src_file = tmp_path / "x.txt"
    table = tmp_path / "table.tsv"
    code, out = run(capsys, "lab", "subset", "--n", "6", "--seed", "2", "--pair-fraction", "1/2",
                    "--write-source", str(src_file), "--write-table", str(table))
    res = json.loads(out)["result"]
    assert code == 0 and res["secure"] and res["Z"] == 16
    assert len(table.read_text().splitlines()) == 16
    code, out = run(capsys, "verify", "--codec", "identity", "--source", str(src_file), "--n", "6")
    assert code == 0


def test_lab_complexity(tmp_path, capsys):
    fig = tmp_path / "cx.png"
    tables = tmp_path / "tables"
    code, out = run(capsys, "lab", "complexity", "--n-range", "10-12", "--seeds", "0-1",
                    "--figure", str(fig), "--table-dir", str(tables))
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["growth_in_window"] and doc["result"]["factor_ok"]
    assert len(list(tables.iterdir())) == 6 and fig.exists()


def test_reports_are_byte_identical(tmp_path):
    argvs = [
        ["verify", "--codec", "pair", "--source", "uniform2", "--n", "6"],
        ["verify", "--codec", "pair", "--source", "uniform2", "--n", "16", "--trials", "1000", "--seed", "9"],
        ["lab", "bounds", "--format", "tsv"],
        ["lab", "complexity", "--n-range", "8-9", "--seeds", "0-1", "--format", "tsv"],
        ["lab", "closure", "--n-range", "6", "--seeds", "0-2"],
    ]
    for i, argv in enumerate(argvs):
        a, b = tmp_path / f"{i}a", tmp_path / f"{i}b"
        main(argv + ["--out", str(a)])
        main(argv + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()
