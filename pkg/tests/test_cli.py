import json

import pytest

from sudlerlab import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cf_golden(capsys):
    code, out, _ = run(capsys, "cf", "--alpha", "golden", "--k", "5", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "k,a,p,q"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[1] for r in rows[1:]] == ["1"] * 5
    assert [r[3] for r in rows] == ["1", "1", "2", "3", "5", "8"]


def test_vconst(capsys):
    code, out, _ = run(capsys, "vconst", "--tol", "1e-8")
    assert code == 0 and abs(json.loads(out)["V"] - 0.16153297360972526) < 1e-8


def test_sudler_csv(capsys):
    code, out, _ = run(capsys, "sudler", "--alpha", "golden", "--max-n", "100", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "N,logP,err" and len(lines) == 101
    assert abs(float(lines[1].split(",")[1]) - 0.6228) < 1e-4


def test_usage_error_prints_grammar(capsys):
    code, _, err = run(capsys, "sudler", "--alpha", "pi", "--max-n", "10")
    assert code == 1 and "grammar" in err


def test_argparse_error_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["nope"])
    assert exc.value.code == 1
    assert "grammar" in capsys.readouterr().err


def test_numeric_failure_exit_2(capsys):
    code, _, err = run(capsys, "sudler", "--alpha", "list:1,2,3", "--max-n", "10")
    assert code == 2 and "numeric failure" in err


def test_guard_failure_names_index(capsys):
    code, _, err = run(capsys, "sudler", "--summand", "indicator", "--a", "0", "--b", "0.6180339887498949",
                       "--max-n", "10")
    assert code == 2 and "n=1" in err


def test_unsupported_closed_form_is_usage_error(capsys):
    code, _, _ = run(capsys, "clt", "--alpha", "e", "--M", "1000")
    assert code == 1


def test_out_and_manifest(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, stdout, _ = run(capsys, "sudler", "--max-n", "50", "--format", "csv", "--out", str(out),
                          "--binary", str(tmp_path / "s.bin"))
    assert code == 0 and stdout == ""
    manifest = json.loads((tmp_path / "s.csv.manifest.json").read_text())
    assert manifest["output"] == "s.csv" and manifest["guard_incidents"] == 0 and manifest["precision_bits"] == 192
    assert (tmp_path / "s.bin").stat().st_size == 50 * 16


def test_unwritable_path_checked_first(capsys):
    code, _, _ = run(capsys, "sudler", "--max-n", "10", "--out", "/nonexistent/dir/x.csv")
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["moments", "--grid", "100,1000", "--format", "csv"],
    ["dioph-sum", "--M", "1000"],
    ["sigma2", "--grid", "dyadic:6:9"],
    ["clt", "--M", "1000"],
    ["symmetry", "--k", "10"],
    ["extremes", "--alpha", "e", "--k", "8"],
    ["birkhoff-predict", "--M", "100", "--summand", "indicator", "--a", "0.1", "--b", "0.4"],
    ["bu", "--grid", "dyadic:6:8", "--format", "csv"],
    ["ae-levy", "--seeds", "0:3", "--k", "100"],
])
def test_every_subcommand_runs(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out


def test_grid_parsing():
    assert cli.parse_grid("dyadic:2:4") == [4, 8, 16]
    assert cli.parse_grid("10,1e3") == [10, 1000]
    with pytest.raises(cli.UsageError):
        cli.parse_grid("100,10")
    assert cli.parse_seeds("3:6") == [3, 4, 5]


def test_json_embeds_alpha_verbatim(capsys):
    _, out, _ = run(capsys, "dioph-sum", "--alpha", "quadratic:0;|1,2", "--M", "10")
    doc = json.loads(out)
    assert doc["alpha_spec"] == "quadratic:0;|1,2" and doc["report_type"] == "dioph-sum"
