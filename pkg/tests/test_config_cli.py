import csv
import json
import subprocess
import sys

import pytest

from sheetcurrent.cli import EXIT_ERROR, EXIT_FAILED, EXIT_OK, main
from sheetcurrent.config import CRITERIA, SUBCOMMANDS, defaults_for, defaults_toml, load_config
from sheetcurrent.errors import ConfigError
from sheetcurrent.report import ConvergenceReport, format_number

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def test_every_subcommand_has_valid_defaults():
    for name in SUBCOMMANDS:
        cfg = defaults_for(name)
        assert cfg.subcommand == name


def test_defaults_document_round_trips_through_toml():
    doc = tomllib.loads(defaults_toml())
    assert doc["fourier-moment"]["grid_sizes"] == [10, 50, 100, 500]
    assert doc["seed"] == 0
    assert set(SUBCOMMANDS) <= set(doc)


def test_config_file_layers(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('seed = 7\nout = "x"\n\n[fourier-moment]\ngrid_sizes = [10, 100]\nreplicas = 500\n')
    sections = load_config(path)
    cfg = defaults_for("fourier-moment", sections["shared"], sections["fourier-moment"])
    assert (cfg.seed, cfg.out, cfg.grid_sizes, cfg.replicas) == (7, "x", [10, 100], 500)
    assert cfg.x_values == [0.0, 0.5, 1.0, 2.0]


@pytest.mark.parametrize(
    "text,needle",
    [
        ("bogus = 1\n", "bogus"),
        ("[nope]\nseed = 1\n", "nope"),
        ("[qv]\nreplica = 10\n", "replica"),
        ("seed = -3\n", "seed"),
        ('[qv]\ngrid_sizes = [0]\n', "grid_sizes"),
        ('weight_convention = "TwoPlusM"\n', "weight_convention"),
        ("seed = \n", "cannot read"),
    ],
)
def test_bad_configs_name_the_field(tmp_path, text, needle):
    path = tmp_path / "c.toml"
    path.write_text(text)
    with pytest.raises(ConfigError, match=needle):
        sections = load_config(path)
        defaults_for("qv", sections["shared"], sections.get("qv"))


def test_list_and_print_defaults(capsys):
    assert main(["--list"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == len(CRITERIA)
    assert "fourier-moment\tcriterion 1" in lines
    assert main(["--print-defaults"]) == EXIT_OK
    assert tomllib.loads(capsys.readouterr().out)["sobolev"]["d"] == [1, 2, 3]


def test_missing_subcommand_and_bad_config_exit_2(tmp_path, capsys):
    assert main([]) == EXIT_ERROR
    bad = tmp_path / "bad.toml"
    bad.write_text("unknown_key = 3\n")
    assert main(["sobolev", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_ERROR
    assert "unknown_key" in capsys.readouterr().err
    assert main(["qv", "--replicas", "1", "--out", str(tmp_path)]) == EXIT_ERROR


def test_failed_check_exits_1(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[lemma-fourier]\ntolerance = 1e-300\nm_max = 2\n")
    assert main(["lemma-fourier", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_FAILED
    report = json.loads((tmp_path / "lemma-fourier.json").read_text())
    assert report["passed"] is False and report["failures"]


@pytest.mark.parametrize("sub", ["simulate", "sobolev", "symmetrization", "lemma-fourier", "hermite-checks"])
def test_subcommands_pass_and_write_reports(tmp_path, sub):
    assert main([sub, "--out", str(tmp_path), "--seed", "5"]) == EXIT_OK
    rows = list(csv.reader((tmp_path / f"{sub}.csv").open()))
    assert rows[0] == ConvergenceReport.HEADER
    assert all(r[-1] == "pass" for r in rows[1:])
    meta = json.loads((tmp_path / f"{sub}.json").read_text())["metadata"]
    assert meta["seed"] == 5 and "numpy" in meta["versions"]
    assert "wall_time_s" in json.loads((tmp_path / f"{sub}.timing.json").read_text())


def test_sobolev_verdicts_in_report(tmp_path):
    assert main(["sobolev", "--d", "1", "--r", "0.4,1.0", "--out", str(tmp_path)]) == EXIT_OK
    labels = [r[0] for r in csv.reader((tmp_path / "sobolev.csv").open())]
    assert "d=1 r=0.4 divergent" in labels and "d=1 r=1.0 finite" in labels


def test_fourier_moment_report_columns(tmp_path):
    args = ["fourier-moment", "--grid-sizes", "100,10", "--x-values", "0.5", "--replicas", "2000", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    with (tmp_path / "fourier-moment.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    sizes = [int(r["size"]) for r in rows]
    assert sizes == sorted(sizes)
    exact = {float(r["exact"]) for r in rows}
    assert exact == {0.2025, 0.245025}
    for r in rows:
        assert float(r["target"]) == 0.25
        assert float(r["gap"]) == pytest.approx(abs(float(r["exact"]) - 0.25), abs=1e-17)


def test_qv_means_near_one(tmp_path):
    assert main(["qv", "--grid-sizes", "100,1000", "--replicas", "2000", "--out", str(tmp_path)]) == EXIT_OK
    with (tmp_path / "qv.csv").open() as fh:
        rows = [r for r in csv.DictReader(fh) if r["label"].startswith("quadratic")]
    assert [r["size"] for r in rows] == ["100", "1000"]
    assert float(rows[1]["mc_stderr"]) < float(rows[0]["mc_stderr"])


def test_same_seed_reproduces_every_byte(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / str(k)
        args = ["approx-error-fourier", "--grid-sizes", "4,8", "--replicas", "500", "--seed", "11", "--out", str(out)]
        assert main(args) == EXIT_OK
        outs.append(out)
    for name in ("approx-error-fourier.csv", "approx-error-fourier.json", "approx-error-fourier_batch.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_thread_override_keeps_bytes(tmp_path):
    for k in (1, 3):
        args = ["delta-mc", "--replicas", "3000", "--threads", str(k), "--out", str(tmp_path / str(k))]
        assert main(args) == EXIT_OK
    assert (tmp_path / "1" / "delta-mc.csv").read_bytes() == (tmp_path / "3" / "delta-mc.csv").read_bytes()


def test_number_format():
    assert format_number(0.1) == "0.10000000000000001"
    assert float(format_number(1 / 3)) == 1 / 3
    assert format_number(float("inf")) == "inf"


def test_console_script_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "sheetcurrent.cli", "--list"], capture_output=True, text=True, check=True
    )
    assert "report\tcriterion 1-10" in out.stdout
