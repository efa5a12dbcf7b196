import json

import pytest

from oatbell import __version__
from oatbell.cli import (LATTICE_COLUMNS, OAT_COLUMNS, classify_lines, compare_rows, main,
                         read_config_file)


def read_csv(path):
    lines = path.read_text().splitlines()
    header, columns, *rows = lines
    return header, columns.split(","), [r.split(",") for r in rows]


def test_oat_csv(tmp_path):
    out = tmp_path / "oat.csv"
    assert main(["oat", "--n", "8", "--tau-list", "0,0.3927,1.5707963267948966",
                 "--out", str(out), "--threads", "1"]) == 0
    header, cols, rows = read_csv(out)
    assert header.startswith("# schema=oatbell-oat/1")
    assert f"version={__version__}" in header and "N=8" in header
    assert cols == OAT_COLUMNS
    assert len(rows) == 3
    E = [float(r[1]) for r in rows]
    assert E[0] == 0
    assert E[1] > 4e-3
    assert E[2] == pytest.approx(0.25, abs=1e-10)
    assert int(rows[2][cols.index("bell_depth")]) == 8
    assert (tmp_path / "oat.plot.py").exists()


def test_oat_n8_passes_printed_thresholds(tmp_path):
    out = tmp_path / "n8.csv"
    main(["oat", "--n", "8", "--tau-start", "0", "--tau-stop", "1.5707963267948966",
          "--tau-points", "200", "--out", str(out), "--threads", "1"])
    _, cols, rows = read_csv(out)
    E = [float(r[cols.index("correlator")]) for r in rows]
    for level in (4e-3, 7.8e-3, 1.5e-2):
        assert max(E) > level


@pytest.mark.parametrize("args", [
    ["--tau-points", "0"],
    ["--tau-points", "1"],
    ["--tau-list", ""],
    ["--tau-list", "0.3,0.1"],
    ["--tau-start", "1", "--tau-stop", "0.5"],
])
def test_bad_grid_is_usage_error(tmp_path, args):
    out = tmp_path / "bad.csv"
    assert main(["oat", "--n", "8", "--out", str(out), *args]) == 2
    assert not out.exists()


def test_odd_n_is_usage_error(tmp_path):
    assert main(["oat", "--n", "7", "--out", str(tmp_path / "x.csv")]) == 2


def test_oat_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["oat", "--n", "40", "--tau-points", "25", "--threads", "1"]
    main([*argv, "--out", str(a)])
    main([*argv, "--out", str(b), "--threads", "2"])
    assert a.read_bytes() == b.read_bytes()


def test_oat_json(tmp_path):
    out = tmp_path / "oat.json"
    assert main(["oat", "--n", "8", "--tau-list", "0,1", "--format", "json",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == "oatbell-oat/1"
    assert doc["columns"] == OAT_COLUMNS
    assert len(doc["rows"]) == 2


def test_floats_round_trip(tmp_path):
    out = tmp_path / "oat.csv"
    main(["oat", "--n", "20", "--tau-list", "0.1,0.2", "--out", str(out)])
    _, cols, rows = read_csv(out)
    from oatbell.bell import bell_correlator_oat
    assert float(rows[0][1]) == bell_correlator_oat(20, 0.1)


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nn = 10\ntau-points = 5\ntau_stop = 1.0\n")
    assert read_config_file(cfg)["tau_points"] == "5"
    out = tmp_path / "o.csv"
    assert main(["oat", "--config", str(cfg), "--tau-points", "3", "--out", str(out)]) == 0
    header, _, rows = read_csv(out)
    assert "N=10" in header and len(rows) == 3
    assert float(rows[-1][0]) == 1.0


def test_bad_config_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n 10\n")
    assert main(["oat", "--config", str(cfg)]) == 2


def test_classify_text(capsys):
    assert main(["classify", "--e", "1e-4", "--n", "1000"]) == 0
    out = capsys.readouterr().out
    assert "Bell depth = 989" in out
    assert "entanglement depth = 995" in out
    assert "2^-N" in out and "4^-N" in out and "1/8" in out and "1/16" in out
    assert "4^-N = 2^-2000" in out


def test_classify_examples():
    assert any(line.startswith("Bell depth = 50") for line in classify_lines(0.13, 50))
    lines = classify_lines(0.0, 12)
    assert any(line.startswith("Bell depth = 0") for line in lines)
    assert any(line.startswith("entanglement depth = 1") for line in lines)


def test_classify_json(tmp_path):
    out = tmp_path / "c.json"
    main(["classify", "--e", "0.07", "--n", "8", "--format", "json", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert doc["entanglement_depth"] == 8 and doc["bell_depth"] == 7


@pytest.mark.parametrize("E", ["-0.1", "0.3", "nan"])
def test_classify_out_of_range(E):
    assert main(["classify", "--e", E, "--n", "8"]) == 2


def test_lhv(capsys):
    assert main(["lhv", "--n", "4"]) == 0
    assert "equal = True" in capsys.readouterr().out
    assert main(["lhv", "--n", "9"]) == 2


def test_compare_rows():
    rows = {r[0]: r for r in compare_rows(100)}
    assert rows["tau_crit"][1] == pytest.approx(0.02995503406568251, rel=1e-8)
    assert rows["tau_crit"][2] == pytest.approx(1.766 / 100, rel=1e-3)
    assert rows["plateau_q4"][3] < 0.01


def test_compare_cli(tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--n", "50", "--out", str(out)]) == 0
    assert "oatbell-compare/1" in out.read_text().splitlines()[0]


LATTICE = ["lattice", "--n", "2", "--m-sites", "2", "--j-hop", "1", "--u", "0.4",
           "--boundary", "periodic", "--tau-points", "6", "--tau-stop", "1.5", "--threads", "1"]


def test_lattice_run(tmp_path):
    out = tmp_path / "lat.csv"
    assert main([*LATTICE, "--out", str(out)]) == 0
    header, cols, rows = read_csv(out)
    assert cols == LATTICE_COLUMNS and len(rows) == 6
    assert "oatbell-lattice/1" in header
    assert float(rows[0][cols.index("lattice_correlator")]) < 1e-10


def test_lattice_null_case_never_exceeds_local_bound(tmp_path):
    out = tmp_path / "null.csv"
    argv = ["lattice", "--n", "4", "--m-sites", "2", "--j-hop", "1", "--u", "0.3",
            "--uab-ratio", "1", "--grid", "time", "--tau-stop", "40", "--tau-points", "21",
            "--out", str(out)]
    assert main(argv) == 0
    _, cols, rows = read_csv(out)
    for r in rows:
        assert float(r[cols.index("lattice_correlator")]) <= 2.0**-4 * (1 + 1e-6)


def test_lattice_zero_chi_needs_time_grid(tmp_path):
    argv = ["lattice", "--n", "2", "--m-sites", "2", "--j-hop", "1", "--u", "0.3",
            "--uab-ratio", "1", "--out", str(tmp_path / "x.csv")]
    assert main(argv) == 2


def test_lattice_dimension_cap_is_numerical_failure(tmp_path):
    argv = ["lattice", "--n", "2", "--m-sites", "2", "--j-hop", "1", "--u", "0.3",
            "--max-dim", "5", "--out", str(tmp_path / "x.csv")]
    assert main(argv) == 3


def test_lattice_checkpoint_resume(tmp_path):
    full, part, ck = tmp_path / "full.csv", tmp_path / "part.csv", tmp_path / "ck.npz"
    main([*LATTICE, "--out", str(full)])
    assert main([*LATTICE, "--checkpoint-every", "1", "--checkpoint", str(ck),
                 "--stop-after", "3", "--out", str(part)]) == 0
    assert ck.exists()
    resumed = tmp_path / "resumed.csv"
    assert main([*LATTICE, "--resume", str(ck), "--out", str(resumed)]) == 0
    # the resumed run re-projects the state onto the momentum sector, so the
    # tables agree to rounding rather than bit for bit
    ha, cols, a = read_csv(full)
    hb, _, b = read_csv(resumed)
    assert ha == hb and len(a) == len(b)
    for ra, rb in zip(a, b):
        for x, y in zip(ra, rb):
            assert x == y or abs(float(x) - float(y)) <= 1e-9


def test_lattice_resume_with_other_params_fails(tmp_path):
    ck = tmp_path / "ck.npz"
    main([*LATTICE, "--checkpoint-every", "1", "--checkpoint", str(ck), "--stop-after", "2",
          "--out", str(tmp_path / "p.csv")])
    other = [a if a != "0.4" else "0.5" for a in LATTICE]
    assert main([*other, "--resume", str(ck), "--out", str(tmp_path / "r.csv")]) == 2


def test_lattice_v0_preset(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["lattice", "--n", "2", "--m-sites", "2", "--v0", "3", "--tau-points", "3",
                 "--out", str(out)]) == 0
    header, _, _ = read_csv(out)
    assert "v0=3" in header


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "oatbell", "classify", "--e", "0.13", "--n", "5"],
                          capture_output=True, text=True, check=True)
    assert "Bell depth = 5" in proc.stdout
