import subprocess
import sys

import pytest

from multicz.cli import build_parser, main


@pytest.mark.parametrize("cmd,extra", [
    ("orlicz", ["--n", "256"]),
    ("maximal", ["--n", "256"]),
    ("weights", ["--n", "64", "--family", "dyadic"]),
    ("operator", ["--n", "128", "--m", "1"]),
    ("commutator", ["--n", "128", "--seed", "3"]),
])
def test_subcommands_pass(tmp_path, cmd, extra, capsys):
    assert main([cmd, "--out", str(tmp_path)] + extra) == 0
    assert "assertions: pass" in capsys.readouterr().out
    assert (tmp_path / "summary.csv").exists()


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(
        "experiments:\n"
        "  - id: trivial\n"
        "  - id: orlicz\n"
        "    name: orlicz_small\n"
        "    params: {n_pairs: 10}\n"
        "assertions:\n"
        "  - {experiment: orlicz_small, metric: max, op: '<=', value: 1.0e-6}\n"
        "  - {experiment: trivial, metric: max, op: '>', value: 1.0}\n")
    assert main(["suite", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert (tmp_path / "o" / "orlicz_small.csv").exists()


def test_bad_family_rejected():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["orlicz", "--family", "hexagonal"])


def test_module_entry_point(tmp_path):
    done = subprocess.run([sys.executable, "-m", "multicz", "orlicz", "--n", "64",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    assert "orlicz: max=" in done.stdout
