import json
import pytest
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run
from core.config import Settings

AS = "kind: nsoperad\nname: As\ngen mu arity=2 degree=0\norder = pathdeglex\nrel mu o1 mu = mu o2 mu\n"
ACYCLIC = "kind: nsoperad\ngen m arity=2 degree=0\ngen e arity=2 degree=1\norder = pathdeglex\ndiff e = m\n"


@pytest.fixture
def settings(tmp_path):
    return Settings(max_threads=1, cache_path=str(tmp_path / "cache.db"), cache_enabled=False)


@pytest.fixture
def write(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


class TestUsage:

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["frobnicate"],
            ["dims"],
            ["dims", "--family", "NoSuchFamily"],
            ["dims", "--family", "blmHyperCom"],
            ["dims", "missing.txt"],
            ["dims", "--format", "yaml", "--family", "tGrav"],
            ["homology", "--family", "tGrav"],
        ],
    )
    def test_usage_errors(self, settings, argv, capsys):
        assert run(argv, settings) == EXIT_USAGE
        assert capsys.readouterr().out == ""

    def test_file_and_family_conflict(self, settings, write):
        assert run(["dims", write("as.txt", AS), "--family", "tGrav"], settings) == EXIT_USAGE

    def test_homology_needs_differential(self, settings, write):
        assert run(["homology", write("as.txt", AS), "--arity", "3"], settings) == EXIT_USAGE

    def test_parse_error_is_usage(self, settings, write):
        assert run(["dims", write("bad.txt", "kind: nsoperad\nbogus line\n")], settings) == EXIT_USAGE


class TestCommands:

    def test_dims_family(self, settings, capsys):
        assert run(["dims", "--family", "tGrav", "--max-arity", "3"], settings) == EXIT_OK
        out = capsys.readouterr().out
        assert "tGrav: 1 1 2 4" in out

    def test_dims_file(self, settings, write, capsys):
        assert run(["dims", write("as.txt", AS), "--max-arity", "4", "--format", "json"], settings) == EXIT_OK
        data = json.loads(capsys.readouterr().out)

        # Assertions
        assert data["command"] == "dims"
        assert data["tables"][0]["label"] == "As"
        assert data["truncation"]["max_arity"] == 4

    def test_groebner(self, settings, write, capsys):
        assert run(["groebner", write("as.txt", AS), "--max-arity", "4"], settings) == EXIT_OK
        out = capsys.readouterr().out
        assert "mu(" in out
        assert out.rstrip().endswith("PASS")

    def test_dual(self, settings, write, capsys):
        assert run(["dual", write("as.txt", AS), "--max-arity", "3"], settings) == EXIT_OK
        out = capsys.readouterr().out
        assert "gen mu_dual arity=2 degree=1" in out

    def test_homology(self, settings, write, tmp_path, capsys):
        slice_path = tmp_path / "slice.txt"
        argv = ["homology", write("dg.txt", ACYCLIC), "--arity", "2", "--low", "0", "--high", "1", "--slice-out", str(slice_path)]
        assert run(argv, settings) == EXIT_OK

        # Assertions
        assert "d^2 = 0" in capsys.readouterr().out
        assert slice_path.read_text(encoding="utf-8").startswith("# arity 2")

    def test_homology_reports_bad_differential(self, settings, write):
        path = write("dg.txt", ACYCLIC + "gen f arity=2 degree=2\ndiff f = e\n")
        assert run(["homology", path, "--arity", "2", "--low", "0", "--high", "2"], settings) == EXIT_FAILED

    def test_verify_to_file(self, settings, tmp_path):
        out = tmp_path / "reports" / "tgrav.csv"
        argv = ["verify", "--family", "tGrav", "--max-arity", "3", "--format", "csv", "--out", str(out)]
        assert run(argv, settings) == EXIT_OK
        assert out.read_text(encoding="utf-8").startswith("# verify ")
