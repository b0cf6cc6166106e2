import json
import pytest
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.reports import DimensionTable, Report, render, report_schema, tables_frame, write_report


@pytest.fixture
def report():
    report = Report(command="dims", arguments={"family": "tGrav"}, truncation={"max_arity": 3})
    report.tables.append(
        DimensionTable(label="tGrav", graded={0: {0: 1}, 1: {0: 1}, 2: {0: 1, 1: 1}, 3: {}}, expected={0: 1, 1: 1, 2: 2, 3: 4})
    )
    return report


class TestReport:

    def test_ok_without_verdicts(self, report):
        assert report.ok

    def test_add_verdict(self, report):
        report.add_verdict("first", True)
        report.add_verdict("second", 0, "broken", {"arity": 3})

        # Assertions
        assert not report.ok
        assert report.verdicts[1].ok is False
        assert report.verdicts[1].witness == {"arity": 3}

    def test_merge(self, report):
        other = Report(command="other")
        other.add_verdict("x", True)
        other.tables.append(DimensionTable(label="y"))
        report.merge(other)
        assert [t.label for t in report.tables] == ["tGrav", "y"]
        assert len(report.verdicts) == 1

    def test_totals(self, report):
        assert report.tables[0].totals() == {0: 1, 1: 1, 2: 2, 3: 0}

    def test_frame_keeps_empty_arity(self, report):
        frame = tables_frame(report)
        empty = frame[frame["arity"] == 3]

        # Assertions
        assert len(frame) == 5
        assert len(empty) == 1
        assert empty["dimension"].iloc[0] == 0
        assert empty["expected"].iloc[0] == 4

    def test_schema(self):
        schema = report_schema()
        assert "verdicts" in schema["properties"]


class TestRender:

    def test_json(self, report):
        data = json.loads(render(report, "json"))
        assert data["command"] == "dims"
        assert data["tables"][0]["graded"]["2"] == {"0": 1, "1": 1}
        assert data["version"] == report.version

    def test_csv_header(self, report):
        text = render(report, "csv")
        lines = text.splitlines()

        # Assertions
        assert lines[0] == '# dims {"family": "tGrav"}'
        assert lines[1] == "family,arity,degree,dimension,expected"

    def test_text(self, report):
        text = render(report, "text")
        assert text.startswith("dims family=tGrav\n")
        assert "truncation: max_arity=3" in text
        assert "tGrav: 1 1 2 0" in text
        assert not text.rstrip().endswith("PASS")

    @pytest.mark.parametrize("ok,last", [(True, "PASS"), (False, "FAIL")])
    def test_text_verdict_line(self, report, ok, last):
        report.add_verdict("check", ok)
        assert render(report, "text").rstrip("\n").splitlines()[-1] == last

    def test_unknown_format(self, report):
        with pytest.raises(ValueError):
            render(report, "xml")


class TestWriteReport:

    def test_stdout(self, capsys):
        write_report("hello\n")
        assert capsys.readouterr().out == "hello\n"

    def test_file(self, tmp_path):
        target = tmp_path / "nested" / "report.txt"
        write_report("hello\n", str(target))
        assert target.read_text(encoding="utf-8") == "hello\n"
