import pytest

from opencavity import reproduce


@pytest.fixture(scope="module")
def rows(cfg):
    return reproduce.run(cfg)


def test_row_count_and_columns(rows):
    assert len(rows) >= 12
    assert all(r.status in ("PASS", "FAIL") for r in rows)


def test_report_round_trip(rows, tmp_path):
    path = tmp_path / "r.csv"
    reproduce.write_report(rows, path)
    assert reproduce.read_report(path) == rows


def test_reader_rejects_foreign_csv(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        reproduce.read_report(path)


def test_rows_helpers():
    assert reproduce.abs_row("x", 1.0, 1.05, 0.1).passed
    assert not reproduce.rel_row("x", 1.0, 1.2, 0.1).passed
    assert reproduce.max_row("x", 1e-12, 1e-10).passed
    assert reproduce.fmt(1 / 3) == "0.333333333"


def test_table_format(rows):
    table = reproduce.format_table(rows)
    assert table.splitlines()[0].split() == list(reproduce.COLUMNS)
