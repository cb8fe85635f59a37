import csv
import io
import math

import numpy as np
import pytest

from blogcap.errors import IncompleteRows, NotConverged
from blogcap.features import TABLE2_TERMS, DesignMatrix
from blogcap.mnlogit import InferenceRow, fit, inference
from blogcap.report import (
    CSV_FIELDS,
    FOOTNOTE,
    export,
    export_csv_text,
    format_cell,
    read_json_export,
    render_table,
)


def fitted(rng, n=400, k=3, max_iter=200):
    X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
    y = np.arange(n) % 5
    rng.shuffle(y)
    terms = ("Intercept",) + tuple(TABLE2_TERMS[1:k])
    res = fit(DesignMatrix(tuple(f"r{i}" for i in range(n)), terms, X, y), max_iter=max_iter)
    return res, inference(res, allow_unconverged=True)


def synthetic_rows(terms):
    return [InferenceRow(t, c, 0.1 * c, math.exp(0.1 * c), 0.05, 2.0 * c, 0.5, "")
            for t in terms for c in range(1, 5)]


def test_cell_example():
    assert format_cell(0.19, math.exp(0.19), "***") == "0.19(***) 1.21"


def test_zero_cell():
    assert format_cell(0.0, 1.0, "") == "0.00 1.00"
    assert format_cell(-0.001, math.exp(-0.001), "") == "0.00 1.00"


def test_comma_locale():
    assert format_cell(-1.21, 0.298, "**", comma=True) == "-1,21(**) 0,30"
    table = render_table(synthetic_rows(["Intercept"]), locale_comma=True)
    assert table.footnote == FOOTNOTE.replace(".", ",")


def test_full_table_has_116_cells():
    table = render_table(synthetic_rows(TABLE2_TERMS), n_obs=165)
    assert table.cell_count == 29 * 4
    text = table.text()
    assert text.splitlines()[0].split() == ["Variables", "(n=165)", "Low", "Average",
                                            "ModeratelyHigh", "High"]
    assert text.rstrip().endswith(FOOTNOTE)
    assert [r[0] for r in table.rows] == list(TABLE2_TERMS)


def test_incomplete_rows_rejected():
    rows = synthetic_rows(["Intercept", "CE"])[:-1]
    with pytest.raises(IncompleteRows):
        render_table(rows)


def test_p_at_boundary_gets_no_star():
    row = InferenceRow("CE", 1, 0.5, math.exp(0.5), 0.255, 1.96, 0.05, "")
    assert "(" not in render_table([row]).rows[0][1][0]


def test_stars_rendered_from_rows(rng):
    res, rows = fitted(rng)
    table = render_table(rows)
    for r in rows:
        cell = table.rows[list(res.terms).index(r.term)][1][r.category - 1]
        assert cell == format_cell(r.beta, r.rrr, r.stars)


def test_json_roundtrip_identical(rng, tmp_path):
    res, rows = fitted(rng)
    export(res, rows, "json", tmp_path / "fit.json")
    back, back_rows = read_json_export(tmp_path / "fit.json")
    np.testing.assert_array_equal(back.coefficients, res.coefficients)
    np.testing.assert_array_equal(back.covariance, res.covariance)
    assert back_rows == rows
    assert back.converged == res.converged and back.iterations == res.iterations


def test_csv_export(rng, tmp_path):
    res, rows = fitted(rng)
    export(res, rows, "csv", tmp_path / "inf.csv")
    records = list(csv.DictReader(io.StringIO((tmp_path / "inf.csv").read_text())))
    assert len(records) == len(res.terms) * 4
    assert tuple(records[0]) == CSV_FIELDS
    for rec, r in zip(records, rows):
        assert float(rec["beta"]) == r.beta
        assert float(rec["rrr"]) == math.exp(float(rec["beta"]))
        assert rec["category"] == r.category_label


def test_csv_text_deterministic(rng):
    _, rows = fitted(rng)
    assert export_csv_text(rows) == export_csv_text(list(rows))


def test_export_refuses_unconverged(rng, tmp_path):
    res, rows = fitted(rng, max_iter=1)
    assert not res.converged
    with pytest.raises(NotConverged):
        export(res, rows, "json", tmp_path / "x.json")
    export(res, rows, "json", tmp_path / "x.json", allow_unconverged=True)
    assert read_json_export(tmp_path / "x.json")[0].converged is False


def test_unknown_format(rng, tmp_path):
    res, rows = fitted(rng)
    with pytest.raises(ValueError):
        export(res, rows, "xml", tmp_path / "x")
