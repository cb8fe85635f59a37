"""Table-style inference reports and machine-readable exports."""

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import IncompleteRows, IoFailure, NotConverged
from .mnlogit import InferenceRow, ModelFit, category_label, parse_category

FOOTNOTE = "***p<0.001, **p<0.01, *p<0.05"


def _num(x, comma):
    s = f"{x:.2f}"
    if s == "-0.00":
        s = "0.00"
    return s.replace(".", ",") if comma else s


def format_cell(beta, rrr, stars, comma=False):
    """``0.19(***) 1.21``: beta with its stars, then the relative risk ratio."""
    b = _num(beta, comma)
    if stars:
        b += f"({stars})"
    return f"{b} {_num(rrr, comma)}"


@dataclass(frozen=True)
class ReportTable:
    categories: tuple
    rows: tuple  # (term, (cell text, ...)) per term
    footnote: str
    n_obs: int = 0

    @property
    def cell_count(self):
        return sum(len(cells) for _, cells in self.rows)

    def text(self):
        first = f"Variables (n={self.n_obs})" if self.n_obs else "Variables"
        header = [first] + [category_label(c) for c in self.categories]
        body = [[term, *cells] for term, cells in self.rows]
        widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
        fmt = lambda r: "  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()  # noqa: E731
        rule = "-" * len(fmt(header))
        lines = [fmt(header), rule] + [fmt(r) for r in body] + [rule, self.footnote]
        return "\n".join(lines) + "\n"


def render_table(rows, locale_comma=False, n_obs=0):
    """Arrange inference rows as terms x non-baseline categories.

    Numbers are only rounded here, when printed.
    """
    terms = []
    categories = []
    cells = {}
    for r in rows:
        if r.term not in terms:
            terms.append(r.term)
        if r.category not in categories:
            categories.append(r.category)
        key = (r.term, r.category)
        if key in cells:
            raise IncompleteRows(f"duplicate row for {r.term} / {category_label(r.category)}")
        cells[key] = r
    categories.sort()
    missing = [(t, c) for t in terms for c in categories if (t, c) not in cells]
    if missing:
        t, c = missing[0]
        raise IncompleteRows(f"no row for {t} / {category_label(c)} ({len(missing)} missing)")
    table_rows = tuple(
        (t, tuple(format_cell(cells[t, c].beta, cells[t, c].rrr, cells[t, c].stars, locale_comma)
                  for c in categories))
        for t in terms
    )
    footnote = FOOTNOTE.replace(".", ",") if locale_comma else FOOTNOTE
    return ReportTable(tuple(categories), table_rows, footnote, n_obs)


def _row_dict(r):
    d = asdict(r)
    d["category"] = category_label(r.category)
    return d


CSV_FIELDS = ("term", "category", "beta", "rrr", "se", "z", "p_value", "stars")


def export_json_text(fit, rows):
    doc = fit.to_dict()
    doc["inference"] = [_row_dict(r) for r in rows]
    return json.dumps(doc, indent=2) + "\n"


def export_csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        d = _row_dict(r)
        w.writerow([repr(d[k]) if isinstance(d[k], float) else d[k] for k in CSV_FIELDS])
    return buf.getvalue()


def export(fit, rows, fmt, path, allow_unconverged=False):
    """Write ``fit`` and its inference rows as ``json`` or ``csv``."""
    if not fit.converged and not allow_unconverged:
        raise NotConverged("refusing to export an unconverged fit")
    if fmt == "json":
        text = export_json_text(fit, rows)
    elif fmt == "csv":
        text = export_csv_text(rows)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_json_export(path):
    """Inverse of the JSON export: ``(ModelFit, [InferenceRow, ...])``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    fit = ModelFit.from_dict(doc)
    rows = []
    for d in doc.get("inference", []):
        d = dict(d)
        d["category"] = parse_category(d["category"])
        rows.append(InferenceRow(**d))
    return fit, rows
