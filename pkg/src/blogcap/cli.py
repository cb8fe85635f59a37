"""Command-line pipeline: ``blogcap {delineate,centrality,classify,fit,netgen,report}``.

Exit codes: 0 success, 1 input or validation error, 2 numerical failure
(non-convergence, separation, singular Hessian).  Logs go to stderr.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import centrality, features, graph, mnlogit, netgen, report
from .errors import BlogcapError, InvalidParams, IoFailure, NumericalError

log = logging.getLogger("blogcap")

DEFAULTS = {
    "edges": None,
    "attributes": None,
    "out_dir": "blogcap-out",
    "seed_blog": None,
    "depth": 1,
    "damping": 0.85,
    "max_iterations": 200,
    "tolerance": 1e-12,
    "terms": "table2",
    "formats": "json,csv,txt",
    "allow_unconverged": False,
    "threads": 1,
    "symmetrize": False,
    "zscore": False,
    "locale_comma": False,
}


def load_config(path):
    """Flat JSON object; keys must be a subset of ``DEFAULTS``."""
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidParams("config must be a JSON object")
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise InvalidParams(f"unknown config key(s): {', '.join(unknown)}")
    return cfg


def _settings(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        out[key] = val if val is not None else cfg.get(key, default)
    return out


def _pagerank_params(s):
    return centrality.PageRankParams(float(s["damping"]), int(s["max_iterations"]),
                                     float(s["tolerance"]))


def _write(path, text):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _network(s):
    if not s["edges"]:
        raise InvalidParams("an edge list is required (--edges)")
    net = graph.load_edge_list(s["edges"])
    if s["seed_blog"] is not None:
        net = graph.delineate_snowball(net, s["seed_blog"], int(s["depth"]))
        log.info("delineated %d blogs around %s", len(net), s["seed_blog"])
    return net


def cmd_delineate(args):
    net = graph.load_edge_list(args.edges)
    sub = graph.delineate_snowball(net, args.seed, args.depth)
    lines = [",".join(graph.EDGE_HEADER)] + [f"{a},{b}" for a, b in sub.edges]
    _write(args.out, "\n".join(lines) + "\n")
    log.info("kept %d of %d blogs, %d edges", len(sub), len(net), len(sub.edges))
    return 0


def cmd_centrality(args):
    s = _settings(args)
    net = _network(s)
    if s["symmetrize"]:
        net = net.symmetrized()
    table = centrality.compute_all(net, _pagerank_params(s), threads=int(s["threads"]))
    _write(args.out, centrality.centrality_csv(table))
    reached, dist_sum = centrality.reachability(net, int(s["threads"]))
    mean_in = table[centrality.Measure.IN_DEGREE].values.mean()
    mean_dist = dist_sum.sum() / reached.sum() if reached.sum() else float("nan")
    print(
        f"blogs {len(net)}  edges {len(net.edges)}  mean in-degree {mean_in:.3f}  "
        f"mean reachable distance {mean_dist:.3f}",
        file=sys.stderr,
    )
    return 0


def cmd_classify(args):
    attrs = features.load_attributes(args.attributes)
    ids = list(attrs)
    if args.edges:
        net = graph.load_edge_list(args.edges)
        ids = [b for b in net.nodes if b in attrs]
    classes = features.classify_attractiveness({b: attrs[b].visits_6mo for b in ids})
    lines = ["blog_id,visits_6mo,class,label"]
    for b in ids:
        c = classes[b]
        lines.append(f"{b},{attrs[b].visits_6mo},{int(c)},{c.name}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_fit(args):
    s = _settings(args)
    if not s["attributes"]:
        raise InvalidParams("an attributes file is required (--attributes)")
    net = _network(s)
    if s["symmetrize"]:
        net = net.symmetrized()
    attrs = features.load_attributes(s["attributes"])
    terms = features.resolve_terms(s["terms"])
    table = centrality.compute_all(
        net, _pagerank_params(s), measures=features.required_measures(terms),
        threads=int(s["threads"]),
    )
    dm = features.build_design_matrix(table, attrs, terms, zscore=bool(s["zscore"]))
    epv = mnlogit.epv_check(dm)
    if not epv.warning:
        log.info(epv.message)

    formats = [f.strip() for f in str(s["formats"]).split(",") if f.strip()]
    bad = set(formats) - {"json", "csv", "txt", "design"}
    if bad:
        raise InvalidParams(f"unknown output format(s): {', '.join(sorted(bad))}")
    out = Path(s["out_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc

    fit = mnlogit.fit(dm)
    rows = mnlogit.inference(fit, allow_unconverged=True)
    exportable = fit.converged or s["allow_unconverged"]
    if "json" in formats and exportable:
        report.export(fit, rows, "json", out / "fit.json", allow_unconverged=True)
    if "csv" in formats and exportable:
        report.export(fit, rows, "csv", out / "inference.csv", allow_unconverged=True)
    if "txt" in formats:
        tbl = report.render_table(rows, locale_comma=bool(s["locale_comma"]), n_obs=fit.n_obs)
        _write(out / "table.txt", tbl.text())
    if "design" in formats:
        dm.write_csv(out / "design.csv")
    if not fit.converged:
        print(f"error: fit did not converge after {fit.iterations} iterations", file=sys.stderr)
        return 2
    log.info("converged in %d iterations, log-likelihood %.6f", fit.iterations,
             fit.log_likelihood)
    return 0


def cmd_netgen(args):
    params = netgen.GenParams(n=args.n, m=args.m, seed=args.seed)
    net, data = netgen.write_dataset(args.out_dir, params)
    print(
        f"wrote {len(net)} blogs, {len(net.edges)} edges, class counts "
        f"{data.class_counts().tolist()} to {args.out_dir}",
        file=sys.stderr,
    )
    return 0


def cmd_report(args):
    fit, rows = report.read_json_export(args.fit_json)
    if args.format == "csv":
        _write(args.out, report.export_csv_text(rows))
    else:
        tbl = report.render_table(rows, locale_comma=args.locale_comma, n_obs=fit.n_obs)
        _write(args.out, tbl.text())
    return 0


def _add_pagerank(p):
    p.add_argument("--damping", type=float, help="PageRank damping c (default 0.85)")
    p.add_argument("--max-iterations", dest="max_iterations", type=int,
                   help="PageRank iteration cap (default 200)")
    p.add_argument("--tolerance", type=float, help="PageRank max-abs-change stop (default 1e-12)")
    p.add_argument("--threads", type=int, help="worker threads for centrality (default 1)")
    p.add_argument("--symmetrize", action="store_true", default=None,
                   help="mirror every edge before computing measures")
    p.add_argument("--seed-blog", dest="seed_blog",
                   help="delineate the snowball network around this blog first")
    p.add_argument("--depth", type=int, help="snowball depth when --seed-blog is set (default 1)")
    p.add_argument("--config", help="flat JSON config; command-line flags take precedence")


def build_parser():
    parser = argparse.ArgumentParser(prog="blogcap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("delineate", help="cut the 1-degree egocentric network around a blog")
    p.add_argument("--edges", required=True, help="edge-list CSV (source_id,target_id)")
    p.add_argument("--seed", required=True, help="seed blog id")
    p.add_argument("--depth", type=int, default=1, help="hops over out-edges (default 1)")
    p.add_argument("--out", help="output edge list (default stdout)")
    p.set_defaults(func=cmd_delineate)

    p = sub.add_parser("centrality", help="in/out degree, closeness, betweenness, PageRank")
    p.add_argument("--edges", help="edge-list CSV")
    p.add_argument("--out", help="output CSV (default stdout)")
    _add_pagerank(p)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("classify", help="bin six-month visits into five quintile classes")
    p.add_argument("--attributes", required=True, help="attributes CSV")
    p.add_argument("--edges", help="restrict to the blogs of this network")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fit", help="run the full pipeline and fit the multinomial logit")
    p.add_argument("--edges", help="edge-list CSV")
    p.add_argument("--attributes", help="attributes CSV")
    p.add_argument("--out-dir", dest="out_dir", help="report directory (default blogcap-out)")
    p.add_argument("--terms", help="'table2' (default) or comma-separated term descriptors")
    p.add_argument("--formats", help="any of json,csv,txt,design (default json,csv,txt)")
    p.add_argument("--zscore", action="store_true", default=None,
                   help="standardize non-intercept columns")
    p.add_argument("--allow-unconverged", dest="allow_unconverged", action="store_true",
                   default=None, help="also write fit.json/inference.csv for an unconverged fit")
    p.add_argument("--locale-comma", dest="locale_comma", action="store_true", default=None,
                   help="print decimals with a comma in table.txt")
    _add_pagerank(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("netgen", help="write a synthetic preferential-attachment dataset")
    p.add_argument("--n", type=int, required=True, help="number of blogs")
    p.add_argument("--m", type=int, default=3, help="recommendations per new blog (default 3)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--out-dir", dest="out_dir", required=True,
                   help="directory for edges.csv, attributes.csv, truth.json")
    p.set_defaults(func=cmd_netgen)

    p = sub.add_parser("report", help="re-render an exported fit.json")
    p.add_argument("--fit-json", dest="fit_json", required=True, help="fit.json from 'fit'")
    p.add_argument("--format", choices=("txt", "csv"), default="txt")
    p.add_argument("--locale-comma", dest="locale_comma", action="store_true")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlogcapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
