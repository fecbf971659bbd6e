"""Command-line entry point: stats, featurize, mine, recommend, synth.

Exit codes: 0 success, 1 fatal processing error, 2 invalid input.  All JSON
outputs use stable key order and end with a trailing newline.  The default
seed is a fixed constant; the DMINE_SEED environment variable overrides it
when --seed is not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

DEFAULT_SEED = 20240


def _seed_default() -> int:
    env = os.environ.get("DMINE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"DMINE_SEED must be an integer, got {env!r}")
    return DEFAULT_SEED


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _load_corpus(directory: str):
    from dashmine.corpus import load_corpus_dir

    corpus, errors = load_corpus_dir(directory)
    for err in errors:
        print(f"invalid dashboard: {err}", file=sys.stderr)
    return corpus, errors


def cmd_stats(args) -> int:
    from dashmine.corpus import corpus_stats

    corpus, errors = _load_corpus(args.corpus_dir)
    if not corpus:
        print("no valid dashboards found", file=sys.stderr)
        return 2
    report = corpus_stats(corpus)
    out = Path(args.out)
    _write(out, report.to_json())

    data = report.to_dict()
    print(f"dashboards: {data['dashboards']}  views: {data['views']}")
    for section in ("view_count", "marks", "coordination"):
        print(f"\n{section}")
        entries = data[section]
        peak = max((e["count"] for e in entries.values()), default=1) or 1
        for key in sorted(entries, key=lambda k: (len(k), k)):
            count = entries[key]["count"]
            bar = "#" * max(1, round(30 * count / peak)) if count else ""
            print(f"  {key:>12} {count:>6}  {bar}")

    if args.figures:
        from dashmine.figures import render_stats_figures, write_stats_csv

        write_stats_csv(report, out.with_suffix(".csv"))
        paths = render_stats_figures(report, out.parent, stem=out.stem)
        for p in paths:
            print(f"wrote {p}")
    return 1 if errors and not corpus else 0


def cmd_featurize(args) -> int:
    from dashmine.mining import binarized_features

    corpus, errors = _load_corpus(args.corpus_dir)
    if not corpus:
        print("no valid dashboards found", file=sys.stderr)
        return 2
    from dashmine.corpus import normalize_to_grid
    from dashmine.features import extract_pairwise, single_view_features_px

    binz = binarized_features(corpus)
    records = []
    for dash in corpus:
        grid = normalize_to_grid(dash)
        for view in dash.views:
            raw = single_view_features_px(
                view, grid[view.id], view.layout_px, dash.canvas_px
            )
            records.append(
                {
                    "dashboard": dash.id,
                    "subject": view.id,
                    "kind": "single",
                    "values": {k: raw.values[k] for k in sorted(raw.values)},
                }
            )
        for va in dash.views:
            for vb in dash.views:
                if va.id == vb.id:
                    continue
                raw = extract_pairwise(
                    va, vb, grid[va.id], grid[vb.id], dash.coordinations
                )
                records.append(
                    {
                        "dashboard": dash.id,
                        "subject": f"{va.id}|{vb.id}",
                        "kind": "pair",
                        "values": {k: raw.values[k] for k in sorted(raw.values)},
                    }
                )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "features.jsonl", "w") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    thresholds = {k: binz.thresholds[k] for k in sorted(binz.thresholds)}
    _write(out_dir / "thresholds.json", json.dumps(thresholds, indent=2) + "\n")
    print(f"wrote {len(records)} records to {out_dir / 'features.jsonl'}")
    return 0


def cmd_mine(args) -> int:
    from dashmine.mining import evaluate_rules, mine_all, render_report, split_corpus

    corpus, errors = _load_corpus(args.corpus_dir)
    if not corpus:
        print("no valid dashboards found", file=sys.stderr)
        return 2
    if len(corpus) < 4:
        print("need at least 4 dashboards to mine", file=sys.stderr)
        return 2

    started = time.perf_counter()
    ruleset = mine_all(
        corpus,
        seed=args.seed,
        train_frac=args.split,
        top_rules=args.top_rules,
        max_conditions=args.max_conditions,
        threads=args.threads or 1,
    )
    _, test = split_corpus(corpus, train_frac=args.split, seed=args.seed)
    evaluation = evaluate_rules(ruleset, test)

    out = Path(args.out)
    _write(out, ruleset.to_json())
    report_path = out.with_suffix(".md") if args.report is None else Path(args.report)
    _write(report_path, render_report(ruleset, evaluation))
    if args.figures:
        from dashmine.figures import render_mining_figures

        for p in render_mining_figures(ruleset, out.parent, stem=out.stem):
            print(f"wrote {p}")
    elapsed = time.perf_counter() - started
    prov = ruleset.provenance
    print(
        f"mined {prov['n_rules']} rules from {prov['n_models']} models "
        f"in {elapsed:.1f}s (macro test accuracy "
        f"{evaluation['macro_accuracy']:.3f})"
    )
    print(f"wrote {out} and {report_path}")
    return 0


def cmd_recommend(args) -> int:
    from dashmine.corpus import parse_dashboard
    from dashmine.mining import RuleSet
    from dashmine.recommender import CapacityError, recommend
    from dashmine.wireframe import render_svg

    try:
        views_spec = parse_dashboard(
            Path(args.views).read_text(), require_layout=False
        )
    except Exception as exc:
        print(f"invalid views file: {exc}", file=sys.stderr)
        return 2
    views = list(views_spec.views)
    if not 2 <= len(views) <= 8:
        print("views file must list 2..8 views", file=sys.stderr)
        return 2
    try:
        ruleset = RuleSet.from_json(Path(args.rules).read_text())
    except Exception as exc:
        print(f"invalid rules file: {exc}", file=sys.stderr)
        return 2

    started = time.perf_counter()
    try:
        if args.exhaustive:
            from dashmine.oracle import exhaustive_recommend

            best = exhaustive_recommend(views, ruleset)
            candidates_json = [
                {
                    "assignment": {
                        vid: {
                            "gx": r[0], "gy": r[1], "gw": r[2], "gh": r[3],
                        }
                        for vid, r in sorted(best.assignment.items())
                    },
                    "coordinations": [
                        {"source": a, "target": b, "kind": kind}
                        for (a, b), kind in sorted(best.links.items())
                        if kind != "none"
                    ],
                    "full_cost": best.cost,
                    "obeyed_importance": best.obeyed,
                }
            ]
            candidates = None
        else:
            candidates = recommend(
                views,
                ruleset,
                k=args.k,
                prune_frac=args.prune_frac,
                prune_min=args.prune_min,
            )
            candidates_json = [c.to_dict() for c in candidates]
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"rules/registry mismatch: missing feature {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - started

    out = Path(args.out)
    payload = {
        "views": [v.id for v in views],
        "elapsed_seconds": round(elapsed, 3),
        "candidates": candidates_json,
    }
    _write(out, json.dumps(payload, indent=2) + "\n")
    print(f"recommended {len(candidates_json)} candidate(s) in {elapsed:.2f}s")
    print(f"wrote {out}")
    if args.render and candidates:
        for rank, cand in enumerate(candidates, 1):
            svg_path = out.with_name(f"{out.stem}_rank{rank}.svg")
            _write(svg_path, render_svg(cand, views))
            print(f"wrote {svg_path}")
    return 0


def cmd_synth(args) -> int:
    from dashmine.corpus import serialize_dashboard
    from dashmine.synth import (
        DEFAULT_PLANTED,
        PlantedRule,
        UnsatisfiableRules,
        generate_corpus,
        ledger_to_json,
    )

    if args.planted is None:
        planted = DEFAULT_PLANTED
    else:
        try:
            raw = json.loads(Path(args.planted).read_text())
            planted = tuple(PlantedRule.from_dict(r) for r in raw)
        except Exception as exc:
            print(f"invalid planted rules file: {exc}", file=sys.stderr)
            return 2
    try:
        corpus, ledger = generate_corpus(
            planted, count=args.count, noise=args.noise, seed=args.seed
        )
    except UnsatisfiableRules as exc:
        print(f"unsatisfiable planted rules: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for dash in corpus:
        _write(out_dir / f"{dash.id}.json", serialize_dashboard(dash))
    _write(out_dir / "ledger.json", ledger_to_json(ledger))
    print(f"wrote {len(corpus)} dashboards and ledger.json to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dashmine",
        description="Mine dashboard design rules and recommend arrangements "
        "and coordination for new view sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="corpus statistics report")
    p.add_argument("corpus_dir")
    p.add_argument("--out", default="stats.json")
    p.add_argument("--figures", action="store_true",
                   help="also write stats.csv and PNG charts")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("featurize", help="emit raw features as JSONL")
    p.add_argument("corpus_dir")
    p.add_argument("--out-dir", default="features")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("mine", help="mine decision rules from a corpus")
    p.add_argument("corpus_dir")
    p.add_argument("--out", default="rules.json")
    p.add_argument("--report", default=None, help="markdown report path")
    p.add_argument("--seed", type=int, default=_seed_default())
    p.add_argument("--split", type=float, default=0.75)
    p.add_argument("--top-rules", type=int, default=3)
    p.add_argument("--max-conditions", type=int, default=2, choices=(1, 2))
    p.add_argument("--threads", type=int, default=0, help="0 = single thread")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("recommend", help="recommend arrangement + coordination")
    p.add_argument("views", help="views JSON (layout/coordination optional)")
    p.add_argument("rules", help="rules JSON from `dashmine mine`")
    p.add_argument("--out", default="recs.json")
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--prune-frac", type=float, default=0.01)
    p.add_argument("--prune-min", type=int, default=10)
    p.add_argument("--render", action="store_true", help="write SVG wireframes")
    p.add_argument("--exhaustive", action="store_true",
                   help="reference search (<= 4 views)")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--planted", default=None,
                   help="planted rules JSON (default: built-in 10-rule set)")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=_seed_default())
    p.add_argument("--out-dir", default="synth_corpus")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # fatal processing error
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
