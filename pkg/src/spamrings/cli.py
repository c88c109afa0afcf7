"""Command-line front end: ingest, detect, sweep, synth, eval.

Flags mirror the JSON config keys one-to-one; a flag given on the command
line overrides the config file, which overrides the defaults. Exit status
is nonzero exactly when a stage failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .clustering import TrainConfig
from .pipeline import (
    PipelineConfig,
    StageError,
    derive_train_seed,
    detect,
    load_table,
    write_detect_report,
)
from .reviews import write_reviews
from .scoring import cluster_sweep, group_precision, rank_groups, size_distribution
from .synth import PlantedGroupConfig, SynthConfig, generate, write_ground_truth
from .indicators import group_from_table


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="top-level seed (stage seeds derive from it)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", choices=("csv", "tsv"), help="input delimiter family")


def _add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="review metadata file")
    parser.add_argument("--header", action="store_true", default=None, help="skip a header row")


def _add_detect_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--min-co-review", type=int, help="edge threshold on shared reviewers")
    parser.add_argument("--weighting", choices=("binary", "co_review_count"), help="edge weight mode")
    parser.add_argument("--dump-graph", action="store_true", default=None, help="write edge/node dump")
    parser.add_argument("--n-clusters", type=int, help="cluster count k")
    parser.add_argument("--hidden-width", type=int)
    parser.add_argument("--learning-rate", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--dropout-rate", type=float)
    parser.add_argument("--collapse-weight", type=float)
    parser.add_argument("--assign-threshold", type=float, help="extra-membership probability cutoff")
    parser.add_argument("--min-support", type=int, help="cluster nodes a member must appear in")
    parser.add_argument("--size-floor", type=int, help="smallest headline group size")
    parser.add_argument("--burst-tau-days", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spamrings",
        description="Detect collusive fake-reviewer groups in review metadata.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, validate, and dedupe a review file")
    _add_common(p)
    _add_input(p)

    p = sub.add_parser("detect", help="run the full detection pipeline")
    _add_common(p)
    _add_input(p)
    _add_detect_options(p)

    p = sub.add_parser("sweep", help="cluster-count sweep on a labeled dataset")
    _add_common(p)
    _add_input(p)
    _add_detect_options(p)
    p.add_argument("--k-list", required=True, help="comma-separated cluster counts, e.g. 10,20,40")

    p = sub.add_parser("synth", help="generate a synthetic dataset with planted groups")
    _add_common(p)

    p = sub.add_parser("eval", help="precision report for a ranked-groups file")
    _add_common(p)
    _add_input(p)
    p.add_argument("--ranked", required=True, help="ranked_groups.jsonl from a detect run")
    p.add_argument("--size-floor", type=int)

    return parser


def _load_config_dict(args) -> dict:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return {}


def _pipeline_config(args) -> PipelineConfig:
    data = _load_config_dict(args)
    config = PipelineConfig.from_dict(data)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    if args.format is not None:
        config.format = args.format
    if getattr(args, "input", None) is not None:
        config.input = args.input
    if getattr(args, "header", None) is not None:
        config.has_header = args.header
    overrides = {
        "min_co_review": ("graph", "min_co_review"),
        "weighting": ("graph", "weighting"),
        "dump_graph": ("graph", "dump"),
        "n_clusters": ("train", "n_clusters"),
        "hidden_width": ("train", "hidden_width"),
        "learning_rate": ("train", "learning_rate"),
        "epochs": ("train", "epochs"),
        "dropout_rate": ("train", "dropout_rate"),
        "collapse_weight": ("train", "collapse_weight"),
        "assign_threshold": ("train", "assign_threshold"),
        "min_support": ("group", "min_support"),
        "size_floor": ("rank", "size_floor"),
        "burst_tau_days": (None, "burst_tau_days"),
    }
    for arg_name, (section, key) in overrides.items():
        value = getattr(args, arg_name, None)
        if value is None:
            continue
        target = config if section is None else getattr(config, section)
        setattr(target, key, value)
    if not config.input:
        raise StageError("config", ValueError("no input file given (--input or config)"))
    return config


def _out_dir(config: PipelineConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args) -> int:
    config = _pipeline_config(args)
    raw, errors, table = load_table(config)
    out = _out_dir(config)
    write_reviews(table, out / "reviews_clean.csv")
    counts = table.label_counts()
    lines = [
        f"rows_parsed: {len(raw)}",
        f"row_errors: {len(errors)}",
        f"reviews_after_dedupe: {len(table)}",
        f"duplicates_removed: {len(raw) - len(table)}",
        f"reviewers: {len(table.by_reviewer)}",
        f"products: {len(table.by_product)}",
    ]
    if table.has_labels():
        lines.append(
            f"labels: fake={counts['fake']} genuine={counts['genuine']} unknown={counts['unknown']}"
        )
    else:
        lines.append("labels: none; evaluation disabled")
    for err in errors[:20]:
        lines.append(f"row_error line {err.line}: {err.message}")
    text = "\n".join(lines) + "\n"
    (out / "ingest_summary.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_detect(args) -> int:
    config = _pipeline_config(args)
    _, _, table = load_table(config)
    result = detect(table, config)
    paths = write_detect_report(result, config.out)
    top = result.ranking.headline[0] if result.ranking.headline else None
    sys.stdout.write(
        f"groups: {len(result.scored)} headline: {len(result.ranking.headline)}\n"
    )
    if top is not None:
        prec = "n/a" if top.precision is None else f"{top.precision:.4f}"
        sys.stdout.write(f"top group: size {top.size} score {top.anomaly_score:.4f} precision {prec}\n")
    sys.stdout.write(f"report: {paths['summary']}\n")
    return 0


def cmd_sweep(args) -> int:
    config = _pipeline_config(args)
    try:
        k_list = [int(k) for k in args.k_list.split(",") if k.strip()]
    except ValueError as err:
        raise StageError("sweep", ValueError(f"bad --k-list: {err}")) from err
    if not k_list:
        raise StageError("sweep", ValueError("empty --k-list"))
    _, _, table = load_table(config)
    if not table.has_labels():
        raise StageError("sweep", ValueError("dataset has no labels; sweep needs them"))
    train_cfg = dataclasses.replace(config.train, seed=derive_train_seed(config.seed))
    try:
        points = cluster_sweep(
            table,
            k_list,
            train_cfg,
            min_co_review=config.graph.min_co_review,
            weighting=config.graph.weighting,
            min_support=config.group.min_support,
        )
    except Exception as err:
        raise StageError("sweep", err) from err
    out = _out_dir(config)
    lines = ["k\tmean_top10_precision\tn_groups\tpartial"]
    for p in points:
        mean = "n/a" if p.mean_top_precision is None else f"{p.mean_top_precision:.4f}"
        lines.append(f"{p.n_clusters}\t{mean}\t{p.n_groups}\t{int(p.partial)}")
    text = "\n".join(lines) + "\n"
    (out / "sweep.tsv").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def _synth_config(args) -> SynthConfig:
    data = _load_config_dict(args).get("synth", {})
    planted = data.pop("planted", None)
    kwargs = dict(data)
    if planted is not None:
        kwargs["planted"] = [PlantedGroupConfig(**p) for p in planted]
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if "product_mean_range" in kwargs:
        kwargs["product_mean_range"] = tuple(kwargs["product_mean_range"])
    return SynthConfig(**kwargs)


def cmd_synth(args) -> int:
    try:
        config = _synth_config(args)
    except (TypeError, ValueError) as err:
        raise StageError("synth", err if isinstance(err, ValueError) else ValueError(str(err))) from err
    table, truth = generate(config)
    out = Path(args.out if args.out else "out")
    out.mkdir(parents=True, exist_ok=True)
    write_reviews(table, out / "reviews.csv")
    write_ground_truth(out / "ground_truth.tsv", truth)
    sys.stdout.write(
        f"reviews: {len(table)} reviewers: {len(table.by_reviewer)} "
        f"planted_groups: {len(truth)}\n"
    )
    return 0


def cmd_eval(args) -> int:
    config = _pipeline_config(args)
    _, _, table = load_table(config)
    if not table.has_labels():
        raise StageError("eval", ValueError("dataset has no labels; evaluation needs them"))
    records = []
    try:
        with open(args.ranked, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    records.append(json.loads(line))
    except OSError as err:
        raise StageError("eval", err) from err
    if not records:
        raise StageError("eval", ValueError(f"no records in {args.ranked!r}"))
    floor = args.size_floor if args.size_floor is not None else config.rank.size_floor
    rows = []
    for rec in records:
        group = group_from_table(rec["members"], table, source_cluster=rec.get("cluster", -1))
        precision = group_precision(group, table)
        rows.append((rec["rank"], rec["group_id"], group.size, precision))
    headline = [r for r in rows if r[2] >= floor]
    out = _out_dir(config)
    lines = [f"groups: {len(rows)}", f"headline groups (size >= {floor}): {len(headline)}", ""]
    lines.append("top group")
    lines.append("Group Size\tPrecision")
    if headline:
        top = headline[0]
        lines.append(f"{top[2]}\t{'n/a' if top[3] is None else f'{top[3]:.4f}'}")
    else:
        lines.append("none\tn/a")
    lines.append("")
    lines.append("rank\tgroup_id\tsize\tprecision")
    for rank, gid, size, precision in rows:
        lines.append(f"{rank}\t{gid}\t{size}\t{'n/a' if precision is None else f'{precision:.4f}'}")
    lines.append("")
    lines.append("group size distribution")
    lines.append("bucket\tcount")
    for start, count in size_distribution(r[2] for r in rows).items():
        lines.append(f"{start}-{start + 9}\t{count}")
    text = "\n".join(lines) + "\n"
    (out / "eval_summary.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "detect": cmd_detect,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except StageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # surface unexpected failures with the command name
        print(f"error: {args.command}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
