"""Command line entry point: ``causeway <command> [options]``.

Commands: ingest, cluster, discover, fit, sample, score, sweep, pipeline.
Options can also come from a JSON file given with ``--config``; explicit
flags win. Every command writes a manifest JSON next to its main output.
Exit status: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .citest import correlation_matrix
from .clustering import (
    LINKAGES,
    correlation_distance,
    cut_tree,
    diagnostics_curve,
    hierarchical_cluster,
    reduce_dataset,
    select_medoids,
)
from .dataset import DEFAULT_KEY_PATTERNS, ingest, read_tiers
from .evaluation import score_graphs, sweep, truth_pattern
from .exceptions import CausewayError, ExtensionError, ValidationError
from .export import FORMATS, export_graph, graph_from_json
from .graph import acyclic_orientation, random_consistent_extension
from .pc import PcConfig, pc
from .synth import GaussianBN, fit_gaussian_bn, moment_stats, sample

logger = logging.getLogger("causeway")


@dataclass
class RunConfig:
    alpha: float = 0.05
    soe: float = 0.0
    depth: int | None = None
    paper_strict: bool = False
    stable: bool = False
    k: int = 50
    linkage: str = "complete"
    seed: int = 0
    replicates: int = 10
    n: int = 50000
    alphas: list = field(default_factory=lambda: [0.001, 0.01, 0.05, 0.1])
    soes: list = field(default_factory=lambda: [0.0, 0.05, 0.1])
    format: str | None = None
    threads: int = 1

    def __post_init__(self):
        for a in [self.alpha, *self.alphas]:
            if not 0.0 < float(a) < 1.0:
                raise ValidationError(f"alpha must lie in (0, 1), got {a}")
        if self.soe < 0 or any(float(s) < 0 for s in self.soes):
            raise ValidationError("soe must be non-negative")
        if self.depth is not None and self.depth < 0:
            raise ValidationError("depth must be non-negative")
        if self.k < 1:
            raise ValidationError("k must be positive")
        if self.linkage not in LINKAGES:
            raise ValidationError(f"linkage must be one of {LINKAGES}")
        if self.replicates < 1 or self.n < 1:
            raise ValidationError("replicates and n must be positive")
        if self.format is not None and self.format not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}")
        if self.threads < 1:
            raise ValidationError("threads must be positive")

    def pc_config(self) -> PcConfig:
        return PcConfig(self.alpha, self.soe, self.depth, self.paper_strict, self.stable, self.threads)

    def digest(self) -> str:
        blob = json.dumps(dataclasses.asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"usage: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _depth(text: str):
    return None if text in ("none", "inf", "unbounded") else int(text)


def resolve_config(args) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text())
        unknown = set(loaded) - CONFIG_KEYS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    env_threads = os.environ.get("CAUSEWAY_THREADS")
    if env_threads and "threads" not in values:
        values["threads"] = int(env_threads)
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, command: str, cfg: RunConfig, inputs, outputs, seeds=()) -> None:
    doc = {
        "command": command,
        "version": __version__,
        "config": dataclasses.asdict(cfg),
        "config_hash": cfg.digest(),
        "seeds": list(seeds),
        "inputs": {str(p): _sha256(p) for p in inputs if p},
        "outputs": {str(p): _sha256(p) for p in outputs if p and Path(p).exists()},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _graph_format(path, cfg: RunConfig) -> str:
    if cfg.format:
        return cfg.format
    suffix = Path(path).suffix.lstrip(".").lower()
    return {"gv": "dot", "xml": "graphml"}.get(suffix, suffix if suffix in FORMATS else "json")


def _load(path, tiers_path=None):
    tiers = read_tiers(tiers_path) if tiers_path else None
    return ingest(path, tiers=tiers)


def _read_graph(path):
    return graph_from_json(Path(path).read_bytes())


def _manifest_path(args, output) -> Path:
    return Path(args.manifest) if args.manifest else Path(str(output) + ".manifest.json")


# -- commands ----------------------------------------------------------------

def cmd_ingest(args, cfg):
    patterns = args.key_pattern or DEFAULT_KEY_PATTERNS
    tiers = read_tiers(args.tiers) if args.tiers else None
    ds = ingest(args.input, key_patterns=patterns, standardize=not args.no_standardize, tiers=tiers)
    ds.to_csv(args.output)
    prov = Path(args.provenance or str(args.output) + ".provenance.json")
    prov.write_text(json.dumps(ds.provenance.to_dict(), indent=2) + "\n")
    write_manifest(_manifest_path(args, args.output), "ingest", cfg, [args.input, args.tiers],
                   [args.output, prov])
    print(f"kept {ds.n_cols} of {len(ds.provenance.columns)} columns, {ds.n_rows} rows")


def _cluster(ds, cfg):
    corr = correlation_matrix(ds)
    tree = hierarchical_cluster(correlation_distance(corr), cfg.linkage)
    k = min(cfg.k, ds.n_cols)
    cl = select_medoids(cut_tree(tree, k), corr)
    return corr, tree, cl


def cmd_cluster(args, cfg):
    ds = _load(args.input, args.tiers)
    corr, tree, cl = _cluster(ds, cfg)
    reduced = reduce_dataset(ds, cl)
    reduced.to_csv(args.output)
    outputs = [args.output]
    table = Path(args.table or str(args.output) + ".clusters.tsv")
    table.write_text(cl.to_table(ds.columns))
    medoids = Path(args.medoids or str(args.output) + ".medoids.txt")
    medoids.write_text(cl.medoid_list(ds.columns))
    outputs += [table, medoids]
    if args.diagnostics:
        rows = ["k\tmin_corr\tmax_corr\tmean_corr\tmin_size\tmax_size\tmean_size"]
        for dg in diagnostics_curve(tree, corr, range(1, ds.n_cols + 1)):
            rows.append(f"{dg.k}\t{dg.min_correlation!r}\t{dg.max_correlation!r}\t"
                        f"{dg.mean_correlation!r}\t{dg.min_size}\t{dg.max_size}\t{dg.mean_size!r}")
        Path(args.diagnostics).write_text("\n".join(rows) + "\n")
        outputs.append(args.diagnostics)
    write_manifest(_manifest_path(args, args.output), "cluster", cfg, [args.input, args.tiers], outputs)
    print(f"{ds.n_cols} features -> {cl.n_clusters} clusters")


def _discover(ds, cfg):
    return pc(correlation_matrix(ds), cfg.pc_config(), ds.knowledge())


def cmd_discover(args, cfg):
    ds = _load(args.input, args.tiers)
    result = _discover(ds, cfg)
    Path(args.output).write_bytes(export_graph(result.graph, _graph_format(args.output, cfg)))
    log = Path(args.log or str(args.output) + ".log.tsv")
    log.write_text(result.log.to_text(ds.columns))
    write_manifest(_manifest_path(args, args.output), "discover", cfg, [args.input, args.tiers],
                   [args.output, log])
    print(f"{result.graph.n_nodes} nodes, {result.graph.n_edges} edges "
          f"({len(result.graph.directed_edges())} directed)")


def _generating_dag(g, seed):
    try:
        return random_consistent_extension(g, seed)
    except ExtensionError:
        logger.warning("learned pattern has no consistent extension; orienting along a topological order")
        return acyclic_orientation(g)


def cmd_fit(args, cfg):
    ds = _load(args.input)
    g = _read_graph(args.graph)
    if list(g.labels) != list(ds.columns):
        raise ValidationError("graph nodes do not match data columns")
    dag = g if g.is_fully_directed() else _generating_dag(g, cfg.seed)
    bn = fit_gaussian_bn(dag, ds)
    Path(args.output).write_text(bn.to_text())
    write_manifest(_manifest_path(args, args.output), "fit", cfg, [args.input, args.graph],
                   [args.output], [cfg.seed])


def cmd_sample(args, cfg):
    bn = GaussianBN.from_text(Path(args.bn).read_text())
    sample(bn, cfg.n, cfg.seed).to_csv(args.output)
    write_manifest(_manifest_path(args, args.output), "sample", cfg, [args.bn], [args.output], [cfg.seed])


def cmd_score(args, cfg):
    report = score_graphs(_read_graph(args.learned), _read_graph(args.truth))
    text = json.dumps(report.as_dict(), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
        write_manifest(_manifest_path(args, args.output), "score", cfg, [args.learned, args.truth],
                       [args.output])
    else:
        sys.stdout.write(text)


def _sweep(bn, truth, knowledge, cfg):
    seeds = [cfg.seed + r for r in range(cfg.replicates)]
    result = sweep(bn, truth, cfg.replicates, cfg.n, cfg.alphas, cfg.soes, knowledge, seeds,
                   cfg.depth, cfg.paper_strict)
    return result, seeds


def cmd_sweep(args, cfg):
    from .pc import PriorKnowledge

    bn = GaussianBN.from_text(Path(args.bn).read_text())
    tiers = read_tiers(args.tiers) if args.tiers else {}
    knowledge = PriorKnowledge.from_names({k: v for k, v in tiers.items() if k in bn.labels}, bn.labels)
    if args.truth:
        truth = _read_graph(args.truth)
    else:
        truth = truth_pattern(bn, knowledge, raw=args.raw_truth)
    result, seeds = _sweep(bn, truth, knowledge, cfg)
    Path(args.output).write_text(result.to_tsv())
    write_manifest(_manifest_path(args, args.output), "sweep", cfg, [args.bn, args.truth, args.tiers],
                   [args.output], seeds)


def cmd_pipeline(args, cfg):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmt = cfg.format or "dot"
    ds = _load(args.input, args.tiers)
    corr, tree, cl = _cluster(ds, cfg)
    reduced = reduce_dataset(ds, cl)
    outputs = [out / "reduced.csv", out / "clusters.tsv", out / "medoids.txt",
               out / f"graph.{fmt}", out / "graph.json", out / "orientation_log.tsv",
               out / "normality.tsv"]
    reduced.to_csv(outputs[0])
    outputs[1].write_text(cl.to_table(ds.columns))
    outputs[2].write_text(cl.medoid_list(ds.columns))
    result = _discover(reduced, cfg)
    outputs[3].write_bytes(export_graph(result.graph, fmt))
    outputs[4].write_bytes(export_graph(result.graph, "json"))
    outputs[5].write_text(result.log.to_text(reduced.columns))
    norm = moment_stats(reduced)
    outputs[6].write_text("column\tskewness\texcess_kurtosis\twithin_range\n" + "".join(
        f"{c}\t{s!r}\t{k!r}\t{bool(w)}\n" for c, s, k, w in
        zip(norm.columns, norm.skewness, norm.kurtosis, norm.within_range)))
    seeds = []
    if args.synthetic:
        dag = _generating_dag(result.graph, cfg.seed)
        bn = fit_gaussian_bn(dag, reduced)
        knowledge = reduced.knowledge()
        result_sweep, seeds = _sweep(bn, truth_pattern(bn, knowledge), knowledge, cfg)
        (out / "generating_bn.txt").write_text(bn.to_text())
        (out / "sweep.tsv").write_text(result_sweep.to_tsv())
        outputs += [out / "generating_bn.txt", out / "sweep.tsv"]
    write_manifest(Path(args.manifest) if args.manifest else out / "manifest.json", "pipeline", cfg,
                   [args.input, args.tiers], outputs, [cfg.seed, *seeds])
    print(f"{ds.n_cols} features -> {reduced.n_cols} medoids -> {result.graph.n_edges} edges; "
          f"{norm.fraction_within_range:.0%} of medoids within normality range")


# -- parser -------------------------------------------------------------------

def _add_pc_flags(p):
    p.add_argument("--alpha", type=float)
    p.add_argument("--soe", type=float)
    p.add_argument("--depth", type=_depth)
    p.add_argument("--paper-strict", dest="paper_strict", action="store_const", const=True)
    p.add_argument("--stable", action="store_const", const=True,
                   help="level-parallel skeleton search")


def _add_sweep_flags(p):
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--soes", type=_floats)
    p.add_argument("--replicates", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="causeway", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run options")
    common.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")
    common.add_argument("--threads", type=int)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common], help="clean and standardize a delimited file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--tiers")
    p.add_argument("--key-pattern", action="append", help="regex marking identifier columns")
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--provenance")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cluster", parents=[common], help="reduce features to cluster medoids")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--linkage", choices=LINKAGES)
    p.add_argument("--tiers")
    p.add_argument("--table")
    p.add_argument("--medoids")
    p.add_argument("--diagnostics", help="write per-k diagnostics TSV")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("discover", parents=[common], help="run PC")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--tiers")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--log")
    _add_pc_flags(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("fit", parents=[common], help="fit a Gaussian BN to a graph")
    p.add_argument("input")
    p.add_argument("--graph", required=True, help="graph JSON; undirected edges are oriented")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", parents=[common], help="sample data from a Gaussian BN")
    p.add_argument("bn")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("score", parents=[common], help="precision/recall of a learned graph")
    p.add_argument("learned")
    p.add_argument("truth")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", parents=[common], help="evaluate PC over (alpha, soe) grids")
    p.add_argument("bn")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--truth", help="graph JSON (default: maximal pattern of the BN's DAG)")
    p.add_argument("--raw-truth", action="store_true", help="score against the raw DAG")
    p.add_argument("--tiers")
    p.add_argument("--depth", type=_depth)
    p.add_argument("--paper-strict", dest="paper_strict", action="store_const", const=True)
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline", parents=[common], help="ingest, cluster, discover, export")
    p.add_argument("input")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--tiers")
    p.add_argument("--k", type=int)
    p.add_argument("--linkage", choices=LINKAGES)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--synthetic", action="store_true", help="also fit, sample and sweep")
    _add_pc_flags(p)
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = resolve_config(args)
        args.func(args, cfg)
    except (ValidationError, ValueError, TypeError) as exc:
        print(f"causeway: error: {exc}", file=sys.stderr)
        return 1
    except (CausewayError, OSError, KeyError) as exc:
        print(f"causeway: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
