"""Command-line pipeline: ingest, preprocess, estimate, cluster, growth, permute, compare.

Runs are driven by an INI-style config file (flat ``key = value`` lines
under ``[corpus]``, ``[preprocess]``, ``[lda]``, ``[hdp]``, ``[estimator]``,
``[experiment]``, ``[run]``) and any key can be overridden on the command
line with ``--section.key=value``.  One ``master_seed`` reproduces a whole
experiment: unless set explicitly, the HDP seed is master_seed + 1, the LDA
seed is master_seed + 2, and permutation seeds are master_seed + 100 + i.
Every subcommand writes a ``run_manifest.json`` with the config snapshot,
stage durations, and SHA-256 digests of the emitted files.

Exit codes: 0 success, 1 usage/input error, 2 internal contract violation.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .corpus import Corpus, load_corpus
from .experiments import compare_clusterings, growth_experiment, permutation_experiment
from .hdp import GibbsHdp, recursive_estimate
from .lda import GibbsLda
from .preprocess import Preprocessor, load_lexicon, load_stopwords
from .validation import ContractViolationError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONTRACT = 2

SEED_OFFSET_HDP = 1
SEED_OFFSET_LDA = 2
SEED_OFFSET_PERMUTE = 100

TOP_KEYWORDS = 10

SUBCOMMANDS = ("ingest", "preprocess", "estimate", "cluster", "growth", "permute", "compare")


@dataclass
class CorpusSection:
    path: str = ""
    format: str = "plain_text"
    id_prefix: str = "Q"


@dataclass
class PreprocessSection:
    tag_lexicon_path: str = ""
    stoplist_path: str = ""
    tagging_enabled: bool = True
    tag_multiplicity: str = "once"


@dataclass
class LdaSection:
    n_topics: int = 0  # 0 = take the estimator's HDP-2 value
    alpha: float = 0.0  # 0 = default 1/K
    eta: float = 0.01
    iterations: int = 1000
    burn_in: int = 500
    seed: int = -1  # -1 = derive from master_seed


@dataclass
class HdpSection:
    gamma: float = 1.0
    alpha0: float = 1.0
    beta_word: float = 0.01
    k_max: int = 0  # 0 = min(150, n_documents)
    iterations: int = 1000
    burn_in: int = 500
    seed: int = -1


@dataclass
class EstimatorSection:
    depth: int = 2
    mode: str = "rerun"
    min_fraction: float = 0.02


@dataclass
class ExperimentSection:
    step: int = 100
    n_perms: int = 5
    seeds: tuple[int, ...] = ()


@dataclass
class RunConfig:
    corpus: CorpusSection = field(default_factory=CorpusSection)
    preprocess: PreprocessSection = field(default_factory=PreprocessSection)
    lda: LdaSection = field(default_factory=LdaSection)
    hdp: HdpSection = field(default_factory=HdpSection)
    estimator: EstimatorSection = field(default_factory=EstimatorSection)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    output_dir: str = "runs"
    master_seed: int = 0

    def lda_seed(self) -> int:
        return self.lda.seed if self.lda.seed >= 0 else self.master_seed + SEED_OFFSET_LDA

    def hdp_seed(self) -> int:
        return self.hdp.seed if self.hdp.seed >= 0 else self.master_seed + SEED_OFFSET_HDP

    def permutation_seeds(self) -> list[int]:
        if self.experiment.seeds:
            return list(self.experiment.seeds)
        base = self.master_seed + SEED_OFFSET_PERMUTE
        return [base + i for i in range(self.experiment.n_perms)]


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(value: str, target):
    if isinstance(target, bool):
        lowered = value.strip().lower()
        if lowered in _BOOL_TRUE:
            return True
        if lowered in _BOOL_FALSE:
            return False
        raise ValueError(f"expected a boolean, got {value!r}")
    if isinstance(target, int):
        return int(value)
    if isinstance(target, float):
        return float(value)
    if isinstance(target, tuple):
        return tuple(int(item.strip()) for item in value.split(",") if item.strip())
    return value


def _apply_item(config: RunConfig, section: str, key: str, value: str):
    if section == "run":
        if not hasattr(config, key):
            raise ValueError(f"unknown config key run.{key}")
        setattr(config, key, _coerce(value, getattr(config, key)))
        return
    if not hasattr(config, section):
        raise ValueError(f"unknown config section [{section}]")
    target = getattr(config, section)
    if not hasattr(target, key):
        raise ValueError(f"unknown config key {section}.{key}")
    setattr(target, key, _coerce(value, getattr(target, key)))


def load_run_config(path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as handle:
        parser.read_file(handle)
    config = RunConfig()
    for section in parser.sections():
        for key, value in parser[section].items():
            _apply_item(config, section, key, value)
    return config


def apply_overrides(config: RunConfig, overrides) -> RunConfig:
    """Apply ``--section.key=value`` strings to the config, in order."""
    for item in overrides:
        if not item.startswith("--") or "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValueError(f"bad override {item!r}; expected --section.key=value")
        dotted, value = item[2:].split("=", 1)
        section, key = dotted.split(".", 1)
        _apply_item(config, section, key, value)
    return config


def write_csv(path: Path, header, rows, comments=()):
    """UTF-8 CSV with '#' metadata comment lines before the header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for comment in comments:
            handle.write(f"# {comment}\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path: Path):
    """Rows of a CSV emitted by this tool, skipping comment lines."""
    with open(path, newline="", encoding="utf-8") as handle:
        filtered = (line for line in handle if not line.startswith("#"))
        rows = list(csv.reader(filtered))
    if not rows:
        raise ValueError(f"{path}: empty file")
    return rows[0], rows[1:]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Run:
    """Collects stage timings and output files for the manifest."""

    def __init__(self, config: RunConfig, out_dir: Path):
        self.config = config
        self.out_dir = out_dir
        self.durations: dict[str, float] = {}
        self.outputs: list[Path] = []

    def stage(self, name):
        run = self

        class _Timer:
            def __enter__(self):
                self.start = time.perf_counter()

            def __exit__(self, *exc):
                run.durations[name] = run.durations.get(name, 0.0) + (
                    time.perf_counter() - self.start
                )
                return False

        return _Timer()

    def emit(self, name, header, rows, comments=()):
        path = self.out_dir / name
        write_csv(path, header, rows, comments=comments)
        self.outputs.append(path)
        return path

    def write_manifest(self):
        manifest = {
            "toolkit_version": __version__,
            "config": asdict(self.config),
            "durations_seconds": {k: round(v, 6) for k, v in self.durations.items()},
            "outputs": [
                {"file": p.name, "sha256": _sha256(p)} for p in self.outputs
            ],
        }
        path = self.out_dir / "run_manifest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _load_corpus(config: RunConfig) -> Corpus:
    if not config.corpus.path:
        raise ValueError("corpus.path is not configured")
    return load_corpus(
        config.corpus.path,
        format=config.corpus.format,
        id_prefix=config.corpus.id_prefix,
    )


def _preprocessor(config: RunConfig) -> Preprocessor:
    lexicon = (
        load_lexicon(config.preprocess.tag_lexicon_path)
        if config.preprocess.tag_lexicon_path
        else None
    )
    stoplist = (
        load_stopwords(config.preprocess.stoplist_path)
        if config.preprocess.stoplist_path
        else None
    )
    return Preprocessor(
        lexicon=lexicon,
        stoplist=stoplist,
        tagging_enabled=config.preprocess.tagging_enabled,
        tag_multiplicity=config.preprocess.tag_multiplicity,
    )


def _lda_proto(config: RunConfig, n_topics: int = 1) -> GibbsLda:
    return GibbsLda(
        n_topics=n_topics,
        alpha=config.lda.alpha if config.lda.alpha > 0 else None,
        eta=config.lda.eta,
        iterations=config.lda.iterations,
        burn_in=config.lda.burn_in,
        seed=config.lda_seed(),
    )


def _hdp_proto(config: RunConfig) -> GibbsHdp:
    return GibbsHdp(
        gamma=config.hdp.gamma,
        alpha0=config.hdp.alpha0,
        beta_word=config.hdp.beta_word,
        k_max=config.hdp.k_max if config.hdp.k_max > 0 else None,
        iterations=config.hdp.iterations,
        burn_in=config.hdp.burn_in,
        seed=config.hdp_seed(),
    )


def _version_comment() -> str:
    return f"qtopics v{__version__}"


def cmd_ingest(config: RunConfig, run: _Run):
    with run.stage("ingest"):
        corpus = _load_corpus(config)
        run.emit(
            "corpus.csv",
            ["id", "text"],
            [(doc.id, doc.raw_text) for doc in corpus],
            comments=[_version_comment()],
        )


def cmd_preprocess(config: RunConfig, run: _Run):
    with run.stage("ingest"):
        corpus = _load_corpus(config)
    with run.stage("preprocess"):
        pre = _preprocessor(config)
        pre.fit_transform(corpus)
        run.emit(
            "tokens.csv",
            ["id", "tokens", "tags"],
            [
                (doc.id, " ".join(doc.tokens), ";".join(sorted(doc.applied_tags)))
                for doc in pre.documents_
            ],
            comments=[_version_comment()],
        )
        run.emit(
            "vocab.csv",
            ["index", "term"],
            list(enumerate(pre.vocabulary_.terms)),
            comments=[_version_comment()],
        )


def _estimate_chain(config: RunConfig, bow):
    return recursive_estimate(
        bow,
        _hdp_proto(config),
        depth=config.estimator.depth,
        mode=config.estimator.mode,
    )


def cmd_estimate(config: RunConfig, run: _Run):
    with run.stage("ingest"):
        corpus = _load_corpus(config)
    with run.stage("preprocess"):
        bow = _preprocessor(config).fit_transform(corpus)
    with run.stage("estimate"):
        chain = _estimate_chain(config, bow)
        run.emit(
            "chain.csv",
            ["level", "threshold", "estimate", "mode"],
            chain.rows(),
            comments=[_version_comment(), f"seed={config.hdp_seed()}"],
        )


def cmd_cluster(config: RunConfig, run: _Run):
    with run.stage("ingest"):
        corpus = _load_corpus(config)
    with run.stage("preprocess"):
        pre = _preprocessor(config)
        bow = pre.fit_transform(corpus)
    with run.stage("estimate"):
        if config.lda.n_topics > 0:
            n_topics = config.lda.n_topics
            chain = None
        else:
            chain = _estimate_chain(config, bow)
            n_topics = chain.hdp2 if len(chain.levels) > 1 else chain.hdp1
            run.emit(
                "chain.csv",
                ["level", "threshold", "estimate", "mode"],
                chain.rows(),
                comments=[_version_comment(), f"seed={config.hdp_seed()}"],
            )
    with run.stage("cluster"):
        model = _lda_proto(config, n_topics=n_topics).fit(bow)
        assignment = model.doc_topic_assignment()
        seed_comment = f"seed={config.lda_seed()}"
        run.emit(
            "assignments.csv",
            ["id", "topic", "top_topic_prob"],
            [
                (doc_id, assignment[doc_id], repr(float(model.doc_topic_[d, assignment[doc_id]])))
                for d, doc_id in enumerate(model.doc_ids_)
            ],
            comments=[_version_comment(), seed_comment],
        )
        keyword_rows = []
        for topic in range(model.n_topics):
            for rank, term in enumerate(model.top_keywords(topic, TOP_KEYWORDS), start=1):
                keyword_rows.append(
                    (topic, rank, term, repr(float(model.topic_word_[topic, model.vocabulary_.index(term)])))
                )
        run.emit(
            "keywords.csv",
            ["topic", "rank", "term", "probability"],
            keyword_rows,
            comments=[_version_comment(), seed_comment],
        )
        run.emit(
            "topic_word.csv",
            ["topic", "term", "probability"],
            [
                (topic, model.vocabulary_.term(w), repr(float(model.topic_word_[topic, w])))
                for topic in range(model.n_topics)
                for w in range(model.vocabulary_.size)
            ],
            comments=[_version_comment(), seed_comment],
        )
        run.emit(
            "doc_topic.csv",
            ["id", "topic", "probability"],
            [
                (doc_id, topic, repr(float(model.doc_topic_[d, topic])))
                for d, doc_id in enumerate(model.doc_ids_)
                for topic in range(model.n_topics)
            ],
            comments=[_version_comment(), seed_comment],
        )


def _growth_csv_rows(rows):
    return [
        (
            r.n_questions,
            r.hdp1_estimate,
            r.hdp1_used,
            repr(r.hdp1_efficiency),
            r.hdp2_estimate,
            r.hdp2_used,
            repr(r.hdp2_efficiency),
        )
        for r in rows
    ]


_GROWTH_HEADER = [
    "n_questions",
    "hdp1_estimate",
    "hdp1_used",
    "hdp1_efficiency",
    "hdp2_estimate",
    "hdp2_used",
    "hdp2_efficiency",
]


def cmd_growth(config: RunConfig, run: _Run):
    with run.stage("ingest"):
        corpus = _load_corpus(config)
    with run.stage("preprocess"):
        bow = _preprocessor(config).fit_transform(corpus)
    with run.stage("growth"):
        rows = growth_experiment(
            bow,
            config.experiment.step,
            _lda_proto(config),
            _hdp_proto(config),
            mode=config.estimator.mode,
        )
        run.emit(
            "growth.csv",
            _GROWTH_HEADER,
            _growth_csv_rows(rows),
            comments=[
                _version_comment(),
                f"seed={config.master_seed} hdp_seed={config.hdp_seed()} lda_seed={config.lda_seed()}",
            ],
        )


def cmd_permute(config: RunConfig, run: _Run):
    with run.stage("ingest"):
        corpus = _load_corpus(config)
    with run.stage("preprocess"):
        bow = _preprocessor(config).fit_transform(corpus)
    with run.stage("permute"):
        seeds = config.permutation_seeds()
        results = permutation_experiment(
            bow,
            len(seeds),
            seeds,
            config.experiment.step,
            _lda_proto(config),
            _hdp_proto(config),
            mode=config.estimator.mode,
        )
        for index, (seed, rows) in enumerate(results, start=1):
            run.emit(
                f"growth_perm{index:02d}.csv",
                _GROWTH_HEADER,
                _growth_csv_rows(rows),
                comments=[_version_comment(), f"seed={seed}"],
            )


def read_assignments(path) -> dict[str, int]:
    header, rows = read_csv(Path(path))
    if header[:2] != ["id", "topic"]:
        raise ValueError(f"{path}: expected an assignments file with header id,topic,...")
    return {row[0]: int(row[1]) for row in rows}


def cmd_compare(config: RunConfig, run: _Run, path_a, path_b, source_topic=None):
    with run.stage("compare"):
        assign_a = read_assignments(path_a)
        assign_b = read_assignments(path_b)
        comparison = compare_clusterings(assign_a, assign_b, source_topic=source_topic)
        run.emit(
            "compare.csv",
            ["topic_a", "topic_b", "size_a", "size_b", "intersection", "jaccard", "containment"],
            [
                (
                    p.topic_a,
                    p.topic_b,
                    p.size_a,
                    p.size_b,
                    p.intersection,
                    repr(p.jaccard),
                    repr(p.containment),
                )
                for p in comparison.matched_pairs
            ],
            comments=[
                _version_comment(),
                f"unmatched_a={';'.join(map(str, comparison.unmatched_a))}",
                f"unmatched_b={';'.join(map(str, comparison.unmatched_b))}",
            ],
        )
        if source_topic is not None:
            run.emit(
                "redistribution.csv",
                ["source_topic", "dest_topic", "count"],
                [
                    (source_topic, dest, count)
                    for dest, count in sorted(comparison.redistribution.items())
                ],
                comments=[_version_comment()],
            )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtopics",
        description="Cluster question banks by topic with tagging, LDA, and HDP estimation.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", "-c", help="INI run-config file")
    parser.add_argument("--out", help="output directory (overrides run.output_dir)")
    parser.add_argument(
        "--source-topic",
        type=int,
        default=None,
        help="compare only: source topic for the redistribution table",
    )
    parser.add_argument(
        "inputs",
        nargs="*",
        help="compare only: two assignments.csv files",
    )
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    known, unknown = build_parser().parse_known_args(argv)
    try:
        config = load_run_config(known.config) if known.config else RunConfig()
        apply_overrides(config, unknown)
        if known.out:
            config.output_dir = known.out
        out_dir = Path(config.output_dir)
        run = _Run(config, out_dir)
        if known.subcommand == "compare":
            if len(known.inputs) != 2:
                raise ValueError("compare needs exactly two assignments.csv paths")
            cmd_compare(config, run, known.inputs[0], known.inputs[1], known.source_topic)
        elif known.inputs:
            raise ValueError(f"unexpected positional arguments: {known.inputs}")
        else:
            handler = {
                "ingest": cmd_ingest,
                "preprocess": cmd_preprocess,
                "estimate": cmd_estimate,
                "cluster": cmd_cluster,
                "growth": cmd_growth,
                "permute": cmd_permute,
            }[known.subcommand]
            handler(config, run)
        run.write_manifest()
    except ContractViolationError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (ValueError, KeyError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
