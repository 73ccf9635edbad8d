"""Command-line orchestration: fit, generate, attack, detect, evaluate,
selftest.

Configuration precedence: command-line flags beat SENTMARK_* environment
variables, which beat `key=value` config-file entries, which beat defaults.
All randomness flows from one master ``--seed`` through tagged sub-seed
derivation (:func:`sentmark.rng.derive_seed`), so a whole pipeline re-run
with the same seed and inputs is byte-identical.

Exit codes: 0 ok, 2 configuration or data problem, 3 file I/O problem,
4 contract violation (dimensions, protocol, malformed artifacts).
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys

import numpy as np

from .attacks import AttackConfig, attack_document, default_synonym_table
from .detection import detect
from .embedding import EmbedderHandle, TOY_DIM, embed_batch
from .errors import (
    ConfigError,
    DegenerateCorpusError,
    DegenerateEmbeddingError,
    DegenerateGeneratorError,
    DimensionMismatchError,
    InsufficientDataError,
    InsufficientTextError,
    PartitionLoadError,
    ProtocolContractError,
    SentmarkError,
    TransportError,
    UndefinedMetricError,
    UndefinedStatisticError,
)
from .evaluation import efficiency_stats, ent3, roc_points, roc_report, sem_ent
from .generation import (
    DEFAULT_N_MAX,
    DEFAULT_PRIME,
    GenerationTrace,
    WatermarkConfig,
    generate_watermarked,
)
from .partition import fit_kmeans, fit_lsh, load_partition, save_partition
from .rng import Xoshiro256StarStar, derive_seed
from .sentences import split_sentences
from .toylm import GeneratorHandle, make_prompt

ENV_PREFIX = "SENTMARK_"


class SeedRole:
    """Tags for master-seed derivation; fixed so reruns reproduce."""

    EMBEDDER = 1
    FIT = 2
    GENERATOR = 3
    PROMPTS = 4
    ATTACK = 5
    SEM_ENT = 6
    SAMPLE = 7
    TABLE = 8


class FileFormatError(SentmarkError):
    """A data file exists but cannot be parsed."""


def read_jsonl(path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: invalid JSON line: {exc}") from exc
    return rows


def write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def read_documents(path) -> list[dict]:
    docs = []
    for i, row in enumerate(read_jsonl(path)):
        if "text" not in row:
            raise FileFormatError(f"{path}: row {i} has no 'text' field")
        docs.append({"doc_id": str(row.get("doc_id", f"doc-{i:05d}")), "text": row["text"]})
    return docs


def _parse_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line or line.startswith("["):
                continue
            if "=" not in line:
                raise FileFormatError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().lower().replace("-", "_")] = value.strip()
    return values


class Settings:
    """Resolve one option across flags, environment, and config file."""

    def __init__(self, args):
        self._args = args
        self._file = {}
        config_path = getattr(args, "config", None)
        if config_path:
            self._file = _parse_config_file(config_path)

    def get(self, key: str, default=None, cast=str):
        attr = key.replace("-", "_")
        flag = getattr(self._args, attr, None)
        if flag is not None:
            return flag
        env = os.environ.get(ENV_PREFIX + attr.upper())
        source = env if env is not None else self._file.get(attr)
        if source is None:
            return default
        try:
            return cast(source)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {source!r}") from exc


def parse_embedder_spec(spec: str | None, master_seed: int) -> EmbedderHandle:
    """``toy[:dim[:seed]]`` | ``process:dim:command`` | ``http:dim:url``."""
    if spec is None or spec == "toy":
        return EmbedderHandle("toy", TOY_DIM, derive_seed(master_seed, SeedRole.EMBEDDER))
    head, _, rest = spec.partition(":")
    if head == "toy":
        fields = rest.split(":") if rest else []
        dim = int(fields[0]) if fields and fields[0] else TOY_DIM
        seed = int(fields[1]) if len(fields) > 1 else derive_seed(master_seed, SeedRole.EMBEDDER)
        return EmbedderHandle("toy", dim, seed)
    if head in ("process", "http"):
        dim_str, _, target = rest.partition(":")
        if not dim_str or not target:
            raise ConfigError(f"embedder spec {spec!r} needs '{head}:<dim>:<target>'")
        dim = int(dim_str)
        if head == "process":
            endpoint = ("process", *shlex.split(target))
        else:
            endpoint = ("http", target)
        return EmbedderHandle("external", dim, 0, endpoint)
    raise ConfigError(f"unknown embedder spec: {spec!r}")


def parse_generator_spec(spec: str | None, seed: int) -> GeneratorHandle:
    """``toy[:spread]`` | ``process:command`` | ``http:url``."""
    if spec is None or spec == "toy":
        return GeneratorHandle("toy", seed)
    head, _, rest = spec.partition(":")
    if head == "toy":
        return GeneratorHandle("toy", seed, float(rest) if rest else 0.15)
    if head == "process":
        return GeneratorHandle("external", seed, endpoint=("process", *shlex.split(rest)))
    if head == "http":
        return GeneratorHandle("external", seed, endpoint=("http", rest))
    raise ConfigError(f"unknown generator spec: {spec!r}")


def _embed_all(embedder: EmbedderHandle, texts: list[str], chunk: int = 512):
    out = []
    for i in range(0, len(texts), chunk):
        out.extend(embed_batch(embedder, texts[i : i + chunk]))
    return out


def _watermark_config(settings: Settings, mode: str) -> WatermarkConfig:
    return WatermarkConfig(
        gamma=settings.get("gamma", 0.25, float),
        margin=settings.get("margin", 0.035, float),
        prime=settings.get("prime", DEFAULT_PRIME, int),
        n_max=settings.get("n-max", DEFAULT_N_MAX, int),
        mode=mode,
    )


def cmd_fit(args) -> int:
    settings = Settings(args)
    master = settings.get("seed", 0, int)
    mode = settings.get("mode", "kmeans")
    embedder = parse_embedder_spec(settings.get("embedder"), master)
    fit_seed = derive_seed(master, SeedRole.FIT)
    if mode == "kmeans":
        if not args.corpus:
            raise ConfigError("fit --mode kmeans requires --corpus")
        docs = read_documents(args.corpus)
        sentences = [s for d in docs for s in split_sentences(d["text"])]
        k = settings.get("k", 8, int)
        if len(sentences) < k:
            raise InsufficientDataError(
                f"corpus has {len(sentences)} sentences, fewer than k={k}"
            )
        sample = settings.get("sample", None, int)
        if sample is not None and sample < len(sentences):
            if sample < k:
                raise ConfigError(f"--sample {sample} is smaller than k={k}")
            rng = Xoshiro256StarStar(derive_seed(master, SeedRole.SAMPLE))
            order = list(range(len(sentences)))
            rng.shuffle(order)
            sentences = [sentences[i] for i in order[:sample]]
        vectors = np.stack(_embed_all(embedder, sentences))
        part = fit_kmeans(
            vectors,
            k,
            fit_seed,
            max_iters=settings.get("max-iters", 100, int),
            tol=settings.get("tol", 1e-6, float),
        )
        save_partition(part, args.out)
        print(
            f"fitted kmeans partition: K={part.k} dim={part.dim} "
            f"sentences={len(sentences)} iterations={part.n_iters} inertia={part.inertia:.6f}"
        )
    elif mode == "lsh":
        d = settings.get("d", 3, int)
        part = fit_lsh(d, embedder.dim, fit_seed)
        save_partition(part, args.out)
        print(f"fitted lsh partition: d={part.d} dim={part.dim} regions={part.region_count}")
    else:
        raise ConfigError(f"unknown mode: {mode!r}")
    return 0


def cmd_generate(args) -> int:
    settings = Settings(args)
    master = settings.get("seed", 0, int)
    partition = load_partition(args.partition)
    embedder = parse_embedder_spec(settings.get("embedder"), master)
    config = _watermark_config(settings, partition.mode)
    num_docs = settings.get("num-docs", 10, int)
    t_sentences = settings.get("sentences", 20, int)
    spread = settings.get("spread", None, float)

    prompts = None
    if args.prompts:
        prompts = [d["text"] for d in read_documents(args.prompts)]
        if len(prompts) < num_docs:
            raise ConfigError(f"{len(prompts)} prompts for {num_docs} docs")

    docs = []
    trace_rows = []
    total_candidates = 0
    total_fallbacks = 0
    for i in range(num_docs):
        prompt = prompts[i] if prompts else make_prompt(derive_seed(master, SeedRole.PROMPTS), i)
        gen_spec = settings.get("generator")
        lm = parse_generator_spec(gen_spec, derive_seed(master, SeedRole.GENERATOR, i))
        if spread is not None and lm.kind == "toy":
            lm = GeneratorHandle(lm.kind, lm.seed, spread)
        trace = generate_watermarked(lm, embedder, partition, config, prompt, t_sentences)
        doc_id = f"doc-{i:05d}"
        docs.append({"doc_id": doc_id, "text": trace.document_text()})
        total_candidates += trace.candidates_drawn()
        total_fallbacks += trace.fallback_count()
        if args.traces:
            for obj in trace.to_step_objects():
                trace_rows.append({"doc_id": doc_id, **obj})
    write_jsonl(args.out, docs)
    if args.traces:
        write_jsonl(args.traces, trace_rows)
    print(
        f"generated {num_docs} docs x {t_sentences} sentences: "
        f"{total_candidates / (num_docs * t_sentences):.2f} candidates/sentence, "
        f"{total_fallbacks} fallbacks"
    )
    return 0


def cmd_attack(args) -> int:
    settings = Settings(args)
    master = settings.get("seed", 0, int)
    embedder = parse_embedder_spec(settings.get("embedder"), master)
    method = settings.get("method", "lexical")
    strength = settings.get("strength", 0.2, float)
    target_similarity = settings.get("target-similarity", 0.8, float)
    attack_seed = derive_seed(master, SeedRole.ATTACK)

    table = {}
    if method == "lexical":
        table_dim = embedder.dim
        table_embed_seed = embedder.seed if embedder.kind == "toy" else 0
        table = default_synonym_table(
            table_dim, table_embed_seed, derive_seed(master, SeedRole.TABLE)
        )

    docs = read_documents(args.infile)
    attacked_rows = []
    sim_rows = []
    for i, doc in enumerate(docs):
        config = AttackConfig(
            method=method,
            strength=strength,
            seed=derive_seed(attack_seed, i),
            synonym_table=table,
            target_similarity=target_similarity,
        )
        new_text, sims = attack_document(doc["text"], config, embedder)
        attacked_rows.append({"doc_id": doc["doc_id"], "text": new_text})
        sim_rows.append({"doc_id": doc["doc_id"], "similarities": sims})
    write_jsonl(args.out, attacked_rows)
    if args.similarities:
        write_jsonl(args.similarities, sim_rows)
    mean_sim = sum(s for row in sim_rows for s in row["similarities"]) / max(
        1, sum(len(row["similarities"]) for row in sim_rows)
    )
    print(f"attacked {len(docs)} docs ({method}, strength {strength}): mean similarity {mean_sim:.4f}")
    return 0


def cmd_detect(args) -> int:
    settings = Settings(args)
    master = settings.get("seed", 0, int)
    partition = load_partition(args.partition)
    embedder = parse_embedder_spec(settings.get("embedder"), master)
    config = _watermark_config(settings, partition.mode)
    docs = read_documents(args.infile)
    rows = []
    for doc in docs:
        result = detect(doc["text"], partition, config, embedder)
        rows.append(
            {
                "doc_id": doc["doc_id"],
                "s_t": result.sentence_count,
                "s_v": result.valid_count,
                "z": result.z,
                "valid_flags": result.valid_flags,
            }
        )
    write_jsonl(args.out, rows)
    mean_z = sum(r["z"] for r in rows) / len(rows) if rows else float("nan")
    print(f"detected {len(rows)} docs: mean z {mean_z:.3f}")
    return 0


def cmd_evaluate(args) -> int:
    settings = Settings(args)
    master = settings.get("seed", 0, int)
    machine = read_jsonl(args.machine)
    human = read_jsonl(args.human)
    if not machine or not human:
        raise UndefinedMetricError("evaluate needs non-empty machine and human detections")
    pos = [float(r["z"]) for r in machine]
    neg = [float(r["z"]) for r in human]
    fpr_targets = [float(f) for f in settings.get("fpr", "0.01,0.05").split(",")]
    report_obj = roc_report(pos, neg, tuple(fpr_targets))

    ent3_bits = None
    sem_ent_bits = None
    sem_ent_meta = None
    if args.machine_docs:
        texts = [d["text"] for d in read_documents(args.machine_docs)]
        ent3_bits = ent3(texts)
        embedder = parse_embedder_spec(settings.get("embedder"), master)
        k = settings.get("sem-ent-k", 50, int)
        sem_ent_bits = sem_ent(texts, embedder, k=k, seed=derive_seed(master, SeedRole.SEM_ENT))
        sem_ent_meta = {
            "embedder": embedder.kind,
            "k": k,
            "note": "document embeddings are normalized means of sentence embeddings",
        }

    efficiency = None
    if args.traces:
        by_doc: dict[str, list] = {}
        for row in read_jsonl(args.traces):
            by_doc.setdefault(row.get("doc_id", ""), []).append(row)
        traces = [GenerationTrace.from_step_objects(objs) for objs in by_doc.values()]
        efficiency = efficiency_stats(traces).to_dict()

    report = {
        "auc": report_obj.auc,
        "tp_at_fpr": {f"{f:g}": report_obj.tp_at[f] for f in fpr_targets},
        "n_machine": report_obj.n_pos,
        "n_human": report_obj.n_neg,
        "ent3_bits": ent3_bits,
        "sem_ent_bits": sem_ent_bits,
        "sem_ent_meta": sem_ent_meta,
        "efficiency": efficiency,
        "ppl": None,
        "bertscore": None,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    if args.roc_csv:
        with open(args.roc_csv, "w", encoding="utf-8") as fh:
            fh.write("threshold,fpr,tpr\n")
            for thr, fp, tp in roc_points(pos, neg):
                fh.write(f"{thr!r},{fp!r},{tp!r}\n")
    tp_text = " ".join(f"tp@{f:g}={report_obj.tp_at[f]:.3f}" for f in fpr_targets)
    print(f"auc={report_obj.auc:.4f} {tp_text} (n={report_obj.n_pos}+{report_obj.n_neg})")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest(verbose=True)
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentmark",
        description="Sentence-level semantic watermarking: fit partitions, generate, "
        "attack, detect, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file (flags win)")
        p.add_argument("--seed", type=int, help="master seed (default 0)")
        p.add_argument("--embedder", help="toy[:dim[:seed]] | process:dim:cmd | http:dim:url")

    p = sub.add_parser("fit", help="fit a semantic-space partition")
    common(p)
    p.add_argument("--corpus", help="JSON-lines corpus of {'text': ...} (kmeans mode)")
    p.add_argument("--mode", choices=["kmeans", "lsh"])
    p.add_argument("--k", type=int, help="number of clusters (kmeans)")
    p.add_argument("--d", type=int, help="number of hyperplanes (lsh)")
    p.add_argument("--sample", type=int, help="fit on a seeded sample of this many sentences")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", required=True, help="partition file to write")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("generate", help="generate watermarked documents")
    common(p)
    p.add_argument("--partition", required=True)
    p.add_argument("--generator", help="toy[:spread] | process:cmd | http:url")
    p.add_argument("--gamma", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--prime", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--num-docs", type=int)
    p.add_argument("--sentences", type=int, help="sentences per document")
    p.add_argument("--spread", type=float, help="toy generator topic-bleed knob")
    p.add_argument("--prompts", help="optional JSON-lines prompts")
    p.add_argument("--out", required=True, help="documents JSON-lines to write")
    p.add_argument("--traces", help="optional generation-trace JSON-lines to write")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("attack", help="paraphrase-attack documents")
    common(p)
    p.add_argument("--in", dest="infile", required=True, help="documents JSON-lines")
    p.add_argument("--method", choices=["lexical", "resample"])
    p.add_argument("--strength", type=float)
    p.add_argument("--target-similarity", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--similarities", help="sidecar JSON-lines of per-sentence similarities")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("detect", help="detect the watermark in documents")
    common(p)
    p.add_argument("--in", dest="infile", required=True, help="documents JSON-lines")
    p.add_argument("--partition", required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--prime", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--out", required=True, help="detection JSON-lines to write")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="ROC/quality report from detections")
    common(p)
    p.add_argument("--machine", required=True, help="detection JSON-lines, machine docs")
    p.add_argument("--human", required=True, help="detection JSON-lines, human docs")
    p.add_argument("--machine-docs", help="machine documents (enables ent3/sem_ent)")
    p.add_argument("--traces", help="generation traces (enables efficiency stats)")
    p.add_argument("--fpr", help="comma-separated FPR targets (default 0.01,0.05)")
    p.add_argument("--sem-ent-k", type=int)
    p.add_argument("--out", required=True, help="JSON report to write")
    p.add_argument("--roc-csv", help="optional CSV of ROC points")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("selftest", help="run the built-in oracle suite")
    common(p)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args) or 0
    except (FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        DimensionMismatchError,
        ProtocolContractError,
        TransportError,
        PartitionLoadError,
        DegenerateEmbeddingError,
        DegenerateGeneratorError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (
        ConfigError,
        InsufficientDataError,
        InsufficientTextError,
        DegenerateCorpusError,
        UndefinedMetricError,
        UndefinedStatisticError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
